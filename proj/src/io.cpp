#include "salkit/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace salkit::io {

using nlohmann::json;

std::string format_g17(double value) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", value);
    return buf;
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error(ErrorKind::IoError, "cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw Error(ErrorKind::IoError, "cannot write " + path.string());
    out << content;
    if (!out)
        throw Error(ErrorKind::IoError, "failed writing " + path.string());
}

SaliencyMap read_map(const std::filesystem::path& path) {
    std::string ext = path.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) {
        return static_cast<char>(std::tolower(c));
    });
    if (ext == ".pgm" || ext == ".pnm") return read_pgm(path);
    if (ext == ".csv") return read_csv_map(path);
    throw Error(ErrorKind::ParseError,
                path.string() + ": unsupported map format (expected .pgm/.pnm or .csv)");
}

namespace {

// Reads the next PNM header token, skipping whitespace and '#' comments.
std::string next_pnm_token(std::istream& in, const std::filesystem::path& path) {
    std::string token;
    int ch;
    while ((ch = in.get()) != EOF) {
        if (ch == '#') {
            while ((ch = in.get()) != EOF && ch != '\n') {}
            continue;
        }
        if (std::isspace(ch)) {
            if (!token.empty()) return token;
            continue;
        }
        token.push_back(static_cast<char>(ch));
    }
    if (token.empty())
        throw Error(ErrorKind::ParseError, path.string() + ": truncated PGM header");
    return token;
}

long parse_long(const std::string& token, const std::filesystem::path& path, const char* what) {
    try {
        std::size_t pos = 0;
        long v = std::stol(token, &pos);
        if (pos != token.size()) throw std::invalid_argument(token);
        return v;
    } catch (const std::exception&) {
        throw Error(ErrorKind::ParseError,
                    path.string() + ": bad PGM " + what + " '" + token + "'");
    }
}

} // namespace

SaliencyMap read_pgm(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error(ErrorKind::IoError, "cannot open " + path.string());

    std::string magic = next_pnm_token(in, path);
    if (magic != "P2" && magic != "P5")
        throw Error(ErrorKind::ParseError, path.string() + ": expected P2 or P5, got " + magic);
    long width = parse_long(next_pnm_token(in, path), path, "width");
    long height = parse_long(next_pnm_token(in, path), path, "height");
    long maxval = parse_long(next_pnm_token(in, path), path, "maxval");
    if (width < 1 || height < 1)
        throw Error(ErrorKind::ParseError, path.string() + ": bad PGM dimensions");
    if (maxval != 255 && maxval != 65535)
        throw Error(ErrorKind::ParseError,
                    path.string() + ": unsupported maxval " + std::to_string(maxval));

    std::vector<double> values;
    values.reserve(static_cast<std::size_t>(width) * height);
    if (magic == "P2") {
        for (long i = 0; i < width * height; ++i) {
            long v = parse_long(next_pnm_token(in, path), path, "sample");
            if (v < 0 || v > maxval)
                throw Error(ErrorKind::ParseError, path.string() + ": sample out of range");
            values.push_back(static_cast<double>(v));
        }
    } else {
        // Exactly one whitespace byte separates the header from the data.
        const int bytes = maxval > 255 ? 2 : 1;
        std::vector<unsigned char> raw(static_cast<std::size_t>(width) * height * bytes);
        in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
        if (in.gcount() != static_cast<std::streamsize>(raw.size()))
            throw Error(ErrorKind::ParseError, path.string() + ": truncated PGM data");
        for (std::size_t i = 0; i < raw.size(); i += bytes) {
            unsigned v = bytes == 2 ? (static_cast<unsigned>(raw[i]) << 8) | raw[i + 1] : raw[i];
            if (v > static_cast<unsigned>(maxval))
                throw Error(ErrorKind::ParseError, path.string() + ": sample out of range");
            values.push_back(static_cast<double>(v));
        }
    }
    return SaliencyMap(static_cast<int>(height), static_cast<int>(width), std::move(values),
                       MapState::Raw);
}

void write_pgm(const SaliencyMap& map, const std::filesystem::path& path, int maxval, bool ascii) {
    if (maxval != 255 && maxval != 65535)
        throw Error(ErrorKind::InvalidArgument, "PGM maxval must be 255 or 65535");
    if (map.state() == MapState::Standardized)
        throw Error(ErrorKind::WrongState, "cannot write a Standardized map as PGM");

    double peak = map.max_value();
    double scale = peak > 0.0 ? maxval / peak : 0.0;

    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw Error(ErrorKind::IoError, "cannot write " + path.string());
    out << (ascii ? "P2" : "P5") << "\n" << map.width() << " " << map.height() << "\n"
        << maxval << "\n";
    for (int r = 0; r < map.height(); ++r) {
        for (int c = 0; c < map.width(); ++c) {
            long v = std::lround(map.at(r, c) * scale);
            v = std::clamp(v, 0L, static_cast<long>(maxval));
            if (ascii) {
                out << v << (c + 1 == map.width() ? "\n" : " ");
            } else if (maxval > 255) {
                out.put(static_cast<char>((v >> 8) & 0xff));
                out.put(static_cast<char>(v & 0xff));
            } else {
                out.put(static_cast<char>(v & 0xff));
            }
        }
    }
    if (!out)
        throw Error(ErrorKind::IoError, "failed writing " + path.string());
}

SaliencyMap read_csv_map(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in)
        throw Error(ErrorKind::IoError, "cannot open " + path.string());
    std::vector<double> values;
    std::string line;
    int width = -1, height = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string cellstr;
        int cols = 0;
        while (std::getline(ss, cellstr, ',')) {
            try {
                std::size_t pos = 0;
                values.push_back(std::stod(cellstr, &pos));
            } catch (const std::exception&) {
                throw Error(ErrorKind::ParseError,
                            path.string() + ": bad number '" + cellstr + "' on row " +
                                std::to_string(height + 1));
            }
            ++cols;
        }
        if (width < 0) width = cols;
        if (cols != width)
            throw Error(ErrorKind::ParseError,
                        path.string() + ": row " + std::to_string(height + 1) + " has " +
                            std::to_string(cols) + " columns, expected " + std::to_string(width));
        ++height;
    }
    if (height == 0)
        throw Error(ErrorKind::ParseError, path.string() + ": empty grid");
    try {
        return SaliencyMap(height, width, std::move(values), MapState::Raw);
    } catch (const Error& e) {
        throw Error(ErrorKind::ParseError, path.string() + ": " + e.what());
    }
}

void write_csv_map(const SaliencyMap& map, const std::filesystem::path& path) {
    std::string out;
    for (int r = 0; r < map.height(); ++r) {
        for (int c = 0; c < map.width(); ++c) {
            out += format_g17(map.at(r, c));
            out += (c + 1 == map.width()) ? "\n" : ",";
        }
    }
    write_text_file(path, out);
}

FixationSet read_fixations(const std::filesystem::path& path, int height, int width) {
    std::ifstream in(path);
    if (!in)
        throw Error(ErrorKind::IoError, "cannot open " + path.string());
    std::vector<Fixation> points;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line.find_first_not_of(" \t\r") == std::string::npos) continue;
        int x = 0, y = 0;
        char extra = 0;
        if (std::sscanf(line.c_str(), " %d , %d %c", &x, &y, &extra) != 2)
            throw Error(ErrorKind::ParseError,
                        path.string() + ":" + std::to_string(lineno) + ": expected 'x,y'");
        if (x < 0 || x >= width || y < 0 || y >= height)
            throw Error(ErrorKind::ParseError,
                        path.string() + ":" + std::to_string(lineno) + ": fixation (" +
                            std::to_string(x) + "," + std::to_string(y) + ") outside " +
                            std::to_string(height) + "x" + std::to_string(width));
        points.push_back({x, y});
    }
    return FixationSet(height, width, std::move(points));
}

void write_fixations(const FixationSet& fix, const std::filesystem::path& path) {
    std::string out;
    for (const Fixation& p : fix.points())
        out += std::to_string(p.x) + "," + std::to_string(p.y) + "\n";
    write_text_file(path, out);
}

namespace {

json require_field(const json& j, const char* key, const char* where) {
    if (!j.contains(key))
        throw Error(ErrorKind::SchemaError, std::string(where) + " is missing '" + key + "'");
    return j.at(key);
}

double number_field(const json& j, const char* key, const char* where) {
    json v = require_field(j, key, where);
    if (!v.is_number())
        throw Error(ErrorKind::SchemaError, std::string(where) + "." + key + " must be a number");
    return v.get<double>();
}

Gmm2D gmm_from_json(const json& j) {
    if (!j.is_object())
        throw Error(ErrorKind::SchemaError, "GMM document must be a JSON object");
    std::string mode_name = require_field(j, "cov_mode", "gmm").get<std::string>();
    CovMode mode;
    if (mode_name == "diag")
        mode = CovMode::Diagonal;
    else if (mode_name == "full")
        mode = CovMode::FullCholesky;
    else
        throw Error(ErrorKind::SchemaError, "cov_mode must be 'diag' or 'full'");

    json comps = require_field(j, "components", "gmm");
    if (!comps.is_array() || comps.empty())
        throw Error(ErrorKind::SchemaError, "components must be a non-empty array");

    std::vector<GmmComponent> out;
    double wsum = 0.0;
    for (const json& cj : comps) {
        GmmComponent comp;
        comp.weight = number_field(cj, "weight", "component");
        json mean = require_field(cj, "mean", "component");
        json cov = require_field(cj, "cov", "component");
        if (!mean.is_array() || mean.size() != 2)
            throw Error(ErrorKind::SchemaError, "mean must be [mx, my]");
        if (!cov.is_array() || cov.size() != 2 || !cov[0].is_array() || cov[0].size() != 2 ||
            !cov[1].is_array() || cov[1].size() != 2)
            throw Error(ErrorKind::SchemaError, "cov must be a 2x2 array");
        comp.mean = {mean[0].get<double>(), mean[1].get<double>()};
        double xy = cov[0][1].get<double>(), yx = cov[1][0].get<double>();
        if (std::abs(xy - yx) > 1e-12)
            throw Error(ErrorKind::SchemaError, "cov must be symmetric");
        if (mode == CovMode::Diagonal && xy != 0.0)
            throw Error(ErrorKind::SchemaError, "diag mode requires zero covariance cross terms");
        comp.cov = {cov[0][0].get<double>(), xy, cov[1][1].get<double>()};
        wsum += comp.weight;
        out.push_back(comp);
    }
    if (std::abs(wsum - 1.0) > 1e-6)
        throw Error(ErrorKind::SchemaError,
                    "component weights sum to " + format_g17(wsum) + ", expected 1 within 1e-6");
    for (GmmComponent& c : out) c.weight /= wsum;
    try {
        return Gmm2D(std::move(out), mode);
    } catch (const Error& e) {
        throw Error(ErrorKind::SchemaError, e.what());
    }
}

json gmm_to_json(const Gmm2D& g) {
    json comps = json::array();
    for (const GmmComponent& c : g.components()) {
        comps.push_back({{"weight", c.weight},
                         {"mean", {c.mean.x, c.mean.y}},
                         {"cov", {{c.cov.xx, c.cov.xy}, {c.cov.xy, c.cov.yy}}}});
    }
    return {{"cov_mode", cov_mode_name(g.cov_mode())}, {"components", comps}};
}

json parse_json_text(const std::string& text, const char* what) {
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded())
        throw Error(ErrorKind::ParseError, std::string("invalid JSON in ") + what);
    return j;
}

} // namespace

Gmm2D parse_gmm_json(const std::string& text) {
    return gmm_from_json(parse_json_text(text, "GMM document"));
}

std::string gmm_to_json_string(const Gmm2D& g) {
    return gmm_to_json(g).dump(2) + "\n";
}

Gmm2D read_gmm_json(const std::filesystem::path& path) {
    try {
        return parse_gmm_json(read_text_file(path));
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::IoError) throw;
        throw Error(e.kind(), path.string() + ": " + e.what());
    }
}

void write_gmm_json(const Gmm2D& g, const std::filesystem::path& path) {
    write_text_file(path, gmm_to_json_string(g));
}

SweepSpec parse_sweep_spec_json(const std::string& text) {
    json j = parse_json_text(text, "sweep spec");
    std::string scenario_name = require_field(j, "scenario", "sweep spec").get<std::string>();
    auto scenario = parse_sweep_scenario(scenario_name);
    if (!scenario) {
        std::string valid;
        for (SweepScenario s : {SweepScenario::Variance, SweepScenario::SingleModeLocation,
                                SweepScenario::TwoModeLocation, SweepScenario::TwoModeWeight})
            valid += std::string(valid.empty() ? "" : ", ") + sweep_scenario_name(s);
        throw Error(ErrorKind::SchemaError,
                    "unknown scenario '" + scenario_name + "' (valid: " + valid + ")");
    }
    Gmm2D gt = gmm_from_json(require_field(j, "gt", "sweep spec"));
    double lo = number_field(j, "lo", "sweep spec");
    double hi = number_field(j, "hi", "sweep spec");
    int steps = static_cast<int>(number_field(j, "steps", "sweep spec"));

    SweepSpec spec(*scenario, std::move(gt), lo, hi, steps);
    if (j.contains("raster")) {
        json r = j.at("raster");
        if (!r.is_array() || r.size() != 2)
            throw Error(ErrorKind::SchemaError, "raster must be [height, width]");
        spec.raster_height = r[0].get<int>();
        spec.raster_width = r[1].get<int>();
    }
    if (j.contains("losses")) {
        spec.losses.clear();
        for (const json& lj : j.at("losses")) {
            auto loss = parse_sweep_loss(lj.get<std::string>());
            if (!loss)
                throw Error(ErrorKind::SchemaError,
                            "unknown loss '" + lj.get<std::string>() +
                                "' (valid: kldiv, cc, nll, nss, sim)");
            spec.losses.push_back(*loss);
        }
    }
    if (j.contains("eps")) {
        try {
            spec.eps = EpsilonConfig(number_field(j, "eps", "sweep spec"));
        } catch (const Error& e) {
            throw Error(ErrorKind::SchemaError, e.what());
        }
    }
    try {
        spec.validate();
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::IncompatibleScenario) throw;
        throw Error(ErrorKind::SchemaError, e.what());
    }
    return spec;
}

std::string sweep_spec_to_json_string(const SweepSpec& spec) {
    json losses = json::array();
    for (SweepLoss l : spec.losses) losses.push_back(sweep_loss_name(l));
    json j = {{"scenario", sweep_scenario_name(spec.scenario)},
              {"gt", gmm_to_json(spec.gt)},
              {"lo", spec.lo},
              {"hi", spec.hi},
              {"steps", spec.steps},
              {"raster", {spec.raster_height, spec.raster_width}},
              {"losses", losses},
              {"eps", spec.eps.eps}};
    return j.dump(2) + "\n";
}

SweepSpec read_sweep_spec(const std::filesystem::path& path) {
    try {
        return parse_sweep_spec_json(read_text_file(path));
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::IoError) throw;
        throw Error(e.kind(), path.string() + ": " + e.what());
    }
}

void write_sweep_spec(const SweepSpec& spec, const std::filesystem::path& path) {
    write_text_file(path, sweep_spec_to_json_string(spec));
}

} // namespace salkit::io
