#include "salkit/core.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

namespace salkit {

const char* error_kind_name(ErrorKind kind) {
    switch (kind) {
    case ErrorKind::AllZeroMap: return "AllZeroMap";
    case ErrorKind::EmptyFixations: return "EmptyFixations";
    case ErrorKind::EmptyNegatives: return "EmptyNegatives";
    case ErrorKind::ShapeMismatch: return "ShapeMismatch";
    case ErrorKind::WrongState: return "WrongState";
    case ErrorKind::ConstantMap: return "ConstantMap";
    case ErrorKind::GridTooLarge: return "GridTooLarge";
    case ErrorKind::SingularCovariance: return "SingularCovariance";
    case ErrorKind::LengthMismatch: return "LengthMismatch";
    case ErrorKind::MissingFixations: return "MissingFixations";
    case ErrorKind::IncompatibleScenario: return "IncompatibleScenario";
    case ErrorKind::IoError: return "IoError";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::SchemaError: return "SchemaError";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    }
    return "UnknownError";
}

const char* map_state_name(MapState state) {
    switch (state) {
    case MapState::Raw: return "Raw";
    case MapState::Distribution: return "Distribution";
    case MapState::Standardized: return "Standardized";
    }
    return "?";
}

SaliencyMap::SaliencyMap(int height, int width, MapState state)
    : height_(height), width_(width), state_(state),
      values_(static_cast<std::size_t>(height > 0 ? height : 0) * (width > 0 ? width : 0), 0.0) {
    if (height < 1 || width < 1)
        throw Error(ErrorKind::InvalidArgument, "map dimensions must be positive");
    if (state == MapState::Distribution)
        throw Error(ErrorKind::WrongState, "an all-zero map cannot be a Distribution");
}

SaliencyMap::SaliencyMap(int height, int width, std::vector<double> values, MapState state)
    : height_(height), width_(width), state_(state), values_(std::move(values)) {
    validate();
}

void SaliencyMap::validate() const {
    if (height_ < 1 || width_ < 1)
        throw Error(ErrorKind::InvalidArgument, "map dimensions must be positive");
    if (values_.size() != static_cast<std::size_t>(height_) * width_)
        throw Error(ErrorKind::ShapeMismatch, "value count does not match height*width");
    for (double v : values_) {
        if (!std::isfinite(v))
            throw Error(ErrorKind::InvalidArgument, "map contains a non-finite value");
        if (v < 0.0 && state_ != MapState::Standardized)
            throw Error(ErrorKind::InvalidArgument,
                        std::string(map_state_name(state_)) + " map contains a negative value");
    }
    if (state_ == MapState::Distribution) {
        if (std::abs(sum() - 1.0) > 1e-9)
            throw Error(ErrorKind::WrongState, "Distribution map does not sum to 1");
    } else if (state_ == MapState::Standardized) {
        double n = static_cast<double>(values_.size());
        double mean = sum() / n;
        double var = 0.0;
        for (double v : values_) var += (v - mean) * (v - mean);
        double sd = std::sqrt(var / n);
        bool all_zero = std::all_of(values_.begin(), values_.end(), [](double v) { return v == 0.0; });
        if (!(std::abs(mean) <= 1e-9 && (std::abs(sd - 1.0) <= 1e-9 || all_zero)))
            throw Error(ErrorKind::WrongState, "Standardized map is not z-scored");
    }
}

double SaliencyMap::sum() const {
    double s = 0.0;
    for (double v : values_) s += v;
    return s;
}

double SaliencyMap::max_value() const {
    return *std::max_element(values_.begin(), values_.end());
}

std::size_t SaliencyMap::argmax() const {
    return static_cast<std::size_t>(
        std::max_element(values_.begin(), values_.end()) - values_.begin());
}

FixationSet::FixationSet(int height, int width, std::vector<Fixation> points)
    : height_(height), width_(width), points_(std::move(points)) {
    if (height < 1 || width < 1)
        throw Error(ErrorKind::InvalidArgument, "fixation bounds must be positive");
    for (const Fixation& p : points_) {
        if (p.x < 0 || p.x >= width || p.y < 0 || p.y >= height)
            throw Error(ErrorKind::InvalidArgument,
                        "fixation (" + std::to_string(p.x) + "," + std::to_string(p.y) +
                            ") outside bounds " + std::to_string(height) + "x" + std::to_string(width));
    }
}

std::vector<Fixation> FixationSet::unique_points() const {
    std::set<std::pair<int, int>> seen;
    for (const Fixation& p : points_) seen.insert({p.y, p.x});
    std::vector<Fixation> out;
    out.reserve(seen.size());
    for (const auto& [y, x] : seen) out.push_back({x, y});
    return out;
}

EpsilonConfig::EpsilonConfig(double value) : eps(value) {
    if (!(value > 0.0 && value < 1e-3))
        throw Error(ErrorKind::InvalidArgument, "eps must lie in (0, 1e-3)");
}

SaliencyMap normalize_to_distribution(const SaliencyMap& map) {
    if (map.state() == MapState::Standardized)
        throw Error(ErrorKind::WrongState, "cannot normalize a Standardized map");
    double total = map.sum();
    if (total <= 0.0)
        throw Error(ErrorKind::AllZeroMap, "map has no positive mass to normalize");
    std::vector<double> out(map.values().begin(), map.values().end());
    for (double& v : out) v /= total;
    return SaliencyMap(map.height(), map.width(), std::move(out), MapState::Distribution);
}

SaliencyMap standardize(const SaliencyMap& map) {
    auto vals = map.values();
    auto [lo, hi] = std::minmax_element(vals.begin(), vals.end());
    std::vector<double> out(vals.size(), 0.0);
    if (*lo == *hi)
        return SaliencyMap(map.height(), map.width(), std::move(out), MapState::Standardized);

    double n = static_cast<double>(vals.size());
    double mean = map.sum() / n;
    double var = 0.0;
    for (double v : vals) var += (v - mean) * (v - mean);
    double sd = std::sqrt(var / n);
    for (std::size_t i = 0; i < vals.size(); ++i) out[i] = (vals[i] - mean) / sd;
    return SaliencyMap(map.height(), map.width(), std::move(out), MapState::Standardized);
}

SaliencyMap density_from_fixations(const FixationSet& fix, double sigma_px) {
    if (fix.empty())
        throw Error(ErrorKind::EmptyFixations, "cannot build a density from zero fixations");
    if (!(sigma_px > 0.0))
        throw Error(ErrorKind::InvalidArgument, "sigma_px must be positive");

    const int h = fix.height();
    const int w = fix.width();
    const int radius = static_cast<int>(std::ceil(4.0 * sigma_px));
    const double inv_two_sigma2 = 1.0 / (2.0 * sigma_px * sigma_px);

    std::vector<double> acc(static_cast<std::size_t>(h) * w, 0.0);
    for (const Fixation& p : fix.points()) {
        int r0 = std::max(0, p.y - radius), r1 = std::min(h - 1, p.y + radius);
        int c0 = std::max(0, p.x - radius), c1 = std::min(w - 1, p.x + radius);
        for (int r = r0; r <= r1; ++r) {
            double dy = r - p.y;
            for (int c = c0; c <= c1; ++c) {
                double dx = c - p.x;
                acc[static_cast<std::size_t>(r) * w + c] +=
                    std::exp(-(dx * dx + dy * dy) * inv_two_sigma2);
            }
        }
    }
    return normalize_to_distribution(SaliencyMap(h, w, std::move(acc), MapState::Raw));
}

SaliencyMap binary_map(const FixationSet& fix) {
    std::vector<double> out(static_cast<std::size_t>(fix.height()) * fix.width(), 0.0);
    for (const Fixation& p : fix.points())
        out[static_cast<std::size_t>(p.y) * fix.width() + p.x] = 1.0;
    return SaliencyMap(fix.height(), fix.width(), std::move(out), MapState::Raw);
}

SaliencyMap area_downsample(const SaliencyMap& map, int new_height, int new_width) {
    if (new_height < 1 || new_width < 1)
        throw Error(ErrorKind::InvalidArgument, "target dimensions must be positive");
    const int h = map.height(), w = map.width();
    const double ry = static_cast<double>(h) / new_height;
    const double rx = static_cast<double>(w) / new_width;
    std::vector<double> out(static_cast<std::size_t>(new_height) * new_width, 0.0);
    for (int i = 0; i < new_height; ++i) {
        double y0 = i * ry, y1 = (i + 1) * ry;
        int rb = std::min(h - 1, static_cast<int>(std::ceil(y1)) - 1);
        for (int j = 0; j < new_width; ++j) {
            double x0 = j * rx, x1 = (j + 1) * rx;
            int cb = std::min(w - 1, static_cast<int>(std::ceil(x1)) - 1);
            double acc = 0.0;
            for (int r = static_cast<int>(std::floor(y0)); r <= rb; ++r) {
                double wy = std::min<double>(r + 1, y1) - std::max<double>(r, y0);
                if (wy <= 0.0) continue;
                for (int c = static_cast<int>(std::floor(x0)); c <= cb; ++c) {
                    double wx = std::min<double>(c + 1, x1) - std::max<double>(c, x0);
                    if (wx <= 0.0) continue;
                    acc += wy * wx * map.at(r, c);
                }
            }
            out[static_cast<std::size_t>(i) * new_width + j] = acc / (ry * rx);
        }
    }
    return SaliencyMap(new_height, new_width, std::move(out), MapState::Raw);
}

} // namespace salkit
