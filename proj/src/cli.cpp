#include "salkit/cli.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <map>
#include <sstream>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "salkit/io.hpp"
#include "salkit/sweep.hpp"

namespace salkit::cli {

using nlohmann::json;

namespace {

constexpr int kEmdDownsampleSide = 64;

// Canonical column order for reports.
const MetricKind kMetricOrder[] = {MetricKind::KLdiv, MetricKind::CC,  MetricKind::NSS,
                                   MetricKind::SIM,   MetricKind::AUC, MetricKind::SAUC,
                                   MetricKind::IG,    MetricKind::EMD};

std::map<std::string, std::filesystem::path> list_by_stem(const std::filesystem::path& path,
                                                          const char* role) {
    std::map<std::string, std::filesystem::path> out;
    if (std::filesystem::is_directory(path)) {
        for (const auto& entry : std::filesystem::directory_iterator(path)) {
            if (!entry.is_regular_file()) continue;
            std::string stem = entry.path().stem().string();
            if (out.count(stem))
                throw Error(ErrorKind::IoError, std::string(role) + " directory " + path.string() +
                                                    " has duplicate stem '" + stem + "'");
            out[stem] = entry.path();
        }
    } else if (std::filesystem::is_regular_file(path)) {
        out[path.stem().string()] = path;
    } else {
        throw Error(ErrorKind::IoError, std::string(role) + " path " + path.string() +
                                            " is not a file or directory");
    }
    if (out.empty())
        throw Error(ErrorKind::IoError,
                    std::string(role) + " directory " + path.string() + " is empty");
    return out;
}

void require_matching_stems(const std::map<std::string, std::filesystem::path>& base,
                            const std::map<std::string, std::filesystem::path>& other,
                            const std::filesystem::path& other_dir, const char* role) {
    for (const auto& [stem, path] : base)
        if (!other.count(stem))
            throw Error(ErrorKind::IoError, std::string("missing ") + role + " file for '" + stem +
                                                "' in " + other_dir.string());
    for (const auto& [stem, path] : other)
        if (!base.count(stem))
            throw Error(ErrorKind::IoError, std::string("unmatched ") + role + " file " +
                                                path.string() + " (no prediction named '" + stem +
                                                "')");
}

struct ImageInputs {
    std::string stem;
    std::filesystem::path pred, gt, fix, neg;
};

std::string format_metric(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.9f", v);
    return buf;
}

} // namespace

int cmd_eval(const EvalJob& job, std::ostream& diag) {
    if (job.out.empty())
        throw Error(ErrorKind::InvalidArgument, "eval needs an output path");
    if (job.format != "csv" && job.format != "json")
        throw Error(ErrorKind::InvalidArgument, "format must be csv or json");
    EpsilonConfig eps(job.eps);

    const bool have_fix = !job.fix.empty();
    const bool have_neg = !job.negatives.empty();
    const bool uniform_baseline = job.ig_baseline == "uniform";
    const bool file_baseline = !uniform_baseline && job.ig_baseline != "none";

    // Default selection: everything computable from the supplied inputs,
    // except EMD which is opt-in.
    std::set<MetricKind> selected = job.metrics;
    if (selected.empty()) {
        selected = {MetricKind::KLdiv, MetricKind::CC, MetricKind::SIM};
        if (have_fix) {
            selected.insert(MetricKind::NSS);
            selected.insert(MetricKind::AUC);
            if (uniform_baseline || file_baseline) selected.insert(MetricKind::IG);
            if (have_neg) selected.insert(MetricKind::SAUC);
        }
    } else {
        auto need = [&](MetricKind k, bool ok, const char* what) {
            if (selected.count(k) && !ok)
                throw Error(ErrorKind::InvalidArgument,
                            std::string(metric_kind_name(k)) + " requires " + what);
        };
        need(MetricKind::NSS, have_fix, "--fix");
        need(MetricKind::AUC, have_fix, "--fix");
        need(MetricKind::SAUC, have_fix && have_neg, "--fix and --neg");
        need(MetricKind::IG, have_fix && (uniform_baseline || file_baseline),
             "--fix and an IG baseline");
    }

    auto preds = list_by_stem(job.pred, "prediction");
    auto gts = list_by_stem(job.gt, "ground-truth");
    require_matching_stems(preds, gts, job.gt, "ground-truth");
    std::map<std::string, std::filesystem::path> fixes, negs;
    if (have_fix) {
        fixes = list_by_stem(job.fix, "fixation");
        require_matching_stems(preds, fixes, job.fix, "fixation");
    }
    if (have_neg) {
        negs = list_by_stem(job.negatives, "negative-fixation");
        require_matching_stems(preds, negs, job.negatives, "negative-fixation");
    }

    std::vector<ImageInputs> images;
    for (const auto& [stem, path] : preds) {
        ImageInputs in;
        in.stem = stem;
        in.pred = path;
        in.gt = gts.at(stem);
        if (have_fix) in.fix = fixes.at(stem);
        if (have_neg) in.neg = negs.at(stem);
        images.push_back(std::move(in));
    }

    std::optional<SaliencyMap> baseline_map;
    if (file_baseline) baseline_map = io::read_map(job.ig_baseline);

    std::vector<std::optional<MetricReport>> reports(images.size());
    std::vector<std::string> failures(images.size());
    std::vector<std::string> notes;
    std::atomic<bool> emd_downsampled{false};
    std::atomic<std::size_t> next{0};

    auto worker = [&]() {
        for (std::size_t i = next.fetch_add(1); i < images.size(); i = next.fetch_add(1)) {
            const ImageInputs& in = images[i];
            try {
                SaliencyMap pred = io::read_map(in.pred);
                SaliencyMap gt = io::read_map(in.gt);
                if (!pred.same_shape(gt))
                    throw Error(ErrorKind::ShapeMismatch,
                                in.gt.string() + ": shape differs from prediction");
                FixationSet fix = have_fix
                                      ? io::read_fixations(in.fix, pred.height(), pred.width())
                                      : FixationSet(pred.height(), pred.width(), {});

                EvaluateOptions opts;
                opts.eps = eps;
                opts.uniform_ig_baseline = uniform_baseline;
                opts.select = selected;
                opts.select.erase(MetricKind::EMD); // handled below, may need downsampling

                std::optional<FixationSet> neg;
                if (have_neg) neg = io::read_fixations(in.neg, pred.height(), pred.width());

                MetricReport report;
                if (!opts.select.empty())
                    report = evaluate_all(pred, gt, fix, neg ? &*neg : nullptr,
                                          baseline_map ? &*baseline_map : nullptr, opts);
                if (selected.count(MetricKind::EMD)) {
                    SaliencyMap p = pred, q = gt;
                    if (p.size() > kEmdMaxCells) {
                        int th = std::min(p.height(), kEmdDownsampleSide);
                        int tw = std::min(p.width(), kEmdDownsampleSide);
                        p = area_downsample(p, th, tw);
                        q = area_downsample(q, th, tw);
                        emd_downsampled = true;
                    }
                    report.emd = emd(normalize_to_distribution(p), normalize_to_distribution(q));
                }
                reports[i] = std::move(report);
            } catch (const std::exception& e) {
                failures[i] = in.stem + ": " + e.what();
            }
        }
    };

    unsigned jobs = job.jobs > 0 ? static_cast<unsigned>(job.jobs)
                                 : std::max(1u, std::thread::hardware_concurrency());
    jobs = std::min<unsigned>(jobs, images.size());
    if (jobs <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < jobs; ++t) pool.emplace_back(worker);
        for (std::thread& t : pool) t.join();
    }

    if (emd_downsampled)
        notes.push_back("emd computed on maps area-downsampled to at most " +
                        std::to_string(kEmdDownsampleSide) + "x" +
                        std::to_string(kEmdDownsampleSide));

    bool any_failure = false;
    for (std::size_t i = 0; i < images.size(); ++i) {
        if (!failures[i].empty()) {
            any_failure = true;
            diag << "error: " << failures[i] << "\n";
        }
    }
    if (any_failure && !job.keep_partial) {
        diag << "no report written (use --keep-partial to keep successful rows)\n";
        return 1;
    }

    // Column order: canonical, restricted to the selection.
    std::vector<MetricKind> columns;
    for (MetricKind k : kMetricOrder)
        if (selected.count(k)) columns.push_back(k);

    std::vector<std::size_t> ok_rows;
    for (std::size_t i = 0; i < images.size(); ++i)
        if (reports[i]) ok_rows.push_back(i);

    std::map<MetricKind, double> mean;
    for (MetricKind k : columns) {
        double acc = 0.0;
        std::size_t count = 0;
        for (std::size_t i : ok_rows) {
            if (auto v = reports[i]->get(k)) {
                acc += *v;
                ++count;
            }
        }
        if (count > 0) mean[k] = acc / static_cast<double>(count);
    }

    if (job.format == "csv") {
        std::string out = "name";
        for (MetricKind k : columns) out += std::string(",") + metric_kind_name(k);
        out += "\n";
        for (std::size_t i : ok_rows) {
            out += images[i].stem;
            for (MetricKind k : columns) {
                auto v = reports[i]->get(k);
                out += ",";
                out += v ? format_metric(*v) : "";
            }
            out += "\n";
        }
        out += "mean";
        for (MetricKind k : columns) {
            out += ",";
            out += mean.count(k) ? format_metric(mean.at(k)) : "";
        }
        out += "\n";
        io::write_text_file(job.out, out);
        for (const std::string& n : notes) diag << "note: " << n << "\n";
    } else {
        json jimages = json::array();
        for (std::size_t i : ok_rows) {
            json metrics_json;
            for (MetricKind k : columns)
                if (auto v = reports[i]->get(k)) metrics_json[metric_kind_name(k)] = *v;
            jimages.push_back({{"name", images[i].stem}, {"metrics", metrics_json}});
        }
        json jmean;
        for (const auto& [k, v] : mean) jmean[metric_kind_name(k)] = v;
        json doc = {{"images", jimages},
                    {"mean", jmean},
                    {"metadata", {{"eps", job.eps}, {"notes", notes}}}};
        io::write_text_file(job.out, doc.dump(2) + "\n");
    }
    return any_failure ? 1 : 0;
}

int cmd_fit(const FitJob& job, std::ostream& diag) {
    if (job.out.empty())
        throw Error(ErrorKind::InvalidArgument, "fit needs an output path");
    if (job.components < 1 || job.components > kMaxComponents)
        throw Error(ErrorKind::InvalidArgument,
                    "--components must lie in [1, " + std::to_string(kMaxComponents) + "]");

    SaliencyMap gt = normalize_to_distribution(io::read_map(job.gt));

    LossSpec spec({{LossKind::NLL, 1.0}, {LossKind::CC, job.cc_weight}}, EpsilonConfig(job.eps));
    FitOptions opts;
    opts.iterations = job.iterations;
    opts.seed = job.seed;
    opts.adam.lr = job.lr;
    FitResult result = fit_gmm(gt, job.components, job.cov_mode, spec, opts);

    io::write_gmm_json(result.gmm, job.out);

    std::filesystem::path trace_path = job.out;
    trace_path.replace_extension("");
    trace_path += ".trace.csv";
    std::string trace = "iter,loss\n";
    for (std::size_t i = 0; i < result.loss_trace.size(); ++i)
        trace += std::to_string(i) + "," + io::format_g17(result.loss_trace[i]) + "\n";
    io::write_text_file(trace_path, trace);

    diag << "fit: " << result.iterations << " iterations, best loss "
         << io::format_g17(result.best_loss) << (result.converged ? " (converged)" : "") << "\n";
    return 0;
}

int cmd_render(const RenderJob& job, std::ostream& diag) {
    if (job.out.empty())
        throw Error(ErrorKind::InvalidArgument, "render needs an output path");
    Gmm2D g = io::read_gmm_json(job.gmm);
    SaliencyMap dist = normalize_to_distribution(rasterize(g, job.height, job.width));
    io::write_pgm(dist, job.out, 65535, job.ascii);
    diag << "render: wrote " << job.height << "x" << job.width << " map to " << job.out.string()
         << "\n";
    return 0;
}

int cmd_sweep(const SweepJob& job, std::ostream& diag) {
    if (job.out.empty())
        throw Error(ErrorKind::InvalidArgument, "sweep needs an output path");
    if (job.builtin.empty() == job.spec.empty())
        throw Error(ErrorKind::InvalidArgument, "sweep needs exactly one of --builtin or --spec");

    std::optional<SweepSpec> spec;
    if (!job.builtin.empty()) {
        auto scenario = parse_sweep_scenario(job.builtin);
        if (!scenario) {
            std::string valid;
            for (SweepScenario s : {SweepScenario::Variance, SweepScenario::SingleModeLocation,
                                    SweepScenario::TwoModeLocation, SweepScenario::TwoModeWeight})
                valid += std::string(valid.empty() ? "" : ", ") + sweep_scenario_name(s);
            throw Error(ErrorKind::SchemaError,
                        "unknown builtin '" + job.builtin + "' (valid: " + valid + ")");
        }
        spec = builtin_scenario(*scenario);
    } else {
        spec = io::read_sweep_spec(job.spec);
    }
    if (job.raster_height > 0) spec->raster_height = job.raster_height;
    if (job.raster_width > 0) spec->raster_width = job.raster_width;

    SweepResult result = run_sweep(*spec);
    io::write_text_file(job.out, sweep_to_csv(result));

    std::filesystem::path spec_path = job.out;
    spec_path.replace_extension("");
    spec_path += ".spec.json";
    io::write_sweep_spec(*spec, spec_path);

    diag << "sweep: " << result.params.size() << " points, gt param "
         << io::format_g17(result.gt_param) << "\n";
    return 0;
}

int run(int argc, const char* const* argv) {
    CLI::App app{"saliency metric evaluation and parametric saliency toolkit"};
    app.require_subcommand(1);

    EvalJob eval_job;
    std::string eval_metrics;
    CLI::App* eval = app.add_subcommand("eval", "evaluate predictions against ground truth");
    eval->add_option("--pred", eval_job.pred, "prediction map file or directory")->required();
    eval->add_option("--gt", eval_job.gt, "ground-truth density file or directory")->required();
    eval->add_option("--fix", eval_job.fix, "fixation CSV file or directory");
    eval->add_option("--neg", eval_job.negatives, "negative fixation file or directory (sauc)");
    eval->add_option("--ig-baseline", eval_job.ig_baseline,
                     "'uniform', 'none', or a baseline map file");
    eval->add_option("--metrics", eval_metrics,
                     "comma list from kldiv,cc,nss,sim,auc,sauc,ig,emd");
    eval->add_option("--eps", eval_job.eps, "log regularization constant");
    eval->add_option("--format", eval_job.format, "csv or json")
        ->check(CLI::IsMember({"csv", "json"}));
    eval->add_option("--out", eval_job.out, "report path")->required();
    eval->add_flag("--keep-partial", eval_job.keep_partial,
                   "write successful rows even when some images fail");
    eval->add_option("--jobs", eval_job.jobs, "worker threads (default: available parallelism)");

    FitJob fit_job;
    std::string fit_mode = "diag";
    CLI::App* fit = app.add_subcommand("fit", "fit a Gaussian mixture to a density map");
    fit->add_option("--gt", fit_job.gt, "target density map")->required();
    fit->add_option("--components", fit_job.components, "number of Gaussians (default 32)");
    fit->add_option("--cov-mode", fit_mode, "diag or full")
        ->check(CLI::IsMember({"diag", "full"}));
    fit->add_option("--iters", fit_job.iterations, "Adam iterations");
    fit->add_option("--seed", fit_job.seed, "initialization seed");
    fit->add_option("--lr", fit_job.lr, "Adam learning rate");
    fit->add_option("--cc-weight", fit_job.cc_weight, "weight of the CC loss term");
    fit->add_option("--eps", fit_job.eps, "log regularization constant");
    fit->add_option("--out", fit_job.out, "output GMM JSON path")->required();

    RenderJob render_job;
    CLI::App* render = app.add_subcommand("render", "rasterize a GMM JSON to a PGM map");
    render->add_option("--gmm", render_job.gmm, "GMM JSON path")->required();
    render->add_option("--height", render_job.height, "raster height");
    render->add_option("--width", render_job.width, "raster width");
    render->add_flag("--ascii", render_job.ascii, "write P2 instead of P5");
    render->add_option("--out", render_job.out, "output PGM path")->required();

    SweepJob sweep_job;
    CLI::App* sweep = app.add_subcommand("sweep", "run a synthetic loss-behavior sweep");
    sweep->add_option("--builtin", sweep_job.builtin,
                      "variance, single-mode-location, two-mode-location or two-mode-weight");
    sweep->add_option("--spec", sweep_job.spec, "sweep spec JSON path");
    sweep->add_option("--height", sweep_job.raster_height, "raster height override");
    sweep->add_option("--width", sweep_job.raster_width, "raster width override");
    sweep->add_option("--out", sweep_job.out, "output CSV path")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (eval->parsed()) {
            if (!eval_metrics.empty()) {
                std::stringstream ss(eval_metrics);
                std::string name;
                while (std::getline(ss, name, ',')) {
                    auto kind = parse_metric_kind(name);
                    if (!kind)
                        throw Error(ErrorKind::InvalidArgument,
                                    "unknown metric '" + name +
                                        "' (valid: kldiv,cc,nss,sim,auc,sauc,ig,emd)");
                    eval_job.metrics.insert(*kind);
                }
            }
            return cmd_eval(eval_job, std::cerr);
        }
        if (fit->parsed()) {
            fit_job.cov_mode = fit_mode == "full" ? CovMode::FullCholesky : CovMode::Diagonal;
            return cmd_fit(fit_job, std::cerr);
        }
        if (render->parsed()) return cmd_render(render_job, std::cerr);
        if (sweep->parsed()) return cmd_sweep(sweep_job, std::cerr);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}

} // namespace salkit::cli
