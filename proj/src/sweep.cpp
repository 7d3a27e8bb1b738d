#include "salkit/sweep.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace salkit {

namespace {

Gmm2D make_prediction(const SweepSpec& spec, double param) {
    std::vector<GmmComponent> comps = spec.gt.components();
    switch (spec.scenario) {
    case SweepScenario::Variance:
        comps[0].cov = {param * param, 0.0, param * param};
        break;
    case SweepScenario::SingleModeLocation:
        comps[0].mean.x = param;
        break;
    case SweepScenario::TwoModeLocation:
        comps[1].mean.x = param;
        break;
    case SweepScenario::TwoModeWeight:
        comps[0].weight = param;
        comps[1].weight = 1.0 - param;
        break;
    }
    return Gmm2D(std::move(comps), spec.gt.cov_mode());
}

FixationSet mode_center_fixations(const Gmm2D& gt, int height, int width) {
    std::vector<Fixation> points;
    for (const GmmComponent& c : gt.components()) {
        int col = std::clamp(static_cast<int>(std::floor(c.mean.x * width)), 0, width - 1);
        int row = std::clamp(static_cast<int>(std::floor(c.mean.y * height)), 0, height - 1);
        points.push_back({col, row});
    }
    return FixationSet(height, width, std::move(points));
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

} // namespace

const char* sweep_scenario_name(SweepScenario scenario) {
    switch (scenario) {
    case SweepScenario::Variance: return "variance";
    case SweepScenario::SingleModeLocation: return "single-mode-location";
    case SweepScenario::TwoModeLocation: return "two-mode-location";
    case SweepScenario::TwoModeWeight: return "two-mode-weight";
    }
    return "?";
}

std::optional<SweepScenario> parse_sweep_scenario(const std::string& name) {
    for (SweepScenario s : {SweepScenario::Variance, SweepScenario::SingleModeLocation,
                            SweepScenario::TwoModeLocation, SweepScenario::TwoModeWeight})
        if (name == sweep_scenario_name(s)) return s;
    return std::nullopt;
}

const char* sweep_loss_name(SweepLoss loss) {
    switch (loss) {
    case SweepLoss::KLdiv: return "kldiv";
    case SweepLoss::CC: return "cc";
    case SweepLoss::NLL: return "nll";
    case SweepLoss::NSS: return "nss";
    case SweepLoss::SIM: return "sim";
    }
    return "?";
}

std::optional<SweepLoss> parse_sweep_loss(const std::string& name) {
    for (SweepLoss l : {SweepLoss::KLdiv, SweepLoss::CC, SweepLoss::NLL, SweepLoss::NSS,
                        SweepLoss::SIM})
        if (name == sweep_loss_name(l)) return l;
    return std::nullopt;
}

SweepSpec::SweepSpec(SweepScenario scenario_in, Gmm2D gt_in, double lo_in, double hi_in,
                     int steps_in)
    : scenario(scenario_in), gt(std::move(gt_in)), lo(lo_in), hi(hi_in), steps(steps_in) {}

void SweepSpec::validate() const {
    if (!(lo < hi))
        throw Error(ErrorKind::InvalidArgument, "sweep range requires lo < hi");
    if (steps < 3)
        throw Error(ErrorKind::InvalidArgument, "sweep needs at least 3 steps");
    if (raster_height < 2 || raster_width < 2)
        throw Error(ErrorKind::InvalidArgument, "raster size must be at least 2x2");
    if (losses.empty())
        throw Error(ErrorKind::InvalidArgument, "sweep needs at least one loss");

    const int C = gt.component_count();
    switch (scenario) {
    case SweepScenario::Variance: {
        if (C != 1)
            throw Error(ErrorKind::IncompatibleScenario,
                        "variance sweep needs a single-component ground truth");
        const Sym2& cov = gt.components()[0].cov;
        if (cov.xy != 0.0 || cov.xx != cov.yy)
            throw Error(ErrorKind::IncompatibleScenario,
                        "variance sweep needs an isotropic ground truth");
        if (!(lo > 0.0))
            throw Error(ErrorKind::IncompatibleScenario, "variance sweep needs sigma > 0");
        break;
    }
    case SweepScenario::SingleModeLocation:
        if (C != 1)
            throw Error(ErrorKind::IncompatibleScenario,
                        "single-mode sweep needs a single-component ground truth");
        break;
    case SweepScenario::TwoModeLocation:
    case SweepScenario::TwoModeWeight:
        if (C != 2)
            throw Error(ErrorKind::IncompatibleScenario,
                        "two-mode sweeps need exactly two components");
        if (scenario == SweepScenario::TwoModeWeight && !(lo > 0.0 && hi < 1.0))
            throw Error(ErrorKind::IncompatibleScenario,
                        "weight sweep must stay inside (0, 1)");
        break;
    }
}

double SweepSpec::gt_param() const {
    const auto& comps = gt.components();
    switch (scenario) {
    case SweepScenario::Variance: return std::sqrt(comps[0].cov.xx);
    case SweepScenario::SingleModeLocation: return comps[0].mean.x;
    case SweepScenario::TwoModeLocation: return comps[1].mean.x;
    case SweepScenario::TwoModeWeight: return comps[0].weight;
    }
    return 0.0;
}

SweepResult run_sweep(const SweepSpec& spec) {
    spec.validate();

    const int h = spec.raster_height, w = spec.raster_width;
    SaliencyMap gt_raster = rasterize(spec.gt, h, w);
    SaliencyMap gt_dist = normalize_to_distribution(gt_raster);
    FixationSet fix = mode_center_fixations(spec.gt, h, w);

    SweepResult result;
    result.gt_param = spec.gt_param();
    for (SweepLoss l : spec.losses) result.loss_names.push_back(sweep_loss_name(l));
    result.curves.assign(spec.losses.size(), {});

    for (int s = 0; s < spec.steps; ++s) {
        double param = spec.lo + (spec.hi - spec.lo) * s / (spec.steps - 1);
        result.params.push_back(param);
        Gmm2D pred = make_prediction(spec, param);
        SaliencyMap pred_raster = rasterize(pred, h, w);
        SaliencyMap pred_dist = normalize_to_distribution(pred_raster);
        for (std::size_t li = 0; li < spec.losses.size(); ++li) {
            double value = 0.0;
            switch (spec.losses[li]) {
            case SweepLoss::KLdiv: value = kldiv(pred_dist, gt_dist, spec.eps); break;
            case SweepLoss::CC: value = cc(pred_raster, gt_raster); break;
            case SweepLoss::NLL: value = nll(pred, gt_dist, spec.eps); break;
            case SweepLoss::NSS: value = nss(pred_raster, fix); break;
            case SweepLoss::SIM: value = sim(pred_dist, gt_dist); break;
            }
            result.curves[li].push_back(value);
        }
    }
    return result;
}

std::vector<SweepSpec> builtin_scenarios(int raster_height, int raster_width) {
    return {builtin_scenario(SweepScenario::Variance, raster_height, raster_width),
            builtin_scenario(SweepScenario::SingleModeLocation, raster_height, raster_width),
            builtin_scenario(SweepScenario::TwoModeLocation, raster_height, raster_width),
            builtin_scenario(SweepScenario::TwoModeWeight, raster_height, raster_width)};
}

SweepSpec builtin_scenario(SweepScenario scenario, int raster_height, int raster_width) {
    const double v1 = 0.1 * 0.1;   // central single mode
    const double v2 = 0.08 * 0.08; // two-mode ground truth
    Gmm2D central({{1.0, {0.5, 0.5}, {v1, 0.0, v1}}}, CovMode::Diagonal);
    Gmm2D two_mode({{0.5, {0.3, 0.5}, {v2, 0.0, v2}}, {0.5, {0.7, 0.5}, {v2, 0.0, v2}}},
                   CovMode::Diagonal);

    switch (scenario) {
    case SweepScenario::Variance: {
        // Multiples of 0.025 so sigma/2, sigma and 2*sigma are grid points.
        SweepSpec spec(scenario, central, 0.025, 0.4, 16);
        spec.raster_height = raster_height;
        spec.raster_width = raster_width;
        return spec;
    }
    case SweepScenario::SingleModeLocation: {
        SweepSpec spec(scenario, central, 0.1, 0.9, 17);
        spec.raster_height = raster_height;
        spec.raster_width = raster_width;
        return spec;
    }
    case SweepScenario::TwoModeLocation: {
        SweepSpec spec(scenario, two_mode, 0.1, 0.9, 17);
        spec.raster_height = raster_height;
        spec.raster_width = raster_width;
        return spec;
    }
    case SweepScenario::TwoModeWeight:
    default: {
        SweepSpec spec(scenario, two_mode, 0.1, 0.9, 17);
        spec.raster_height = raster_height;
        spec.raster_width = raster_width;
        return spec;
    }
    }
}

std::string sweep_to_csv(const SweepResult& result) {
    std::string out = "param";
    for (const std::string& name : result.loss_names) out += "," + name;
    out += "\n";
    for (std::size_t i = 0; i < result.params.size(); ++i) {
        out += format_double(result.params[i]);
        for (const auto& curve : result.curves) out += "," + format_double(curve[i]);
        out += "\n";
    }
    return out;
}

} // namespace salkit
