#ifndef SALKIT_SWEEP_HPP_
#define SALKIT_SWEEP_HPP_

#include <optional>
#include <string>
#include <vector>

#include "salkit/gmm.hpp"
#include "salkit/metrics.hpp"

namespace salkit {

/// Which prediction parameter a sweep varies against a fixed ground truth.
enum class SweepScenario { Variance, SingleModeLocation, TwoModeLocation, TwoModeWeight };

/// Losses recorded along a sweep. CC/NSS/SIM are stored as the raw metric
/// (higher is better); KLdiv and NLL as-is (lower is better).
enum class SweepLoss { KLdiv, CC, NLL, NSS, SIM };

const char* sweep_scenario_name(SweepScenario scenario);
std::optional<SweepScenario> parse_sweep_scenario(const std::string& name);
const char* sweep_loss_name(SweepLoss loss);
std::optional<SweepLoss> parse_sweep_loss(const std::string& name);

/// Declarative description of one synthetic loss-behavior sweep.
/// Variance and SingleModeLocation need a single-component ground truth
/// (Variance additionally isotropic); the two-mode scenarios need exactly
/// two components, and the weight sweep must stay inside (0, 1).
struct SweepSpec {
    SweepSpec(SweepScenario scenario, Gmm2D gt, double lo, double hi, int steps);

    SweepScenario scenario;
    Gmm2D gt;
    double lo;
    double hi;
    int steps;
    int raster_height = 256;
    int raster_width = 256;
    std::vector<SweepLoss> losses = {SweepLoss::KLdiv, SweepLoss::CC, SweepLoss::NLL,
                                     SweepLoss::NSS, SweepLoss::SIM};
    EpsilonConfig eps;

    void validate() const;

    /// Ground-truth value of the swept parameter.
    double gt_param() const;
};

struct SweepResult {
    std::vector<double> params;
    std::vector<std::string> loss_names;
    std::vector<std::vector<double>> curves; // one per loss, same length as params
    double gt_param = 0.0;
};

/// Evaluate every requested loss at each swept parameter value. Both the
/// ground truth and each prediction mixture are rasterized at the spec's
/// resolution; NSS fixations sit at the ground-truth mode centers.
SweepResult run_sweep(const SweepSpec& spec);

/// Four ready-made sweeps, one per scenario: a central isotropic mode
/// (sigma 0.1) for the variance and location rows, and a two-mode ground
/// truth at (0.3,0.5) / (0.7,0.5) with sigma 0.08 for the rest.
std::vector<SweepSpec> builtin_scenarios(int raster_height = 256, int raster_width = 256);

SweepSpec builtin_scenario(SweepScenario scenario, int raster_height = 256,
                           int raster_width = 256);

/// CSV with header "param,<loss1>,<loss2>,..." and one row per point.
std::string sweep_to_csv(const SweepResult& result);

} // namespace salkit

#endif // SALKIT_SWEEP_HPP_
