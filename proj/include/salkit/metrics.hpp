#ifndef SALKIT_METRICS_HPP_
#define SALKIT_METRICS_HPP_

#include <optional>
#include <set>
#include <string>

#include "salkit/core.hpp"

namespace salkit {

enum class MetricKind { KLdiv, CC, NSS, SIM, AUC, SAUC, IG, EMD };

const char* metric_kind_name(MetricKind kind);
std::optional<MetricKind> parse_metric_kind(const std::string& name);

/// Kullback-Leibler divergence from prediction P to ground truth Q,
/// sum_i Q_i * ln(eps + Q_i / (P_i + eps)), natural log. Heavily penalizes
/// predicted mass missing where Q has mass.
double kldiv(const SaliencyMap& pred, const SaliencyMap& gt, const EpsilonConfig& eps = {});

/// Pearson linear correlation over all pixels; symmetric, affine-invariant.
double cc(const SaliencyMap& a, const SaliencyMap& b);

/// Normalized Scanpath Saliency: mean z-scored prediction value at
/// fixation points. Constant maps score 0.
double nss(const SaliencyMap& pred, const FixationSet& fix);

/// Histogram intersection sum_i min(P_i, Q_i) between two distributions.
double sim(const SaliencyMap& pred, const SaliencyMap& gt);

/// AUC-Judd: ROC area with fixated pixels as positives, all other pixels
/// as negatives, thresholds at the fixated saliency values (>= counts as
/// positive), trapezoidal integration.
double auc_judd(const SaliencyMap& pred, const FixationSet& fix);

/// Shuffled AUC: like auc_judd but negatives come from the supplied
/// negative fixation set (typically fixations of other images).
double sauc(const SaliencyMap& pred, const FixationSet& fix, const FixationSet& negatives);

/// Information gain over a baseline, mean over fixations of
/// log2(P + eps) - log2(baseline + eps).
double info_gain(const SaliencyMap& pred, const SaliencyMap& baseline, const FixationSet& fix,
                 const EpsilonConfig& eps = {});

/// Earth mover's distance between two same-shape distributions with
/// Euclidean cell-center ground costs in pixel units. Exact solver;
/// grids above 4096 cells must be downsampled first.
double emd(const SaliencyMap& pred, const SaliencyMap& gt);

inline constexpr std::size_t kEmdMaxCells = 4096;

/// Per-image metric values; fields are set only when computed.
struct MetricReport {
    std::optional<double> kldiv;
    std::optional<double> cc;
    std::optional<double> nss;
    std::optional<double> sim;
    std::optional<double> auc;
    std::optional<double> sauc;
    std::optional<double> ig;
    std::optional<double> emd;

    std::optional<double> get(MetricKind kind) const;
};

struct EvaluateOptions {
    /// When empty, every metric whose inputs are available is computed.
    std::set<MetricKind> select;
    /// Use a uniform IG baseline when none is supplied.
    bool uniform_ig_baseline = false;
    EpsilonConfig eps;
};

/// Compute the selected (or all computable) metrics for one image.
/// `pred` may be Raw or Distribution; it is normalized or standardized
/// internally as each metric requires. sauc needs `negatives`, ig needs a
/// baseline (or the uniform flag), emd needs <= 4096 cells.
MetricReport evaluate_all(const SaliencyMap& pred, const SaliencyMap& gt_density,
                          const FixationSet& fix, const FixationSet* negatives = nullptr,
                          const SaliencyMap* baseline = nullptr, const EvaluateOptions& opts = {});

} // namespace salkit

#endif // SALKIT_METRICS_HPP_
