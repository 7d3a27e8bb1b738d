#ifndef SALKIT_FIT_HPP_
#define SALKIT_FIT_HPP_

#include <cstdint>
#include <span>
#include <vector>

#include "salkit/core.hpp"
#include "salkit/gmm.hpp"

namespace salkit {

enum class LossKind { KL, CC, NSS, NLL };

const char* loss_kind_name(LossKind kind);

struct LossTerm {
    LossKind kind;
    double weight = 1.0;
};

/// Weighted combination of loss terms. CC always enters as weight * (1 - cc)
/// and NSS as weight * (-nss), so the composite is minimized. KL and NLL
/// cannot be combined (NLL is the mixture-domain analogue of KL).
class LossSpec {
public:
    explicit LossSpec(std::vector<LossTerm> terms, EpsilonConfig eps = {});

    static LossSpec map_default(); // KL + CC, weights 1
    static LossSpec gmm_default(); // NLL + CC, weights 1

    const std::vector<LossTerm>& terms() const { return terms_; }
    const EpsilonConfig& eps() const { return eps_; }
    bool has(LossKind kind) const;
    double weight(LossKind kind) const; // 0 when the term is absent

private:
    std::vector<LossTerm> terms_;
    EpsilonConfig eps_;
};

struct AdamConfig {
    double lr = 1e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

/// Moment estimates for one optimized parameter vector.
class AdamState {
public:
    explicit AdamState(std::size_t dim, AdamConfig config = {});

    const AdamConfig& config() const { return config_; }
    long step_count() const { return step_; }
    std::span<const double> first_moment() const { return m_; }
    std::span<const double> second_moment() const { return v_; }

    friend void adam_step(AdamState&, ParamVector&, std::span<const double>);

private:
    AdamConfig config_;
    long step_ = 0;
    std::vector<double> m_;
    std::vector<double> v_;
};

/// One bias-corrected Adam update, in place. Deterministic.
void adam_step(AdamState& state, ParamVector& theta, std::span<const double> grad);

/// Weighted sum of map-domain losses: KL -> kldiv(normalize(P), Q),
/// CC -> 1 - cc(P, Q), NSS -> -nss(P, fix). The NSS term requires `fix`.
double composite_map_loss(const SaliencyMap& pred, const SaliencyMap& gt, const FixationSet* fix,
                          const LossSpec& spec);

struct GmmLossValue {
    double value = 0.0;
    std::vector<double> grad;
};

/// Mixture-domain composite: weighted NLL plus weighted (1 - CC) between
/// the mixture's raster and the ground truth, with the analytic gradient
/// flowing through the rasterized cell densities. The spec must contain
/// an NLL term.
GmmLossValue composite_gmm_loss(const ParamVector& theta, const SaliencyMap& gt, int components,
                                CovMode mode, const LossSpec& spec);

struct FitOptions {
    int iterations = 2000;
    std::uint64_t seed = 0;
    AdamConfig adam;        // lr 1e-4 default
    double stop_tolerance = 1e-7;
    int stop_window = 50;
    double init_sigma = 0.1;
};

struct FitResult {
    Gmm2D gmm;
    ParamVector theta;
    std::vector<double> loss_trace; // one entry per executed iteration
    int iterations = 0;
    bool converged = false;
    double best_loss = 0.0;
};

/// Gradient-descent fit of a C-component mixture to a ground-truth
/// distribution. Means are initialized by sampling cells proportional to
/// the target (seeded), sigma starts at init_sigma, weights uniform.
/// Returns the best iterate seen. Bit-reproducible for a fixed seed.
FitResult fit_gmm(const SaliencyMap& gt, int components, CovMode mode,
                  const LossSpec& spec = LossSpec::gmm_default(), const FitOptions& opts = {});

/// Max over coordinates of |a-b| / max(|a|, |b|, 1e-12).
double max_relative_error(std::span<const double> a, std::span<const double> b);

/// Compare the analytic composite gradient against central finite
/// differences with the given step; returns the max relative error.
double grad_check(const ParamVector& theta, const SaliencyMap& gt, int components, CovMode mode,
                  const LossSpec& spec, double step);

} // namespace salkit

#endif // SALKIT_FIT_HPP_
