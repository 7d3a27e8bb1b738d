#include "salkit/fit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "salkit/metrics.hpp"

namespace salkit {

const char* loss_kind_name(LossKind kind) {
    switch (kind) {
    case LossKind::KL: return "kl";
    case LossKind::CC: return "cc";
    case LossKind::NSS: return "nss";
    case LossKind::NLL: return "nll";
    }
    return "?";
}

LossSpec::LossSpec(std::vector<LossTerm> terms, EpsilonConfig eps)
    : terms_(std::move(terms)), eps_(eps) {
    if (terms_.empty())
        throw Error(ErrorKind::InvalidArgument, "loss spec needs at least one term");
    for (std::size_t i = 0; i < terms_.size(); ++i) {
        if (!std::isfinite(terms_[i].weight) || terms_[i].weight < 0.0)
            throw Error(ErrorKind::InvalidArgument, "loss weights must be finite and non-negative");
        for (std::size_t j = i + 1; j < terms_.size(); ++j)
            if (terms_[i].kind == terms_[j].kind)
                throw Error(ErrorKind::InvalidArgument,
                            std::string("duplicate loss term ") + loss_kind_name(terms_[i].kind));
    }
    if (has(LossKind::KL) && has(LossKind::NLL))
        throw Error(ErrorKind::InvalidArgument, "KL and NLL cannot be combined in one spec");
}

LossSpec LossSpec::map_default() {
    return LossSpec({{LossKind::KL, 1.0}, {LossKind::CC, 1.0}});
}

LossSpec LossSpec::gmm_default() {
    return LossSpec({{LossKind::NLL, 1.0}, {LossKind::CC, 1.0}});
}

bool LossSpec::has(LossKind kind) const {
    return std::any_of(terms_.begin(), terms_.end(),
                       [kind](const LossTerm& t) { return t.kind == kind; });
}

double LossSpec::weight(LossKind kind) const {
    for (const LossTerm& t : terms_)
        if (t.kind == kind) return t.weight;
    return 0.0;
}

AdamState::AdamState(std::size_t dim, AdamConfig config)
    : config_(config), m_(dim, 0.0), v_(dim, 0.0) {
    if (!(config.lr > 0.0) || !(config.beta1 >= 0.0 && config.beta1 < 1.0) ||
        !(config.beta2 >= 0.0 && config.beta2 < 1.0) || !(config.eps > 0.0))
        throw Error(ErrorKind::InvalidArgument, "invalid Adam hyperparameters");
}

void adam_step(AdamState& state, ParamVector& theta, std::span<const double> grad) {
    if (theta.size() != state.m_.size() || grad.size() != state.m_.size())
        throw Error(ErrorKind::LengthMismatch, "theta/gradient length does not match Adam state");
    const AdamConfig& c = state.config_;
    state.step_ += 1;
    const double bc1 = 1.0 - std::pow(c.beta1, static_cast<double>(state.step_));
    const double bc2 = 1.0 - std::pow(c.beta2, static_cast<double>(state.step_));
    for (std::size_t i = 0; i < grad.size(); ++i) {
        state.m_[i] = c.beta1 * state.m_[i] + (1.0 - c.beta1) * grad[i];
        state.v_[i] = c.beta2 * state.v_[i] + (1.0 - c.beta2) * grad[i] * grad[i];
        const double mhat = state.m_[i] / bc1;
        const double vhat = state.v_[i] / bc2;
        theta[i] -= c.lr * mhat / (std::sqrt(vhat) + c.eps);
    }
}

double composite_map_loss(const SaliencyMap& pred, const SaliencyMap& gt, const FixationSet* fix,
                          const LossSpec& spec) {
    if (spec.has(LossKind::NLL))
        throw Error(ErrorKind::InvalidArgument,
                    "NLL applies to mixtures; use composite_gmm_loss");
    if (spec.has(LossKind::NSS) && (fix == nullptr || fix->empty()))
        throw Error(ErrorKind::MissingFixations, "loss spec includes NSS but no fixations given");

    double total = 0.0;
    for (const LossTerm& term : spec.terms()) {
        switch (term.kind) {
        case LossKind::KL:
            total += term.weight * kldiv(normalize_to_distribution(pred),
                                         normalize_to_distribution(gt), spec.eps());
            break;
        case LossKind::CC:
            total += term.weight * (1.0 - cc(pred, gt));
            break;
        case LossKind::NSS:
            total += term.weight * (-nss(pred, *fix));
            break;
        case LossKind::NLL:
            break; // rejected above
        }
    }
    return total;
}

GmmLossValue composite_gmm_loss(const ParamVector& theta, const SaliencyMap& gt, int components,
                                CovMode mode, const LossSpec& spec) {
    if (!spec.has(LossKind::NLL))
        throw Error(ErrorKind::InvalidArgument, "composite_gmm_loss requires an NLL term");
    for (const LossTerm& t : spec.terms())
        if (t.kind != LossKind::NLL && t.kind != LossKind::CC)
            throw Error(ErrorKind::InvalidArgument,
                        std::string("unsupported mixture loss term ") + loss_kind_name(t.kind));
    if (gt.state() != MapState::Distribution)
        throw Error(ErrorKind::WrongState, "composite_gmm_loss requires a Distribution target");

    const double w_nll = spec.weight(LossKind::NLL);
    const double w_cc = spec.weight(LossKind::CC);
    const double eps = spec.eps().eps;
    const int h = gt.height(), w = gt.width();
    const double n = static_cast<double>(gt.size());
    const double cell_area = 1.0 / n;

    Gmm2D g = decode(theta, components, mode);
    std::vector<double> p = cell_densities(g, h, w);
    auto q = gt.values();

    GmmLossValue out;
    std::vector<double> cell_w(p.size(), 0.0);

    double nll_value = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        nll_value -= q[i] * std::log(p[i] + eps);
        cell_w[i] = w_nll * (-q[i] / (p[i] + eps));
    }
    out.value = w_nll * nll_value;

    if (w_cc > 0.0) {
        // Pearson correlation between the raster r = p * cell_area and q,
        // with the analytic d(cc)/d(r_i) folded into the cell weights.
        double mean_r = 0.0, mean_q = 0.0;
        for (std::size_t i = 0; i < p.size(); ++i) {
            mean_r += p[i] * cell_area;
            mean_q += q[i];
        }
        mean_r /= n;
        mean_q /= n;
        double cov = 0.0, var_r = 0.0, var_q = 0.0;
        for (std::size_t i = 0; i < p.size(); ++i) {
            double dr = p[i] * cell_area - mean_r;
            double dq = q[i] - mean_q;
            cov += dr * dq;
            var_r += dr * dr;
            var_q += dq * dq;
        }
        cov /= n;
        var_r /= n;
        var_q /= n;
        if (var_r == 0.0 || var_q == 0.0)
            throw Error(ErrorKind::ConstantMap, "cc term is undefined for a constant raster");
        const double sd_r = std::sqrt(var_r), sd_q = std::sqrt(var_q);
        const double cc_value = cov / (sd_r * sd_q);
        out.value += w_cc * (1.0 - cc_value);
        const double scale = 1.0 / (n * sd_r * sd_q);
        for (std::size_t i = 0; i < p.size(); ++i) {
            double dr = p[i] * cell_area - mean_r;
            double dq = q[i] - mean_q;
            double dcc_dr = scale * (dq - (cov / var_r) * dr);
            cell_w[i] += w_cc * (-dcc_dr) * cell_area;
        }
    }

    out.grad = detail::weighted_density_grad(theta, components, mode, h, w, cell_w);
    return out;
}

namespace {

ParamVector initial_theta(const SaliencyMap& gt, int components, CovMode mode,
                          const FitOptions& opts) {
    std::vector<double> cdf(gt.size());
    double acc = 0.0;
    auto q = gt.values();
    for (std::size_t i = 0; i < q.size(); ++i) {
        acc += q[i];
        cdf[i] = acc;
    }

    std::mt19937_64 rng(opts.seed);
    std::uniform_real_distribution<double> uniform(0.0, acc);

    const std::size_t stride = (mode == CovMode::Diagonal) ? 5 : 6;
    ParamVector theta;
    theta.theta.assign(param_length(components, mode), 0.0);
    for (int c = 0; c < components; ++c) {
        auto it = std::lower_bound(cdf.begin(), cdf.end(), uniform(rng));
        std::size_t cell = std::min(static_cast<std::size_t>(it - cdf.begin()), gt.size() - 1);
        Vec2 center = detail::cell_center(static_cast<int>(cell) / gt.width(),
                                          static_cast<int>(cell) % gt.width(), gt.height(),
                                          gt.width());
        const std::size_t base = c * stride;
        theta[base + 1] = center.x;
        theta[base + 2] = center.y;
        if (mode == CovMode::Diagonal) {
            theta[base + 3] = std::log(opts.init_sigma);
            theta[base + 4] = std::log(opts.init_sigma);
        } else {
            theta[base + 3] = std::log(1.0 / opts.init_sigma);
            theta[base + 4] = 0.0;
            theta[base + 5] = std::log(1.0 / opts.init_sigma);
        }
    }
    return theta;
}

} // namespace

FitResult fit_gmm(const SaliencyMap& gt, int components, CovMode mode, const LossSpec& spec,
                  const FitOptions& opts) {
    if (gt.state() != MapState::Distribution)
        throw Error(ErrorKind::WrongState, "fit_gmm requires a Distribution target");
    if (components < 1 || components > kMaxComponents)
        throw Error(ErrorKind::InvalidArgument, "component count out of range");
    if (opts.iterations < 1)
        throw Error(ErrorKind::InvalidArgument, "iteration count must be positive");

    ParamVector theta = initial_theta(gt, components, mode, opts);
    AdamState adam(theta.size(), opts.adam);

    ParamVector best_theta = theta;
    double best = std::numeric_limits<double>::infinity();
    std::vector<double> trace;
    std::vector<double> best_history;
    trace.reserve(opts.iterations);
    bool converged = false;

    for (int k = 0; k < opts.iterations; ++k) {
        GmmLossValue loss = composite_gmm_loss(theta, gt, components, mode, spec);
        trace.push_back(loss.value);
        if (loss.value < best) {
            best = loss.value;
            best_theta = theta;
        }
        best_history.push_back(best);
        if (k >= opts.stop_window &&
            best_history[k - opts.stop_window] - best < opts.stop_tolerance) {
            converged = true;
            break;
        }
        adam_step(adam, theta, loss.grad);
    }

    FitResult result{decode(best_theta, components, mode),
                     std::move(best_theta),
                     std::move(trace),
                     0,
                     converged,
                     best};
    result.iterations = static_cast<int>(result.loss_trace.size());
    return result;
}

double max_relative_error(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size())
        throw Error(ErrorKind::LengthMismatch, "vectors differ in length");
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        double denom = std::max({std::abs(a[i]), std::abs(b[i]), 1e-12});
        worst = std::max(worst, std::abs(a[i] - b[i]) / denom);
    }
    return worst;
}

double grad_check(const ParamVector& theta, const SaliencyMap& gt, int components, CovMode mode,
                  const LossSpec& spec, double step) {
    if (!(step >= 1e-7 && step <= 1e-3))
        throw Error(ErrorKind::InvalidArgument, "finite-difference step must lie in [1e-7, 1e-3]");
    GmmLossValue analytic = composite_gmm_loss(theta, gt, components, mode, spec);
    std::vector<double> fd(theta.size());
    ParamVector probe = theta;
    for (std::size_t i = 0; i < theta.size(); ++i) {
        probe[i] = theta[i] + step;
        double hi = composite_gmm_loss(probe, gt, components, mode, spec).value;
        probe[i] = theta[i] - step;
        double lo = composite_gmm_loss(probe, gt, components, mode, spec).value;
        probe[i] = theta[i];
        fd[i] = (hi - lo) / (2.0 * step);
    }
    return max_relative_error(analytic.grad, fd);
}

} // namespace salkit
