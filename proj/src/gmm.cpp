#include "salkit/gmm.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace salkit {

namespace {

constexpr double kSigmaMin = 1e-4; // normalized units; keeps covariances invertible
constexpr double kSigmaMax = 1e6;
constexpr double kCholDiagMin = 1e-6;
constexpr double kCholDiagMax = 1e4; // caps precision so sigma stays >= ~1e-4
constexpr double kWeightFloor = 1e-12;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

double clamped_exp(double value, double lo, double hi, bool* clamped) {
    double e = std::exp(value);
    if (e < lo) {
        *clamped = true;
        return lo;
    }
    if (e > hi) {
        *clamped = true;
        return hi;
    }
    *clamped = false;
    return e;
}

struct DecodedComp {
    double pi = 0.0;
    Vec2 mu;
    // Diagonal mode
    double sx = 1.0, sy = 1.0;
    bool sx_clamped = false, sy_clamped = false;
    // FullCholesky mode
    double l00 = 1.0, l10 = 0.0, l11 = 1.0;
    bool l00_clamped = false, l11_clamped = false;
};

std::vector<DecodedComp> decode_internal(const ParamVector& theta, int C, CovMode mode) {
    const std::size_t stride = (mode == CovMode::Diagonal) ? 5 : 6;
    if (C < 1 || C > kMaxComponents)
        throw Error(ErrorKind::InvalidArgument,
                    "component count must lie in [1, " + std::to_string(kMaxComponents) + "]");
    if (theta.size() != stride * static_cast<std::size_t>(C))
        throw Error(ErrorKind::LengthMismatch,
                    "theta has " + std::to_string(theta.size()) + " entries, expected " +
                        std::to_string(stride * C));
    for (double v : theta.theta)
        if (!std::isfinite(v))
            throw Error(ErrorKind::InvalidArgument, "theta contains a non-finite entry");

    std::vector<DecodedComp> comps(C);

    double max_logit = theta[0];
    for (int c = 1; c < C; ++c) max_logit = std::max(max_logit, theta[c * stride]);
    double z = 0.0;
    for (int c = 0; c < C; ++c) {
        comps[c].pi = std::exp(theta[c * stride] - max_logit);
        z += comps[c].pi;
    }
    double floored = 0.0;
    for (int c = 0; c < C; ++c) {
        comps[c].pi = std::max(comps[c].pi / z, kWeightFloor);
        floored += comps[c].pi;
    }
    for (int c = 0; c < C; ++c) comps[c].pi /= floored;

    for (int c = 0; c < C; ++c) {
        const std::size_t base = c * stride;
        comps[c].mu = {theta[base + 1], theta[base + 2]};
        if (mode == CovMode::Diagonal) {
            comps[c].sx = clamped_exp(theta[base + 3], kSigmaMin, kSigmaMax, &comps[c].sx_clamped);
            comps[c].sy = clamped_exp(theta[base + 4], kSigmaMin, kSigmaMax, &comps[c].sy_clamped);
        } else {
            comps[c].l00 =
                clamped_exp(theta[base + 3], kCholDiagMin, kCholDiagMax, &comps[c].l00_clamped);
            comps[c].l10 = theta[base + 4];
            comps[c].l11 =
                clamped_exp(theta[base + 5], kCholDiagMin, kCholDiagMax, &comps[c].l11_clamped);
        }
    }
    return comps;
}

Sym2 covariance_of(const DecodedComp& d, CovMode mode) {
    if (mode == CovMode::Diagonal) return {d.sx * d.sx, 0.0, d.sy * d.sy};
    // Precision = L * L^T, covariance is its inverse.
    const double pxx = d.l00 * d.l00;
    const double pxy = d.l00 * d.l10;
    const double pyy = d.l10 * d.l10 + d.l11 * d.l11;
    const double det = pxx * pyy - pxy * pxy; // = (l00*l11)^2
    return {pyy / det, -pxy / det, pxx / det};
}

} // namespace

Sym2 Sym2::inverse() const {
    double d = det();
    if (!(std::abs(d) > 1e-300))
        throw Error(ErrorKind::SingularCovariance, "2x2 matrix is numerically singular");
    return {yy / d, -xy / d, xx / d};
}

const char* cov_mode_name(CovMode mode) {
    return mode == CovMode::Diagonal ? "diag" : "full";
}

Gmm2D::Gmm2D(std::vector<GmmComponent> components, CovMode mode)
    : components_(std::move(components)), mode_(mode) {
    const int C = static_cast<int>(components_.size());
    if (C < 1 || C > kMaxComponents)
        throw Error(ErrorKind::InvalidArgument,
                    "mixture must have between 1 and " + std::to_string(kMaxComponents) +
                        " components, got " + std::to_string(C));
    double wsum = 0.0;
    for (const GmmComponent& c : components_) {
        if (!std::isfinite(c.weight) || c.weight <= 0.0)
            throw Error(ErrorKind::InvalidArgument, "component weight must be positive");
        if (!std::isfinite(c.mean.x) || !std::isfinite(c.mean.y))
            throw Error(ErrorKind::InvalidArgument, "component mean must be finite");
        if (!std::isfinite(c.cov.xx) || !std::isfinite(c.cov.xy) || !std::isfinite(c.cov.yy))
            throw Error(ErrorKind::InvalidArgument, "component covariance must be finite");
        wsum += c.weight;
    }
    if (std::abs(wsum - 1.0) > 1e-9)
        throw Error(ErrorKind::InvalidArgument,
                    "component weights sum to " + std::to_string(wsum) + ", expected 1");
    inv_.reserve(C);
    norm_.reserve(C);
    for (const GmmComponent& c : components_) {
        if (mode_ == CovMode::Diagonal && c.cov.xy != 0.0)
            throw Error(ErrorKind::InvalidArgument, "Diagonal mode forbids covariance cross terms");
        double det = c.cov.det();
        if (!(c.cov.xx > 0.0 && det > 0.0))
            throw Error(ErrorKind::InvalidArgument, "covariance is not positive-definite");
        if (det <= 1e-300)
            throw Error(ErrorKind::SingularCovariance, "covariance determinant underflows");
        inv_.push_back(c.cov.inverse());
        norm_.push_back(1.0 / (kTwoPi * std::sqrt(det)));
    }
}

std::size_t param_length(int components, CovMode mode) {
    return static_cast<std::size_t>(components) * (mode == CovMode::Diagonal ? 5 : 6);
}

double density_at(const Gmm2D& g, Vec2 point) {
    if (!std::isfinite(point.x) || !std::isfinite(point.y))
        throw Error(ErrorKind::InvalidArgument, "evaluation point must be finite");
    double acc = 0.0;
    for (std::size_t c = 0; c < g.components_.size(); ++c) {
        const GmmComponent& comp = g.components_[c];
        const Sym2& inv = g.inv_[c];
        double dx = point.x - comp.mean.x;
        double dy = point.y - comp.mean.y;
        double quad = inv.xx * dx * dx + 2.0 * inv.xy * dx * dy + inv.yy * dy * dy;
        acc += comp.weight * g.norm_[c] * std::exp(-0.5 * quad);
    }
    return acc;
}

Vec2 detail::cell_center(int row, int col, int height, int width) {
    return {(col + 0.5) / width, (row + 0.5) / height};
}

std::vector<double> cell_densities(const Gmm2D& g, int height, int width) {
    std::vector<double> out(static_cast<std::size_t>(height) * width);
    for (int r = 0; r < height; ++r)
        for (int c = 0; c < width; ++c)
            out[static_cast<std::size_t>(r) * width + c] =
                density_at(g, detail::cell_center(r, c, height, width));
    return out;
}

SaliencyMap rasterize(const Gmm2D& g, int height, int width) {
    if (height < 2 || width < 2)
        throw Error(ErrorKind::InvalidArgument, "raster size must be at least 2x2");
    std::vector<double> vals = cell_densities(g, height, width);
    const double cell_area = 1.0 / (static_cast<double>(height) * width);
    for (double& v : vals) v *= cell_area;
    return SaliencyMap(height, width, std::move(vals), MapState::Raw);
}

double nll(const Gmm2D& g, const SaliencyMap& gt, const EpsilonConfig& eps) {
    if (gt.state() != MapState::Distribution)
        throw Error(ErrorKind::WrongState, "nll requires a Distribution ground truth");
    std::vector<double> p = cell_densities(g, gt.height(), gt.width());
    auto q = gt.values();
    double acc = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) acc -= q[i] * std::log(p[i] + eps.eps);
    return acc;
}

Gmm2D decode(const ParamVector& theta, int components, CovMode mode) {
    std::vector<DecodedComp> decoded = decode_internal(theta, components, mode);
    std::vector<GmmComponent> comps;
    comps.reserve(decoded.size());
    for (const DecodedComp& d : decoded)
        comps.push_back({d.pi, d.mu, covariance_of(d, mode)});
    return Gmm2D(std::move(comps), mode);
}

ParamVector encode(const Gmm2D& g) {
    const CovMode mode = g.cov_mode();
    const std::size_t stride = (mode == CovMode::Diagonal) ? 5 : 6;
    const auto& comps = g.components();
    ParamVector out;
    out.theta.assign(stride * comps.size(), 0.0);

    double mean_log_w = 0.0;
    for (const GmmComponent& c : comps) mean_log_w += std::log(c.weight);
    mean_log_w /= static_cast<double>(comps.size());

    for (std::size_t c = 0; c < comps.size(); ++c) {
        const std::size_t base = c * stride;
        out[base] = std::log(comps[c].weight) - mean_log_w;
        out[base + 1] = comps[c].mean.x;
        out[base + 2] = comps[c].mean.y;
        if (mode == CovMode::Diagonal) {
            out[base + 3] = 0.5 * std::log(comps[c].cov.xx);
            out[base + 4] = 0.5 * std::log(comps[c].cov.yy);
        } else {
            Sym2 prec = comps[c].cov.inverse();
            double l00 = std::sqrt(prec.xx);
            double l10 = prec.xy / l00;
            double l11 = std::sqrt(prec.yy - l10 * l10);
            out[base + 3] = std::log(l00);
            out[base + 4] = l10;
            out[base + 5] = std::log(l11);
        }
    }
    return out;
}

std::vector<double> detail::weighted_density_grad(const ParamVector& theta, int components,
                                                  CovMode mode, int height, int width,
                                                  std::span<const double> weights) {
    if (weights.size() != static_cast<std::size_t>(height) * width)
        throw Error(ErrorKind::LengthMismatch, "weight grid does not match raster size");
    const std::vector<DecodedComp> comps = decode_internal(theta, components, mode);
    const std::size_t stride = (mode == CovMode::Diagonal) ? 5 : 6;
    const int C = components;

    std::vector<double> grad(theta.size(), 0.0);
    std::vector<double> weighted_phi(C, 0.0); // E_c = sum_i w_i phi_c(x_i)
    double weighted_p = 0.0;                  // S   = sum_i w_i p(x_i)
    std::vector<double> phi(C);

    for (int r = 0; r < height; ++r) {
        for (int col = 0; col < width; ++col) {
            const double w = weights[static_cast<std::size_t>(r) * width + col];
            if (w == 0.0) continue;
            const Vec2 x = cell_center(r, col, height, width);

            double p = 0.0;
            for (int c = 0; c < C; ++c) {
                const DecodedComp& d = comps[c];
                const double dx = x.x - d.mu.x;
                const double dy = x.y - d.mu.y;
                double value;
                if (mode == CovMode::Diagonal) {
                    const double ux = dx / d.sx, uy = dy / d.sy;
                    value = std::exp(-0.5 * (ux * ux + uy * uy)) / (kTwoPi * d.sx * d.sy);
                } else {
                    const double u0 = d.l00 * dx + d.l10 * dy;
                    const double u1 = d.l11 * dy;
                    value = d.l00 * d.l11 / kTwoPi * std::exp(-0.5 * (u0 * u0 + u1 * u1));
                }
                phi[c] = value;
                p += d.pi * value;
            }
            weighted_p += w * p;

            for (int c = 0; c < C; ++c) {
                const DecodedComp& d = comps[c];
                const double dx = x.x - d.mu.x;
                const double dy = x.y - d.mu.y;
                const double common = w * d.pi * phi[c];
                weighted_phi[c] += w * phi[c];
                double* g = grad.data() + c * stride;
                if (mode == CovMode::Diagonal) {
                    const double ix = 1.0 / (d.sx * d.sx), iy = 1.0 / (d.sy * d.sy);
                    g[1] += common * dx * ix;
                    g[2] += common * dy * iy;
                    g[3] += common * (dx * dx * ix - 1.0);
                    g[4] += common * (dy * dy * iy - 1.0);
                } else {
                    const double u0 = d.l00 * dx + d.l10 * dy;
                    const double u1 = d.l11 * dy;
                    g[1] += common * u0 * d.l00;
                    g[2] += common * (u0 * d.l10 + u1 * d.l11);
                    g[3] += common * (1.0 - u0 * dx * d.l00);
                    g[4] += common * (-u0 * dy);
                    g[5] += common * (1.0 - u1 * dy * d.l11);
                }
            }
        }
    }

    for (int c = 0; c < C; ++c) {
        grad[c * stride] = comps[c].pi * (weighted_phi[c] - weighted_p);
        if (mode == CovMode::Diagonal) {
            if (comps[c].sx_clamped) grad[c * stride + 3] = 0.0;
            if (comps[c].sy_clamped) grad[c * stride + 4] = 0.0;
        } else {
            if (comps[c].l00_clamped) grad[c * stride + 3] = 0.0;
            if (comps[c].l11_clamped) grad[c * stride + 5] = 0.0;
        }
    }
    return grad;
}

std::vector<double> nll_grad(const ParamVector& theta, const SaliencyMap& gt, int components,
                             CovMode mode, const EpsilonConfig& eps) {
    if (gt.state() != MapState::Distribution)
        throw Error(ErrorKind::WrongState, "nll_grad requires a Distribution ground truth");
    Gmm2D g = decode(theta, components, mode);
    std::vector<double> p = cell_densities(g, gt.height(), gt.width());
    auto q = gt.values();
    std::vector<double> weights(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) weights[i] = -q[i] / (p[i] + eps.eps);
    return detail::weighted_density_grad(theta, components, mode, gt.height(), gt.width(), weights);
}

} // namespace salkit
