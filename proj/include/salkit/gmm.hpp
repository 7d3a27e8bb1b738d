#ifndef SALKIT_GMM_HPP_
#define SALKIT_GMM_HPP_

#include <cstddef>
#include <span>
#include <vector>

#include "salkit/core.hpp"

namespace salkit {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;
};

/// Symmetric 2x2 matrix, used for covariances in normalized-coordinate
/// units squared.
struct Sym2 {
    double xx = 1.0;
    double xy = 0.0;
    double yy = 1.0;

    double det() const { return xx * yy - xy * xy; }
    Sym2 inverse() const;
};

/// Lower-triangular 2x2 factor with strictly positive diagonal.
struct CholeskyFactor {
    double l00 = 1.0;
    double l10 = 0.0;
    double l11 = 1.0;
};

/// How covariances are parameterized in the flat vector: per-axis log
/// sigmas, or a Cholesky factor L of the precision matrix (inv(Sigma) =
/// L * L^T).
enum class CovMode { Diagonal, FullCholesky };

const char* cov_mode_name(CovMode mode);

struct GmmComponent {
    double weight = 1.0;
    Vec2 mean;
    Sym2 cov;
};

inline constexpr int kMaxComponents = 64;

/// C-component 2D Gaussian mixture over normalized [0,1]^2 image
/// coordinates (x along width, y along height). Weights sum to 1 and
/// every covariance is positive-definite; the constructor enforces this.
class Gmm2D {
public:
    Gmm2D(std::vector<GmmComponent> components, CovMode mode);

    int component_count() const { return static_cast<int>(components_.size()); }
    const std::vector<GmmComponent>& components() const { return components_; }
    CovMode cov_mode() const { return mode_; }

private:
    friend double density_at(const Gmm2D&, Vec2);
    friend std::vector<double> cell_densities(const Gmm2D&, int, int);

    std::vector<GmmComponent> components_;
    CovMode mode_;
    // Cached per component: inverse covariance and 1/(2*pi*sqrt(det)).
    std::vector<Sym2> inv_;
    std::vector<double> norm_;
};

/// Unconstrained encoding of a Gmm2D for gradient descent. Layout per
/// component: [logit weight, mean x, mean y, log sx, log sy] for Diagonal
/// or [logit weight, mean x, mean y, log L00, L10, log L11] for
/// FullCholesky.
struct ParamVector {
    std::vector<double> theta;

    std::size_t size() const { return theta.size(); }
    double& operator[](std::size_t i) { return theta[i]; }
    double operator[](std::size_t i) const { return theta[i]; }
};

std::size_t param_length(int components, CovMode mode);

/// Mixture density at a point; evaluation outside [0,1]^2 is permitted.
double density_at(const Gmm2D& g, Vec2 point);

/// Density at every cell center ((col+0.5)/W, (row+0.5)/H), row-major.
std::vector<double> cell_densities(const Gmm2D& g, int height, int width);

/// Evaluate the density at each cell center scaled by the cell area
/// 1/(H*W). Output is a Raw map whose sum approximates the mixture mass
/// inside [0,1]^2.
SaliencyMap rasterize(const Gmm2D& g, int height, int width);

/// Negative log-likelihood -sum_i q_i * ln(p_i + eps) with p_i the
/// mixture density at cell center i and q_i the ground-truth cell value.
double nll(const Gmm2D& g, const SaliencyMap& gt, const EpsilonConfig& eps = {});

/// Map a flat parameter vector to a valid mixture. Weights go through a
/// softmax; scale slots go through exp with clamping, so every finite
/// theta decodes.
Gmm2D decode(const ParamVector& theta, int components, CovMode mode);

/// Inverse of decode (weight logits are mean-centered).
ParamVector encode(const Gmm2D& g);

/// Analytic gradient of nll(decode(theta), gt) with respect to theta.
std::vector<double> nll_grad(const ParamVector& theta, const SaliencyMap& gt, int components,
                             CovMode mode, const EpsilonConfig& eps = {});

namespace detail {

Vec2 cell_center(int row, int col, int height, int width);

/// Gradient of sum_i weights[i] * density(cell_i) with respect to theta.
/// `weights` is row-major over the height x width grid.
std::vector<double> weighted_density_grad(const ParamVector& theta, int components, CovMode mode,
                                          int height, int width, std::span<const double> weights);

} // namespace detail

} // namespace salkit

#endif // SALKIT_GMM_HPP_
