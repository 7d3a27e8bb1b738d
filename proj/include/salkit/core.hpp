#ifndef SALKIT_CORE_HPP_
#define SALKIT_CORE_HPP_

#include <cstddef>
#include <span>
#include <vector>

#include "salkit/error.hpp"

namespace salkit {

/// Normalization state of a saliency grid. Distribution sums to 1,
/// Standardized has zero mean and unit population std (or is all zero).
enum class MapState { Raw, Distribution, Standardized };

const char* map_state_name(MapState state);

/// H x W grid of saliency values, row-major, origin top-left.
/// Immutable after construction; the constructor enforces the invariants
/// of the declared state.
class SaliencyMap {
public:
    SaliencyMap(int height, int width, MapState state = MapState::Raw);
    SaliencyMap(int height, int width, std::vector<double> values, MapState state = MapState::Raw);

    int height() const { return height_; }
    int width() const { return width_; }
    std::size_t size() const { return values_.size(); }
    MapState state() const { return state_; }

    double at(int row, int col) const { return values_[static_cast<std::size_t>(row) * width_ + col]; }
    std::span<const double> values() const { return values_; }

    double sum() const;
    double max_value() const;

    /// Linear index of the largest value (first occurrence).
    std::size_t argmax() const;

    bool same_shape(const SaliencyMap& other) const {
        return height_ == other.height_ && width_ == other.width_;
    }

private:
    void validate() const;

    int height_ = 0;
    int width_ = 0;
    MapState state_ = MapState::Raw;
    std::vector<double> values_;
};

/// One recorded gaze location. x is the column index, y the row index,
/// both 0-based from the top-left corner.
struct Fixation {
    int x = 0;
    int y = 0;

    friend bool operator==(const Fixation&, const Fixation&) = default;
};

/// Discrete fixation locations for one image. Duplicates are allowed
/// (multiple observers); every point must lie within the declared bounds.
class FixationSet {
public:
    FixationSet(int height, int width, std::vector<Fixation> points);

    int height() const { return height_; }
    int width() const { return width_; }
    const std::vector<Fixation>& points() const { return points_; }
    bool empty() const { return points_.empty(); }
    std::size_t size() const { return points_.size(); }

    /// Points with duplicates removed, sorted by (y, x).
    std::vector<Fixation> unique_points() const;

private:
    int height_ = 0;
    int width_ = 0;
    std::vector<Fixation> points_;
};

/// Regularization constant shared by the log-based losses.
struct EpsilonConfig {
    double eps = 1e-7;

    EpsilonConfig() = default;
    explicit EpsilonConfig(double value);
};

/// Rescale a map so its values sum to 1. Requires at least one strictly
/// positive value; input must be Raw or Distribution.
SaliencyMap normalize_to_distribution(const SaliencyMap& map);

/// Z-score a map using the population standard deviation. A constant map
/// becomes all zeros.
SaliencyMap standardize(const SaliencyMap& map);

/// Continuous ground-truth density: one isotropic Gaussian kernel per
/// fixation (std sigma_px, truncated at 4*sigma_px), normalized to a
/// Distribution.
SaliencyMap density_from_fixations(const FixationSet& fix, double sigma_px);

/// Raw 0/1 map with ones at fixated pixels; duplicates collapse.
SaliencyMap binary_map(const FixationSet& fix);

/// Area-weighted average resampling onto a new grid. Output is Raw.
SaliencyMap area_downsample(const SaliencyMap& map, int new_height, int new_width);

} // namespace salkit

#endif // SALKIT_CORE_HPP_
