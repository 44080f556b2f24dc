#pragma once

// Distances between a prior Gaussian (ERF or Gaussian anchor) and a
// Gaussian-modelled ground-truth box, and their normalisation into scores.

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "rfla/geometry.hpp"

namespace rfla {

enum class MetricKind { Wasserstein, KLD, GIoU };

/// Accepts "wd", "kld" or "giou".
MetricKind parse_metric(std::string_view name);
std::string_view metric_name(MetricKind m) noexcept;

/// Box center as mean, squared half side lengths as variances.
Gaussian2D gt_gaussian(const BBox& b);

/// Box spanning one standard deviation either side of the mean. Inverse of
/// gt_gaussian; for an ERF Gaussian this is the square of side 2*er.
BBox gaussian_box(const Gaussian2D& g);

/// Squared 2-Wasserstein distance between two diagonal Gaussians.
double wasserstein2_sq(const Gaussian2D& a, const Gaussian2D& b) noexcept;

/// KL(prior || gt) for diagonal Gaussians. Asymmetric: the prior comes first.
double kld(const Gaussian2D& prior, const Gaussian2D& gt) noexcept;

/// GIoU between the ERF square (side 2*er) of `p` and `b`.
double giou_erf(const FeaturePoint& p, const BBox& b);

/// 1 / (1 + d). Throws on negative or NaN distance.
double rfd(double distance);

/// Raw distance for `metric`. GIoU is mapped to 1 - GIoU so that all three
/// metrics are non-negative distances with 0 meaning a perfect match.
double metric_distance(MetricKind metric, const Gaussian2D& prior, const Gaussian2D& gt) noexcept;

/// Dense row-major matrix of scores in (0, 1]; rows are priors, columns gts.
class ScoreMatrix {
public:
    ScoreMatrix() = default;
    ScoreMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }

    double operator()(std::size_t r, std::size_t c) const noexcept { return data_[r * cols_ + c]; }
    double& operator()(std::size_t r, std::size_t c) noexcept { return data_[r * cols_ + c]; }

    std::span<const double> data() const noexcept { return data_; }

    friend bool operator==(const ScoreMatrix&, const ScoreMatrix&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

/// Structure-of-arrays copy of a prior set with the per-prior terms of every
/// metric precomputed. Build once and score against many gt sets.
class PriorSet {
public:
    PriorSet() = default;
    explicit PriorSet(std::span<const Gaussian2D> priors);
    /// ERF Gaussians of `points` with radii multiplied by `radius_scale`.
    PriorSet(std::span<const FeaturePoint> points, double radius_scale);

    std::size_t size() const noexcept { return mx_.size(); }
    Gaussian2D at(std::size_t i) const { return Gaussian2D(mx_[i], my_[i], vx_[i], vy_[i]); }

private:
    friend ScoreMatrix score_matrix(const PriorSet&, std::span<const BBox>, MetricKind, unsigned);
    void push(double mx, double my, double vx, double vy);

    std::vector<double> mx_, my_, vx_, vy_, sx_, sy_, log_det_;
};

/// Entry (i, j) = rfd(metric_distance(metric, prior i, gt j)), bit for bit.
/// `workers` > 1 splits rows across threads; the result does not depend on
/// the worker count.
ScoreMatrix score_matrix(const PriorSet& priors, std::span<const BBox> gts, MetricKind metric, unsigned workers = 1);

ScoreMatrix score_matrix(std::span<const Gaussian2D> priors, std::span<const BBox> gts, MetricKind metric,
                         unsigned workers = 1);

/// Scores between the ERF Gaussians of `points` (radii multiplied by
/// `radius_scale`) and `gts`.
ScoreMatrix score_matrix(std::span<const FeaturePoint> points, std::span<const BBox> gts, MetricKind metric,
                         double radius_scale = 1.0, unsigned workers = 1);

}  // namespace rfla
