#pragma once

// Domain types shared by every assigner: boxes, axis-aligned Gaussians,
// feature points and assignment labels.

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace rfla {

/// Raised whenever an input violates a documented precondition.
class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

struct Corners {
    double x1, y1, x2, y2;
};

/// Axis-aligned box in center form. Width and height are strictly positive.
class BBox {
public:
    BBox(double cx, double cy, double w, double h);

    static BBox from_corners(double x1, double y1, double x2, double y2);
    static BBox from_corners(const Corners& c) { return from_corners(c.x1, c.y1, c.x2, c.y2); }

    double cx() const noexcept { return cx_; }
    double cy() const noexcept { return cy_; }
    double w() const noexcept { return w_; }
    double h() const noexcept { return h_; }

    Corners corners() const noexcept;

    friend bool operator==(const BBox&, const BBox&) = default;

private:
    double cx_, cy_, w_, h_;
};

double bbox_area(const BBox& b) noexcept;

/// Intersection over union, 0 for disjoint boxes.
double iou(const BBox& a, const BBox& b) noexcept;

/// Generalized IoU in (-1, 1].
double giou(const BBox& a, const BBox& b) noexcept;

/// 2-D Gaussian with diagonal covariance.
class Gaussian2D {
public:
    Gaussian2D(double mu_x, double mu_y, double var_x, double var_y);

    double mu_x() const noexcept { return mu_x_; }
    double mu_y() const noexcept { return mu_y_; }
    double var_x() const noexcept { return var_x_; }
    double var_y() const noexcept { return var_y_; }

    friend bool operator==(const Gaussian2D&, const Gaussian2D&) = default;

private:
    double mu_x_, mu_y_, var_x_, var_y_;
};

/// A pyramid feature location mapped back onto the image.
struct FeaturePoint {
    std::size_t level = 0;
    double px = 0.0;
    double py = 0.0;
    double er = 0.0;  // effective receptive field radius
    std::size_t flat_id = 0;

    friend bool operator==(const FeaturePoint&, const FeaturePoint&) = default;
};

/// Background when gt_index < 0. Positive labels carry the stage (1 or 2)
/// that produced them and a score in (0, 1].
struct Label {
    std::int32_t gt_index = -1;
    std::int32_t stage = 0;
    double score = 0.0;

    static Label background() noexcept { return {}; }
    static Label positive(std::size_t gt, int stage, double score);

    bool is_positive() const noexcept { return gt_index >= 0; }

    friend bool operator==(const Label&, const Label&) = default;
};

struct AssignmentResult {
    std::vector<Label> labels;
    std::vector<std::size_t> positives_per_gt;
    std::vector<double> max_score_per_gt;  // 0 for a gt without positives

    std::size_t num_positives() const noexcept;

    friend bool operator==(const AssignmentResult&, const AssignmentResult&) = default;
};

/// Derives the per-gt bookkeeping from a label vector.
AssignmentResult make_result(std::vector<Label> labels, std::size_t num_gts);

}  // namespace rfla
