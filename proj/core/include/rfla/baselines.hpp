#pragma once

// Reference assigners built on box priors (MaxIoU over tiled anchors) and
// point priors (center sampling with per-level scale ranges), plus the
// Gaussian-anchor and receptive-anchor hybrids.

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "rfla/geometry.hpp"
#include "rfla/hla.hpp"
#include "rfla/receptive_field.hpp"

namespace rfla {

struct AnchorSpec {
    double base_scale = 8.0;
    std::vector<double> ratios{0.5, 1.0, 2.0};  // width / height

    void validate() const;
};

struct Anchor {
    BBox box;
    std::size_t level = 0;
    std::size_t flat_id = 0;
};

struct MaxIouConfig {
    double pos_thr = 0.5;
    double neg_thr = 0.5;
    bool low_quality_match = false;

    void validate() const;
};

/// Per-level (lo, hi] ranges on max(w, h) of a gt.
struct ScaleRanges {
    std::vector<std::pair<double, double>> per_level;

    void validate(std::size_t num_levels) const;
};

/// Level i covers (8 * stride[i-1], 8 * stride[i]]; the first level starts at
/// 0 and the last one is unbounded.
ScaleRanges default_scale_ranges(const PyramidSpec& spec);

/// One anchor per ratio at every grid point, area (base_scale * stride)^2.
/// Order: level, then row-major grid position, then ratio.
std::vector<Anchor> generate_anchors(const PyramidSpec& pspec, const AnchorSpec& aspec);

/// Each anchor takes its best-IoU gt if that IoU reaches pos_thr (and is
/// positive). Anchors below pos_thr are background; there is no ignore
/// label. With low_quality_match each gt also claims its best anchor.
AssignmentResult maxiou_assign(std::span<const Anchor> anchors, std::span<const BBox> gts, const MaxIouConfig& cfg);

/// maxiou_assign over a fixed anchor set, with corners and areas cached.
class MaxIouMatcher {
public:
    MaxIouMatcher(std::span<const Anchor> anchors, const MaxIouConfig& cfg);

    AssignmentResult operator()(std::span<const BBox> gts) const;

    std::size_t num_anchors() const noexcept { return x1_.size(); }

private:
    std::vector<double> x1_, y1_, x2_, y2_, area_;
    MaxIouConfig cfg_;
};

/// A point is positive for a gt when it lies strictly inside the box and the
/// gt's max side falls in the point's level range. Ambiguous points go to the
/// smallest gt. Scores are the FCOS centerness of the point.
AssignmentResult center_sampling_assign(std::span<const FeaturePoint> points, std::span<const BBox> gts,
                                        const ScaleRanges& ranges);

/// HLA with anchors modelled as Gaussians (center, diag(w^2/4, h^2/4)).
/// Stage 2 shrinks every anchor's standard deviations by beta.
AssignmentResult gaussian_anchor_assign(std::span<const Anchor> anchors, std::span<const BBox> gts,
                                        const HlaConfig& cfg);

/// Prepared form of gaussian_anchor_assign.
HlaAssigner gaussian_anchor_assigner(std::span<const Anchor> anchors, const HlaConfig& cfg);

/// Squares of side 2 * er centered on each point.
std::vector<Anchor> receptive_anchors(std::span<const FeaturePoint> points);

/// MaxIoU over receptive anchors; labels are indexed like `points`.
AssignmentResult receptive_anchor_assign(std::span<const FeaturePoint> points, std::span<const BBox> gts,
                                         const MaxIouConfig& cfg);

}  // namespace rfla
