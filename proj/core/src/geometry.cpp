#include "rfla/geometry.hpp"

#include <algorithm>
#include <cmath>

namespace rfla {

namespace {

bool finite(double v) { return std::isfinite(v); }

}  // namespace

BBox::BBox(double cx, double cy, double w, double h) : cx_(cx), cy_(cy), w_(w), h_(h) {
    if (!finite(cx) || !finite(cy) || !finite(w) || !finite(h))
        throw ValidationError("box coordinates must be finite");
    if (w <= 0.0 || h <= 0.0)
        throw ValidationError("box width and height must be positive (w=" + std::to_string(w) +
                              ", h=" + std::to_string(h) + ")");
}

BBox BBox::from_corners(double x1, double y1, double x2, double y2) {
    return BBox(0.5 * (x1 + x2), 0.5 * (y1 + y2), x2 - x1, y2 - y1);
}

Corners BBox::corners() const noexcept {
    const double hw = 0.5 * w_;
    const double hh = 0.5 * h_;
    return {cx_ - hw, cy_ - hh, cx_ + hw, cy_ + hh};
}

double bbox_area(const BBox& b) noexcept { return b.w() * b.h(); }

double iou(const BBox& a, const BBox& b) noexcept {
    const Corners ca = a.corners();
    const Corners cb = b.corners();
    const double iw = std::min(ca.x2, cb.x2) - std::max(ca.x1, cb.x1);
    const double ih = std::min(ca.y2, cb.y2) - std::max(ca.y1, cb.y1);
    if (iw <= 0.0 || ih <= 0.0) return 0.0;
    const double inter = iw * ih;
    const double uni = bbox_area(a) + bbox_area(b) - inter;
    return std::clamp(inter / uni, 0.0, 1.0);
}

double giou(const BBox& a, const BBox& b) noexcept {
    const Corners ca = a.corners();
    const Corners cb = b.corners();
    const double iw = std::max(0.0, std::min(ca.x2, cb.x2) - std::max(ca.x1, cb.x1));
    const double ih = std::max(0.0, std::min(ca.y2, cb.y2) - std::max(ca.y1, cb.y1));
    const double inter = iw * ih;
    const double uni = bbox_area(a) + bbox_area(b) - inter;
    const double ew = std::max(ca.x2, cb.x2) - std::min(ca.x1, cb.x1);
    const double eh = std::max(ca.y2, cb.y2) - std::min(ca.y1, cb.y1);
    const double enclosure = ew * eh;
    return inter / uni - (enclosure - uni) / enclosure;
}

Gaussian2D::Gaussian2D(double mu_x, double mu_y, double var_x, double var_y)
    : mu_x_(mu_x), mu_y_(mu_y), var_x_(var_x), var_y_(var_y) {
    if (!finite(mu_x) || !finite(mu_y) || !finite(var_x) || !finite(var_y))
        throw ValidationError("Gaussian parameters must be finite");
    if (var_x <= 0.0 || var_y <= 0.0) throw ValidationError("Gaussian variances must be positive");
}

Label Label::positive(std::size_t gt, int stage, double score) {
    if (stage != 1 && stage != 2) throw ValidationError("label stage must be 1 or 2");
    if (!(score > 0.0 && score <= 1.0)) throw ValidationError("positive label score must lie in (0, 1]");
    if (gt > static_cast<std::size_t>(INT32_MAX)) throw ValidationError("gt index out of range");
    return Label{static_cast<std::int32_t>(gt), stage, score};
}

std::size_t AssignmentResult::num_positives() const noexcept {
    return static_cast<std::size_t>(
        std::count_if(labels.begin(), labels.end(), [](const Label& l) { return l.is_positive(); }));
}

AssignmentResult make_result(std::vector<Label> labels, std::size_t num_gts) {
    AssignmentResult out;
    out.positives_per_gt.assign(num_gts, 0);
    out.max_score_per_gt.assign(num_gts, 0.0);
    for (const Label& l : labels) {
        if (!l.is_positive()) continue;
        const auto g = static_cast<std::size_t>(l.gt_index);
        if (g >= num_gts) throw ValidationError("label references gt index out of range");
        ++out.positives_per_gt[g];
        out.max_score_per_gt[g] = std::max(out.max_score_per_gt[g], l.score);
    }
    out.labels = std::move(labels);
    return out;
}

}  // namespace rfla
