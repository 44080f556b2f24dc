#include "rfla/targets.hpp"

#include <algorithm>
#include <cmath>

namespace rfla {

LtrbTarget ltrb(const FeaturePoint& p, const BBox& g) noexcept {
    const Corners c = g.corners();
    return {p.px - c.x1, p.py - c.y1, c.x2 - p.px, c.y2 - p.py};
}

double centerness(const LtrbTarget& tgt) {
    if (!(tgt.l > 0.0 && tgt.t > 0.0 && tgt.r > 0.0 && tgt.b > 0.0))
        throw ValidationError("centerness needs a point strictly inside the box");
    const double horizontal = std::min(tgt.l, tgt.r) / std::max(tgt.l, tgt.r);
    const double vertical = std::min(tgt.t, tgt.b) / std::max(tgt.t, tgt.b);
    return std::sqrt(horizontal * vertical);
}

namespace {

// Step function: 1 for strictly positive input, 0 otherwise (so step(0) = 0).
double step(double v) { return v > 0.0 ? 1.0 : 0.0; }

double axis_term(double near_side, double far_side, double c) {
    const double lo = std::min(near_side, far_side);
    const double hi = std::max(near_side, far_side);
    return (step(lo) * lo + c) / hi;
}

}  // namespace

double centerness_star(const LtrbTarget& tgt, double c) {
    if (!(c >= 0.0) || !std::isfinite(c)) throw ValidationError("centerness floor c must be >= 0");
    if (!(std::max(tgt.l, tgt.r) > 0.0) || !(std::max(tgt.t, tgt.b) > 0.0))
        throw ValidationError("centerness* needs max(l, r) > 0 and max(t, b) > 0");
    return std::sqrt(axis_term(tgt.l, tgt.r, c) * axis_term(tgt.t, tgt.b, c));
}

}  // namespace rfla
