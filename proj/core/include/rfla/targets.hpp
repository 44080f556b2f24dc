#pragma once

#include "rfla/geometry.hpp"

namespace rfla {

/// Signed distances from a point to the four box sides; negative outside.
struct LtrbTarget {
    double l = 0.0;
    double t = 0.0;
    double r = 0.0;
    double b = 0.0;
};

LtrbTarget ltrb(const FeaturePoint& p, const BBox& g) noexcept;

/// FCOS centerness. Requires all four distances positive.
double centerness(const LtrbTarget& tgt);

/// Centerness with a floor term `c` that keeps points outside the box (or on
/// its edge) trainable. A non-positive min distance contributes only `c`.
/// Throws ValidationError when max(l, r) <= 0 or max(t, b) <= 0, or c < 0.
double centerness_star(const LtrbTarget& tgt, double c = 0.01);

}  // namespace rfla
