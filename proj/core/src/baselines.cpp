#include "rfla/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "rfla/targets.hpp"

namespace rfla {

void AnchorSpec::validate() const {
    if (!(base_scale > 0.0) || !std::isfinite(base_scale)) throw ValidationError("anchor base scale must be positive");
    if (ratios.empty()) throw ValidationError("anchor ratios must not be empty");
    for (double r : ratios) {
        if (!(r > 0.0) || !std::isfinite(r)) throw ValidationError("anchor ratios must be positive");
    }
}

void MaxIouConfig::validate() const {
    if (!(neg_thr >= 0.0 && neg_thr <= pos_thr && pos_thr <= 1.0))
        throw ValidationError("MaxIoU thresholds must satisfy 0 <= neg_thr <= pos_thr <= 1");
}

void ScaleRanges::validate(std::size_t num_levels) const {
    if (per_level.size() != num_levels)
        throw ValidationError("expected " + std::to_string(num_levels) + " scale ranges, got " +
                              std::to_string(per_level.size()));
    double prev_hi = 0.0;
    for (std::size_t i = 0; i < per_level.size(); ++i) {
        const auto [lo, hi] = per_level[i];
        if (!(lo >= 0.0 && lo < hi)) throw ValidationError("scale range " + std::to_string(i) + " must have 0 <= lo < hi");
        if (lo < prev_hi) throw ValidationError("scale ranges must be ordered and non-overlapping");
        prev_hi = hi;
    }
}

ScaleRanges default_scale_ranges(const PyramidSpec& spec) {
    ScaleRanges out;
    double lo = 0.0;
    for (std::size_t i = 0; i < spec.levels.size(); ++i) {
        const bool last = i + 1 == spec.levels.size();
        const double hi = last ? std::numeric_limits<double>::infinity() : 8.0 * spec.levels[i].stride;
        out.per_level.emplace_back(lo, hi);
        lo = hi;
    }
    return out;
}

std::vector<Anchor> generate_anchors(const PyramidSpec& pspec, const AnchorSpec& aspec) {
    aspec.validate();
    const std::vector<FeaturePoint> points = build_grid(pspec);
    std::vector<Anchor> out;
    out.reserve(points.size() * aspec.ratios.size());
    for (const FeaturePoint& p : points) {
        const double side = aspec.base_scale * pspec.levels[p.level].stride;
        for (double ratio : aspec.ratios) {
            const double root = std::sqrt(ratio);
            out.push_back(Anchor{BBox(p.px, p.py, side * root, side / root), p.level, out.size()});
        }
    }
    return out;
}

namespace {

bool gt_precedes(std::span<const BBox> gts, std::size_t a, std::size_t b) {
    const double area_a = bbox_area(gts[a]);
    const double area_b = bbox_area(gts[b]);
    if (area_a != area_b) return area_a < area_b;
    return a < b;
}

}  // namespace

MaxIouMatcher::MaxIouMatcher(std::span<const Anchor> anchors, const MaxIouConfig& cfg) : cfg_(cfg) {
    cfg_.validate();
    // Corners and areas are computed exactly as iou() does.
    for (auto* v : {&x1_, &y1_, &x2_, &y2_, &area_}) v->reserve(anchors.size());
    for (const Anchor& a : anchors) {
        const Corners c = a.box.corners();
        x1_.push_back(c.x1);
        y1_.push_back(c.y1);
        x2_.push_back(c.x2);
        y2_.push_back(c.y2);
        area_.push_back(bbox_area(a.box));
    }
}

AssignmentResult MaxIouMatcher::operator()(std::span<const BBox> gts) const {
    const std::size_t n = x1_.size();
    std::vector<Label> labels(n);
    if (gts.empty()) return make_result(std::move(labels), 0);

    // Only overlapping (anchor, gt) pairs are recorded; everything else has IoU 0.
    struct Overlap {
        std::size_t anchor;
        std::size_t gt;
        double iou;
    };
    std::vector<Overlap> overlaps;
    std::vector<double> gt_best_iou(gts.size(), 0.0);
    std::vector<std::size_t> gt_best_anchor(gts.size(), 0);
    for (std::size_t g = 0; g < gts.size(); ++g) {
        const Corners gc = gts[g].corners();
        const double g_area = bbox_area(gts[g]);
        for (std::size_t a = 0; a < n; ++a) {
            const double iw = std::min(x2_[a], gc.x2) - std::max(x1_[a], gc.x1);
            const double ih = std::min(y2_[a], gc.y2) - std::max(y1_[a], gc.y1);
            if (iw <= 0.0 || ih <= 0.0) continue;
            const double inter = iw * ih;
            const double v = std::clamp(inter / (area_[a] + g_area - inter), 0.0, 1.0);
            overlaps.push_back({a, g, v});
            if (v > gt_best_iou[g]) {
                gt_best_iou[g] = v;
                gt_best_anchor[g] = a;
            }
        }
    }
    // Group by anchor, keeping gt order inside each group.
    std::stable_sort(overlaps.begin(), overlaps.end(),
                     [](const Overlap& a, const Overlap& b) { return a.anchor < b.anchor; });
    for (std::size_t i = 0; i < overlaps.size();) {
        const std::size_t a = overlaps[i].anchor;
        double best = 0.0;
        std::size_t best_gt = 0;
        for (; i < overlaps.size() && overlaps[i].anchor == a; ++i) {
            const Overlap& o = overlaps[i];
            if (o.iou > best || (o.iou == best && o.iou > 0.0 && gt_precedes(gts, o.gt, best_gt))) {
                best = o.iou;
                best_gt = o.gt;
            }
        }
        if (best > 0.0 && best >= cfg_.pos_thr) labels[a] = Label::positive(best_gt, 1, best);
    }

    if (cfg_.low_quality_match) {
        std::vector<bool> claimed(n, false);
        for (std::size_t g = 0; g < gts.size(); ++g) {
            if (!(gt_best_iou[g] > 0.0)) continue;
            const std::size_t a = gt_best_anchor[g];
            if (claimed[a] && gt_precedes(gts, static_cast<std::size_t>(labels[a].gt_index), g)) continue;
            labels[a] = Label::positive(g, 1, gt_best_iou[g]);
            claimed[a] = true;
        }
    }
    return make_result(std::move(labels), gts.size());
}

AssignmentResult maxiou_assign(std::span<const Anchor> anchors, std::span<const BBox> gts, const MaxIouConfig& cfg) {
    return MaxIouMatcher(anchors, cfg)(gts);
}

AssignmentResult center_sampling_assign(std::span<const FeaturePoint> points, std::span<const BBox> gts,
                                        const ScaleRanges& ranges) {
    std::size_t num_levels = 0;
    for (const FeaturePoint& p : points) num_levels = std::max(num_levels, p.level + 1);
    if (ranges.per_level.size() < num_levels)
        throw ValidationError("scale ranges cover fewer levels than the feature points use");
    ranges.validate(ranges.per_level.size());

    std::vector<Label> labels(points.size());
    for (std::size_t g = 0; g < gts.size(); ++g) {
        const BBox& box = gts[g];
        const double scale = std::max(box.w(), box.h());
        for (std::size_t i = 0; i < points.size(); ++i) {
            const FeaturePoint& p = points[i];
            const auto [lo, hi] = ranges.per_level[p.level];
            if (!(scale > lo && scale <= hi)) continue;
            const LtrbTarget tgt = ltrb(p, box);
            if (!(tgt.l > 0.0 && tgt.t > 0.0 && tgt.r > 0.0 && tgt.b > 0.0)) continue;
            if (labels[i].is_positive() && gt_precedes(gts, static_cast<std::size_t>(labels[i].gt_index), g)) continue;
            labels[i] = Label::positive(g, 1, centerness(tgt));
        }
    }
    return make_result(std::move(labels), gts.size());
}

HlaAssigner gaussian_anchor_assigner(std::span<const Anchor> anchors, const HlaConfig& cfg) {
    cfg.validate();
    std::vector<Gaussian2D> priors;
    std::vector<Gaussian2D> decayed;
    std::vector<std::size_t> ids;
    priors.reserve(anchors.size());
    decayed.reserve(anchors.size());
    ids.reserve(anchors.size());
    const double shrink = cfg.beta * cfg.beta;
    for (const Anchor& a : anchors) {
        const double vx = a.box.w() * a.box.w() / 4.0;
        const double vy = a.box.h() * a.box.h() / 4.0;
        priors.emplace_back(a.box.cx(), a.box.cy(), vx, vy);
        decayed.emplace_back(a.box.cx(), a.box.cy(), vx * shrink, vy * shrink);
        ids.push_back(a.flat_id);
    }
    return HlaAssigner(PriorSet(priors), PriorSet(decayed), std::move(ids), cfg);
}

AssignmentResult gaussian_anchor_assign(std::span<const Anchor> anchors, std::span<const BBox> gts,
                                        const HlaConfig& cfg) {
    return gaussian_anchor_assigner(anchors, cfg)(gts);
}

std::vector<Anchor> receptive_anchors(std::span<const FeaturePoint> points) {
    std::vector<Anchor> out;
    out.reserve(points.size());
    for (const FeaturePoint& p : points) out.push_back(Anchor{BBox(p.px, p.py, 2.0 * p.er, 2.0 * p.er), p.level, p.flat_id});
    return out;
}

AssignmentResult receptive_anchor_assign(std::span<const FeaturePoint> points, std::span<const BBox> gts,
                                         const MaxIouConfig& cfg) {
    const std::vector<Anchor> anchors = receptive_anchors(points);
    return maxiou_assign(anchors, gts, cfg);
}

}  // namespace rfla
