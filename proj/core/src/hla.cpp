#include "rfla/hla.hpp"

#include <algorithm>
#include <numeric>
#include <string>

namespace rfla {

void HlaConfig::validate() const {
    if (k < 1) throw ValidationError("HLA k must be >= 1");
    if (!(beta > 0.0 && beta <= 1.0)) throw ValidationError("HLA beta must lie in (0, 1]");
}

namespace {

std::size_t tie_id(std::span<const std::size_t> ids, std::size_t row) { return ids.empty() ? row : ids[row]; }

void check_shape(const ScoreMatrix& scores, std::span<const BBox> gts, std::span<const std::size_t> tie_ids) {
    if (scores.cols() != gts.size()) throw ValidationError("score matrix columns do not match gt count");
    if (!tie_ids.empty() && tie_ids.size() != scores.rows())
        throw ValidationError("tie-break ids do not match score matrix rows");
}

// True when gt `a` takes precedence over gt `b` for a contested prior.
bool gt_precedes(std::span<const BBox> gts, std::size_t a, std::size_t b) {
    const double area_a = bbox_area(gts[a]);
    const double area_b = bbox_area(gts[b]);
    if (area_a != area_b) return area_a < area_b;
    return a < b;
}

// Higher score first, then lower tie id.
struct RankKey {
    double score;
    std::size_t tie;
    std::size_t row;

    bool better_than(const RankKey& o) const {
        if (score != o.score) return score > o.score;
        return tie < o.tie;
    }
};

}  // namespace

std::vector<Label> stage_topk(const ScoreMatrix& scores, std::span<const BBox> gts, std::size_t k,
                              std::span<const std::size_t> tie_ids) {
    check_shape(scores, gts, tie_ids);
    if (k < 1) throw ValidationError("top-k needs k >= 1");
    const std::size_t n = scores.rows();
    std::vector<Label> labels(n);
    if (n == 0) return labels;

    const std::size_t keep = std::min(k, n);
    std::vector<RankKey> best;
    best.reserve(keep + 1);
    for (std::size_t g = 0; g < gts.size(); ++g) {
        // Bounded insertion keeps the per-column cost at O(n * k).
        best.clear();
        for (std::size_t r = 0; r < n; ++r) {
            const RankKey key{scores(r, g), tie_id(tie_ids, r), r};
            if (best.size() == keep && !key.better_than(best.back())) continue;
            auto pos = std::find_if(best.begin(), best.end(), [&](const RankKey& b) { return key.better_than(b); });
            best.insert(pos, key);
            if (best.size() > keep) best.pop_back();
        }
        for (const RankKey& key : best) {
            Label& current = labels[key.row];
            if (current.is_positive() && gt_precedes(gts, static_cast<std::size_t>(current.gt_index), g)) continue;
            current = Label::positive(g, 1, key.score);
        }
    }
    return labels;
}

namespace {

struct Supplement {
    std::size_t row;
    Label label;
};

// Supplements that take effect, in the order they were granted.
std::vector<Supplement> supplements(const ScoreMatrix& scores, std::span<const BBox> gts,
                                    std::span<const Label> stage1, std::span<const std::size_t> tie_ids) {
    const std::size_t n = scores.rows();
    std::vector<Supplement> out;
    if (n == 0) return out;

    // Gts left without a stage-1 prior pick first so free priors are not
    // spent on gts that are already covered.
    std::vector<bool> covered(gts.size(), false);
    for (const Label& l : stage1)
        if (l.is_positive()) covered[static_cast<std::size_t>(l.gt_index)] = true;
    std::vector<std::size_t> order(gts.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (covered[a] != covered[b]) return !covered[a];
        return gt_precedes(gts, a, b);
    });

    auto taken = [&](std::size_t r) {
        return std::any_of(out.begin(), out.end(), [r](const Supplement& s) { return s.row == r; });
    };
    for (const std::size_t g : order) {
        const auto gi = static_cast<std::int32_t>(g);
        bool found = false;
        RankKey best{0.0, 0, 0};
        for (std::size_t r = 0; r < n; ++r) {
            if (stage1[r].is_positive() && stage1[r].gt_index != gi) continue;
            const RankKey key{scores(r, g), tie_id(tie_ids, r), r};
            if (found && !key.better_than(best)) continue;
            if (taken(r)) continue;
            best = key;
            found = true;
        }
        if (!found || stage1[best.row].is_positive()) continue;
        out.push_back({best.row, Label::positive(g, 2, best.score)});
    }
    return out;
}

}  // namespace

std::vector<Label> stage_supplement(const ScoreMatrix& scores, std::span<const BBox> gts,
                                    std::span<const Label> stage1, std::span<const std::size_t> tie_ids) {
    check_shape(scores, gts, tie_ids);
    if (stage1.size() != scores.rows()) throw ValidationError("stage-1 labels do not match score matrix rows");
    std::vector<Label> out(scores.rows());
    for (const Supplement& s : supplements(scores, gts, stage1, tie_ids)) out[s.row] = s.label;
    return out;
}

std::vector<Label> merge_stages(std::span<const Label> stage1, std::span<const Label> stage2) {
    if (stage1.size() != stage2.size()) throw ValidationError("stage label vectors differ in length");
    std::vector<Label> out(stage1.begin(), stage1.end());
    for (std::size_t i = 0; i < out.size(); ++i) {
        if (!out[i].is_positive()) out[i] = stage2[i];
    }
    return out;
}

namespace {

std::vector<std::size_t> flat_ids(std::span<const FeaturePoint> points) {
    std::vector<std::size_t> ids;
    ids.reserve(points.size());
    for (const FeaturePoint& p : points) ids.push_back(p.flat_id);
    return ids;
}

const HlaConfig& validated(const HlaConfig& cfg) {
    cfg.validate();
    return cfg;
}

}  // namespace

HlaAssigner::HlaAssigner(std::span<const FeaturePoint> points, const HlaConfig& cfg)
    : priors_(points, 1.0), decayed_(points, validated(cfg).beta), tie_ids_(flat_ids(points)), cfg_(cfg) {}

HlaAssigner::HlaAssigner(PriorSet priors, PriorSet decayed, std::vector<std::size_t> tie_ids, const HlaConfig& cfg)
    : priors_(std::move(priors)), decayed_(std::move(decayed)), tie_ids_(std::move(tie_ids)), cfg_(validated(cfg)) {
    if (priors_.size() != decayed_.size()) throw ValidationError("decayed priors do not match priors");
    if (!tie_ids_.empty() && tie_ids_.size() != priors_.size())
        throw ValidationError("tie-break ids do not match priors");
}

AssignmentResult HlaAssigner::operator()(std::span<const BBox> gts) const {
    if (gts.empty()) return make_result(std::vector<Label>(priors_.size()), 0);
    const ScoreMatrix first = score_matrix(priors_, gts, cfg_.metric);
    std::vector<Label> r1 = stage_topk(first, gts, cfg_.k, tie_ids_);
    const ScoreMatrix second = score_matrix(decayed_, gts, cfg_.metric);
    // Supplements only ever land where stage 1 left background, so writing
    // them into r1 is the masked merge.
    for (const Supplement& s : supplements(second, gts, r1, tie_ids_)) r1[s.row] = s.label;
    return make_result(std::move(r1), gts.size());
}

AssignmentResult hla_assign_priors(std::span<const Gaussian2D> priors, std::span<const Gaussian2D> decayed,
                                   std::span<const BBox> gts, const HlaConfig& cfg,
                                   std::span<const std::size_t> tie_ids) {
    return HlaAssigner(PriorSet(priors), PriorSet(decayed), {tie_ids.begin(), tie_ids.end()}, cfg)(gts);
}

AssignmentResult hla_assign(std::span<const FeaturePoint> points, std::span<const BBox> gts, const HlaConfig& cfg) {
    return HlaAssigner(points, cfg)(gts);
}

}  // namespace rfla
