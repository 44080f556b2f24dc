#pragma once

// Hierarchical label assignment over receptive-field distance scores.
//
// Stage 1 ranks every prior against every gt and keeps the top k per gt.
// A prior claimed by several gts goes to the gt with the smallest area
// (then the lowest gt index). Stage 2 shrinks every prior's spread by beta,
// re-scores, and offers each gt its single best prior. Stage-1 labels are
// kept wherever they exist; stage-2 labels only land on priors that stage 1
// left as background.

#include <cstddef>
#include <span>
#include <vector>

#include "rfla/distances.hpp"
#include "rfla/geometry.hpp"

namespace rfla {

struct HlaConfig {
    std::size_t k = 3;
    double beta = 0.9;
    MetricKind metric = MetricKind::KLD;

    void validate() const;
};

/// Per-gt top-k selection with smaller-gt conflict resolution.
///
/// `tie_ids` orders priors with identical scores (lower id first); when empty
/// the row index is used. Every positive is tagged stage 1.
std::vector<Label> stage_topk(const ScoreMatrix& scores, std::span<const BBox> gts, std::size_t k,
                              std::span<const std::size_t> tie_ids = {});

/// Stage-2 supplement on re-scored priors.
///
/// Gts without any stage-1 prior are visited first, then by smallest area. Each gt takes its best prior among
/// those not claimed by a different gt in stage 1 and not already taken by an
/// earlier supplement. If that prior is one of the gt's own stage-1 priors the
/// supplement is dropped. The returned vector only holds supplements that take
/// effect (all tagged stage 2).
std::vector<Label> stage_supplement(const ScoreMatrix& scores, std::span<const BBox> gts,
                                    std::span<const Label> stage1, std::span<const std::size_t> tie_ids = {});

/// r = r1 * m + r2 * (1 - m) with m the stage-1 positive mask.
std::vector<Label> merge_stages(std::span<const Label> stage1, std::span<const Label> stage2);

/// Two-stage assigner over a fixed prior set; reusable across gt sets.
class HlaAssigner {
public:
    /// ERF priors of `points`, stage-2 radii beta * er, ties broken by flat_id.
    HlaAssigner(std::span<const FeaturePoint> points, const HlaConfig& cfg);
    /// Arbitrary priors; `decayed[i]` is the stage-2 version of `priors[i]`.
    /// Empty `tie_ids` means ties are broken by row index.
    HlaAssigner(PriorSet priors, PriorSet decayed, std::vector<std::size_t> tie_ids, const HlaConfig& cfg);

    AssignmentResult operator()(std::span<const BBox> gts) const;

    const HlaConfig& config() const noexcept { return cfg_; }
    std::size_t num_priors() const noexcept { return priors_.size(); }

private:
    PriorSet priors_;
    PriorSet decayed_;
    std::vector<std::size_t> tie_ids_;
    HlaConfig cfg_;
};

/// Full two-stage assignment for arbitrary prior Gaussians. `decayed` holds
/// the stage-2 version of each prior.
AssignmentResult hla_assign_priors(std::span<const Gaussian2D> priors, std::span<const Gaussian2D> decayed,
                                   std::span<const BBox> gts, const HlaConfig& cfg,
                                   std::span<const std::size_t> tie_ids = {});

/// RFLA: HLA over the ERF Gaussians of `points`, with stage-2 radii beta * er.
AssignmentResult hla_assign(std::span<const FeaturePoint> points, std::span<const BBox> gts,
                            const HlaConfig& cfg);

}  // namespace rfla
