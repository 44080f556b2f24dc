#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "hla_reference.hpp"
#include "rfla/hla.hpp"
#include "rfla/receptive_field.hpp"

namespace rfla {
namespace {

std::vector<FeaturePoint> line_points(std::initializer_list<double> xs, double er) {
    std::vector<FeaturePoint> pts;
    for (double x : xs) pts.push_back({0, x, 0, er, pts.size()});
    return pts;
}

std::vector<FeaturePoint> single_level(int w, int h, int stride, double er) {
    return build_grid(PyramidSpec{w, h, {PyramidLevelSpec{stride, ExplicitRadius{er}}}});
}

TEST(HlaConfig, Validation) {
    EXPECT_NO_THROW(HlaConfig{}.validate());
    EXPECT_THROW((HlaConfig{0, 0.9, MetricKind::KLD}).validate(), ValidationError);
    EXPECT_THROW((HlaConfig{3, 0.0, MetricKind::KLD}).validate(), ValidationError);
    EXPECT_THROW((HlaConfig{3, 1.1, MetricKind::KLD}).validate(), ValidationError);
}

TEST(StageTopk, SingleGtTakesLargestScores) {
    const std::vector<FeaturePoint> pts = line_points({0, 2, 5, 9, 14}, 4);
    const std::vector<BBox> gts{BBox(1, 0, 8, 8)};
    const ScoreMatrix s = score_matrix(pts, gts, MetricKind::KLD);
    const std::vector<Label> l = stage_topk(s, gts, 3);
    std::vector<std::size_t> order(pts.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return s(a, 0) > s(b, 0); });
    for (std::size_t r = 0; r < order.size(); ++r) EXPECT_EQ(l[order[r]].is_positive(), r < 3);
}

TEST(StageTopk, FewerPointsThanK) {
    const std::vector<FeaturePoint> pts = line_points({0, 4}, 4);
    const std::vector<BBox> gts{BBox(0, 0, 8, 8)};
    const auto l = stage_topk(score_matrix(pts, gts, MetricKind::KLD), gts, 3);
    EXPECT_EQ(std::count_if(l.begin(), l.end(), [](const Label& x) { return x.is_positive(); }), 2);
}

TEST(StageTopk, ContestedPointGoesToSmallerGt) {
    ScoreMatrix s(3, 2);
    s(0, 0) = 0.9, s(1, 0) = 0.8, s(2, 0) = 0.1;
    s(0, 1) = 0.7, s(1, 1) = 0.2, s(2, 1) = 0.6;
    const std::vector<BBox> gts{BBox(0, 0, 8, 8), BBox(0, 0, 4, 4)};  // areas 64 and 16
    const auto l = stage_topk(s, gts, 2);
    EXPECT_EQ(l[0].gt_index, 1);
    EXPECT_EQ(l[1].gt_index, 0);
    EXPECT_EQ(l[2].gt_index, 1);
    for (const Label& x : l) EXPECT_EQ(x.stage, 1);
}

TEST(StageTopk, EqualAreasPreferLowerIndexAndTiesPreferLowerId) {
    ScoreMatrix s(2, 2);
    s(0, 0) = s(1, 0) = 0.5;
    s(0, 1) = s(1, 1) = 0.5;
    const std::vector<BBox> gts{BBox(0, 0, 4, 4), BBox(9, 9, 4, 4)};
    const auto l = stage_topk(s, gts, 1);
    EXPECT_EQ(l[0].gt_index, 0);
    EXPECT_FALSE(l[1].is_positive());
    const std::vector<std::size_t> ids{5, 2};
    EXPECT_EQ(stage_topk(s, gts, 1, ids)[1].gt_index, 0);
}

TEST(MergeStages, StageOneWinsWhereMasked) {
    const std::vector<Label> s1{Label::positive(0, 1, 0.5), Label::background(), Label::background()};
    const std::vector<Label> s2{Label::positive(1, 2, 0.9), Label::positive(1, 2, 0.4), Label::background()};
    const auto r = merge_stages(s1, s2);
    EXPECT_EQ(r[0], s1[0]);
    EXPECT_EQ(r[1], s2[1]);
    EXPECT_FALSE(r[2].is_positive());
    EXPECT_THROW(merge_stages(s1, std::vector<Label>(2)), ValidationError);
}

TEST(HlaAssign, NoGtsGivesAllBackground) {
    const auto pts = single_level(32, 32, 8, 4);
    const AssignmentResult r = hla_assign(pts, {}, HlaConfig{});
    EXPECT_EQ(r.labels.size(), pts.size());
    EXPECT_EQ(r.num_positives(), 0u);
}

// Every radius shrinks by the same factor on a single level, so the decayed
// ranking keeps the stage-1 winner on top and the supplement is masked.
TEST(HlaAssign, IsolatedGtOnSingleLevelGetsExactlyKStageOne) {
    const auto pts = single_level(128, 128, 8, 6);
    const std::vector<BBox> gts{BBox(61, 58, 10, 14)};
    const HlaConfig cfg{3, 0.9, MetricKind::KLD};
    const ScoreMatrix s1 = score_matrix(pts, gts, cfg.metric);
    const ScoreMatrix s2 = score_matrix(pts, gts, cfg.metric, cfg.beta);
    const auto best = [](const ScoreMatrix& s) {
        std::size_t b = 0;
        for (std::size_t i = 1; i < s.rows(); ++i)
            if (s(i, 0) > s(b, 0)) b = i;
        return b;
    };
    ASSERT_EQ(best(s1), best(s2));

    const AssignmentResult r = hla_assign(pts, gts, cfg);
    EXPECT_EQ(r.positives_per_gt[0], 3u);
    for (const Label& l : r.labels)
        if (l.is_positive()) EXPECT_EQ(l.stage, 1);
}

TEST(HlaAssign, SingleGtCardinalityIsMinKN) {
    for (std::size_t n : {1u, 2u, 3u, 5u, 9u}) {
        std::vector<FeaturePoint> pts;
        for (std::size_t i = 0; i < n; ++i) pts.push_back({0, 8.0 * i, 0, 4, i});
        for (std::size_t k : {1u, 3u, 4u}) {
            const AssignmentResult r = hla_assign(pts, std::vector<BBox>{BBox(3, 1, 6, 6)}, HlaConfig{k, 0.9, MetricKind::KLD});
            EXPECT_EQ(r.positives_per_gt[0], std::min(k, n)) << "n=" << n << " k=" << k;
        }
    }
}

TEST(HlaAssign, LargerGtRobbedOfStageOneStillCovered) {
    const auto pts = line_points({-8, -4, 0, 4, 8}, 4);
    const std::vector<BBox> gts{BBox(0, 0, 12, 12), BBox(0, 0, 8, 8)};
    const HlaConfig cfg{3, 0.9, MetricKind::KLD};
    const auto s1 = stage_topk(score_matrix(pts, gts, cfg.metric), gts, cfg.k);
    for (const Label& l : s1) EXPECT_NE(l.gt_index, 0);  // every winner went to the smaller gt

    const AssignmentResult r = hla_assign(pts, gts, cfg);
    EXPECT_GE(r.positives_per_gt[0], 1u);
    EXPECT_EQ(r.positives_per_gt[1], 3u);
    for (const Label& l : r.labels)
        if (l.gt_index == 0) EXPECT_EQ(l.stage, 2);
}

TEST(HlaAssign, MatchesBruteForceReference) {
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> u(0, 1);
    for (int trial = 0; trial < 300; ++trial) {
        const int levels = 1 + trial % 3;
        PyramidSpec spec{96, 96, {}};
        for (int l = 0; l < levels; ++l) spec.levels.push_back({8 << l, ExplicitRadius{3.0 + 10.0 * u(rng) * (l + 1)}});
        const auto pts = build_grid(spec);
        std::vector<BBox> gts;
        const int m = 1 + static_cast<int>(u(rng) * 6);
        for (int j = 0; j < m; ++j) gts.emplace_back(8 + 80 * u(rng), 8 + 80 * u(rng), 1 + 40 * u(rng), 1 + 40 * u(rng));
        const HlaConfig cfg{1 + static_cast<std::size_t>(u(rng) * 5), 0.5 + 0.5 * u(rng),
                            static_cast<MetricKind>(trial % 3)};
        const AssignmentResult r = hla_assign(pts, gts, cfg);
        const auto want = testing::hla_reference(pts, gts, cfg);
        ASSERT_EQ(r.labels.size(), want.size());
        for (std::size_t i = 0; i < want.size(); ++i) ASSERT_EQ(r.labels[i], want[i]) << "trial " << trial << " prior " << i;
    }
}

TEST(HlaAssign, PermutingGtsPermutesLabels) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0, 1);
    const auto pts = single_level(96, 96, 8, 7);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<BBox> gts;
        for (int j = 0; j < 5; ++j) gts.emplace_back(10 + 76 * u(rng), 10 + 76 * u(rng), 2 + 30 * u(rng), 2 + 30 * u(rng));
        std::vector<std::size_t> perm{3, 0, 4, 1, 2};
        std::vector<BBox> permuted;
        for (std::size_t p : perm) permuted.push_back(gts[p]);
        const AssignmentResult a = hla_assign(pts, gts, HlaConfig{});
        const AssignmentResult b = hla_assign(pts, permuted, HlaConfig{});
        for (std::size_t i = 0; i < pts.size(); ++i) {
            ASSERT_EQ(a.labels[i].is_positive(), b.labels[i].is_positive());
            if (!b.labels[i].is_positive()) continue;
            EXPECT_EQ(static_cast<std::size_t>(a.labels[i].gt_index), perm[static_cast<std::size_t>(b.labels[i].gt_index)]);
            EXPECT_EQ(a.labels[i].stage, b.labels[i].stage);
            EXPECT_EQ(a.labels[i].score, b.labels[i].score);
        }
    }
}

TEST(HlaAssign, RandomMultiGtInstancesCoverEveryGt) {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(0, 1);
    for (int trial = 0; trial < 300; ++trial) {
        const auto pts = single_level(64, 64, 8, 2 + 20 * u(rng));
        const HlaConfig cfg{1 + static_cast<std::size_t>(u(rng) * 4), 0.9, MetricKind::KLD};
        const int m = 1 + static_cast<int>(u(rng) * 10);
        std::vector<BBox> gts;
        for (int j = 0; j < m; ++j) gts.emplace_back(64 * u(rng), 64 * u(rng), 1 + 30 * u(rng), 1 + 30 * u(rng));
        const AssignmentResult r = hla_assign(pts, gts, cfg);
        for (std::size_t j = 0; j < gts.size(); ++j) {
            EXPECT_GE(r.positives_per_gt[j], 1u);
            EXPECT_LE(r.positives_per_gt[j], cfg.k + 1);
        }
    }
}

// On crowded grids a gt can only end up empty once every prior is taken.
TEST(HlaAssign, UncoveredGtImpliesExhaustedPriors) {
    std::mt19937_64 rng(1005);
    std::uniform_real_distribution<double> u(0, 1);
    std::size_t exhausted = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        const int side = 8 * (2 + static_cast<int>(u(rng) * 10));
        const auto pts = single_level(side, side, 8, 2 + 30 * u(rng));
        const std::size_t k = 1 + static_cast<std::size_t>(u(rng) * 4);
        const std::size_t m = 1 + static_cast<std::size_t>(u(rng) * std::min<std::size_t>(12, pts.size() - k));
        std::vector<BBox> gts;
        for (std::size_t j = 0; j < m; ++j)
            gts.emplace_back(side * u(rng), side * u(rng), 1 + side * 0.5 * u(rng), 1 + side * 0.5 * u(rng));
        const AssignmentResult r = hla_assign(pts, gts, HlaConfig{k, 0.9, MetricKind::KLD});
        if (std::find(r.positives_per_gt.begin(), r.positives_per_gt.end(), 0u) == r.positives_per_gt.end()) continue;
        EXPECT_EQ(r.num_positives(), pts.size()) << "trial " << trial;
        ++exhausted;
    }
    EXPECT_GT(exhausted, 0u);  // the generator does reach the crowded regime
}

TEST(HlaAssign, StageTwoServesUncoveredGtsFirst) {
    // Row 0 is contested and goes to the smaller gt 1, leaving gt 0 empty.
    // Row 1 is the only free prior and gt 1 would also prefer it in stage 2.
    ScoreMatrix s1(2, 2), s2(2, 2);
    s1(0, 0) = 0.9, s1(1, 0) = 0.1;
    s1(0, 1) = 0.8, s1(1, 1) = 0.3;
    s2(0, 0) = 0.9, s2(1, 0) = 0.5;
    s2(0, 1) = 0.1, s2(1, 1) = 0.6;
    const std::vector<BBox> gts{BBox(0, 0, 10, 10), BBox(0, 0, 4, 4)};
    const auto r1 = stage_topk(s1, gts, 1);
    ASSERT_EQ(r1[0].gt_index, 1);
    ASSERT_FALSE(r1[1].is_positive());
    const auto sup = stage_supplement(s2, gts, r1);
    EXPECT_EQ(sup[1].gt_index, 0);
    EXPECT_EQ(sup[1].stage, 2);
}

TEST(HlaAssigner, ReusableAndEqualToOneShot) {
    const auto pts = single_level(64, 64, 8, 5);
    const HlaAssigner assigner(pts, HlaConfig{2, 0.8, MetricKind::Wasserstein});
    EXPECT_EQ(assigner.num_priors(), pts.size());
    const std::vector<BBox> a{BBox(20, 20, 6, 6)}, b{BBox(40, 30, 12, 4), BBox(10, 50, 3, 3)};
    EXPECT_EQ(assigner(a), hla_assign(pts, a, assigner.config()));
    EXPECT_EQ(assigner(b), hla_assign(pts, b, assigner.config()));
    EXPECT_EQ(assigner(a), hla_assign(pts, a, assigner.config()));
}

TEST(HlaAssignPriors, BetaOneMakesStagesAgree) {
    const auto pts = single_level(64, 64, 8, 5);
    const std::vector<BBox> gts{BBox(20, 20, 6, 6)};
    EXPECT_EQ(score_matrix(pts, gts, MetricKind::KLD, 1.0), score_matrix(pts, gts, MetricKind::KLD));
    std::vector<Gaussian2D> g;
    for (const auto& p : pts) g.push_back(erf_gaussian(p));
    const AssignmentResult r = hla_assign_priors(g, g, gts, HlaConfig{3, 1.0, MetricKind::KLD});
    EXPECT_EQ(r, hla_assign(pts, gts, HlaConfig{3, 1.0, MetricKind::KLD}));
    EXPECT_THROW(hla_assign_priors(g, std::span(g).first(3), gts, HlaConfig{}), ValidationError);
}

}  // namespace
}  // namespace rfla
