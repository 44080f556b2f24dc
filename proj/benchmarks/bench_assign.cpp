#include <benchmark/benchmark.h>

#include "rfla/analysis.hpp"
#include "rfla/baselines.hpp"
#include "rfla/hla.hpp"

namespace {

using namespace rfla;

std::vector<BBox> gts_for(std::size_t n) {
    TrialConfig cfg;
    cfg.n_trials = n;
    return random_gts(cfg);
}

void BM_ScoreMatrix(benchmark::State& state) {
    const auto points = build_grid(resnet50_fpn_preset(800, 800));
    const PriorSet priors(points, 1.0);
    const auto gts = gts_for(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(score_matrix(priors, gts, MetricKind::KLD));
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(points.size() * gts.size()));
}
BENCHMARK(BM_ScoreMatrix)->Arg(1)->Arg(8)->Arg(32);

void BM_HlaAssigner(benchmark::State& state) {
    const HlaAssigner assigner(build_grid(resnet50_fpn_preset(800, 800)), HlaConfig{});
    const auto gts = gts_for(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(assigner(gts));
}
BENCHMARK(BM_HlaAssigner)->Arg(1)->Arg(8)->Arg(32);

void BM_MaxIouMatcher(benchmark::State& state) {
    const PyramidSpec spec = resnet50_fpn_preset(800, 800);
    const MaxIouMatcher matcher(generate_anchors(spec, AnchorSpec{}), MaxIouConfig{});
    const auto gts = gts_for(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(matcher(gts));
}
BENCHMARK(BM_MaxIouMatcher)->Arg(1)->Arg(8)->Arg(32);

void BM_CenterSampling(benchmark::State& state) {
    const PyramidSpec spec = resnet50_fpn_preset(800, 800);
    const auto points = build_grid(spec);
    const ScaleRanges ranges = default_scale_ranges(spec);
    const auto gts = gts_for(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(center_sampling_assign(points, gts, ranges));
}
BENCHMARK(BM_CenterSampling)->Arg(1)->Arg(8);

}  // namespace

BENCHMARK_MAIN();
