#include "rfla/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <memory>
#include <mutex>
#include <thread>

#include "rfla/rng.hpp"

namespace rfla {

void TrialConfig::validate() const {
    if (!(scale_lo >= 0.0 && scale_lo < scale_hi) || !std::isfinite(scale_hi))
        throw ValidationError("trial scales must satisfy 0 <= scale_lo < scale_hi");
    if (n_intervals < 1) throw ValidationError("n_intervals must be >= 1");
    if (n_trials < 1) throw ValidationError("n_trials must be >= 1");
    if (gts_per_image < 1) throw ValidationError("gts_per_image must be >= 1");
    if (image_w <= 0 || image_h <= 0) throw ValidationError("image extent must be positive");
    if (scale_hi > std::min(image_w, image_h)) throw ValidationError("scale_hi exceeds the image extent");
    if (aspect.mode == AspectMode::Jitter && !(aspect.lo > 0.0 && aspect.lo <= aspect.hi && std::isfinite(aspect.hi)))
        throw ValidationError("aspect jitter bounds must satisfy 0 < lo <= hi");
}

namespace {

BBox draw_gt(const TrialConfig& cfg, std::uint64_t index) {
    SplitMix64 rng = SplitMix64::stream(cfg.seed, index);
    const double scale = cfg.scale_hi - rng.uniform() * (cfg.scale_hi - cfg.scale_lo);
    double w = scale;
    double h = scale;
    if (cfg.aspect.mode == AspectMode::Jitter) {
        const double ratio = rng.uniform(cfg.aspect.lo, cfg.aspect.hi);
        if (ratio >= 1.0) {
            h = scale / ratio;
        } else {
            w = scale * ratio;
        }
    }
    const double cx = rng.uniform(w / 2.0, cfg.image_w - w / 2.0);
    const double cy = rng.uniform(h / 2.0, cfg.image_h - h / 2.0);
    return BBox(cx, cy, w, h);
}

}  // namespace

std::vector<BBox> random_gts(const TrialConfig& cfg) {
    // n_trials == 0 is allowed here (empty draw) even though a histogram run needs >= 1.
    TrialConfig probe = cfg;
    probe.n_trials = 1;
    probe.validate();
    std::vector<BBox> out;
    out.reserve(cfg.n_trials);
    for (std::size_t i = 0; i < cfg.n_trials; ++i) out.push_back(draw_gt(cfg, i));
    return out;
}

std::size_t interval_index(double scale, double lo, double hi, std::size_t n_intervals) noexcept {
    const double width = (hi - lo) / static_cast<double>(n_intervals);
    const double pos = std::ceil((scale - lo) / width) - 1.0;
    if (!(pos > 0.0)) return 0;
    return std::min(static_cast<std::size_t>(pos), n_intervals - 1);
}

double IntervalHistogram::mean_overall() const noexcept {
    return total_gts == 0 ? 0.0 : static_cast<double>(total_positives) / static_cast<double>(total_gts);
}

double IntervalHistogram::min_interval_mean() const noexcept {
    bool any = false;
    double out = 0.0;
    for (const IntervalStats& s : intervals) {
        if (s.n_gts == 0) continue;
        out = any ? std::min(out, s.mean_positives) : s.mean_positives;
        any = true;
    }
    return out;
}

double IntervalHistogram::max_interval_mean() const noexcept {
    double out = 0.0;
    for (const IntervalStats& s : intervals) {
        if (s.n_gts > 0) out = std::max(out, s.mean_positives);
    }
    return out;
}

double IntervalHistogram::imbalance(double eps) const noexcept {
    return max_interval_mean() / std::max(min_interval_mean(), eps);
}

double IntervalHistogram::stage2_share() const noexcept {
    return total_positives == 0 ? 0.0 : static_cast<double>(stage2_positives) / static_cast<double>(total_positives);
}

IntervalHistogram positives_per_interval(const Assigner& assigner, const TrialConfig& cfg) {
    cfg.validate();
    const std::vector<BBox> gts = random_gts(cfg);
    const std::size_t n_images = (gts.size() + cfg.gts_per_image - 1) / cfg.gts_per_image;
    std::vector<std::size_t> positives(gts.size(), 0);
    std::vector<std::size_t> stage2(n_images, 0);

    auto run_images = [&](std::size_t first, std::size_t last) {
        for (std::size_t img = first; img < last; ++img) {
            const std::size_t lo = img * cfg.gts_per_image;
            const std::size_t hi = std::min(gts.size(), lo + cfg.gts_per_image);
            const std::span<const BBox> batch(gts.data() + lo, hi - lo);
            const AssignmentResult res = assigner(batch);
            if (res.positives_per_gt.size() != batch.size())
                throw ValidationError("assigner returned counts for the wrong number of gts");
            std::copy(res.positives_per_gt.begin(), res.positives_per_gt.end(), positives.begin() + lo);
            for (const Label& l : res.labels) stage2[img] += l.is_positive() && l.stage == 2 ? 1 : 0;
        }
    };

    const unsigned workers = std::clamp<unsigned>(cfg.workers, 1, static_cast<unsigned>(std::min<std::size_t>(n_images, 256)));
    if (workers == 1) {
        run_images(0, n_images);
    } else {
        std::exception_ptr failure;
        std::mutex failure_mutex;
        {
            std::vector<std::jthread> pool;
            const std::size_t chunk = (n_images + workers - 1) / workers;
            for (std::size_t first = 0; first < n_images; first += chunk) {
                pool.emplace_back([&, first] {
                    try {
                        run_images(first, std::min(n_images, first + chunk));
                    } catch (...) {
                        std::lock_guard lock(failure_mutex);
                        if (!failure) failure = std::current_exception();
                    }
                });
            }
        }
        if (failure) std::rethrow_exception(failure);
    }

    // Integer sums keep the reduction exact and independent of scheduling.
    std::vector<std::uint64_t> count(cfg.n_intervals, 0), sum(cfg.n_intervals, 0), sum_sq(cfg.n_intervals, 0);
    IntervalHistogram out;
    for (std::size_t i = 0; i < gts.size(); ++i) {
        const double scale = std::max(gts[i].w(), gts[i].h());
        const std::size_t bin = interval_index(scale, cfg.scale_lo, cfg.scale_hi, cfg.n_intervals);
        ++count[bin];
        sum[bin] += positives[i];
        sum_sq[bin] += static_cast<std::uint64_t>(positives[i]) * positives[i];
        out.total_positives += positives[i];
    }
    out.total_gts = gts.size();
    for (std::size_t n : stage2) out.stage2_positives += n;

    const double width = (cfg.scale_hi - cfg.scale_lo) / static_cast<double>(cfg.n_intervals);
    for (std::size_t b = 0; b < cfg.n_intervals; ++b) {
        IntervalStats s;
        s.scale_lo = cfg.scale_lo + width * static_cast<double>(b);
        s.scale_hi = b + 1 == cfg.n_intervals ? cfg.scale_hi : cfg.scale_lo + width * static_cast<double>(b + 1);
        s.n_gts = count[b];
        if (count[b] > 0) {
            const double n = static_cast<double>(count[b]);
            s.mean_positives = static_cast<double>(sum[b]) / n;
            const std::uint64_t spread = count[b] * sum_sq[b] - sum[b] * sum[b];
            s.stddev_positives = std::sqrt(static_cast<double>(spread)) / n;
        }
        out.intervals.push_back(s);
    }
    return out;
}

AssignerKind parse_assigner(std::string_view name) {
    if (name == "rfla") return AssignerKind::Rfla;
    if (name == "center") return AssignerKind::CenterSampling;
    if (name == "maxiou") return AssignerKind::MaxIou;
    if (name == "gaussian_anchor") return AssignerKind::GaussianAnchor;
    if (name == "receptive_anchor") return AssignerKind::ReceptiveAnchor;
    throw ValidationError("unknown assigner '" + std::string(name) + "'");
}

std::string_view assigner_name(AssignerKind kind) noexcept {
    switch (kind) {
        case AssignerKind::Rfla: return "rfla";
        case AssignerKind::CenterSampling: return "center";
        case AssignerKind::MaxIou: return "maxiou";
        case AssignerKind::GaussianAnchor: return "gaussian_anchor";
        case AssignerKind::ReceptiveAnchor: return "receptive_anchor";
    }
    return "?";
}

Assigner make_assigner(AssignerKind kind, const AssignerSetup& setup) {
    const std::vector<FeaturePoint> points = build_grid(setup.pyramid);
    switch (kind) {
        case AssignerKind::Rfla: {
            auto hla = std::make_shared<const HlaAssigner>(points, setup.hla);
            return [hla](std::span<const BBox> gts) { return (*hla)(gts); };
        }
        case AssignerKind::CenterSampling: {
            ScaleRanges ranges = setup.ranges.value_or(default_scale_ranges(setup.pyramid));
            ranges.validate(setup.pyramid.levels.size());
            auto shared = std::make_shared<const std::vector<FeaturePoint>>(points);
            return [shared, ranges](std::span<const BBox> gts) { return center_sampling_assign(*shared, gts, ranges); };
        }
        case AssignerKind::MaxIou: {
            const std::vector<Anchor> anchors = generate_anchors(setup.pyramid, setup.anchors);
            auto matcher = std::make_shared<const MaxIouMatcher>(anchors, setup.maxiou);
            return [matcher](std::span<const BBox> gts) { return (*matcher)(gts); };
        }
        case AssignerKind::GaussianAnchor: {
            const std::vector<Anchor> anchors = generate_anchors(setup.pyramid, setup.anchors);
            auto hla = std::make_shared<const HlaAssigner>(gaussian_anchor_assigner(anchors, setup.hla));
            return [hla](std::span<const BBox> gts) { return (*hla)(gts); };
        }
        case AssignerKind::ReceptiveAnchor: {
            auto matcher = std::make_shared<const MaxIouMatcher>(receptive_anchors(points), setup.maxiou);
            return [matcher](std::span<const BBox> gts) { return (*matcher)(gts); };
        }
    }
    throw ValidationError("unhandled assigner kind");
}

std::vector<SweepRow> sweep_k(std::span<const std::size_t> ks, const SweepSetup& setup) {
    std::vector<SweepRow> rows;
    for (std::size_t k : ks) {
        AssignerSetup s = setup.assigner;
        s.hla.k = k;
        rows.push_back({"k", static_cast<double>(k), positives_per_interval(make_assigner(AssignerKind::Rfla, s), setup.trial)});
    }
    return rows;
}

std::vector<SweepRow> sweep_beta(std::span<const double> betas, const SweepSetup& setup) {
    std::vector<SweepRow> rows;
    for (double beta : betas) {
        AssignerSetup s = setup.assigner;
        s.hla.beta = beta;
        rows.push_back({"beta", beta, positives_per_interval(make_assigner(AssignerKind::Rfla, s), setup.trial)});
    }
    return rows;
}

std::vector<SweepRow> sweep_anchor_scale(std::span<const double> scales, const SweepSetup& setup) {
    std::vector<SweepRow> rows;
    for (double scale : scales) {
        AssignerSetup s = setup.assigner;
        s.anchors.base_scale = scale;
        rows.push_back(
            {"anchor_scale", scale, positives_per_interval(make_assigner(AssignerKind::MaxIou, s), setup.trial)});
    }
    return rows;
}

}  // namespace rfla
