#pragma once

// Monte-Carlo harness for the scale / positive-sample balance study and the
// parameter sweeps built on it.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rfla/baselines.hpp"
#include "rfla/geometry.hpp"
#include "rfla/hla.hpp"
#include "rfla/receptive_field.hpp"

namespace rfla {

enum class AspectMode { Square, Jitter };

struct AspectSpec {
    AspectMode mode = AspectMode::Square;
    double lo = 1.0;  // Jitter only: bounds on w / h
    double hi = 1.0;
};

struct TrialConfig {
    std::uint64_t seed = 42;
    std::size_t n_trials = 10000;  // number of generated gts
    double scale_lo = 0.0;
    double scale_hi = 64.0;
    std::size_t n_intervals = 16;
    AspectSpec aspect;
    int image_w = 800;
    int image_h = 800;
    std::size_t gts_per_image = 1;
    unsigned workers = 1;

    void validate() const;
};

/// n_trials boxes. Gt i is drawn from stream i of the seed: its max side is
/// uniform in (scale_lo, scale_hi] and its center keeps it inside the image.
std::vector<BBox> random_gts(const TrialConfig& cfg);

struct IntervalStats {
    double scale_lo = 0.0;
    double scale_hi = 0.0;
    std::size_t n_gts = 0;
    double mean_positives = 0.0;
    double stddev_positives = 0.0;  // population standard deviation

    friend bool operator==(const IntervalStats&, const IntervalStats&) = default;
};

struct IntervalHistogram {
    std::vector<IntervalStats> intervals;
    std::size_t total_gts = 0;
    std::size_t total_positives = 0;
    std::size_t stage2_positives = 0;

    double mean_overall() const noexcept;
    /// Extremes over intervals holding at least one gt; 0 when none do.
    double min_interval_mean() const noexcept;
    double max_interval_mean() const noexcept;
    /// max interval mean / max(min interval mean, eps).
    double imbalance(double eps = 1e-3) const noexcept;
    double stage2_share() const noexcept;

    friend bool operator==(const IntervalHistogram&, const IntervalHistogram&) = default;
};

/// Index of the (lo, hi] interval containing `scale`; values on the lower
/// boundary of the whole range fall into the first interval.
std::size_t interval_index(double scale, double lo, double hi, std::size_t n_intervals) noexcept;

/// Produces the labels for one simulated image. Must be safe to call
/// concurrently.
using Assigner = std::function<AssignmentResult(std::span<const BBox>)>;

/// Runs `assigner` on every simulated image and bins positives per gt by the
/// gt's max side. Serial and parallel runs produce identical histograms.
IntervalHistogram positives_per_interval(const Assigner& assigner, const TrialConfig& cfg);

enum class AssignerKind { Rfla, CenterSampling, MaxIou, GaussianAnchor, ReceptiveAnchor };

/// "rfla", "center", "maxiou", "gaussian_anchor" or "receptive_anchor".
AssignerKind parse_assigner(std::string_view name);
std::string_view assigner_name(AssignerKind kind) noexcept;

struct AssignerSetup {
    PyramidSpec pyramid;
    HlaConfig hla;
    AnchorSpec anchors;
    MaxIouConfig maxiou;
    std::optional<ScaleRanges> ranges;  // default_scale_ranges(pyramid) when empty
};

/// Builds the grid (and anchors) once; the returned callable shares them.
Assigner make_assigner(AssignerKind kind, const AssignerSetup& setup);

struct SweepSetup {
    AssignerSetup assigner;
    TrialConfig trial;
};

struct SweepRow {
    std::string param;
    double value = 0.0;
    IntervalHistogram histogram;
};

/// RFLA histograms for each k.
std::vector<SweepRow> sweep_k(std::span<const std::size_t> ks, const SweepSetup& setup);

/// RFLA histograms for each stage-2 decay factor.
std::vector<SweepRow> sweep_beta(std::span<const double> betas, const SweepSetup& setup);

/// MaxIoU histograms for each anchor base scale.
std::vector<SweepRow> sweep_anchor_scale(std::span<const double> scales, const SweepSetup& setup);

}  // namespace rfla
