#pragma once

// Text renderers for the tool's outputs. Floats use 17 significant digits so
// values round-trip exactly; every line ends with LF.

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "rfla/analysis.hpp"

namespace rfla::cli {

/// Shortest-free, locale-independent %.17g.
std::string format_double(double v);

/// One row per prior. `px,py,er` describe the prior: the feature point for
/// point-based assigners, the anchor center and half side sqrt(w*h)/2 for
/// anchor-based ones.
struct PriorRow {
    std::size_t flat_id = 0;
    std::size_t level = 0;
    double px = 0.0;
    double py = 0.0;
    double er = 0.0;
};

std::string labels_csv(std::span<const PriorRow> priors, const AssignmentResult& result);

using NamedHistogram = std::pair<std::string, IntervalHistogram>;

std::string histogram_csv(std::span<const NamedHistogram> histograms);

std::string sweep_csv(std::span<const SweepRow> rows);

/// Grouped bar chart of mean positives per interval.
std::string histogram_svg(std::span<const NamedHistogram> histograms);

}  // namespace rfla::cli
