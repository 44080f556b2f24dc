#pragma once

// Run configuration for the rfla tool, read from a JSON document.
//
// Every section is optional and falls back to the defaults below. Unknown
// keys anywhere in the document are rejected.
//
//   {
//     "pyramid":   {"preset": "resnet50_fpn", "image_w": 800, "image_h": 800}
//               or {"image_w": .., "image_h": .., "center_offset": 0.5,
//                   "levels": [{"stride": 8, "erf_radius": 4},
//                              {"stride": 16, "conv_stack": [{"kernel": 3, "stride": 2}, ...]}]},
//     "assigner":  "rfla",                        // used by `assign`
//     "assigners": ["rfla", "center", "maxiou"],  // used by `analyze`
//     "rfla":      {"k": 3, "beta": 0.9, "metric": "kld"},
//     "anchors":   {"base_scale": 8, "ratios": [0.5, 1, 2]},
//     "maxiou":    {"pos_thr": 0.5, "neg_thr": 0.5, "low_quality_match": false},
//     "center":    {"ranges": [[0, 32], [32, 64], [64, null]]},   // null = unbounded
//     "trial":     {"seed": 42, "n_trials": 10000, "scale_lo": 0, "scale_hi": 64,
//                   "n_intervals": 16, "aspect": "square" | {"jitter": [0.5, 2]},
//                   "image_w": 800, "image_h": 800, "gts_per_image": 1, "workers": 1}
//   }
//
// The trial image defaults to the pyramid image extent.

#include <filesystem>
#include <string_view>
#include <vector>

#include "rfla/analysis.hpp"

namespace rfla::cli {

struct RunConfig {
    AssignerSetup setup;
    AssignerKind assigner = AssignerKind::Rfla;
    std::vector<AssignerKind> assigners{AssignerKind::Rfla, AssignerKind::CenterSampling, AssignerKind::MaxIou};
    TrialConfig trial;
};

RunConfig default_config();

/// Parses and validates a config document. Throws ValidationError.
RunConfig parse_config(std::string_view json_text);

RunConfig load_config(const std::filesystem::path& path);

/// Boxes from a CSV with header `cx,cy,w,h`. Errors name the offending row.
std::vector<BBox> parse_gts_csv(std::string_view text);

std::vector<BBox> load_gts(const std::filesystem::path& path);

}  // namespace rfla::cli
