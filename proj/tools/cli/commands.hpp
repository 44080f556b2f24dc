#pragma once

// Command dispatch for the rfla tool:
//
//   rfla assign  --gts boxes.csv [--config cfg.json] [--out dir] [--metric kld|wd|giou]
//   rfla analyze [--config cfg.json] [--out dir] [--seed n] [--metric ...]
//   rfla sweep   --param k|beta|anchor_scale --grid v1,v2,... [--config ...] [--out dir] [--seed n]
//
// Exit status: 0 on success, 1 on invalid input or I/O failure, 2 on a
// malformed command line. Outputs are rendered in memory first so a failing
// run leaves no files behind.

#include <map>
#include <ostream>
#include <string>
#include <vector>

namespace rfla::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInvalid = 1;
inline constexpr int kExitUsage = 2;

/// `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Writes every file under `dir`, creating it if needed. On failure removes
/// whatever was written and rethrows.
void write_outputs(const std::string& dir, const std::map<std::string, std::string>& files);

}  // namespace rfla::cli
