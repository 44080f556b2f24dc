#include "commands.hpp"

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>

#include <CLI11.hpp>
#include <json.hpp>

#include "config.hpp"
#include "report.hpp"

namespace rfla::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct CommonOptions {
    std::string config;
    std::string out = ".";
    std::string metric;
    std::optional<std::uint64_t> seed;
};

RunConfig resolve(const CommonOptions& opts) {
    RunConfig cfg = opts.config.empty() ? default_config() : load_config(opts.config);
    if (!opts.metric.empty()) cfg.setup.hla.metric = parse_metric(opts.metric);
    if (opts.seed) cfg.trial.seed = *opts.seed;
    return cfg;
}

std::vector<PriorRow> prior_rows(AssignerKind kind, const AssignerSetup& setup) {
    std::vector<PriorRow> rows;
    const auto from_anchors = [&rows](const std::vector<Anchor>& anchors) {
        for (const Anchor& a : anchors)
            rows.push_back({a.flat_id, a.level, a.box.cx(), a.box.cy(), 0.5 * std::sqrt(bbox_area(a.box))});
    };
    switch (kind) {
        case AssignerKind::MaxIou:
        case AssignerKind::GaussianAnchor:
            from_anchors(generate_anchors(setup.pyramid, setup.anchors));
            break;
        default:
            for (const FeaturePoint& p : build_grid(setup.pyramid)) rows.push_back({p.flat_id, p.level, p.px, p.py, p.er});
    }
    return rows;
}

json histogram_summary(const IntervalHistogram& h) {
    return {{"total_gts", h.total_gts},
            {"total_positives", h.total_positives},
            {"stage2_positives", h.stage2_positives},
            {"mean_pos_overall", h.mean_overall()},
            {"min_interval_mean", h.min_interval_mean()},
            {"max_interval_mean", h.max_interval_mean()},
            {"imbalance", h.imbalance()},
            {"stage2_share", h.stage2_share()}};
}

std::map<std::string, std::string> do_assign(const CommonOptions& opts, const std::string& gts_path) {
    const RunConfig cfg = resolve(opts);
    const std::vector<BBox> gts = load_gts(gts_path);
    const AssignmentResult result = make_assigner(cfg.assigner, cfg.setup)(gts);
    const std::vector<PriorRow> priors = prior_rows(cfg.assigner, cfg.setup);

    json gt_list = json::array();
    for (std::size_t i = 0; i < gts.size(); ++i) {
        gt_list.push_back({{"index", i},
                           {"cx", gts[i].cx()},
                           {"cy", gts[i].cy()},
                           {"w", gts[i].w()},
                           {"h", gts[i].h()},
                           {"positives", result.positives_per_gt[i]},
                           {"max_score", result.max_score_per_gt[i]}});
    }
    const json summary = {{"command", "assign"},
                          {"assigner", std::string(assigner_name(cfg.assigner))},
                          {"metric", std::string(metric_name(cfg.setup.hla.metric))},
                          {"num_priors", priors.size()},
                          {"num_positives", result.num_positives()},
                          {"gts", gt_list}};
    return {{"labels.csv", labels_csv(priors, result)}, {"summary.json", summary.dump(2) + "\n"}};
}

std::map<std::string, std::string> do_analyze(const CommonOptions& opts) {
    const RunConfig cfg = resolve(opts);
    std::vector<NamedHistogram> hists;
    json per = json::object();
    for (AssignerKind kind : cfg.assigners) {
        const std::string name(assigner_name(kind));
        hists.emplace_back(name, positives_per_interval(make_assigner(kind, cfg.setup), cfg.trial));
        per[name] = histogram_summary(hists.back().second);
    }
    const json summary = {{"command", "analyze"},
                          {"seed", cfg.trial.seed},
                          {"n_trials", cfg.trial.n_trials},
                          {"metric", std::string(metric_name(cfg.setup.hla.metric))},
                          {"assigners", per}};
    return {{"histogram.csv", histogram_csv(hists)},
            {"histogram.svg", histogram_svg(hists)},
            {"summary.json", summary.dump(2) + "\n"}};
}

std::vector<std::string> split_grid(const std::string& grid) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = grid.find(',', start);
        out.push_back(grid.substr(start, comma == std::string::npos ? std::string::npos : comma - start));
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return out;
}

template <typename T>
T parse_grid_value(const std::string& token) {
    T v{};
    const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
    if (token.empty() || ec != std::errc() || ptr != token.data() + token.size())
        throw UsageError("--grid: '" + token + "' is not a valid value");
    return v;
}

std::map<std::string, std::string> do_sweep(const CommonOptions& opts, const std::string& param, const std::string& grid) {
    const RunConfig cfg = resolve(opts);
    const std::vector<std::string> tokens = split_grid(grid);
    const SweepSetup setup{cfg.setup, cfg.trial};
    std::vector<SweepRow> rows;
    if (param == "k") {
        std::vector<std::size_t> ks;
        for (const std::string& t : tokens) ks.push_back(parse_grid_value<std::size_t>(t));
        rows = sweep_k(ks, setup);
    } else {
        std::vector<double> values;
        for (const std::string& t : tokens) {
            const double v = parse_grid_value<double>(t);
            if (!std::isfinite(v)) throw UsageError("--grid: '" + t + "' is not finite");
            values.push_back(v);
        }
        rows = param == "beta" ? sweep_beta(values, setup) : sweep_anchor_scale(values, setup);
    }
    return {{"sweep.csv", sweep_csv(rows)}};
}

}  // namespace

void write_outputs(const std::string& dir, const std::map<std::string, std::string>& files) {
    const fs::path root(dir);
    std::vector<fs::path> written;
    try {
        fs::create_directories(root);
        for (const auto& [name, content] : files) {
            const fs::path tmp = root / (name + ".tmp");
            written.push_back(tmp);
            {
                std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
                f << content;
                f.close();
                if (!f) throw std::runtime_error("cannot write " + tmp.string());
            }
        }
        for (const auto& [name, content] : files) fs::rename(root / (name + ".tmp"), root / name);
    } catch (...) {
        std::error_code ec;
        for (const fs::path& p : written) fs::remove(p, ec);
        throw;
    }
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Receptive-field label assignment toolkit", "rfla"};
    app.require_subcommand(1);

    CommonOptions common;
    std::string gts_path, param, grid;
    const auto add_common = [&common](CLI::App* sub, bool with_seed) {
        sub->add_option("--config", common.config, "JSON run configuration")->check(CLI::ExistingFile);
        sub->add_option("--out", common.out, "Output directory");
        sub->add_option("--metric", common.metric, "Distance metric")->check(CLI::IsMember({"kld", "wd", "giou"}));
        if (with_seed) sub->add_option("--seed", common.seed, "Trial seed");
    };

    CLI::App* assign = app.add_subcommand("assign", "Label every prior for a set of boxes");
    add_common(assign, false);
    assign->add_option("--gts", gts_path, "CSV with header cx,cy,w,h")->required()->check(CLI::ExistingFile);

    CLI::App* analyze = app.add_subcommand("analyze", "Positives per gt-scale interval");
    add_common(analyze, true);

    CLI::App* sweep = app.add_subcommand("sweep", "Balance statistics over a parameter grid");
    add_common(sweep, true);
    sweep->add_option("--param", param, "Swept parameter")->required()->check(CLI::IsMember({"k", "beta", "anchor_scale"}));
    sweep->add_option("--grid", grid, "Comma-separated values")->required();

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "rfla: " << e.what() << "\n";
        return kExitUsage;
    }

    try {
        std::map<std::string, std::string> files;
        if (assign->parsed()) files = do_assign(common, gts_path);
        else if (analyze->parsed()) files = do_analyze(common);
        else files = do_sweep(common, param, grid);
        write_outputs(common.out, files);
        for (const auto& [name, content] : files) out << (fs::path(common.out) / name).string() << "\n";
        return kExitOk;
    } catch (const UsageError& e) {
        err << "rfla: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "rfla: error: " << e.what() << "\n";
        return kExitInvalid;
    }
}

}  // namespace rfla::cli
