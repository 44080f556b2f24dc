// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "cli/commands.hpp"
#include "oracles.hpp"
#include "rfla/analysis.hpp"
#include "rfla/distances.hpp"
#include "rfla/hla.hpp"
#include "rfla/receptive_field.hpp"
#include "rfla/targets.hpp"

namespace fs = std::filesystem;
using namespace rfla;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;
};

struct Criterion {
    int id;
    std::string name;
    double budget_s;  // 0 = no runtime bound
    std::function<Outcome()> check;
};

std::string fmt(const char* pattern, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, pattern, v);
    return buf;
}

Outcome kld_oracle() {
    testing::PairGen gen(1001);
    double worst = 0.0;
    for (int i = 0; i < 100000; ++i) {
        const Gaussian2D p = erf_gaussian(gen.point());
        const Gaussian2D g = gt_gaussian(gen.box());
        const double want = testing::kld_matrix(p, g);
        const double got = kld(p, g);
        const double err = want > 1e-6 ? testing::rel_err(got, want) : std::abs(got - want);
        worst = std::max(worst, err);
    }
    return {worst <= 1e-9, "max relative error " + fmt("%.3g", worst) + " over 1e5 pairs"};
}

Outcome wasserstein_properties() {
    testing::PairGen gen(1002);
    double expand_err = 0.0, scale_err = 0.0;
    for (int i = 0; i < 1000; ++i) {
        const FeaturePoint p = gen.point();
        const BBox b = gen.box();
        const Gaussian2D e = erf_gaussian(p), g = gt_gaussian(b);
        const double w = wasserstein2_sq(e, g);
        expand_err = std::max(expand_err, testing::rel_err(w, testing::w2_expanded(e, g)));
        const double s = gen.uniform(0.1, 10);
        const double ws = wasserstein2_sq(erf_gaussian({0, p.px * s, p.py * s, p.er * s, 0}),
                                          gt_gaussian(BBox(b.cx() * s, b.cy() * s, b.w() * s, b.h() * s)));
        if (w > 1e-9) scale_err = std::max(scale_err, testing::rel_err(ws, s * s * w));
    }
    std::size_t violations = 0;
    for (int i = 0; i < 10000; ++i) {
        const Gaussian2D a = gt_gaussian(gen.box()), b = gt_gaussian(gen.box()), c = gt_gaussian(gen.box());
        const double ab = std::sqrt(wasserstein2_sq(a, b)), bc = std::sqrt(wasserstein2_sq(b, c));
        const double ac = std::sqrt(wasserstein2_sq(a, c));
        if (ac > ab + bc + 1e-9 * (ab + bc)) ++violations;
    }
    return {expand_err <= 1e-12 && scale_err <= 1e-9 && violations == 0,
            "expansion err " + fmt("%.3g", expand_err) + ", scaling err " + fmt("%.3g", scale_err) +
                ", triangle violations " + std::to_string(violations) + "/1e4"};
}

Outcome kld_scale_invariance() {
    testing::PairGen gen(1003);
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
        const FeaturePoint p = gen.point();
        const BBox b = gen.box();
        const double s = gen.uniform(0.1, 10);
        const double base = kld(erf_gaussian(p), gt_gaussian(b));
        const double scaled = kld(erf_gaussian({0, p.px * s, p.py * s, p.er * s, 0}),
                                  gt_gaussian(BBox(b.cx() * s, b.cy() * s, b.w() * s, b.h() * s)));
        worst = std::max(worst, base > 1e-6 ? testing::rel_err(scaled, base) : std::abs(scaled - base));
    }
    return {worst <= 1e-9, "max relative change " + fmt("%.3g", worst) + " over 1e3 draws"};
}

Outcome worked_values() {
    const Gaussian2D e = erf_gaussian({0, 0, 0, 8, 0});
    const Gaussian2D g = gt_gaussian(BBox(8, 0, 16, 16));
    const double k = kld(e, g), oracle = testing::kld_matrix(e, g), w = wasserstein2_sq(e, g), r = rfd(0.5);
    const bool ok = std::abs(k - 0.5) <= 1e-12 && std::abs(oracle - 0.5) <= 1e-12 && std::abs(w - 64) <= 1e-12 &&
                    std::abs(testing::w2_expanded(e, g) - 64) <= 1e-12 && std::abs(r - 2.0 / 3.0) <= 1e-12;
    return {ok, "KLD " + fmt("%.17g", k) + ", W2^2 " + fmt("%.17g", w) + ", RFD(0.5) " + fmt("%.17g", r)};
}

std::vector<FeaturePoint> single_level(int w, int h, int stride, double er) {
    return build_grid(PyramidSpec{w, h, {PyramidLevelSpec{stride, ExplicitRadius{er}}}});
}

Outcome hla_cardinality_coverage() {
    std::string failures;
    // Isolated gt: exactly min(k, n).
    for (std::size_t n : {1u, 2u, 3u, 4u, 10u, 64u}) {
        std::vector<FeaturePoint> pts;
        for (std::size_t i = 0; i < n; ++i) pts.push_back({0, 4.0 + 8.0 * (i % 8), 4.0 + 8.0 * (i / 8), 4, i});
        for (std::size_t k : {1u, 3u, 5u}) {
            const auto r = hla_assign(pts, std::vector<BBox>{BBox(5, 6, 6, 9)}, HlaConfig{k, 0.9, MetricKind::KLD});
            if (r.positives_per_gt[0] != std::min(k, n)) failures += " isolated(n=" + std::to_string(n) + ",k=" + std::to_string(k) + ")";
        }
    }
    // Two overlapping gts: the smaller takes every stage-1 winner of the larger.
    std::vector<FeaturePoint> line;
    for (double x : {-8.0, -4.0, 0.0, 4.0, 8.0}) line.push_back({0, x, 0, 4, line.size()});
    const std::vector<BBox> pair{BBox(0, 0, 12, 12), BBox(0, 0, 8, 8)};
    const auto constructed = hla_assign(line, pair, HlaConfig{});
    if (constructed.positives_per_gt[0] == 0 || constructed.positives_per_gt[1] == 0) failures += " constructed";

    std::mt19937_64 rng(1005);
    std::uniform_real_distribution<double> u(0, 1);
    std::size_t uncovered = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        const int side = 8 * (8 + static_cast<int>(u(rng) * 12));
        const auto pts = single_level(side, side, 8, 2 + 30 * u(rng));
        const std::size_t k = 1 + static_cast<std::size_t>(u(rng) * 4);
        const std::size_t max_gts = std::min<std::size_t>(12, pts.size() - k);
        const std::size_t m = 1 + static_cast<std::size_t>(u(rng) * max_gts);
        std::vector<BBox> gts;
        for (std::size_t j = 0; j < m; ++j) gts.emplace_back(side * u(rng), side * u(rng), 1 + 63 * u(rng), 1 + 63 * u(rng));
        const auto r = hla_assign(pts, gts, HlaConfig{k, 0.9, MetricKind::KLD});
        for (std::size_t c : r.positives_per_gt) uncovered += c == 0;
    }
    if (uncovered) failures += " random(" + std::to_string(uncovered) + " uncovered gts)";
    return {failures.empty(), failures.empty() ? "isolated, constructed and 1e3 random instances covered" : "failed:" + failures};
}

Outcome fig6_reproduction() {
    AssignerSetup setup;
    setup.pyramid = resnet50_fpn_preset(800, 800);
    setup.anchors.base_scale = 8;
    setup.hla = HlaConfig{3, 0.9, MetricKind::KLD};
    TrialConfig trial;  // 1e4 square gts, (0, 64], 16 intervals, 800x800, one worker
    const IntervalHistogram rfla = positives_per_interval(make_assigner(AssignerKind::Rfla, setup), trial);
    const IntervalHistogram center = positives_per_interval(make_assigner(AssignerKind::CenterSampling, setup), trial);
    const IntervalHistogram maxiou = positives_per_interval(make_assigner(AssignerKind::MaxIou, setup), trial);

    bool tiny_ok = true;
    for (const IntervalStats& s : maxiou.intervals)
        if (s.scale_hi <= 8.0 && s.mean_positives >= 0.05) tiny_ok = false;
    bool rfla_ok = true;
    for (const IntervalStats& s : rfla.intervals) rfla_ok = rfla_ok && s.n_gts > 0 && s.mean_positives >= 1.0;
    const bool order_ok = rfla.imbalance() < center.imbalance() && center.imbalance() < maxiou.imbalance();
    return {tiny_ok && rfla_ok && order_ok,
            std::string("(a) ") + (tiny_ok ? "ok" : "fail") + " (b) " + (rfla_ok ? "ok" : "fail") + " (c) imbalance rfla " +
                fmt("%.3g", rfla.imbalance()) + " < center " + fmt("%.3g", center.imbalance()) + " < maxiou " +
                fmt("%.3g", maxiou.imbalance()) + (order_ok ? "" : " FAILS")};
}

struct Workspace {
    fs::path root;
    Workspace() : root(fs::temp_directory_path() / "rfla_acceptance") {
        fs::remove_all(root);
        fs::create_directories(root);
    }
    ~Workspace() {
        std::error_code ec;
        fs::remove_all(root, ec);
    }
    std::string put(const std::string& name, const std::string& text) const {
        std::ofstream(root / name, std::ios::binary) << text;
        return (root / name).string();
    }
    std::string get(const std::string& rel) const {
        std::ifstream in(root / rel, std::ios::binary);
        std::ostringstream s;
        s << in.rdbuf();
        return s.str();
    }
    int cli(const std::vector<std::string>& args) const {
        std::ostringstream out, err;
        const int rc = cli::run(args, out, err);
        if (rc != 0) std::fprintf(stderr, "%s", err.str().c_str());
        return rc;
    }
};

bool sweep_csv_conforms(const std::string& csv, const std::string& param) {
    std::istringstream in(csv);
    std::string line;
    std::getline(in, line);
    if (line != "param,value,mean_pos_overall,min_interval_mean,max_interval_mean,imbalance") return false;
    std::size_t rows = 0;
    while (std::getline(in, line)) {
        ++rows;
        std::istringstream fields(line);
        std::string f;
        std::getline(fields, f, ',');
        if (f != param) return false;
        for (int i = 0; i < 5; ++i) {
            if (!std::getline(fields, f, ',')) return false;
            try {
                std::size_t used = 0;
                (void)std::stod(f, &used);
                if (used != f.size()) return false;
            } catch (const std::exception&) {
                return false;
            }
        }
        if (std::getline(fields, f, ',')) return false;
    }
    return rows == 4 && csv.find('\r') == std::string::npos;
}

Outcome sweep_plumbing() {
    const Workspace ws;
    const std::string cfg = ws.put("cfg.json", R"({"trial": {"seed": 42, "n_trials": 1000}})");
    std::string detail;
    bool ok = true;
    for (const auto& [param, grid] : {std::pair<std::string, std::string>{"beta", "0.95,0.9,0.85,0.8"}, {"k", "1,2,3,4"}}) {
        for (const char* run : {"a", "b"}) {
            const std::string out = (ws.root / (param + run)).string();
            ok = ok && ws.cli({"sweep", "--config", cfg, "--param", param, "--grid", grid, "--out", out}) == 0;
        }
        const std::string a = ws.get(param + "a/sweep.csv"), b = ws.get(param + "b/sweep.csv");
        const bool conforms = sweep_csv_conforms(a, param);
        ok = ok && conforms && a == b;
        detail += param + ": " + (conforms ? "4-row schema ok" : "schema mismatch") + (a == b ? ", reruns identical; " : ", reruns differ; ");
    }
    return {ok, detail};
}

Outcome centerness_star_checks() {
    const double a = centerness_star({10, 10, 10, 10}, 0.01);
    const double b = centerness_star({-2, 4, 10, 4}, 0.01);
    const double c = centerness_star({0, 0, 8, 8}, 0.01);
    bool ok = std::abs(a - 1.001) <= 1e-9 && std::abs(b - std::sqrt((0.01 / 10) * (4.01 / 4))) <= 1e-9 &&
              std::abs(c - 0.00125) <= 1e-9;
    std::mt19937_64 rng(1008);
    std::uniform_real_distribution<double> u(-500, 500);
    std::size_t drawn = 0, bad = 0;
    while (drawn < 100000) {
        const LtrbTarget t{u(rng), u(rng), u(rng), u(rng)};
        if (std::max(t.l, t.r) <= 0 || std::max(t.t, t.b) <= 0) continue;
        ++drawn;
        const double v = centerness_star(t, 0.01);
        bad += !(std::isfinite(v) && v > 0);
    }
    ok = ok && bad == 0;
    return {ok, "examples " + fmt("%.9g", a) + ", " + fmt("%.9g", b) + ", " + fmt("%.9g", c) + "; non-finite " +
                    std::to_string(bad) + "/1e5"};
}

Outcome analyze_determinism() {
    const Workspace ws;
    const std::string serial = ws.put("serial.json", R"({"trial": {"seed": 7, "n_trials": 2000, "gts_per_image": 2}})");
    const std::string parallel =
        ws.put("parallel.json", R"({"trial": {"seed": 7, "n_trials": 2000, "gts_per_image": 2, "workers": 4}})");
    bool ok = ws.cli({"analyze", "--config", serial, "--out", (ws.root / "s1").string()}) == 0 &&
              ws.cli({"analyze", "--config", serial, "--out", (ws.root / "s2").string()}) == 0 &&
              ws.cli({"analyze", "--config", parallel, "--out", (ws.root / "p").string()}) == 0;
    const bool rerun = ws.get("s1/histogram.csv") == ws.get("s2/histogram.csv") &&
                       ws.get("s1/histogram.svg") == ws.get("s2/histogram.svg");
    const bool threads = ws.get("s1/histogram.csv") == ws.get("p/histogram.csv") &&
                         ws.get("s1/histogram.svg") == ws.get("p/histogram.svg");
    ok = ok && rerun && threads && !ws.get("s1/histogram.csv").empty();
    return {ok, std::string("rerun ") + (rerun ? "identical" : "differs") + ", 1 vs 4 workers " +
                    (threads ? "identical" : "differs")};
}

}  // namespace

int main() {
    const std::vector<Criterion> criteria{
        {1, "KLD oracle equivalence", 5, kld_oracle},
        {2, "Wasserstein properties", 5, wasserstein_properties},
        {3, "KLD scale invariance", 0, kld_scale_invariance},
        {4, "Worked-value checks", 0, worked_values},
        {5, "HLA cardinality and coverage", 10, hla_cardinality_coverage},
        {6, "Scale/positive-sample ordering (default protocol)", 60, fig6_reproduction},
        {7, "Sweep plumbing", 0, sweep_plumbing},
        {8, "Centerness*", 0, centerness_star_checks},
        {9, "Determinism end-to-end", 0, analyze_determinism},
    };
    int failed = 0;
    for (const Criterion& c : criteria) {
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.check();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        const bool in_time = c.budget_s <= 0 || secs < c.budget_s;
        const bool pass = o.pass && in_time;
        failed += !pass;
        std::string timing = fmt("%.2f s", secs);
        if (c.budget_s > 0) timing += fmt(" / %.0f s", c.budget_s);
        std::printf("%s [%d] %s: %s (%s)\n", pass ? "PASS" : "FAIL", c.id, c.name.c_str(), o.detail.c_str(), timing.c_str());
        std::fflush(stdout);
    }
    std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
