#include "config.hpp"

#include <charconv>
#include <fstream>
#include <initializer_list>
#include <limits>
#include <sstream>
#include <string>

#include <json.hpp>

namespace rfla::cli {

using nlohmann::json;

namespace {

void expect_keys(const json& obj, std::string_view where, std::initializer_list<std::string_view> allowed) {
    if (!obj.is_object()) throw ValidationError(std::string(where) + ": expected an object");
    for (const auto& item : obj.items()) {
        bool known = false;
        for (std::string_view a : allowed) known = known || item.key() == a;
        if (!known) throw ValidationError(std::string(where) + ": unknown key '" + item.key() + "'");
    }
}

double number(const json& v, std::string_view where) {
    if (!v.is_number()) throw ValidationError(std::string(where) + ": expected a number");
    return v.get<double>();
}

long long integer(const json& v, std::string_view where) {
    if (!v.is_number_integer()) throw ValidationError(std::string(where) + ": expected an integer");
    return v.get<long long>();
}

std::size_t count(const json& v, std::string_view where) {
    const long long n = integer(v, where);
    if (n < 0) throw ValidationError(std::string(where) + ": must be non-negative");
    return static_cast<std::size_t>(n);
}

int extent(const json& v, std::string_view where) {
    const long long n = integer(v, where);
    if (n <= 0 || n > std::numeric_limits<int>::max()) throw ValidationError(std::string(where) + ": out of range");
    return static_cast<int>(n);
}

std::string text(const json& v, std::string_view where) {
    if (!v.is_string()) throw ValidationError(std::string(where) + ": expected a string");
    return v.get<std::string>();
}

ConvStack parse_conv_stack(const json& arr, const std::string& where) {
    if (!arr.is_array()) throw ValidationError(where + ": expected an array");
    ConvStack stack;
    for (std::size_t i = 0; i < arr.size(); ++i) {
        const std::string at = where + "[" + std::to_string(i) + "]";
        expect_keys(arr[i], at, {"kernel", "stride"});
        if (!arr[i].contains("kernel") || !arr[i].contains("stride"))
            throw ValidationError(at + ": needs kernel and stride");
        stack.push_back({extent(arr[i]["kernel"], at + ".kernel"), extent(arr[i]["stride"], at + ".stride")});
    }
    return stack;
}

PyramidSpec parse_pyramid(const json& obj) {
    expect_keys(obj, "pyramid", {"preset", "image_w", "image_h", "center_offset", "levels"});
    const int w = obj.contains("image_w") ? extent(obj["image_w"], "pyramid.image_w") : 800;
    const int h = obj.contains("image_h") ? extent(obj["image_h"], "pyramid.image_h") : 800;
    PyramidSpec spec;
    if (obj.contains("levels")) {
        if (obj.contains("preset")) throw ValidationError("pyramid: give either preset or levels, not both");
        spec.image_w = w;
        spec.image_h = h;
        const json& levels = obj["levels"];
        if (!levels.is_array()) throw ValidationError("pyramid.levels: expected an array");
        for (std::size_t i = 0; i < levels.size(); ++i) {
            const std::string at = "pyramid.levels[" + std::to_string(i) + "]";
            expect_keys(levels[i], at, {"stride", "erf_radius", "conv_stack"});
            if (!levels[i].contains("stride")) throw ValidationError(at + ": missing stride");
            const bool has_radius = levels[i].contains("erf_radius");
            if (has_radius == levels[i].contains("conv_stack"))
                throw ValidationError(at + ": give exactly one of erf_radius or conv_stack");
            PyramidLevelSpec level;
            level.stride = extent(levels[i]["stride"], at + ".stride");
            if (has_radius) {
                level.erf_source = ExplicitRadius{number(levels[i]["erf_radius"], at + ".erf_radius")};
            } else {
                level.erf_source = parse_conv_stack(levels[i]["conv_stack"], at + ".conv_stack");
            }
            spec.levels.push_back(std::move(level));
        }
    } else {
        const std::string preset = obj.contains("preset") ? text(obj["preset"], "pyramid.preset") : "resnet50_fpn";
        if (preset != "resnet50_fpn") throw ValidationError("pyramid.preset: unknown preset '" + preset + "'");
        spec = resnet50_fpn_preset(w, h);
    }
    if (obj.contains("center_offset")) spec.center_offset = number(obj["center_offset"], "pyramid.center_offset");
    validate(spec);
    return spec;
}

void parse_rfla(const json& obj, HlaConfig& cfg) {
    expect_keys(obj, "rfla", {"k", "beta", "metric"});
    if (obj.contains("k")) cfg.k = count(obj["k"], "rfla.k");
    if (obj.contains("beta")) cfg.beta = number(obj["beta"], "rfla.beta");
    if (obj.contains("metric")) cfg.metric = parse_metric(text(obj["metric"], "rfla.metric"));
    cfg.validate();
}

void parse_anchors(const json& obj, AnchorSpec& spec) {
    expect_keys(obj, "anchors", {"base_scale", "ratios"});
    if (obj.contains("base_scale")) spec.base_scale = number(obj["base_scale"], "anchors.base_scale");
    if (obj.contains("ratios")) {
        if (!obj["ratios"].is_array()) throw ValidationError("anchors.ratios: expected an array");
        spec.ratios.clear();
        for (const json& r : obj["ratios"]) spec.ratios.push_back(number(r, "anchors.ratios"));
    }
    spec.validate();
}

void parse_maxiou(const json& obj, MaxIouConfig& cfg) {
    expect_keys(obj, "maxiou", {"pos_thr", "neg_thr", "low_quality_match"});
    if (obj.contains("pos_thr")) cfg.pos_thr = number(obj["pos_thr"], "maxiou.pos_thr");
    if (obj.contains("neg_thr")) cfg.neg_thr = number(obj["neg_thr"], "maxiou.neg_thr");
    if (obj.contains("low_quality_match")) {
        if (!obj["low_quality_match"].is_boolean()) throw ValidationError("maxiou.low_quality_match: expected a boolean");
        cfg.low_quality_match = obj["low_quality_match"].get<bool>();
    }
    cfg.validate();
}

ScaleRanges parse_center(const json& obj) {
    expect_keys(obj, "center", {"ranges"});
    ScaleRanges ranges;
    if (!obj.contains("ranges")) throw ValidationError("center: missing ranges");
    const json& arr = obj["ranges"];
    if (!arr.is_array()) throw ValidationError("center.ranges: expected an array");
    for (std::size_t i = 0; i < arr.size(); ++i) {
        const std::string at = "center.ranges[" + std::to_string(i) + "]";
        if (!arr[i].is_array() || arr[i].size() != 2) throw ValidationError(at + ": expected [lo, hi]");
        const double lo = number(arr[i][0], at);
        const double hi = arr[i][1].is_null() ? std::numeric_limits<double>::infinity() : number(arr[i][1], at);
        ranges.per_level.emplace_back(lo, hi);
    }
    return ranges;
}

void parse_trial(const json& obj, TrialConfig& cfg, bool& image_given) {
    expect_keys(obj, "trial",
                {"seed", "n_trials", "scale_lo", "scale_hi", "n_intervals", "aspect", "image_w", "image_h",
                 "gts_per_image", "workers"});
    if (obj.contains("seed")) {
        if (!obj["seed"].is_number_unsigned()) throw ValidationError("trial.seed: expected a non-negative integer");
        cfg.seed = obj["seed"].get<std::uint64_t>();
    }
    if (obj.contains("n_trials")) cfg.n_trials = count(obj["n_trials"], "trial.n_trials");
    if (obj.contains("scale_lo")) cfg.scale_lo = number(obj["scale_lo"], "trial.scale_lo");
    if (obj.contains("scale_hi")) cfg.scale_hi = number(obj["scale_hi"], "trial.scale_hi");
    if (obj.contains("n_intervals")) cfg.n_intervals = count(obj["n_intervals"], "trial.n_intervals");
    if (obj.contains("gts_per_image")) cfg.gts_per_image = count(obj["gts_per_image"], "trial.gts_per_image");
    if (obj.contains("workers")) {
        const std::size_t w = count(obj["workers"], "trial.workers");
        if (w < 1 || w > 1024) throw ValidationError("trial.workers: must lie in [1, 1024]");
        cfg.workers = static_cast<unsigned>(w);
    }
    if (obj.contains("image_w") || obj.contains("image_h")) {
        if (!obj.contains("image_w") || !obj.contains("image_h"))
            throw ValidationError("trial: give both image_w and image_h");
        cfg.image_w = extent(obj["image_w"], "trial.image_w");
        cfg.image_h = extent(obj["image_h"], "trial.image_h");
        image_given = true;
    }
    if (obj.contains("aspect")) {
        const json& a = obj["aspect"];
        if (a.is_string()) {
            if (a.get<std::string>() != "square") throw ValidationError("trial.aspect: expected \"square\" or {\"jitter\": [lo, hi]}");
            cfg.aspect = AspectSpec{};
        } else {
            expect_keys(a, "trial.aspect", {"jitter"});
            const json& j = a.contains("jitter") ? a["jitter"] : json();
            if (!j.is_array() || j.size() != 2) throw ValidationError("trial.aspect.jitter: expected [lo, hi]");
            cfg.aspect = AspectSpec{AspectMode::Jitter, number(j[0], "trial.aspect.jitter"), number(j[1], "trial.aspect.jitter")};
        }
    }
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

}  // namespace

RunConfig default_config() {
    RunConfig cfg;
    cfg.setup.pyramid = resnet50_fpn_preset(800, 800);
    cfg.trial.image_w = cfg.setup.pyramid.image_w;
    cfg.trial.image_h = cfg.setup.pyramid.image_h;
    return cfg;
}

RunConfig parse_config(std::string_view json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ValidationError(std::string("config is not valid JSON: ") + e.what());
    }
    expect_keys(doc, "config", {"pyramid", "assigner", "assigners", "rfla", "anchors", "maxiou", "center", "trial"});

    RunConfig cfg = default_config();
    if (doc.contains("pyramid")) cfg.setup.pyramid = parse_pyramid(doc["pyramid"]);
    if (doc.contains("assigner")) cfg.assigner = parse_assigner(text(doc["assigner"], "assigner"));
    if (doc.contains("assigners")) {
        const json& arr = doc["assigners"];
        if (!arr.is_array() || arr.empty()) throw ValidationError("assigners: expected a non-empty array");
        cfg.assigners.clear();
        for (const json& a : arr) cfg.assigners.push_back(parse_assigner(text(a, "assigners")));
    }
    if (doc.contains("rfla")) parse_rfla(doc["rfla"], cfg.setup.hla);
    if (doc.contains("anchors")) parse_anchors(doc["anchors"], cfg.setup.anchors);
    if (doc.contains("maxiou")) parse_maxiou(doc["maxiou"], cfg.setup.maxiou);
    if (doc.contains("center")) {
        cfg.setup.ranges = parse_center(doc["center"]);
        cfg.setup.ranges->validate(cfg.setup.pyramid.levels.size());
    }
    bool image_given = false;
    if (doc.contains("trial")) parse_trial(doc["trial"], cfg.trial, image_given);
    if (!image_given) {
        cfg.trial.image_w = cfg.setup.pyramid.image_w;
        cfg.trial.image_h = cfg.setup.pyramid.image_h;
    }
    cfg.trial.validate();
    return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
    try {
        return parse_config(read_file(path));
    } catch (const ValidationError& e) {
        throw ValidationError(path.string() + ": " + e.what());
    }
}

std::vector<BBox> parse_gts_csv(std::string_view text) {
    std::vector<BBox> out;
    std::size_t line_no = 0;
    bool header_seen = false;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t end = text.find('\n', pos);
        if (end == std::string_view::npos) end = text.size();
        std::string_view line = text.substr(pos, end - pos);
        pos = end + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.empty()) {
            if (pos > text.size()) break;
            continue;
        }
        if (!header_seen) {
            if (line != "cx,cy,w,h") throw ValidationError("gts: line 1: expected header 'cx,cy,w,h'");
            header_seen = true;
            continue;
        }
        const std::string where = "gts: row " + std::to_string(out.size() + 1) + " (line " + std::to_string(line_no) + ")";
        double v[4];
        std::size_t field = 0;
        std::size_t start = 0;
        while (true) {
            const std::size_t comma = line.find(',', start);
            const std::string_view token = line.substr(start, comma == std::string_view::npos ? line.size() - start : comma - start);
            if (field >= 4) throw ValidationError(where + ": expected 4 fields");
            const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v[field]);
            if (ec != std::errc() || ptr != token.data() + token.size() || token.empty())
                throw ValidationError(where + ": '" + std::string(token) + "' is not a number");
            ++field;
            if (comma == std::string_view::npos) break;
            start = comma + 1;
        }
        if (field != 4) throw ValidationError(where + ": expected 4 fields");
        try {
            out.emplace_back(v[0], v[1], v[2], v[3]);
        } catch (const ValidationError& e) {
            throw ValidationError(where + ": " + e.what());
        }
        if (pos > text.size()) break;
    }
    if (!header_seen) throw ValidationError("gts: missing header 'cx,cy,w,h'");
    return out;
}

std::vector<BBox> load_gts(const std::filesystem::path& path) { return parse_gts_csv(read_file(path)); }

}  // namespace rfla::cli
