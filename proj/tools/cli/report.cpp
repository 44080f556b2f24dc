#include "report.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>

namespace rfla::cli {

namespace {

std::string fixed(double v, int precision) {
    std::array<char, 64> buf{};
    const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v, std::chars_format::fixed, precision);
    return std::string(buf.data(), res.ptr);
}

void append_row(std::string& out, std::initializer_list<std::string> fields) {
    bool first = true;
    for (const std::string& f : fields) {
        if (!first) out += ',';
        out += f;
        first = false;
    }
    out += '\n';
}

std::string xml_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

constexpr std::array<const char*, 6> kPalette{"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b"};

}  // namespace

std::string format_double(double v) {
    std::array<char, 64> buf{};
    const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v, std::chars_format::general, 17);
    return std::string(buf.data(), res.ptr);
}

std::string labels_csv(std::span<const PriorRow> priors, const AssignmentResult& result) {
    std::string out = "flat_id,level,px,py,er,label,gt_index,stage,score\n";
    for (std::size_t i = 0; i < priors.size(); ++i) {
        const PriorRow& p = priors[i];
        const Label& l = result.labels.at(i);
        append_row(out, {std::to_string(p.flat_id), std::to_string(p.level), format_double(p.px), format_double(p.py),
                         format_double(p.er), l.is_positive() ? "positive" : "background",
                         std::to_string(l.gt_index), std::to_string(l.stage), format_double(l.score)});
    }
    return out;
}

std::string histogram_csv(std::span<const NamedHistogram> histograms) {
    std::string out = "assigner,interval_lo,interval_hi,n_gts,mean_pos,std_pos\n";
    for (const auto& [name, hist] : histograms) {
        for (const IntervalStats& s : hist.intervals) {
            append_row(out, {name, format_double(s.scale_lo), format_double(s.scale_hi), std::to_string(s.n_gts),
                             format_double(s.mean_positives), format_double(s.stddev_positives)});
        }
    }
    return out;
}

std::string sweep_csv(std::span<const SweepRow> rows) {
    std::string out = "param,value,mean_pos_overall,min_interval_mean,max_interval_mean,imbalance\n";
    for (const SweepRow& r : rows) {
        const IntervalHistogram& h = r.histogram;
        append_row(out, {r.param, format_double(r.value), format_double(h.mean_overall()),
                         format_double(h.min_interval_mean()), format_double(h.max_interval_mean()),
                         format_double(h.imbalance())});
    }
    return out;
}

std::string histogram_svg(std::span<const NamedHistogram> histograms) {
    constexpr double width = 960.0, height = 480.0;
    constexpr double left = 60.0, right = 20.0, top = 40.0, bottom = 60.0;
    const double plot_w = width - left - right;
    const double plot_h = height - top - bottom;

    std::size_t n_bins = 0;
    double y_max = 0.0;
    for (const auto& [name, hist] : histograms) {
        n_bins = std::max(n_bins, hist.intervals.size());
        for (const IntervalStats& s : hist.intervals) y_max = std::max(y_max, s.mean_positives);
    }
    y_max = y_max > 0.0 ? std::ceil(y_max * 1.1) : 1.0;

    std::string out;
    out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"960\" height=\"480\" viewBox=\"0 0 960 480\" "
           "font-family=\"sans-serif\" font-size=\"11\">\n";
    out += "<rect width=\"960\" height=\"480\" fill=\"white\"/>\n";
    out += "<text x=\"480\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">Mean positives per gt by scale interval</text>\n";

    // Axes and y ticks.
    out += "<line x1=\"" + fixed(left, 1) + "\" y1=\"" + fixed(top + plot_h, 1) + "\" x2=\"" + fixed(left + plot_w, 1) +
           "\" y2=\"" + fixed(top + plot_h, 1) + "\" stroke=\"black\"/>\n";
    out += "<line x1=\"" + fixed(left, 1) + "\" y1=\"" + fixed(top, 1) + "\" x2=\"" + fixed(left, 1) + "\" y2=\"" +
           fixed(top + plot_h, 1) + "\" stroke=\"black\"/>\n";
    for (int t = 0; t <= 5; ++t) {
        const double v = y_max * t / 5.0;
        const double y = top + plot_h - plot_h * t / 5.0;
        out += "<text x=\"" + fixed(left - 6, 1) + "\" y=\"" + fixed(y + 4, 1) + "\" text-anchor=\"end\">" +
               fixed(v, 2) + "</text>\n";
    }

    const std::size_t n_series = histograms.size();
    if (n_bins > 0 && n_series > 0) {
        const double group_w = plot_w / static_cast<double>(n_bins);
        const double bar_w = group_w * 0.8 / static_cast<double>(n_series);
        for (std::size_t s = 0; s < n_series; ++s) {
            const auto& [name, hist] = histograms[s];
            const char* color = kPalette[s % kPalette.size()];
            for (std::size_t b = 0; b < hist.intervals.size(); ++b) {
                const double v = hist.intervals[b].mean_positives;
                const double bh = plot_h * v / y_max;
                const double x = left + group_w * b + group_w * 0.1 + bar_w * s;
                out += "<rect x=\"" + fixed(x, 2) + "\" y=\"" + fixed(top + plot_h - bh, 2) + "\" width=\"" +
                       fixed(bar_w, 2) + "\" height=\"" + fixed(bh, 2) + "\" fill=\"" + color + "\"><title>" +
                       xml_escape(name) + ": " + fixed(v, 3) + "</title></rect>\n";
            }
            const double ly = top + 14.0 * s;
            out += "<rect x=\"" + fixed(left + plot_w - 150, 1) + "\" y=\"" + fixed(ly, 1) +
                   "\" width=\"10\" height=\"10\" fill=\"" + color + "\"/>\n";
            out += "<text x=\"" + fixed(left + plot_w - 135, 1) + "\" y=\"" + fixed(ly + 9, 1) + "\">" +
                   xml_escape(name) + "</text>\n";
        }
        const auto& first = histograms.front().second.intervals;
        for (std::size_t b = 0; b < first.size(); ++b) {
            const double x = left + group_w * (b + 0.5);
            out += "<text x=\"" + fixed(x, 2) + "\" y=\"" + fixed(top + plot_h + 14, 1) + "\" text-anchor=\"middle\">" +
                   fixed(first[b].scale_hi, 0) + "</text>\n";
        }
    }
    out += "<text x=\"480\" y=\"" + fixed(height - 20, 1) + "\" text-anchor=\"middle\">interval upper edge (px)</text>\n";
    out += "</svg>\n";
    return out;
}

}  // namespace rfla::cli
