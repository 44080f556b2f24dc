#include "rfla/distances.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <thread>


namespace rfla {

MetricKind parse_metric(std::string_view name) {
    if (name == "kld") return MetricKind::KLD;
    if (name == "wd") return MetricKind::Wasserstein;
    if (name == "giou") return MetricKind::GIoU;
    throw ValidationError("unknown metric '" + std::string(name) + "' (expected kld, wd or giou)");
}

std::string_view metric_name(MetricKind m) noexcept {
    switch (m) {
        case MetricKind::KLD: return "kld";
        case MetricKind::Wasserstein: return "wd";
        case MetricKind::GIoU: return "giou";
    }
    return "?";
}

Gaussian2D gt_gaussian(const BBox& b) { return Gaussian2D(b.cx(), b.cy(), b.w() * b.w() / 4.0, b.h() * b.h() / 4.0); }

BBox gaussian_box(const Gaussian2D& g) {
    return BBox(g.mu_x(), g.mu_y(), 2.0 * std::sqrt(g.var_x()), 2.0 * std::sqrt(g.var_y()));
}

double wasserstein2_sq(const Gaussian2D& a, const Gaussian2D& b) noexcept {
    const double dx = a.mu_x() - b.mu_x();
    const double dy = a.mu_y() - b.mu_y();
    const double sx = std::sqrt(a.var_x()) - std::sqrt(b.var_x());
    const double sy = std::sqrt(a.var_y()) - std::sqrt(b.var_y());
    return dx * dx + dy * dy + sx * sx + sy * sy;
}

double kld(const Gaussian2D& prior, const Gaussian2D& gt) noexcept {
    const double inv_x = 1.0 / gt.var_x();
    const double inv_y = 1.0 / gt.var_y();
    const double dx = prior.mu_x() - gt.mu_x();
    const double dy = prior.mu_y() - gt.mu_y();
    const double trace = prior.var_x() * inv_x + prior.var_y() * inv_y;
    const double mahalanobis = dx * dx * inv_x + dy * dy * inv_y;
    const double log_det_ratio = std::log(gt.var_x() * gt.var_y()) - std::log(prior.var_x() * prior.var_y());
    // Rounding can push an exact match a few ulps below zero.
    return std::max(0.0, 0.5 * (trace + mahalanobis + log_det_ratio - 2.0));
}

double giou_erf(const FeaturePoint& p, const BBox& b) {
    return giou(BBox(p.px, p.py, 2.0 * p.er, 2.0 * p.er), b);
}

double rfd(double distance) {
    if (!(distance >= 0.0)) throw ValidationError("RFD needs a non-negative distance");
    return 1.0 / (1.0 + distance);
}

double metric_distance(MetricKind metric, const Gaussian2D& prior, const Gaussian2D& gt) noexcept {
    switch (metric) {
        case MetricKind::KLD: return kld(prior, gt);
        case MetricKind::Wasserstein: return wasserstein2_sq(prior, gt);
        case MetricKind::GIoU: return 1.0 - giou(gaussian_box(prior), gaussian_box(gt));
    }
    return 0.0;
}

void PriorSet::push(double mx, double my, double vx, double vy) {
    const std::size_t r = mx_.size();
    mx_.push_back(mx);
    my_.push_back(my);
    vx_.push_back(vx);
    vy_.push_back(vy);
    // Grids repeat one spread for a whole level, so reuse the previous terms.
    if (r > 0 && vx == vx_[r - 1] && vy == vy_[r - 1]) {
        sx_.push_back(sx_[r - 1]);
        sy_.push_back(sy_[r - 1]);
        log_det_.push_back(log_det_[r - 1]);
    } else {
        sx_.push_back(std::sqrt(vx));
        sy_.push_back(std::sqrt(vy));
        log_det_.push_back(std::log(vx * vy));
    }
}

PriorSet::PriorSet(std::span<const Gaussian2D> priors) {
    for (const Gaussian2D& g : priors) push(g.mu_x(), g.mu_y(), g.var_x(), g.var_y());
}

PriorSet::PriorSet(std::span<const FeaturePoint> points, double radius_scale) {
    if (!(radius_scale > 0.0) || !std::isfinite(radius_scale)) throw ValidationError("radius scale must be positive");
    for (const FeaturePoint& p : points) {
        const double er = p.er * radius_scale;
        const Gaussian2D g(p.px, p.py, er * er, er * er);  // validates
        push(g.mu_x(), g.mu_y(), g.var_x(), g.var_y());
    }
}

ScoreMatrix score_matrix(const PriorSet& p, std::span<const BBox> gts, MetricKind metric, unsigned workers) {
    const std::size_t rows = p.size();
    ScoreMatrix out(rows, gts.size());
    if (rows == 0 || gts.empty()) return out;
    std::vector<Gaussian2D> targets;
    targets.reserve(gts.size());
    for (const BBox& b : gts) targets.push_back(gt_gaussian(b));

    // Each kernel repeats the arithmetic of its scalar counterpart exactly.
    auto column = [&](const Gaussian2D& gt, std::size_t col, std::size_t lo, std::size_t hi) {
        const double gx = gt.mu_x(), gy = gt.mu_y(), gvx = gt.var_x(), gvy = gt.var_y();
        switch (metric) {
            case MetricKind::KLD: {
                const double inv_x = 1.0 / gvx;
                const double inv_y = 1.0 / gvy;
                const double g_log_det = std::log(gvx * gvy);
                for (std::size_t r = lo; r < hi; ++r) {
                    const double dx = p.mx_[r] - gx;
                    const double dy = p.my_[r] - gy;
                    const double trace = p.vx_[r] * inv_x + p.vy_[r] * inv_y;
                    const double mahalanobis = dx * dx * inv_x + dy * dy * inv_y;
                    const double d = std::max(0.0, 0.5 * (trace + mahalanobis + (g_log_det - p.log_det_[r]) - 2.0));
                    out(r, col) = 1.0 / (1.0 + d);
                }
                break;
            }
            case MetricKind::Wasserstein: {
                const double gsx = std::sqrt(gvx), gsy = std::sqrt(gvy);
                for (std::size_t r = lo; r < hi; ++r) {
                    const double dx = p.mx_[r] - gx;
                    const double dy = p.my_[r] - gy;
                    const double sx = p.sx_[r] - gsx;
                    const double sy = p.sy_[r] - gsy;
                    out(r, col) = 1.0 / (1.0 + (dx * dx + dy * dy + sx * sx + sy * sy));
                }
                break;
            }
            case MetricKind::GIoU: {
                const BBox gt_box = gaussian_box(gt);
                for (std::size_t r = lo; r < hi; ++r) {
                    const BBox prior_box(p.mx_[r], p.my_[r], 2.0 * p.sx_[r], 2.0 * p.sy_[r]);
                    out(r, col) = 1.0 / (1.0 + (1.0 - giou(prior_box, gt_box)));
                }
                break;
            }
        }
    };
    auto run = [&](std::size_t lo, std::size_t hi) {
        for (std::size_t c = 0; c < targets.size(); ++c) column(targets[c], c, lo, hi);
    };

    workers = std::clamp<unsigned>(workers, 1, static_cast<unsigned>(std::min<std::size_t>(rows, 64)));
    if (workers == 1) {
        run(0, rows);
        return out;
    }
    {
        std::vector<std::jthread> pool;
        const std::size_t chunk = (rows + workers - 1) / workers;
        for (std::size_t lo = 0; lo < rows; lo += chunk) pool.emplace_back(run, lo, std::min(rows, lo + chunk));
    }
    return out;
}

ScoreMatrix score_matrix(std::span<const Gaussian2D> priors, std::span<const BBox> gts, MetricKind metric,
                         unsigned workers) {
    return score_matrix(PriorSet(priors), gts, metric, workers);
}

ScoreMatrix score_matrix(std::span<const FeaturePoint> points, std::span<const BBox> gts, MetricKind metric,
                         double radius_scale, unsigned workers) {
    return score_matrix(PriorSet(points, radius_scale), gts, metric, workers);
}

}  // namespace rfla
