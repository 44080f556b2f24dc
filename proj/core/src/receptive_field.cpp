#include "rfla/receptive_field.hpp"

#include <cmath>
#include <string>

namespace rfla {

std::vector<double> trf(std::span<const ConvLayerSpec> stack) {
    if (stack.empty()) throw ValidationError("receptive field needs at least one layer");
    std::vector<double> out;
    out.reserve(stack.size());
    double field = 1.0;
    double jump = 1.0;  // product of strides of the preceding layers
    for (const ConvLayerSpec& layer : stack) {
        if (layer.kernel < 1 || layer.stride < 1)
            throw ValidationError("conv kernel and stride must be >= 1");
        field += (layer.kernel - 1) * jump;
        jump *= layer.stride;
        out.push_back(field);
    }
    return out;
}

double erf_radius(double trf_final) {
    if (!(trf_final >= 1.0)) throw ValidationError("TRF must be >= 1");
    return trf_final / 2.0;
}

Gaussian2D erf_gaussian(const FeaturePoint& p) {
    const double var = p.er * p.er;
    return Gaussian2D(p.px, p.py, var, var);
}

double level_erf_radius(const PyramidLevelSpec& level) {
    if (const auto* stack = std::get_if<ConvStack>(&level.erf_source)) {
        return erf_radius(trf(*stack).back());
    }
    return std::get<ExplicitRadius>(level.erf_source).er;
}

void validate(const PyramidSpec& spec) {
    if (spec.image_w <= 0 || spec.image_h <= 0) throw ValidationError("image extent must be positive");
    if (spec.levels.empty()) throw ValidationError("pyramid needs at least one level");
    if (!(spec.center_offset >= 0.0 && spec.center_offset < 1.0))
        throw ValidationError("center offset must lie in [0, 1)");
    int prev_stride = 0;
    for (std::size_t i = 0; i < spec.levels.size(); ++i) {
        const PyramidLevelSpec& level = spec.levels[i];
        const std::string where = "pyramid level " + std::to_string(i) + ": ";
        if (level.stride < 1) throw ValidationError(where + "stride must be >= 1");
        if (level.stride <= prev_stride)
            throw ValidationError(where + "strides must be strictly increasing");
        prev_stride = level.stride;
        if (const auto* stack = std::get_if<ConvStack>(&level.erf_source)) {
            if (stack->empty()) throw ValidationError(where + "empty conv stack");
            long long product = 1;
            for (const ConvLayerSpec& layer : *stack) {
                if (layer.kernel < 1 || layer.stride < 1)
                    throw ValidationError(where + "conv kernel and stride must be >= 1");
                product *= layer.stride;
            }
            if (product != level.stride)
                throw ValidationError(where + "conv stack strides multiply to " + std::to_string(product) +
                                      ", expected " + std::to_string(level.stride));
        } else {
            const double er = std::get<ExplicitRadius>(level.erf_source).er;
            if (!(er > 0.0) || !std::isfinite(er)) throw ValidationError(where + "ERF radius must be positive");
        }
    }
}

GridExtent grid_extent(const PyramidSpec& spec, std::size_t level) {
    const int stride = spec.levels.at(level).stride;
    return {spec.image_w / stride, spec.image_h / stride};
}

std::vector<FeaturePoint> build_grid(const PyramidSpec& spec) {
    validate(spec);
    std::size_t total = 0;
    for (std::size_t l = 0; l < spec.levels.size(); ++l) {
        const GridExtent e = grid_extent(spec, l);
        total += static_cast<std::size_t>(e.cols) * static_cast<std::size_t>(e.rows);
    }
    std::vector<FeaturePoint> points;
    points.reserve(total);
    for (std::size_t l = 0; l < spec.levels.size(); ++l) {
        const double stride = spec.levels[l].stride;
        const double er = level_erf_radius(spec.levels[l]);
        const GridExtent e = grid_extent(spec, l);
        for (int j = 0; j < e.rows; ++j) {
            for (int i = 0; i < e.cols; ++i) {
                points.push_back(FeaturePoint{l, (i + spec.center_offset) * stride,
                                              (j + spec.center_offset) * stride, er, points.size()});
            }
        }
    }
    return points;
}

namespace {

void append_bottleneck(ConvStack& s, int stride) { s.insert(s.end(), {{1, 1}, {3, stride}, {1, 1}}); }

void append_stage(ConvStack& s, int blocks, int first_stride) {
    append_bottleneck(s, first_stride);
    for (int b = 1; b < blocks; ++b) append_bottleneck(s, 1);
}

}  // namespace

PyramidSpec resnet50_fpn_preset(int image_w, int image_h) {
    ConvStack backbone{{7, 2}, {3, 2}};  // stem conv + max pool
    PyramidSpec spec{image_w, image_h, {}, 0.5};
    const int blocks[] = {3, 4, 6, 3};
    for (int stage = 0; stage < 4; ++stage) {
        append_stage(backbone, blocks[stage], stage == 0 ? 1 : 2);
        ConvStack level = backbone;
        level.push_back({3, 1});  // FPN output conv
        spec.levels.push_back({4 << stage, level});
    }
    ConvStack p6 = std::get<ConvStack>(spec.levels.back().erf_source);
    p6.push_back({3, 2});
    spec.levels.push_back({64, p6});
    return spec;
}

PyramidSpec explicit_pyramid(int image_w, int image_h, std::span<const int> strides,
                             std::span<const double> radii) {
    if (strides.size() != radii.size()) throw ValidationError("one ERF radius per stride required");
    PyramidSpec spec{image_w, image_h, {}, 0.5};
    for (std::size_t i = 0; i < strides.size(); ++i) spec.levels.push_back({strides[i], ExplicitRadius{radii[i]}});
    validate(spec);
    return spec;
}

}  // namespace rfla
