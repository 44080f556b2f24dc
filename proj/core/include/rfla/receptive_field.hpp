#pragma once

// Theoretical / effective receptive fields of pyramid levels and the
// image-space feature point grid.

#include <span>
#include <variant>
#include <vector>

#include "rfla/geometry.hpp"

namespace rfla {

struct ConvLayerSpec {
    int kernel = 1;
    int stride = 1;
};

using ConvStack = std::vector<ConvLayerSpec>;

struct ExplicitRadius {
    double er = 0.0;
};

struct PyramidLevelSpec {
    int stride = 1;
    std::variant<ConvStack, ExplicitRadius> erf_source;
};

struct PyramidSpec {
    int image_w = 0;
    int image_h = 0;
    std::vector<PyramidLevelSpec> levels;
    /// Fraction of a stride between a cell's corner and its feature point.
    double center_offset = 0.5;
};

/// Receptive field after each layer of `stack`, starting from a single pixel.
std::vector<double> trf(std::span<const ConvLayerSpec> stack);

/// ERF radius is half the final TRF.
double erf_radius(double trf_final);

Gaussian2D erf_gaussian(const FeaturePoint& p);

/// Throws ValidationError if the spec breaks any structural invariant.
void validate(const PyramidSpec& spec);

/// ERF radius of one level, resolved from its conv stack or taken verbatim.
double level_erf_radius(const PyramidLevelSpec& level);

/// One point per grid cell that fits inside the image, row-major per level,
/// levels concatenated in order. flat_id is the global index.
std::vector<FeaturePoint> build_grid(const PyramidSpec& spec);

/// Number of grid cells along each axis for one level.
struct GridExtent {
    int cols = 0;
    int rows = 0;
};
GridExtent grid_extent(const PyramidSpec& spec, std::size_t level);

/// Approximate ResNet-50 + FPN layer stacks for strides 4, 8, 16, 32, 64
/// (P2..P6). Each level stacks the backbone layers up to the matching stage
/// plus the 3x3 FPN output conv; P6 adds a stride-2 3x3 conv on top of P5.
/// Lateral and top-down connections are ignored, so the radii are an
/// illustration rather than a measurement of any trained detector.
PyramidSpec resnet50_fpn_preset(int image_w, int image_h);

/// Same strides as the preset with every level's radius given explicitly.
PyramidSpec explicit_pyramid(int image_w, int image_h, std::span<const int> strides,
                             std::span<const double> radii);

}  // namespace rfla
