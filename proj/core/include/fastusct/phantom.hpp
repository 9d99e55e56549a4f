#pragma once
// Density-map generation for the four subject classes: scatterer points,
// scatterer clumps, natural-image conversions, and enhanced (sharpened +
// s-curve) inputs.
//
// Integer grid positions p map to grid index p + G/2 (node-centered, origin
// at the ring center). The density model is D(i,j) = d0 + a*eps(i,j)*I(i,j)
// with eps ~ N(0,1) drawn per pixel in row-major order from the given seed.

#include <cstdint>
#include <utility>
#include <vector>

#include "fastusct/frame.hpp"
#include "fastusct/geometry.hpp"

namespace fastusct {

// Half-open integer range [lo, hi) applied to both axes, in grid positions.
struct GridRegion {
  int lo = 0;
  int hi = 0;
};

// Background at d0, `count` distinct single pixels set to scatterer_density
// at positions drawn uniformly from the region; duplicate draws are redrawn.
MediumMap gen_scatterer_points(const MediumSpec& spec, std::uint64_t seed,
                               int count, GridRegion region,
                               double scatterer_density);

// Piecewise-constant Uniform(0,1) intensity on patch x patch blocks, zeroed
// outside the circle, then the density model applied with per-pixel eps.
MediumMap gen_scatterer_clump(const MediumSpec& spec, std::uint64_t seed,
                              int patch, Vec2 circle_center_px,
                              double circle_radius_px, double a);

// Intensity zeroed outside the ring aperture, then the density model.
// d0 comes from spec.base_density; image size must equal spec.grid.
MediumMap image_to_density(const MediumSpec& spec, const IntensityImage& image,
                           double a, std::uint64_t seed,
                           const RingArrayGeometry& geometry);

// I_S = clamp(2*I - blur5x5(I), 0, 1); blur replicates edges.
IntensityImage sharpen(const IntensityImage& image);

// Per-pixel logistic 1/(1 + exp(a*(x - I))), then min-max normalized to
// [0,1]. A constant input maps to the all-zero image.
IntensityImage s_curve(const IntensityImage& image, double a, double x);

// Grid positions of all pixels that differ from the base density
// (row-major order). Used by tests and the point-spread check.
std::vector<std::pair<int, int>> find_scatterers(const MediumMap& m);

}  // namespace fastusct
