#include "fastusct/phantom.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>

#include "fastusct/errors.hpp"
#include "fastusct/rng.hpp"

namespace fastusct {

namespace {

// Grid position p on one axis -> row-major pixel index offset.
inline int pos_to_index(int p, int grid) { return p + grid / 2; }

}  // namespace

MediumMap gen_scatterer_points(const MediumSpec& spec, std::uint64_t seed,
                               int count, GridRegion region,
                               double scatterer_density) {
  const int g = spec.grid;
  if (region.hi <= region.lo) throw BoundsError("scatterer region is empty");
  if (region.lo < -g / 2 || region.hi > g / 2)
    throw BoundsError("scatterer region extends outside the grid");
  const long long side = region.hi - region.lo;
  if (count < 0) throw BoundsError("negative scatterer count");
  if (static_cast<long long>(count) > side * side)
    throw CapacityError("more scatterers than region pixels");

  MediumMap m(spec);
  Rng rng(seed, "scatterer_points");
  std::vector<std::uint8_t> taken(static_cast<std::size_t>(side * side), 0);
  int placed = 0;
  while (placed < count) {
    const int px = static_cast<int>(rng.uniform_int(region.lo, region.hi - 1));
    const int py = static_cast<int>(rng.uniform_int(region.lo, region.hi - 1));
    const std::size_t slot = static_cast<std::size_t>(
        (py - region.lo) * side + (px - region.lo));
    if (taken[slot]) continue;
    taken[slot] = 1;
    const int ix = pos_to_index(px, g);
    const int iy = pos_to_index(py, g);
    m.density[static_cast<std::size_t>(iy) * g + ix] = scatterer_density;
    ++placed;
  }
  return m;
}

MediumMap gen_scatterer_clump(const MediumSpec& spec, std::uint64_t seed,
                              int patch, Vec2 circle_center_px,
                              double circle_radius_px, double a) {
  const int g = spec.grid;
  if (patch <= 0 || g % patch != 0)
    throw DivisibilityError("patch size must divide the grid size");

  Rng rng(seed, "scatterer_clump");
  const int blocks = g / patch;
  std::vector<double> block_intensity(
      static_cast<std::size_t>(blocks) * blocks);
  for (double& v : block_intensity) v = rng.uniform();

  MediumMap m(spec);
  for (int iy = 0; iy < g; ++iy) {
    for (int ix = 0; ix < g; ++ix) {
      const double eps = rng.normal();
      const double px = ix - g / 2;
      const double py = iy - g / 2;
      const double dx = px - circle_center_px.x;
      const double dy = py - circle_center_px.y;
      double intensity = 0.0;
      if (dx * dx + dy * dy <= circle_radius_px * circle_radius_px) {
        intensity = block_intensity[static_cast<std::size_t>(iy / patch) *
                                        blocks +
                                    ix / patch];
      }
      m.density[static_cast<std::size_t>(iy) * g + ix] =
          spec.base_density + a * eps * intensity;
    }
  }
  return m;
}

MediumMap image_to_density(const MediumSpec& spec, const IntensityImage& image,
                           double a, std::uint64_t seed,
                           const RingArrayGeometry& geometry) {
  const int g = spec.grid;
  if (image.size != g)
    throw ShapeError("intensity image size does not match the medium grid");

  Rng rng(seed, "image_to_density");
  const double r2 = geometry.radius_mm * geometry.radius_mm;
  MediumMap m(spec);
  for (int iy = 0; iy < g; ++iy) {
    for (int ix = 0; ix < g; ++ix) {
      const double eps = rng.normal();
      const double x_mm = (ix - g / 2) * spec.pitch_mm - geometry.center.x;
      const double y_mm = (iy - g / 2) * spec.pitch_mm - geometry.center.y;
      double intensity = 0.0;
      if (x_mm * x_mm + y_mm * y_mm <= r2) {
        intensity = image.pixels[static_cast<std::size_t>(iy) * g + ix];
      }
      m.density[static_cast<std::size_t>(iy) * g + ix] =
          spec.base_density + a * eps * intensity;
    }
  }
  return m;
}

IntensityImage sharpen(const IntensityImage& image) {
  const int g = image.size;
  IntensityImage out;
  out.size = g;
  out.pixels.resize(static_cast<std::size_t>(g) * g);
  const auto at = [&](int ix, int iy) {
    ix = std::clamp(ix, 0, g - 1);
    iy = std::clamp(iy, 0, g - 1);
    return image.pixels[static_cast<std::size_t>(iy) * g + ix];
  };
  for (int iy = 0; iy < g; ++iy) {
    for (int ix = 0; ix < g; ++ix) {
      double blur = 0.0;
      for (int dy = -2; dy <= 2; ++dy)
        for (int dx = -2; dx <= 2; ++dx) blur += at(ix + dx, iy + dy);
      blur /= 25.0;
      const double v = 2.0 * at(ix, iy) - blur;
      out.pixels[static_cast<std::size_t>(iy) * g + ix] =
          static_cast<float>(std::clamp(v, 0.0, 1.0));
    }
  }
  return out;
}

IntensityImage s_curve(const IntensityImage& image, double a, double x) {
  IntensityImage out;
  out.size = image.size;
  out.pixels.resize(image.pixels.size());
  double lo = 1e300;
  double hi = -1e300;
  std::vector<double> mapped(image.pixels.size());
  for (std::size_t i = 0; i < image.pixels.size(); ++i) {
    const double v = 1.0 / (1.0 + std::exp(a * (x - image.pixels[i])));
    mapped[i] = v;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  const double span = hi - lo;
  for (std::size_t i = 0; i < mapped.size(); ++i) {
    out.pixels[i] =
        span > 0.0 ? static_cast<float>((mapped[i] - lo) / span) : 0.0f;
  }
  return out;
}

std::vector<std::pair<int, int>> find_scatterers(const MediumMap& m) {
  std::vector<std::pair<int, int>> out;
  const int g = m.grid;
  for (int iy = 0; iy < g; ++iy) {
    for (int ix = 0; ix < g; ++ix) {
      if (m.density[static_cast<std::size_t>(iy) * g + ix] != m.base_density)
        out.emplace_back(ix - g / 2, iy - g / 2);
    }
  }
  return out;
}

}  // namespace fastusct
