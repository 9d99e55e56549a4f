#pragma once
// Core value types shared across the pipeline.
//
// Grid convention (used by phantoms, the simulator, and reconstruction):
// node-centered. Grid node (i, j) of a G-sized axis sits at physical
// coordinate (i - G/2) * pitch, so node G/2 is exactly at the ring center
// and integer "grid positions" p in (-G/2, G/2) map to index p + G/2.
// Frames, images, and media hold 32-bit floats; the on-disk container stores
// the same bits, so round trips are exact.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace fastusct {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }

inline double norm(Vec2 a) {
  // hypot is slower but stable; magnitudes here are mm-scale so sqrt is fine.
  return std::sqrt(a.x * a.x + a.y * a.y);
}

// One acquisition: R receiver traces by T samples. t0 is always 0 (firing
// time); tx_set lists the transmitter indices that fired.
struct RfFrame {
  int n_receivers = 0;
  int n_samples = 0;
  double sampling_rate = 0.0;  // MHz (samples per microsecond)
  double t0 = 0.0;             // us
  std::vector<int> tx_set;
  std::vector<float> samples;  // row-major [receiver][sample]

  RfFrame() = default;
  RfFrame(int r, int t, double fs)
      : n_receivers(r), n_samples(t), sampling_rate(fs),
        samples(static_cast<std::size_t>(r) * t, 0.0f) {}

  float& at(int r, int t) { return samples[static_cast<std::size_t>(r) * n_samples + t]; }
  float at(int r, int t) const { return samples[static_cast<std::size_t>(r) * n_samples + t]; }
  const float* row(int r) const { return samples.data() + static_cast<std::size_t>(r) * n_samples; }
  float* row(int r) { return samples.data() + static_cast<std::size_t>(r) * n_samples; }
};

// Square grayscale image with values in [0, 1].
struct IntensityImage {
  int size = 0;  // G
  std::vector<float> pixels;

  IntensityImage() = default;
  explicit IntensityImage(int g, float fill = 0.0f)
      : size(g), pixels(static_cast<std::size_t>(g) * g, fill) {}

  float& at(int ix, int iy) { return pixels[static_cast<std::size_t>(iy) * size + ix]; }
  float at(int ix, int iy) const { return pixels[static_cast<std::size_t>(iy) * size + ix]; }
};

// Grid/physics context needed to instantiate a medium.
struct MediumSpec {
  int grid = 0;            // G
  double pitch_mm = 0.0;   // grid spacing
  double base_density = 0.0;   // d0, kg/m^3
  double sound_speed = 0.0;    // c, m/s (constant everywhere)
};

// The phantom: 2D density field on a G x G grid, constant sound speed.
struct MediumMap {
  int grid = 0;
  double pitch_mm = 0.0;
  double base_density = 0.0;
  double sound_speed = 0.0;
  std::vector<float> density;  // row-major [iy][ix], kg/m^3

  MediumMap() = default;
  explicit MediumMap(const MediumSpec& spec)
      : grid(spec.grid), pitch_mm(spec.pitch_mm),
        base_density(spec.base_density), sound_speed(spec.sound_speed),
        density(static_cast<std::size_t>(spec.grid) * spec.grid,
                static_cast<float>(spec.base_density)) {}

  float& at(int ix, int iy) { return density[static_cast<std::size_t>(iy) * grid + ix]; }
  float at(int ix, int iy) const { return density[static_cast<std::size_t>(iy) * grid + ix]; }
};

// Physical rectangle to reconstruct, sampled at nx * ny pixels. Pixel (ix, iy)
// is centered at origin + ((ix + 0.5) * width/nx, (iy + 0.5) * height/ny).
struct ReconRegion {
  Vec2 origin;       // mm, lower corner
  double width = 0;  // mm
  double height = 0; // mm
  int nx = 0;
  int ny = 0;

  double pitch_x() const { return width / nx; }
  double pitch_y() const { return height / ny; }
  Vec2 pixel_center(int ix, int iy) const {
    return {origin.x + (ix + 0.5) * pitch_x(), origin.y + (iy + 0.5) * pitch_y()};
  }
};

// Linear-amplitude reconstructed image (non-negative after envelope).
struct ReconImage {
  ReconRegion region;
  std::vector<float> intensity;  // row-major [iy][ix]

  ReconImage() = default;
  explicit ReconImage(const ReconRegion& r)
      : region(r), intensity(static_cast<std::size_t>(r.nx) * r.ny, 0.0f) {}

  float& at(int ix, int iy) { return intensity[static_cast<std::size_t>(iy) * region.nx + ix]; }
  float at(int ix, int iy) const { return intensity[static_cast<std::size_t>(iy) * region.nx + ix]; }
};

// Log-compressed, clipped, filtered B-mode image in dB.
struct BModeImage {
  int nx = 0;
  int ny = 0;
  double db_lo = -30.0;
  double db_hi = 0.0;
  std::vector<float> db;  // row-major [iy][ix], values in [db_lo, db_hi]
  std::string provenance; // where the underlying ReconImage came from

  BModeImage() = default;
  BModeImage(int w, int h) : nx(w), ny(h), db(static_cast<std::size_t>(w) * h, 0.0f) {}

  float& at(int ix, int iy) { return db[static_cast<std::size_t>(iy) * nx + ix]; }
  float at(int ix, int iy) const { return db[static_cast<std::size_t>(iy) * nx + ix]; }
};

}  // namespace fastusct
