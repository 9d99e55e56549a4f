#include "fastusct/beamform.hpp"

#include <atomic>
#include <cmath>
#include <complex>
#include <cstddef>
#include <thread>

#include "fastusct/errors.hpp"
#include "fastusct/fft.hpp"

namespace fastusct {

ReconImage das_reconstruct(const std::vector<RfFrame>& frames,
                           const RingArrayGeometry& geometry,
                           const ReconRegion& region, double sound_speed,
                           double sampling_rate, int n_threads,
                           DasStats* stats, bool interpolate) {
  if (region.nx <= 0 || region.ny <= 0 || region.width <= 0.0 ||
      region.height <= 0.0)
    throw ConfigError("reconstruction region is degenerate");
  const Vec2 corners[4] = {
      region.origin,
      region.origin + Vec2{region.width, 0.0},
      region.origin + Vec2{0.0, region.height},
      region.origin + Vec2{region.width, region.height}};
  for (const Vec2& corner : corners)
    if (norm(corner - geometry.center) > geometry.radius_mm)
      throw BoundsError("reconstruction region leaves the ring aperture");

  const double c = sound_speed * 1e-3;  // m/s -> mm/us
  if (!(c > 0.0)) throw ConfigError("sound speed must be positive");
  if (!(sampling_rate > 0.0))
    throw ConfigError("sampling rate must be positive");

  const int n_px = region.nx * region.ny;
  ReconImage image(region);
  if (frames.empty()) return image;

  for (const RfFrame& f : frames) {
    if (f.tx_set.size() != 1)
      throw InputError("beamforming needs single-tx frames with identities");
    if (f.tx_set[0] < 0 || f.tx_set[0] >= geometry.n_transmitters)
      throw BoundsError("frame transmitter index out of range");
    if (f.n_receivers != geometry.n_receivers)
      throw ShapeError("frame receiver count does not match the geometry");
    if (std::fabs(f.sampling_rate - sampling_rate) > 1e-9)
      throw ConfigError("frame sampling rate disagrees with the argument");
  }

  // One-way delay in samples from each ring element to each pixel;
  // transmitters reuse their receiver-element rows.
  std::vector<double> delay(
      static_cast<std::size_t>(geometry.n_receivers) * n_px);
  for (int e = 0; e < geometry.n_receivers; ++e) {
    double* row = delay.data() + static_cast<std::size_t>(e) * n_px;
    for (int iy = 0; iy < region.ny; ++iy) {
      for (int ix = 0; ix < region.nx; ++ix) {
        const Vec2 px = region.pixel_center(ix, iy);
        row[iy * region.nx + ix] =
            sampling_rate * norm(geometry.receiver_positions[e] - px) / c;
      }
    }
  }

  std::vector<std::complex<double>> field(n_px, {0.0, 0.0});
  std::atomic<std::int64_t> total_skipped{0};
  std::atomic<std::int64_t> total_added{0};

  std::vector<double> trace(frames[0].n_samples);
  for (const RfFrame& f : frames) {
    const double* tx_row =
        delay.data() +
        static_cast<std::size_t>(geometry.tx_element(f.tx_set[0])) * n_px;
    for (int r = 0; r < f.n_receivers; ++r) {
      for (int t = 0; t < f.n_samples; ++t) trace[t] = f.at(r, t);
      const std::vector<std::complex<double>> analytic =
          analytic_signal(trace.data(), f.n_samples);
      const double* rx_row = delay.data() + static_cast<std::size_t>(r) * n_px;

      const auto run_rows = [&](int y0, int y1) {
        std::int64_t skipped = 0, added = 0;
        for (int iy = y0; iy < y1; ++iy) {
          for (int ix = 0; ix < region.nx; ++ix) {
            const int p = iy * region.nx + ix;
            const double d = tx_row[p] + rx_row[p];
            if (interpolate) {
              const double k = std::floor(d);
              const long i0 = static_cast<long>(k);
              if (i0 < 0 || i0 + 1 >= f.n_samples) {
                ++skipped;
                continue;
              }
              const double frac = d - k;
              field[p] += (1.0 - frac) * analytic[i0] + frac * analytic[i0 + 1];
            } else {
              const long idx = std::lround(d);
              if (idx < 0 || idx >= f.n_samples) {
                ++skipped;
                continue;
              }
              field[p] += analytic[idx];
            }
            ++added;
          }
        }
        total_skipped += skipped;
        total_added += added;
      };

      if (n_threads <= 1) {
        run_rows(0, region.ny);
      } else {
        std::vector<std::thread> pool;
        const int rows_per = (region.ny + n_threads - 1) / n_threads;
        for (int t = 0; t < n_threads; ++t) {
          const int y0 = t * rows_per;
          const int y1 = std::min(region.ny, y0 + rows_per);
          if (y0 >= y1) break;
          pool.emplace_back(run_rows, y0, y1);
        }
        for (std::thread& th : pool) th.join();
      }
    }
  }

  for (int p = 0; p < n_px; ++p)
    image.intensity[p] = static_cast<float>(std::abs(field[p]));
  if (stats) {
    stats->contributions = total_added.load();
    stats->skipped = total_skipped.load();
  }
  return image;
}

}  // namespace fastusct
