#include "fastusct/quality.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "fastusct/errors.hpp"

namespace fastusct {

DbGrid log_compress(const ReconImage& image) {
  DbGrid out;
  out.nx = image.region.nx;
  out.ny = image.region.ny;
  out.v.resize(image.intensity.size());
  float peak = 0.0f;
  for (float p : image.intensity) peak = std::max(peak, p);
  if (!(peak > 0.0f))
    throw DegenerateImageError("cannot log-compress an all-zero image");
  for (std::size_t i = 0; i < image.intensity.size(); ++i) {
    const double ratio = image.intensity[i] / peak;
    out.v[i] = ratio > 0.0 ? 20.0 * std::log10(ratio)
                           : -std::numeric_limits<double>::infinity();
  }
  return out;
}

DbGrid clip_db(const DbGrid& grid, double lo, double hi) {
  if (!(lo < hi)) throw ConfigError("clip range must satisfy lo < hi");
  DbGrid out = grid;
  for (double& v : out.v) {
    if (std::isinf(v) && v < 0.0)
      v = lo;
    else
      v = std::clamp(v, lo, hi);
  }
  return out;
}

DbGrid mean_filter_3x3(const DbGrid& grid) {
  if (grid.nx < 3 || grid.ny < 3)
    throw ShapeError("mean filter needs a grid of at least 3x3");
  DbGrid out = grid;
  for (int iy = 0; iy < grid.ny; ++iy) {
    for (int ix = 0; ix < grid.nx; ++ix) {
      double acc = 0.0;
      for (int dy = -1; dy <= 1; ++dy) {
        const int sy = std::clamp(iy + dy, 0, grid.ny - 1);
        for (int dx = -1; dx <= 1; ++dx) {
          const int sx = std::clamp(ix + dx, 0, grid.nx - 1);
          acc += grid.at(sx, sy);
        }
      }
      out.at(ix, iy) = acc / 9.0;
    }
  }
  return out;
}

BModeImage to_bmode(const DbGrid& grid, double lo, double hi,
                    const std::string& provenance) {
  BModeImage out(grid.nx, grid.ny);
  out.db_lo = lo;
  out.db_hi = hi;
  out.provenance = provenance;
  for (std::size_t i = 0; i < grid.v.size(); ++i)
    out.db[i] = static_cast<float>(std::clamp(grid.v[i], lo, hi));
  return out;
}

BModeImage postprocess_bmode(const ReconImage& image, double lo, double hi,
                             const std::string& provenance) {
  const DbGrid compressed = log_compress(image);
  const DbGrid clipped = clip_db(compressed, lo, hi);
  const DbGrid filtered = mean_filter_3x3(clipped);
  return to_bmode(filtered, lo, hi, provenance);
}

double mssim(const BModeImage& a, const BModeImage& b, int window) {
  if (a.nx != b.nx || a.ny != b.ny)
    throw ShapeError("MSSIM images disagree in shape");
  if (window < 1 || window % 2 == 0)
    throw ConfigError("MSSIM window must be odd and positive");
  if (window > a.nx || window > a.ny)
    throw ShapeError("MSSIM window larger than the image");

  const double span = a.db_hi - a.db_lo;
  const double c1 = (0.01 * span) * (0.01 * span);
  const double c2 = (0.03 * span) * (0.03 * span);
  const double wn = static_cast<double>(window) * window;

  double total = 0.0;
  long count = 0;
  for (int y0 = 0; y0 + window <= a.ny; ++y0) {
    for (int x0 = 0; x0 + window <= a.nx; ++x0) {
      double sa = 0.0, sb = 0.0, saa = 0.0, sbb = 0.0, sab = 0.0;
      for (int dy = 0; dy < window; ++dy) {
        for (int dx = 0; dx < window; ++dx) {
          const double va = a.at(x0 + dx, y0 + dy);
          const double vb = b.at(x0 + dx, y0 + dy);
          sa += va;
          sb += vb;
          saa += va * va;
          sbb += vb * vb;
          sab += va * vb;
        }
      }
      const double mu_a = sa / wn;
      const double mu_b = sb / wn;
      const double var_a = saa / wn - mu_a * mu_a;
      const double var_b = sbb / wn - mu_b * mu_b;
      const double cov = sab / wn - mu_a * mu_b;
      const double ssim = ((2.0 * mu_a * mu_b + c1) * (2.0 * cov + c2)) /
                          ((mu_a * mu_a + mu_b * mu_b + c1) *
                           (var_a + var_b + c2));
      total += ssim;
      ++count;
    }
  }
  return total / static_cast<double>(count);
}

PsnrResult psnr(const BModeImage& a, const BModeImage& b) {
  if (a.nx != b.nx || a.ny != b.ny)
    throw ShapeError("PSNR images disagree in shape");
  double mse = 0.0;
  for (std::size_t i = 0; i < a.db.size(); ++i) {
    const double d = static_cast<double>(a.db[i]) - b.db[i];
    mse += d * d;
  }
  mse /= static_cast<double>(a.db.size());
  PsnrResult out;
  if (mse == 0.0) {
    out.identical = true;
    return out;
  }
  const double span = a.db_hi - a.db_lo;
  out.db = 20.0 * std::log10(span / std::sqrt(mse));
  return out;
}

double rf_mse(const std::vector<RfFrame>& a, const std::vector<RfFrame>& b) {
  if (a.size() != b.size() || a.empty())
    throw ShapeError("RF MSE needs matching non-empty frame stacks");
  double acc = 0.0;
  std::size_t count = 0;
  for (std::size_t f = 0; f < a.size(); ++f) {
    if (a[f].n_receivers != b[f].n_receivers ||
        a[f].n_samples != b[f].n_samples)
      throw ShapeError("RF MSE frames disagree in shape");
    for (std::size_t i = 0; i < a[f].samples.size(); ++i) {
      const double d =
          static_cast<double>(a[f].samples[i]) - b[f].samples[i];
      acc += d * d;
    }
    count += a[f].samples.size();
  }
  return acc / static_cast<double>(count);
}

}  // namespace fastusct
