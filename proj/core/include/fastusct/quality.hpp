#pragma once
// B-mode postprocessing (log compression, dB cutoff, 3x3 averaging) and the
// quality metrics: MSSIM on the clipped dB domain (uniform window, windows
// fully inside the image), PSNR with peak = the dB span, and raw RF MSE.

#include <vector>

#include "fastusct/frame.hpp"

namespace fastusct {

struct DbGrid {
  int nx = 0;
  int ny = 0;
  std::vector<double> v;  // row-major [iy][ix], dB; -inf allowed pre-clip

  double& at(int ix, int iy) { return v[static_cast<std::size_t>(iy) * nx + ix]; }
  double at(int ix, int iy) const { return v[static_cast<std::size_t>(iy) * nx + ix]; }
};

// 20*log10(pixel / max); zeros map to -inf. All-zero input throws
// DegenerateImageError.
DbGrid log_compress(const ReconImage& image);

// Elementwise clamp; -inf maps to lo.
DbGrid clip_db(const DbGrid& grid, double lo, double hi);

// 3x3 box average with edge replication; grid must be at least 3x3.
DbGrid mean_filter_3x3(const DbGrid& grid);

// Packs a clipped grid into a BModeImage (values clamped to [lo, hi]).
BModeImage to_bmode(const DbGrid& grid, double lo, double hi,
                    const std::string& provenance);

// log_compress -> clip_db(lo, hi) -> mean_filter_3x3, the paper's
// postprocessing order.
BModeImage postprocess_bmode(const ReconImage& image, double lo, double hi,
                             const std::string& provenance);

// Mean SSIM over all fully-inside window x window patches, uniform weights,
// C1 = (0.01 L)^2, C2 = (0.03 L)^2 with L = db_hi - db_lo.
double mssim(const BModeImage& a, const BModeImage& b, int window);

struct PsnrResult {
  bool identical = false;  // MSE was exactly zero
  double db = 0.0;         // valid when !identical
};

// 20*log10(L / sqrt(MSE)), L = dB span.
PsnrResult psnr(const BModeImage& a, const BModeImage& b);

// Mean squared difference over all samples of matching frame stacks.
double rf_mse(const std::vector<RfFrame>& a, const std::vector<RfFrame>& b);

}  // namespace fastusct
