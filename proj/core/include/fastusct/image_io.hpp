#pragma once
// 8-bit grayscale image ingest/export (PGM and PNG) and the resize used to
// bring natural images to the simulation grid. RGB inputs collapse to
// luma with Rec.601 weights; pixel values rescale linearly to [0, 1].

#include <string>
#include <vector>

#include "fastusct/frame.hpp"

namespace fastusct {

struct GrayImage {
  int width = 0;
  int height = 0;
  std::vector<float> pixels;  // [0,1], row-major [y][x]

  float at(int x, int y) const { return pixels[static_cast<std::size_t>(y) * width + x]; }
};

// Reads PGM (P2/P5) or PNG by file extension; 16-bit inputs are scaled down.
GrayImage load_gray(const std::string& path);

// Writes 8-bit grayscale; values clamped to [0,1] then scaled to 0..255.
void save_gray_pgm(const std::string& path, const GrayImage& img);
void save_gray_png(const std::string& path, const GrayImage& img);

// Bilinear resample to an exact target size.
GrayImage resize_bilinear(const GrayImage& img, int width, int height);

// Square intensity image for the phantom pipeline.
IntensityImage to_intensity(const GrayImage& img, int grid);

// B-mode dB grid mapped linearly [db_lo, db_hi] -> [0, 255].
GrayImage bmode_to_gray(const BModeImage& img);

}  // namespace fastusct
