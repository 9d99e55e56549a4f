#include "fastusct/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "fastusct/errors.hpp"

namespace fastusct {
namespace {

bool has_suffix(const std::string& s, const char* suf) {
  const std::size_t n = std::strlen(suf);
  if (s.size() < n) return false;
  std::string tail = s.substr(s.size() - n);
  std::transform(tail.begin(), tail.end(), tail.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return tail == suf;
}

GrayImage load_pgm(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open " + path);
  std::string magic;
  f >> magic;
  if (magic != "P5" && magic != "P2")
    throw BadMagicError(path + ": not a PGM file (magic " + magic + ")");
  auto next_token = [&]() -> long {
    // Skips whitespace and '#' comments.
    while (true) {
      int c = f.peek();
      if (c == '#') {
        std::string line;
        std::getline(f, line);
      } else if (std::isspace(c)) {
        f.get();
      } else {
        break;
      }
    }
    long v;
    f >> v;
    if (!f) throw TruncationError(path + ": truncated PGM header");
    return v;
  };
  const long w = next_token(), h = next_token(), maxval = next_token();
  if (w <= 0 || h <= 0 || maxval <= 0 || maxval > 65535)
    throw IoError(path + ": bad PGM header");
  GrayImage img;
  img.width = static_cast<int>(w);
  img.height = static_cast<int>(h);
  img.pixels.resize(static_cast<std::size_t>(w) * h);
  const float scale = 1.0f / static_cast<float>(maxval);
  if (magic == "P5") {
    f.get();  // single whitespace after maxval
    const int bytes = maxval > 255 ? 2 : 1;
    std::vector<unsigned char> raw(static_cast<std::size_t>(w) * h * bytes);
    f.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (f.gcount() != static_cast<std::streamsize>(raw.size()))
      throw TruncationError(path + ": PGM payload truncated, expected " +
                            std::to_string(raw.size()) + " bytes got " +
                            std::to_string(f.gcount()));
    for (std::size_t i = 0; i < img.pixels.size(); ++i) {
      const unsigned v = bytes == 1 ? raw[i] : unsigned(raw[2 * i]) << 8 | raw[2 * i + 1];
      img.pixels[i] = static_cast<float>(v) * scale;
    }
  } else {
    for (std::size_t i = 0; i < img.pixels.size(); ++i) {
      long v = next_token();
      img.pixels[i] = static_cast<float>(v) * scale;
    }
  }
  return img;
}

GrayImage load_png_file(const std::string& path) {
  FILE* fp = std::fopen(path.c_str(), "rb");
  if (!fp) throw IoError("cannot open " + path);
  png_byte header[8];
  if (std::fread(header, 1, 8, fp) != 8 || png_sig_cmp(header, 0, 8)) {
    std::fclose(fp);
    throw BadMagicError(path + ": not a PNG file");
  }
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png_create_info_struct(png);
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    std::fclose(fp);
    throw IoError(path + ": PNG decode failed");
  }
  png_init_io(png, fp);
  png_set_sig_bytes(png, 8);
  png_read_info(png, info);

  const png_uint_32 w = png_get_image_width(png, info);
  const png_uint_32 h = png_get_image_height(png, info);
  const int color = png_get_color_type(png, info);
  const int depth = png_get_bit_depth(png, info);

  if (depth == 16) png_set_strip_16(png);
  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  png_set_strip_alpha(png);
  png_read_update_info(png, info);

  const int channels = png_get_channels(png, info);
  std::vector<unsigned char> row(static_cast<std::size_t>(w) * channels);
  GrayImage img;
  img.width = static_cast<int>(w);
  img.height = static_cast<int>(h);
  img.pixels.resize(static_cast<std::size_t>(w) * h);
  for (png_uint_32 y = 0; y < h; ++y) {
    png_read_row(png, row.data(), nullptr);
    for (png_uint_32 x = 0; x < w; ++x) {
      float v;
      if (channels >= 3) {
        // Rec.601 luma.
        v = (0.299f * row[x * channels] + 0.587f * row[x * channels + 1] +
             0.114f * row[x * channels + 2]) / 255.0f;
      } else {
        v = row[x * channels] / 255.0f;
      }
      img.pixels[static_cast<std::size_t>(y) * w + x] = v;
    }
  }
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  std::fclose(fp);
  return img;
}

std::vector<unsigned char> quantize(const GrayImage& img) {
  std::vector<unsigned char> bytes(img.pixels.size());
  for (std::size_t i = 0; i < img.pixels.size(); ++i) {
    const float v = std::clamp(img.pixels[i], 0.0f, 1.0f);
    bytes[i] = static_cast<unsigned char>(std::lround(v * 255.0f));
  }
  return bytes;
}

}  // namespace

GrayImage load_gray(const std::string& path) {
  if (has_suffix(path, ".png")) return load_png_file(path);
  if (has_suffix(path, ".pgm")) return load_pgm(path);
  throw IoError(path + ": unsupported image extension (want .png or .pgm)");
}

void save_gray_pgm(const std::string& path, const GrayImage& img) {
  const auto bytes = quantize(img);
  const std::string tmp = path + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot open " + tmp);
    f << "P5\n" << img.width << " " << img.height << "\n255\n";
    f.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
    if (!f) throw IoError("write failed for " + tmp);
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("rename to " + path + " failed: " + ec.message());
}

void save_gray_png(const std::string& path, const GrayImage& img) {
  const auto bytes = quantize(img);
  const std::string tmp = path + ".tmp";
  FILE* fp = std::fopen(tmp.c_str(), "wb");
  if (!fp) throw IoError("cannot open " + tmp);
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png_create_info_struct(png);
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    std::fclose(fp);
    throw IoError(path + ": PNG encode failed");
  }
  png_init_io(png, fp);
  png_set_IHDR(png, info, img.width, img.height, 8, PNG_COLOR_TYPE_GRAY,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (int y = 0; y < img.height; ++y)
    png_write_row(png, const_cast<png_bytep>(bytes.data() + static_cast<std::size_t>(y) * img.width));
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  std::fclose(fp);
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("rename to " + path + " failed: " + ec.message());
}

GrayImage resize_bilinear(const GrayImage& img, int width, int height) {
  if (width <= 0 || height <= 0) throw ShapeError("resize target must be positive");
  GrayImage out;
  out.width = width;
  out.height = height;
  out.pixels.resize(static_cast<std::size_t>(width) * height);
  const double sx = static_cast<double>(img.width) / width;
  const double sy = static_cast<double>(img.height) / height;
  for (int y = 0; y < height; ++y) {
    const double fy = (y + 0.5) * sy - 0.5;
    const int y0 = std::clamp(static_cast<int>(std::floor(fy)), 0, img.height - 1);
    const int y1 = std::min(y0 + 1, img.height - 1);
    const double wy = std::clamp(fy - y0, 0.0, 1.0);
    for (int x = 0; x < width; ++x) {
      const double fx = (x + 0.5) * sx - 0.5;
      const int x0 = std::clamp(static_cast<int>(std::floor(fx)), 0, img.width - 1);
      const int x1 = std::min(x0 + 1, img.width - 1);
      const double wx = std::clamp(fx - x0, 0.0, 1.0);
      const double top = (1.0 - wx) * img.at(x0, y0) + wx * img.at(x1, y0);
      const double bot = (1.0 - wx) * img.at(x0, y1) + wx * img.at(x1, y1);
      out.pixels[static_cast<std::size_t>(y) * width + x] =
          static_cast<float>((1.0 - wy) * top + wy * bot);
    }
  }
  return out;
}

IntensityImage to_intensity(const GrayImage& img, int grid) {
  GrayImage r = (img.width == grid && img.height == grid)
                    ? img
                    : resize_bilinear(img, grid, grid);
  IntensityImage out(grid);
  for (std::size_t i = 0; i < out.pixels.size(); ++i)
    out.pixels[i] = std::clamp(r.pixels[i], 0.0f, 1.0f);
  return out;
}

GrayImage bmode_to_gray(const BModeImage& img) {
  GrayImage out;
  out.width = img.nx;
  out.height = img.ny;
  out.pixels.resize(img.db.size());
  const double span = img.db_hi - img.db_lo;
  for (std::size_t i = 0; i < img.db.size(); ++i)
    out.pixels[i] = static_cast<float>((img.db[i] - img.db_lo) / span);
  return out;
}

}  // namespace fastusct
