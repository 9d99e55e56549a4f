#pragma once
// Binary container for frames, images, media, models, and frame sets.
//
// Layout (all integers little-endian):
//   bytes 0..3   magic "USCT"
//   u16          format version (currently 1)
//   u8           payload kind
//   u8           ndim
//   u32 * ndim   dimensions
//   u32          metadata entry count
//   per entry:   u32 key length, key bytes, u32 value length, value bytes
//   f32 * prod(dims)  payload, row-major
//
// Round trips are bit-exact: payloads are stored as the same 32-bit floats
// held in memory. Writes go to a temp file renamed into place so partial
// writes never corrupt artifacts.

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "fastusct/frame.hpp"

namespace fastusct {

enum class PayloadKind : std::uint8_t {
  rf_frame = 1,
  medium = 2,
  intensity_image = 3,
  recon_image = 4,
  bmode_image = 5,
  model = 6,
  frame_set = 7,
};

struct Container {
  PayloadKind kind;
  std::vector<std::uint32_t> dims;
  std::map<std::string, std::string> meta;  // ordered so writes are canonical
  std::vector<float> data;
};

void save_container(const std::string& path, const Container& c);
// Throws BadMagicError / BadVersionError / TruncationError, each naming the
// offending detail (expected vs actual).
Container load_container(const std::string& path);

// Typed wrappers (metadata keys documented in container.cpp).
void save_frame(const std::string& path, const RfFrame& f);
RfFrame load_frame(const std::string& path);
void save_frame_set(const std::string& path, const std::vector<RfFrame>& frames);
std::vector<RfFrame> load_frame_set(const std::string& path);
void save_medium(const std::string& path, const MediumMap& m);
MediumMap load_medium(const std::string& path);
void save_recon(const std::string& path, const ReconImage& img);
ReconImage load_recon(const std::string& path);
void save_bmode(const std::string& path, const BModeImage& img);
BModeImage load_bmode(const std::string& path);

// Shared low-level encoding helpers (used by loaders and tests).
std::string format_tx_set(const std::vector<int>& tx);
std::vector<int> parse_tx_set(const std::string& s);

}  // namespace fastusct
