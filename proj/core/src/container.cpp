#include "fastusct/container.hpp"

#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "fastusct/errors.hpp"

namespace fastusct {
namespace {

constexpr char kMagic[4] = {'U', 'S', 'C', 'T'};
constexpr std::uint16_t kVersion = 1;

// Round-trip exact decimal encoding for double metadata.
std::string fmt_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void put_u16(std::string& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>((v >> 8) & 0xff));
}

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_f32(std::string& out, float v) {
  std::uint32_t bits;
  std::memcpy(&bits, &v, 4);
  put_u32(out, bits);
}

struct Reader {
  const std::string& buf;
  std::size_t pos = 0;
  const std::string& path;

  void need(std::size_t n, const char* what) {
    if (pos + n > buf.size())
      throw TruncationError(path + ": truncated " + what + ", expected " +
                            std::to_string(pos + n) + " bytes but file has " +
                            std::to_string(buf.size()));
  }
  std::uint16_t u16(const char* what) {
    need(2, what);
    auto b = reinterpret_cast<const unsigned char*>(buf.data() + pos);
    pos += 2;
    return static_cast<std::uint16_t>(b[0] | (b[1] << 8));
  }
  std::uint32_t u32(const char* what) {
    need(4, what);
    auto b = reinterpret_cast<const unsigned char*>(buf.data() + pos);
    pos += 4;
    return b[0] | (b[1] << 8) | (b[2] << 16) | (std::uint32_t(b[3]) << 24);
  }
  std::uint8_t u8(const char* what) {
    need(1, what);
    return static_cast<std::uint8_t>(buf[pos++]);
  }
  std::string bytes(std::size_t n, const char* what) {
    need(n, what);
    std::string s = buf.substr(pos, n);
    pos += n;
    return s;
  }
  float f32(const char* what) {
    std::uint32_t bits = u32(what);
    float v;
    std::memcpy(&v, &bits, 4);
    return v;
  }
};

}  // namespace

void save_container(const std::string& path, const Container& c) {
  std::string out;
  out.append(kMagic, 4);
  put_u16(out, kVersion);
  out.push_back(static_cast<char>(c.kind));
  out.push_back(static_cast<char>(c.dims.size()));
  std::size_t count = 1;
  for (std::uint32_t d : c.dims) {
    put_u32(out, d);
    count *= d;
  }
  if (count != c.data.size())
    throw ShapeError("container data size " + std::to_string(c.data.size()) +
                     " does not match dims product " + std::to_string(count));
  put_u32(out, static_cast<std::uint32_t>(c.meta.size()));
  for (const auto& [k, v] : c.meta) {
    put_u32(out, static_cast<std::uint32_t>(k.size()));
    out += k;
    put_u32(out, static_cast<std::uint32_t>(v.size()));
    out += v;
  }
  out.reserve(out.size() + 4 * c.data.size());
  for (float v : c.data) put_f32(out, v);

  const std::string tmp = path + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot open " + tmp + " for writing");
    f.write(out.data(), static_cast<std::streamsize>(out.size()));
    if (!f) throw IoError("write failed for " + tmp);
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("rename " + tmp + " -> " + path + " failed: " + ec.message());
}

Container load_container(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  const std::string buf = ss.str();

  Reader r{buf, 0, path};
  const std::string magic = r.bytes(4, "magic");
  if (std::memcmp(magic.data(), kMagic, 4) != 0)
    throw BadMagicError(path + ": bad magic, expected \"USCT\"");
  const std::uint16_t version = r.u16("version");
  if (version != kVersion)
    throw BadVersionError(path + ": unsupported format version " +
                          std::to_string(version) + ", expected " +
                          std::to_string(kVersion));
  Container c;
  c.kind = static_cast<PayloadKind>(r.u8("kind"));
  const int ndim = r.u8("ndim");
  std::size_t count = 1;
  for (int i = 0; i < ndim; ++i) {
    c.dims.push_back(r.u32("dimension"));
    count *= c.dims.back();
  }
  const std::uint32_t n_meta = r.u32("metadata count");
  for (std::uint32_t i = 0; i < n_meta; ++i) {
    const std::uint32_t klen = r.u32("metadata key length");
    std::string k = r.bytes(klen, "metadata key");
    const std::uint32_t vlen = r.u32("metadata value length");
    c.meta[k] = r.bytes(vlen, "metadata value");
  }
  c.data.resize(count);
  for (std::size_t i = 0; i < count; ++i) c.data[i] = r.f32("payload");
  return c;
}

std::string format_tx_set(const std::vector<int>& tx) {
  std::string s;
  for (std::size_t i = 0; i < tx.size(); ++i) {
    if (i) s += ',';
    s += std::to_string(tx[i]);
  }
  return s;
}

std::vector<int> parse_tx_set(const std::string& s) {
  std::vector<int> out;
  std::istringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(std::stoi(item));
  }
  return out;
}

void save_frame(const std::string& path, const RfFrame& f) {
  Container c;
  c.kind = PayloadKind::rf_frame;
  c.dims = {static_cast<std::uint32_t>(f.n_receivers),
            static_cast<std::uint32_t>(f.n_samples)};
  c.meta["sampling_rate"] = fmt_double(f.sampling_rate);
  c.meta["t0"] = fmt_double(f.t0);
  c.meta["tx_set"] = format_tx_set(f.tx_set);
  c.data = f.samples;
  save_container(path, c);
}

RfFrame load_frame(const std::string& path) {
  Container c = load_container(path);
  if (c.kind != PayloadKind::rf_frame || c.dims.size() != 2)
    throw IoError(path + ": not an RF frame container");
  RfFrame f(static_cast<int>(c.dims[0]), static_cast<int>(c.dims[1]),
            std::stod(c.meta.at("sampling_rate")));
  f.t0 = std::stod(c.meta.at("t0"));
  f.tx_set = parse_tx_set(c.meta.at("tx_set"));
  f.samples = std::move(c.data);
  return f;
}

void save_frame_set(const std::string& path, const std::vector<RfFrame>& frames) {
  if (frames.empty()) throw InputError("cannot save an empty frame set");
  const int rows = frames[0].n_receivers, cols = frames[0].n_samples;
  Container c;
  c.kind = PayloadKind::frame_set;
  c.dims = {static_cast<std::uint32_t>(frames.size()),
            static_cast<std::uint32_t>(rows), static_cast<std::uint32_t>(cols)};
  c.meta["sampling_rate"] = fmt_double(frames[0].sampling_rate);
  std::string sets;
  for (std::size_t i = 0; i < frames.size(); ++i) {
    const RfFrame& f = frames[i];
    if (f.n_receivers != rows || f.n_samples != cols)
      throw ShapeError("frame " + std::to_string(i) + " shape differs within the set");
    if (i) sets += ';';
    sets += format_tx_set(f.tx_set);
  }
  c.meta["tx_sets"] = sets;
  c.data.reserve(frames.size() * static_cast<std::size_t>(rows) * cols);
  for (const RfFrame& f : frames)
    c.data.insert(c.data.end(), f.samples.begin(), f.samples.end());
  save_container(path, c);
}

std::vector<RfFrame> load_frame_set(const std::string& path) {
  Container c = load_container(path);
  if (c.kind != PayloadKind::frame_set || c.dims.size() != 3)
    throw IoError(path + ": not a frame-set container");
  const int n = static_cast<int>(c.dims[0]);
  const int rows = static_cast<int>(c.dims[1]);
  const int cols = static_cast<int>(c.dims[2]);
  const double fs = std::stod(c.meta.at("sampling_rate"));
  std::vector<std::string> sets;
  {
    std::istringstream ss(c.meta.at("tx_sets"));
    std::string item;
    while (std::getline(ss, item, ';')) sets.push_back(item);
  }
  if (static_cast<int>(sets.size()) != n)
    throw IoError(path + ": tx_sets metadata lists " + std::to_string(sets.size()) +
                  " entries for " + std::to_string(n) + " frames");
  std::vector<RfFrame> frames;
  frames.reserve(n);
  const std::size_t stride = static_cast<std::size_t>(rows) * cols;
  for (int i = 0; i < n; ++i) {
    RfFrame f(rows, cols, fs);
    f.tx_set = parse_tx_set(sets[i]);
    std::copy(c.data.begin() + i * stride, c.data.begin() + (i + 1) * stride,
              f.samples.begin());
    frames.push_back(std::move(f));
  }
  return frames;
}

void save_medium(const std::string& path, const MediumMap& m) {
  Container c;
  c.kind = PayloadKind::medium;
  c.dims = {static_cast<std::uint32_t>(m.grid), static_cast<std::uint32_t>(m.grid)};
  c.meta["pitch_mm"] = fmt_double(m.pitch_mm);
  c.meta["base_density"] = fmt_double(m.base_density);
  c.meta["sound_speed"] = fmt_double(m.sound_speed);
  c.data = m.density;
  save_container(path, c);
}

MediumMap load_medium(const std::string& path) {
  Container c = load_container(path);
  if (c.kind != PayloadKind::medium || c.dims.size() != 2 || c.dims[0] != c.dims[1])
    throw IoError(path + ": not a medium container");
  MediumMap m;
  m.grid = static_cast<int>(c.dims[0]);
  m.pitch_mm = std::stod(c.meta.at("pitch_mm"));
  m.base_density = std::stod(c.meta.at("base_density"));
  m.sound_speed = std::stod(c.meta.at("sound_speed"));
  m.density = std::move(c.data);
  return m;
}

void save_recon(const std::string& path, const ReconImage& img) {
  Container c;
  c.kind = PayloadKind::recon_image;
  c.dims = {static_cast<std::uint32_t>(img.region.ny),
            static_cast<std::uint32_t>(img.region.nx)};
  c.meta["origin_x"] = fmt_double(img.region.origin.x);
  c.meta["origin_y"] = fmt_double(img.region.origin.y);
  c.meta["width_mm"] = fmt_double(img.region.width);
  c.meta["height_mm"] = fmt_double(img.region.height);
  c.data = img.intensity;
  save_container(path, c);
}

ReconImage load_recon(const std::string& path) {
  Container c = load_container(path);
  if (c.kind != PayloadKind::recon_image || c.dims.size() != 2)
    throw IoError(path + ": not a reconstruction container");
  ReconRegion r;
  r.ny = static_cast<int>(c.dims[0]);
  r.nx = static_cast<int>(c.dims[1]);
  r.origin = {std::stod(c.meta.at("origin_x")), std::stod(c.meta.at("origin_y"))};
  r.width = std::stod(c.meta.at("width_mm"));
  r.height = std::stod(c.meta.at("height_mm"));
  ReconImage img(r);
  img.intensity = std::move(c.data);
  return img;
}

void save_bmode(const std::string& path, const BModeImage& img) {
  Container c;
  c.kind = PayloadKind::bmode_image;
  c.dims = {static_cast<std::uint32_t>(img.ny), static_cast<std::uint32_t>(img.nx)};
  c.meta["db_lo"] = fmt_double(img.db_lo);
  c.meta["db_hi"] = fmt_double(img.db_hi);
  c.meta["provenance"] = img.provenance;
  c.data = img.db;
  save_container(path, c);
}

BModeImage load_bmode(const std::string& path) {
  Container c = load_container(path);
  if (c.kind != PayloadKind::bmode_image || c.dims.size() != 2)
    throw IoError(path + ": not a B-mode container");
  BModeImage img(static_cast<int>(c.dims[1]), static_cast<int>(c.dims[0]));
  img.db_lo = std::stod(c.meta.at("db_lo"));
  img.db_hi = std::stod(c.meta.at("db_hi"));
  img.provenance = c.meta.at("provenance");
  img.db = std::move(c.data);
  return img;
}

}  // namespace fastusct
