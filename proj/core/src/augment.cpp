#include "fastusct/augment.hpp"

#include <algorithm>
#include <cstddef>

#include "fastusct/errors.hpp"

namespace fastusct {

namespace {

int mod(int a, int m) { return ((a % m) + m) % m; }

}  // namespace

RfFrame transform_frame(const RfFrame& frame, int quarter_turns, bool reflect,
                        const RingArrayGeometry& geometry) {
  const int r = frame.n_receivers;
  const int n_tx = geometry.n_transmitters;
  if (r % 4 != 0)
    throw SymmetryError("receiver count must divide by 4 for augmentation");
  if (n_tx % 4 != 0)
    throw SymmetryError("transmitter count must divide by 4 for augmentation");
  if (r != geometry.n_receivers)
    throw ShapeError("frame receiver count does not match the geometry");

  const int k = mod(quarter_turns, 4);
  const int shift = k * (r / 4);
  RfFrame out = frame;
  for (int row = 0; row < r; ++row) {
    // Rotation writes old row (row - shift); reflection then reads the
    // rotated image at (R - row).
    int src = reflect ? mod(r - row, r) : row;
    src = mod(src - shift, r);
    std::copy(frame.samples.begin() +
                  static_cast<std::size_t>(src) * frame.n_samples,
              frame.samples.begin() +
                  static_cast<std::size_t>(src + 1) * frame.n_samples,
              out.samples.begin() +
                  static_cast<std::size_t>(row) * frame.n_samples);
  }
  for (int& tx : out.tx_set) {
    tx = mod(tx + k * (n_tx / 4), n_tx);
    if (reflect) tx = mod(n_tx - tx, n_tx);
  }
  std::sort(out.tx_set.begin(), out.tx_set.end());
  return out;
}

std::vector<TrainingPair> augment(const TrainingPair& pair,
                                  const RingArrayGeometry& geometry) {
  std::vector<TrainingPair> out;
  out.reserve(8);
  for (int reflect = 0; reflect < 2; ++reflect) {
    for (int k = 0; k < 4; ++k) {
      TrainingPair p;
      p.input = transform_frame(pair.input, k, reflect != 0, geometry);
      p.labels.reserve(pair.labels.size());
      for (const RfFrame& label : pair.labels)
        p.labels.push_back(transform_frame(label, k, reflect != 0, geometry));
      std::sort(p.labels.begin(), p.labels.end(),
                [](const RfFrame& a, const RfFrame& b) {
                  return a.tx_set < b.tx_set;
                });
      out.push_back(std::move(p));
    }
  }
  return out;
}

}  // namespace fastusct
