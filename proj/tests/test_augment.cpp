#include <doctest.h>

#include <vector>

#include "fastusct/augment.hpp"
#include "fastusct/errors.hpp"
#include "fastusct/geometry.hpp"
#include "fastusct/rng.hpp"
#include "fastusct/simulator.hpp"

using namespace fastusct;

namespace {

RfFrame random_frame(int receivers, int samples, std::uint64_t seed) {
  RfFrame f(receivers, samples, 10.0);
  Rng rng(seed);
  for (float& v : f.samples) v = static_cast<float>(rng.normal());
  return f;
}

}  // namespace

TEST_CASE("quarter turns shift receiver rows and relabel transmitters") {
  const RingArrayGeometry geom = build_ring_array(50.0, 16, 4);
  RfFrame f = random_frame(16, 8, 1);
  f.tx_set = {1};

  const RfFrame r1 = transform_frame(f, 1, false, geom);
  CHECK(r1.tx_set == std::vector<int>{2});
  for (int row = 0; row < 16; ++row)
    for (int t = 0; t < 8; ++t)
      CHECK(r1.at(row, t) == f.at(((row - 4) % 16 + 16) % 16, t));
  CHECK(r1.sampling_rate == f.sampling_rate);
  CHECK(r1.n_samples == f.n_samples);

  // Reflection about the element-0 axis: row -> R - row, tx -> n_tx - tx.
  const RfFrame refl = transform_frame(f, 0, true, geom);
  CHECK(refl.tx_set == std::vector<int>{3});
  for (int row = 0; row < 16; ++row)
    for (int t = 0; t < 8; ++t)
      CHECK(refl.at(row, t) == f.at((16 - row) % 16, t));
}

TEST_CASE("rotation has order 4 and reflection has order 2, bit-exactly") {
  const RingArrayGeometry geom = build_ring_array(50.0, 16, 4);
  RfFrame f = random_frame(16, 8, 2);
  f.tx_set = {0, 3};

  RfFrame r = f;
  for (int i = 0; i < 4; ++i) r = transform_frame(r, 1, false, geom);
  CHECK(r.samples == f.samples);
  CHECK(r.tx_set == f.tx_set);

  RfFrame m = transform_frame(f, 0, true, geom);
  m = transform_frame(m, 0, true, geom);
  CHECK(m.samples == f.samples);
  CHECK(m.tx_set == f.tx_set);

  // Composition: rot1 twice equals rot2, and rot3 equals rot1 inverse.
  const RfFrame twice =
      transform_frame(transform_frame(f, 1, false, geom), 1, false, geom);
  const RfFrame direct = transform_frame(f, 2, false, geom);
  CHECK(twice.samples == direct.samples);
  CHECK(twice.tx_set == direct.tx_set);
  const RfFrame back =
      transform_frame(transform_frame(f, 1, false, geom), 3, false, geom);
  CHECK(back.samples == f.samples);
}

TEST_CASE("augment yields 8 elements led by the identity, labels re-sorted") {
  const RingArrayGeometry geom = build_ring_array(50.0, 16, 4);
  TrainingPair pair;
  pair.input = random_frame(16, 8, 3);
  pair.input.tx_set = {1, 2};
  RfFrame l1 = random_frame(16, 8, 4);
  l1.tx_set = {1};
  RfFrame l2 = random_frame(16, 8, 5);
  l2.tx_set = {2};
  pair.labels = {l1, l2};

  const std::vector<TrainingPair> aug = augment(pair, geom);
  REQUIRE(aug.size() == 8);

  CHECK(aug[0].input.samples == pair.input.samples);
  CHECK(aug[0].input.tx_set == pair.input.tx_set);
  CHECK(aug[0].labels[0].samples == l1.samples);
  CHECK(aug[0].labels[1].samples == l2.samples);

  // Element 4 is the pure reflection: tx 1 -> 3 and tx 2 -> 2, so the label
  // order flips to keep tx ascending.
  const TrainingPair& refl = aug[4];
  CHECK(refl.input.tx_set == std::vector<int>{2, 3});
  REQUIRE(refl.labels.size() == 2);
  CHECK(refl.labels[0].tx_set == std::vector<int>{2});
  CHECK(refl.labels[1].tx_set == std::vector<int>{3});
  CHECK(refl.labels[0].samples ==
        transform_frame(l2, 0, true, geom).samples);
  CHECK(refl.labels[1].samples ==
        transform_frame(l1, 0, true, geom).samples);

  // Each element keeps every label aligned with its own input transform.
  for (int e = 0; e < 8; ++e) {
    const int k = e % 4;
    const bool rf = e >= 4;
    const RfFrame want = transform_frame(pair.input, k, rf, geom);
    CHECK(aug[e].input.samples == want.samples);
    CHECK(aug[e].input.tx_set == want.tx_set);
    for (const RfFrame& lab : aug[e].labels) REQUIRE(lab.tx_set.size() == 1);
    CHECK(aug[e].labels[0].tx_set[0] < aug[e].labels[1].tx_set[0]);
  }
}

TEST_CASE("augmentation requires four-fold symmetric hardware") {
  const RingArrayGeometry odd_rx = build_ring_array(50.0, 18, 2);
  RfFrame f18 = random_frame(18, 4, 6);
  f18.tx_set = {0};
  CHECK_THROWS_AS(transform_frame(f18, 1, false, odd_rx), SymmetryError);

  const RingArrayGeometry odd_tx = build_ring_array(50.0, 16, 2);
  RfFrame f16 = random_frame(16, 4, 7);
  f16.tx_set = {0};
  CHECK_THROWS_AS(transform_frame(f16, 1, false, odd_tx), SymmetryError);

  const RingArrayGeometry geom = build_ring_array(50.0, 16, 4);
  RfFrame f12 = random_frame(12, 4, 8);
  CHECK_THROWS_AS(transform_frame(f12, 1, false, geom), ShapeError);
}

TEST_CASE("a quarter turn matches simulating the rotated scene") {
  // Scatterer at grid (8, 0) rotated +90 deg lands on (0, 8); transmitter 0
  // relabels to 1. The scheme maps onto itself under grid rotations, so the
  // transformed frame should match the re-simulated one to near roundoff.
  const MediumSpec spec{64, 0.5, 1000.0, 1450.0};
  const RingArrayGeometry geom = build_ring_array(12.0, 16, 4);
  const Pulse pulse{0.5, 1.0, 1.0};

  MediumMap scene(spec);
  scene.at(8 + 32, 0 + 32) = 1800.0f;
  MediumMap rotated(spec);
  rotated.at(0 + 32, 8 + 32) = 1800.0f;
  MediumMap mirrored(spec);
  mirrored.at(8 + 32, -6 + 32) = 1800.0f;
  MediumMap shifted(spec);
  shifted.at(8 + 32, 6 + 32) = 1800.0f;

  const RfFrame base =
      run_forward(shifted, geom, {0}, pulse, 256, 10.0, SimConfig{});
  const RfFrame rot_sim =
      run_forward(rotated, geom, {1}, pulse, 256, 10.0, SimConfig{});
  const RfFrame rot_aug = transform_frame(
      run_forward(scene, geom, {0}, pulse, 256, 10.0, SimConfig{}), 1, false,
      geom);
  const RfFrame mir_sim =
      run_forward(mirrored, geom, {0}, pulse, 256, 10.0, SimConfig{});
  const RfFrame mir_aug = transform_frame(base, 0, true, geom);

  const auto rel_l2 = [](const RfFrame& a, const RfFrame& b) {
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < a.samples.size(); ++i) {
      const double d = a.samples[i] - b.samples[i];
      num += d * d;
      den += static_cast<double>(b.samples[i]) * b.samples[i];
    }
    return std::sqrt(num / den);
  };
  CHECK(rot_aug.tx_set == std::vector<int>{1});
  CHECK(rel_l2(rot_aug, rot_sim) < 1e-4);
  CHECK(rel_l2(mir_aug, mir_sim) < 1e-4);
}
