#include <doctest.h>

#include <cmath>
#include <vector>

#include "fastusct/errors.hpp"
#include "fastusct/preprocess.hpp"

using namespace fastusct;

namespace {

constexpr double kPi = 3.14159265358979323846;

std::vector<double> tone(double freq, double fs, int n, double amp = 1.0) {
  std::vector<double> x(n);
  for (int i = 0; i < n; ++i) x[i] = amp * std::sin(2.0 * kPi * freq * i / fs);
  return x;
}

double rms(const std::vector<double>& x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return std::sqrt(s / x.size());
}

}  // namespace

TEST_CASE("band-pass keeps in-band tones and removes out-of-band ones") {
  // fs 40 with n = 4000 puts 2 MHz and 12 MHz on exact FFT bins.
  const double fs = 40.0;
  const int n = 4000;
  const std::vector<double> in_band = tone(2.0, fs, n);
  const std::vector<double> out_band = tone(12.0, fs, n);
  const std::vector<double> kept = band_pass(in_band, 0.5, 8.0, fs, 0.25);
  const std::vector<double> cut = band_pass(out_band, 0.5, 8.0, fs, 0.25);
  CHECK(rms(kept) / rms(in_band) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(rms(cut) / rms(out_band) < 1e-9);
}

TEST_CASE("band-pass is zero-phase and ramps to half gain mid-transition") {
  // fs 8 with n = 64 gives 0.125 MHz bins; band 1..2, transition 0.5.
  const double fs = 8.0;
  const int n = 64;

  const std::vector<double> mid = tone(1.5, fs, n, 2.0);
  const std::vector<double> pass = band_pass(mid, 1.0, 2.0, fs, 0.5);
  for (int i = 0; i < n; ++i)
    CHECK(pass[i] == doctest::Approx(mid[i]).epsilon(1e-9).scale(1.0));

  // Ramp midpoints 0.75 and 2.25: raised cosine gain 0.5, still in phase.
  for (double f : {0.75, 2.25}) {
    const std::vector<double> x = tone(f, fs, n);
    const std::vector<double> y = band_pass(x, 1.0, 2.0, fs, 0.5);
    for (int i = 0; i < n; ++i)
      CHECK(y[i] == doctest::Approx(0.5 * x[i]).epsilon(1e-9).scale(1.0));
  }

  // Just past the ramp foot: gone entirely.
  const std::vector<double> beyond = tone(2.5, fs, n);
  const std::vector<double> gone = band_pass(beyond, 1.0, 2.0, fs, 0.5);
  CHECK(rms(gone) < 1e-9);
}

TEST_CASE("band-pass rejects out-of-order or aliased cutoffs") {
  const std::vector<double> x(32, 1.0);
  CHECK_THROWS_AS(band_pass(x, 0.0, 2.0, 10.0, 0.1), ConfigError);
  CHECK_THROWS_AS(band_pass(x, 2.0, 1.0, 10.0, 0.1), ConfigError);
  CHECK_THROWS_AS(band_pass(x, 1.0, 5.0, 10.0, 0.1), ConfigError);
  CHECK_THROWS_AS(band_pass(x, -1.0, 2.0, 10.0, 0.1), ConfigError);
}

TEST_CASE("direct-wave mask zeros an inclusive window around the peak") {
  RfFrame f(2, 128, 10.0);
  f.at(0, 50) = 4.0f;
  f.at(0, 10) = 1.0f;
  f.at(1, 100) = -3.0f;

  const RfFrame m = mask_direct_wave(f, 5, 7);
  for (int t = 0; t < 128; ++t) {
    if (t >= 45 && t <= 57) {
      CHECK(m.at(0, t) == 0.0f);
    } else {
      CHECK(m.at(0, t) == f.at(0, t));
    }
    if (t >= 95 && t <= 107) {
      CHECK(m.at(1, t) == 0.0f);
    } else {
      CHECK(m.at(1, t) == f.at(1, t));
    }
  }
}

TEST_CASE("mask window clips at the trace edges and first peak wins ties") {
  RfFrame edge(1, 64, 10.0);
  edge.at(0, 2) = 1.0f;
  const RfFrame lo = mask_direct_wave(edge, 10, 3);
  for (int t = 0; t <= 5; ++t) CHECK(lo.at(0, t) == 0.0f);
  CHECK(lo.at(0, 6) == edge.at(0, 6));

  RfFrame tail(1, 64, 10.0);
  tail.at(0, 62) = 1.0f;
  const RfFrame hi = mask_direct_wave(tail, 1, 10);
  for (int t = 61; t < 64; ++t) CHECK(hi.at(0, t) == 0.0f);
  CHECK(hi.at(0, 60) == tail.at(0, 60));

  // Even n and even peak spacing: the Hilbert kernel is zero between the two
  // impulses, so both envelope samples tie exactly and the first one is
  // masked.
  RfFrame tie(1, 128, 10.0);
  tie.at(0, 20) = 3.0f;
  tie.at(0, 60) = 3.0f;
  const RfFrame m = mask_direct_wave(tie, 2, 2);
  for (int t = 18; t <= 22; ++t) CHECK(m.at(0, t) == 0.0f);
  CHECK(m.at(0, 60) == 3.0f);

  CHECK_THROWS_AS(mask_direct_wave(tie, -1, 2), ConfigError);
  CHECK_THROWS_AS(mask_direct_wave(tie, 2, -1), ConfigError);
}

TEST_CASE("normalize divides by sigma_factor * population sigma") {
  RfFrame f(1, 3, 10.0);
  f.at(0, 0) = -6.0f;
  f.at(0, 1) = 0.0f;
  f.at(0, 2) = 6.0f;
  const RfFrame n = normalize(f, 3.0);
  const double want = 6.0 / (3.0 * std::sqrt(24.0));  // 0.40824829
  CHECK(n.at(0, 0) == doctest::Approx(-want).epsilon(1e-6));
  CHECK(n.at(0, 1) == 0.0f);
  CHECK(n.at(0, 2) == doctest::Approx(want).epsilon(1e-6));

  // Sigma is taken about the mean but the values are not recentered.
  RfFrame g(1, 3, 10.0);
  g.at(0, 0) = 1.0f;
  g.at(0, 1) = 1.0f;
  g.at(0, 2) = 4.0f;
  const RfFrame gn = normalize(g, 3.0);
  const double scale = 1.0 / (3.0 * std::sqrt(2.0));
  CHECK(gn.at(0, 0) == doctest::Approx(1.0 * scale).epsilon(1e-6));
  CHECK(gn.at(0, 2) == doctest::Approx(4.0 * scale).epsilon(1e-6));
}

TEST_CASE("normalize clips strictly inside (-1, 1) and handles flat frames") {
  RfFrame f(1, 4, 10.0);
  f.at(0, 0) = 1e6f;
  f.at(0, 1) = -1e6f;
  const RfFrame n = normalize(f, 0.001);
  const float upper = std::nextafter(1.0f, 0.0f);
  CHECK(n.at(0, 0) == upper);
  CHECK(n.at(0, 1) == -upper);
  CHECK(n.at(0, 0) < 1.0f);

  RfFrame flat(2, 8, 10.0);
  for (float& v : flat.samples) v = 5.0f;
  const RfFrame z = normalize(flat, 3.0);
  for (float v : z.samples) CHECK(v == 0.0f);

  CHECK_THROWS_AS(normalize(f, 0.0), ConfigError);
  CHECK_THROWS_AS(normalize(f, -1.0), ConfigError);
}

TEST_CASE("pipeline equals the composition of its stages") {
  RfFrame f(3, 256, 10.0);
  // Deterministic multi-tone content with a dominant direct arrival.
  for (int r = 0; r < 3; ++r)
    for (int t = 0; t < 256; ++t)
      f.at(r, t) = static_cast<float>(
          std::sin(2.0 * kPi * 0.5 * t / 10.0 + r) +
          0.3 * std::sin(2.0 * kPi * 3.7 * t / 10.0) +
          (t == 40 + 10 * r ? 8.0 : 0.0));

  PreprocessConfig cfg;
  cfg.bandpass_lo = 0.125;
  cfg.bandpass_hi = 2.0;
  cfg.bandpass_transition = 0.0625;
  cfg.mask_pre = 25;
  cfg.mask_post = 30;
  cfg.clip_sigma_factor = 3.0;

  RfFrame manual = f;
  std::vector<double> trace(f.n_samples);
  for (int r = 0; r < f.n_receivers; ++r) {
    for (int t = 0; t < f.n_samples; ++t) trace[t] = f.at(r, t);
    const std::vector<double> bp =
        band_pass(trace, cfg.bandpass_lo, cfg.bandpass_hi, f.sampling_rate,
                  cfg.bandpass_transition);
    for (int t = 0; t < f.n_samples; ++t)
      manual.at(r, t) = static_cast<float>(bp[t]);
  }
  manual = mask_direct_wave(manual, cfg.mask_pre, cfg.mask_post);
  manual = normalize(manual, cfg.clip_sigma_factor);

  const RfFrame piped = preprocess_pipeline(f, cfg);
  CHECK(piped.samples == manual.samples);

  // The pipeline output is bounded and not identically zero.
  bool nonzero = false;
  for (float v : piped.samples) {
    CHECK(std::fabs(v) < 1.0f);
    nonzero = nonzero || v != 0.0f;
  }
  CHECK(nonzero);
}
