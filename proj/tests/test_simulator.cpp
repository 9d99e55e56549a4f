#include <doctest.h>

#include <cmath>
#include <cstring>
#include <vector>

#include "fastusct/errors.hpp"
#include "fastusct/fft.hpp"
#include "fastusct/geometry.hpp"
#include "fastusct/pulse.hpp"
#include "fastusct/simulator.hpp"

using namespace fastusct;

namespace {

// Tiny water tank: 64 px at 0.5 mm, ring of 16 receivers at 12 mm.
const MediumSpec kSpec{64, 0.5, 1000.0, 1450.0};
const Pulse kPulse{0.5, 1.0, 1.0};
const int kSamples = 256;
const double kFs = 10.0;

RingArrayGeometry tiny_ring() { return build_ring_array(12.0, 16, 4); }

MediumMap water() { return MediumMap(kSpec); }

// Solve the dispersion-matching system with a plain long double Gaussian
// elimination, independent of the library's solver.
std::vector<double> stencil_oracle(int taps, double k0, double dx, double nu) {
  const double theta_max = 1.6 * k0 * dx / 2.0;
  std::vector<std::vector<long double>> a(taps,
                                          std::vector<long double>(taps + 1));
  for (int j = 0; j < taps; ++j) {
    const long double theta = theta_max * (j + 1) / taps;
    for (int m = 0; m < taps; ++m) a[j][m] = std::sin((2 * m + 1) * theta);
    a[j][taps] = std::sin(nu * theta) / nu;
  }
  for (int col = 0; col < taps; ++col) {
    int piv = col;
    for (int r = col + 1; r < taps; ++r)
      if (std::fabs((double)a[r][col]) > std::fabs((double)a[piv][col])) piv = r;
    std::swap(a[col], a[piv]);
    for (int r = 0; r < taps; ++r) {
      if (r == col) continue;
      const long double f = a[r][col] / a[col][col];
      for (int cc = col; cc <= taps; ++cc) a[r][cc] -= f * a[col][cc];
    }
  }
  std::vector<double> coef(taps);
  for (int m = 0; m < taps; ++m)
    coef[m] = static_cast<double>(a[m][taps] / a[m][m]);
  return coef;
}

}  // namespace

TEST_CASE("dispersion-matched stencil solves the collocation system") {
  const double k0 = 2.0 * M_PI * 0.5 / (1450.0 * 1e-3);  // rad/mm at 0.5 MHz
  const double dx = 0.5;
  const double nu = 0.145;
  const std::vector<double> got = dispersion_matched_stencil(5, k0, dx, nu);
  const std::vector<double> want = stencil_oracle(5, k0, dx, nu);
  REQUIRE(got.size() == 5);
  for (int m = 0; m < 5; ++m)
    CHECK(got[m] == doctest::Approx(want[m]).epsilon(1e-9));

  // Residual of the fitted relation at the collocation angles.
  const double theta_max = 1.6 * k0 * dx / 2.0;
  for (int j = 0; j < 5; ++j) {
    const double theta = theta_max * (j + 1) / 5;
    double s = 0.0;
    for (int m = 0; m < 5; ++m) s += got[m] * std::sin((2 * m + 1) * theta);
    CHECK(s == doctest::Approx(std::sin(nu * theta) / nu).epsilon(1e-9));
  }
}

TEST_CASE("flight time to the opposite receiver matches the analytic target") {
  const RingArrayGeometry geom = tiny_ring();
  const MediumMap m = water();
  const RfFrame f =
      run_forward(m, geom, {0}, kPulse, kSamples, kFs, SimConfig{});

  const int opposite = geom.n_receivers / 2;
  std::vector<double> trace(f.n_samples);
  for (int t = 0; t < f.n_samples; ++t) trace[t] = f.at(opposite, t);
  const std::vector<double> env = envelope(trace);
  int arg = 0;
  for (int t = 1; t < f.n_samples; ++t)
    if (env[t] > env[arg]) arg = t;

  const double c_mm_us = 1450.0 * 1e-3;
  const int target = static_cast<int>(std::lround(kFs * 2.0 * 12.0 / c_mm_us));
  CHECK(std::abs(arg - target) <= 2);
}

TEST_CASE("parallel transmission is the sum of the singles") {
  const RingArrayGeometry geom = tiny_ring();
  const MediumMap m = water();
  const std::vector<int> set{0, 1, 3};
  const RfFrame par = run_forward(m, geom, set, kPulse, kSamples, kFs, {});
  std::vector<RfFrame> singles;
  for (int tx : set)
    singles.push_back(run_forward(m, geom, {tx}, kPulse, kSamples, kFs, {}));

  double num = 0.0, den = 0.0;
  for (int r = 0; r < par.n_receivers; ++r) {
    for (int t = 0; t < par.n_samples; ++t) {
      double s = 0.0;
      for (const RfFrame& f : singles) s += f.at(r, t);
      const double d = par.at(r, t) - s;
      num += d * d;
      den += s * s;
    }
  }
  REQUIRE(den > 0.0);
  CHECK(std::sqrt(num / den) <= 1e-6);
}

TEST_CASE("response is linear in pulse amplitude") {
  const RingArrayGeometry geom = tiny_ring();
  const MediumMap m = water();
  const RfFrame f1 = run_forward(m, geom, {0}, kPulse, 128, kFs, {});
  Pulse doubled = kPulse;
  doubled.amplitude = 2.0;
  const RfFrame f2 = run_forward(m, geom, {0}, doubled, 128, kFs, {});
  double worst = 0.0;
  for (std::size_t i = 0; i < f1.samples.size(); ++i) {
    const double want = 2.0 * f1.samples[i];
    worst = std::max(worst,
                     std::fabs(f2.samples[i] - want) /
                         std::max(1e-12, std::fabs(want)));
  }
  CHECK(worst < 1e-5);
}

TEST_CASE("simulation is deterministic and frame metadata is filled") {
  const RingArrayGeometry geom = tiny_ring();
  const MediumMap m = water();
  const RfFrame a = run_forward(m, geom, {2, 0}, kPulse, 128, kFs, {});
  const RfFrame b = run_forward(m, geom, {0, 2}, kPulse, 128, kFs, {});
  CHECK(a.samples == b.samples);
  CHECK(a.tx_set == std::vector<int>{0, 2});  // sorted on output
  CHECK(a.n_receivers == 16);
  CHECK(a.n_samples == 128);
  CHECK(a.sampling_rate == kFs);
  CHECK(a.t0 == 0.0);
  bool nonzero = false;
  for (float v : a.samples) nonzero = nonzero || v != 0.0f;
  CHECK(nonzero);
}

TEST_CASE("acquire fans out and preserves order regardless of threads") {
  const RingArrayGeometry geom = tiny_ring();
  const MediumMap m = water();
  const std::vector<std::vector<int>> sets{{0}, {1}, {0, 2}};
  const std::vector<RfFrame> seq = acquire(m, geom, sets, kPulse, 128, kFs, {}, 1);
  const std::vector<RfFrame> par = acquire(m, geom, sets, kPulse, 128, kFs, {}, 3);
  REQUIRE(seq.size() == 3);
  REQUIRE(par.size() == 3);
  for (int i = 0; i < 3; ++i) {
    CHECK(seq[i].samples == par[i].samples);
    CHECK(seq[i].tx_set == par[i].tx_set);
  }
  const RfFrame direct = run_forward(m, geom, {1}, kPulse, 128, kFs, {});
  CHECK(seq[1].samples == direct.samples);
}

TEST_CASE("input validation names the offending argument class") {
  const RingArrayGeometry geom = tiny_ring();
  const MediumMap m = water();
  CHECK_THROWS_AS(run_forward(m, geom, {}, kPulse, 128, kFs, {}), InputError);
  CHECK_THROWS_AS(run_forward(m, geom, {0, 0}, kPulse, 128, kFs, {}),
                  InputError);
  CHECK_THROWS_AS(run_forward(m, geom, {4}, kPulse, 128, kFs, {}), BoundsError);
  CHECK_THROWS_AS(run_forward(m, geom, {-1}, kPulse, 128, kFs, {}), BoundsError);
  CHECK_THROWS_AS(run_forward(m, geom, {0}, kPulse, 0, kFs, {}), ConfigError);
  CHECK_THROWS_AS(run_forward(m, geom, {0}, kPulse, 128, 0.0, {}), ConfigError);

  Pulse bad = kPulse;
  bad.center_frequency = 0.0;
  CHECK_THROWS_AS(run_forward(m, geom, {0}, bad, 128, kFs, {}), ConfigError);

  MediumMap vacuum = water();
  vacuum.at(3, 3) = 0.0f;
  CHECK_THROWS_AS(run_forward(vacuum, geom, {0}, kPulse, 128, kFs, {}),
                  ConfigError);

  // ring larger than the half-extent of the 32 mm grid
  const RingArrayGeometry wide = build_ring_array(17.0, 16, 4);
  CHECK_THROWS_AS(run_forward(m, wide, {0}, kPulse, 128, kFs, {}), BoundsError);
}

TEST_CASE("an unresolvable pulse and a forced-unstable step are rejected") {
  const RingArrayGeometry geom = tiny_ring();
  const MediumMap m = water();
  Pulse sharp = kPulse;
  sharp.center_frequency = 2.0;  // 0.725 mm wavelength on a 0.5 mm grid
  CHECK_THROWS_AS(run_forward(m, geom, {0}, sharp, 128, kFs, {}), ConfigError);

  SimConfig forced;
  forced.substeps_per_sample = 1;
  // nu = c/(fs*dx) = 1.45/(0.5*0.5) = 5.8 per output step: way past CFL.
  CHECK_THROWS_AS(run_forward(m, geom, {0}, kPulse, 128, 0.5, forced),
                  StabilityError);
}

TEST_CASE("distant receivers stay quiet before the first arrival") {
  const RingArrayGeometry geom = tiny_ring();
  const MediumMap m = water();
  const RfFrame f = run_forward(m, geom, {0}, kPulse, kSamples, kFs, {});
  // One-way flight 0..R/2: receiver 8 is 24 mm away -> ~165 samples.
  double early = 0.0, late = 0.0;
  for (int t = 0; t < 100; ++t) early = std::max(early, (double)std::fabs(f.at(8, t)));
  for (int t = 100; t < kSamples; ++t) late = std::max(late, (double)std::fabs(f.at(8, t)));
  REQUIRE(late > 0.0);
  CHECK(early < 1e-3 * late);
}
