#include <doctest.h>

#include <cmath>
#include <vector>

#include "fastusct/errors.hpp"
#include "fastusct/loss.hpp"
#include "fastusct/quality.hpp"
#include "fastusct/rng.hpp"

using namespace fastusct;

namespace {

constexpr double kPi = 3.14159265358979323846;

// Full periods of a unit sinusoid: bin-aligned, so the discrete Hilbert
// transform and all the closed forms below are exact up to FFT rounding.
RfFrame sinusoid_frame(int receivers, int n, int cycles, float scale) {
  RfFrame f(receivers, n, 10.0);
  f.tx_set = {0};
  for (int r = 0; r < receivers; ++r)
    for (int t = 0; t < n; ++t)
      f.at(r, t) =
          scale * static_cast<float>(std::sin(2.0 * kPi * cycles * t / n));
  return f;
}

double wrap_pi(double a) {
  while (a <= -kPi) a += 2.0 * kPi;
  while (a > kPi) a -= 2.0 * kPi;
  return a;
}

}  // namespace

TEST_CASE("phase of a sinusoid advances linearly, silence maps to zero") {
  const int n = 256, cycles = 9;
  std::vector<double> x(n);
  for (int t = 0; t < n; ++t) x[t] = std::sin(2.0 * kPi * cycles * t / n);
  const std::vector<double> th = phase(x);
  for (int t = 0; t < n; ++t) {
    const double want = wrap_pi(2.0 * kPi * cycles * t / n - kPi / 2.0);
    CHECK(wrap_pi(th[t] - want) == doctest::Approx(0.0).epsilon(1e-9).scale(1.0));
  }
  const std::vector<double> silent = phase(std::vector<double>(64, 0.0));
  for (double v : silent) CHECK(v == 0.0);
}

TEST_CASE("loss vanishes when the prediction equals the label") {
  const RfFrame f = sinusoid_frame(4, 512, 7, 0.8f);
  CHECK(loss({f, f}, {f, f}, 0.01) == 0.0);
}

TEST_CASE("sign-flipped unit sinusoid gives MSE 2 plus alpha * 4") {
  const RfFrame label = sinusoid_frame(2, 1024, 8, 1.0f);
  RfFrame pred = label;
  for (float& v : pred.samples) v = -v;
  const double got = loss({pred}, {label}, 0.01);
  // Antipodal phases: (cos - cos')^2 + (sin - sin')^2 = 4 everywhere, and
  // MSE = mean((2 sin)^2) = 2.
  CHECK(got == doctest::Approx(2.04).epsilon(1e-6));
  CHECK(std::fabs(got - 2.04) / 2.04 < 0.01);
}

TEST_CASE("alpha 0 reduces the loss to the raw rf_mse") {
  Rng rng(21);
  RfFrame a(3, 128, 10.0), b(3, 128, 10.0);
  for (float& v : a.samples) v = static_cast<float>(rng.normal());
  for (float& v : b.samples) v = static_cast<float>(rng.normal());
  const double l = loss({a}, {b}, 0.0);
  const double q = rf_mse({a}, {b});
  CHECK(l == doctest::Approx(q).epsilon(1e-12));
  CHECK(loss({a}, {b}, 0.5) == doctest::Approx(loss({b}, {a}, 0.5)).epsilon(1e-12));
}

TEST_CASE("loss validates shapes and alpha") {
  const RfFrame a = sinusoid_frame(2, 64, 3, 1.0f);
  const RfFrame b = sinusoid_frame(2, 32, 3, 1.0f);
  const RfFrame c = sinusoid_frame(3, 64, 3, 1.0f);
  CHECK_THROWS_AS(loss({a}, {b}, 0.01), ShapeError);
  CHECK_THROWS_AS(loss({a}, {c}, 0.01), ShapeError);
  CHECK_THROWS_AS(loss({a, a}, {a}, 0.01), ShapeError);
  CHECK_THROWS_AS(loss({}, {}, 0.01), ShapeError);
  CHECK_THROWS_AS(loss({a}, {a}, -0.1), ConfigError);
}

TEST_CASE("loss_and_grad agrees with the frame-level loss") {
  const RfFrame label = sinusoid_frame(2, 256, 5, 0.9f);
  RfFrame pred = label;
  Rng rng(4);
  for (float& v : pred.samples)
    v = 0.7f * v + 0.1f * static_cast<float>(rng.normal());

  Tensor4<double> tp(1, 2, 2, 256), tl(1, 2, 2, 256);
  // Stack the two frames as channels; each (n, c, h) row is one trace.
  for (int c = 0; c < 2; ++c)
    for (int r = 0; r < 2; ++r)
      for (int t = 0; t < 256; ++t) {
        tp.at(0, c, r, t) = pred.at(r, t);
        tl.at(0, c, r, t) = label.at(r, t);
      }
  const LossGrad<double> lg = loss_and_grad(tp, tl, 0.01);
  CHECK(lg.value ==
        doctest::Approx(loss({pred, pred}, {label, label}, 0.01))
            .epsilon(1e-9));
  CHECK(lg.grad.size() == tp.size());
}

TEST_CASE("analytic loss gradient matches central differences") {
  Rng rng(17);
  Tensor4<double> pred(1, 2, 3, 32), label(1, 2, 3, 32);
  for (double& v : pred.v) v = rng.normal();
  for (double& v : label.v) v = rng.normal();
  const double alpha = 0.05;
  const LossGrad<double> lg = loss_and_grad(pred, label, alpha);

  // Probe a spread of coordinates; double-precision FD resolves ~1e-9.
  const double h = 1e-6;
  for (std::size_t i = 0; i < pred.size(); i += 17) {
    Tensor4<double> up = pred, dn = pred;
    up.v[i] += h;
    dn.v[i] -= h;
    const double fd = (loss_and_grad(up, label, alpha).value -
                       loss_and_grad(dn, label, alpha).value) /
                      (2.0 * h);
    const double scale = std::max({1e-8, std::fabs(fd), std::fabs(lg.grad.v[i])});
    CHECK(std::fabs(lg.grad.v[i] - fd) / scale < 1e-6);
  }
}
