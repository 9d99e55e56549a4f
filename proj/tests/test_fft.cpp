#include <doctest.h>

#include <cmath>
#include <complex>
#include <thread>
#include <vector>

#include "fastusct/fft.hpp"
#include "fastusct/rng.hpp"

using namespace fastusct;

namespace {

constexpr double kTau = 6.283185307179586476925286766559;

// Quadratic-time reference DFT, the oracle for the FFTW wrapper.
std::vector<std::complex<double>> naive_dft(
    const std::vector<std::complex<double>>& x) {
  const int n = static_cast<int>(x.size());
  std::vector<std::complex<double>> out(n);
  for (int k = 0; k < n; ++k) {
    std::complex<double> acc = 0.0;
    for (int j = 0; j < n; ++j)
      acc += x[j] * std::polar(1.0, -kTau * k * j / n);
    out[k] = acc;
  }
  return out;
}

std::vector<std::complex<double>> random_complex(int n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<std::complex<double>> x(n);
  for (auto& v : x) v = {rng.normal(), rng.normal()};
  return x;
}

std::vector<double> random_real(int n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> x(n);
  for (auto& v : x) v = rng.normal();
  return x;
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace

TEST_CASE("fft matches the quadratic reference DFT") {
  for (int n : {8, 16, 48, 100}) {  // non-power-of-two sizes included
    const auto x = random_complex(n, 100 + n);
    std::vector<std::complex<double>> got(n);
    fft(x.data(), got.data(), n);
    const auto want = naive_dft(x);
    for (int k = 0; k < n; ++k)
      CHECK(std::abs(got[k] - want[k]) < 1e-9 * n);
  }
}

TEST_CASE("ifft inverts fft with 1/N scaling") {
  const int n = 96;
  const auto x = random_complex(n, 7);
  std::vector<std::complex<double>> spec(n), back(n);
  fft(x.data(), spec.data(), n);
  ifft(spec.data(), back.data(), n);
  for (int i = 0; i < n; ++i) CHECK(std::abs(back[i] - x[i]) < 1e-12);
}

TEST_CASE("Parseval holds") {
  const int n = 64;
  const auto x = random_complex(n, 9);
  std::vector<std::complex<double>> spec(n);
  fft(x.data(), spec.data(), n);
  double t = 0.0, f = 0.0;
  for (int i = 0; i < n; ++i) {
    t += std::norm(x[i]);
    f += std::norm(spec[i]);
  }
  CHECK(t == doctest::Approx(f / n).epsilon(1e-12));
}

TEST_CASE("analytic signal of a sampled cosine is the complex exponential") {
  const int n = 64;
  const int cycles = 5;  // interior bin, no DC/Nyquist leakage
  std::vector<double> x(n);
  for (int t = 0; t < n; ++t) x[t] = std::cos(kTau * cycles * t / n);
  const auto a = analytic_signal(x.data(), n);
  for (int t = 0; t < n; ++t) {
    CHECK(a[t].real() == doctest::Approx(x[t]).epsilon(1e-10));
    CHECK(a[t].imag() ==
          doctest::Approx(std::sin(kTau * cycles * t / n)).epsilon(1e-10));
    CHECK(std::abs(a[t]) == doctest::Approx(1.0).epsilon(1e-10));
  }
}

TEST_CASE("real part of the analytic signal reproduces any input") {
  const int n = 37;
  const auto x = random_real(n, 21);
  const auto a = analytic_signal(x.data(), n);
  for (int t = 0; t < n; ++t)
    CHECK(a[t].real() == doctest::Approx(x[t]).epsilon(1e-11));
}

TEST_CASE("hilbert of hilbert negates interior-band signals") {
  // Build a signal with no DC and no Nyquist energy so H(H(x)) = -x exactly.
  const int n = 64;
  std::vector<std::complex<double>> spec(n, 0.0);
  Rng rng(31);
  for (int k = 1; k < n / 2; ++k) {
    spec[k] = {rng.normal(), rng.normal()};
    spec[n - k] = std::conj(spec[k]);  // real signal
  }
  std::vector<std::complex<double>> xt(n);
  ifft(spec.data(), xt.data(), n);
  std::vector<double> x(n);
  for (int i = 0; i < n; ++i) x[i] = xt[i].real();

  const auto hh = hilbert(hilbert(x));
  for (int i = 0; i < n; ++i)
    CHECK(hh[i] == doctest::Approx(-x[i]).epsilon(1e-9));
}

TEST_CASE("envelope bounds the signal and is exact for pure tones") {
  const int n = 128;
  std::vector<double> x(n);
  for (int t = 0; t < n; ++t) x[t] = 3.0 * std::sin(kTau * 9 * t / n);
  const auto env = envelope(x);
  for (int t = 0; t < n; ++t) {
    CHECK(env[t] >= std::fabs(x[t]) - 1e-9);
    CHECK(env[t] == doctest::Approx(3.0).epsilon(1e-9));
  }
}

TEST_CASE("hilbert_adjoint is the inner-product adjoint of hilbert") {
  for (int n : {32, 33}) {  // even and odd lengths
    const auto x = random_real(n, 40 + n);
    const auto y = random_real(n, 80 + n);
    const double lhs = dot(hilbert(x), y);
    const double rhs = dot(x, hilbert_adjoint(y));
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-10));
  }
}

TEST_CASE("fft calls are thread-safe and deterministic") {
  const int n = 256;
  const auto x = random_real(n, 55);
  const auto first = envelope(x);
  std::vector<std::vector<double>> results(4);
  std::vector<std::thread> pool;
  for (int t = 0; t < 4; ++t)
    pool.emplace_back([&, t]() { results[t] = envelope(x); });
  for (auto& th : pool) th.join();
  for (const auto& r : results) CHECK(r == first);
}
