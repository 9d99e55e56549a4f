#include "fastusct/fft.hpp"

#include <fftw3.h>

#include <cmath>
#include <mutex>
#include <unordered_map>

namespace fastusct {
namespace {

// FFTW plan creation is not thread-safe; execution via fftw_execute_dft on
// caller-owned buffers is. FFTW_UNALIGNED lets one plan serve any buffer.
struct PlanCache {
  std::mutex mu;
  std::unordered_map<int, fftw_plan> fwd;
  std::unordered_map<int, fftw_plan> bwd;

  fftw_plan get(int n, int sign) {
    std::lock_guard<std::mutex> lock(mu);
    auto& table = sign == FFTW_FORWARD ? fwd : bwd;
    auto it = table.find(n);
    if (it != table.end()) return it->second;
    std::vector<fftw_complex> a(n), b(n);
    fftw_plan p = fftw_plan_dft_1d(n, a.data(), b.data(), sign,
                                   FFTW_ESTIMATE | FFTW_UNALIGNED);
    table.emplace(n, p);
    return p;
  }
};

PlanCache& cache() {
  static PlanCache c;
  return c;
}

}  // namespace

void fft(const std::complex<double>* in, std::complex<double>* out, int n) {
  fftw_plan p = cache().get(n, FFTW_FORWARD);
  fftw_execute_dft(p,
                   reinterpret_cast<fftw_complex*>(const_cast<std::complex<double>*>(in)),
                   reinterpret_cast<fftw_complex*>(out));
}

void ifft(const std::complex<double>* in, std::complex<double>* out, int n) {
  fftw_plan p = cache().get(n, FFTW_BACKWARD);
  fftw_execute_dft(p,
                   reinterpret_cast<fftw_complex*>(const_cast<std::complex<double>*>(in)),
                   reinterpret_cast<fftw_complex*>(out));
  const double s = 1.0 / n;
  for (int i = 0; i < n; ++i) out[i] *= s;
}

std::vector<std::complex<double>> analytic_signal(const double* x, int n) {
  std::vector<std::complex<double>> buf(n), spec(n);
  for (int i = 0; i < n; ++i) buf[i] = x[i];
  fft(buf.data(), spec.data(), n);
  // DC and (for even n) Nyquist stay; positive frequencies double; negative zero.
  const int half = n / 2;
  for (int k = 1; k < half + (n % 2); ++k) spec[k] *= 2.0;
  for (int k = half + 1; k < n; ++k) spec[k] = 0.0;
  ifft(spec.data(), buf.data(), n);
  return buf;
}

std::vector<double> hilbert(const std::vector<double>& x) {
  auto a = analytic_signal(x.data(), static_cast<int>(x.size()));
  std::vector<double> h(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) h[i] = a[i].imag();
  return h;
}

std::vector<double> envelope(const std::vector<double>& x) {
  auto a = analytic_signal(x.data(), static_cast<int>(x.size()));
  std::vector<double> e(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) e[i] = std::abs(a[i]);
  return e;
}

std::vector<double> hilbert_adjoint(const std::vector<double>& x) {
  // The Hilbert kernel is real and odd, so the adjoint is its negation.
  auto h = hilbert(x);
  for (double& v : h) v = -v;
  return h;
}

}  // namespace fastusct
