#pragma once
// Thin deterministic wrapper over FFTW3 (double precision) plus the
// analytic-signal helpers built on it. Plans are created with FFTW_ESTIMATE
// so the algorithm choice never depends on runtime measurement; a process-
// wide plan cache keyed by length is guarded by a mutex. fftw_execute_dft
// on distinct buffers is thread-safe.

#include <complex>
#include <vector>

namespace fastusct {

// In-order complex DFT, forward = exp(-i 2 pi k n / N) convention, unscaled.
void fft(const std::complex<double>* in, std::complex<double>* out, int n);
// Inverse DFT, scaled by 1/N so ifft(fft(x)) == x.
void ifft(const std::complex<double>* in, std::complex<double>* out, int n);

// Analytic signal: negative frequencies zeroed, positive doubled, DC and
// Nyquist kept. Real part equals the input, imaginary part is the
// quadrature (Hilbert) series.
std::vector<std::complex<double>> analytic_signal(const double* x, int n);

// Imaginary part of the analytic signal: the discrete Hilbert transform.
std::vector<double> hilbert(const std::vector<double>& x);

// Elementwise magnitude of the analytic signal.
std::vector<double> envelope(const std::vector<double>& x);

// Adjoint of hilbert under the standard inner product (equals -hilbert for
// even n up to the DC/Nyquist rows; computed exactly via the conjugated
// frequency-domain multiplier). Needed by the loss gradient.
std::vector<double> hilbert_adjoint(const std::vector<double>& x);

}  // namespace fastusct
