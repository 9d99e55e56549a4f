#include "fastusct/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>

#include "fastusct/errors.hpp"

namespace fastusct {

namespace {

constexpr double kPi = 3.14159265358979323846;

double window_gain(double f, double lo, double hi, double transition) {
  f = std::fabs(f);
  if (f >= lo && f <= hi) return 1.0;
  if (transition <= 0.0) return 0.0;
  if (f > lo - transition && f < lo)
    return 0.5 * (1.0 + std::cos(kPi * (lo - f) / transition));
  if (f > hi && f < hi + transition)
    return 0.5 * (1.0 + std::cos(kPi * (f - hi) / transition));
  return 0.0;
}

}  // namespace

std::vector<double> band_pass(const std::vector<double>& trace, double lo,
                              double hi, double fs, double transition) {
  if (!(0.0 < lo && lo < hi && hi < 0.5 * fs))
    throw ConfigError("band-pass cutoffs must satisfy 0 < lo < hi < fs/2");
  const std::size_t n = trace.size();
  if (n < 2) return trace;

  std::vector<std::complex<double>> time(n);
  std::vector<std::complex<double>> spec(n);
  for (std::size_t i = 0; i < n; ++i) time[i] = trace[i];
  fft(time.data(), spec.data(), static_cast<int>(n));
  for (std::size_t k = 0; k < n; ++k) {
    const double f =
        (k <= n / 2 ? static_cast<double>(k) : static_cast<double>(k) - n) *
        fs / n;
    spec[k] *= window_gain(f, lo, hi, transition);
  }
  ifft(spec.data(), time.data(), static_cast<int>(n));
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = time[i].real();
  return out;
}

RfFrame mask_direct_wave(const RfFrame& frame, int pre, int post) {
  if (pre < 0 || post < 0)
    throw ConfigError("mask widths must be non-negative");
  RfFrame out = frame;
  std::vector<double> trace(frame.n_samples);
  for (int r = 0; r < frame.n_receivers; ++r) {
    for (int t = 0; t < frame.n_samples; ++t) trace[t] = frame.at(r, t);
    const std::vector<double> env = envelope(trace);
    int k = 0;
    for (int t = 1; t < frame.n_samples; ++t)
      if (env[t] > env[k]) k = t;
    const int lo = std::max(0, k - pre);
    const int hi = std::min(frame.n_samples - 1, k + post);
    for (int t = lo; t <= hi; ++t) out.at(r, t) = 0.0f;
  }
  return out;
}

RfFrame normalize(const RfFrame& frame, double sigma_factor) {
  if (!(sigma_factor > 0.0))
    throw ConfigError("sigma factor must be positive");
  RfFrame out = frame;
  double mean = 0.0;
  for (float v : frame.samples) mean += v;
  mean /= static_cast<double>(frame.samples.size());
  double var = 0.0;
  for (float v : frame.samples) {
    const double d = v - mean;
    var += d * d;
  }
  var /= static_cast<double>(frame.samples.size());
  const double sigma = std::sqrt(var);
  if (sigma == 0.0) {
    std::fill(out.samples.begin(), out.samples.end(), 0.0f);
    return out;
  }
  const float upper = std::nextafter(1.0f, 0.0f);
  const float lower = -upper;
  const double scale = 1.0 / (sigma_factor * sigma);
  for (std::size_t i = 0; i < out.samples.size(); ++i) {
    const float v = static_cast<float>(frame.samples[i] * scale);
    out.samples[i] = std::clamp(v, lower, upper);
  }
  return out;
}

RfFrame preprocess_pipeline(const RfFrame& frame,
                            const PreprocessConfig& config) {
  RfFrame filtered = frame;
  std::vector<double> trace(frame.n_samples);
  for (int r = 0; r < frame.n_receivers; ++r) {
    for (int t = 0; t < frame.n_samples; ++t) trace[t] = frame.at(r, t);
    const std::vector<double> f =
        band_pass(trace, config.bandpass_lo, config.bandpass_hi,
                  frame.sampling_rate, config.bandpass_transition);
    for (int t = 0; t < frame.n_samples; ++t)
      filtered.at(r, t) = static_cast<float>(f[t]);
  }
  const RfFrame masked =
      mask_direct_wave(filtered, config.mask_pre, config.mask_post);
  return normalize(masked, config.clip_sigma_factor);
}

}  // namespace fastusct
