#pragma once
// Transmit pulse: Hann-tapered sine burst centered at t = 0, supported on
// [-duration/2, +duration/2]. Times in microseconds, frequency in MHz.

#include <cmath>

namespace fastusct {

struct Pulse {
  double center_frequency = 0.0;  // MHz
  double n_cycles = 1.0;
  double amplitude = 1.0;

  double duration() const { return n_cycles / center_frequency; }

  double sample(double t) const {
    const double half = 0.5 * duration();
    if (t <= -half || t >= half) return 0.0;
    const double pi = 3.14159265358979323846;
    const double window = 0.5 * (1.0 + std::cos(2.0 * pi * t / duration()));
    return amplitude * std::sin(2.0 * pi * center_frequency * t) * window;
  }
};

}  // namespace fastusct
