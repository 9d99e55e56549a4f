#include "fastusct/geometry.hpp"

#include <cmath>
#include <string>

#include "fastusct/errors.hpp"

namespace fastusct {

RingArrayGeometry build_ring_array(double radius_mm, int n_receivers,
                                   int n_transmitters) {
  if (radius_mm <= 0.0)
    throw ConfigError("ring radius must be positive, got " + std::to_string(radius_mm));
  if (n_receivers <= 0 || n_transmitters <= 0)
    throw ConfigError("element counts must be positive");
  if (n_receivers % n_transmitters != 0)
    throw DivisibilityError("n_transmitters (" + std::to_string(n_transmitters) +
                            ") must divide n_receivers (" + std::to_string(n_receivers) + ")");

  RingArrayGeometry g;
  g.radius_mm = radius_mm;
  g.n_receivers = n_receivers;
  g.n_transmitters = n_transmitters;
  g.center = {0.0, 0.0};
  g.receiver_positions.resize(n_receivers);
  const double two_pi = 6.283185307179586476925286766559;
  for (int k = 0; k < n_receivers; ++k) {
    const double a = two_pi * k / n_receivers;
    g.receiver_positions[k] = {radius_mm * std::cos(a), radius_mm * std::sin(a)};
  }
  g.transmitter_positions.resize(n_transmitters);
  for (int t = 0; t < n_transmitters; ++t)
    g.transmitter_positions[t] = g.receiver_positions[g.tx_element(t)];
  return g;
}

FiringPlan make_firing_plan(const RingArrayGeometry& geometry,
                            int n_iterations, int parallelism) {
  const int n_tx = geometry.n_transmitters;
  if (n_iterations <= 0 || parallelism <= 0)
    throw ConfigError("firing plan N and P must be positive");
  if (n_iterations * parallelism > n_tx)
    throw CapacityError("plan wants " + std::to_string(n_iterations * parallelism) +
                        " transmitters but the array has " + std::to_string(n_tx));
  if (n_tx % parallelism != 0)
    throw DivisibilityError("parallelism (" + std::to_string(parallelism) +
                            ") must divide n_transmitters (" + std::to_string(n_tx) + ")");

  FiringPlan plan;
  plan.n_iterations = n_iterations;
  plan.parallelism = parallelism;
  plan.groups.resize(n_iterations);
  const int stride = n_tx / parallelism;
  for (int i = 0; i < n_iterations; ++i) {
    plan.groups[i].resize(parallelism);
    for (int k = 0; k < parallelism; ++k) plan.groups[i][k] = i + k * stride;
  }
  return plan;
}

}  // namespace fastusct
