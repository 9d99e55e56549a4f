#pragma once
// Ring-array transducer layout and parallel-firing plans.
//
// Element 0 sits at angle 0 (positive x axis); indices increase
// counter-clockwise. Transmitters are point sources co-located with every
// (R / n_transmitters)-th receiver.

#include <vector>

#include "fastusct/frame.hpp"

namespace fastusct {

struct RingArrayGeometry {
  double radius_mm = 0.0;
  int n_receivers = 0;
  int n_transmitters = 0;
  Vec2 center;
  std::vector<Vec2> receiver_positions;     // size R, on the circle
  std::vector<Vec2> transmitter_positions;  // size n_transmitters

  // Receiver index a transmitter is co-located with.
  int tx_element(int tx) const { return tx * (n_receivers / n_transmitters); }
};

struct FiringPlan {
  int n_iterations = 0;  // N
  int parallelism = 0;   // P
  std::vector<std::vector<int>> groups;  // N sets of P transmitter indices
};

// Receiver k at angle 2*pi*k/R on the circle. Throws DivisibilityError if
// n_transmitters does not divide n_receivers, ConfigError for radius <= 0.
RingArrayGeometry build_ring_array(double radius_mm, int n_receivers,
                                   int n_transmitters);

// Group i = { i, i + n_tx/P, i + 2*n_tx/P, ... }: P transmitters at maximal
// angular separation. Throws CapacityError when N*P > n_transmitters,
// DivisibilityError when P does not divide n_transmitters.
FiringPlan make_firing_plan(const RingArrayGeometry& geometry,
                            int n_iterations, int parallelism);

}  // namespace fastusct
