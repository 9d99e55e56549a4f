#pragma once
// Ring-symmetry augmentation: the order-8 group generated by quarter-turn
// rotations (cyclic receiver-row shifts of R/4 with matching transmitter
// relabeling) and the reflection about the element-0 axis.

#include <vector>

#include "fastusct/frame.hpp"
#include "fastusct/geometry.hpp"

namespace fastusct {

struct TrainingPair {
  RfFrame input;                 // P-mixed, preprocessed
  std::vector<RfFrame> labels;   // P single-tx frames, ascending tx
};

// One symmetry element: rotate by k quarter turns, then reflect if set.
// Relabels every tx_set entry and re-sorts labels by their new transmitter.
RfFrame transform_frame(const RfFrame& frame, int quarter_turns, bool reflect,
                        const RingArrayGeometry& geometry);

// The 8 group elements in the order [rot0..rot3, refl*rot0..refl*rot3];
// element 0 is the identity (bit-identical copy).
std::vector<TrainingPair> augment(const TrainingPair& pair,
                                  const RingArrayGeometry& geometry);

}  // namespace fastusct
