#pragma once
// Synthetic-aperture delay-and-sum: every (tx, rx) pair contributes the
// analytic-signal sample at the round-trip delay; the pixel is the magnitude
// of the complex sum. Nearest-sample lookup, no apodization.

#include <cstdint>
#include <vector>

#include "fastusct/frame.hpp"
#include "fastusct/geometry.hpp"

namespace fastusct {

struct DasStats {
  std::int64_t contributions = 0;  // in-range (tx, rx, pixel) samples summed
  std::int64_t skipped = 0;        // delay index fell outside the trace
};

// frames: single-tx frames (tx identity in tx_set, exactly one entry).
// sound_speed in m/s; sampling_rate in MHz and must match every frame.
// interpolate=false snaps the delay to the nearest sample; true linearly
// interpolates between the two bracketing samples (full-scale setting).
ReconImage das_reconstruct(const std::vector<RfFrame>& frames,
                           const RingArrayGeometry& geometry,
                           const ReconRegion& region, double sound_speed,
                           double sampling_rate, int n_threads = 1,
                           DasStats* stats = nullptr, bool interpolate = false);

}  // namespace fastusct
