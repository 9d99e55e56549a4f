#pragma once
// RF conditioning chain: zero-phase band-pass, direct-wave masking keyed on
// the envelope maximum, and whole-frame sigma normalization with a clip to
// the open interval (-1, 1). Frequencies are in the same units as the
// frame's sampling_rate (MHz throughout this codebase).

#include <vector>

#include "fastusct/fft.hpp"
#include "fastusct/frame.hpp"

namespace fastusct {

struct PreprocessConfig {
  double bandpass_lo = 0.5;
  double bandpass_hi = 8.0;
  double bandpass_transition = 0.25;  // raised-cosine width on each side
  int mask_pre = 100;
  int mask_post = 120;
  double clip_sigma_factor = 3.0;
};

// Frequency-domain window: 1 on [lo, hi], raised-cosine ramps over
// [lo - transition, lo] and [hi, hi + transition], 0 elsewhere; applied to
// |f| so the response is zero-phase.
std::vector<double> band_pass(const std::vector<double>& trace, double lo,
                              double hi, double fs, double transition);

// Per trace: zero samples [k - pre, k + post] inclusive (clipped to the
// trace) around the envelope argmax k (first maximum wins ties).
RfFrame mask_direct_wave(const RfFrame& frame, int pre, int post);

// Divide by sigma_factor * population sigma over all R*T samples, then clip
// strictly inside (-1, 1). A zero-sigma frame maps to all zeros.
RfFrame normalize(const RfFrame& frame, double sigma_factor);

// band_pass -> mask_direct_wave -> normalize.
RfFrame preprocess_pipeline(const RfFrame& frame,
                            const PreprocessConfig& config);

}  // namespace fastusct
