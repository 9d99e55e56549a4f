#pragma once
// 2D acoustic FDTD on a staggered pressure-velocity grid with a split-field
// PML. Constant sound speed, heterogeneous density (kappa = rho*c^2,
// staggered buoyancy 2/(rho_i + rho_{i+1})). Spatial derivatives use an
// M-tap staggered stencil whose coefficients are solved at setup to cancel
// temporal dispersion at wavenumbers up to 1.6*k0 of the transmit pulse.
//
// Units: mm, microseconds, MHz. Sound speed is stored in m/s and converted
// internally (1450 m/s = 1.45 mm/us).
//
// Sources are injected additively into the pressure x-split at the grid node
// nearest the element position; receivers sample p = px + py at their
// nearest node, without interpolation. Output sample n is the field state at
// t = n / sampling_rate; the pulse center sits at t = 0 and the run is
// pre-rolled so the full tail of the pulse is applied.

#include <cstdint>
#include <vector>

#include "fastusct/frame.hpp"
#include "fastusct/geometry.hpp"
#include "fastusct/pulse.hpp"

namespace fastusct {

struct SimConfig {
  // 0 = choose automatically: max(1, ceil(nu_out / 0.15)) where
  // nu_out = c * (1/fs) / dx.
  int substeps_per_sample = 0;
  int pml_width = 20;          // cells per side, outside the medium grid
  double pml_r0 = 1e-6;        // target reflection coefficient
  int pml_order = 3;           // polynomial ramp exponent
  int stencil_taps = 5;        // M, also fixes the halo width
  double stability_limit = 0.95;
  int nonfinite_check_interval = 128;  // steps between divergence scans
};

// One forward run with every transmitter in tx_set fired at t = 0.
// tx_set entries must be valid transmitter indices; duplicates rejected.
// Throws StabilityError if the scheme is unstable at setup or the field
// diverges mid-run (the message names the step).
RfFrame run_forward(const MediumMap& medium, const RingArrayGeometry& geometry,
                    const std::vector<int>& tx_set, const Pulse& pulse,
                    int n_samples, double sampling_rate,
                    const SimConfig& config);

// One run_forward per entry of tx_sets, fanned out over n_threads.
// Frames come back in tx_sets order.
std::vector<RfFrame> acquire(const MediumMap& medium,
                             const RingArrayGeometry& geometry,
                             const std::vector<std::vector<int>>& tx_sets,
                             const Pulse& pulse, int n_samples,
                             double sampling_rate, const SimConfig& config,
                             int n_threads = 1);

// Dispersion-matched staggered-stencil coefficients (exposed for tests).
// Solves S(k_j) = sin(nu*k_j*dx/2)/nu at k_j = linspace(1.6*k0/M, 1.6*k0, M)
// where S(k) = sum_m coef[m]*sin((2m+1)*k*dx/2).
std::vector<double> dispersion_matched_stencil(int taps, double k0, double dx,
                                               double nu);

}  // namespace fastusct
