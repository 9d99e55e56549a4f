#include "fastusct/simulator.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <mutex>
#include <string>
#include <thread>

#include "fastusct/errors.hpp"

namespace fastusct {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Solves a dense n x n system in place with partial pivoting.
std::vector<double> solve_dense(std::vector<double> a, std::vector<double> b) {
  const int n = static_cast<int>(b.size());
  for (int col = 0; col < n; ++col) {
    int pivot = col;
    for (int r = col + 1; r < n; ++r)
      if (std::fabs(a[r * n + col]) > std::fabs(a[pivot * n + col])) pivot = r;
    if (std::fabs(a[pivot * n + col]) < 1e-14)
      throw ConfigError("singular stencil collocation system");
    if (pivot != col) {
      for (int c = 0; c < n; ++c) std::swap(a[col * n + c], a[pivot * n + c]);
      std::swap(b[col], b[pivot]);
    }
    for (int r = col + 1; r < n; ++r) {
      const double f = a[r * n + col] / a[col * n + col];
      for (int c = col; c < n; ++c) a[r * n + c] -= f * a[col * n + c];
      b[r] -= f * b[col];
    }
  }
  std::vector<double> x(n);
  for (int r = n - 1; r >= 0; --r) {
    double acc = b[r];
    for (int c = r + 1; c < n; ++c) acc -= a[r * n + c] * x[c];
    x[r] = acc / a[r * n + r];
  }
  return x;
}

// Max of |sum_m c_m sin((2m+1) theta)| over theta in [0, pi].
double stencil_symbol_max(const std::vector<double>& coef) {
  const int samples = 4096;
  double peak = 0.0;
  for (int s = 0; s <= samples; ++s) {
    const double theta = kPi * s / samples;
    double v = 0.0;
    for (std::size_t m = 0; m < coef.size(); ++m)
      v += coef[m] * std::sin((2.0 * m + 1.0) * theta);
    peak = std::max(peak, std::fabs(v));
  }
  return peak;
}

struct Workspace {
  int n = 0;          // padded side length
  int off = 0;        // interior origin in padded coordinates
  int lo = 0, hi = 0; // update bounds [lo, hi)
  std::vector<double> px, py, vx, vy, p;
  std::vector<double> bx, by, kappa;
  std::vector<double> dec_pi, gain_pi;  // pressure x-split, integer x
  std::vector<double> dec_pj, gain_pj;  // pressure y-split, integer y
  std::vector<double> dec_vi, gain_vi;  // vx, half-offset x
  std::vector<double> dec_vj, gain_vj;  // vy, half-offset y
  std::vector<double> coef;             // stencil taps, 1/dx folded in
};

}  // namespace

std::vector<double> dispersion_matched_stencil(int taps, double k0, double dx,
                                               double nu) {
  if (taps < 1) throw ConfigError("stencil needs at least one tap");
  const double theta_max = 1.6 * k0 * dx / 2.0;
  if (theta_max >= kPi)
    throw ConfigError("pulse wavenumber is not resolvable on this grid");
  std::vector<double> a(static_cast<std::size_t>(taps) * taps);
  std::vector<double> b(taps);
  for (int j = 0; j < taps; ++j) {
    const double theta = theta_max * (j + 1) / taps;
    for (int m = 0; m < taps; ++m)
      a[j * taps + m] = std::sin((2.0 * m + 1.0) * theta);
    b[j] = std::sin(nu * theta) / nu;
  }
  return solve_dense(std::move(a), std::move(b));
}

namespace {

Workspace build_workspace(const MediumMap& medium,
                          const RingArrayGeometry& geometry,
                          const Pulse& pulse, double sampling_rate,
                          const SimConfig& cfg, double dt) {
  const int g = medium.grid;
  const double dx = medium.pitch_mm;
  const double c = medium.sound_speed * 1e-3;  // m/s -> mm/us
  const int halo = cfg.stencil_taps;
  const int pml = cfg.pml_width;

  Workspace w;
  w.off = pml + halo;
  w.n = g + 2 * w.off;
  w.lo = halo;
  w.hi = w.n - halo;
  const int n = w.n;
  const std::size_t cells = static_cast<std::size_t>(n) * n;

  const double k0 = 2.0 * kPi * pulse.center_frequency / c;
  const double nu = c * dt / dx;
  w.coef = dispersion_matched_stencil(cfg.stencil_taps, k0, dx, nu);
  const double courant = nu * std::sqrt(2.0) * stencil_symbol_max(w.coef);
  if (!(courant <= cfg.stability_limit))
    throw StabilityError("Courant factor " + std::to_string(courant) +
                         " exceeds limit " +
                         std::to_string(cfg.stability_limit));
  for (double& cm : w.coef) cm /= dx;

  w.px.assign(cells, 0.0);
  w.py.assign(cells, 0.0);
  w.vx.assign(cells, 0.0);
  w.vy.assign(cells, 0.0);
  w.p.assign(cells, 0.0);

  std::vector<double> rho(cells, medium.base_density);
  for (int iy = 0; iy < g; ++iy)
    for (int ix = 0; ix < g; ++ix)
      rho[static_cast<std::size_t>(iy + w.off) * n + ix + w.off] =
          medium.density[static_cast<std::size_t>(iy) * g + ix];
  for (double r : rho)
    if (!(r > 0.0)) throw ConfigError("medium density must be positive");

  w.bx.assign(cells, 0.0);
  w.by.assign(cells, 0.0);
  w.kappa.assign(cells, 0.0);
  const double c2 = c * c;
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const std::size_t k = static_cast<std::size_t>(j) * n + i;
      w.kappa[k] = rho[k] * c2;
      if (i + 1 < n) w.bx[k] = 2.0 / (rho[k] + rho[k + 1]);
      if (j + 1 < n) w.by[k] = 2.0 / (rho[k] + rho[k + n]);
    }
  }

  // Polynomial absorption ramp over the PML band; zero in the interior.
  const double sigma_max =
      -(cfg.pml_order + 1) * c * std::log(cfg.pml_r0) / (2.0 * pml * dx);
  const double xl = w.off;
  const double xr = w.off + g - 1;
  const auto sigma_at = [&](double x) {
    const double depth = std::max({0.0, xl - x, x - xr});
    const double frac = std::min(depth / pml, 1.0);
    return sigma_max * std::pow(frac, cfg.pml_order);
  };
  const auto fill = [&](std::vector<double>& dec, std::vector<double>& gain,
                        double shift) {
    dec.resize(n);
    gain.resize(n);
    for (int i = 0; i < n; ++i) {
      const double s = sigma_at(i + shift);
      dec[i] = (1.0 - 0.5 * s * dt) / (1.0 + 0.5 * s * dt);
      gain[i] = dt / (1.0 + 0.5 * s * dt);
    }
  };
  fill(w.dec_pi, w.gain_pi, 0.0);
  fill(w.dec_vi, w.gain_vi, 0.5);
  w.dec_pj = w.dec_pi;
  w.gain_pj = w.gain_pi;
  w.dec_vj = w.dec_vi;
  w.gain_vj = w.gain_vi;
  (void)sampling_rate;
  (void)geometry;
  return w;
}

// Element position in mm -> padded-grid node index; node i sits at
// (i - off - g/2) * dx.
std::size_t element_node(const Vec2& pos_mm, const MediumMap& medium,
                         const Workspace& w) {
  const int g = medium.grid;
  const int ix = static_cast<int>(std::lround(pos_mm.x / medium.pitch_mm)) +
                 g / 2;
  const int iy = static_cast<int>(std::lround(pos_mm.y / medium.pitch_mm)) +
                 g / 2;
  if (ix < 0 || ix >= g || iy < 0 || iy >= g)
    throw BoundsError("array element falls outside the medium grid");
  return static_cast<std::size_t>(iy + w.off) * w.n + (ix + w.off);
}

}  // namespace

RfFrame run_forward(const MediumMap& medium, const RingArrayGeometry& geometry,
                    const std::vector<int>& tx_set, const Pulse& pulse,
                    int n_samples, double sampling_rate,
                    const SimConfig& cfg) {
  if (n_samples <= 0) throw ConfigError("n_samples must be positive");
  if (!(sampling_rate > 0.0)) throw ConfigError("sampling rate must be positive");
  if (!(pulse.center_frequency > 0.0) || !(pulse.n_cycles > 0.0))
    throw ConfigError("pulse must have positive frequency and cycle count");
  if (tx_set.empty()) throw InputError("tx_set is empty");
  for (std::size_t a = 0; a < tx_set.size(); ++a) {
    if (tx_set[a] < 0 || tx_set[a] >= geometry.n_transmitters)
      throw BoundsError("transmitter index out of range");
    for (std::size_t b = a + 1; b < tx_set.size(); ++b)
      if (tx_set[a] == tx_set[b])
        throw InputError("duplicate transmitter in tx_set");
  }

  const double dt_out = 1.0 / sampling_rate;
  const double c = medium.sound_speed * 1e-3;
  int sub = cfg.substeps_per_sample;
  if (sub <= 0)
    sub = std::max(1, static_cast<int>(std::ceil(
                          c * dt_out / medium.pitch_mm / 0.15)));
  const double dt = dt_out / sub;

  Workspace w = build_workspace(medium, geometry, pulse, sampling_rate, cfg, dt);
  const int n = w.n;
  const int taps = cfg.stencil_taps;

  std::vector<std::size_t> src_nodes;
  for (int tx : tx_set)
    src_nodes.push_back(
        element_node(geometry.transmitter_positions[tx], medium, w));
  std::vector<std::size_t> rx_nodes;
  for (const Vec2& pos : geometry.receiver_positions)
    rx_nodes.push_back(element_node(pos, medium, w));

  RfFrame frame;
  frame.n_receivers = geometry.n_receivers;
  frame.n_samples = n_samples;
  frame.sampling_rate = sampling_rate;
  frame.t0 = 0.0;
  frame.tx_set = tx_set;
  std::sort(frame.tx_set.begin(), frame.tx_set.end());
  frame.samples.assign(
      static_cast<std::size_t>(frame.n_receivers) * n_samples, 0.0f);

  const int n_pre =
      static_cast<int>(std::ceil(0.5 * pulse.duration() / dt));
  const double inject_scale = dt * sampling_rate;

  double* const px = w.px.data();
  double* const py = w.py.data();
  double* const vx = w.vx.data();
  double* const vy = w.vy.data();
  double* const p = w.p.data();
  const double* const cm = w.coef.data();

  for (int step = 0;; ++step) {
    for (std::size_t k = 0; k < w.p.size(); ++k) p[k] = px[k] + py[k];

    const int rel = step - n_pre;
    if (rel >= 0 && rel % sub == 0) {
      const int sample = rel / sub;
      for (int r = 0; r < frame.n_receivers; ++r)
        frame.at(r, sample) = static_cast<float>(p[rx_nodes[r]]);
      if (sample == n_samples - 1) break;
    }

    if (cfg.nonfinite_check_interval > 0 &&
        step % cfg.nonfinite_check_interval == 0) {
      double acc = 0.0;
      for (std::size_t k = 0; k < w.p.size(); ++k) acc += p[k];
      if (!std::isfinite(acc))
        throw StabilityError("field diverged at step " + std::to_string(step));
    }

    for (int j = w.lo; j < w.hi; ++j) {
      const double* prow = p + static_cast<std::size_t>(j) * n;
      double* vrow = vx + static_cast<std::size_t>(j) * n;
      const double* brow = w.bx.data() + static_cast<std::size_t>(j) * n;
      for (int i = w.lo; i < w.hi; ++i) {
        double d = 0.0;
        for (int m = 0; m < taps; ++m)
          d += cm[m] * (prow[i + 1 + m] - prow[i - m]);
        vrow[i] = w.dec_vi[i] * vrow[i] - w.gain_vi[i] * brow[i] * d;
      }
    }
    for (int j = w.lo; j < w.hi; ++j) {
      double* vrow = vy + static_cast<std::size_t>(j) * n;
      const double* brow = w.by.data() + static_cast<std::size_t>(j) * n;
      const double decay = w.dec_vj[j];
      const double gain = w.gain_vj[j];
      for (int i = w.lo; i < w.hi; ++i) {
        double d = 0.0;
        for (int m = 0; m < taps; ++m)
          d += cm[m] * (p[static_cast<std::size_t>(j + 1 + m) * n + i] -
                        p[static_cast<std::size_t>(j - m) * n + i]);
        vrow[i] = decay * vrow[i] - gain * brow[i] * d;
      }
    }
    for (int j = w.lo; j < w.hi; ++j) {
      double* prow = px + static_cast<std::size_t>(j) * n;
      const double* vrow = vx + static_cast<std::size_t>(j) * n;
      const double* krow = w.kappa.data() + static_cast<std::size_t>(j) * n;
      for (int i = w.lo; i < w.hi; ++i) {
        double d = 0.0;
        for (int m = 0; m < taps; ++m)
          d += cm[m] * (vrow[i + m] - vrow[i - 1 - m]);
        prow[i] = w.dec_pi[i] * prow[i] - w.gain_pi[i] * krow[i] * d;
      }
    }
    for (int j = w.lo; j < w.hi; ++j) {
      double* prow = py + static_cast<std::size_t>(j) * n;
      const double* krow = w.kappa.data() + static_cast<std::size_t>(j) * n;
      const double decay = w.dec_pj[j];
      const double gain = w.gain_pj[j];
      for (int i = w.lo; i < w.hi; ++i) {
        double d = 0.0;
        for (int m = 0; m < taps; ++m)
          d += cm[m] * (vy[static_cast<std::size_t>(j + m) * n + i] -
                        vy[static_cast<std::size_t>(j - 1 - m) * n + i]);
        prow[i] = decay * prow[i] - gain * krow[i] * d;
      }
    }

    const double t_mid = (step - n_pre) * dt + 0.5 * dt;
    const double s = pulse.sample(t_mid) * inject_scale;
    if (s != 0.0)
      for (std::size_t node : src_nodes) px[node] += s;
  }

  return frame;
}

std::vector<RfFrame> acquire(const MediumMap& medium,
                             const RingArrayGeometry& geometry,
                             const std::vector<std::vector<int>>& tx_sets,
                             const Pulse& pulse, int n_samples,
                             double sampling_rate, const SimConfig& cfg,
                             int n_threads) {
  std::vector<RfFrame> frames(tx_sets.size());
  if (tx_sets.empty()) return frames;
  n_threads = std::clamp<int>(n_threads, 1, static_cast<int>(tx_sets.size()));

  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::string error_message;
  std::mutex error_mutex;
  const auto worker = [&]() {
    for (;;) {
      const std::size_t idx = next.fetch_add(1);
      if (idx >= tx_sets.size() || failed.load()) return;
      try {
        frames[idx] = run_forward(medium, geometry, tx_sets[idx], pulse,
                                  n_samples, sampling_rate, cfg);
      } catch (const std::exception& e) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!failed.exchange(true)) error_message = e.what();
        return;
      }
    }
  };

  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }
  if (failed.load()) throw StabilityError(error_message);
  return frames;
}

}  // namespace fastusct
