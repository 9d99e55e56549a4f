// Microbenchmarks for the four hot paths: FDTD stepping, the Hilbert
// envelope FFT chain, network convolution, and delay-and-sum accumulation.

#include <cmath>
#include <vector>

#include <benchmark/benchmark.h>

#include "fastusct/beamform.hpp"
#include "fastusct/fft.hpp"
#include "fastusct/frame.hpp"
#include "fastusct/geometry.hpp"
#include "fastusct/net.hpp"
#include "fastusct/preprocess.hpp"
#include "fastusct/simulator.hpp"

using namespace fastusct;

namespace {

MediumMap water_medium(int grid) {
  MediumSpec spec;
  spec.grid = grid;
  spec.pitch_mm = 0.5;
  spec.base_density = 1000.0;
  spec.sound_speed = 1450.0;
  MediumMap m(spec);
  m.at(grid / 2 + grid / 8, grid / 2) = 1800.0f;  // one scatterer
  return m;
}

Pulse probe_pulse() {
  Pulse p;
  p.center_frequency = 0.5;
  p.n_cycles = 1;
  p.amplitude = 1.0;
  return p;
}

void BM_FdtdForward(benchmark::State& state) {
  const int grid = static_cast<int>(state.range(0));
  const MediumMap medium = water_medium(grid);
  const RingArrayGeometry geom =
      build_ring_array(grid * 0.5 * 0.375, 16, 4);
  const SimConfig sim;
  for (auto _ : state) {
    RfFrame f = run_forward(medium, geom, {0}, probe_pulse(), 256, 10.0, sim);
    benchmark::DoNotOptimize(f.samples.data());
  }
  state.SetItemsProcessed(state.iterations() * 256);
}
BENCHMARK(BM_FdtdForward)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

void BM_HilbertEnvelope(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  std::vector<double> x(n);
  for (int i = 0; i < n; ++i) x[i] = std::sin(0.37 * i) + 0.2 * std::sin(0.11 * i);
  for (auto _ : state) {
    std::vector<double> e = envelope(x);
    benchmark::DoNotOptimize(e.data());
  }
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_HilbertEnvelope)->Arg(1024)->Arg(4096);

void BM_PreprocessFrame(benchmark::State& state) {
  RfFrame f(64, static_cast<int>(state.range(0)), 10.0);
  for (int r = 0; r < f.n_receivers; ++r)
    for (int t = 0; t < f.n_samples; ++t)
      f.at(r, t) = static_cast<float>(std::sin(0.31 * t + r));
  PreprocessConfig cfg;
  cfg.bandpass_lo = 0.125;
  cfg.bandpass_hi = 2.0;
  cfg.bandpass_transition = 0.0625;
  cfg.mask_pre = 25;
  cfg.mask_post = 30;
  for (auto _ : state) {
    RfFrame g = preprocess_pipeline(f, cfg);
    benchmark::DoNotOptimize(g.samples.data());
  }
  state.SetItemsProcessed(state.iterations() * f.n_receivers * f.n_samples);
}
BENCHMARK(BM_PreprocessFrame)->Arg(1024)->Unit(benchmark::kMillisecond);

void BM_NetForward(benchmark::State& state) {
  UNet<float> model = build_model<float>(parse_arch("8,16,32"), 4, 1);
  RfFrame f(64, static_cast<int>(state.range(0)), 10.0);
  f.tx_set = {0, 1, 2, 3};
  for (int r = 0; r < f.n_receivers; ++r)
    for (int t = 0; t < f.n_samples; ++t)
      f.at(r, t) = std::sin(0.017f * (r * f.n_samples + t));
  for (auto _ : state) {
    std::vector<RfFrame> outs = forward_frame(model, f, false);
    benchmark::DoNotOptimize(outs.front().samples.data());
  }
}
BENCHMARK(BM_NetForward)->Arg(256)->Arg(1024)->Unit(benchmark::kMillisecond);

void BM_DasReconstruct(benchmark::State& state) {
  const int npx = static_cast<int>(state.range(0));
  const RingArrayGeometry geom = build_ring_array(50.0, 64, 8);
  std::vector<RfFrame> frames;
  for (int tx = 0; tx < 8; ++tx) {
    RfFrame f(64, 1024, 10.0);
    f.tx_set = {tx};
    for (int r = 0; r < 64; ++r) f.at(r, (r * 13 + tx * 29) % 1024) = 1.0f;
    frames.push_back(std::move(f));
  }
  ReconRegion region;
  region.origin = {-16.0, -16.0};
  region.width = 32.0;
  region.height = 32.0;
  region.nx = npx;
  region.ny = npx;
  for (auto _ : state) {
    ReconImage img =
        das_reconstruct(frames, geom, region, 1450.0, 10.0, 1, nullptr, false);
    benchmark::DoNotOptimize(img.intensity.data());
  }
  state.SetItemsProcessed(state.iterations() * npx * npx);
}
BENCHMARK(BM_DasReconstruct)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
