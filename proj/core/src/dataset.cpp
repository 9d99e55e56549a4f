#include "fastusct/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <utility>

#include "fastusct/errors.hpp"
#include "fastusct/image_io.hpp"
#include "fastusct/phantom.hpp"
#include "fastusct/preprocess.hpp"
#include "fastusct/simulator.hpp"

namespace fastusct {

MediumMap make_phantom(const ExperimentConfig& cfg,
                       const RingArrayGeometry& geometry, std::uint64_t seed) {
  const MediumSpec& spec = cfg.medium;
  const PhantomSpec& p = cfg.phantom;
  switch (p.kind) {
    case PhantomKind::scatterer_points:
      return gen_scatterer_points(spec, seed, p.count,
                                  GridRegion{p.region_lo, p.region_hi},
                                  p.scatterer_density);
    case PhantomKind::scatterer_clump:
      return gen_scatterer_clump(spec, seed, p.patch,
                                 Vec2{p.circle_x, p.circle_y},
                                 p.circle_radius, p.amplitude);
    case PhantomKind::image: {
      if (p.image_path.empty())
        throw ConfigError("phantom kind 'image' requires phantom.image_path");
      IntensityImage img = to_intensity(load_gray(p.image_path), spec.grid);
      if (p.enhance == Enhance::sharpen) img = sharpen(img);
      if (p.enhance == Enhance::s_curve) img = s_curve(img, p.s_curve_a, p.s_curve_x);
      return image_to_density(spec, img, p.amplitude, seed, geometry);
    }
    case PhantomKind::single_point: {
      MediumMap m(spec);
      const int ix = p.point_x + spec.grid / 2;
      const int iy = p.point_y + spec.grid / 2;
      if (ix < 0 || ix >= spec.grid || iy < 0 || iy >= spec.grid)
        throw BoundsError("single_point phantom position (" +
                          std::to_string(p.point_x) + ", " +
                          std::to_string(p.point_y) + ") is off the grid");
      m.at(ix, iy) = static_cast<float>(p.scatterer_density);
      return m;
    }
  }
  throw ConfigError("unhandled phantom kind");
}

Dataset build_dataset(const ExperimentConfig& cfg,
                      const RingArrayGeometry& geometry, int n_threads) {
  const FiringPlan plan =
      make_firing_plan(geometry, cfg.train.iterations, cfg.train.parallelism);
  if (cfg.train.n_sims < 1)
    throw ConfigError("train.n_sims must be at least 1");

  // One acquisition list shared by every simulation: the mixed groups plus
  // any single-transmitter set not already present as a P = 1 group.
  std::vector<std::vector<int>> tx_sets = plan.groups;
  std::map<std::vector<int>, int> index;
  for (std::size_t i = 0; i < tx_sets.size(); ++i) index[tx_sets[i]] = static_cast<int>(i);
  for (const auto& group : plan.groups)
    for (int tx : group) {
      std::vector<int> single{tx};
      if (!index.count(single)) {
        index[single] = static_cast<int>(tx_sets.size());
        tx_sets.push_back(std::move(single));
      }
    }

  Dataset data;
  for (int s = 0; s < cfg.train.n_sims; ++s) {
    const MediumMap medium =
        make_phantom(cfg, geometry, cfg.phantom.seed + static_cast<std::uint64_t>(s));
    std::vector<RfFrame> frames;
    try {
      frames = acquire(medium, geometry, tx_sets, cfg.pulse,
                       cfg.acquisition.n_samples, cfg.acquisition.sampling_rate,
                       cfg.sim, n_threads);
    } catch (const StabilityError& e) {
      throw StabilityError("simulation " + std::to_string(s) + ": " + e.what());
    }
    for (RfFrame& f : frames) f = preprocess_pipeline(f, cfg.preprocess);

    for (const auto& group : plan.groups) {
      TrainingPair pair;
      pair.input = frames[static_cast<std::size_t>(index.at(group))];
      for (int tx : group)
        pair.labels.push_back(frames[static_cast<std::size_t>(index.at({tx}))]);
      for (TrainingPair& aug : augment(pair, geometry)) {
        data.pairs.push_back(std::move(aug));
        data.sim_index.push_back(s);
      }
    }
  }
  return data;
}

DatasetSplit split_by_simulation(const Dataset& data, int n_sims,
                                 double val_fraction) {
  if (n_sims < 1) throw ConfigError("split needs at least one simulation");
  if (!(val_fraction >= 0.0) || val_fraction >= 1.0)
    throw ConfigError("val_fraction must lie in [0, 1)");
  if (data.pairs.size() != data.sim_index.size())
    throw ShapeError("dataset pair/index length mismatch");

  int n_val = static_cast<int>(std::lround(val_fraction * n_sims));
  n_val = std::min(n_val, n_sims - 1);  // keep at least one training sim
  const int n_train = n_sims - n_val;

  DatasetSplit split;
  for (std::size_t i = 0; i < data.pairs.size(); ++i) {
    if (data.sim_index[i] < n_train)
      split.train.push_back(data.pairs[i]);
    else
      split.val.push_back(data.pairs[i]);
  }
  return split;
}

}  // namespace fastusct
