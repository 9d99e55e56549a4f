#pragma once
// Training-set assembly: simulate phantoms, acquire the P-mixed frames and
// their single-transmitter labels, preprocess both, pair them by firing
// group, and expand every pair with the order-8 ring symmetry. Splits are
// by simulation so validation phantoms never appear in training.

#include <cstdint>
#include <vector>

#include "fastusct/augment.hpp"
#include "fastusct/config.hpp"
#include "fastusct/geometry.hpp"

namespace fastusct {

// Instantiates cfg.phantom for one seed (the spec seed is ignored in favor
// of the argument so callers can enumerate phantoms). Image phantoms load
// cfg.phantom.image_path once per call and apply the configured enhancement.
MediumMap make_phantom(const ExperimentConfig& cfg,
                       const RingArrayGeometry& geometry, std::uint64_t seed);

struct Dataset {
  std::vector<TrainingPair> pairs;
  std::vector<int> sim_index;  // parallel to pairs: producing simulation
};

// cfg.train.n_sims phantoms seeded cfg.phantom.seed + s, acquired under the
// (cfg.train.iterations, cfg.train.parallelism) plan. Dataset size is
// n_sims * iterations * 8. Acquisition failures rethrow naming the
// simulation index.
Dataset build_dataset(const ExperimentConfig& cfg,
                      const RingArrayGeometry& geometry, int n_threads);

struct DatasetSplit {
  std::vector<TrainingPair> train;
  std::vector<TrainingPair> val;
};

// The last lround(val_fraction * n_sims) simulations become validation; at
// least one simulation always remains in training.
DatasetSplit split_by_simulation(const Dataset& data, int n_sims,
                                 double val_fraction);

}  // namespace fastusct
