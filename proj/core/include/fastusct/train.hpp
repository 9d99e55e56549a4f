#pragma once
// Mini-batch Adam training of the separation network with the Eq. 1 loss,
// stepped learning-rate decay, and seeded per-epoch shuffling. Deterministic
// for a fixed seed regardless of model.n_threads (per-item gradients are
// reduced in batch order).

#include <cstdint>
#include <string>
#include <vector>

#include "fastusct/augment.hpp"
#include "fastusct/net.hpp"

namespace fastusct {

struct TrainConfig {
  double alpha = 0.01;       // PMSE weight
  double lr0 = 0.01;
  double lr_decay = 0.9;     // applied every lr_interval epochs
  int lr_interval = 10;
  double beta1 = 0.9;
  double beta2 = 0.999;
  int epochs = 100;
  int batch_size = 8;
  std::uint64_t seed = 0;
};

struct EpochStats {
  double train_loss = 0.0;
  double val_loss = 0.0;  // NaN when no validation pairs were given
};

// Trains in place; returns one entry per epoch. Throws TrainingError naming
// epoch and batch if the loss goes non-finite.
std::vector<EpochStats> train(UNet<float>& model,
                              const std::vector<TrainingPair>& train_pairs,
                              const std::vector<TrainingPair>& val_pairs,
                              const TrainConfig& config);

// Mean per-sample loss of the model on a pair set, inference mode.
double evaluate_loss(UNet<float>& model, const std::vector<TrainingPair>& pairs,
                     double alpha, int batch_size);

// "epoch,train_loss,val_loss" rows; written atomically.
void write_loss_csv(const std::string& path,
                    const std::vector<EpochStats>& history);

}  // namespace fastusct
