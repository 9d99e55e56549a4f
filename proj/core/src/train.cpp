#include "fastusct/train.hpp"

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <stdexcept>
#include <string>

#include "fastusct/errors.hpp"
#include "fastusct/loss.hpp"
#include "fastusct/rng.hpp"

namespace fastusct {

namespace {

constexpr double kAdamEps = 1e-8;

void check_pairs(const std::vector<TrainingPair>& pairs, int outputs, int r,
                 int t) {
  for (const TrainingPair& p : pairs) {
    if (p.input.n_receivers != r || p.input.n_samples != t)
      throw ShapeError("training pair input shape mismatch");
    if (static_cast<int>(p.labels.size()) != outputs)
      throw ShapeError("training pair label count does not match model P");
    for (const RfFrame& l : p.labels)
      if (l.n_receivers != r || l.n_samples != t)
        throw ShapeError("training pair label shape mismatch");
  }
}

// Batch tensors from pairs[order[start .. start+count)].
void build_batch(const std::vector<TrainingPair>& pairs,
                 const std::vector<int>& order, int start, int count,
                 Tensor4<float>& in, Tensor4<float>& lab) {
  const RfFrame& first = pairs[order[start]].input;
  const int r = first.n_receivers;
  const int t = first.n_samples;
  const int p = static_cast<int>(pairs[order[start]].labels.size());
  in = Tensor4<float>(count, 1, r, t);
  lab = Tensor4<float>(count, p, r, t);
  for (int item = 0; item < count; ++item) {
    const TrainingPair& pair = pairs[order[start + item]];
    float* dst = in.plane_ptr(item, 0);
    for (std::size_t i = 0; i < pair.input.samples.size(); ++i) {
      const float v = pair.input.samples[i];
      if (!(v >= -1.0f && v <= 1.0f))
        throw InputError("training input must be normalized to [-1, 1]");
      dst[i] = v;
    }
    for (int ch = 0; ch < p; ++ch) {
      float* ldst = lab.plane_ptr(item, ch);
      const RfFrame& label = pair.labels[ch];
      for (std::size_t i = 0; i < label.samples.size(); ++i)
        ldst[i] = label.samples[i];
    }
  }
}

}  // namespace

double evaluate_loss(UNet<float>& model, const std::vector<TrainingPair>& pairs,
                     double alpha, int batch_size) {
  if (pairs.empty()) throw InputError("evaluation set is empty");
  std::vector<int> order(pairs.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
  double sum = 0.0;
  long count = 0;
  Tensor4<float> in, lab;
  for (int start = 0; start < static_cast<int>(pairs.size());
       start += batch_size) {
    const int bn =
        std::min(batch_size, static_cast<int>(pairs.size()) - start);
    build_batch(pairs, order, start, bn, in, lab);
    const Tensor4<float> out = model.forward(in, false);
    sum += loss_and_grad(out, lab, alpha).value * bn;
    count += bn;
  }
  return sum / static_cast<double>(count);
}

std::vector<EpochStats> train(UNet<float>& model,
                              const std::vector<TrainingPair>& train_pairs,
                              const std::vector<TrainingPair>& val_pairs,
                              const TrainConfig& cfg) {
  if (train_pairs.empty()) throw InputError("training set is empty");
  if (cfg.batch_size < 1) throw ConfigError("batch size must be >= 1");
  if (!(cfg.lr_decay > 0.0 && cfg.lr_decay <= 1.0))
    throw ConfigError("lr decay must lie in (0, 1]");
  if (cfg.lr_interval < 1) throw ConfigError("lr interval must be >= 1");
  if (cfg.alpha < 0.0) throw ConfigError("alpha must be non-negative");
  if (cfg.epochs < 0) throw ConfigError("epoch count must be non-negative");

  const int r = train_pairs[0].input.n_receivers;
  const int t = train_pairs[0].input.n_samples;
  check_pairs(train_pairs, model.outputs, r, t);
  check_pairs(val_pairs, model.outputs, r, t);

  const auto params = model.trainable_params();
  std::vector<std::vector<double>> adam_m(params.size()), adam_v(params.size());
  for (std::size_t p = 0; p < params.size(); ++p) {
    adam_m[p].assign(params[p].count, 0.0);
    adam_v[p].assign(params[p].count, 0.0);
  }

  Rng shuffle_rng(cfg.seed, "shuffle");
  std::vector<int> order(train_pairs.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);

  std::vector<EpochStats> history;
  history.reserve(cfg.epochs);
  long step = 0;
  Tensor4<float> in, lab;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const double lr =
        cfg.lr0 * std::pow(cfg.lr_decay, epoch / cfg.lr_interval);
    for (std::size_t i = order.size(); i > 1; --i) {
      const std::size_t j =
          static_cast<std::size_t>(shuffle_rng.uniform_int(0, i - 1));
      std::swap(order[i - 1], order[j]);
    }

    double loss_sum = 0.0;
    long sample_count = 0;
    int batch_index = 0;
    for (int start = 0; start < static_cast<int>(train_pairs.size());
         start += cfg.batch_size, ++batch_index) {
      const int bn = std::min(cfg.batch_size,
                              static_cast<int>(train_pairs.size()) - start);
      build_batch(train_pairs, order, start, bn, in, lab);
      model.zero_grad();
      const Tensor4<float> out = model.forward(in, true);
      const LossGrad<float> lg = loss_and_grad(out, lab, cfg.alpha);
      if (!std::isfinite(lg.value))
        throw TrainingError("loss diverged at epoch " + std::to_string(epoch) +
                            " batch " + std::to_string(batch_index));
      model.backward(in, lg.grad);

      ++step;
      const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(step));
      const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(step));
      for (std::size_t p = 0; p < params.size(); ++p) {
        float* value = params[p].value;
        const float* grad = params[p].grad;
        double* m = adam_m[p].data();
        double* v = adam_v[p].data();
        for (std::size_t i = 0; i < params[p].count; ++i) {
          const double g = grad[i];
          m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g;
          v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g * g;
          const double mhat = m[i] / bc1;
          const double vhat = v[i] / bc2;
          value[i] = static_cast<float>(value[i] -
                                        lr * mhat / (std::sqrt(vhat) + kAdamEps));
        }
      }
      loss_sum += lg.value * bn;
      sample_count += bn;
    }

    EpochStats stats;
    stats.train_loss = loss_sum / static_cast<double>(sample_count);
    stats.val_loss = val_pairs.empty()
                         ? std::nan("")
                         : evaluate_loss(model, val_pairs, cfg.alpha,
                                         cfg.batch_size);
    history.push_back(stats);
  }
  return history;
}

void write_loss_csv(const std::string& path,
                    const std::vector<EpochStats>& history) {
  const std::string tmp = path + ".tmp";
  std::FILE* f = std::fopen(tmp.c_str(), "w");
  if (!f) throw IoError("cannot open " + tmp + " for writing");
  std::fprintf(f, "epoch,train_loss,val_loss\n");
  for (std::size_t e = 0; e < history.size(); ++e)
    std::fprintf(f, "%zu,%.9g,%.9g\n", e, history[e].train_loss,
                 history[e].val_loss);
  std::fclose(f);
  std::filesystem::rename(tmp, path);
}

}  // namespace fastusct
