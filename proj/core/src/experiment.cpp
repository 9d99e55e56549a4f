#include "fastusct/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <set>
#include <utility>

#include <json.hpp>

#include "fastusct/beamform.hpp"
#include "fastusct/errors.hpp"
#include "fastusct/image_io.hpp"
#include "fastusct/quality.hpp"
#include "fastusct/train.hpp"

namespace fastusct {

namespace {

std::vector<int> canonical(std::vector<int> tx_set) {
  std::sort(tx_set.begin(), tx_set.end());
  return tx_set;
}

double finite_mean(const std::vector<double>& v) {
  double sum = 0.0;
  int n = 0;
  for (double x : v)
    if (std::isfinite(x)) {
      sum += x;
      ++n;
    }
  return n > 0 ? sum / n : std::numeric_limits<double>::quiet_NaN();
}

}  // namespace

AcquisitionCache::AcquisitionCache(const MediumMap& medium,
                                   const RingArrayGeometry& geometry,
                                   const Pulse& pulse, int n_samples,
                                   double sampling_rate, const SimConfig& sim,
                                   const PreprocessConfig& pre, int n_threads)
    : medium_(medium), geometry_(geometry), pulse_(pulse),
      n_samples_(n_samples), sampling_rate_(sampling_rate), sim_(sim),
      pre_(pre), n_threads_(n_threads) {}

void AcquisitionCache::prefetch(const std::vector<std::vector<int>>& tx_sets) {
  std::vector<std::vector<int>> missing;
  std::set<std::vector<int>> queued;
  for (const auto& s : tx_sets) {
    std::vector<int> key = canonical(s);
    if (!raw_frames_.count(key) && queued.insert(key).second)
      missing.push_back(std::move(key));
  }
  if (missing.empty()) return;
  std::vector<RfFrame> frames =
      acquire(medium_, geometry_, missing, pulse_, n_samples_, sampling_rate_,
              sim_, n_threads_);
  for (std::size_t i = 0; i < missing.size(); ++i) {
    pre_frames_[missing[i]] = preprocess_pipeline(frames[i], pre_);
    raw_frames_[missing[i]] = std::move(frames[i]);
  }
}

const RfFrame& AcquisitionCache::raw(const std::vector<int>& tx_set) {
  const std::vector<int> key = canonical(tx_set);
  auto it = raw_frames_.find(key);
  if (it == raw_frames_.end()) {
    prefetch({key});
    it = raw_frames_.find(key);
  }
  return it->second;
}

const RfFrame& AcquisitionCache::preprocessed(const std::vector<int>& tx_set) {
  const std::vector<int> key = canonical(tx_set);
  auto it = pre_frames_.find(key);
  if (it == pre_frames_.end()) {
    prefetch({key});
    it = pre_frames_.find(key);
  }
  return it->second;
}

std::string variant_name(const Variant& v) {
  return "fastusct_n" + std::to_string(v.n) + "_p" + std::to_string(v.p) +
         (v.separation ? "_sep" : "_nosep");
}

std::vector<RfFrame> variant_frames(AcquisitionCache& cache,
                                    const FiringPlan& plan, bool separation,
                                    UNet<float>* model) {
  if (separation) {
    if (model == nullptr)
      throw ConfigError("separation requested without a model");
    std::vector<RfFrame> mixed;
    mixed.reserve(plan.groups.size());
    for (const auto& group : plan.groups)
      mixed.push_back(cache.preprocessed(group));
    return separate_acquisition(*model, mixed, plan);
  }
  std::vector<RfFrame> out;
  for (const auto& group : plan.groups) {
    const RfFrame& frame = cache.preprocessed(group);
    for (int tx : canonical(group)) {
      RfFrame copy = frame;
      copy.tx_set = {tx};
      out.push_back(std::move(copy));
    }
  }
  return out;
}

UNet<float> get_or_train_model(const ExperimentConfig& cfg,
                               const RingArrayGeometry& geometry,
                               int n_threads, const std::string& out_dir,
                               std::vector<std::string>* artifacts) {
  if (!cfg.train.checkpoint.empty()) {
    UNet<float> model = load_model<float>(cfg.train.checkpoint);
    if (model.outputs != cfg.train.parallelism)
      throw ConfigError("checkpoint separates " +
                        std::to_string(model.outputs) +
                        " transmitters, config asks for " +
                        std::to_string(cfg.train.parallelism));
    model.n_threads = n_threads;
    return model;
  }

  Dataset data = build_dataset(cfg, geometry, n_threads);
  DatasetSplit split =
      split_by_simulation(data, cfg.train.n_sims, cfg.train.val_fraction);
  UNet<float> model = build_model<float>(parse_arch(cfg.train.arch),
                                         cfg.train.parallelism,
                                         cfg.train.config.seed);
  model.n_threads = n_threads;
  const std::vector<EpochStats> history =
      train(model, split.train, split.val, cfg.train.config);

  if (!out_dir.empty()) {
    const std::string model_path = out_dir + "/model.usct";
    const std::string csv_path = out_dir + "/loss.csv";
    save_model(model_path, model);
    write_loss_csv(csv_path, history);
    if (artifacts != nullptr) {
      artifacts->push_back(model_path);
      artifacts->push_back(csv_path);
    }
  }
  return model;
}

ExperimentReport run_pipeline(const ExperimentConfig& cfg, int n_threads) {
  const auto t0 = std::chrono::steady_clock::now();
  if (n_threads < 1) throw ConfigError("n_threads must be at least 1");
  if (cfg.experiment.variants.empty())
    throw ConfigError("no experiment variants configured");
  if (cfg.experiment.n_eval_phantoms < 1)
    throw ConfigError("experiment.n_eval_phantoms must be at least 1");

  const RingArrayGeometry geometry = build_ring_array(
      cfg.array.radius_mm, cfg.array.n_receivers, cfg.array.n_transmitters);

  std::vector<FiringPlan> plans;
  for (const Variant& v : cfg.experiment.variants)
    plans.push_back(make_firing_plan(geometry, v.n, v.p));
  const int reference_n = cfg.experiment.reference_n > 0
                              ? cfg.experiment.reference_n
                              : cfg.array.n_transmitters;
  const FiringPlan ref_plan = make_firing_plan(geometry, reference_n, 1);

  const std::string& out_dir = cfg.experiment.out_dir;
  if (!out_dir.empty()) std::filesystem::create_directories(out_dir);

  const double shot_us = cfg.acquisition.n_samples / cfg.acquisition.sampling_rate;

  ExperimentReport report;
  report.config = config_to_map(cfg);
  report.reference_n = reference_n;
  report.reference_imaging_time_us = reference_n * shot_us;
  report.variants.resize(cfg.experiment.variants.size());
  for (std::size_t i = 0; i < report.variants.size(); ++i) {
    report.variants[i].variant = cfg.experiment.variants[i];
    report.variants[i].imaging_time_us = cfg.experiment.variants[i].n * shot_us;
  }

  std::optional<UNet<float>> model;
  for (const Variant& v : cfg.experiment.variants)
    if (v.separation && !model)
      model.emplace(
          get_or_train_model(cfg, geometry, n_threads, out_dir, &report.artifacts));

  const ReconRegion region = cfg.recon.region();
  for (int e = 0; e < cfg.experiment.n_eval_phantoms; ++e) {
    const MediumMap medium = make_phantom(
        cfg, geometry, cfg.experiment.eval_seed + static_cast<std::uint64_t>(e));
    AcquisitionCache cache(medium, geometry, cfg.pulse,
                           cfg.acquisition.n_samples,
                           cfg.acquisition.sampling_rate, cfg.sim,
                           cfg.preprocess, n_threads);

    std::set<std::vector<int>> wanted(ref_plan.groups.begin(),
                                      ref_plan.groups.end());
    for (const FiringPlan& plan : plans)
      for (const auto& group : plan.groups) {
        wanted.insert(canonical(group));
        for (int tx : group) wanted.insert({tx});
      }
    cache.prefetch({wanted.begin(), wanted.end()});

    std::vector<RfFrame> ref_frames;
    ref_frames.reserve(ref_plan.groups.size());
    for (const auto& group : ref_plan.groups)
      ref_frames.push_back(cache.preprocessed(group));
    const ReconImage ref_image =
        das_reconstruct(ref_frames, geometry, region, cfg.medium.sound_speed,
                        cfg.acquisition.sampling_rate, n_threads, nullptr,
                        cfg.recon.interpolate);
    const BModeImage ref_bmode = postprocess_bmode(
        ref_image, cfg.recon.db_lo, cfg.recon.db_hi,
        "usct_n" + std::to_string(reference_n) + "_reference");
    if (e == 0 && !out_dir.empty()) {
      const std::string path = out_dir + "/bmode_reference.png";
      save_gray_png(path, bmode_to_gray(ref_bmode));
      report.artifacts.push_back(path);
    }

    for (std::size_t i = 0; i < plans.size(); ++i) {
      VariantMetrics& m = report.variants[i];
      const std::vector<RfFrame> frames = variant_frames(
          cache, plans[i], m.variant.separation, model ? &*model : nullptr);
      std::vector<RfFrame> truth;
      truth.reserve(frames.size());
      for (const RfFrame& f : frames) truth.push_back(cache.preprocessed(f.tx_set));
      m.rf_mse_per_phantom.push_back(rf_mse(frames, truth));

      const ReconImage image =
          das_reconstruct(frames, geometry, region, cfg.medium.sound_speed,
                          cfg.acquisition.sampling_rate, n_threads, nullptr,
                          cfg.recon.interpolate);
      const BModeImage bmode = postprocess_bmode(
          image, cfg.recon.db_lo, cfg.recon.db_hi, variant_name(m.variant));
      m.mssim_per_phantom.push_back(mssim(bmode, ref_bmode, cfg.recon.mssim_window));
      const PsnrResult pr = psnr(bmode, ref_bmode);
      m.psnr_per_phantom.push_back(
          pr.identical ? std::numeric_limits<double>::quiet_NaN() : pr.db);

      if (e == 0 && !out_dir.empty()) {
        const std::string path =
            out_dir + "/bmode_" + variant_name(m.variant) + ".png";
        save_gray_png(path, bmode_to_gray(bmode));
        report.artifacts.push_back(path);
      }
    }
  }

  for (VariantMetrics& m : report.variants) {
    m.rf_mse_mean = finite_mean(m.rf_mse_per_phantom);
    m.mssim_mean = finite_mean(m.mssim_per_phantom);
    m.psnr_mean = finite_mean(m.psnr_per_phantom);
  }
  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  if (!out_dir.empty()) {
    const std::string path = out_dir + "/report.json";
    report.artifacts.push_back(path);
    write_report_json(path, report);
  }
  return report;
}

void write_report_json(const std::string& path, const ExperimentReport& report) {
  nlohmann::json j;
  j["config"] = report.config;
  j["reference"]["n"] = report.reference_n;
  j["reference"]["imaging_time_us"] = report.reference_imaging_time_us;
  j["variants"] = nlohmann::json::array();
  for (const VariantMetrics& m : report.variants) {
    nlohmann::json v;
    v["n"] = m.variant.n;
    v["p"] = m.variant.p;
    v["separation"] = m.variant.separation;
    v["imaging_time_us"] = m.imaging_time_us;
    v["rf_mse"] = m.rf_mse_per_phantom;
    v["mssim"] = m.mssim_per_phantom;
    v["psnr"] = m.psnr_per_phantom;
    v["rf_mse_mean"] = m.rf_mse_mean;
    v["mssim_mean"] = m.mssim_mean;
    v["psnr_mean"] = m.psnr_mean;
    j["variants"].push_back(std::move(v));
  }
  j["artifacts"] = report.artifacts;
  j["wall_seconds"] = report.wall_seconds;

  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw IoError("cannot open " + tmp + " for writing");
    out << j.dump(2) << "\n";
    if (!out) throw IoError("short write to " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace fastusct
