#pragma once
// Experiment orchestration: train (or load) the separation model, image a
// held-out phantom set under every configured (N, P, separation) variant,
// and score each variant against the full synthetic-aperture reference.

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "fastusct/config.hpp"
#include "fastusct/dataset.hpp"
#include "fastusct/geometry.hpp"
#include "fastusct/net.hpp"
#include "fastusct/preprocess.hpp"
#include "fastusct/simulator.hpp"

namespace fastusct {

// Per-phantom store of raw and preprocessed frames keyed by (sorted) tx_set,
// so variants with overlapping firing plans never re-simulate a shot.
class AcquisitionCache {
 public:
  AcquisitionCache(const MediumMap& medium, const RingArrayGeometry& geometry,
                   const Pulse& pulse, int n_samples, double sampling_rate,
                   const SimConfig& sim, const PreprocessConfig& pre,
                   int n_threads);

  // Simulates every set not yet cached, fanned out over n_threads.
  void prefetch(const std::vector<std::vector<int>>& tx_sets);

  const RfFrame& raw(const std::vector<int>& tx_set);
  const RfFrame& preprocessed(const std::vector<int>& tx_set);

 private:
  const MediumMap& medium_;
  const RingArrayGeometry& geometry_;
  Pulse pulse_;
  int n_samples_;
  double sampling_rate_;
  SimConfig sim_;
  PreprocessConfig pre_;
  int n_threads_;
  std::map<std::vector<int>, RfFrame> raw_frames_;
  std::map<std::vector<int>, RfFrame> pre_frames_;
};

struct VariantMetrics {
  Variant variant;
  double imaging_time_us = 0.0;  // N * T / fs, the acquisition span
  std::vector<double> rf_mse_per_phantom;
  std::vector<double> mssim_per_phantom;
  std::vector<double> psnr_per_phantom;  // NaN marks an identical-image pair
  double rf_mse_mean = 0.0;
  double mssim_mean = 0.0;
  double psnr_mean = 0.0;  // over non-identical pairs; NaN when all identical
};

struct ExperimentReport {
  std::map<std::string, std::string> config;  // full key = value echo
  int reference_n = 0;
  double reference_imaging_time_us = 0.0;
  std::vector<VariantMetrics> variants;
  std::vector<std::string> artifacts;  // files written under out_dir
  double wall_seconds = 0.0;
};

// "fastusct_n2_p4_sep" style tag used for filenames and provenance.
std::string variant_name(const Variant& v);

// One phantom's single-transmitter frame stack for a variant, ordered
// (group, ascending transmitter). With separation the model splits each
// mixed frame; without it the preprocessed mixed frame is duplicated once
// per group member carrying that member's transmitter identity.
std::vector<RfFrame> variant_frames(AcquisitionCache& cache,
                                    const FiringPlan& plan, bool separation,
                                    UNet<float>* model);

// Loads cfg.train.checkpoint when set; otherwise builds the dataset, trains,
// and, when out_dir is non-empty, writes model.usct and loss.csv there.
UNet<float> get_or_train_model(const ExperimentConfig& cfg,
                               const RingArrayGeometry& geometry,
                               int n_threads, const std::string& out_dir,
                               std::vector<std::string>* artifacts);

// Full protocol. Writes report.json plus B-mode PNGs of the first phantom
// under cfg.experiment.out_dir (nothing when out_dir is empty).
ExperimentReport run_pipeline(const ExperimentConfig& cfg, int n_threads);

// Atomic write; NaN metric entries serialize as JSON null.
void write_report_json(const std::string& path, const ExperimentReport& report);

}  // namespace fastusct
