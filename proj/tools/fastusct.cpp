// Command-line front end. Every subcommand reads the same layered config
// (preset scale, optional INI file, flag overrides) so artifacts produced by
// one stage feed the next: phantom -> simulate -> preprocess -> separate ->
// reconstruct -> evaluate, or pipeline for the whole protocol in one shot.

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "fastusct/beamform.hpp"
#include "fastusct/config.hpp"
#include "fastusct/container.hpp"
#include "fastusct/dataset.hpp"
#include "fastusct/errors.hpp"
#include "fastusct/experiment.hpp"
#include "fastusct/geometry.hpp"
#include "fastusct/image_io.hpp"
#include "fastusct/net.hpp"
#include "fastusct/preprocess.hpp"
#include "fastusct/quality.hpp"
#include "fastusct/simulator.hpp"

namespace fs = std::filesystem;
using namespace fastusct;

namespace {

struct CommonOpts {
  std::string config_path;
  std::string scale = "desk";
  std::string out_dir = "out";
  std::uint64_t seed = 0;
  int threads = 1;
  CLI::Option* seed_opt = nullptr;
  CLI::Option* out_opt = nullptr;
};

void add_common(CLI::App* sub, CommonOpts& o) {
  sub->add_option("--config", o.config_path,
                  "INI config file; keys override the preset")
      ->check(CLI::ExistingFile);
  sub->add_option("--scale", o.scale, "Base preset when keys are not set")
      ->check(CLI::IsMember({"desk", "paper"}));
  o.out_opt = sub->add_option("--out", o.out_dir, "Output directory");
  o.seed_opt = sub->add_option("--seed", o.seed,
                               "Override phantom, training, and eval seeds");
  sub->add_option("--threads", o.threads, "Worker threads")
      ->check(CLI::PositiveNumber);
}

ExperimentConfig make_config(const CommonOpts& o) {
  ExperimentConfig cfg = o.config_path.empty()
                             ? preset_config(o.scale)
                             : load_config(o.config_path, o.scale);
  if (o.seed_opt->count() > 0) {
    cfg.phantom.seed = o.seed;
    cfg.train.config.seed = o.seed;
    cfg.experiment.eval_seed = o.seed;
  }
  return cfg;
}

RingArrayGeometry make_geometry(const ExperimentConfig& cfg) {
  return build_ring_array(cfg.array.radius_mm, cfg.array.n_receivers,
                          cfg.array.n_transmitters);
}

std::string tx_tag(const std::vector<int>& tx) {
  std::string s;
  for (std::size_t i = 0; i < tx.size(); ++i) {
    if (i > 0) s += "-";
    s += std::to_string(tx[i]);
  }
  return s;
}

GrayImage density_to_gray(const MediumMap& m) {
  float lo = m.density.front(), hi = m.density.front();
  for (float d : m.density) {
    lo = std::min(lo, d);
    hi = std::max(hi, d);
  }
  const float span = hi > lo ? hi - lo : 1.0f;
  GrayImage img;
  img.width = m.grid;
  img.height = m.grid;
  img.pixels.resize(m.density.size());
  for (std::size_t i = 0; i < m.density.size(); ++i)
    img.pixels[i] = (m.density[i] - lo) / span;
  return img;
}

void run_phantom(const CommonOpts& o) {
  const ExperimentConfig cfg = make_config(o);
  const RingArrayGeometry geom = make_geometry(cfg);
  const MediumMap medium = make_phantom(cfg, geom, cfg.phantom.seed);
  fs::create_directories(o.out_dir);
  const std::string bin = o.out_dir + "/medium.usct";
  const std::string png = o.out_dir + "/medium.png";
  save_medium(bin, medium);
  save_gray_png(png, density_to_gray(medium));
  std::printf("%s\n%s\n", bin.c_str(), png.c_str());
}

struct SimulateOpts {
  int n = 0;  // 0: take the training plan from the config
  int p = 0;
  bool singles = false;
  std::string medium_path;
};

void run_simulate(const CommonOpts& o, const SimulateOpts& s) {
  const ExperimentConfig cfg = make_config(o);
  const RingArrayGeometry geom = make_geometry(cfg);
  const MediumMap medium = s.medium_path.empty()
                               ? make_phantom(cfg, geom, cfg.phantom.seed)
                               : load_medium(s.medium_path);
  const int n = s.n > 0 ? s.n : cfg.train.iterations;
  const int p = s.p > 0 ? s.p : cfg.train.parallelism;
  const FiringPlan plan = make_firing_plan(geom, n, p);

  std::vector<std::vector<int>> tx_sets = plan.groups;
  if (s.singles) {
    std::set<std::vector<int>> seen(tx_sets.begin(), tx_sets.end());
    for (const auto& group : plan.groups)
      for (int tx : group)
        if (seen.insert({tx}).second) tx_sets.push_back({tx});
  }

  const std::vector<RfFrame> frames =
      acquire(medium, geom, tx_sets, cfg.pulse, cfg.acquisition.n_samples,
              cfg.acquisition.sampling_rate, cfg.sim, o.threads);
  fs::create_directories(o.out_dir);
  for (const RfFrame& f : frames) {
    const std::string path = o.out_dir + "/" +
                             (f.tx_set.size() > 1 ? "mixed_tx" : "single_tx") +
                             tx_tag(f.tx_set) + ".usct";
    save_frame(path, f);
    std::printf("%s\n", path.c_str());
  }
}

void run_preprocess(const CommonOpts& o, const std::vector<std::string>& in) {
  const ExperimentConfig cfg = make_config(o);
  fs::create_directories(o.out_dir);
  for (const std::string& path : in) {
    const RfFrame f = preprocess_pipeline(load_frame(path), cfg.preprocess);
    const std::string out =
        o.out_dir + "/" + fs::path(path).stem().string() + "_pre.usct";
    save_frame(out, f);
    std::printf("%s\n", out.c_str());
  }
}

void run_train(const CommonOpts& o) {
  const ExperimentConfig cfg = make_config(o);
  const RingArrayGeometry geom = make_geometry(cfg);
  fs::create_directories(o.out_dir);
  std::vector<std::string> artifacts;
  get_or_train_model(cfg, geom, o.threads, o.out_dir, &artifacts);
  if (artifacts.empty())
    std::printf("loaded checkpoint %s\n", cfg.train.checkpoint.c_str());
  for (const std::string& path : artifacts) std::printf("%s\n", path.c_str());
}

void run_separate(const CommonOpts& o, const std::string& model_path,
                  const std::vector<std::string>& in) {
  UNet<float> model = load_model<float>(model_path);
  model.n_threads = o.threads;
  std::vector<RfFrame> mixed;
  FiringPlan plan;
  for (const std::string& path : in) {
    mixed.push_back(load_frame(path));
    plan.groups.push_back(mixed.back().tx_set);
  }
  plan.n_iterations = static_cast<int>(plan.groups.size());
  plan.parallelism = model.outputs;

  const std::vector<RfFrame> outs = separate_acquisition(model, mixed, plan);
  fs::create_directories(o.out_dir);
  for (std::size_t i = 0; i < outs.size(); ++i) {
    const std::string path = o.out_dir + "/sep_" + std::to_string(i) + "_tx" +
                             tx_tag(outs[i].tx_set) + ".usct";
    save_frame(path, outs[i]);
    std::printf("%s\n", path.c_str());
  }
}

void run_reconstruct(const CommonOpts& o, const std::vector<std::string>& in) {
  const ExperimentConfig cfg = make_config(o);
  const RingArrayGeometry geom = make_geometry(cfg);
  std::vector<RfFrame> frames;
  for (const std::string& path : in) frames.push_back(load_frame(path));

  const ReconImage image = das_reconstruct(
      frames, geom, cfg.recon.region(), cfg.medium.sound_speed,
      cfg.acquisition.sampling_rate, o.threads, nullptr, cfg.recon.interpolate);
  const BModeImage bmode =
      postprocess_bmode(image, cfg.recon.db_lo, cfg.recon.db_hi,
                        "das over " + std::to_string(frames.size()) + " frames");
  fs::create_directories(o.out_dir);
  save_recon(o.out_dir + "/recon.usct", image);
  save_bmode(o.out_dir + "/bmode.usct", bmode);
  save_gray_png(o.out_dir + "/bmode.png", bmode_to_gray(bmode));
  std::printf("%s/recon.usct\n%s/bmode.usct\n%s/bmode.png\n", o.out_dir.c_str(),
              o.out_dir.c_str(), o.out_dir.c_str());
}

void run_evaluate(const CommonOpts& o, const std::vector<std::string>& ref,
                  const std::vector<std::string>& cand) {
  const ExperimentConfig cfg = make_config(o);
  const PayloadKind kind = load_container(ref.front()).kind;
  nlohmann::json j;
  if (kind == PayloadKind::bmode_image) {
    if (ref.size() != 1 || cand.size() != 1)
      throw ConfigError("image evaluation expects exactly one --ref and one --cand");
    const BModeImage a = load_bmode(ref.front());
    const BModeImage b = load_bmode(cand.front());
    j["mssim"] = mssim(b, a, cfg.recon.mssim_window);
    const PsnrResult pr = psnr(b, a);
    j["identical"] = pr.identical;
    if (pr.identical)
      j["psnr"] = nullptr;
    else
      j["psnr"] = pr.db;
  } else if (kind == PayloadKind::rf_frame) {
    std::vector<RfFrame> truth, frames;
    for (const std::string& path : ref) truth.push_back(load_frame(path));
    for (const std::string& path : cand) frames.push_back(load_frame(path));
    j["rf_mse"] = rf_mse(frames, truth);
  } else {
    throw ConfigError("evaluate expects B-mode or RF frame containers, got " +
                      ref.front());
  }
  std::printf("%s\n", j.dump(2).c_str());
  if (o.out_opt->count() > 0) {
    fs::create_directories(o.out_dir);
    std::ofstream out(o.out_dir + "/evaluate.json");
    out << j.dump(2) << "\n";
  }
}

void run_full_pipeline(const CommonOpts& o) {
  ExperimentConfig cfg = make_config(o);
  if (o.out_opt->count() > 0) cfg.experiment.out_dir = o.out_dir;
  const ExperimentReport report = run_pipeline(cfg, o.threads);

  std::printf("reference usct_n%d        imaging_time_us %8.1f\n",
              report.reference_n, report.reference_imaging_time_us);
  for (const VariantMetrics& m : report.variants)
    std::printf("%-24s imaging_time_us %8.1f  rf_mse %10.4g  mssim %7.4f  psnr %7.2f\n",
                variant_name(m.variant).c_str(), m.imaging_time_us,
                m.rf_mse_mean, m.mssim_mean, m.psnr_mean);
  for (const std::string& path : report.artifacts)
    std::printf("%s\n", path.c_str());
  std::printf("wall_seconds %.1f\n", report.wall_seconds);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"FastUSCT workbench: ring-array acquisition, learned signal "
               "separation, synthetic-aperture reconstruction, and scoring"};
  app.require_subcommand(1);

  CommonOpts phantom_o, simulate_o, preprocess_o, train_o, separate_o,
      reconstruct_o, evaluate_o, pipeline_o;
  SimulateOpts sim;
  std::vector<std::string> preprocess_in, separate_in, reconstruct_in;
  std::vector<std::string> evaluate_ref, evaluate_cand;
  std::string separate_model;

  CLI::App* phantom = app.add_subcommand(
      "phantom", "Generate a medium from the phantom spec and save it");
  add_common(phantom, phantom_o);

  CLI::App* simulate = app.add_subcommand(
      "simulate", "Acquire RF frames for a firing plan over the phantom");
  add_common(simulate, simulate_o);
  simulate->add_option("--n", sim.n, "Transmission iterations (default: train plan)");
  simulate->add_option("--p", sim.p, "Simultaneous transmitters (default: train plan)");
  simulate->add_flag("--singles", sim.singles,
                     "Also acquire each transmitter of the plan alone");
  simulate->add_option("--medium", sim.medium_path,
                       "Reuse a saved medium instead of generating one")
      ->check(CLI::ExistingFile);

  CLI::App* preprocess = app.add_subcommand(
      "preprocess", "Band-pass, mask, normalize, and clip saved frames");
  add_common(preprocess, preprocess_o);
  preprocess->add_option("frames", preprocess_in, "RF frame containers")
      ->required()
      ->check(CLI::ExistingFile);

  CLI::App* train = app.add_subcommand(
      "train", "Build the training set and fit the separation model");
  add_common(train, train_o);

  CLI::App* separate = app.add_subcommand(
      "separate", "Split mixed frames with a trained model");
  add_common(separate, separate_o);
  separate->add_option("--model", separate_model, "Model checkpoint")
      ->required()
      ->check(CLI::ExistingFile);
  separate->add_option("frames", separate_in, "Mixed RF frame containers")
      ->required()
      ->check(CLI::ExistingFile);

  CLI::App* reconstruct = app.add_subcommand(
      "reconstruct", "Delay-and-sum the frames and export the B-mode image");
  add_common(reconstruct, reconstruct_o);
  reconstruct->add_option("frames", reconstruct_in, "RF frame containers")
      ->required()
      ->check(CLI::ExistingFile);

  CLI::App* evaluate = app.add_subcommand(
      "evaluate", "Score candidate images or frame sets against a reference");
  add_common(evaluate, evaluate_o);
  evaluate->add_option("--ref", evaluate_ref, "Reference containers")
      ->required()
      ->check(CLI::ExistingFile);
  evaluate->add_option("--cand", evaluate_cand, "Candidate containers")
      ->required()
      ->check(CLI::ExistingFile);

  CLI::App* pipeline = app.add_subcommand(
      "pipeline", "Run the full experiment and emit the comparison report");
  add_common(pipeline, pipeline_o);

  CLI11_PARSE(app, argc, argv);

  const std::string stage = app.get_subcommands().front()->get_name();
  try {
    if (phantom->parsed()) run_phantom(phantom_o);
    if (simulate->parsed()) run_simulate(simulate_o, sim);
    if (preprocess->parsed()) run_preprocess(preprocess_o, preprocess_in);
    if (train->parsed()) run_train(train_o);
    if (separate->parsed()) run_separate(separate_o, separate_model, separate_in);
    if (reconstruct->parsed()) run_reconstruct(reconstruct_o, reconstruct_in);
    if (evaluate->parsed()) run_evaluate(evaluate_o, evaluate_ref, evaluate_cand);
    if (pipeline->parsed()) run_full_pipeline(pipeline_o);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "fastusct %s: %s\n", stage.c_str(), e.what());
    return 1;
  }
  return 0;
}
