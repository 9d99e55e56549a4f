#pragma once
// Experiment configuration: flat key-value file with [section] headers,
// checked against the known-key schema (unknown keys are errors, missing
// keys fall back to the scale preset). All randomness is controlled by the
// named seeds held here.

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "fastusct/frame.hpp"
#include "fastusct/preprocess.hpp"
#include "fastusct/pulse.hpp"
#include "fastusct/simulator.hpp"
#include "fastusct/train.hpp"

namespace fastusct {

enum class PhantomKind { scatterer_points, scatterer_clump, image, single_point };
enum class Enhance { none, sharpen, s_curve };

struct PhantomSpec {
  PhantomKind kind = PhantomKind::scatterer_points;
  std::uint64_t seed = 1;
  int count = 50;                  // scatterer_points
  double scatterer_density = 2000; // kg/m^3
  int region_lo = -64, region_hi = 64;
  int patch = 16;                  // scatterer_clump
  double circle_x = 0.0, circle_y = 0.0, circle_radius = 48.0;  // grid px
  double amplitude = 100.0;        // a in D = d0 + a*eps*I
  std::string image_path;          // image kind
  Enhance enhance = Enhance::none;
  double s_curve_a = 10.0, s_curve_x = 0.5;
  int point_x = 20, point_y = -12; // single_point grid position
};

struct ArraySpec {
  double radius_mm = 50.0;
  int n_receivers = 64;
  int n_transmitters = 8;
};

struct AcquisitionSpec {
  int n_samples = 1024;
  double sampling_rate = 10.0;  // MHz
};

struct TrainSpec {
  TrainConfig config;
  std::string arch = "16,32,64";
  std::string checkpoint;    // load instead of training when non-empty
  int n_sims = 10;           // training simulations (phantom.seed + i)
  double val_fraction = 0.2; // split by simulation
  int iterations = 2;        // N of the training firing plan
  int parallelism = 4;       // P of the training firing plan
};

struct ReconSpec {
  double origin_x = -32.0, origin_y = -32.0;  // mm
  double width = 64.0, height = 64.0;         // mm
  int nx = 128, ny = 128;
  double db_lo = -30.0, db_hi = 0.0;
  int mssim_window = 7;
  bool interpolate = false;  // linear delay lookup (full-scale setting)

  ReconRegion region() const {
    return ReconRegion{{origin_x, origin_y}, width, height, nx, ny};
  }
};

struct Variant {
  int n = 1;
  int p = 1;
  bool separation = false;
};

struct ExperimentSpec {
  std::vector<Variant> variants;
  int reference_n = 0;       // 0 = all transmitters
  int n_eval_phantoms = 10;
  std::uint64_t eval_seed = 1000;
  std::string out_dir = "out";
};

struct ExperimentConfig {
  MediumSpec medium{256, 0.5, 1000.0, 1450.0};
  ArraySpec array;
  Pulse pulse{0.5, 1.0, 1.0};
  AcquisitionSpec acquisition;
  SimConfig sim;
  PreprocessConfig preprocess{0.125, 2.0, 0.0625, 25, 30, 3.0};
  PhantomSpec phantom;
  TrainSpec train;
  ReconSpec recon;
  ExperimentSpec experiment;
};

// "N,P,sep;N,P,nosep;..."
std::vector<Variant> parse_variants(const std::string& text);
std::string format_variants(const std::vector<Variant>& variants);

// Built-in presets; "desk" is the quarter-scale default, "paper" mirrors the
// full-scale protocol.
ExperimentConfig preset_config(const std::string& scale);

// Preset for `scale` overridden by the key-value file. Unknown keys, bad
// values, and violated invariants throw ConfigError.
ExperimentConfig load_config(const std::string& path, const std::string& scale);

// The flat key-value image of a config (used for the report echo and for
// writing template files).
std::map<std::string, std::string> config_to_map(const ExperimentConfig& cfg);

// Applies one key (e.g. "medium.grid") to the config; ConfigError on unknown
// key or unparsable value.
void apply_config_key(ExperimentConfig& cfg, const std::string& key,
                      const std::string& value);

}  // namespace fastusct
