#include "fastusct/config.hpp"

#include <fstream>
#include <functional>
#include <sstream>

#include "fastusct/errors.hpp"

namespace fastusct {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r");
  std::size_t b = s.find_last_not_of(" \t\r");
  if (a == std::string::npos) return "";
  return s.substr(a, b - a + 1);
}

double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double x = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ConfigError("bad numeric value for " + key + ": '" + v + "'");
  }
}

int to_int(const std::string& key, const std::string& v) {
  const double x = to_double(key, v);
  const int i = static_cast<int>(x);
  if (static_cast<double>(i) != x)
    throw ConfigError("value for " + key + " must be an integer: '" + v + "'");
  return i;
}

std::uint64_t to_seed(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const unsigned long long x = std::stoull(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return static_cast<std::uint64_t>(x);
  } catch (const std::exception&) {
    throw ConfigError("bad seed value for " + key + ": '" + v + "'");
  }
}

PhantomKind parse_kind(const std::string& v) {
  if (v == "scatterer_points") return PhantomKind::scatterer_points;
  if (v == "scatterer_clump") return PhantomKind::scatterer_clump;
  if (v == "image") return PhantomKind::image;
  if (v == "single_point") return PhantomKind::single_point;
  throw ConfigError("unknown phantom kind: '" + v + "'");
}

std::string format_kind(PhantomKind k) {
  switch (k) {
    case PhantomKind::scatterer_points: return "scatterer_points";
    case PhantomKind::scatterer_clump: return "scatterer_clump";
    case PhantomKind::image: return "image";
    case PhantomKind::single_point: return "single_point";
  }
  return "scatterer_points";
}

Enhance parse_enhance(const std::string& v) {
  if (v == "none") return Enhance::none;
  if (v == "sharpen") return Enhance::sharpen;
  if (v == "s_curve") return Enhance::s_curve;
  throw ConfigError("unknown enhance mode: '" + v + "'");
}

std::string format_enhance(Enhance e) {
  switch (e) {
    case Enhance::none: return "none";
    case Enhance::sharpen: return "sharpen";
    case Enhance::s_curve: return "s_curve";
  }
  return "none";
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

std::vector<Variant> parse_variants(const std::string& text) {
  std::vector<Variant> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ';')) {
    item = trim(item);
    if (item.empty()) continue;
    std::stringstream fs(item);
    std::string n, p, mode;
    if (!std::getline(fs, n, ',') || !std::getline(fs, p, ',') ||
        !std::getline(fs, mode, ','))
      throw ConfigError("variant must be 'N,P,sep|nosep': '" + item + "'");
    Variant v;
    v.n = to_int("variant N", trim(n));
    v.p = to_int("variant P", trim(p));
    mode = trim(mode);
    if (mode == "sep")
      v.separation = true;
    else if (mode == "nosep")
      v.separation = false;
    else
      throw ConfigError("variant mode must be sep or nosep: '" + item + "'");
    out.push_back(v);
  }
  if (out.empty()) throw ConfigError("variant list is empty");
  return out;
}

std::string format_variants(const std::vector<Variant>& variants) {
  std::string out;
  for (std::size_t i = 0; i < variants.size(); ++i) {
    if (i) out += ';';
    out += std::to_string(variants[i].n) + "," +
           std::to_string(variants[i].p) + "," +
           (variants[i].separation ? "sep" : "nosep");
  }
  return out;
}

ExperimentConfig preset_config(const std::string& scale) {
  ExperimentConfig cfg;  // member initializers are the desk preset
  cfg.train.config.epochs = 20;
  cfg.experiment.variants = {{2, 4, true}, {8, 1, false}};
  if (scale == "desk") return cfg;
  if (scale == "paper") {
    cfg.train.config.epochs = 100;
    cfg.medium = MediumSpec{1024, 0.125, 1000.0, 1450.0};
    cfg.array = ArraySpec{50.0, 256, 16};
    cfg.pulse = Pulse{2.0, 1.0, 1.0};
    cfg.acquisition = AcquisitionSpec{4096, 40.0};
    cfg.preprocess = PreprocessConfig{0.5, 8.0, 0.25, 100, 120, 3.0};
    cfg.phantom.region_lo = -256;
    cfg.phantom.region_hi = 256;
    cfg.phantom.circle_radius = 192.0;
    cfg.train.n_sims = 100;
    cfg.train.iterations = 4;
    cfg.train.parallelism = 4;
    cfg.recon = ReconSpec{-32.0, -32.0, 64.0, 64.0, 256, 256, -30.0, 0.0, 7};
    cfg.recon.interpolate = true;
    cfg.experiment.variants = {{4, 4, true}, {16, 1, false}};
    cfg.experiment.n_eval_phantoms = 50;
    return cfg;
  }
  throw ConfigError("unknown scale preset: '" + scale + "'");
}

void apply_config_key(ExperimentConfig& cfg, const std::string& key,
                      const std::string& value) {
  // One handler per known key; anything else is a schema violation.
  static const std::map<std::string,
                        std::function<void(ExperimentConfig&,
                                           const std::string&)>>
      handlers = {
          {"medium.grid",
           [](ExperimentConfig& c, const std::string& v) {
             c.medium.grid = to_int("medium.grid", v);
           }},
          {"medium.pitch_mm",
           [](ExperimentConfig& c, const std::string& v) {
             c.medium.pitch_mm = to_double("medium.pitch_mm", v);
           }},
          {"medium.sound_speed",
           [](ExperimentConfig& c, const std::string& v) {
             c.medium.sound_speed = to_double("medium.sound_speed", v);
           }},
          {"medium.base_density",
           [](ExperimentConfig& c, const std::string& v) {
             c.medium.base_density = to_double("medium.base_density", v);
           }},
          {"array.radius_mm",
           [](ExperimentConfig& c, const std::string& v) {
             c.array.radius_mm = to_double("array.radius_mm", v);
           }},
          {"array.n_receivers",
           [](ExperimentConfig& c, const std::string& v) {
             c.array.n_receivers = to_int("array.n_receivers", v);
           }},
          {"array.n_transmitters",
           [](ExperimentConfig& c, const std::string& v) {
             c.array.n_transmitters = to_int("array.n_transmitters", v);
           }},
          {"pulse.center_frequency",
           [](ExperimentConfig& c, const std::string& v) {
             c.pulse.center_frequency = to_double("pulse.center_frequency", v);
           }},
          {"pulse.n_cycles",
           [](ExperimentConfig& c, const std::string& v) {
             c.pulse.n_cycles = to_double("pulse.n_cycles", v);
           }},
          {"pulse.amplitude",
           [](ExperimentConfig& c, const std::string& v) {
             c.pulse.amplitude = to_double("pulse.amplitude", v);
           }},
          {"acquisition.n_samples",
           [](ExperimentConfig& c, const std::string& v) {
             c.acquisition.n_samples = to_int("acquisition.n_samples", v);
           }},
          {"acquisition.sampling_rate",
           [](ExperimentConfig& c, const std::string& v) {
             c.acquisition.sampling_rate =
                 to_double("acquisition.sampling_rate", v);
           }},
          {"sim.substeps",
           [](ExperimentConfig& c, const std::string& v) {
             c.sim.substeps_per_sample = to_int("sim.substeps", v);
           }},
          {"sim.pml_width",
           [](ExperimentConfig& c, const std::string& v) {
             c.sim.pml_width = to_int("sim.pml_width", v);
           }},
          {"sim.stencil_taps",
           [](ExperimentConfig& c, const std::string& v) {
             c.sim.stencil_taps = to_int("sim.stencil_taps", v);
           }},
          {"preprocess.bandpass_lo",
           [](ExperimentConfig& c, const std::string& v) {
             c.preprocess.bandpass_lo = to_double("preprocess.bandpass_lo", v);
           }},
          {"preprocess.bandpass_hi",
           [](ExperimentConfig& c, const std::string& v) {
             c.preprocess.bandpass_hi = to_double("preprocess.bandpass_hi", v);
           }},
          {"preprocess.bandpass_transition",
           [](ExperimentConfig& c, const std::string& v) {
             c.preprocess.bandpass_transition =
                 to_double("preprocess.bandpass_transition", v);
           }},
          {"preprocess.mask_pre",
           [](ExperimentConfig& c, const std::string& v) {
             c.preprocess.mask_pre = to_int("preprocess.mask_pre", v);
           }},
          {"preprocess.mask_post",
           [](ExperimentConfig& c, const std::string& v) {
             c.preprocess.mask_post = to_int("preprocess.mask_post", v);
           }},
          {"preprocess.sigma_factor",
           [](ExperimentConfig& c, const std::string& v) {
             c.preprocess.clip_sigma_factor =
                 to_double("preprocess.sigma_factor", v);
           }},
          {"phantom.kind",
           [](ExperimentConfig& c, const std::string& v) {
             c.phantom.kind = parse_kind(v);
           }},
          {"phantom.seed",
           [](ExperimentConfig& c, const std::string& v) {
             c.phantom.seed = to_seed("phantom.seed", v);
           }},
          {"phantom.count",
           [](ExperimentConfig& c, const std::string& v) {
             c.phantom.count = to_int("phantom.count", v);
           }},
          {"phantom.scatterer_density",
           [](ExperimentConfig& c, const std::string& v) {
             c.phantom.scatterer_density =
                 to_double("phantom.scatterer_density", v);
           }},
          {"phantom.region_lo",
           [](ExperimentConfig& c, const std::string& v) {
             c.phantom.region_lo = to_int("phantom.region_lo", v);
           }},
          {"phantom.region_hi",
           [](ExperimentConfig& c, const std::string& v) {
             c.phantom.region_hi = to_int("phantom.region_hi", v);
           }},
          {"phantom.patch",
           [](ExperimentConfig& c, const std::string& v) {
             c.phantom.patch = to_int("phantom.patch", v);
           }},
          {"phantom.circle_x",
           [](ExperimentConfig& c, const std::string& v) {
             c.phantom.circle_x = to_double("phantom.circle_x", v);
           }},
          {"phantom.circle_y",
           [](ExperimentConfig& c, const std::string& v) {
             c.phantom.circle_y = to_double("phantom.circle_y", v);
           }},
          {"phantom.circle_radius",
           [](ExperimentConfig& c, const std::string& v) {
             c.phantom.circle_radius = to_double("phantom.circle_radius", v);
           }},
          {"phantom.amplitude",
           [](ExperimentConfig& c, const std::string& v) {
             c.phantom.amplitude = to_double("phantom.amplitude", v);
           }},
          {"phantom.image_path",
           [](ExperimentConfig& c, const std::string& v) {
             c.phantom.image_path = v;
           }},
          {"phantom.enhance",
           [](ExperimentConfig& c, const std::string& v) {
             c.phantom.enhance = parse_enhance(v);
           }},
          {"phantom.s_curve_a",
           [](ExperimentConfig& c, const std::string& v) {
             c.phantom.s_curve_a = to_double("phantom.s_curve_a", v);
           }},
          {"phantom.s_curve_x",
           [](ExperimentConfig& c, const std::string& v) {
             c.phantom.s_curve_x = to_double("phantom.s_curve_x", v);
           }},
          {"phantom.point_x",
           [](ExperimentConfig& c, const std::string& v) {
             c.phantom.point_x = to_int("phantom.point_x", v);
           }},
          {"phantom.point_y",
           [](ExperimentConfig& c, const std::string& v) {
             c.phantom.point_y = to_int("phantom.point_y", v);
           }},
          {"train.alpha",
           [](ExperimentConfig& c, const std::string& v) {
             c.train.config.alpha = to_double("train.alpha", v);
           }},
          {"train.lr0",
           [](ExperimentConfig& c, const std::string& v) {
             c.train.config.lr0 = to_double("train.lr0", v);
           }},
          {"train.lr_decay",
           [](ExperimentConfig& c, const std::string& v) {
             c.train.config.lr_decay = to_double("train.lr_decay", v);
           }},
          {"train.lr_interval",
           [](ExperimentConfig& c, const std::string& v) {
             c.train.config.lr_interval = to_int("train.lr_interval", v);
           }},
          {"train.beta1",
           [](ExperimentConfig& c, const std::string& v) {
             c.train.config.beta1 = to_double("train.beta1", v);
           }},
          {"train.beta2",
           [](ExperimentConfig& c, const std::string& v) {
             c.train.config.beta2 = to_double("train.beta2", v);
           }},
          {"train.epochs",
           [](ExperimentConfig& c, const std::string& v) {
             c.train.config.epochs = to_int("train.epochs", v);
           }},
          {"train.batch_size",
           [](ExperimentConfig& c, const std::string& v) {
             c.train.config.batch_size = to_int("train.batch_size", v);
           }},
          {"train.seed",
           [](ExperimentConfig& c, const std::string& v) {
             c.train.config.seed = to_seed("train.seed", v);
           }},
          {"train.arch",
           [](ExperimentConfig& c, const std::string& v) { c.train.arch = v; }},
          {"train.checkpoint",
           [](ExperimentConfig& c, const std::string& v) {
             c.train.checkpoint = v;
           }},
          {"train.n_sims",
           [](ExperimentConfig& c, const std::string& v) {
             c.train.n_sims = to_int("train.n_sims", v);
           }},
          {"train.val_fraction",
           [](ExperimentConfig& c, const std::string& v) {
             c.train.val_fraction = to_double("train.val_fraction", v);
           }},
          {"train.iterations",
           [](ExperimentConfig& c, const std::string& v) {
             c.train.iterations = to_int("train.iterations", v);
           }},
          {"train.parallelism",
           [](ExperimentConfig& c, const std::string& v) {
             c.train.parallelism = to_int("train.parallelism", v);
           }},
          {"recon.origin_x",
           [](ExperimentConfig& c, const std::string& v) {
             c.recon.origin_x = to_double("recon.origin_x", v);
           }},
          {"recon.origin_y",
           [](ExperimentConfig& c, const std::string& v) {
             c.recon.origin_y = to_double("recon.origin_y", v);
           }},
          {"recon.width",
           [](ExperimentConfig& c, const std::string& v) {
             c.recon.width = to_double("recon.width", v);
           }},
          {"recon.height",
           [](ExperimentConfig& c, const std::string& v) {
             c.recon.height = to_double("recon.height", v);
           }},
          {"recon.nx",
           [](ExperimentConfig& c, const std::string& v) {
             c.recon.nx = to_int("recon.nx", v);
           }},
          {"recon.ny",
           [](ExperimentConfig& c, const std::string& v) {
             c.recon.ny = to_int("recon.ny", v);
           }},
          {"recon.db_lo",
           [](ExperimentConfig& c, const std::string& v) {
             c.recon.db_lo = to_double("recon.db_lo", v);
           }},
          {"recon.db_hi",
           [](ExperimentConfig& c, const std::string& v) {
             c.recon.db_hi = to_double("recon.db_hi", v);
           }},
          {"recon.mssim_window",
           [](ExperimentConfig& c, const std::string& v) {
             c.recon.mssim_window = to_int("recon.mssim_window", v);
           }},
          {"recon.interpolate",
           [](ExperimentConfig& c, const std::string& v) {
             c.recon.interpolate = to_int("recon.interpolate", v) != 0;
           }},
          {"experiment.variants",
           [](ExperimentConfig& c, const std::string& v) {
             c.experiment.variants = parse_variants(v);
           }},
          {"experiment.reference_n",
           [](ExperimentConfig& c, const std::string& v) {
             c.experiment.reference_n = to_int("experiment.reference_n", v);
           }},
          {"experiment.n_eval_phantoms",
           [](ExperimentConfig& c, const std::string& v) {
             c.experiment.n_eval_phantoms =
                 to_int("experiment.n_eval_phantoms", v);
           }},
          {"experiment.eval_seed",
           [](ExperimentConfig& c, const std::string& v) {
             c.experiment.eval_seed = to_seed("experiment.eval_seed", v);
           }},
          {"experiment.out_dir",
           [](ExperimentConfig& c, const std::string& v) {
             c.experiment.out_dir = v;
           }},
      };
  const auto it = handlers.find(key);
  if (it == handlers.end()) throw ConfigError("unknown config key: " + key);
  it->second(cfg, value);
}

ExperimentConfig load_config(const std::string& path,
                             const std::string& scale) {
  ExperimentConfig cfg = preset_config(scale);
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file: " + path);
  std::string line;
  std::string section;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    if (t.front() == '[' && t.back() == ']') {
      section = trim(t.substr(1, t.size() - 2));
      if (section.empty())
        throw ConfigError(path + ":" + std::to_string(line_no) +
                          ": empty section name");
      continue;
    }
    const std::size_t eq = t.find('=');
    if (eq == std::string::npos)
      throw ConfigError(path + ":" + std::to_string(line_no) +
                        ": expected key = value");
    const std::string key = trim(t.substr(0, eq));
    const std::string value = trim(t.substr(eq + 1));
    const std::string full = section.empty() ? key : section + "." + key;
    try {
      apply_config_key(cfg, full, value);
    } catch (const ConfigError& e) {
      throw ConfigError(path + ":" + std::to_string(line_no) + ": " +
                        e.what());
    }
  }
  return cfg;
}

std::map<std::string, std::string> config_to_map(const ExperimentConfig& cfg) {
  std::map<std::string, std::string> m;
  m["medium.grid"] = std::to_string(cfg.medium.grid);
  m["medium.pitch_mm"] = fmt(cfg.medium.pitch_mm);
  m["medium.sound_speed"] = fmt(cfg.medium.sound_speed);
  m["medium.base_density"] = fmt(cfg.medium.base_density);
  m["array.radius_mm"] = fmt(cfg.array.radius_mm);
  m["array.n_receivers"] = std::to_string(cfg.array.n_receivers);
  m["array.n_transmitters"] = std::to_string(cfg.array.n_transmitters);
  m["pulse.center_frequency"] = fmt(cfg.pulse.center_frequency);
  m["pulse.n_cycles"] = fmt(cfg.pulse.n_cycles);
  m["pulse.amplitude"] = fmt(cfg.pulse.amplitude);
  m["acquisition.n_samples"] = std::to_string(cfg.acquisition.n_samples);
  m["acquisition.sampling_rate"] = fmt(cfg.acquisition.sampling_rate);
  m["sim.substeps"] = std::to_string(cfg.sim.substeps_per_sample);
  m["sim.pml_width"] = std::to_string(cfg.sim.pml_width);
  m["sim.stencil_taps"] = std::to_string(cfg.sim.stencil_taps);
  m["preprocess.bandpass_lo"] = fmt(cfg.preprocess.bandpass_lo);
  m["preprocess.bandpass_hi"] = fmt(cfg.preprocess.bandpass_hi);
  m["preprocess.bandpass_transition"] = fmt(cfg.preprocess.bandpass_transition);
  m["preprocess.mask_pre"] = std::to_string(cfg.preprocess.mask_pre);
  m["preprocess.mask_post"] = std::to_string(cfg.preprocess.mask_post);
  m["preprocess.sigma_factor"] = fmt(cfg.preprocess.clip_sigma_factor);
  m["phantom.kind"] = format_kind(cfg.phantom.kind);
  m["phantom.seed"] = std::to_string(cfg.phantom.seed);
  m["phantom.count"] = std::to_string(cfg.phantom.count);
  m["phantom.scatterer_density"] = fmt(cfg.phantom.scatterer_density);
  m["phantom.region_lo"] = std::to_string(cfg.phantom.region_lo);
  m["phantom.region_hi"] = std::to_string(cfg.phantom.region_hi);
  m["phantom.patch"] = std::to_string(cfg.phantom.patch);
  m["phantom.circle_x"] = fmt(cfg.phantom.circle_x);
  m["phantom.circle_y"] = fmt(cfg.phantom.circle_y);
  m["phantom.circle_radius"] = fmt(cfg.phantom.circle_radius);
  m["phantom.amplitude"] = fmt(cfg.phantom.amplitude);
  m["phantom.image_path"] = cfg.phantom.image_path;
  m["phantom.enhance"] = format_enhance(cfg.phantom.enhance);
  m["phantom.s_curve_a"] = fmt(cfg.phantom.s_curve_a);
  m["phantom.s_curve_x"] = fmt(cfg.phantom.s_curve_x);
  m["phantom.point_x"] = std::to_string(cfg.phantom.point_x);
  m["phantom.point_y"] = std::to_string(cfg.phantom.point_y);
  m["train.alpha"] = fmt(cfg.train.config.alpha);
  m["train.lr0"] = fmt(cfg.train.config.lr0);
  m["train.lr_decay"] = fmt(cfg.train.config.lr_decay);
  m["train.lr_interval"] = std::to_string(cfg.train.config.lr_interval);
  m["train.beta1"] = fmt(cfg.train.config.beta1);
  m["train.beta2"] = fmt(cfg.train.config.beta2);
  m["train.epochs"] = std::to_string(cfg.train.config.epochs);
  m["train.batch_size"] = std::to_string(cfg.train.config.batch_size);
  m["train.seed"] = std::to_string(cfg.train.config.seed);
  m["train.arch"] = cfg.train.arch;
  m["train.checkpoint"] = cfg.train.checkpoint;
  m["train.n_sims"] = std::to_string(cfg.train.n_sims);
  m["train.val_fraction"] = fmt(cfg.train.val_fraction);
  m["train.iterations"] = std::to_string(cfg.train.iterations);
  m["train.parallelism"] = std::to_string(cfg.train.parallelism);
  m["recon.origin_x"] = fmt(cfg.recon.origin_x);
  m["recon.origin_y"] = fmt(cfg.recon.origin_y);
  m["recon.width"] = fmt(cfg.recon.width);
  m["recon.height"] = fmt(cfg.recon.height);
  m["recon.nx"] = std::to_string(cfg.recon.nx);
  m["recon.ny"] = std::to_string(cfg.recon.ny);
  m["recon.db_lo"] = fmt(cfg.recon.db_lo);
  m["recon.db_hi"] = fmt(cfg.recon.db_hi);
  m["recon.mssim_window"] = std::to_string(cfg.recon.mssim_window);
  m["recon.interpolate"] = cfg.recon.interpolate ? "1" : "0";
  m["experiment.variants"] = format_variants(cfg.experiment.variants);
  m["experiment.reference_n"] = std::to_string(cfg.experiment.reference_n);
  m["experiment.n_eval_phantoms"] =
      std::to_string(cfg.experiment.n_eval_phantoms);
  m["experiment.eval_seed"] = std::to_string(cfg.experiment.eval_seed);
  m["experiment.out_dir"] = cfg.experiment.out_dir;
  return m;
}

}  // namespace fastusct
