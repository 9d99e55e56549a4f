#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <map>
#include <string>

#include "fastusct/config.hpp"
#include "fastusct/errors.hpp"

using namespace fastusct;

TEST_CASE("variant lists round trip and reject malformed entries") {
  const std::vector<Variant> v = parse_variants("2,4,sep;8,1,nosep");
  REQUIRE(v.size() == 2);
  CHECK(v[0].n == 2);
  CHECK(v[0].p == 4);
  CHECK(v[0].separation);
  CHECK(v[1].n == 8);
  CHECK(v[1].p == 1);
  CHECK(!v[1].separation);
  CHECK(format_variants(v) == "2,4,sep;8,1,nosep");
  CHECK(parse_variants(format_variants(v)).size() == 2);

  CHECK_THROWS_AS(parse_variants(""), ConfigError);
  CHECK_THROWS_AS(parse_variants("2,4"), ConfigError);
  CHECK_THROWS_AS(parse_variants("2,4,maybe"), ConfigError);
  CHECK_THROWS_AS(parse_variants("x,4,sep"), ConfigError);
}

TEST_CASE("desk preset is the quarter-scale default") {
  const ExperimentConfig cfg = preset_config("desk");
  CHECK(cfg.medium.grid == 256);
  CHECK(cfg.medium.pitch_mm == 0.5);
  CHECK(cfg.medium.sound_speed == 1450.0);
  CHECK(cfg.array.radius_mm == 50.0);
  CHECK(cfg.array.n_receivers == 64);
  CHECK(cfg.array.n_transmitters == 8);
  CHECK(cfg.pulse.center_frequency == 0.5);
  CHECK(cfg.acquisition.n_samples == 1024);
  CHECK(cfg.acquisition.sampling_rate == 10.0);
  CHECK(cfg.preprocess.bandpass_lo == 0.125);
  CHECK(cfg.preprocess.bandpass_hi == 2.0);
  CHECK(cfg.preprocess.bandpass_transition == 0.0625);
  CHECK(cfg.preprocess.mask_pre == 25);
  CHECK(cfg.preprocess.mask_post == 30);
  CHECK(cfg.train.arch == "16,32,64");
  CHECK(cfg.train.config.epochs == 20);
  CHECK(cfg.train.iterations == 2);
  CHECK(cfg.train.parallelism == 4);
  CHECK(cfg.recon.nx == 128);
  CHECK(!cfg.recon.interpolate);
  CHECK(cfg.recon.mssim_window == 7);
  CHECK(format_variants(cfg.experiment.variants) == "2,4,sep;8,1,nosep");
  CHECK(cfg.experiment.n_eval_phantoms == 10);
}

TEST_CASE("paper preset mirrors the full-scale protocol") {
  const ExperimentConfig cfg = preset_config("paper");
  CHECK(cfg.medium.grid == 1024);
  CHECK(cfg.medium.pitch_mm == 0.125);
  CHECK(cfg.array.n_receivers == 256);
  CHECK(cfg.array.n_transmitters == 16);
  CHECK(cfg.pulse.center_frequency == 2.0);
  CHECK(cfg.acquisition.n_samples == 4096);
  CHECK(cfg.acquisition.sampling_rate == 40.0);
  CHECK(cfg.preprocess.bandpass_lo == 0.5);
  CHECK(cfg.preprocess.bandpass_hi == 8.0);
  CHECK(cfg.preprocess.mask_pre == 100);
  CHECK(cfg.preprocess.mask_post == 120);
  CHECK(cfg.phantom.region_lo == -256);
  CHECK(cfg.phantom.region_hi == 256);
  CHECK(cfg.phantom.circle_radius == 192.0);
  CHECK(cfg.train.n_sims == 100);
  CHECK(cfg.train.iterations == 4);
  CHECK(cfg.train.config.epochs == 100);
  CHECK(cfg.recon.nx == 256);
  CHECK(cfg.recon.interpolate);
  CHECK(format_variants(cfg.experiment.variants) == "4,4,sep;16,1,nosep");
  CHECK(cfg.experiment.n_eval_phantoms == 50);

  CHECK_THROWS_AS(preset_config("bench"), ConfigError);
}

TEST_CASE("apply_config_key parses values and names bad keys") {
  ExperimentConfig cfg = preset_config("desk");
  apply_config_key(cfg, "medium.grid", "128");
  CHECK(cfg.medium.grid == 128);
  apply_config_key(cfg, "phantom.kind", "scatterer_clump");
  CHECK(cfg.phantom.kind == PhantomKind::scatterer_clump);
  apply_config_key(cfg, "phantom.enhance", "sharpen");
  CHECK(cfg.phantom.enhance == Enhance::sharpen);
  apply_config_key(cfg, "recon.interpolate", "1");
  CHECK(cfg.recon.interpolate);
  apply_config_key(cfg, "experiment.variants", "1,1,nosep");
  REQUIRE(cfg.experiment.variants.size() == 1);
  CHECK(!cfg.experiment.variants[0].separation);
  apply_config_key(cfg, "train.seed", "12345");
  CHECK(cfg.train.config.seed == 12345);

  try {
    apply_config_key(cfg, "medium.bogus", "1");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("medium.bogus") != std::string::npos);
  }
  CHECK_THROWS_AS(apply_config_key(cfg, "medium.grid", "abc"), ConfigError);
  CHECK_THROWS_AS(apply_config_key(cfg, "medium.grid", "1.5"), ConfigError);
  CHECK_THROWS_AS(apply_config_key(cfg, "phantom.kind", "blob"), ConfigError);
  CHECK_THROWS_AS(apply_config_key(cfg, "phantom.enhance", "blur"),
                  ConfigError);
  CHECK_THROWS_AS(apply_config_key(cfg, "train.seed", "-1x"), ConfigError);
}

TEST_CASE("config maps echo every key and round trip exactly") {
  ExperimentConfig cfg = preset_config("desk");
  apply_config_key(cfg, "medium.grid", "64");
  apply_config_key(cfg, "phantom.kind", "image");
  apply_config_key(cfg, "phantom.image_path", "subject.png");
  apply_config_key(cfg, "phantom.enhance", "s_curve");
  apply_config_key(cfg, "train.checkpoint", "model.usct");
  apply_config_key(cfg, "experiment.variants", "4,2,sep");
  apply_config_key(cfg, "recon.interpolate", "1");

  const std::map<std::string, std::string> m = config_to_map(cfg);
  CHECK(m.at("medium.grid") == "64");
  CHECK(m.at("phantom.kind") == "image");
  CHECK(m.at("phantom.enhance") == "s_curve");
  CHECK(m.at("experiment.variants") == "4,2,sep");
  CHECK(m.at("recon.interpolate") == "1");

  ExperimentConfig rebuilt = preset_config("desk");
  for (const auto& [key, value] : m) apply_config_key(rebuilt, key, value);
  CHECK(config_to_map(rebuilt) == m);

  // The mapped region matches the struct view.
  const ReconRegion region = cfg.recon.region();
  CHECK(region.origin.x == cfg.recon.origin_x);
  CHECK(region.width == cfg.recon.width);
  CHECK(region.nx == cfg.recon.nx);
}

TEST_CASE("load_config reads sections and comments, reporting line numbers") {
  const std::string path = "test_config_file.ini";
  {
    std::ofstream out(path);
    out << "# comment line\n";
    out << "\n";
    out << "[medium]\n";
    out << "grid = 64\n";
    out << "pitch_mm = 1.0\n";
    out << "[train]\n";
    out << "epochs = 3\n";
    out << "arch = 4,8\n";
    out << "[experiment]\n";
    out << "variants = 1,1,nosep;2,2,sep\n";
  }
  const ExperimentConfig cfg = load_config(path, "desk");
  CHECK(cfg.medium.grid == 64);
  CHECK(cfg.medium.pitch_mm == 1.0);
  CHECK(cfg.train.config.epochs == 3);
  CHECK(cfg.train.arch == "4,8");
  CHECK(cfg.experiment.variants.size() == 2);
  // Untouched keys keep the desk preset.
  CHECK(cfg.array.n_receivers == 64);

  {
    std::ofstream out(path);
    out << "[medium]\n";
    out << "grid 64\n";  // missing '='
  }
  try {
    load_config(path, "desk");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    CHECK(msg.find(path + ":2") != std::string::npos);
  }

  {
    std::ofstream out(path);
    out << "[]\n";
  }
  CHECK_THROWS_AS(load_config(path, "desk"), ConfigError);

  {
    std::ofstream out(path);
    out << "[medium]\n";
    out << "bogus = 1\n";
  }
  try {
    load_config(path, "desk");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    CHECK(msg.find(":2") != std::string::npos);
    CHECK(msg.find("medium.bogus") != std::string::npos);
  }

  std::remove(path.c_str());
  CHECK_THROWS_AS(load_config("no_such_config.ini", "desk"), IoError);
}
