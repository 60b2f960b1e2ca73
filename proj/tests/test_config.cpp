#include <doctest.h>

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>

#include "linereg/config.hpp"
#include "linereg/io.hpp"

using namespace linereg;
namespace fs = std::filesystem;

TEST_CASE("default config validates and round-trips exactly") {
  const PipelineConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  const std::string text = save_config(cfg);
  const PipelineConfig back = parse_config(text);
  CHECK(back == cfg);
  CHECK(save_config(back) == text);  // byte-stable
}

TEST_CASE("a fully customized config round-trips exactly") {
  PipelineConfig cfg;
  cfg.voxel_size = 0.17500000000000002;  // double with no short decimal form
  cfg.train_points = 1024;
  cfg.eval_points = 8192;
  cfg.gen_scenes = 33;
  cfg.feature_k = 12;
  cfg.net.k = 8;
  cfg.net.stride = 2;
  cfg.net.channels = 24;
  cfg.net.descriptor_dim = 8;
  cfg.net.scale_invariant_first_layer = true;
  cfg.loss.delta_same = 0.05;
  cfg.loss.delta_diff = 1.25;
  cfg.loss.omega = 3.5;
  cfg.learning_rate = 2.5e-4;
  cfg.pretrain_epochs = 12;
  cfg.train_epochs = 7;
  cfg.holdout_fraction = 0.25;
  cfg.adaptation.n_perturbations = 9;
  cfg.adaptation.xy_range = 11.5;
  cfg.adaptation.yaw_range_deg = 180.0;
  cfg.adaptation.vote_threshold = 0.6;
  cfg.adaptation.growth_radius = 0.4;
  cfg.adaptation.iterations = 2;
  cfg.adaptation.fit.min_points = 8;
  cfg.adaptation.fit.linearity_min = 6.0;
  cfg.adaptation.fit.length_min = 0.3;
  cfg.match.source = DescriptorSource::Learned;
  cfg.match.threshold = 0.1;
  cfg.coarse_yaw_steps = 72;
  cfg.solver.max_iterations = 80;
  cfg.solver.step_tolerance = 1e-10;
  cfg.solver.initial_damping = 1e-3;
  cfg.solver.outlier_distance = 0.75;
  cfg.solver.outlier_rounds = 5;
  cfg.eval_pairs = 10;
  cfg.eval_yaw_range_deg = 90.0;
  cfg.eval_xy_range = 5.0;
  cfg.eval_scene.n_lines = 5;
  cfg.eval_scene.noise_sigma = 0.01;
  cfg.seed = 0xFFFFFFFFFFFFFFFFull;
  CHECK_NOTHROW(cfg.validate());

  const PipelineConfig back = parse_config(save_config(cfg));
  CHECK(back == cfg);
  CHECK(back != PipelineConfig{});
}

TEST_CASE("saved configs are grouped into the documented sections") {
  const std::string text = save_config(PipelineConfig{});
  for (const char* section : {"[data]", "[features]", "[network]", "[loss]", "[training]",
                              "[adaptation]", "[matching]", "[registration]", "[eval]", "[run]"}) {
    CAPTURE(section);
    const auto first = text.find(section);
    REQUIRE(first != std::string::npos);
    CHECK(text.find(section, first + 1) == std::string::npos);  // exactly once
  }
  CHECK(text.find("voxel_size = 0.25") != std::string::npos);
  CHECK(text.find("descriptor_source = geometric") != std::string::npos);
  CHECK(text.find("scale_invariant_first_layer = false") != std::string::npos);
  CHECK(text.find("seed = 0") != std::string::npos);
}

TEST_CASE("partial files override only what they mention") {
  const PipelineConfig cfg = parse_config(
      "# comment\n"
      "[run]\n"
      "seed = 7\n"
      "\n"
      "; another comment\n"
      "[registration]\n"
      "  max_iterations = 99  \n");
  CHECK(cfg.seed == 7);
  CHECK(cfg.solver.max_iterations == 99);
  CHECK(cfg.voxel_size == PipelineConfig{}.voxel_size);
}

TEST_CASE("config parse errors name the offending line") {
  auto check_line = [](const std::string& text, const char* needle) {
    try {
      parse_config(text);
      FAIL("expected FileFormatError for: ", text);
    } catch (const FileFormatError& e) {
      CHECK(std::string(e.what()).find(needle) != std::string::npos);
    }
  };
  check_line("[nosuch]\n", "line 1");
  check_line("[data]\nbogus = 1\n", "line 2");
  check_line("[data]\nvoxel_size = 0.2\nvoxel_size = 0.3\n", "duplicate");
  check_line("voxel_size = 0.2\n", "before any section");
  check_line("[data\n", "unterminated");
  check_line("[data]\nvoxel_size\n", "key = value");
  check_line("[data]\nvoxel_size = fast\n", "not a number");
  check_line("[data]\ntrain_points = 2.5\n", "not an integer");
  check_line("[network]\nscale_invariant_first_layer = yes\n", "'true' or 'false'");
  check_line("[matching]\ndescriptor_source = both\n", "'geometric' or 'learned'");
}

TEST_CASE("config validation re-checks every stage") {
  PipelineConfig cfg;
  SUBCASE("own fields") {
    cfg.voxel_size = 0.0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  }
  SUBCASE("holdout bounds") {
    cfg.holdout_fraction = 1.0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  }
  SUBCASE("network propagates") {
    cfg.net.k = 0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  }
  SUBCASE("solver propagates") {
    cfg.solver.step_tolerance = -1.0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  }
  SUBCASE("scene propagates") {
    cfg.eval_scene.points_per_line = 1;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  }
}

TEST_CASE("the registration view mirrors the adaptation extraction settings") {
  PipelineConfig cfg;
  cfg.adaptation.growth_radius = 0.33;
  cfg.adaptation.fit.min_points = 9;
  cfg.match.threshold = 0.2;
  cfg.coarse_yaw_steps = 18;
  cfg.solver.outlier_rounds = 1;
  const PairRegistrationConfig reg = cfg.registration();
  CHECK(reg.extract.growth_radius == 0.33);
  CHECK(reg.extract.fit.min_points == 9);
  CHECK(reg.match.threshold == 0.2);
  CHECK(reg.coarse_yaw_steps == 18);
  CHECK(reg.solver.outlier_rounds == 1);
}

TEST_CASE("config file round-trip through disk") {
  const fs::path dir = fs::temp_directory_path() / "linereg_config_test";
  fs::create_directories(dir);
  const fs::path p = dir / "pipeline.ini";
  PipelineConfig cfg;
  cfg.seed = 424242;
  cfg.match.source = DescriptorSource::Learned;
  write_config(p, cfg);
  const PipelineConfig back = load_config(p);
  CHECK(back == cfg);
  CHECK_THROWS_AS(load_config(dir / "missing.ini"), FileFormatError);
  fs::remove_all(dir);
}
