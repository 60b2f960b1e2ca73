#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "linereg/autolabel.hpp"
#include "linereg/losses.hpp"
#include "linereg/micronet.hpp"
#include "linereg/pipeline.hpp"
#include "linereg/register.hpp"
#include "linereg/synthdata.hpp"

namespace linereg {

// Every tunable of the pipeline, grouped per stage. Serialized as an
// INI-style document: one [section] per group below, `key = value` entries,
// full-line comments starting with '#' or ';'. Unknown sections or keys are
// rejected on load; keys omitted from a file keep their defaults; doubles are
// printed with 17 significant digits so load(save(cfg)) == cfg exactly.
struct PipelineConfig {
  // [data] — ingestion budgets
  double voxel_size = 0.25;  // meters
  int train_points = 2048;   // per-cloud cap during training
  int eval_points = 4096;    // per-cloud cap during evaluation
  int gen_scenes = 200;      // synthetic dataset size for `gen`

  // [features]
  int feature_k = 20;  // neighbors of the scale-invariant point feature

  // [network]
  NetConfig net;

  // [loss]
  LossConfig loss;

  // [training]
  double learning_rate = 0.001;  // halved every 15 epochs
  int pretrain_epochs = 50;
  int train_epochs = 15;           // per geometric-adaptation round
  double holdout_fraction = 0.2;   // validation share of the dataset

  // [adaptation]
  AdaptationConfig adaptation;

  // [matching]
  MatchConfig match;

  // [registration]
  int coarse_yaw_steps = 36;
  SolverConfig solver;

  // [eval] — synthetic benchmark
  int eval_pairs = 100;
  double eval_yaw_range_deg = 360.0;  // perturbation yaw range
  double eval_xy_range = 20.0;        // perturbation translation range, meters
  LineSceneConfig eval_scene;

  // [run]
  std::uint64_t seed = 0;

  bool operator==(const PipelineConfig&) const = default;

  // Re-runs every sub-config's validation plus the budget/range checks here.
  void validate() const;  // throws std::invalid_argument

  // The pair-registration view of this configuration: line extraction reuses
  // the adaptation's growth radius and fit gates.
  PairRegistrationConfig registration() const;
};

// Serialization. Parse errors are FileFormatError naming `origin` (the file
// path, or "<string>") and the 1-based line.
std::string save_config(const PipelineConfig& cfg);
PipelineConfig parse_config(const std::string& text, const std::string& origin = "<string>");
PipelineConfig load_config(const std::filesystem::path& path);
void write_config(const std::filesystem::path& path, const PipelineConfig& cfg);  // atomic

}  // namespace linereg
