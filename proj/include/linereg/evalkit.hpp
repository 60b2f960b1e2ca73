#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "linereg/rng.hpp"
#include "linereg/types.hpp"

namespace linereg {

struct PoseError {
  double rte = 0.0;  // relative translation error, meters
  double rre = 0.0;  // relative rotation error, degrees, in [0, 180]
};

// Errors of the relative transform D = gt^-1 * estimate:
//   rte = |translation(D)|  (equals |t_est - t_gt| since rotations preserve
//         norms), rre = acos((trace(rotation(D)) - 1) / 2) in degrees, the
//         acos argument clamped to [-1, 1].
PoseError pose_error(const SE3Transform& estimate, const SE3Transform& ground_truth);

// Strict thresholds: rte < 2.0 m AND rre < 5.0 deg.
bool is_success(const PoseError& err);

struct BenchmarkPair {
  PointCloud source;
  PointCloud target;
  SE3Transform gt;  // maps source points into the target frame
};

struct PairOutcome {
  bool solved = false;   // the pipeline produced a pose
  bool success = false;  // solved && is_success(error)
  PoseError error;       // meaningful only when solved
};

// Mean and population standard deviation over a set of pose errors.
struct ErrorStats {
  std::size_t count = 0;
  double mean_rte = 0.0;
  double std_rte = 0.0;
  double mean_rre = 0.0;
  double std_rre = 0.0;
};

struct BenchmarkReport {
  std::vector<PairOutcome> outcomes;  // one per input pair, input order
  std::size_t pairs = 0;
  std::size_t successes = 0;
  double recall = 0.0;       // successes / pairs
  ErrorStats success_stats;  // over successful pairs only (headline numbers)
  ErrorStats solved_stats;   // over every pair that produced a pose
};

// A pipeline maps a (perturbed source, target) pair to a pose estimate, or
// nullopt for a failure it detected itself. Thrown RegistrationError
// subclasses are also recorded as failures; other exceptions propagate.
using RegistrationPipeline =
    std::function<std::optional<SE3Transform>(const PointCloud& source, const PointCloud& target)>;

// Draws the random pose applied to a source frame before registration
// (e.g. full-circle yaw). Receives a per-pair deterministic stream.
using PerturbationSampler = std::function<SE3Transform(Rng&)>;

// The standard perturbation family: yaw uniform in [0, yaw_range_deg)
// degrees, x and y translation uniform in [-xy_range, xy_range] meters
// (draw order: yaw, x, y). Defaults cover the full circle and 20 m.
PerturbationSampler planar_perturbation(double yaw_range_deg = 360.0, double xy_range = 20.0);

// For every pair: sample a perturbation P from the pair's derived stream,
// re-pose the source cloud by P, run the pipeline on (P*source, target), and
// score the estimate against the effective ground truth gt * P^-1. Pairs are
// processed in input order; all randomness derives from `seed`, so the report
// is bit-identical across runs.
BenchmarkReport run_benchmark(const std::vector<BenchmarkPair>& pairs,
                              const RegistrationPipeline& pipeline,
                              const PerturbationSampler& perturbation, std::uint64_t seed);

// Deterministic JSON rendering (stable key order, shortest-round-trip
// numbers): byte-identical for equal reports.
std::string report_to_json(const BenchmarkReport& report);

// Aligned-column text table: one row of success-only statistics, one row of
// all-solved statistics.
std::string report_to_table(const BenchmarkReport& report);

}  // namespace linereg
