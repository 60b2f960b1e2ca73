#include "linereg/evalkit.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>

#include <json.hpp>

#include "linereg/geometry.hpp"
#include "linereg/register.hpp"
#include "linereg/rng.hpp"

namespace linereg {

PoseError pose_error(const SE3Transform& estimate, const SE3Transform& ground_truth) {
  if (!estimate.valid(1e-6) || !ground_truth.valid(1e-6)) {
    throw std::invalid_argument("pose_error: inputs must be rigid transforms");
  }
  const SE3Transform rel = ground_truth.inverse().compose(estimate);
  PoseError err;
  err.rte = rel.translation.norm();
  const double arg = std::clamp((rel.rotation.trace() - 1.0) / 2.0, -1.0, 1.0);
  err.rre = std::acos(arg) * 180.0 / std::numbers::pi;
  return err;
}

bool is_success(const PoseError& err) { return err.rte < 2.0 && err.rre < 5.0; }

namespace {

ErrorStats compute_stats(const std::vector<PairOutcome>& outcomes, bool successful_only) {
  ErrorStats stats;
  double sum_rte = 0.0;
  double sum_rre = 0.0;
  for (const auto& o : outcomes) {
    if (!o.solved || (successful_only && !o.success)) continue;
    ++stats.count;
    sum_rte += o.error.rte;
    sum_rre += o.error.rre;
  }
  if (stats.count == 0) return stats;
  const double n = static_cast<double>(stats.count);
  stats.mean_rte = sum_rte / n;
  stats.mean_rre = sum_rre / n;
  double var_rte = 0.0;
  double var_rre = 0.0;
  for (const auto& o : outcomes) {
    if (!o.solved || (successful_only && !o.success)) continue;
    var_rte += (o.error.rte - stats.mean_rte) * (o.error.rte - stats.mean_rte);
    var_rre += (o.error.rre - stats.mean_rre) * (o.error.rre - stats.mean_rre);
  }
  stats.std_rte = std::sqrt(var_rte / n);
  stats.std_rre = std::sqrt(var_rre / n);
  return stats;
}

}  // namespace

PerturbationSampler planar_perturbation(double yaw_range_deg, double xy_range) {
  if (!(yaw_range_deg >= 0.0) || !(xy_range >= 0.0)) {
    throw std::invalid_argument("planar_perturbation: ranges must be >= 0");
  }
  return [yaw_range_deg, xy_range](Rng& rng) {
    const double yaw = rng.uniform(0.0, yaw_range_deg) * std::numbers::pi / 180.0;
    const double x = rng.uniform(-xy_range, xy_range);
    const double y = rng.uniform(-xy_range, xy_range);
    return SE3Transform::from_yaw_xy(yaw, x, y);
  };
}

BenchmarkReport run_benchmark(const std::vector<BenchmarkPair>& pairs,
                              const RegistrationPipeline& pipeline,
                              const PerturbationSampler& perturbation, std::uint64_t seed) {
  if (!pipeline) throw std::invalid_argument("run_benchmark: pipeline is empty");
  if (!perturbation) throw std::invalid_argument("run_benchmark: perturbation sampler is empty");

  BenchmarkReport report;
  report.pairs = pairs.size();
  report.outcomes.reserve(pairs.size());

  Rng root(seed);
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    Rng stream = root.derive(i);
    const SE3Transform pert = perturbation(stream);
    if (!pert.valid(1e-6)) {
      throw std::invalid_argument("run_benchmark: perturbation sampler returned a non-rigid pose");
    }
    const PointCloud moved = apply_transform(pairs[i].source, pert);
    const SE3Transform effective_gt = pairs[i].gt.compose(pert.inverse());

    PairOutcome outcome;
    std::optional<SE3Transform> estimate;
    try {
      estimate = pipeline(moved, pairs[i].target);
    } catch (const RegistrationError&) {
      estimate.reset();
    }
    if (estimate.has_value()) {
      outcome.solved = true;
      outcome.error = pose_error(*estimate, effective_gt);
      outcome.success = is_success(outcome.error);
      if (outcome.success) ++report.successes;
    }
    report.outcomes.push_back(outcome);
  }

  report.recall = report.pairs == 0
                      ? 0.0
                      : static_cast<double>(report.successes) / static_cast<double>(report.pairs);
  report.success_stats = compute_stats(report.outcomes, true);
  report.solved_stats = compute_stats(report.outcomes, false);
  return report;
}

namespace {

nlohmann::ordered_json stats_to_json(const ErrorStats& s) {
  nlohmann::ordered_json j;
  j["count"] = s.count;
  j["mean_rte_m"] = s.mean_rte;
  j["std_rte_m"] = s.std_rte;
  j["mean_rre_deg"] = s.mean_rre;
  j["std_rre_deg"] = s.std_rre;
  return j;
}

}  // namespace

std::string report_to_json(const BenchmarkReport& report) {
  nlohmann::ordered_json j;
  j["pairs"] = report.pairs;
  j["successes"] = report.successes;
  j["recall"] = report.recall;
  j["success_stats"] = stats_to_json(report.success_stats);
  j["solved_stats"] = stats_to_json(report.solved_stats);
  nlohmann::ordered_json outcomes = nlohmann::ordered_json::array();
  for (const auto& o : report.outcomes) {
    nlohmann::ordered_json row;
    row["solved"] = o.solved;
    row["success"] = o.success;
    if (o.solved) {
      row["rte_m"] = o.error.rte;
      row["rre_deg"] = o.error.rre;
    }
    outcomes.push_back(row);
  }
  j["outcomes"] = std::move(outcomes);
  return j.dump(2) + "\n";
}

std::string report_to_table(const BenchmarkReport& report) {
  char line[160];
  std::string out;
  std::snprintf(line, sizeof(line), "%-12s %6s %6s %13s %12s %14s %13s %8s\n", "scope", "pairs",
                "used", "RTE mean (m)", "RTE std (m)", "RRE mean (deg)", "RRE std (deg)",
                "recall");
  out += line;
  std::snprintf(line, sizeof(line), "%-12s %6zu %6zu %13.6f %12.6f %14.6f %13.6f %8.4f\n",
                "successful", report.pairs, report.success_stats.count,
                report.success_stats.mean_rte, report.success_stats.std_rte,
                report.success_stats.mean_rre, report.success_stats.std_rre, report.recall);
  out += line;
  std::snprintf(line, sizeof(line), "%-12s %6zu %6zu %13.6f %12.6f %14.6f %13.6f %8s\n",
                "all solved", report.pairs, report.solved_stats.count,
                report.solved_stats.mean_rte, report.solved_stats.std_rte,
                report.solved_stats.mean_rre, report.solved_stats.std_rre, "-");
  out += line;
  return out;
}

}  // namespace linereg
