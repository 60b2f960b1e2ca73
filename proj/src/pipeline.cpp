#include "linereg/pipeline.hpp"

#include <stdexcept>
#include <string>
#include <utility>

namespace linereg {

void ExtractConfig::validate() const {
  if (!(growth_radius > 0.0)) {
    throw std::invalid_argument("ExtractConfig: growth_radius must be positive");
  }
  fit.validate();
}

void MatchConfig::validate() const {
  if (!(threshold > 0.0)) {
    throw std::invalid_argument("MatchConfig: threshold must be positive");
  }
}

void PairRegistrationConfig::validate() const {
  extract.validate();
  match.validate();
  if (coarse_yaw_steps < 1) {
    throw std::invalid_argument("PairRegistrationConfig: coarse_yaw_steps must be >= 1");
  }
  solver.validate();
}

std::vector<LineSegment> extract_lines(const PointCloud& cloud, const ExtractConfig& cfg) {
  cfg.validate();
  cloud.check_channels();
  if (!cloud.has_labels()) {
    throw std::invalid_argument("extract_lines: cloud has no label channel");
  }
  std::vector<std::uint8_t> candidates(cloud.size());
  for (std::size_t i = 0; i < cloud.size(); ++i) candidates[i] = cloud.labels[i] == 1 ? 1 : 0;

  std::vector<LineSegment> lines;
  for (const auto& cluster :
       region_grow(cloud, candidates, cfg.growth_radius, cfg.fit.min_points)) {
    if (auto seg = fit_line(cloud, cluster, cfg.fit)) {
      lines.push_back(std::move(*seg));
    }
  }
  return lines;
}

PairRegistrationResult register_pair(const PointCloud& source, const PointCloud& target,
                                     const PairRegistrationConfig& cfg) {
  cfg.validate();

  PairRegistrationResult out;
  out.source_lines = extract_lines(source, cfg.extract);
  out.target_lines = extract_lines(target, cfg.extract);

  if (cfg.match.source == DescriptorSource::Geometric) {
    describe_lines_geometric(source, out.source_lines);
    describe_lines_geometric(target, out.target_lines);
  } else {
    describe_lines(source, out.source_lines);
    describe_lines(target, out.target_lines);
  }
  out.matches = match_lines(out.source_lines, out.target_lines, cfg.match.threshold);
  if (out.matches.size() < 2) {
    throw RegistrationFailedError("register_pair: only " + std::to_string(out.matches.size()) +
                                  " line match(es) survived the descriptor gate");
  }

  RegistrationProblem problem;
  problem.matches.reserve(out.matches.size());
  for (const auto& m : out.matches) {
    const auto& src = out.source_lines[static_cast<std::size_t>(m.source)];
    const auto& tgt = out.target_lines[static_cast<std::size_t>(m.target)];
    LineCorrespondence corr;
    corr.source_points.reserve(src.member_indices.size());
    for (int i : src.member_indices) {
      corr.source_points.push_back(source.points[static_cast<std::size_t>(i)]);
    }
    corr.target_e0 = tgt.e0;
    corr.target_e1 = tgt.e1;
    problem.matches.push_back(std::move(corr));
  }
  problem.initial = coarse_initialize(problem, cfg.coarse_yaw_steps);
  out.registration = register_with_outlier_rejection(problem, cfg.solver);
  out.pose = out.registration.estimate;
  return out;
}

}  // namespace linereg
