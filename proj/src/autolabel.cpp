#include "linereg/autolabel.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <memory>
#include <stdexcept>
#include <string>

#include "linereg/geometry.hpp"
#include "linereg/kdtree.hpp"
#include "linereg/rng.hpp"

namespace linereg {

namespace {

constexpr double kPi = 3.14159265358979323846;

}  // namespace

void LineFitConfig::validate() const {
  if (min_points < 2) {
    throw std::invalid_argument("LineFitConfig: min_points must be at least 2, got " +
                                std::to_string(min_points));
  }
  if (!(linearity_min >= 1.0)) {
    throw std::invalid_argument("LineFitConfig: linearity_min must be >= 1, got " +
                                std::to_string(linearity_min));
  }
  if (!(length_min > 0.0)) {
    throw std::invalid_argument("LineFitConfig: length_min must be positive, got " +
                                std::to_string(length_min));
  }
}

void AdaptationConfig::validate() const {
  if (n_perturbations < 1) {
    throw std::invalid_argument("AdaptationConfig: n_perturbations must be >= 1, got " +
                                std::to_string(n_perturbations));
  }
  if (!(vote_threshold > 0.0) || !(vote_threshold <= 1.0)) {
    throw std::invalid_argument("AdaptationConfig: vote_threshold must be in (0, 1], got " +
                                std::to_string(vote_threshold));
  }
  if (!(growth_radius > 0.0)) {
    throw std::invalid_argument("AdaptationConfig: growth_radius must be positive, got " +
                                std::to_string(growth_radius));
  }
  if (!(xy_range >= 0.0) || !(yaw_range_deg >= 0.0)) {
    throw std::invalid_argument("AdaptationConfig: perturbation ranges must be non-negative");
  }
  fit.validate();
}

std::vector<double> VoteMap::fractions() const {
  std::vector<double> out(positive.size(), 0.0);
  for (std::size_t i = 0; i < positive.size(); ++i) {
    if (total[i] > 0) out[i] = static_cast<double>(positive[i]) / static_cast<double>(total[i]);
  }
  return out;
}

PointPredictor make_net_predictor(const MicroNet<float>& net) {
  auto ws = std::make_shared<Workspace<float>>();
  return [&net, ws](const PointCloud& cloud) {
    const auto r = net.forward(cloud, *ws);
    std::vector<std::uint8_t> labels(cloud.size(), 0);
    for (Eigen::Index i = 0; i < r.seg_probs.rows(); ++i) {
      labels[static_cast<std::size_t>(i)] = r.seg_probs(i, 1) > r.seg_probs(i, 0) ? 1 : 0;
    }
    return labels;
  };
}

VoteMap geometric_adaptation(const PointCloud& cloud, const PointPredictor& predict,
                             const AdaptationConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  const std::size_t n = cloud.size();
  VoteMap votes;
  votes.positive.assign(n, 0);
  votes.total.assign(n, 0);
  Rng rng(seed);
  for (int pass = 0; pass < cfg.n_perturbations; ++pass) {
    SE3Transform pose;  // pass 0: identity — the unperturbed scan votes too
    if (pass > 0) {
      const double yaw = rng.uniform(0.0, cfg.yaw_range_deg) * kPi / 180.0;
      const double x = rng.uniform(-cfg.xy_range, cfg.xy_range);
      const double y = rng.uniform(-cfg.xy_range, cfg.xy_range);
      pose = SE3Transform::from_yaw_xy(yaw, x, y);
    }
    const PointCloud moved = apply_transform(cloud, pose);
    const auto labels = predict(moved);
    if (labels.size() != n) {
      throw std::runtime_error("geometric_adaptation: predictor returned " +
                               std::to_string(labels.size()) + " labels for " +
                               std::to_string(n) + " points");
    }
    for (std::size_t i = 0; i < n; ++i) {
      votes.total[i] += 1;
      if (labels[i] != 0) votes.positive[i] += 1;
    }
  }
  return votes;
}

std::vector<std::uint8_t> threshold_candidates(const VoteMap& votes, double threshold) {
  if (votes.positive.size() != votes.total.size()) {
    throw std::invalid_argument("threshold_candidates: inconsistent vote map");
  }
  std::vector<std::uint8_t> out(votes.positive.size(), 0);
  for (std::size_t i = 0; i < out.size(); ++i) {
    // strict: "more than" the threshold fraction
    if (votes.total[i] > 0 &&
        static_cast<double>(votes.positive[i]) > threshold * static_cast<double>(votes.total[i])) {
      out[i] = 1;
    }
  }
  return out;
}

std::vector<std::vector<int>> region_grow(const PointCloud& cloud,
                                          const std::vector<std::uint8_t>& candidates,
                                          double growth_radius, int min_points) {
  if (candidates.size() != cloud.size()) {
    throw std::invalid_argument("region_grow: mask size " + std::to_string(candidates.size()) +
                                " vs cloud size " + std::to_string(cloud.size()));
  }
  if (!(growth_radius > 0.0)) {
    throw std::invalid_argument("region_grow: growth_radius must be positive");
  }
  if (min_points < 1) {
    throw std::invalid_argument("region_grow: min_points must be >= 1");
  }

  // Index the candidate subset only; `orig` maps subset row -> cloud index.
  std::vector<int> orig;
  std::vector<Point3> sub;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    if (candidates[i] != 0) {
      orig.push_back(static_cast<int>(i));
      sub.push_back(cloud.points[i]);
    }
  }
  std::vector<std::vector<int>> clusters;
  if (orig.empty()) return clusters;

  const KdTree tree(sub);
  std::vector<char> visited(sub.size(), 0);
  for (std::size_t s = 0; s < sub.size(); ++s) {
    if (visited[s]) continue;
    // Breadth-first flood over inclusive-radius links.
    std::vector<int> cluster;
    std::deque<int> frontier{static_cast<int>(s)};
    visited[s] = 1;
    while (!frontier.empty()) {
      const int cur = frontier.front();
      frontier.pop_front();
      cluster.push_back(orig[static_cast<std::size_t>(cur)]);
      for (int nb : tree.radius(sub[static_cast<std::size_t>(cur)], growth_radius, cur)) {
        if (!visited[static_cast<std::size_t>(nb)]) {
          visited[static_cast<std::size_t>(nb)] = 1;
          frontier.push_back(nb);
        }
      }
    }
    if (static_cast<int>(cluster.size()) >= min_points) {
      std::sort(cluster.begin(), cluster.end());
      clusters.push_back(std::move(cluster));
    }
  }
  // Scanning seeds in subset order already yields clusters ordered by their
  // smallest member (the seed of each flood is its minimum-index point).
  return clusters;
}

std::optional<LineSegment> fit_line(const PointCloud& cloud, const std::vector<int>& cluster,
                                    const LineFitConfig& cfg) {
  cfg.validate();
  for (int i : cluster) {
    if (i < 0 || static_cast<std::size_t>(i) >= cloud.size()) {
      throw std::invalid_argument("fit_line: member index " + std::to_string(i) +
                                  " outside the cloud");
    }
  }
  if (static_cast<int>(cluster.size()) < cfg.min_points) return std::nullopt;

  Point3 centroid = Point3::Zero();
  for (int i : cluster) centroid += cloud.points[static_cast<std::size_t>(i)];
  centroid /= static_cast<double>(cluster.size());

  Mat3 cov = Mat3::Zero();
  for (int i : cluster) {
    const Vec3 d = cloud.points[static_cast<std::size_t>(i)] - centroid;
    cov += d * d.transpose();
  }
  cov /= static_cast<double>(cluster.size());

  Eigen::SelfAdjointEigenSolver<Mat3> eig(cov);
  if (eig.info() != Eigen::Success) return std::nullopt;
  const Vec3 evals = eig.eigenvalues();  // ascending
  const double l1 = std::max(evals(2), 0.0);
  const double l2 = std::max(evals(1), 0.0);
  if (l1 <= 1e-24) return std::nullopt;  // all points coincident
  if (l2 > 0.0 && l1 / l2 < cfg.linearity_min) return std::nullopt;
  // l2 == 0 with l1 > 0 is a perfect line: ratio treated as infinite.

  const Vec3 u = eig.eigenvectors().col(2).normalized();
  double tmin = std::numeric_limits<double>::infinity();
  double tmax = -std::numeric_limits<double>::infinity();
  for (int i : cluster) {
    const double t = (cloud.points[static_cast<std::size_t>(i)] - centroid).dot(u);
    tmin = std::min(tmin, t);
    tmax = std::max(tmax, t);
  }
  if (!(tmax - tmin >= cfg.length_min)) return std::nullopt;

  LineSegment seg;
  seg.e0 = centroid + tmin * u;
  seg.e1 = centroid + tmax * u;
  seg.direction = u;  // e0 sits at the minimal projection, so e1 - e0 is +u
  seg.member_indices = cluster;
  return seg;
}

std::vector<std::vector<LineSegment>> auto_label_round(std::vector<PointCloud>& clouds,
                                                       const PointPredictor& predict,
                                                       const AdaptationConfig& cfg,
                                                       std::uint64_t seed) {
  cfg.validate();
  const Rng root(seed);
  std::vector<std::vector<LineSegment>> all_lines;
  all_lines.reserve(clouds.size());
  for (std::size_t ci = 0; ci < clouds.size(); ++ci) {
    PointCloud& cloud = clouds[ci];
    const auto votes =
        geometric_adaptation(cloud, predict, cfg, root.derive(ci).seed());
    const auto candidates = threshold_candidates(votes, cfg.vote_threshold);
    const auto clusters =
        region_grow(cloud, candidates, cfg.growth_radius, cfg.fit.min_points);
    std::vector<LineSegment> lines;
    cloud.labels.assign(cloud.size(), 0);
    for (const auto& cluster : clusters) {
      auto seg = fit_line(cloud, cluster, cfg.fit);
      if (!seg) continue;
      for (int i : seg->member_indices) cloud.labels[static_cast<std::size_t>(i)] = 1;
      lines.push_back(std::move(*seg));
    }
    all_lines.push_back(std::move(lines));
  }
  return all_lines;
}

}  // namespace linereg
