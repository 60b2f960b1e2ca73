#include "linereg/linefeat.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "linereg/geometry.hpp"
#include "linereg/kernels/kernels.hpp"

namespace linereg {

void describe_lines(const PointCloud& cloud, std::vector<LineSegment>& segments) {
  if (!cloud.has_descriptors()) {
    throw std::invalid_argument("describe_lines: cloud has no per-point descriptors");
  }
  const Eigen::Index n = cloud.descriptors.rows();
  const Eigen::Index d = cloud.descriptors.cols();
  for (std::size_t s = 0; s < segments.size(); ++s) {
    auto& seg = segments[s];
    if (seg.member_indices.empty()) {
      throw std::invalid_argument("describe_lines: segment " + std::to_string(s) +
                                  " has no members");
    }
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(d);
    for (int i : seg.member_indices) {
      if (i < 0 || static_cast<Eigen::Index>(i) >= n) {
        throw std::invalid_argument("describe_lines: member index " + std::to_string(i) +
                                    " outside the descriptor matrix");
      }
      const auto row = cloud.descriptors.row(i).cast<double>();
      if (std::abs(row.norm() - 1.0) > 1e-3) {
        throw std::invalid_argument("describe_lines: descriptor row " + std::to_string(i) +
                                    " is not unit norm");
      }
      mean += row.transpose();
    }
    mean /= static_cast<double>(seg.member_indices.size());
    const double norm = mean.norm();
    if (norm < 1e-9) {
      throw std::runtime_error("describe_lines: segment " + std::to_string(s) +
                               " member descriptors cancel to a zero mean");
    }
    seg.mean_descriptor = (mean / norm).cast<float>();
  }
}

Eigen::Vector4f geometric_line_descriptor(const PointCloud& cloud, const LineSegment& segment) {
  if (segment.member_indices.empty()) {
    throw std::invalid_argument("geometric_line_descriptor: segment has no members");
  }
  const Vec3 axis = segment.e1 - segment.e0;
  const double length = axis.norm();
  if (length < 1e-9) {
    throw std::invalid_argument("geometric_line_descriptor: zero-length segment");
  }
  const Vec3 u = axis / length;

  const std::size_t n = segment.member_indices.size();
  std::vector<double> proj(n);
  double perp_sq = 0.0;
  double proj_mean = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const int i = segment.member_indices[k];
    if (i < 0 || static_cast<std::size_t>(i) >= cloud.size()) {
      throw std::invalid_argument("geometric_line_descriptor: member index " + std::to_string(i) +
                                  " outside the cloud");
    }
    const Vec3 q = cloud.points[static_cast<std::size_t>(i)] - segment.e0;
    const double t = q.dot(u);
    proj[k] = t;
    perp_sq += (q - t * u).squaredNorm();
    proj_mean += t;
  }
  proj_mean /= static_cast<double>(n);
  double centered_sq = 0.0, centered_abs = 0.0;
  for (double t : proj) {
    const double c = t - proj_mean;
    centered_sq += c * c;
    centered_abs += std::abs(c);
  }
  const double inv_n = 1.0 / static_cast<double>(n);
  Eigen::Vector4f out;
  out(0) = static_cast<float>(length);
  out(1) = static_cast<float>(std::sqrt(perp_sq * inv_n));
  out(2) = static_cast<float>(std::sqrt(centered_sq * inv_n) / length);
  out(3) = static_cast<float>(centered_abs * inv_n / length);
  return out;
}

void describe_lines_geometric(const PointCloud& cloud, std::vector<LineSegment>& segments) {
  for (auto& seg : segments) {
    seg.mean_descriptor = geometric_line_descriptor(cloud, seg);
  }
}

namespace {

double descriptor_l1(const LineSegment& a, const LineSegment& b) {
  return static_cast<double>(kernels::l1_distance(a.mean_descriptor.data(),
                                                  b.mean_descriptor.data(),
                                                  static_cast<std::size_t>(a.mean_descriptor.size())));
}

void require_described(const std::vector<LineSegment>& segs, const char* side, Eigen::Index d) {
  for (std::size_t i = 0; i < segs.size(); ++i) {
    if (!segs[i].has_descriptor()) {
      throw std::invalid_argument(std::string("match_lines: ") + side + " segment " +
                                  std::to_string(i) + " has no mean descriptor");
    }
    if (segs[i].mean_descriptor.size() != d) {
      throw std::invalid_argument(std::string("match_lines: ") + side + " segment " +
                                  std::to_string(i) + " descriptor width mismatch");
    }
  }
}

}  // namespace

std::vector<LineMatch> match_lines(const std::vector<LineSegment>& source,
                                   const std::vector<LineSegment>& target,
                                   double match_threshold) {
  std::vector<LineMatch> matches;
  if (source.empty() || target.empty()) return matches;
  const Eigen::Index d = source.front().mean_descriptor.size();
  require_described(source, "source", d);
  require_described(target, "target", d);

  // Nearest target per source and nearest source per target; strict < keeps
  // the first (smallest-index) on ties.
  std::vector<int> nn_of_source(source.size(), -1);
  std::vector<double> best_s(source.size(), std::numeric_limits<double>::infinity());
  std::vector<int> nn_of_target(target.size(), -1);
  std::vector<double> best_t(target.size(), std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < source.size(); ++i) {
    for (std::size_t j = 0; j < target.size(); ++j) {
      const double dist = descriptor_l1(source[i], target[j]);
      if (dist < best_s[i]) {
        best_s[i] = dist;
        nn_of_source[i] = static_cast<int>(j);
      }
      if (dist < best_t[j]) {
        best_t[j] = dist;
        nn_of_target[j] = static_cast<int>(i);
      }
    }
  }
  for (std::size_t i = 0; i < source.size(); ++i) {
    const int j = nn_of_source[i];
    if (j >= 0 && nn_of_target[static_cast<std::size_t>(j)] == static_cast<int>(i) &&
        best_s[i] <= match_threshold) {
      matches.push_back({static_cast<int>(i), j, best_s[i]});
    }
  }
  return matches;
}

std::vector<std::pair<int, int>> training_correspondences(
    const PointCloud& cloud_a, const std::vector<LineSegment>& segments_a,
    const std::vector<LineSegment>& segments_b, const SE3Transform& gt_pose,
    double max_mean_distance) {
  if (!gt_pose.valid(1e-6)) {
    throw std::invalid_argument("training_correspondences: gt_pose is not a rigid transform");
  }
  if (!(max_mean_distance > 0.0)) {
    throw std::invalid_argument("training_correspondences: max_mean_distance must be positive");
  }

  struct Candidate {
    double mean_dist;
    int a, b;
  };
  std::vector<Candidate> candidates;
  for (std::size_t ia = 0; ia < segments_a.size(); ++ia) {
    const auto& members = segments_a[ia].member_indices;
    if (members.empty()) continue;
    // Map members once per source segment.
    std::vector<Point3> moved;
    moved.reserve(members.size());
    for (int m : members) {
      if (m < 0 || static_cast<std::size_t>(m) >= cloud_a.size()) {
        throw std::invalid_argument("training_correspondences: member index " +
                                    std::to_string(m) + " outside the source cloud");
      }
      moved.push_back(gt_pose.apply(cloud_a.points[static_cast<std::size_t>(m)]));
    }
    for (std::size_t ib = 0; ib < segments_b.size(); ++ib) {
      double acc = 0.0;
      for (const auto& p : moved) {
        acc += point_line_distance(p, segments_b[ib].e0, segments_b[ib].e1);
      }
      const double mean_dist = acc / static_cast<double>(moved.size());
      if (mean_dist <= max_mean_distance) {
        candidates.push_back({mean_dist, static_cast<int>(ia), static_cast<int>(ib)});
      }
    }
  }
  // One-to-one, best (smallest mean distance) first; ties toward smaller ids.
  std::sort(candidates.begin(), candidates.end(), [](const Candidate& x, const Candidate& y) {
    if (x.mean_dist != y.mean_dist) return x.mean_dist < y.mean_dist;
    if (x.a != y.a) return x.a < y.a;
    return x.b < y.b;
  });
  std::vector<char> used_a(segments_a.size(), 0), used_b(segments_b.size(), 0);
  std::vector<std::pair<int, int>> out;
  for (const auto& c : candidates) {
    if (used_a[static_cast<std::size_t>(c.a)] || used_b[static_cast<std::size_t>(c.b)]) continue;
    used_a[static_cast<std::size_t>(c.a)] = 1;
    used_b[static_cast<std::size_t>(c.b)] = 1;
    out.emplace_back(c.a, c.b);
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace linereg
