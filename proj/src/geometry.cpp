#include "linereg/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <unordered_map>

#include "linereg/kdtree.hpp"
#include "linereg/rng.hpp"

namespace linereg {

std::vector<int> knn_search(const PointCloud& cloud, int query_index, int k) {
  if (query_index < 0 || query_index >= static_cast<int>(cloud.size())) {
    throw std::invalid_argument("knn_search: query_index out of range");
  }
  const KdTree tree(cloud.points);
  return tree.knn(cloud.points[static_cast<std::size_t>(query_index)], k, query_index);
}

std::vector<int> radius_search(const PointCloud& cloud, int query_index, double radius) {
  if (query_index < 0 || query_index >= static_cast<int>(cloud.size())) {
    throw std::invalid_argument("radius_search: query_index out of range");
  }
  const KdTree tree(cloud.points);
  return tree.radius(cloud.points[static_cast<std::size_t>(query_index)], radius, query_index);
}

namespace {

struct VoxelKey {
  std::int64_t x, y, z;
  bool operator==(const VoxelKey&) const = default;
};

struct VoxelKeyHash {
  std::size_t operator()(const VoxelKey& k) const {
    std::uint64_t h = splitmix64(static_cast<std::uint64_t>(k.x));
    h = splitmix64(h ^ static_cast<std::uint64_t>(k.y));
    h = splitmix64(h ^ static_cast<std::uint64_t>(k.z));
    return static_cast<std::size_t>(h);
  }
};

}  // namespace

PointCloud voxel_downsample(const PointCloud& cloud, double voxel_size) {
  if (!(voxel_size > 0.0)) {
    throw std::invalid_argument("voxel_downsample: voxel_size must be positive");
  }
  struct Acc {
    Point3 sum = Point3::Zero();
    std::size_t count = 0;
  };
  std::unordered_map<VoxelKey, std::size_t, VoxelKeyHash> slot_of;
  std::vector<Acc> slots;  // first-occurrence order
  slot_of.reserve(cloud.size());
  for (const Point3& p : cloud.points) {
    const VoxelKey key{static_cast<std::int64_t>(std::floor(p.x() / voxel_size)),
                       static_cast<std::int64_t>(std::floor(p.y() / voxel_size)),
                       static_cast<std::int64_t>(std::floor(p.z() / voxel_size))};
    auto [it, inserted] = slot_of.try_emplace(key, slots.size());
    if (inserted) slots.emplace_back();
    Acc& acc = slots[it->second];
    acc.sum += p;
    ++acc.count;
  }
  PointCloud out;
  out.points.reserve(slots.size());
  for (const Acc& acc : slots) {
    out.points.push_back(acc.sum / static_cast<double>(acc.count));
  }
  return out;
}

PointCloud apply_transform(const PointCloud& cloud, const Sim3Transform& xf) {
  PointCloud out = cloud;
  for (Point3& p : out.points) p = xf.apply(p);
  return out;
}

PointCloud apply_transform(const PointCloud& cloud, const SE3Transform& xf) {
  return apply_transform(cloud, Sim3Transform::from_se3(xf));
}

double point_line_distance(const Point3& p, const Point3& e0, const Point3& e1) {
  const Point3 u = e1 - e0;
  const double len = u.norm();
  if (len < 1e-15) return (p - e0).norm();
  return (p - e0).cross(p - e1).norm() / len;
}

Mat3 skew(const Vec3& a) {
  Mat3 m;
  m << 0.0, -a.z(), a.y(), a.z(), 0.0, -a.x(), -a.y(), a.x(), 0.0;
  return m;
}

SE3Transform se3_exp(const Eigen::Matrix<double, 6, 1>& tangent) {
  const Vec3 omega = tangent.head<3>();
  const Vec3 v = tangent.tail<3>();
  const double theta = omega.norm();
  const Mat3 k = skew(omega);
  SE3Transform out;
  if (theta < 1e-8) {
    // Taylor: both series agree with the closed forms to O(theta^3) ~ 1e-24.
    out.rotation = Mat3::Identity() + k + 0.5 * k * k;
    out.translation = (Mat3::Identity() + 0.5 * k + (1.0 / 6.0) * k * k) * v;
  } else {
    const double s = std::sin(theta);
    const double c = std::cos(theta);
    const double t2 = theta * theta;
    out.rotation = Mat3::Identity() + (s / theta) * k + ((1.0 - c) / t2) * k * k;
    out.translation =
        (Mat3::Identity() + ((1.0 - c) / t2) * k + ((theta - s) / (t2 * theta)) * k * k) * v;
  }
  return out;
}

PointCloud sample_mesh_uniform(const TriangleMesh& mesh, int n, std::uint64_t seed) {
  if (n <= 0) throw std::invalid_argument("sample_mesh_uniform: n must be positive");
  if (mesh.faces.empty()) throw std::invalid_argument("sample_mesh_uniform: mesh has no faces");

  const int nv = static_cast<int>(mesh.vertices.size());
  std::vector<double> cum_area(mesh.faces.size());
  double total = 0.0;
  for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
    const auto& face = mesh.faces[f];
    for (int vi : face) {
      if (vi < 0 || vi >= nv) {
        throw std::invalid_argument("sample_mesh_uniform: face vertex index out of range");
      }
    }
    const Point3& a = mesh.vertices[static_cast<std::size_t>(face[0])];
    const Point3& b = mesh.vertices[static_cast<std::size_t>(face[1])];
    const Point3& c = mesh.vertices[static_cast<std::size_t>(face[2])];
    total += 0.5 * (b - a).cross(c - a).norm();
    cum_area[f] = total;
  }
  if (!(total > 0.0) || !std::isfinite(total)) {
    throw std::invalid_argument("sample_mesh_uniform: mesh surface area is degenerate");
  }

  Rng rng(seed);
  PointCloud out;
  out.points.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const double target = rng.uniform() * total;
    const std::size_t f = static_cast<std::size_t>(
        std::upper_bound(cum_area.begin(), cum_area.end(), target) - cum_area.begin());
    const auto& face = mesh.faces[std::min(f, mesh.faces.size() - 1)];
    const Point3& a = mesh.vertices[static_cast<std::size_t>(face[0])];
    const Point3& b = mesh.vertices[static_cast<std::size_t>(face[1])];
    const Point3& c = mesh.vertices[static_cast<std::size_t>(face[2])];
    // sqrt trick: uniform density over the triangle's area
    const double su = std::sqrt(rng.uniform());
    const double v = rng.uniform();
    out.points.push_back((1.0 - su) * a + su * (1.0 - v) * b + su * v * c);
  }
  return out;
}

}  // namespace linereg
