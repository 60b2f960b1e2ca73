#pragma once

#include <cstdint>
#include <vector>

#include "linereg/types.hpp"

namespace linereg {

// k nearest neighbors of cloud.points[query_index] by Euclidean distance,
// excluding the query point itself; nearest first, exact ties broken by
// ascending index. Throws std::invalid_argument unless 1 <= k <= N-1.
// Builds a throwaway KD-tree; batch callers should construct KdTree once.
std::vector<int> knn_search(const PointCloud& cloud, int query_index, int k);

// All points within `radius` (inclusive) of cloud.points[query_index],
// excluding the query point, in ascending index order. Throws
// std::invalid_argument if radius <= 0.
std::vector<int> radius_search(const PointCloud& cloud, int query_index, double radius);

// One point per occupied voxel, placed at the centroid of the voxel's
// members; voxel of p is floor(p / voxel_size) per axis. Output order is the
// first-occurrence order of each voxel in the input. Per-point channels are
// dropped (a centroid has no single source point). Throws
// std::invalid_argument if voxel_size <= 0.
PointCloud voxel_downsample(const PointCloud& cloud, double voxel_size);

// Maps every point by p' = s*R*p + t; labels, scores and descriptors carry
// through unchanged.
PointCloud apply_transform(const PointCloud& cloud, const Sim3Transform& xf);
PointCloud apply_transform(const PointCloud& cloud, const SE3Transform& xf);

// Perpendicular distance from p to the infinite line through e0 and e1
// (cross-product-over-baseline form); degenerates to the distance to e0 when
// the endpoints coincide.
double point_line_distance(const Point3& p, const Point3& e0, const Point3& e1);

// 3x3 cross-product (skew-symmetric) matrix: skew(a) * b == a.cross(b).
Mat3 skew(const Vec3& a);

// SE(3) exponential map. tangent = (omega, v): rotation = exp([omega]x),
// translation = V(omega) * v with V the SO(3) left Jacobian. Rotation angles
// below 1e-8 rad use the quadratic Taylor expansions of both series.
SE3Transform se3_exp(const Eigen::Matrix<double, 6, 1>& tangent);

// n points drawn with per-face probability proportional to face area and
// uniform (square-root) barycentric placement inside each face. Deterministic
// for a fixed seed. Throws std::invalid_argument for n <= 0, an empty or
// invalid mesh, or total surface area that is zero or non-finite.
PointCloud sample_mesh_uniform(const TriangleMesh& mesh, int n, std::uint64_t seed);

}  // namespace linereg
