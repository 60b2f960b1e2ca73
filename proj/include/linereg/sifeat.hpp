#pragma once

#include <vector>

#include "linereg/types.hpp"

namespace linereg {

struct FeatureConfig {
  int k = 20;  // neighbor count for the local sum
};

// Per-point scale-invariant local feature
//
//   f(p) = sum_i (p - p_i) / sum_i ||p - p_i||
//
// over the k nearest neighbors p_i of p (query excluded). The numerator is a
// 3-vector, the denominator the scalar sum of Euclidean neighbor distances,
// so a similarity transform p' = s*R*p + t maps f to R*f: |f| is fully
// invariant and the direction rotates with the cloud. ||f|| <= 1 always by
// the triangle inequality.
//
// If the denominator falls below 1e-12 (all k neighbors coincident with p),
// that point's feature is the zero vector.
//
// Throws std::invalid_argument unless N > cfg.k and cfg.k >= 1. Returns one
// feature per point, N x 3 row-major.
std::vector<Point3> compute_si_features(const PointCloud& cloud, const FeatureConfig& cfg = {});

}  // namespace linereg
