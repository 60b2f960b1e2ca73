#pragma once

#include <vector>

#include "linereg/types.hpp"

namespace linereg {

// Static KD-tree over a point set. Median split on the widest axis, leaves of
// up to 16 points stored contiguously in structure-of-arrays form so leaf
// scans vectorize (kernels::squared_distances). Once built the tree is
// read-only and safe to share across threads.
class KdTree {
 public:
  KdTree() = default;
  explicit KdTree(const std::vector<Point3>& points, int leaf_size = 16);

  std::size_t size() const { return perm_.size(); }
  bool empty() const { return perm_.empty(); }

  // Indices of the k points nearest to `q`, nearest first; exact ties broken
  // by ascending index. `skip_index` (usually the query's own index) is
  // excluded when >= 0. Throws std::invalid_argument unless
  // 1 <= k <= size() - (skip_index >= 0 ? 1 : 0).
  std::vector<int> knn(const Point3& q, int k, int skip_index = -1) const;

  // Indices of all points with distance(p, q) <= radius, ascending index,
  // excluding `skip_index` when >= 0. Throws std::invalid_argument if
  // radius <= 0.
  std::vector<int> radius(const Point3& q, double radius, int skip_index = -1) const;

 private:
  struct Node {
    int axis = -1;       // split axis, -1 for leaf
    double split = 0.0;  // splitting plane coordinate
    int left = -1, right = -1;
    int begin = 0, end = 0;  // SoA range for leaves
  };

  int build(std::vector<int>& order, int begin, int end, int leaf_size,
            const std::vector<Point3>& points);

  std::vector<Node> nodes_;
  std::vector<double> xs_, ys_, zs_;  // leaf-contiguous coordinates
  std::vector<int> perm_;             // SoA position -> original point index
  int root_ = -1;
};

}  // namespace linereg
