#include "linereg/kdtree.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <queue>
#include <stdexcept>
#include <utility>

#include "linereg/kernels/kernels.hpp"

namespace linereg {

namespace {

constexpr int kMaxLeaf = 64;  // upper bound for the stack scan buffer

inline double coord(const Point3& p, int axis) { return p[axis]; }

}  // namespace

KdTree::KdTree(const std::vector<Point3>& points, int leaf_size) {
  if (leaf_size < 1 || leaf_size > kMaxLeaf) {
    throw std::invalid_argument("KdTree: leaf_size out of range");
  }
  const int n = static_cast<int>(points.size());
  perm_.resize(points.size());
  xs_.resize(points.size());
  ys_.resize(points.size());
  zs_.resize(points.size());
  if (n == 0) return;

  std::vector<int> order(points.size());
  std::iota(order.begin(), order.end(), 0);
  nodes_.reserve(2 * points.size() / static_cast<std::size_t>(leaf_size) + 2);
  root_ = build(order, 0, n, leaf_size, points);

  for (int i = 0; i < n; ++i) {
    const Point3& p = points[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])];
    perm_[static_cast<std::size_t>(i)] = order[static_cast<std::size_t>(i)];
    xs_[static_cast<std::size_t>(i)] = p.x();
    ys_[static_cast<std::size_t>(i)] = p.y();
    zs_[static_cast<std::size_t>(i)] = p.z();
  }
}

int KdTree::build(std::vector<int>& order, int begin, int end, int leaf_size,
                  const std::vector<Point3>& points) {
  Node node;
  if (end - begin <= leaf_size) {
    node.begin = begin;
    node.end = end;
    nodes_.push_back(node);
    return static_cast<int>(nodes_.size()) - 1;
  }

  Point3 lo = points[static_cast<std::size_t>(order[static_cast<std::size_t>(begin)])];
  Point3 hi = lo;
  for (int i = begin + 1; i < end; ++i) {
    const Point3& p = points[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])];
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  const Point3 extent = hi - lo;
  int axis = 0;
  if (extent.y() > extent[axis]) axis = 1;
  if (extent.z() > extent[axis]) axis = 2;

  const int mid = begin + (end - begin) / 2;
  std::nth_element(order.begin() + begin, order.begin() + mid, order.begin() + end,
                   [&](int a, int b) {
                     const double ca = coord(points[static_cast<std::size_t>(a)], axis);
                     const double cb = coord(points[static_cast<std::size_t>(b)], axis);
                     return ca < cb || (ca == cb && a < b);
                   });

  node.axis = axis;
  node.split = coord(points[static_cast<std::size_t>(order[static_cast<std::size_t>(mid)])], axis);
  nodes_.push_back(node);
  const int self = static_cast<int>(nodes_.size()) - 1;
  const int left = build(order, begin, mid, leaf_size, points);
  const int right = build(order, mid, end, leaf_size, points);
  nodes_[static_cast<std::size_t>(self)].left = left;
  nodes_[static_cast<std::size_t>(self)].right = right;
  return self;
}

namespace {

// (squared distance, original index); lexicographic order gives the
// ascending-index tie-break for free.
using Cand = std::pair<double, int>;

struct KnnState {
  int k = 0;
  int skip = -1;
  std::priority_queue<Cand> heap;  // max-heap: top() is the current worst keeper

  double worst() const {
    return static_cast<int>(heap.size()) < k ? std::numeric_limits<double>::infinity()
                                             : heap.top().first;
  }
  void offer(double d2, int idx) {
    if (idx == skip) return;
    const Cand c{d2, idx};
    if (static_cast<int>(heap.size()) < k) {
      heap.push(c);
    } else if (c < heap.top()) {
      heap.pop();
      heap.push(c);
    }
  }
};

}  // namespace

std::vector<int> KdTree::knn(const Point3& q, int k, int skip_index) const {
  const int available = static_cast<int>(size()) - (skip_index >= 0 ? 1 : 0);
  if (k < 1 || k > available) {
    throw std::invalid_argument("KdTree::knn: need 1 <= k <= point count minus query");
  }

  KnnState st;
  st.k = k;
  st.skip = skip_index;

  std::array<double, kMaxLeaf> buf;
  // Iterative traversal, near child first; the far child is visited unless its
  // slab distance strictly exceeds the current worst keeper (ties must be
  // visited so equal-distance candidates resolve by index).
  std::vector<std::pair<int, double>> stack;  // (node, squared slab distance)
  stack.reserve(64);
  stack.emplace_back(root_, 0.0);
  while (!stack.empty()) {
    const auto [ni, slab2] = stack.back();
    stack.pop_back();
    if (slab2 > st.worst()) continue;
    const Node& node = nodes_[static_cast<std::size_t>(ni)];
    if (node.axis < 0) {
      const std::size_t b = static_cast<std::size_t>(node.begin);
      const std::size_t cnt = static_cast<std::size_t>(node.end - node.begin);
      kernels::squared_distances(xs_.data() + b, ys_.data() + b, zs_.data() + b, cnt, q.x(), q.y(),
                                 q.z(), buf.data());
      for (std::size_t i = 0; i < cnt; ++i) st.offer(buf[i], perm_[b + i]);
      continue;
    }
    const double diff = q[node.axis] - node.split;
    const int near = diff < 0.0 ? node.left : node.right;
    const int far = diff < 0.0 ? node.right : node.left;
    stack.emplace_back(far, diff * diff);
    stack.emplace_back(near, slab2);
  }

  std::vector<int> out(static_cast<std::size_t>(k));
  std::vector<Cand> ordered;
  ordered.reserve(static_cast<std::size_t>(k));
  while (!st.heap.empty()) {
    ordered.push_back(st.heap.top());
    st.heap.pop();
  }
  for (int i = 0; i < k; ++i) {
    out[static_cast<std::size_t>(i)] = ordered[static_cast<std::size_t>(k - 1 - i)].second;
  }
  return out;
}

std::vector<int> KdTree::radius(const Point3& q, double radius, int skip_index) const {
  if (!(radius > 0.0)) throw std::invalid_argument("KdTree::radius: radius must be positive");
  std::vector<int> out;
  if (empty()) return out;

  const double r2 = radius * radius;
  std::array<double, kMaxLeaf> buf;
  std::vector<int> stack;
  stack.reserve(64);
  stack.push_back(root_);
  while (!stack.empty()) {
    const Node& node = nodes_[static_cast<std::size_t>(stack.back())];
    stack.pop_back();
    if (node.axis < 0) {
      const std::size_t b = static_cast<std::size_t>(node.begin);
      const std::size_t cnt = static_cast<std::size_t>(node.end - node.begin);
      kernels::squared_distances(xs_.data() + b, ys_.data() + b, zs_.data() + b, cnt, q.x(), q.y(),
                                 q.z(), buf.data());
      for (std::size_t i = 0; i < cnt; ++i) {
        const int idx = perm_[b + i];
        if (buf[i] <= r2 && idx != skip_index) out.push_back(idx);
      }
      continue;
    }
    const double diff = q[node.axis] - node.split;
    if (diff * diff <= r2) {  // slab overlaps the ball: both sides can contain hits
      stack.push_back(node.left);
      stack.push_back(node.right);
    } else {
      stack.push_back(diff < 0.0 ? node.left : node.right);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace linereg
