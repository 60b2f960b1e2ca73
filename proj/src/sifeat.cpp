#include "linereg/sifeat.hpp"

#include <cmath>
#include <stdexcept>

#include "linereg/kdtree.hpp"

namespace linereg {

std::vector<Point3> compute_si_features(const PointCloud& cloud, const FeatureConfig& cfg) {
  if (cfg.k < 1) throw std::invalid_argument("compute_si_features: k must be >= 1");
  if (cloud.size() <= static_cast<std::size_t>(cfg.k)) {
    throw std::invalid_argument("compute_si_features: need more points than neighbors");
  }

  const KdTree tree(cloud.points);
  std::vector<Point3> features(cloud.size());
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const Point3& p = cloud.points[i];
    Point3 numer = Point3::Zero();
    double denom = 0.0;
    for (int j : tree.knn(p, cfg.k, static_cast<int>(i))) {
      const Point3 d = p - cloud.points[static_cast<std::size_t>(j)];
      numer += d;
      denom += d.norm();
    }
    features[i] = denom < 1e-12 ? Point3::Zero() : Point3(numer / denom);
  }
  return features;
}

}  // namespace linereg
