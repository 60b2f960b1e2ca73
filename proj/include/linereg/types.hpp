#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <array>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace linereg {

using Point3 = Eigen::Vector3d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

template <typename Scalar>
using MatrixR = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Per-point descriptors, one unit-norm row per point.
using DescriptorMatrix = MatrixR<float>;

inline bool is_rotation(const Mat3& r, double tol = 1e-9) {
  return (r * r.transpose() - Mat3::Identity()).cwiseAbs().maxCoeff() <= tol &&
         std::abs(r.determinant() - 1.0) <= tol;
}

/// Rigid transform: p -> R*p + t.
struct SE3Transform {
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();

  Point3 apply(const Point3& p) const { return rotation * p + translation; }

  SE3Transform compose(const SE3Transform& other) const {
    // (this ∘ other): apply `other` first.
    return {rotation * other.rotation, rotation * other.translation + translation};
  }

  SE3Transform inverse() const {
    Mat3 rt = rotation.transpose();
    return {rt, -(rt * translation)};
  }

  static SE3Transform identity() { return {}; }

  static SE3Transform from_yaw_xy(double yaw_rad, double x, double y) {
    SE3Transform t;
    t.rotation = Eigen::AngleAxisd(yaw_rad, Vec3::UnitZ()).toRotationMatrix();
    t.translation = Vec3(x, y, 0.0);
    return t;
  }

  bool valid(double tol = 1e-9) const { return is_rotation(rotation, tol); }
};

/// Similarity transform: p -> s*R*p + t, s > 0.
struct Sim3Transform {
  double scale = 1.0;
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();

  Point3 apply(const Point3& p) const { return scale * (rotation * p) + translation; }

  Sim3Transform compose(const Sim3Transform& other) const {
    // (this ∘ other)(p) = s1*R1*(s2*R2*p + t2) + t1
    return {scale * other.scale, rotation * other.rotation,
            scale * (rotation * other.translation) + translation};
  }

  Sim3Transform inverse() const {
    Mat3 rt = rotation.transpose();
    double inv_s = 1.0 / scale;
    return {inv_s, rt, -inv_s * (rt * translation)};
  }

  static Sim3Transform identity() { return {}; }

  static Sim3Transform from_se3(const SE3Transform& t) {
    return {1.0, t.rotation, t.translation};
  }

  bool valid(double tol = 1e-9) const { return scale > 0.0 && is_rotation(rotation, tol); }
};

/// Point set with optional per-point channels. Channels are either empty or
/// sized like `points`; descriptor rows are unit L2 norm.
struct PointCloud {
  std::vector<Point3> points;
  std::vector<std::uint8_t> labels;  // binary line flag
  std::vector<float> scores;         // in [0, 1]
  DescriptorMatrix descriptors;      // N x d, or 0 x 0 when absent

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
  bool has_labels() const { return !labels.empty(); }
  bool has_scores() const { return !scores.empty(); }
  bool has_descriptors() const { return descriptors.rows() > 0; }

  void check_channels() const {
    const auto n = points.size();
    if (!labels.empty() && labels.size() != n)
      throw std::invalid_argument("point cloud: label channel size mismatch");
    if (!scores.empty() && scores.size() != n)
      throw std::invalid_argument("point cloud: score channel size mismatch");
    if (descriptors.rows() > 0 && static_cast<std::size_t>(descriptors.rows()) != n)
      throw std::invalid_argument("point cloud: descriptor channel size mismatch");
  }
};

struct TriangleMesh {
  std::vector<Point3> vertices;
  std::vector<std::array<int, 3>> faces;

  bool empty() const { return faces.empty(); }
};

/// Fitted 3D line segment. `direction` is the unit vector from e0 to e1.
struct LineSegment {
  Point3 e0 = Point3::Zero();
  Point3 e1 = Point3::Zero();
  Vec3 direction = Vec3::UnitX();
  std::vector<int> member_indices;
  Eigen::VectorXf mean_descriptor;  // empty until described

  double length() const { return (e1 - e0).norm(); }
  bool has_descriptor() const { return mean_descriptor.size() > 0; }
};

}  // namespace linereg
