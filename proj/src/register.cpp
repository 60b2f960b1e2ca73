#include "linereg/register.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <numeric>
#include <stdexcept>
#include <string>

#include <Eigen/Cholesky>

#include "linereg/geometry.hpp"

namespace linereg {

namespace {

constexpr double kMinBaseline = 1e-9;  // endpoints closer than this coincide
constexpr double kParallelCos = 0.9998476951563913;  // cos(1 degree)
constexpr double kMaxDamping = 1e12;
constexpr double kMinDamping = 1e-12;

std::size_t residual_count(const RegistrationProblem& problem) {
  std::size_t n = 0;
  for (const auto& m : problem.matches) n += m.source_points.size();
  return n;
}

// Local chart for the full pose: T(delta) = base * exp(delta) with
// delta = (omega, v). Linearized at delta = 0:
//   dq/domega = -R_base * skew(p),  dq/dv = R_base.
struct LocalSE3Chart {
  static constexpr int kDim = 6;
  SE3Transform base;

  explicit LocalSE3Chart(const SE3Transform& initial) : base(initial) {}

  SE3Transform pose() const { return base; }
  SE3Transform pose_at(const Eigen::Matrix<double, 6, 1>& delta) const {
    return base.compose(se3_exp(delta));
  }
  void recenter(const Eigen::Matrix<double, 6, 1>& delta) { base = pose_at(delta); }
  Eigen::Matrix<double, 3, 6> point_jacobian(const Point3& p) const {
    Eigen::Matrix<double, 3, 6> j;
    j.leftCols<3>() = -base.rotation * skew(p);
    j.rightCols<3>() = base.rotation;
    return j;
  }
};

// Planar chart: T(theta, x) = [R_yaw(theta), (x, 0, 0)], global coordinates.
struct YawXChart {
  static constexpr int kDim = 2;
  double theta = 0.0;
  double x = 0.0;

  YawXChart(double theta_in, double x_in) : theta(theta_in), x(x_in) {}

  static SE3Transform make(double theta, double x) {
    return SE3Transform::from_yaw_xy(theta, x, 0.0);
  }
  SE3Transform pose() const { return make(theta, x); }
  SE3Transform pose_at(const Eigen::Matrix<double, 2, 1>& delta) const {
    return make(theta + delta(0), x + delta(1));
  }
  void recenter(const Eigen::Matrix<double, 2, 1>& delta) {
    theta += delta(0);
    x += delta(1);
  }
  Eigen::Matrix<double, 3, 2> point_jacobian(const Point3& p) const {
    const double s = std::sin(theta);
    const double c = std::cos(theta);
    Eigen::Matrix<double, 3, 2> j;
    j.col(0) = Vec3(-s * p.x() - c * p.y(), c * p.x() - s * p.y(), 0.0);
    j.col(1) = Vec3(1.0, 0.0, 0.0);
    return j;
  }
};

// Precomputed per-match line frame. `projector` = I - u*u^T maps a
// displacement from e0 to its component perpendicular to the line; the
// residual block of a member point is that perpendicular displacement vector,
// whose norm is exactly the cross-product-over-baseline distance. Stacking
// the displacement vectors instead of their norms keeps the least-squares
// model affine in the translation and smooth at zero distance, so LM
// converges quadratically; the total cost (sum of squared distances) is
// unchanged.
struct TargetLine {
  Point3 e0;
  Point3 e1;
  Vec3 unit;
  Mat3 projector;
  double baseline = 0.0;
};

std::vector<TargetLine> target_lines(const RegistrationProblem& problem) {
  std::vector<TargetLine> lines;
  lines.reserve(problem.matches.size());
  for (const auto& m : problem.matches) {
    TargetLine t;
    t.e0 = m.target_e0;
    t.e1 = m.target_e1;
    t.baseline = (m.target_e1 - m.target_e0).norm();
    t.unit = (m.target_e1 - m.target_e0) / t.baseline;
    t.projector = Mat3::Identity() - t.unit * t.unit.transpose();
    lines.push_back(t);
  }
  return lines;
}

double residuals_at(const RegistrationProblem& problem, const std::vector<TargetLine>& lines,
                    const SE3Transform& pose, Eigen::VectorXd& r) {
  std::size_t k = 0;
  for (std::size_t i = 0; i < problem.matches.size(); ++i) {
    const auto& line = lines[i];
    for (const auto& p : problem.matches[i].source_points) {
      const Point3 q = pose.apply(p);
      r.segment<3>(static_cast<Eigen::Index>(3 * k++)) = line.projector * (q - line.e0);
    }
  }
  return r.squaredNorm();
}

void require_observable(const std::vector<TargetLine>& lines) {
  if (lines.size() < 2) {
    throw DegenerateGeometryError(
        "solve: need at least two matched lines (a single line leaves rotation about it "
        "and sliding along it unobservable)");
  }
  for (std::size_t a = 0; a + 1 < lines.size(); ++a) {
    for (std::size_t b = a + 1; b < lines.size(); ++b) {
      if (std::abs(lines[a].unit.dot(lines[b].unit)) < kParallelCos) return;
    }
  }
  throw DegenerateGeometryError(
      "solve: all target lines are parallel within 1 degree; the pose is unobservable");
}

void fill_line_mean_distances(const RegistrationProblem& problem,
                              const std::vector<TargetLine>& lines, const SE3Transform& pose,
                              std::vector<double>& out) {
  out.assign(problem.matches.size(), 0.0);
  for (std::size_t i = 0; i < problem.matches.size(); ++i) {
    double acc = 0.0;
    for (const auto& p : problem.matches[i].source_points) {
      const Point3 q = pose.apply(p);
      acc += (q - lines[i].e0).cross(q - lines[i].e1).norm() / lines[i].baseline;
    }
    out[i] = acc / static_cast<double>(problem.matches[i].source_points.size());
  }
}

template <class Chart>
SolveReport lm_solve(const RegistrationProblem& problem, const SolverConfig& cfg, Chart chart) {
  constexpr int dim = Chart::kDim;
  using VecD = Eigen::Matrix<double, dim, 1>;
  using MatD = Eigen::Matrix<double, dim, dim>;

  const auto lines = target_lines(problem);
  const std::size_t m = residual_count(problem);
  Eigen::VectorXd r(static_cast<Eigen::Index>(3 * m));
  Eigen::MatrixXd jac(static_cast<Eigen::Index>(3 * m), dim);
  Eigen::VectorXd r_trial(static_cast<Eigen::Index>(3 * m));

  // Linearize at the chart's current center (delta = 0).
  const auto linearize = [&]() {
    const SE3Transform pose = chart.pose();
    std::size_t k = 0;
    for (std::size_t i = 0; i < problem.matches.size(); ++i) {
      const auto& line = lines[i];
      for (const auto& p : problem.matches[i].source_points) {
        const Point3 q = pose.apply(p);
        const Eigen::Index row = static_cast<Eigen::Index>(3 * k++);
        r.segment<3>(row) = line.projector * (q - line.e0);
        jac.middleRows<3>(row) = line.projector * chart.point_jacobian(p);
      }
    }
  };

  SolveReport rep;
  linearize();
  double cost = r.squaredNorm();
  rep.cost_history.push_back(cost);

  double lambda = cfg.initial_damping;
  bool converged = false;
  int it = 0;
  for (; it < cfg.max_iterations && !converged; ++it) {
    const VecD grad = jac.transpose() * r;
    const MatD hess = jac.transpose() * jac;
    bool accepted = false;
    while (true) {
      MatD damped = hess;
      damped.diagonal().array() += lambda;
      const VecD delta = damped.ldlt().solve(-grad);
      if (delta.norm() < cfg.step_tolerance) {
        converged = true;
        break;
      }
      const SE3Transform trial = chart.pose_at(delta);
      const double trial_cost = residuals_at(problem, lines, trial, r_trial);
      if (trial_cost < cost) {
        chart.recenter(delta);
        cost = trial_cost;
        rep.cost_history.push_back(cost);
        lambda = std::max(lambda / 3.0, kMinDamping);
        accepted = true;
        break;
      }
      lambda *= 10.0;
      if (lambda > kMaxDamping) break;  // no step improves: numerically stuck
    }
    if (!accepted && !converged) break;
    if (accepted) linearize();
  }

  rep.estimate = chart.pose();
  rep.converged = converged;
  rep.iterations = it;
  rep.final_cost = cost;
  rep.gradient_norm = (jac.transpose() * r).norm();
  fill_line_mean_distances(problem, lines, rep.estimate, rep.line_mean_distances);
  return rep;
}

}  // namespace

void RegistrationProblem::validate() const {
  for (std::size_t i = 0; i < matches.size(); ++i) {
    if (matches[i].source_points.empty()) {
      throw std::invalid_argument("RegistrationProblem: match " + std::to_string(i) +
                                  " has no source member points");
    }
    if ((matches[i].target_e1 - matches[i].target_e0).norm() < kMinBaseline) {
      throw std::invalid_argument("RegistrationProblem: match " + std::to_string(i) +
                                  " has coincident target endpoints");
    }
  }
  if (!initial.valid(1e-6)) {
    throw std::invalid_argument("RegistrationProblem: initial estimate is not a rigid transform");
  }
}

void SolverConfig::validate() const {
  if (max_iterations <= 0) throw std::invalid_argument("SolverConfig: max_iterations must be positive");
  if (!(step_tolerance > 0.0)) throw std::invalid_argument("SolverConfig: step_tolerance must be positive");
  if (!(initial_damping > 0.0)) throw std::invalid_argument("SolverConfig: initial_damping must be positive");
  if (!(outlier_distance > 0.0)) throw std::invalid_argument("SolverConfig: outlier_distance must be positive");
  if (outlier_rounds <= 0) throw std::invalid_argument("SolverConfig: outlier_rounds must be positive");
}

double point_to_line_cost(const SE3Transform& T, const Point3& p, const Point3& e0,
                          const Point3& e1) {
  const double baseline = (e1 - e0).norm();
  if (baseline < kMinBaseline) {
    throw std::invalid_argument("point_to_line_cost: target endpoints coincide");
  }
  const Point3 q = T.apply(p);
  return (q - e0).cross(q - e1).norm() / baseline;
}

double total_cost(const RegistrationProblem& problem, const SE3Transform& T) {
  problem.validate();
  double acc = 0.0;
  for (const auto& match : problem.matches) {
    for (const auto& p : match.source_points) {
      const double d = point_to_line_cost(T, p, match.target_e0, match.target_e1);
      acc += d * d;
    }
  }
  return acc;
}

SolveReport solve(const RegistrationProblem& problem, const SolverConfig& cfg) {
  problem.validate();
  cfg.validate();
  require_observable(target_lines(problem));
  return lm_solve(problem, cfg, LocalSE3Chart(problem.initial));
}

SolveReport solve_yaw_x(const RegistrationProblem& problem, const SolverConfig& cfg) {
  problem.validate();
  cfg.validate();
  if (problem.matches.empty()) {
    throw DegenerateGeometryError("solve_yaw_x: no matches");
  }
  const Mat3& rot = problem.initial.rotation;
  const Vec3& tr = problem.initial.translation;
  const bool yaw_only = std::abs(rot(0, 2)) < 1e-9 && std::abs(rot(1, 2)) < 1e-9 &&
                        std::abs(rot(2, 0)) < 1e-9 && std::abs(rot(2, 1)) < 1e-9 &&
                        std::abs(rot(2, 2) - 1.0) < 1e-9;
  if (!yaw_only || std::abs(tr.y()) > 1e-9 || std::abs(tr.z()) > 1e-9) {
    throw std::invalid_argument(
        "solve_yaw_x: initial estimate must be a yaw rotation plus x translation");
  }
  const double theta0 = std::atan2(rot(1, 0), rot(0, 0));
  return lm_solve(problem, cfg, YawXChart(theta0, tr.x()));
}

SE3Transform coarse_initialize(const RegistrationProblem& problem, int n_yaw) {
  problem.validate();
  if (n_yaw <= 0) throw std::invalid_argument("coarse_initialize: n_yaw must be positive");
  const auto lines = target_lines(problem);
  require_observable(lines);

  // Per-point projector P = I - u*u^T and its target offset; the cost at
  // fixed R is sum |P*(R*p + t - e0)|^2, minimized by one SPD 3x3 solve.
  // The normal matrix A = sum P is rotation-independent, so factor it once.
  Mat3 normal = Mat3::Zero();
  for (std::size_t i = 0; i < problem.matches.size(); ++i) {
    const Mat3 proj = Mat3::Identity() - lines[i].unit * lines[i].unit.transpose();
    normal += proj * static_cast<double>(problem.matches[i].source_points.size());
  }
  const Eigen::LDLT<Mat3> normal_ldlt(normal);

  SE3Transform best;
  double best_cost = std::numeric_limits<double>::infinity();
  const double step = 2.0 * std::numbers::pi / static_cast<double>(n_yaw);
  for (int s = 0; s < n_yaw; ++s) {
    const double yaw = step * static_cast<double>(s);
    const Mat3 rot = Eigen::AngleAxisd(yaw, Vec3::UnitZ()).toRotationMatrix();
    Vec3 rhs = Vec3::Zero();
    for (std::size_t i = 0; i < problem.matches.size(); ++i) {
      const Mat3 proj = Mat3::Identity() - lines[i].unit * lines[i].unit.transpose();
      for (const auto& p : problem.matches[i].source_points) {
        rhs += proj * (lines[i].e0 - rot * p);
      }
    }
    const Vec3 t = normal_ldlt.solve(rhs);
    double cost = 0.0;
    for (std::size_t i = 0; i < problem.matches.size(); ++i) {
      const Mat3 proj = Mat3::Identity() - lines[i].unit * lines[i].unit.transpose();
      for (const auto& p : problem.matches[i].source_points) {
        cost += (proj * (rot * p + t - lines[i].e0)).squaredNorm();
      }
    }
    if (cost < best_cost) {
      best_cost = cost;
      best.rotation = rot;
      best.translation = t;
    }
  }
  return best;
}

RegistrationResult register_with_outlier_rejection(const RegistrationProblem& problem,
                                                   const SolverConfig& cfg) {
  problem.validate();
  cfg.validate();

  RegistrationResult result;
  result.inlier_indices.resize(problem.matches.size());
  std::iota(result.inlier_indices.begin(), result.inlier_indices.end(), 0);

  RegistrationProblem current = problem;
  result.report = solve(current, cfg);

  for (int round = 0; round < cfg.outlier_rounds; ++round) {
    std::vector<int> keep;
    keep.reserve(result.inlier_indices.size());
    for (std::size_t i = 0; i < result.inlier_indices.size(); ++i) {
      if (result.report.line_mean_distances[i] <= cfg.outlier_distance) {
        keep.push_back(static_cast<int>(i));
      }
    }
    if (keep.size() == result.inlier_indices.size()) break;  // nothing dropped
    if (keep.size() < 2) {
      throw RegistrationFailedError(
          "register_with_outlier_rejection: fewer than two matches survive the " +
          std::to_string(cfg.outlier_distance) + " m cut");
    }

    RegistrationProblem next;
    next.matches.reserve(keep.size());
    std::vector<int> surviving;
    surviving.reserve(keep.size());
    for (int local : keep) {
      next.matches.push_back(current.matches[static_cast<std::size_t>(local)]);
      surviving.push_back(result.inlier_indices[static_cast<std::size_t>(local)]);
    }
    next.initial = result.report.estimate;  // warm start from the current alignment
    current = std::move(next);
    result.inlier_indices = std::move(surviving);
    result.rounds = round + 1;
    result.report = solve(current, cfg);
  }

  result.estimate = result.report.estimate;
  return result;
}

}  // namespace linereg
