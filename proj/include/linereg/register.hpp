#pragma once

#include <stdexcept>
#include <vector>

#include "linereg/types.hpp"

namespace linereg {

// Common base for registration failures so callers can catch one type.
class RegistrationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// The line constellation cannot determine a pose: fewer than two matches, or
// every pair of target lines parallel within one degree (rotation about the
// common direction and sliding along it are unobservable).
class DegenerateGeometryError : public RegistrationError {
 public:
  using RegistrationError::RegistrationError;
};

// Outlier rejection left fewer than two usable matches.
class RegistrationFailedError : public RegistrationError {
 public:
  using RegistrationError::RegistrationError;
};

// One matched line pair: the source line's member points (in the source
// frame) plus the matched target segment's endpoints. Residuals are the
// perpendicular distances from each transformed member point to the infinite
// line through the target endpoints — deliberately unclamped, since observed
// endpoints vary between frames under occlusion.
struct LineCorrespondence {
  std::vector<Point3> source_points;
  Point3 target_e0 = Point3::Zero();
  Point3 target_e1 = Point3::Zero();
};

struct RegistrationProblem {
  std::vector<LineCorrespondence> matches;
  // Start of the optimization. Identity by default: association comes from
  // descriptors, not proximity, so no pose prior is needed.
  SE3Transform initial;

  // Throws std::invalid_argument if any match has no member points or its
  // target endpoints coincide within 1e-9, or if `initial` is not rigid.
  void validate() const;
};

struct SolverConfig {
  int max_iterations = 50;
  double step_tolerance = 1e-8;   // convergence: norm of the local update step
  double initial_damping = 1e-4;  // Levenberg lambda
  double outlier_distance = 1.0;  // meters; per-match mean-distance cut
  int outlier_rounds = 3;         // max drop-and-resolve rounds

  bool operator==(const SolverConfig&) const = default;

  // Throws std::invalid_argument unless every field is positive.
  void validate() const;
};

struct SolveReport {
  SE3Transform estimate;
  bool converged = false;  // step norm fell below step_tolerance
  int iterations = 0;      // outer (relinearization) iterations executed
  double final_cost = 0.0;     // sum of squared residuals at `estimate`
  double gradient_norm = 0.0;  // |J^T r| at `estimate`
  // Cost at the start point followed by the cost after every accepted step;
  // non-increasing by construction.
  std::vector<double> cost_history;
  // Mean member-point distance to the matched target line at `estimate`,
  // one entry per match, in match order.
  std::vector<double> line_mean_distances;
};

struct RegistrationResult {
  SE3Transform estimate;
  std::vector<int> inlier_indices;  // surviving match indices, ascending
  int rounds = 0;                   // drop-and-resolve rounds performed
  SolveReport report;               // report of the final solve
};

// Perpendicular distance from T*p to the infinite line through e0 and e1,
// in the cross-product-over-baseline form
//   |(T*p - e0) x (T*p - e1)| / |e1 - e0|.
// Throws std::invalid_argument when the endpoints coincide within 1e-9.
double point_to_line_cost(const SE3Transform& T, const Point3& p, const Point3& e0,
                          const Point3& e1);

// Sum of squared point-to-line residuals over every member point of every
// match, evaluated at pose T. This is the objective `solve` minimizes.
double total_cost(const RegistrationProblem& problem, const SE3Transform& T);

// Levenberg-Marquardt over a right-composed local parameterization of SE(3)
// (axis-angle + translation: T <- T * exp(delta)), with analytic Jacobians of
// the point-to-line residuals stacked over all member points. Each member
// point contributes its perpendicular displacement vector to the matched
// line as a residual block (the block norm is the point-to-line distance, so
// the squared cost is identical to summing squared distances, but the blocks
// stay smooth at zero distance and affine in translation). Accepted steps
// strictly decrease the total cost. Throws DegenerateGeometryError on an
// unobservable constellation (see the exception's doc); non-convergence
// returns the best-effort estimate with `converged == false`.
SolveReport solve(const RegistrationProblem& problem, const SolverConfig& cfg);

// Planar two-parameter variant: the pose is constrained to a yaw rotation
// plus an x translation, T(theta, x) = [R_yaw(theta), (x, 0, 0)], and the
// same LM loop runs over the (theta, x) chart. `problem.initial` must lie on
// that manifold (identity does). Suited to ground-vehicle-style planar
// problems, and cross-checked against an exhaustive grid oracle in tests.
SolveReport solve_yaw_x(const RegistrationProblem& problem, const SolverConfig& cfg);

// Coarse global initialization for planar (full-circle yaw + translation)
// perturbations, where identity can sit outside the LM basin. Sweeps n_yaw
// evenly spaced yaw candidates over [0, 2*pi); for each fixed rotation the
// point-to-line objective is quadratic in the translation, so the optimal t
// comes from one 3x3 linear solve. Returns the lowest-cost candidate pose,
// intended as `initial` for solve(). Requires the same observability as
// solve(); throws DegenerateGeometryError otherwise.
SE3Transform coarse_initialize(const RegistrationProblem& problem, int n_yaw = 36);

// solve(), then drop matches whose mean member distance exceeds
// cfg.outlier_distance, re-solve on the survivors from the previous estimate,
// and repeat until no match is dropped or cfg.outlier_rounds is reached.
// Throws RegistrationFailedError when fewer than two matches survive a drop.
RegistrationResult register_with_outlier_rejection(const RegistrationProblem& problem,
                                                   const SolverConfig& cfg);

}  // namespace linereg
