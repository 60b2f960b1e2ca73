#pragma once

#include <vector>

#include "linereg/autolabel.hpp"
#include "linereg/linefeat.hpp"
#include "linereg/register.hpp"
#include "linereg/types.hpp"

namespace linereg {

// Line extraction from a labeled cloud: points labeled 1 are grown into
// connected clusters and each cluster gets a total-least-squares fit,
// filtered by the usual quality gates.
struct ExtractConfig {
  double growth_radius = 0.5;  // meters, cluster linking distance
  LineFitConfig fit;

  void validate() const;  // throws std::invalid_argument on bad values
};

std::vector<LineSegment> extract_lines(const PointCloud& cloud, const ExtractConfig& cfg);

// Which per-line descriptors drive the matching stage.
enum class DescriptorSource {
  Geometric,  // pose-invariant shape statistics; no network required
  Learned,    // mean of per-point network descriptors; clouds must carry them
};

struct MatchConfig {
  DescriptorSource source = DescriptorSource::Geometric;
  // L1 gate for mutual-NN matches. Geometric features live on a metric scale
  // (lengths in meters), so the default is looser than the 0.1 used for unit
  // learned descriptors.
  double threshold = 0.15;

  bool operator==(const MatchConfig&) const = default;
  void validate() const;  // throws std::invalid_argument on bad values
};

struct PairRegistrationConfig {
  ExtractConfig extract;
  MatchConfig match;
  int coarse_yaw_steps = 36;  // yaw sweep resolution of the global initializer
  SolverConfig solver;

  void validate() const;  // throws std::invalid_argument on bad values
};

struct PairRegistrationResult {
  SE3Transform pose;  // maps source-frame points into the target frame
  std::vector<LineSegment> source_lines;
  std::vector<LineSegment> target_lines;
  std::vector<LineMatch> matches;
  RegistrationResult registration;  // inliers, rounds, solver report
};

// Two labeled clouds in, relative pose out: extract lines on both sides,
// describe them (geometric statistics or learned descriptor means), match by
// mutual nearest neighbor, initialize globally with a yaw sweep plus
// closed-form translation, then run damped least squares with
// line-distance outlier rejection. Throws std::invalid_argument when a
// required channel is missing, RegistrationFailedError when fewer than two
// matches survive the descriptor gate; solver-side DegenerateGeometryError /
// RegistrationFailedError propagate unchanged.
PairRegistrationResult register_pair(const PointCloud& source, const PointCloud& target,
                                     const PairRegistrationConfig& cfg);

}  // namespace linereg
