#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "linereg/micronet.hpp"
#include "linereg/types.hpp"

namespace linereg {

// Line-acceptance gates for fitted clusters. The clustering itself gives no
// quality guarantee, so fits are kept only when the cluster is big enough,
// elongated enough, and long enough.
struct LineFitConfig {
  int min_points = 5;
  double linearity_min = 10.0;  // principal-to-second eigenvalue ratio
  double length_min = 0.5;      // meters

  bool operator==(const LineFitConfig&) const = default;
  void validate() const;  // throws std::invalid_argument on bad values
};

// Pose-voting configuration: how many rigid SE(2)-in-SE(3) perturbations to
// vote over, their sampling ranges, the candidate threshold, and the growth
// radius for clustering candidates.
struct AdaptationConfig {
  int n_perturbations = 16;
  double xy_range = 20.0;        // translations uniform in [-xy_range, +xy_range] per axis
  double yaw_range_deg = 360.0;  // yaw uniform in [0, yaw_range_deg)
  double vote_threshold = 0.8;   // candidate iff fraction strictly above this
  double growth_radius = 0.5;    // meters
  int iterations = 3;            // label/retrain rounds (driven by the caller)
  LineFitConfig fit;

  bool operator==(const AdaptationConfig&) const = default;
  void validate() const;  // throws std::invalid_argument on bad values
};

// Per-point vote tallies from the perturbation passes.
struct VoteMap {
  std::vector<int> positive;  // passes that predicted "line"
  std::vector<int> total;     // passes seen (n_perturbations after a full run)

  // positive/total per point; 0 where no votes were cast.
  std::vector<double> fractions() const;
};

// Any per-point binary labeler: the trained network in production, mocks and
// oracles in tests. Must return one 0/1 label per input point.
using PointPredictor = std::function<std::vector<std::uint8_t>(const PointCloud&)>;

// Wrap a trained network as a PointPredictor (prediction = most probable
// class). The net must outlive the returned function; each copy shares one
// inference workspace, so copies must not run concurrently.
PointPredictor make_net_predictor(const MicroNet<float>& net);

// Run the predictor under cfg.n_perturbations rigid perturbations and tally,
// per point, how often it was predicted to lie on a line. Pass 0 is always
// the identity pose (the unperturbed scan is one of the votes); passes
// 1..n-1 sample yaw, then x, then y from `seed`. Point indices persist
// through the rigid transforms, so votes accumulate positionally.
VoteMap geometric_adaptation(const PointCloud& cloud, const PointPredictor& predict,
                             const AdaptationConfig& cfg, std::uint64_t seed);

// Candidate mask: fraction strictly greater than `threshold`.
std::vector<std::uint8_t> threshold_candidates(const VoteMap& votes, double threshold);

// Connected components of the candidate points, where two candidates are
// linked when within growth_radius (inclusive) of each other. Components
// smaller than min_points are dropped (min_points = 1 keeps the exact
// partition of the candidate set). Each cluster is sorted ascending; clusters
// are ordered by smallest member. Throws std::invalid_argument if the mask
// size differs from the cloud or growth_radius <= 0.
std::vector<std::vector<int>> region_grow(const PointCloud& cloud,
                                          const std::vector<std::uint8_t>& candidates,
                                          double growth_radius, int min_points = 1);

// Total-least-squares segment through the cluster: centroid + principal
// covariance direction, endpoints at the extreme member projections.
// Returns std::nullopt when the cluster is too small, not elongated enough
// (principal/second eigenvalue below linearity_min), shorter than
// length_min, or degenerate (all points coincident).
std::optional<LineSegment> fit_line(const PointCloud& cloud, const std::vector<int>& cluster,
                                    const LineFitConfig& cfg);

// One labeling round over a dataset: vote -> threshold -> grow -> fit. Each
// cloud's labels are rewritten in place: 1 exactly on the members of its
// accepted lines, 0 elsewhere. Returns the accepted lines per cloud. Each
// cloud votes with an independent seed stream derived from `seed` and its
// index; the caller drives the retrain loop (cfg.iterations) around this.
std::vector<std::vector<LineSegment>> auto_label_round(std::vector<PointCloud>& clouds,
                                                       const PointPredictor& predict,
                                                       const AdaptationConfig& cfg,
                                                       std::uint64_t seed);

}  // namespace linereg
