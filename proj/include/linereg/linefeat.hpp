#pragma once

#include <utility>
#include <vector>

#include "linereg/types.hpp"

namespace linereg {

// One descriptor-space correspondence between a source and a target segment.
struct LineMatch {
  int source = -1;
  int target = -1;
  double distance = 0.0;  // L1 between mean descriptors, <= the match threshold
};

// Fill each segment's mean_descriptor: arithmetic mean of its members'
// per-point descriptors, re-normalized to unit L2 (the mean of unit vectors
// is shorter than unit; a consistent norm keeps the match distance threshold
// meaningful). Throws std::invalid_argument when the cloud has no
// descriptors, a segment has no members or an out-of-range member, or a used
// descriptor row is not unit norm; throws std::runtime_error if member
// descriptors cancel to a zero mean (no direction to normalize).
void describe_lines(const PointCloud& cloud, std::vector<LineSegment>& segments);

// Rigid-motion-invariant descriptor of a fitted segment, built purely from
// geometry (no learned network): [segment length, RMS perpendicular distance
// of the members to the infinite line, RMS of the mean-centered axis
// projections / length, mean absolute centered axis projection / length].
// Rotations and translations preserve every term exactly, so two views of
// the same physical line described this way are directly comparable with
// match_lines (use a threshold suited to this feature scale, e.g. 0.15,
// instead of the unit-descriptor default). Throws std::invalid_argument on
// an empty member list, an out-of-range member index, or a zero-length
// segment.
Eigen::Vector4f geometric_line_descriptor(const PointCloud& cloud, const LineSegment& segment);

// Fill each segment's mean_descriptor with its geometric_line_descriptor.
void describe_lines_geometric(const PointCloud& cloud, std::vector<LineSegment>& segments);

// Mutual nearest neighbors in descriptor space (L1), kept when the distance
// is at most match_threshold. Nearest-neighbor ties break toward the smaller
// index, so each line lands in at most one match; the result is ordered by
// source id. Throws std::invalid_argument if any segment lacks a mean
// descriptor or the descriptor widths disagree.
std::vector<LineMatch> match_lines(const std::vector<LineSegment>& source,
                                   const std::vector<LineSegment>& target,
                                   double match_threshold = 0.1);

// Ground-truth-supervised correspondences for descriptor training: member
// points of each source segment are mapped by `gt_pose` (source frame ->
// target frame) and averaged against the infinite line through each target
// segment; a pair qualifies when that mean point-to-line distance is at most
// max_mean_distance, and qualifying pairs are made one-to-one greedily by
// ascending mean distance (ties toward smaller ids). `cloud_a` provides the
// source member points. Throws std::invalid_argument on out-of-range member
// indices or an invalid pose.
std::vector<std::pair<int, int>> training_correspondences(
    const PointCloud& cloud_a, const std::vector<LineSegment>& segments_a,
    const std::vector<LineSegment>& segments_b, const SE3Transform& gt_pose,
    double max_mean_distance = 0.2);

}  // namespace linereg
