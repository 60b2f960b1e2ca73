#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "linereg/types.hpp"

namespace linereg {

class Rng;  // rng.hpp

enum class PrimitiveKind { PlaneIntersection, Pole };

// A line-bearing primitive: either a wedge (two rectangular faces meeting
// along a shared crease edge — the ground-truth line) or a pole (open
// cylinder side surface whose axis is the ground-truth line).
struct PrimitiveSpec {
  PrimitiveKind kind = PrimitiveKind::PlaneIntersection;

  // Wedge: faces extend `wedge_extent_{a,b}` meters away from the crease,
  // which runs `crease_length` meters along its axis; `wedge_dihedral` is the
  // angle between the two faces, in (0, pi).
  double wedge_extent_a = 1.0;
  double wedge_extent_b = 1.0;
  double wedge_dihedral = 1.5707963267948966;  // pi/2
  double crease_length = 1.0;

  // Pole: cylinder of `pole_radius` x `pole_height`, `pole_sides` flat facets.
  double pole_radius = 0.1;
  double pole_height = 2.0;
  int pole_sides = 16;

  // Points within this distance of the ground-truth line are labeled 1.
  // Non-positive means "use the default": 0.05 x characteristic_size().
  // Pole surfaces sit pole_radius away from their own line, so pole recipes
  // normally set this explicitly to pole_radius + margin.
  double label_threshold = -1.0;

  // Largest extent of the primitive (wedge: faces and crease; pole: height).
  double characteristic_size() const;
  double effective_label_threshold() const {
    return label_threshold > 0.0 ? label_threshold : 0.05 * characteristic_size();
  }
};

struct SceneRecipe {
  PrimitiveSpec primitive;
  int n_primitive_points = 1024;
  double noise_fraction = 0.01;  // relative to the primitive's bbox diagonal
  int n_background_chunks = 6;
  int points_per_chunk = 128;
  int total_points = 1536;
  bool randomize_pose = true;  // apply a random rigid transform to the scene
  std::uint64_t seed = 0;
};

// A composed scene: labeled cloud plus the posed ground-truth line segment.
struct Scene {
  PointCloud cloud;
  LineSegment gt_line;
  PrimitiveKind kind = PrimitiveKind::PlaneIntersection;
};

// Triangulated surface of the primitive, centered at the origin with the
// ground-truth line along +z. Wedge: 4 triangles (2 per face); pole: 2*sides
// triangles, no caps. Throws std::invalid_argument on invalid dimensions.
TriangleMesh build_primitive_mesh(const PrimitiveSpec& spec);

// Ground-truth line segment of the canonical (untransformed) primitive.
LineSegment primitive_gt_line(const PrimitiveSpec& spec);

// Displaces every point by an independent per-axis uniform draw in
// [-m, m], m = fraction x bounding-box diagonal of `cloud`. fraction = 0
// returns the cloud unchanged. Deterministic per seed. Throws
// std::invalid_argument unless 0 <= fraction < 1.
PointCloud perturb_points(const PointCloud& cloud, double fraction, std::uint64_t seed);

// Samples the primitive, perturbs it, labels it against the ground-truth
// line (label 1 iff distance <= threshold, measured after perturbation),
// surrounds it with `n_background_chunks` clutter chunks (planar patches and
// Gaussian blobs, all label 0) placed uniformly in a 10 m box, subsamples to
// exactly total_points (keeping at least one point of each label class when
// the merged cloud has both), and optionally applies a random rigid pose.
//
// `background_source`: when non-null, chunks are cropped from this cloud
// (points_per_chunk nearest neighbors of a random point) instead of being
// generated procedurally; if it holds fewer than n_background_chunks x
// points_per_chunk points the call throws std::invalid_argument naming the
// shortfall.
Scene compose_scene(const SceneRecipe& recipe, const PointCloud* background_source = nullptr);

// Randomized desk-scale recipes: mixes wedges and poles with dimension
// ranges in fractions of a meter to a few meters.
SceneRecipe sample_desk_recipe(Rng& rng);

// Layout generator for registration experiments: a set of line segments with
// strictly increasing lengths (so purely geometric descriptors can tell them
// apart), mixed horizontal azimuths and verticals (so non-parallel pairs are
// guaranteed), and pairwise midpoint separation large enough that region
// growing never merges two lines.
struct LineSceneConfig {
  int n_lines = 7;
  double min_length = 1.0;
  double length_step = 0.35;    // line i is min_length + i*length_step long
  double min_separation = 1.5;  // clearance between any two segments, meters
  double workspace = 8.0;       // centers placed in [-w, w]^2, z in [0, 1]
  int points_per_line = 60;     // per sampled view
  double noise_sigma = 0.005;   // isotropic Gaussian jitter, meters
  int background_points = 40;   // label-0 clutter above the scene

  bool operator==(const LineSceneConfig&) const = default;
  void validate() const;  // throws std::invalid_argument on bad values
};

// Segment layout only; views are sampled separately so two views of one
// scene never share point noise. Deterministic in `rng`. Throws
// std::runtime_error if the layout cannot be placed (workspace too small for
// the separation constraint).
std::vector<LineSegment> sample_line_scene(const LineSceneConfig& cfg, Rng& rng);

// One labeled view of the layout: evenly spaced jittered points per segment
// (label 1, construction order), then background clutter (label 0) floating
// above the workspace, clear of every line.
PointCloud sample_labeled_view(const std::vector<LineSegment>& lines, const LineSceneConfig& cfg,
                               Rng& rng);

using RecipeSampler = std::function<SceneRecipe(Rng&)>;

// n_clouds independent scenes; primitive kind, dimensions and pose vary per
// scene through `sampler`; deterministic in `seed` (each scene draws from a
// derived stream).
std::vector<Scene> generate_dataset(int n_clouds, const RecipeSampler& sampler,
                                    std::uint64_t seed);

}  // namespace linereg
