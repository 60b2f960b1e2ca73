#include "linereg/synthdata.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "linereg/geometry.hpp"
#include "linereg/kdtree.hpp"
#include "linereg/rng.hpp"

namespace linereg {

namespace {

// Stream ids for per-scene sub-RNGs; fixed so scenes are reproducible even if
// generation order inside compose_scene changes.
enum Stream : std::uint64_t {
  kSampleStream = 1,
  kPerturbStream = 2,
  kBackgroundStream = 3,
  kSubsampleStream = 4,
  kPoseStream = 5,
};

Eigen::Matrix3d random_rotation(Rng& rng) {
  Eigen::Quaterniond q(rng.normal(), rng.normal(), rng.normal(), rng.normal());
  q.normalize();
  return q.toRotationMatrix();
}

}  // namespace

double PrimitiveSpec::characteristic_size() const {
  if (kind == PrimitiveKind::Pole) return pole_height;
  return std::max({wedge_extent_a, wedge_extent_b, crease_length});
}

TriangleMesh build_primitive_mesh(const PrimitiveSpec& spec) {
  TriangleMesh mesh;
  if (spec.kind == PrimitiveKind::PlaneIntersection) {
    if (!(spec.wedge_extent_a > 0.0) || !(spec.wedge_extent_b > 0.0) ||
        !(spec.crease_length > 0.0)) {
      throw std::invalid_argument("build_primitive_mesh: wedge dimensions must be positive");
    }
    if (!(spec.wedge_dihedral > 0.0) || !(spec.wedge_dihedral < std::numbers::pi)) {
      throw std::invalid_argument("build_primitive_mesh: dihedral angle must be in (0, pi)");
    }
    // Crease along z; the two faces open symmetrically about the x axis.
    const double half = spec.wedge_dihedral / 2.0;
    const Point3 dir_a(std::cos(half), std::sin(half), 0.0);
    const Point3 dir_b(std::cos(half), -std::sin(half), 0.0);
    const double hl = spec.crease_length / 2.0;
    const Point3 c0(0, 0, -hl), c1(0, 0, hl);
    mesh.vertices = {c0,
                     c1,
                     c0 + spec.wedge_extent_a * dir_a,
                     c1 + spec.wedge_extent_a * dir_a,
                     c0 + spec.wedge_extent_b * dir_b,
                     c1 + spec.wedge_extent_b * dir_b};
    mesh.faces = {{0, 2, 3}, {0, 3, 1}, {0, 4, 5}, {0, 5, 1}};
    return mesh;
  }

  if (!(spec.pole_radius > 0.0) || !(spec.pole_height > 0.0)) {
    throw std::invalid_argument("build_primitive_mesh: pole dimensions must be positive");
  }
  if (spec.pole_sides < 3) {
    throw std::invalid_argument("build_primitive_mesh: pole needs at least 3 sides");
  }
  const int n = spec.pole_sides;
  const double hh = spec.pole_height / 2.0;
  mesh.vertices.reserve(static_cast<std::size_t>(2 * n));
  for (int j = 0; j < n; ++j) {
    const double a = 2.0 * std::numbers::pi * j / n;
    const double x = spec.pole_radius * std::cos(a);
    const double y = spec.pole_radius * std::sin(a);
    mesh.vertices.emplace_back(x, y, -hh);
    mesh.vertices.emplace_back(x, y, hh);
  }
  mesh.faces.reserve(static_cast<std::size_t>(2 * n));
  for (int j = 0; j < n; ++j) {
    const int lo0 = 2 * j, hi0 = 2 * j + 1;
    const int lo1 = 2 * ((j + 1) % n), hi1 = 2 * ((j + 1) % n) + 1;
    mesh.faces.push_back({lo0, lo1, hi1});
    mesh.faces.push_back({lo0, hi1, hi0});
  }
  return mesh;
}

LineSegment primitive_gt_line(const PrimitiveSpec& spec) {
  LineSegment line;
  const double hl =
      (spec.kind == PrimitiveKind::Pole ? spec.pole_height : spec.crease_length) / 2.0;
  line.e0 = Point3(0, 0, -hl);
  line.e1 = Point3(0, 0, hl);
  line.direction = Point3(0, 0, 1);
  return line;
}

PointCloud perturb_points(const PointCloud& cloud, double fraction, std::uint64_t seed) {
  if (!(fraction >= 0.0) || fraction >= 1.0) {
    throw std::invalid_argument("perturb_points: fraction must be in [0, 1)");
  }
  PointCloud out = cloud;
  if (fraction == 0.0 || cloud.empty()) return out;

  Point3 lo = cloud.points.front(), hi = lo;
  for (const Point3& p : cloud.points) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  const double m = fraction * (hi - lo).norm();
  Rng rng(seed);
  for (Point3& p : out.points) {
    p.x() += rng.uniform(-m, m);
    p.y() += rng.uniform(-m, m);
    p.z() += rng.uniform(-m, m);
  }
  return out;
}

namespace {

// One clutter chunk around `center`: half planar patches, half Gaussian blobs.
void append_background_chunk(PointCloud& cloud, Rng& rng, const Point3& center, int n_points) {
  const bool planar = rng.uniform() < 0.5;
  if (planar) {
    const Eigen::Matrix3d frame = random_rotation(rng);
    const double ex = rng.uniform(0.3, 1.5), ey = rng.uniform(0.3, 1.5);
    const double thickness = rng.uniform(0.0, 0.02);
    for (int i = 0; i < n_points; ++i) {
      const Point3 local(rng.uniform(-ex, ex), rng.uniform(-ey, ey),
                         rng.uniform(-thickness, thickness));
      cloud.points.push_back(center + frame * local);
    }
  } else {
    const double sigma = rng.uniform(0.1, 0.6);
    for (int i = 0; i < n_points; ++i) {
      cloud.points.push_back(center +
                             sigma * Point3(rng.normal(), rng.normal(), rng.normal()));
    }
  }
  cloud.labels.insert(cloud.labels.end(), static_cast<std::size_t>(n_points), 0);
}

void append_cropped_chunk(PointCloud& cloud, Rng& rng, const Point3& center, int n_points,
                          const PointCloud& source, const KdTree& source_tree) {
  const int anchor = static_cast<int>(rng.uniform_index(source.size()));
  if (n_points <= 1) {
    cloud.points.push_back(center);
    cloud.labels.push_back(0);
    return;
  }
  const auto idx = source_tree.knn(source.points[static_cast<std::size_t>(anchor)],
                                   n_points - 1, anchor);
  Point3 mean = source.points[static_cast<std::size_t>(anchor)];
  for (int i : idx) mean += source.points[static_cast<std::size_t>(i)];
  mean /= static_cast<double>(n_points);
  cloud.points.push_back(center + (source.points[static_cast<std::size_t>(anchor)] - mean));
  for (int i : idx) {
    cloud.points.push_back(center + (source.points[static_cast<std::size_t>(i)] - mean));
  }
  cloud.labels.insert(cloud.labels.end(), static_cast<std::size_t>(n_points), 0);
}

}  // namespace

Scene compose_scene(const SceneRecipe& recipe, const PointCloud* background_source) {
  if (recipe.n_primitive_points < 1) {
    throw std::invalid_argument("compose_scene: need at least one primitive point");
  }
  const Rng root(recipe.seed);

  // 1. Sampled, perturbed, labeled primitive.
  const TriangleMesh mesh = build_primitive_mesh(recipe.primitive);
  PointCloud prim =
      sample_mesh_uniform(mesh, recipe.n_primitive_points, root.derive(kSampleStream).seed());
  prim = perturb_points(prim, recipe.noise_fraction, root.derive(kPerturbStream).seed());
  const LineSegment gt = primitive_gt_line(recipe.primitive);
  const double threshold = recipe.primitive.effective_label_threshold();
  prim.labels.resize(prim.size());
  for (std::size_t i = 0; i < prim.size(); ++i) {
    prim.labels[i] = point_line_distance(prim.points[i], gt.e0, gt.e1) <= threshold ? 1 : 0;
  }

  // 2. Background clutter in a 10 m box around the primitive.
  Rng bg_rng = root.derive(kBackgroundStream);
  if (recipe.n_background_chunks > 0 && background_source != nullptr) {
    const long long need =
        static_cast<long long>(recipe.n_background_chunks) * recipe.points_per_chunk;
    if (static_cast<long long>(background_source->size()) < need) {
      throw std::invalid_argument(
          "compose_scene: background source has " + std::to_string(background_source->size()) +
          " points but " + std::to_string(need) + " are required (" +
          std::to_string(recipe.n_background_chunks) + " chunks x " +
          std::to_string(recipe.points_per_chunk) + " points)");
    }
  }
  KdTree source_tree;
  if (background_source != nullptr && recipe.n_background_chunks > 0) {
    source_tree = KdTree(background_source->points);
  }
  for (int c = 0; c < recipe.n_background_chunks; ++c) {
    const Point3 center(bg_rng.uniform(-5, 5), bg_rng.uniform(-5, 5), bg_rng.uniform(-5, 5));
    if (background_source != nullptr) {
      append_cropped_chunk(prim, bg_rng, center, recipe.points_per_chunk, *background_source,
                           source_tree);
    } else {
      append_background_chunk(prim, bg_rng, center, recipe.points_per_chunk);
    }
  }

  // 3. Subsample to exactly total_points, preserving class presence.
  if (recipe.total_points > static_cast<int>(prim.size())) {
    throw std::invalid_argument("compose_scene: total_points exceeds available " +
                                std::to_string(prim.size()) + " points");
  }
  Rng sub_rng = root.derive(kSubsampleStream);
  std::vector<int> keep =
      sub_rng.sample_indices(static_cast<int>(prim.size()), recipe.total_points);
  std::sort(keep.begin(), keep.end());

  const auto has_class = [&](const std::vector<std::uint8_t>& labels,
                             const std::vector<int>& idx, std::uint8_t want) {
    return std::any_of(idx.begin(), idx.end(),
                       [&](int i) { return labels[static_cast<std::size_t>(i)] == want; });
  };
  for (std::uint8_t want : {std::uint8_t(1), std::uint8_t(0)}) {
    if (has_class(prim.labels, keep, want)) continue;
    // Merged cloud may genuinely lack the class (e.g. 0-chunk pole scenes).
    int source = -1;
    for (int i = 0; i < static_cast<int>(prim.size()); ++i) {
      if (prim.labels[static_cast<std::size_t>(i)] == want) {
        source = i;
        break;
      }
    }
    if (source < 0) continue;
    // Swap it in for the first kept point of the (overrepresented) other class.
    for (int& k : keep) {
      if (prim.labels[static_cast<std::size_t>(k)] != want) {
        k = source;
        break;
      }
    }
    std::sort(keep.begin(), keep.end());
  }

  Scene scene;
  scene.kind = recipe.primitive.kind;
  scene.cloud.points.reserve(keep.size());
  scene.cloud.labels.reserve(keep.size());
  for (int i : keep) {
    scene.cloud.points.push_back(prim.points[static_cast<std::size_t>(i)]);
    scene.cloud.labels.push_back(prim.labels[static_cast<std::size_t>(i)]);
  }
  scene.gt_line = gt;

  // 4. Optional random rigid pose for the whole scene.
  if (recipe.randomize_pose) {
    Rng pose_rng = root.derive(kPoseStream);
    SE3Transform pose;
    pose.rotation = random_rotation(pose_rng);
    pose.translation = Point3(pose_rng.uniform(-5, 5), pose_rng.uniform(-5, 5),
                              pose_rng.uniform(-5, 5));
    for (Point3& p : scene.cloud.points) p = pose.apply(p);
    scene.gt_line.e0 = pose.apply(scene.gt_line.e0);
    scene.gt_line.e1 = pose.apply(scene.gt_line.e1);
    scene.gt_line.direction = pose.rotation * scene.gt_line.direction;
  }
  return scene;
}

SceneRecipe sample_desk_recipe(Rng& rng) {
  SceneRecipe r;
  r.primitive.kind =
      rng.uniform() < 0.5 ? PrimitiveKind::PlaneIntersection : PrimitiveKind::Pole;
  if (r.primitive.kind == PrimitiveKind::PlaneIntersection) {
    r.primitive.wedge_extent_a = rng.uniform(0.5, 1.5);
    r.primitive.wedge_extent_b = rng.uniform(0.5, 1.5);
    r.primitive.wedge_dihedral = rng.uniform(1.2217304763960306, 2.0943951023931953);  // 70..120 deg
    r.primitive.crease_length = rng.uniform(1.0, 2.5);
  } else {
    r.primitive.pole_radius = rng.uniform(0.05, 0.15);
    r.primitive.pole_height = rng.uniform(1.5, 2.5);
    // The whole pole stands for its line: every surface point should pass.
    r.primitive.label_threshold = r.primitive.pole_radius + 0.05 * r.primitive.pole_height;
  }
  r.n_primitive_points = 1024;
  r.noise_fraction = 0.01;
  r.n_background_chunks = 6;
  r.points_per_chunk = 128;
  r.total_points = 1536;
  return r;
}

std::vector<Scene> generate_dataset(int n_clouds, const RecipeSampler& sampler,
                                    std::uint64_t seed) {
  if (n_clouds <= 0) throw std::invalid_argument("generate_dataset: n_clouds must be positive");
  const Rng root(seed);
  std::vector<Scene> out;
  out.reserve(static_cast<std::size_t>(n_clouds));
  for (int i = 0; i < n_clouds; ++i) {
    Rng scene_rng = root.derive(static_cast<std::uint64_t>(i));
    SceneRecipe recipe = sampler(scene_rng);
    recipe.seed = scene_rng.derive(0xFFFF).seed();
    out.push_back(compose_scene(recipe));
  }
  return out;
}

void LineSceneConfig::validate() const {
  if (n_lines < 2) throw std::invalid_argument("LineSceneConfig: n_lines must be >= 2");
  if (!(min_length > 0.0)) throw std::invalid_argument("LineSceneConfig: min_length must be positive");
  if (!(length_step >= 0.0)) throw std::invalid_argument("LineSceneConfig: length_step must be >= 0");
  if (!(min_separation > 0.0)) {
    throw std::invalid_argument("LineSceneConfig: min_separation must be positive");
  }
  if (!(workspace > 0.0)) throw std::invalid_argument("LineSceneConfig: workspace must be positive");
  if (points_per_line < 2) {
    throw std::invalid_argument("LineSceneConfig: points_per_line must be >= 2");
  }
  if (!(noise_sigma >= 0.0)) throw std::invalid_argument("LineSceneConfig: noise_sigma must be >= 0");
  if (background_points < 0) {
    throw std::invalid_argument("LineSceneConfig: background_points must be >= 0");
  }
}

std::vector<LineSegment> sample_line_scene(const LineSceneConfig& cfg, Rng& rng) {
  cfg.validate();
  std::vector<LineSegment> lines;
  // Segments are kept apart by bounding spheres: a segment of length L owns a
  // sphere of radius L/2 + min_separation/2 around its midpoint, so disjoint
  // spheres guarantee at least min_separation of clearance between segments.
  std::vector<Point3> centers;
  std::vector<double> radii;
  for (int i = 0; i < cfg.n_lines; ++i) {
    const double length = cfg.min_length + i * cfg.length_step;
    Vec3 dir;
    if (i % 3 == 2) {
      dir = Vec3::UnitZ();
    } else {
      // Distinct azimuths spread over half the circle: horizontal lines are
      // pairwise non-parallel by construction.
      const double az =
          (static_cast<double>(i) + rng.uniform(0.05, 0.45)) * std::numbers::pi / cfg.n_lines;
      dir = Vec3(std::cos(az), std::sin(az), 0.0);
    }
    const double radius = 0.5 * length + 0.5 * cfg.min_separation;
    bool placed = false;
    for (int attempt = 0; attempt < 5000 && !placed; ++attempt) {
      const Point3 c(rng.uniform(-cfg.workspace, cfg.workspace),
                     rng.uniform(-cfg.workspace, cfg.workspace), rng.uniform(0.0, 1.0));
      placed = true;
      for (std::size_t j = 0; j < centers.size(); ++j) {
        if ((c - centers[j]).norm() < radius + radii[j]) {
          placed = false;
          break;
        }
      }
      if (placed) {
        centers.push_back(c);
        radii.push_back(radius);
        LineSegment s;
        s.e0 = c - 0.5 * length * dir;
        s.e1 = c + 0.5 * length * dir;
        s.direction = dir;
        lines.push_back(s);
      }
    }
    if (!placed) {
      throw std::runtime_error("sample_line_scene: could not place line " + std::to_string(i) +
                               "; enlarge the workspace or relax min_separation");
    }
  }
  return lines;
}

PointCloud sample_labeled_view(const std::vector<LineSegment>& lines, const LineSceneConfig& cfg,
                               Rng& rng) {
  cfg.validate();
  PointCloud cloud;
  double top = 0.0;
  for (const auto& ln : lines) {
    top = std::max({top, ln.e0.z(), ln.e1.z()});
    for (int i = 0; i < cfg.points_per_line; ++i) {
      const double t = static_cast<double>(i) / (cfg.points_per_line - 1);
      Point3 p = ln.e0 + t * (ln.e1 - ln.e0);
      if (cfg.noise_sigma > 0.0) {
        p += cfg.noise_sigma * Vec3(rng.normal(), rng.normal(), rng.normal());
      }
      cloud.points.push_back(p);
      cloud.labels.push_back(1);
    }
  }
  // Clutter floats in a slab strictly above the highest endpoint. Vertical
  // lines extend (as infinite lines) into that slab, so draws are rejected
  // until they clear every line by the separation distance.
  const double z_lo = top + cfg.min_separation;
  for (int i = 0; i < cfg.background_points; ++i) {
    for (int attempt = 0; attempt < 1000; ++attempt) {
      const Point3 p(rng.uniform(-cfg.workspace, cfg.workspace),
                     rng.uniform(-cfg.workspace, cfg.workspace), rng.uniform(z_lo, z_lo + 3.0));
      bool clear = true;
      for (const auto& ln : lines) {
        if (point_line_distance(p, ln.e0, ln.e1) < cfg.min_separation) {
          clear = false;
          break;
        }
      }
      if (clear) {
        cloud.points.push_back(p);
        cloud.labels.push_back(0);
        break;
      }
    }
  }
  if (cloud.size() != lines.size() * static_cast<std::size_t>(cfg.points_per_line) +
                          static_cast<std::size_t>(cfg.background_points)) {
    throw std::runtime_error("sample_labeled_view: could not place clutter clear of the lines");
  }
  return cloud;
}

}  // namespace linereg
