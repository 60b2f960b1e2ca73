#include <doctest.h>

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "linereg/geometry.hpp"
#include "linereg/rng.hpp"
#include "linereg/synthdata.hpp"
#include "linereg/types.hpp"

using namespace linereg;

namespace {

// Independent oracle: principal direction of label-1 points via the
// eigenvector of the largest covariance eigenvalue (total least squares).
Point3 tls_direction(const PointCloud& cloud) {
  Point3 mean = Point3::Zero();
  int n = 0;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    if (cloud.labels[i] == 1) {
      mean += cloud.points[i];
      ++n;
    }
  }
  REQUIRE(n >= 2);
  mean /= n;
  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    if (cloud.labels[i] == 1) {
      const Point3 d = cloud.points[i] - mean;
      cov += d * d.transpose();
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(cov);
  return es.eigenvectors().col(2);
}

}  // namespace

TEST_CASE("wedge mesh: 4 triangles sharing a crease of the requested length") {
  PrimitiveSpec spec;  // defaults: 90 degree wedge, 1m faces, 1m crease
  const auto mesh = build_primitive_mesh(spec);
  CHECK(mesh.faces.size() == 4);
  const auto line = primitive_gt_line(spec);
  CHECK((line.e1 - line.e0).norm() == doctest::Approx(1.0));
  // The crease endpoints are mesh vertices 0 and 1.
  CHECK((mesh.vertices[0] - line.e0).norm() < 1e-15);
  CHECK((mesh.vertices[1] - line.e1).norm() < 1e-15);
  // Dihedral between the faces equals the requested angle.
  const Point3 dir_a = (mesh.vertices[2] - mesh.vertices[0]).normalized();
  const Point3 dir_b = (mesh.vertices[4] - mesh.vertices[0]).normalized();
  CHECK(std::acos(dir_a.dot(dir_b)) == doctest::Approx(spec.wedge_dihedral).epsilon(1e-12));
}

TEST_CASE("pole mesh: 2n side triangles, vertices on the cylinder") {
  PrimitiveSpec spec;
  spec.kind = PrimitiveKind::Pole;
  spec.pole_radius = 0.1;
  spec.pole_height = 2.0;
  spec.pole_sides = 16;
  const auto mesh = build_primitive_mesh(spec);
  CHECK(mesh.faces.size() == 32);
  CHECK(mesh.vertices.size() == 32);
  const auto line = primitive_gt_line(spec);
  for (const Point3& v : mesh.vertices) {
    CHECK(point_line_distance(v, line.e0, line.e1) == doctest::Approx(0.1).epsilon(1e-12));
  }
}

TEST_CASE("degenerate primitive dimensions are rejected") {
  PrimitiveSpec spec;
  spec.wedge_dihedral = 0.0;
  CHECK_THROWS_AS(build_primitive_mesh(spec), std::invalid_argument);
  spec.wedge_dihedral = 3.2;  // > pi
  CHECK_THROWS_AS(build_primitive_mesh(spec), std::invalid_argument);
  spec = PrimitiveSpec{};
  spec.wedge_extent_a = -1.0;
  CHECK_THROWS_AS(build_primitive_mesh(spec), std::invalid_argument);
  spec = PrimitiveSpec{};
  spec.kind = PrimitiveKind::Pole;
  spec.pole_radius = 0.0;
  CHECK_THROWS_AS(build_primitive_mesh(spec), std::invalid_argument);
  spec.pole_radius = 0.1;
  spec.pole_sides = 2;
  CHECK_THROWS_AS(build_primitive_mesh(spec), std::invalid_argument);
}

TEST_CASE("perturb_points: zero fraction is the identity, bound holds") {
  Rng rng(401);
  PointCloud c;
  for (int i = 0; i < 100; ++i) {
    c.points.emplace_back(rng.uniform(0, 1), rng.uniform(0, 1), rng.uniform(0, 1));
  }
  const auto same = perturb_points(c, 0.0, 5);
  for (std::size_t i = 0; i < c.size(); ++i) CHECK(same.points[i] == c.points[i]);

  // Normalize the cloud to unit bbox diagonal so the bound is exactly 0.05.
  Point3 lo = c.points[0], hi = c.points[0];
  for (const Point3& p : c.points) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  const double diag = (hi - lo).norm();
  for (Point3& p : c.points) p /= diag;
  const auto moved = perturb_points(c, 0.05, 5);
  for (std::size_t i = 0; i < c.size(); ++i) {
    CHECK((moved.points[i] - c.points[i]).cwiseAbs().maxCoeff() <= 0.05 + 1e-12);
  }

  const auto again = perturb_points(c, 0.05, 5);
  for (std::size_t i = 0; i < c.size(); ++i) CHECK(again.points[i] == moved.points[i]);

  CHECK_THROWS_AS(perturb_points(c, 1.0, 5), std::invalid_argument);
  CHECK_THROWS_AS(perturb_points(c, -0.1, 5), std::invalid_argument);
}

TEST_CASE("compose_scene without background is just the labeled primitive") {
  SceneRecipe r;
  r.n_background_chunks = 0;
  r.n_primitive_points = 500;
  r.total_points = 500;
  r.randomize_pose = false;
  r.seed = 11;
  const auto scene = compose_scene(r);
  CHECK(scene.cloud.size() == 500);
  REQUIRE(scene.cloud.labels.size() == 500);
  int pos = 0;
  for (auto l : scene.cloud.labels) pos += l;
  CHECK(pos > 0);
  CHECK(pos < 500);  // a wedge always has off-crease points
}

TEST_CASE("paper-scale recipe: 5000 points out, both classes present") {
  SceneRecipe r;
  r.n_primitive_points = 4000;
  r.noise_fraction = 0.05;
  r.n_background_chunks = 40;
  r.points_per_chunk = 1000;
  r.total_points = 5000;
  r.seed = 12;
  const auto scene = compose_scene(r);
  CHECK(scene.cloud.size() == 5000);
  int pos = 0;
  for (auto l : scene.cloud.labels) pos += l;
  CHECK(pos >= 1);
  CHECK(pos < 5000);
}

TEST_CASE("labels agree with a direct point-to-line distance oracle") {
  SceneRecipe r;
  r.n_primitive_points = 800;
  r.n_background_chunks = 2;
  r.points_per_chunk = 100;
  r.total_points = 900;
  r.randomize_pose = false;  // gt line equals the canonical crease
  r.seed = 13;
  const auto scene = compose_scene(r);
  const double threshold = r.primitive.effective_label_threshold();
  for (std::size_t i = 0; i < scene.cloud.size(); ++i) {
    const double d =
        point_line_distance(scene.cloud.points[i], scene.gt_line.e0, scene.gt_line.e1);
    if (scene.cloud.labels[i] == 1) {
      CHECK(d <= threshold + 1e-12);
    }
    // Background chunks can land near the line by chance, so the converse
    // only holds for primitive points; check the count is sane instead.
  }
}

TEST_CASE("label threshold monotonicity") {
  SceneRecipe base;
  base.n_background_chunks = 0;
  base.n_primitive_points = 600;
  base.total_points = 600;
  base.randomize_pose = false;
  base.seed = 14;
  int prev = -1;
  for (double t : {0.02, 0.05, 0.1, 0.3}) {
    SceneRecipe r = base;
    r.primitive.label_threshold = t;
    const auto scene = compose_scene(r);
    int pos = 0;
    for (auto l : scene.cloud.labels) pos += l;
    CHECK(pos >= prev);
    prev = pos;
  }
}

TEST_CASE("noise-free scene: TLS fit of label-1 points recovers the line direction") {
  for (auto kind : {PrimitiveKind::PlaneIntersection, PrimitiveKind::Pole}) {
    SceneRecipe r;
    r.primitive.kind = kind;
    if (kind == PrimitiveKind::Pole) {
      r.primitive.pole_radius = 0.05;
      r.primitive.pole_height = 2.0;
      r.primitive.label_threshold = 0.1;
    }
    r.noise_fraction = 0.0;
    r.n_background_chunks = 0;
    r.n_primitive_points = 2000;
    r.total_points = 2000;
    r.randomize_pose = true;  // direction must be recovered in the posed frame
    r.seed = 15;
    const auto scene = compose_scene(r);
    const Point3 fit = tls_direction(scene.cloud);
    const double cosang = std::abs(fit.dot(scene.gt_line.direction));
    // Wedge crease points spread uniformly along the line; angular error of a
    // TLS fit over exact on-line points is tiny but not zero because label-1
    // includes points up to `threshold` off the crease.
    CHECK(std::acos(std::min(1.0, cosang)) < (kind == PrimitiveKind::Pole ? 5e-2 : 5e-2));
  }
}

TEST_CASE("crop-mode background: shortfall is rejected with a clear message") {
  SceneRecipe r;
  r.n_background_chunks = 4;
  r.points_per_chunk = 100;
  PointCloud tiny;
  for (int i = 0; i < 50; ++i) tiny.points.emplace_back(i * 0.1, 0, 0);
  CHECK_THROWS_WITH_AS(compose_scene(r, &tiny),
                       doctest::Contains("400"), std::invalid_argument);
}

TEST_CASE("crop-mode background with a sufficient source works") {
  Rng rng(402);
  PointCloud source;
  for (int i = 0; i < 2000; ++i) {
    source.points.emplace_back(rng.uniform(-10, 10), rng.uniform(-10, 10), rng.uniform(-2, 2));
  }
  SceneRecipe r;
  r.n_primitive_points = 300;
  r.n_background_chunks = 3;
  r.points_per_chunk = 50;
  r.total_points = 450;
  r.seed = 16;
  const auto scene = compose_scene(r, &source);
  CHECK(scene.cloud.size() == 450);
}

TEST_CASE("generate_dataset: deterministic, mixes both primitive kinds") {
  const auto a = generate_dataset(50, sample_desk_recipe, 99);
  const auto b = generate_dataset(50, sample_desk_recipe, 99);
  REQUIRE(a.size() == 50);
  int wedges = 0, poles = 0;
  for (std::size_t s = 0; s < a.size(); ++s) {
    REQUIRE(a[s].cloud.size() == b[s].cloud.size());
    for (std::size_t i = 0; i < a[s].cloud.size(); ++i) {
      CHECK(a[s].cloud.points[i] == b[s].cloud.points[i]);
      CHECK(a[s].cloud.labels[i] == b[s].cloud.labels[i]);
    }
    (a[s].kind == PrimitiveKind::Pole ? poles : wedges)++;
    // Class presence invariant.
    int pos = 0;
    for (auto l : a[s].cloud.labels) pos += l;
    CHECK(pos >= 1);
    CHECK(pos < static_cast<int>(a[s].cloud.size()));
  }
  CHECK(wedges > 0);
  CHECK(poles > 0);

  CHECK_THROWS_AS(generate_dataset(0, sample_desk_recipe, 1), std::invalid_argument);
}

namespace {

// Closest approach between two segments, by dense parameter sampling: an
// independent check on the layout generator's separation guarantee.
double segment_gap(const LineSegment& a, const LineSegment& b) {
  double best = std::numeric_limits<double>::infinity();
  const int n = 64;
  for (int i = 0; i <= n; ++i) {
    const Point3 p = a.e0 + (static_cast<double>(i) / n) * (a.e1 - a.e0);
    for (int j = 0; j <= n; ++j) {
      const Point3 q = b.e0 + (static_cast<double>(j) / n) * (b.e1 - b.e0);
      best = std::min(best, (p - q).norm());
    }
  }
  return best;
}

}  // namespace

TEST_CASE("line-scene layout honors lengths, separation, and direction mix") {
  LineSceneConfig cfg;
  for (std::uint64_t seed = 1301; seed < 1309; ++seed) {
    CAPTURE(seed);
    Rng rng(seed);
    const auto lines = sample_line_scene(cfg, rng);
    REQUIRE(lines.size() == static_cast<std::size_t>(cfg.n_lines));
    int verticals = 0, nonparallel_to_first = 0;
    for (std::size_t i = 0; i < lines.size(); ++i) {
      CHECK(lines[i].length() ==
            doctest::Approx(cfg.min_length + static_cast<double>(i) * cfg.length_step)
                .epsilon(1e-12));
      if (std::abs(lines[i].direction.z()) > 0.99) ++verticals;
      if (std::abs(lines[i].direction.dot(lines[0].direction)) < 0.999) ++nonparallel_to_first;
      for (std::size_t j = i + 1; j < lines.size(); ++j) {
        CHECK(segment_gap(lines[i], lines[j]) >= cfg.min_separation - 1e-9);
      }
    }
    CHECK(verticals >= 2);            // i = 2 and i = 5 at the default count
    CHECK(nonparallel_to_first >= 4); // the non-parallel supply registration needs
  }
}

TEST_CASE("line-scene layout is deterministic per seed") {
  LineSceneConfig cfg;
  Rng a(1310), b(1310), c(1311);
  const auto la = sample_line_scene(cfg, a);
  const auto lb = sample_line_scene(cfg, b);
  const auto lc = sample_line_scene(cfg, c);
  REQUIRE(la.size() == lb.size());
  bool identical = true, differs = false;
  for (std::size_t i = 0; i < la.size(); ++i) {
    identical = identical && la[i].e0 == lb[i].e0 && la[i].e1 == lb[i].e1;
    differs = differs || la[i].e0 != lc[i].e0;
  }
  CHECK(identical);
  CHECK(differs);
}

TEST_CASE("labeled views put label 1 on lines and label 0 clutter far away") {
  LineSceneConfig cfg;
  Rng rng(1312);
  const auto lines = sample_line_scene(cfg, rng);
  const PointCloud view = sample_labeled_view(lines, cfg, rng);
  REQUIRE(view.size() == static_cast<std::size_t>(cfg.n_lines * cfg.points_per_line +
                                                  cfg.background_points));
  for (std::size_t i = 0; i < view.size(); ++i) {
    double nearest = std::numeric_limits<double>::infinity();
    for (const auto& ln : lines) {
      nearest = std::min(nearest, point_line_distance(view.points[i], ln.e0, ln.e1));
    }
    if (view.labels[i] == 1) {
      CHECK(nearest < 6.0 * cfg.noise_sigma);
    } else {
      CHECK(nearest >= cfg.min_separation - 1e-9);
    }
  }
  // Two views of one layout never share noise.
  const PointCloud again = sample_labeled_view(lines, cfg, rng);
  CHECK(again.points[0] != view.points[0]);
}

TEST_CASE("line-scene configs validate and impossible layouts are reported") {
  LineSceneConfig cfg;
  cfg.n_lines = 1;
  CHECK_THROWS_AS([&] { Rng r(1); return sample_line_scene(cfg, r); }(), std::invalid_argument);
  cfg = LineSceneConfig{};
  cfg.workspace = 0.4;  // cannot hold seven well-separated lines
  cfg.min_separation = 3.0;
  Rng r(1313);
  CHECK_THROWS_AS(sample_line_scene(cfg, r), std::runtime_error);
}
