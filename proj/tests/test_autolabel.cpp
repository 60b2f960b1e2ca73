#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <memory>
#include <numeric>
#include <set>
#include <stdexcept>
#include <vector>

#include <Eigen/Eigenvalues>

#include "linereg/autolabel.hpp"
#include "linereg/rng.hpp"
#include "linereg/synthdata.hpp"
#include "linereg/types.hpp"

using namespace linereg;

namespace {

PointCloud random_cloud(Rng& rng, std::size_t n, double extent) {
  PointCloud c;
  for (std::size_t i = 0; i < n; ++i) {
    c.points.emplace_back(rng.uniform(-extent, extent), rng.uniform(-extent, extent),
                          rng.uniform(-extent, extent));
  }
  return c;
}

// Exactly pose-invariant mock: labels by index parity, ignoring coordinates.
PointPredictor parity_predictor() {
  return [](const PointCloud& cloud) {
    std::vector<std::uint8_t> labels(cloud.size());
    for (std::size_t i = 0; i < labels.size(); ++i) labels[i] = i % 2 == 0 ? 1 : 0;
    return labels;
  };
}

// Union-find oracle for region growth: full O(N^2) adjacency over candidate
// points, components extracted independently of the KD-tree path.
std::vector<std::vector<int>> brute_components(const PointCloud& cloud,
                                               const std::vector<std::uint8_t>& mask, double r) {
  const int n = static_cast<int>(cloud.size());
  std::vector<int> parent(static_cast<std::size_t>(n));
  std::iota(parent.begin(), parent.end(), 0);
  const auto find = [&](int a) {
    while (parent[static_cast<std::size_t>(a)] != a) a = parent[static_cast<std::size_t>(a)];
    return a;
  };
  for (int i = 0; i < n; ++i) {
    if (!mask[static_cast<std::size_t>(i)]) continue;
    for (int j = i + 1; j < n; ++j) {
      if (!mask[static_cast<std::size_t>(j)]) continue;
      if ((cloud.points[static_cast<std::size_t>(i)] - cloud.points[static_cast<std::size_t>(j)])
              .norm() <= r) {
        parent[static_cast<std::size_t>(find(i))] = find(j);
      }
    }
  }
  std::vector<std::vector<int>> comps;
  std::vector<int> root_slot(static_cast<std::size_t>(n), -1);
  for (int i = 0; i < n; ++i) {
    if (!mask[static_cast<std::size_t>(i)]) continue;
    const int r0 = find(i);
    if (root_slot[static_cast<std::size_t>(r0)] < 0) {
      root_slot[static_cast<std::size_t>(r0)] = static_cast<int>(comps.size());
      comps.emplace_back();
    }
    comps[static_cast<std::size_t>(root_slot[static_cast<std::size_t>(r0)])].push_back(i);
  }
  for (auto& c : comps) std::sort(c.begin(), c.end());
  std::sort(comps.begin(), comps.end(),
            [](const auto& a, const auto& b) { return a.front() < b.front(); });
  return comps;
}

}  // namespace

TEST_CASE("adaptation config validation") {
  AdaptationConfig cfg;
  cfg.validate();
  AdaptationConfig bad = cfg;
  bad.n_perturbations = 0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = cfg;
  bad.vote_threshold = 1.5;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = cfg;
  bad.growth_radius = 0.0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = cfg;
  bad.fit.linearity_min = 0.5;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("single-pass adaptation equals the raw prediction (identity pose)") {
  Rng rng(701);
  const auto cloud = random_cloud(rng, 50, 1.0);
  AdaptationConfig cfg;
  cfg.n_perturbations = 1;  // pass 0 is always the identity
  const auto predict = [](const PointCloud& c) {
    std::vector<std::uint8_t> l(c.size());
    for (std::size_t i = 0; i < c.size(); ++i) l[i] = c.points[i].x() > 0 ? 1 : 0;
    return l;
  };
  const auto votes = geometric_adaptation(cloud, predict, cfg, 9);
  const auto raw = predict(cloud);
  const auto frac = votes.fractions();
  REQUIRE(frac.size() == cloud.size());
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    CHECK(votes.total[i] == 1);
    CHECK(frac[i] == static_cast<double>(raw[i]));
  }
}

TEST_CASE("a pose-invariant predictor votes unanimously") {
  Rng rng(702);
  const auto cloud = random_cloud(rng, 64, 1.0);
  AdaptationConfig cfg;  // 16 perturbations
  const auto votes = geometric_adaptation(cloud, parity_predictor(), cfg, 11);
  const auto frac = votes.fractions();
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    CHECK(votes.total[i] == cfg.n_perturbations);
    CHECK((frac[i] == 0.0 || frac[i] == 1.0));
    CHECK(frac[i] == (i % 2 == 0 ? 1.0 : 0.0));
  }
}

TEST_CASE("noisy-vote candidates match a simulated Bernoulli-majority oracle") {
  Rng rng(703);
  const auto cloud = random_cloud(rng, 80, 1.0);
  std::vector<std::uint8_t> base(cloud.size());
  for (std::size_t i = 0; i < base.size(); ++i) base[i] = rng.uniform() < 0.5 ? 1 : 0;

  AdaptationConfig cfg;
  cfg.n_perturbations = 20;
  const std::uint64_t flip_seed = 40404;
  // Mock: flips 10% of the base labels per pass, coordinates ignored.
  auto flip_rng = std::make_shared<Rng>(flip_seed);
  const PointPredictor predict = [base, flip_rng](const PointCloud& c) {
    std::vector<std::uint8_t> l(c.size());
    for (std::size_t i = 0; i < c.size(); ++i) {
      const bool flip = flip_rng->uniform() < 0.1;
      l[i] = flip ? static_cast<std::uint8_t>(1 - base[i]) : base[i];
    }
    return l;
  };
  const auto votes = geometric_adaptation(cloud, predict, cfg, 12);
  const auto candidates = threshold_candidates(votes, cfg.vote_threshold);

  // Direct simulation on the same flip stream.
  Rng oracle_rng(flip_seed);
  std::vector<int> oracle_votes(cloud.size(), 0);
  for (int pass = 0; pass < cfg.n_perturbations; ++pass) {
    for (std::size_t i = 0; i < cloud.size(); ++i) {
      const bool flip = oracle_rng.uniform() < 0.1;
      const std::uint8_t l = flip ? static_cast<std::uint8_t>(1 - base[i]) : base[i];
      if (l) oracle_votes[i] += 1;
    }
  }
  bool any_candidate = false, any_rejected_positive = false;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    CHECK(votes.positive[i] == oracle_votes[i]);
    const bool want = static_cast<double>(oracle_votes[i]) >
                      cfg.vote_threshold * static_cast<double>(cfg.n_perturbations);
    CHECK(candidates[i] == (want ? 1 : 0));
    any_candidate |= want;
    any_rejected_positive |= (!want && oracle_votes[i] > 0);
  }
  CHECK(any_candidate);          // the case must exercise both outcomes
  CHECK(any_rejected_positive);
}

TEST_CASE("candidate threshold is strict and monotone") {
  VoteMap votes;
  votes.positive = {16, 17, 20, 0, 15};
  votes.total = {20, 20, 20, 20, 20};
  const auto at_08 = threshold_candidates(votes, 0.8);
  CHECK(at_08 == std::vector<std::uint8_t>{0, 1, 1, 0, 0});  // 16/20 = 0.8 exactly -> out
  const auto frac = votes.fractions();
  for (double f : frac) {
    CHECK(f >= 0.0);
    CHECK(f <= 1.0);
  }
  // monotone non-increasing candidate sets in the threshold
  Rng rng(704);
  VoteMap rv;
  for (int i = 0; i < 200; ++i) {
    rv.total.push_back(16);
    rv.positive.push_back(static_cast<int>(rng.uniform_index(17)));
  }
  std::vector<std::uint8_t> prev(200, 1);
  for (double th : {0.1, 0.25, 0.5, 0.75, 0.8, 0.95}) {
    const auto cur = threshold_candidates(rv, th);
    for (std::size_t i = 0; i < cur.size(); ++i) CHECK(cur[i] <= prev[i]);
    prev = cur;
  }
  // all-zero votes -> no candidates
  VoteMap zeros;
  zeros.positive.assign(10, 0);
  zeros.total.assign(10, 16);
  const auto none = threshold_candidates(zeros, 0.8);
  CHECK(std::count(none.begin(), none.end(), 1) == 0);
}

TEST_CASE("region growth: chains within the radius form one cluster") {
  PointCloud cloud;
  for (int i = 0; i < 10; ++i) cloud.points.emplace_back(0.3 * i, 0.0, 0.0);  // links 0.3 < 0.5
  std::vector<std::uint8_t> mask(cloud.size(), 1);
  const auto clusters = region_grow(cloud, mask, 0.5);
  REQUIRE(clusters.size() == 1);
  CHECK(clusters[0].size() == 10);
}

TEST_CASE("region growth: a 2 m gap separates two clusters") {
  PointCloud cloud;
  for (int i = 0; i < 5; ++i) cloud.points.emplace_back(0.3 * i, 0.0, 0.0);
  for (int i = 0; i < 5; ++i) cloud.points.emplace_back(0.3 * i, 3.2, 0.0);  // 3.2 - 1.2 = 2 m gap
  std::vector<std::uint8_t> mask(cloud.size(), 1);
  const auto clusters = region_grow(cloud, mask, 0.5);
  REQUIRE(clusters.size() == 2);
  CHECK(clusters[0] == std::vector<int>{0, 1, 2, 3, 4});
  CHECK(clusters[1] == std::vector<int>{5, 6, 7, 8, 9});
}

TEST_CASE("region growth matches the union-find oracle on random instances") {
  Rng rng(705);
  for (int rep = 0; rep < 30; ++rep) {
    const std::size_t n = 40 + rng.uniform_index(160);
    const auto cloud = random_cloud(rng, n, 2.0);
    std::vector<std::uint8_t> mask(n);
    for (auto& m : mask) m = rng.uniform() < 0.5 ? 1 : 0;
    const double r = rng.uniform(0.2, 0.8);
    const auto got = region_grow(cloud, mask, r);
    const auto want = brute_components(cloud, mask, r);
    REQUIRE(got.size() == want.size());
    for (std::size_t c = 0; c < got.size(); ++c) CHECK(got[c] == want[c]);
  }
}

TEST_CASE("region growth partitions the candidate set before the size filter") {
  Rng rng(706);
  const auto cloud = random_cloud(rng, 300, 2.0);
  std::vector<std::uint8_t> mask(cloud.size());
  std::size_t n_candidates = 0;
  for (auto& m : mask) {
    m = rng.uniform() < 0.4 ? 1 : 0;
    n_candidates += m;
  }
  const auto clusters = region_grow(cloud, mask, 0.4, 1);
  std::set<int> seen;
  std::size_t total = 0;
  for (const auto& c : clusters) {
    for (int i : c) {
      CHECK(mask[static_cast<std::size_t>(i)] == 1);
      CHECK(seen.insert(i).second);  // disjoint
    }
    total += c.size();
  }
  CHECK(total == n_candidates);  // nothing dropped at min_points = 1
  // ordering: by smallest member, members ascending
  for (std::size_t c = 0; c + 1 < clusters.size(); ++c) {
    CHECK(clusters[c].front() < clusters[c + 1].front());
    CHECK(std::is_sorted(clusters[c].begin(), clusters[c].end()));
  }
}

TEST_CASE("region growth drops clusters below min_points") {
  PointCloud cloud;
  for (int i = 0; i < 6; ++i) cloud.points.emplace_back(0.2 * i, 0.0, 0.0);  // cluster of 6
  cloud.points.emplace_back(5.0, 0.0, 0.0);                                  // singleton
  cloud.points.emplace_back(5.2, 0.0, 0.0);                                  // pair with previous
  std::vector<std::uint8_t> mask(cloud.size(), 1);
  const auto kept = region_grow(cloud, mask, 0.5, 5);
  REQUIRE(kept.size() == 1);
  CHECK(kept[0].size() == 6);
  CHECK_THROWS_AS(region_grow(cloud, {1, 0}, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(region_grow(cloud, mask, -1.0), std::invalid_argument);
}

TEST_CASE("line fit recovers an exact axis-aligned segment") {
  PointCloud cloud;
  for (int i = 0; i <= 10; ++i) cloud.points.emplace_back(0.0, 0.0, 0.4 * i);  // (0,0,0)..(0,0,4)
  std::vector<int> cluster(cloud.size());
  std::iota(cluster.begin(), cluster.end(), 0);
  const auto seg = fit_line(cloud, cluster, LineFitConfig{});
  REQUIRE(seg.has_value());
  CHECK(seg->length() == doctest::Approx(4.0).epsilon(1e-12));
  CHECK(std::abs(seg->direction.dot(Vec3::UnitZ())) == doctest::Approx(1.0).epsilon(1e-12));
  const Point3 lo(0, 0, 0), hi(0, 0, 4);
  const double direct = std::max((seg->e0 - lo).norm(), (seg->e1 - hi).norm());
  const double swapped = std::max((seg->e0 - hi).norm(), (seg->e1 - lo).norm());
  CHECK(std::min(direct, swapped) < 1e-9);
  // direction convention: unit vector from e0 to e1
  CHECK((seg->direction - (seg->e1 - seg->e0).normalized()).norm() < 1e-12);
}

TEST_CASE("line fit rejects an isotropic blob by the linearity gate") {
  Rng rng(707);
  PointCloud cloud;
  for (int i = 0; i < 300; ++i) {
    cloud.points.emplace_back(0.1 * rng.normal(), 0.1 * rng.normal(), 0.1 * rng.normal());
  }
  std::vector<int> cluster(cloud.size());
  std::iota(cluster.begin(), cluster.end(), 0);
  LineFitConfig cfg;  // linearity_min = 10
  CHECK(!fit_line(cloud, cluster, cfg).has_value());

  // Independent verification that the rejection reason is the eigenvalue
  // ratio: direct covariance eigendecomposition in the test.
  Point3 c = Point3::Zero();
  for (const auto& p : cloud.points) c += p;
  c /= static_cast<double>(cloud.size());
  Mat3 cov = Mat3::Zero();
  for (const auto& p : cloud.points) cov += (p - c) * (p - c).transpose();
  cov /= static_cast<double>(cloud.size());
  Eigen::SelfAdjointEigenSolver<Mat3> eig(cov);
  CHECK(eig.eigenvalues()(2) / eig.eigenvalues()(1) < cfg.linearity_min);
}

TEST_CASE("line fit on a noisy line matches the PCA oracle within 1 degree") {
  Rng rng(708);
  const Vec3 truth = Vec3(0.3, -0.5, 0.8).normalized();
  PointCloud cloud;
  for (int i = 0; i < 200; ++i) {
    const double t = rng.uniform(-1.5, 1.5);
    const Vec3 noise(0.02 * rng.normal(), 0.02 * rng.normal(), 0.02 * rng.normal());
    cloud.points.emplace_back(t * truth + noise);
  }
  std::vector<int> cluster(cloud.size());
  std::iota(cluster.begin(), cluster.end(), 0);
  const auto seg = fit_line(cloud, cluster, LineFitConfig{});
  REQUIRE(seg.has_value());
  CHECK(std::abs(seg->direction.dot(truth)) > std::cos(1.0 * M_PI / 180.0));

  // PCA oracle: principal eigenvector of the member covariance, computed
  // independently, must coincide with the fitted direction (up to sign).
  Point3 c = Point3::Zero();
  for (const auto& p : cloud.points) c += p;
  c /= static_cast<double>(cloud.size());
  Mat3 cov = Mat3::Zero();
  for (const auto& p : cloud.points) cov += (p - c) * (p - c).transpose();
  cov /= static_cast<double>(cloud.size());
  Eigen::SelfAdjointEigenSolver<Mat3> eig(cov);
  const Vec3 oracle_dir = eig.eigenvectors().col(2);
  CHECK(std::abs(seg->direction.dot(oracle_dir)) == doctest::Approx(1.0).epsilon(1e-9));

  // invariant: endpoints on the fitted infinite line, member projections
  // inside [e0, e1]
  const double len = seg->length();
  for (int i : cluster) {
    const double t = (cloud.points[static_cast<std::size_t>(i)] - seg->e0).dot(seg->direction);
    CHECK(t >= -1e-12);
    CHECK(t <= len + 1e-12);
  }
}

TEST_CASE("line fit rejections: coincident, short, or tiny clusters") {
  PointCloud coincident;
  for (int i = 0; i < 8; ++i) coincident.points.emplace_back(1.0, 2.0, 3.0);
  std::vector<int> all8 = {0, 1, 2, 3, 4, 5, 6, 7};
  CHECK(!fit_line(coincident, all8, LineFitConfig{}).has_value());

  PointCloud shorty;
  for (int i = 0; i < 8; ++i) shorty.points.emplace_back(0.04 * i, 0.0, 0.0);  // length 0.28 < 0.5
  CHECK(!fit_line(shorty, all8, LineFitConfig{}).has_value());

  PointCloud fine;
  for (int i = 0; i < 8; ++i) fine.points.emplace_back(0.2 * i, 0.0, 0.0);
  CHECK(fit_line(fine, all8, LineFitConfig{}).has_value());
  CHECK(!fit_line(fine, {0, 1, 2, 3}, LineFitConfig{}).has_value());  // below min_points
  CHECK_THROWS_AS(fit_line(fine, {0, 99}, LineFitConfig{}), std::invalid_argument);
}

namespace {

// Ground-truth labels travel with the cloud through rigid transforms, so
// reading them back is an exactly pose-invariant oracle labeler.
PointPredictor oracle_predictor() {
  return [](const PointCloud& c) { return c.labels; };
}

SceneRecipe recovery_recipe(PrimitiveKind kind, std::uint64_t seed) {
  SceneRecipe r;
  r.primitive.kind = kind;
  if (kind == PrimitiveKind::PlaneIntersection) {
    r.primitive.crease_length = 2.0;
    r.primitive.wedge_extent_a = 1.0;
    r.primitive.wedge_extent_b = 1.0;
  } else {
    r.primitive.pole_radius = 0.08;
    r.primitive.pole_height = 2.0;
    r.primitive.label_threshold = r.primitive.pole_radius + 0.05 * r.primitive.pole_height;
  }
  r.n_primitive_points = 2200;
  r.noise_fraction = 0.003;
  r.n_background_chunks = 4;
  r.points_per_chunk = 100;
  r.total_points = 2400;
  r.randomize_pose = true;
  r.seed = seed;
  return r;
}

double endpoint_error(const LineSegment& got, const LineSegment& want) {
  const double direct = std::max((got.e0 - want.e0).norm(), (got.e1 - want.e1).norm());
  const double swapped = std::max((got.e0 - want.e1).norm(), (got.e1 - want.e0).norm());
  return std::min(direct, swapped);
}

}  // namespace

TEST_CASE("auto labeling with an oracle labeler recovers ground-truth lines") {
  for (auto kind : {PrimitiveKind::PlaneIntersection, PrimitiveKind::Pole}) {
    CAPTURE(static_cast<int>(kind));
    const auto scene = compose_scene(recovery_recipe(kind, 2024));
    std::vector<PointCloud> clouds = {scene.cloud};
    AdaptationConfig cfg;
    const auto lines = auto_label_round(clouds, oracle_predictor(), cfg, 31);
    REQUIRE(lines.size() == 1);
    REQUIRE(lines[0].size() == 1);
    CHECK(endpoint_error(lines[0][0], scene.gt_line) < 0.05);

    // labels written back == members of the accepted line
    std::set<int> members(lines[0][0].member_indices.begin(), lines[0][0].member_indices.end());
    for (std::size_t i = 0; i < clouds[0].size(); ++i) {
      CHECK(static_cast<bool>(clouds[0].labels[i]) ==
            (members.count(static_cast<int>(i)) > 0));
    }
  }
}

TEST_CASE("auto labeling with an all-zero predictor yields nothing") {
  const auto scene = compose_scene(recovery_recipe(PrimitiveKind::PlaneIntersection, 5150));
  std::vector<PointCloud> clouds = {scene.cloud};
  const PointPredictor none = [](const PointCloud& c) {
    return std::vector<std::uint8_t>(c.size(), 0);
  };
  const auto lines = auto_label_round(clouds, none, AdaptationConfig{}, 32);
  REQUIRE(lines.size() == 1);
  CHECK(lines[0].empty());
  CHECK(std::count(clouds[0].labels.begin(), clouds[0].labels.end(), 1) == 0);
}

TEST_CASE("a second oracle round reproduces the same line set") {
  const auto scene_a = compose_scene(recovery_recipe(PrimitiveKind::PlaneIntersection, 616));
  const auto scene_b = compose_scene(recovery_recipe(PrimitiveKind::Pole, 617));
  std::vector<PointCloud> clouds = {scene_a.cloud, scene_b.cloud};
  AdaptationConfig cfg;
  const auto first = auto_label_round(clouds, oracle_predictor(), cfg, 33);
  // Round 2 votes on the rewritten labels (the oracle now reads them back).
  const auto second = auto_label_round(clouds, oracle_predictor(), cfg, 34);
  REQUIRE(first.size() == second.size());
  for (std::size_t c = 0; c < first.size(); ++c) {
    REQUIRE(first[c].size() == second[c].size());
    for (std::size_t l = 0; l < first[c].size(); ++l) {
      CHECK(first[c][l].member_indices == second[c][l].member_indices);
      CHECK(endpoint_error(first[c][l], second[c][l]) < 1e-9);
    }
  }
}
