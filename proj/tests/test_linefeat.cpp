#include <doctest.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <utility>
#include <vector>

#include "linereg/geometry.hpp"
#include "linereg/linefeat.hpp"
#include "linereg/rng.hpp"
#include "linereg/types.hpp"

using namespace linereg;

namespace {

DescriptorMatrix random_unit_descriptors(Rng& rng, Eigen::Index n, Eigen::Index d) {
  DescriptorMatrix m(n, d);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) m(i, j) = static_cast<float>(rng.normal());
    m.row(i) /= m.row(i).norm();
  }
  return m;
}

LineSegment segment_with(std::vector<int> members) {
  LineSegment s;
  s.e0 = Point3(0, 0, 0);
  s.e1 = Point3(1, 0, 0);
  s.direction = Vec3::UnitX();
  s.member_indices = std::move(members);
  return s;
}

LineSegment described(std::initializer_list<float> desc) {
  LineSegment s;
  s.mean_descriptor = Eigen::VectorXf(static_cast<Eigen::Index>(desc.size()));
  Eigen::Index i = 0;
  for (float v : desc) s.mean_descriptor(i++) = v;
  return s;
}

// Brute-force mutual-NN oracle over the full distance matrix.
std::vector<std::array<int, 2>> brute_mutual_nn(const std::vector<LineSegment>& src,
                                                const std::vector<LineSegment>& tgt,
                                                double threshold) {
  std::vector<std::array<int, 2>> out;
  for (std::size_t i = 0; i < src.size(); ++i) {
    for (std::size_t j = 0; j < tgt.size(); ++j) {
      const double dij =
          (src[i].mean_descriptor - tgt[j].mean_descriptor).cwiseAbs().sum();
      if (dij > threshold) continue;
      bool mutual = true;
      for (std::size_t j2 = 0; j2 < tgt.size() && mutual; ++j2) {
        const double alt = (src[i].mean_descriptor - tgt[j2].mean_descriptor).cwiseAbs().sum();
        if (alt < dij || (alt == dij && j2 < j)) mutual = false;
      }
      for (std::size_t i2 = 0; i2 < src.size() && mutual; ++i2) {
        const double alt = (src[i2].mean_descriptor - tgt[j].mean_descriptor).cwiseAbs().sum();
        if (alt < dij || (alt == dij && i2 < i)) mutual = false;
      }
      if (mutual) out.push_back({static_cast<int>(i), static_cast<int>(j)});
    }
  }
  return out;
}

}  // namespace

TEST_CASE("shared member descriptors average to themselves") {
  PointCloud cloud;
  cloud.points.assign(3, Point3::Zero());
  Eigen::VectorXf v(4);
  v << 0.5f, -0.5f, 0.5f, 0.5f;  // unit
  cloud.descriptors.resize(3, 4);
  for (int i = 0; i < 3; ++i) cloud.descriptors.row(i) = v.transpose();
  std::vector<LineSegment> segs = {segment_with({0, 1, 2})};
  describe_lines(cloud, segs);
  REQUIRE(segs[0].has_descriptor());
  CHECK((segs[0].mean_descriptor - v).cwiseAbs().maxCoeff() < 1e-6f);
}

TEST_CASE("orthogonal member pair averages to the analytic normalized mean") {
  PointCloud cloud;
  cloud.points.assign(2, Point3::Zero());
  cloud.descriptors.resize(2, 3);
  cloud.descriptors << 1, 0, 0, 0, 1, 0;
  std::vector<LineSegment> segs = {segment_with({0, 1})};
  describe_lines(cloud, segs);
  Eigen::VectorXf want(3);
  want << 1, 1, 0;
  want /= want.norm();  // (u+v)/||u+v||
  CHECK((segs[0].mean_descriptor - want).cwiseAbs().maxCoeff() < 1e-6f);
}

TEST_CASE("mean descriptors match the direct-sum oracle and are permutation-invariant") {
  Rng rng(801);
  PointCloud cloud;
  cloud.points.assign(20, Point3::Zero());
  cloud.descriptors = random_unit_descriptors(rng, 20, 6);
  std::vector<LineSegment> segs = {segment_with({3, 7, 11, 13}), segment_with({0, 19})};
  describe_lines(cloud, segs);
  for (const auto& s : segs) {
    CHECK(s.mean_descriptor.norm() == doctest::Approx(1.0f).epsilon(1e-6));
  }
  // direct-sum oracle
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(6);
  for (int i : {3, 7, 11, 13}) acc += cloud.descriptors.row(i).cast<double>().transpose();
  acc /= 4.0;
  acc /= acc.norm();
  CHECK((segs[0].mean_descriptor.cast<double>() - acc).cwiseAbs().maxCoeff() < 1e-6);
  // permutation of the member list
  std::vector<LineSegment> shuffled = {segment_with({13, 3, 11, 7})};
  describe_lines(cloud, shuffled);
  CHECK((shuffled[0].mean_descriptor - segs[0].mean_descriptor).cwiseAbs().maxCoeff() < 1e-7f);
}

TEST_CASE("describe_lines input validation") {
  PointCloud bare;
  bare.points.assign(2, Point3::Zero());
  std::vector<LineSegment> segs = {segment_with({0, 1})};
  CHECK_THROWS_AS(describe_lines(bare, segs), std::invalid_argument);  // no descriptors

  PointCloud cloud = bare;
  cloud.descriptors.resize(2, 3);
  cloud.descriptors << 1, 0, 0, -1, 0, 0;
  std::vector<LineSegment> empty_members = {segment_with({})};
  CHECK_THROWS_AS(describe_lines(cloud, empty_members), std::invalid_argument);
  std::vector<LineSegment> oob = {segment_with({0, 5})};
  CHECK_THROWS_AS(describe_lines(cloud, oob), std::invalid_argument);
  std::vector<LineSegment> cancel = {segment_with({0, 1})};  // +x and -x average to zero
  CHECK_THROWS_AS(describe_lines(cloud, cancel), std::runtime_error);

  PointCloud non_unit = bare;
  non_unit.descriptors.resize(2, 3);
  non_unit.descriptors << 2, 0, 0, 0, 1, 0;
  std::vector<LineSegment> bad_norm = {segment_with({0, 1})};
  CHECK_THROWS_AS(describe_lines(non_unit, bad_norm), std::invalid_argument);
}

TEST_CASE("identical segment sets match identically at distance zero") {
  Rng rng(802);
  PointCloud cloud;
  cloud.points.assign(12, Point3::Zero());
  cloud.descriptors = random_unit_descriptors(rng, 12, 5);
  std::vector<LineSegment> a = {segment_with({0, 1, 2}), segment_with({3, 4, 5}),
                                segment_with({6, 7, 8, 9})};
  describe_lines(cloud, a);
  const auto b = a;
  const auto matches = match_lines(a, b);
  REQUIRE(matches.size() == 3);
  for (const auto& m : matches) {
    CHECK(m.source == m.target);
    CHECK(m.distance == 0.0);
  }
}

TEST_CASE("matching is empty when every distance exceeds the threshold") {
  std::vector<LineSegment> a = {described({1.f, 0.f}), described({0.f, 1.f})};
  std::vector<LineSegment> b = {described({-1.f, 0.f}), described({0.f, -1.f})};
  // all L1 cross distances are 2 or 4 — far above the default 0.1
  CHECK(match_lines(a, b).empty());
}

TEST_CASE("crafted distance matrix reproduces the mutual-NN outcome by hand") {
  // 1-D descriptors; L1 distances are plain absolute differences.
  std::vector<LineSegment> src = {described({0.0f}), described({0.5f}), described({1.0f})};
  std::vector<LineSegment> tgt = {described({0.02f}), described({0.48f}), described({2.0f})};
  // src2's nearest target is tgt1 (0.52), but tgt1's nearest source is src1
  // (0.02) — not mutual; tgt2's nearest source is src2 (1.0) — not mutual
  // from src2's side. Only (0,0) and (1,1) are mutual and within 0.1.
  const auto matches = match_lines(src, tgt, 0.1);
  REQUIRE(matches.size() == 2);
  CHECK(matches[0].source == 0);
  CHECK(matches[0].target == 0);
  CHECK(matches[0].distance == doctest::Approx(0.02).epsilon(1e-6));
  CHECK(matches[1].source == 1);
  CHECK(matches[1].target == 1);
  CHECK(matches[1].distance == doctest::Approx(0.02).epsilon(1e-6));
}

TEST_CASE("matching agrees with the exhaustive oracle, is symmetric, and never reuses a line") {
  Rng rng(803);
  for (int rep = 0; rep < 25; ++rep) {
    const std::size_t ns = 2 + rng.uniform_index(6);
    const std::size_t nt = 2 + rng.uniform_index(6);
    // Small descriptor spread so some distances fall under the threshold.
    std::vector<LineSegment> src, tgt;
    const auto rand_desc = [&]() {
      LineSegment s;
      s.mean_descriptor = Eigen::VectorXf(3);
      for (int c = 0; c < 3; ++c) s.mean_descriptor(c) = static_cast<float>(rng.uniform(0, 0.2));
      return s;
    };
    for (std::size_t i = 0; i < ns; ++i) src.push_back(rand_desc());
    for (std::size_t j = 0; j < nt; ++j) tgt.push_back(rand_desc());
    const double threshold = 0.15;

    const auto got = match_lines(src, tgt, threshold);
    const auto want = brute_mutual_nn(src, tgt, threshold);
    REQUIRE(got.size() == want.size());
    std::vector<char> used_s(ns, 0), used_t(nt, 0);
    for (std::size_t k = 0; k < got.size(); ++k) {
      CHECK(got[k].source == want[k][0]);
      CHECK(got[k].target == want[k][1]);
      CHECK(got[k].distance <= threshold);
      CHECK(!used_s[static_cast<std::size_t>(got[k].source)]);
      CHECK(!used_t[static_cast<std::size_t>(got[k].target)]);
      used_s[static_cast<std::size_t>(got[k].source)] = 1;
      used_t[static_cast<std::size_t>(got[k].target)] = 1;
    }

    // symmetry: swapping sides transposes the match set
    const auto swapped = match_lines(tgt, src, threshold);
    REQUIRE(swapped.size() == got.size());
    auto transposed = got;
    for (auto& m : transposed) std::swap(m.source, m.target);
    std::sort(transposed.begin(), transposed.end(),
              [](const LineMatch& x, const LineMatch& y) { return x.source < y.source; });
    for (std::size_t k = 0; k < swapped.size(); ++k) {
      CHECK(swapped[k].source == transposed[k].source);
      CHECK(swapped[k].target == transposed[k].target);
    }
  }
}

TEST_CASE("match_lines validates descriptors") {
  std::vector<LineSegment> a = {described({1.f, 0.f})};
  std::vector<LineSegment> undescribed = {segment_with({0})};
  CHECK_THROWS_AS(match_lines(a, undescribed), std::invalid_argument);
  std::vector<LineSegment> wrong_width = {described({1.f, 0.f, 0.f})};
  CHECK_THROWS_AS(match_lines(a, wrong_width), std::invalid_argument);
  CHECK(match_lines({}, a).empty());
}

namespace {

// Points strung along a segment, registered into a cloud; returns the
// LineSegment with its member indices.
LineSegment add_line_points(PointCloud& cloud, const Point3& e0, const Point3& e1, int n) {
  LineSegment s;
  s.e0 = e0;
  s.e1 = e1;
  s.direction = (e1 - e0).normalized();
  for (int i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / (n - 1);
    s.member_indices.push_back(static_cast<int>(cloud.size()));
    cloud.points.emplace_back(e0 + t * (e1 - e0));
  }
  return s;
}

LineSegment transformed_segment(const LineSegment& s, const SE3Transform& xf) {
  LineSegment t = s;
  t.e0 = xf.apply(s.e0);
  t.e1 = xf.apply(s.e1);
  t.direction = (t.e1 - t.e0).normalized();
  t.member_indices.clear();
  return t;
}

}  // namespace

TEST_CASE("training correspondences: identity pose pairs every line with itself") {
  PointCloud cloud;
  std::vector<LineSegment> a;
  a.push_back(add_line_points(cloud, {0, 0, 0}, {2, 0, 0}, 10));
  a.push_back(add_line_points(cloud, {0, 3, 0}, {0, 3, 2}, 10));
  a.push_back(add_line_points(cloud, {5, 0, 0}, {5, 0, 2}, 10));
  const auto corr = training_correspondences(cloud, a, a, SE3Transform::identity());
  REQUIRE(corr.size() == 3);
  for (int i = 0; i < 3; ++i) {
    CHECK(corr[static_cast<std::size_t>(i)] == std::pair<int, int>(i, i));
  }
}

TEST_CASE("training correspondences: a 0.3 m transverse offset is rejected") {
  PointCloud cloud;
  std::vector<LineSegment> a = {add_line_points(cloud, {0, 0, 0}, {2, 0, 0}, 10)};
  std::vector<LineSegment> b = {transformed_segment(a[0], SE3Transform::identity())};
  b[0].e0 += Point3(0, 0.3, 0);  // transverse shift: every member sits 0.3 m off
  b[0].e1 += Point3(0, 0.3, 0);
  CHECK(training_correspondences(cloud, a, b, SE3Transform::identity(), 0.2).empty());
  // at 0.15 m the same construction passes
  std::vector<LineSegment> c = {transformed_segment(a[0], SE3Transform::identity())};
  c[0].e0 += Point3(0, 0.15, 0);
  c[0].e1 += Point3(0, 0.15, 0);
  CHECK(training_correspondences(cloud, a, c, SE3Transform::identity(), 0.2).size() == 1);
}

TEST_CASE("training correspondences match the brute-force all-pairs oracle") {
  Rng rng(804);
  for (int rep = 0; rep < 10; ++rep) {
    PointCloud cloud;
    std::vector<LineSegment> a;
    const int n_lines = 3 + static_cast<int>(rng.uniform_index(3));
    for (int l = 0; l < n_lines; ++l) {
      const Point3 e0(rng.uniform(-3, 3), rng.uniform(-3, 3), rng.uniform(-3, 3));
      const Point3 dir = Point3(rng.normal(), rng.normal(), rng.normal()).normalized();
      a.push_back(add_line_points(cloud, e0, e0 + rng.uniform(1.0, 2.5) * dir, 12));
    }
    // random rigid pose; targets = transformed sources, some jittered off
    SE3Transform pose = SE3Transform::from_yaw_xy(rng.uniform(0, 6.28), rng.uniform(-2, 2),
                                                  rng.uniform(-2, 2));
    std::vector<LineSegment> b;
    for (std::size_t l = 0; l < a.size(); ++l) {
      auto t = transformed_segment(a[l], pose);
      if (rng.uniform() < 0.4) {  // some lines drift beyond the gate
        const Vec3 off = Vec3(rng.normal(), rng.normal(), rng.normal()).normalized() * 0.35;
        t.e0 += off;
        t.e1 += off;
      }
      b.push_back(t);
    }

    const double gate = 0.2;
    const auto got = training_correspondences(cloud, a, b, pose, gate);

    // oracle: all-pairs mean projected distance + greedy one-to-one
    const auto mean_dist = [&](std::size_t ia, std::size_t ib) {
      double acc = 0;
      for (int m : a[ia].member_indices) {
        const Point3 p = pose.apply(cloud.points[static_cast<std::size_t>(m)]);
        const Vec3 u = (b[ib].e1 - b[ib].e0).normalized();
        const Vec3 r = p - b[ib].e0;
        acc += (r - r.dot(u) * u).norm();  // projection form, not the cross form
      }
      return acc / static_cast<double>(a[ia].member_indices.size());
    };
    struct C {
      double d;
      std::size_t ia, ib;
    };
    std::vector<C> cands;
    for (std::size_t ia = 0; ia < a.size(); ++ia) {
      for (std::size_t ib = 0; ib < b.size(); ++ib) {
        const double d = mean_dist(ia, ib);
        if (d <= gate) cands.push_back({d, ia, ib});
      }
    }
    std::sort(cands.begin(), cands.end(), [](const C& x, const C& y) {
      if (x.d != y.d) return x.d < y.d;
      if (x.ia != y.ia) return x.ia < y.ia;
      return x.ib < y.ib;
    });
    std::vector<char> ua(a.size(), 0), ub(b.size(), 0);
    std::vector<std::pair<int, int>> want;
    for (const auto& c : cands) {
      if (ua[c.ia] || ub[c.ib]) continue;
      ua[c.ia] = 1;
      ub[c.ib] = 1;
      want.emplace_back(static_cast<int>(c.ia), static_cast<int>(c.ib));
    }
    std::sort(want.begin(), want.end());
    CHECK(got == want);
    // no duplicates on either side
    std::vector<char> sa(a.size(), 0), sb(b.size(), 0);
    for (const auto& [ia, ib] : got) {
      CHECK(!sa[static_cast<std::size_t>(ia)]);
      CHECK(!sb[static_cast<std::size_t>(ib)]);
      sa[static_cast<std::size_t>(ia)] = 1;
      sb[static_cast<std::size_t>(ib)] = 1;
    }
  }
}

namespace {

// Rigid pose from a seedable stream for invariance checks.
SE3Transform random_rigid(Rng& rng) {
  const Vec3 axis = Vec3(rng.normal(), rng.normal(), rng.normal()).normalized();
  SE3Transform t;
  t.rotation = Eigen::AngleAxisd(rng.uniform(0, 3.0), axis).toRotationMatrix();
  t.translation = Vec3(rng.uniform(-10, 10), rng.uniform(-10, 10), rng.uniform(-10, 10));
  return t;
}

}  // namespace

TEST_CASE("geometric descriptor matches a hand computation") {
  PointCloud cloud;
  cloud.points = {Point3(0, 0, 0), Point3(1, 0, 0), Point3(2, 0, 0), Point3(1, 1, 0)};
  LineSegment seg;
  seg.e0 = Point3(0, 0, 0);
  seg.e1 = Point3(2, 0, 0);
  seg.direction = Vec3::UnitX();
  seg.member_indices = {0, 1, 2, 3};
  const Eigen::Vector4f d = geometric_line_descriptor(cloud, seg);
  // projections 0,1,2,1 -> mean 1, centered -1,0,1,0; one member 1 m off-axis
  CHECK(d(0) == doctest::Approx(2.0).epsilon(1e-6));
  CHECK(d(1) == doctest::Approx(0.5).epsilon(1e-6));
  CHECK(d(2) == doctest::Approx(std::sqrt(0.5) / 2.0).epsilon(1e-6));
  CHECK(d(3) == doctest::Approx(0.25).epsilon(1e-6));
}

TEST_CASE("geometric descriptor is exactly invariant under rigid motion") {
  Rng rng(805);
  for (int rep = 0; rep < 50; ++rep) {
    PointCloud cloud;
    const Vec3 e0(rng.uniform(-3, 3), rng.uniform(-3, 3), rng.uniform(-3, 3));
    const Vec3 dir = Vec3(rng.normal(), rng.normal(), rng.normal()).normalized();
    LineSegment seg = add_line_points(cloud, e0, e0 + rng.uniform(0.8, 3.0) * dir, 20);
    for (auto& p : cloud.points) {
      p += 0.02 * Vec3(rng.normal(), rng.normal(), rng.normal());
    }
    const Eigen::Vector4f base = geometric_line_descriptor(cloud, seg);

    const SE3Transform xf = random_rigid(rng);
    PointCloud moved = cloud;
    for (auto& p : moved.points) p = xf.apply(p);
    LineSegment mseg = seg;
    mseg.e0 = xf.apply(seg.e0);
    mseg.e1 = xf.apply(seg.e1);
    const Eigen::Vector4f after = geometric_line_descriptor(moved, mseg);
    for (int c = 0; c < 4; ++c) {
      CHECK(after(c) == doctest::Approx(base(c)).epsilon(1e-6));
    }
  }
}

TEST_CASE("geometric descriptors separate lines by length and match across views") {
  Rng rng(806);
  // One scene, two independent noisy samplings of the same three segments
  // with distinct lengths; the descriptors must pair each line with itself.
  const std::vector<std::pair<Point3, Point3>> lines = {
      {{0, 0, 0}, {1.0, 0, 0}}, {{0, 3, 0}, {0, 3, 1.8}}, {{4, 0, 0}, {4, 2.6, 0}}};
  PointCloud view_a, view_b;
  std::vector<LineSegment> segs_a, segs_b;
  for (const auto& [e0, e1] : lines) {
    segs_a.push_back(add_line_points(view_a, e0, e1, 40));
    segs_b.push_back(add_line_points(view_b, e0, e1, 40));
  }
  for (auto& p : view_a.points) p += 0.01 * Vec3(rng.normal(), rng.normal(), rng.normal());
  for (auto& p : view_b.points) p += 0.01 * Vec3(rng.normal(), rng.normal(), rng.normal());
  // Move view B rigidly (members and endpoints alike): descriptors must not care.
  const SE3Transform xf = random_rigid(rng);
  for (auto& p : view_b.points) p = xf.apply(p);
  for (auto& s : segs_b) {
    s.e0 = xf.apply(s.e0);
    s.e1 = xf.apply(s.e1);
  }
  describe_lines_geometric(view_a, segs_a);
  describe_lines_geometric(view_b, segs_b);

  // Different-length lines stay far apart in descriptor space...
  for (std::size_t i = 0; i < segs_a.size(); ++i) {
    for (std::size_t j = 0; j < segs_a.size(); ++j) {
      const double l1 = (segs_a[i].mean_descriptor - segs_b[j].mean_descriptor)
                            .cwiseAbs()
                            .sum();
      if (i == j) {
        CHECK(l1 < 0.1);
      } else {
        CHECK(l1 > 0.5);
      }
    }
  }
  // ...so mutual-NN matching under a 0.15 gate recovers the identity pairing.
  const auto matches = match_lines(segs_a, segs_b, 0.15);
  REQUIRE(matches.size() == 3);
  for (std::size_t i = 0; i < matches.size(); ++i) {
    CHECK(matches[i].source == static_cast<int>(i));
    CHECK(matches[i].target == static_cast<int>(i));
  }
}

TEST_CASE("geometric descriptor validation") {
  PointCloud cloud;
  cloud.points = {Point3(0, 0, 0)};
  LineSegment seg;
  seg.e0 = Point3(0, 0, 0);
  seg.e1 = Point3(1, 0, 0);
  SUBCASE("no members") {
    CHECK_THROWS_AS(geometric_line_descriptor(cloud, seg), std::invalid_argument);
  }
  SUBCASE("member outside the cloud") {
    seg.member_indices = {4};
    CHECK_THROWS_AS(geometric_line_descriptor(cloud, seg), std::invalid_argument);
  }
  SUBCASE("zero-length segment") {
    seg.e1 = seg.e0;
    seg.member_indices = {0};
    CHECK_THROWS_AS(geometric_line_descriptor(cloud, seg), std::invalid_argument);
  }
}
