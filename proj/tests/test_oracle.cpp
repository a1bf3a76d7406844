// Copyright 2026 The Mochi Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <random>

#include "mochi/oracle.hpp"
#include "suites.hpp"

using namespace mochi;
using suites::Tri;

namespace {

Triangle tri(const Tri& t, std::uint32_t id = 0) { return make_triangle(t[0], t[1], t[2], id); }

Tri random_tri(std::mt19937_64& rng, double spread) {
  std::uniform_real_distribution<double> u(-1, 1);
  for (;;) {
    const Vec3 c{u(rng) * spread, u(rng) * spread, u(rng) * spread};
    const Tri t{c + Vec3{u(rng), u(rng), u(rng)}, c + Vec3{u(rng), u(rng), u(rng)},
                c + Vec3{u(rng), u(rng), u(rng)}};
    if (length(cross(t[1] - t[0], t[2] - t[0])) > 0.05) return t;
  }
}

// Smallest |signed distance| of any vertex to the other plane, relative to size: pairs
// near a touching configuration are excluded from rigid-motion checks.
double margin(const Tri& a, const Tri& b) {
  const auto plane_margin = [](const Tri& p, const Tri& q) {
    const Vec3 n = normalize(cross(p[1] - p[0], p[2] - p[0]));
    double m = 1e300;
    for (const Vec3& v : q) m = std::min(m, std::abs(dot(n, v - p[0])));
    return m;
  };
  return std::min(plane_margin(a, b), plane_margin(b, a));
}

}  // namespace

TEST(TriTri, EdgeThroughFace) {
  EXPECT_TRUE(oracle::tri_tri_oracle(tri({Vec3{0, 0, 0}, {2, 0, 0}, {0, 2, 0}}),
                                     tri({Vec3{0.5, 0.5, -1}, {0.5, 0.5, 1}, {0.5, 3, 0}})));
}

TEST(TriTri, Coplanar) {
  const Tri a{Vec3{0, 0, 0}, {2, 0, 0}, {0, 2, 0}};
  EXPECT_TRUE(oracle::tri_tri_oracle(tri(a), tri({Vec3{1, 1, 0}, {3, 1, 0}, {1, 3, 0}})));  // touching vertex
  EXPECT_TRUE(oracle::tri_tri_oracle(tri(a), tri({Vec3{0.9, 0.9, 0}, {3, 1, 0}, {1, 3, 0}})));
  EXPECT_TRUE(oracle::tri_tri_oracle(tri(a), tri({Vec3{0.1, 0.1, 0}, {0.2, 0.1, 0}, {0.1, 0.2, 0}})));
  EXPECT_FALSE(oracle::tri_tri_oracle(tri(a), tri({Vec3{1.1, 1.1, 0}, {3, 1, 0}, {1, 3, 0}})));
}

TEST(TriTri, FarApart) {
  const Tri a{Vec3{0, 0, 0}, {2, 0, 0}, {0, 2, 0}};
  Tri b = a;
  for (Vec3& v : b) v += Vec3{5, 0, 0.3};
  EXPECT_FALSE(oracle::tri_tri_oracle(tri(a), tri(b)));
}

TEST(TriTri, SharedEdgeTouches) {
  EXPECT_TRUE(oracle::tri_tri_oracle(tri({Vec3{0, 0, 0}, {1, 0, 0}, {0, 1, 0}}),
                                     tri({Vec3{0, 0, 0}, {1, 0, 0}, {0, 0, 1}})));
}

TEST(TriTri, DegenerateRejected) {
  Triangle bad{{0, 0, 0}, {1, 0, 0}, {2, 0, 0}, {0, 0, 1}, 0, TriangleKind::Original};
  EXPECT_THROW(oracle::tri_tri_oracle(bad, tri({Vec3{0, 0, 0}, {1, 0, 0}, {0, 1, 0}})), DegenerateTriangle);
}

TEST(TriTri, Symmetric) {
  std::mt19937_64 rng(1);
  int hits = 0;
  for (int k = 0; k < 100000; ++k) {
    const Tri a = random_tri(rng, 0.6), b = random_tri(rng, 0.6);
    const bool ab = oracle::tri_tri_oracle(tri(a), tri(b));
    ASSERT_EQ(ab, oracle::tri_tri_oracle(tri(b), tri(a))) << k;
    hits += ab;
  }
  EXPECT_GT(hits, 5000);
  EXPECT_LT(hits, 95000);
}

TEST(TriTri, RigidMotionInvariant) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-10, 10);
  int checked = 0;
  for (int k = 0; k < 20000; ++k) {
    const Tri a = random_tri(rng, 1.0), b = random_tri(rng, 1.0);
    if (margin(a, b) < 1e-6) continue;
    const suites::Placement place{suites::random_rotation(rng), {u(rng), u(rng), u(rng)}};
    ASSERT_EQ(oracle::tri_tri_oracle(tri(a), tri(b)),
              oracle::tri_tri_oracle(tri(place.apply(a)), tri(place.apply(b))))
        << k;
    ++checked;
  }
  EXPECT_GT(checked, 15000);
}

TEST(TriTri, CoplanarSuitesUnderMotion) {
  // Rotation leaves coplanar input only approximately coplanar; the verdict must hold.
  const auto overlap = suites::coplanar_overlapping(200, 9);
  const auto apart = suites::coplanar_disjoint(200, 10);
  for (const auto* suite : {&overlap, &apart})
    for (std::size_t k = 0; k < suite->intersect.size(); ++k)
      EXPECT_EQ(oracle::tri_tri_oracle(tri(suite->triangles[2 * k]), tri(suite->triangles[2 * k + 1])),
                suite->intersect[k])
          << suite->name << " " << k;
}

TEST(SpherePairs, Boundaries) {
  EXPECT_EQ(oracle::sphere_pairs_oracle(std::vector<Sphere>{}).count(), 0u);
  EXPECT_EQ(oracle::sphere_pairs_oracle(std::vector<Sphere>{{{0, 0, 0}, 1, 1, {}}}).count(), 0u);
  const std::vector<Sphere> touching{{{0, 0, 0}, 0.5, 1, {}}, {{0, 0, 1}, 0.5, 1, {}}};
  EXPECT_EQ(oracle::sphere_pairs_oracle(touching).count(), 1u);
}

TEST(RayOracle, Basics) {
  const auto soup = PrimitiveSoup::from_aabbs({Aabb{{0, 0, 0}, {1, 1, 1}}});
  EXPECT_TRUE(oracle::ray_all_primitives_oracle(soup, {{5, 5, 5}, {1, 0, 0}, 0, 1, 0}).empty());
  EXPECT_EQ(oracle::ray_all_primitives_oracle(soup, {{-1, 0.5, 0.5}, {1, 0, 0}, 0, 3, 0}),
            std::vector<std::uint32_t>{0});
}

TEST(EllipsoidOracle, SpheresReduceToDistance) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-2, 2), r(0.2, 1.0);
  for (int k = 0; k < 5000; ++k) {
    const double ra = r(rng), rb = r(rng);
    const Vec3 c{u(rng), u(rng), u(rng)};
    const double d = length(c);
    if (std::abs(d - ra - rb) < 1e-9) continue;
    EXPECT_EQ(oracle::ellipsoid_overlap_oracle({{0, 0, 0}, {ra, ra, ra}}, {c, {rb, rb, rb}}), d <= ra + rb);
  }
}

TEST(EllipsoidOracle, AxisAlignedContact) {
  // Along x the reach is a.x + b.x exactly.
  const Ellipsoid a{{0, 0, 0}, {1, 0.2, 0.3}};
  const Ellipsoid b{{1.5 - 1e-9, 0, 0}, {0.5, 2, 0.1}};
  const Ellipsoid c{{1.5 + 1e-9, 0, 0}, {0.5, 2, 0.1}};
  EXPECT_TRUE(oracle::ellipsoid_overlap_oracle(a, b));
  EXPECT_FALSE(oracle::ellipsoid_overlap_oracle(a, c));
  EXPECT_TRUE(oracle::ellipsoid_overlap_oracle(b, a));
}
