// Copyright 2026 The Mochi Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <random>

#include "mochi/oracle.hpp"
#include "mochi/reductions.hpp"
#include "mochi/scene.hpp"
#include "suites.hpp"

using namespace mochi;

namespace {

std::string diff(const CollisionSet& got, const CollisionSet& want) {
  std::string out;
  int shown = 0;
  for (const auto& [i, j] : want.pairs())
    if (!got.contains(i, j) && shown++ < 5) out += " missing(" + std::to_string(i) + "," + std::to_string(j) + ")";
  for (const auto& [i, j] : got.pairs())
    if (!want.contains(i, j) && shown++ < 10) out += " extra(" + std::to_string(i) + "," + std::to_string(j) + ")";
  return out;
}

bool subset(const CollisionSet& a, const CollisionSet& b) {
  for (const auto& [i, j] : a.pairs())
    if (!b.contains(i, j)) return false;
  return true;
}

}  // namespace

// ---------------------------------------------------------------------------
// Uniform radius

TEST(UniformSpheres, Overlapping) {
  const std::vector<Sphere> s{{{0, 0, 0}, 1, 1, {}}, {{0, 0, 1.5}, 1, 1, {}}};
  EXPECT_EQ(detect_uniform_spheres(s).pairs(), (std::vector<ObjectPair>{{0, 1}}));
}

TEST(UniformSpheres, TouchingCounts) {
  const std::vector<Sphere> s{{{0, 0, 0}, 1, 1, {}}, {{0, 0, 2.0}, 1, 1, {}}};
  EXPECT_EQ(detect_uniform_spheres(s).pairs(), (std::vector<ObjectPair>{{0, 1}}));
}

TEST(UniformSpheres, JustApart) {
  const std::vector<Sphere> s{{{0, 0, 0}, 1, 1, {}}, {{0, 0, 2.0 + 1e-12}, 1, 1, {}}};
  EXPECT_EQ(detect_uniform_spheres(s).count(), 0u);
}

TEST(UniformSpheres, RejectsMixedRadii) {
  const std::vector<Sphere> s{{{0, 0, 0}, 1, 1, {}}, {{0, 0, 3}, 1.001, 1, {}}};
  EXPECT_THROW(detect_uniform_spheres(s), NonUniformRadius);
}

TEST(UniformSpheres, EmptyAndSingle) {
  EXPECT_EQ(detect_uniform_spheres(std::vector<Sphere>{}).count(), 0u);
  EXPECT_EQ(detect_uniform_spheres(uniform_spheres(1, 0.1, 1)).count(), 0u);
}

TEST(UniformSpheres, MatchesOracleAtTenThousand) {
  const auto spheres = uniform_spheres(10000, 0.001, 42);
  const auto got = detect_uniform_spheres(spheres);
  const auto want = oracle::sphere_pairs_oracle(spheres);
  EXPECT_EQ(got, want) << diff(got, want);
}

TEST(UniformSpheres, DenseScenesMatchOracle) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto spheres = uniform_spheres(2048, 0.02, seed);
    const auto got = detect_uniform_spheres(spheres);
    const auto want = oracle::sphere_pairs_oracle(spheres);
    ASSERT_GT(want.count(), 100u);
    ASSERT_EQ(got, want) << "seed " << seed << diff(got, want);
  }
}

TEST(UniformSpheres, BroadPhaseBoundsNarrowPhase) {
  const auto spheres = uniform_spheres(4096, 0.01, 3);
  CollisionSet set(4096);
  const auto stats = detect_uniform_spheres(std::span<const Sphere>(spheres), set);
  EXPECT_EQ(stats.rays, 4096u);
  EXPECT_GE(stats.broad_phase_hits, set.count());
}

// ---------------------------------------------------------------------------
// Arbitrary radii

TEST(Spheres, DirectInequality) {
  const std::vector<Sphere> s{{{0, 0, 0}, 1, 1, {}}, {{0, 0, 3.5}, 3, 1, {}}};
  EXPECT_EQ(detect_spheres(s).pairs(), (std::vector<ObjectPair>{{0, 1}}));
}

TEST(Spheres, NestedAabb) {
  const std::vector<Sphere> s{{{0, 0, 0}, 0.1, 1, {}}, {{0.2, 0, 0}, 5, 1, {}}};
  ASSERT_TRUE(s[1].bounds().contains(s[0].bounds()));
  EXPECT_EQ(detect_spheres(s).pairs(), (std::vector<ObjectPair>{{0, 1}}));
}

TEST(Spheres, NestedSuite) {
  std::mt19937_64 rng(77);
  for (int k = 0; k < 200; ++k) {
    const auto scene = suites::nested_scene(rng, k % 2 == 0);
    ASSERT_TRUE(scene.spheres[1].bounds().contains(scene.spheres[0].bounds()));
    ASSERT_EQ(oracle::sphere_pairs_oracle(scene.spheres).count(), scene.collide ? 1u : 0u) << k;
    EXPECT_EQ(detect_spheres(scene.spheres).count(), scene.collide ? 1u : 0u) << k;
  }
}

TEST(Spheres, GaussianScenesMatchOracle) {
  for (double sd : {0.001, 0.005, 0.01}) {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      const auto spheres = gaussian_spheres(3000, 0.004, sd, 1e-5, seed);
      const auto got = detect_spheres(spheres);
      const auto want = oracle::sphere_pairs_oracle(spheres);
      ASSERT_EQ(got, want) << "sd " << sd << " seed " << seed << diff(got, want);
    }
  }
}

TEST(Spheres, HugeRadiusSpreadMatchesOracle) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0, 1);
  std::vector<Sphere> spheres;
  for (int k = 0; k < 1500; ++k) spheres.push_back({{u(rng), u(rng), u(rng)}, std::pow(10.0, -4 + 3.5 * u(rng)), 1, {}});
  const auto got = detect_spheres(spheres);
  const auto want = oracle::sphere_pairs_oracle(spheres);
  EXPECT_EQ(got, want) << diff(got, want);
}

TEST(Spheres, EveryOraclePairIsReachedByOneSide) {
  // Each true pair must be reported by at least one of its two objects' rays.
  const auto spheres = gaussian_spheres(1500, 0.01, 0.01, 1e-4, 9);
  const Bvh bvh = Bvh::build(sphere_soup(spheres));
  std::vector<std::vector<std::uint32_t>> reported(spheres.size());
  for (std::size_t i = 0; i < spheres.size(); ++i)
    for (const Ray& ray : aabb_edge_rays(spheres[i].bounds(), i))
      bvh.traverse(ray, [&](HitRecord& h) {
        if (h.primitive_id != i) reported[i].push_back(h.primitive_id);
      });
  const auto has = [&](std::uint32_t a, std::uint32_t b) {
    return std::find(reported[a].begin(), reported[a].end(), b) != reported[a].end();
  };
  for (const auto& [i, j] : oracle::sphere_pairs_oracle(spheres).pairs())
    EXPECT_TRUE(has(i, j) || has(j, i)) << i << "," << j;
}

TEST(EdgeRays, CoverEachEdgeOnce) {
  const Aabb box{{1, 2, 3}, {2, 4, 7}};
  const auto rays = aabb_edge_rays(box, 5);
  std::set<std::pair<std::array<double, 3>, std::array<double, 3>>> edges;
  for (int k = 0; k < 12; ++k) {
    EXPECT_EQ(rays[k].ray_id, 60u + k);
    EXPECT_TRUE(is_valid(rays[k]));
    Vec3 a = rays[k].origin, b = rays[k].at(rays[k].t_max);
    for (int ax = 0; ax < 3; ++ax) {
      EXPECT_TRUE(a[ax] == box.min[ax] || a[ax] == box.max[ax]);
      EXPECT_TRUE(b[ax] == box.min[ax] || b[ax] == box.max[ax]);
    }
    std::array<double, 3> p{a.x, a.y, a.z}, q{b.x, b.y, b.z};
    if (q < p) std::swap(p, q);
    EXPECT_TRUE(edges.insert({p, q}).second) << "edge traced twice";
  }
  EXPECT_EQ(edges.size(), 12u);
}

// ---------------------------------------------------------------------------
// Implicit objects

TEST(Objects, UnitSpheresExactMatchesSphereReduction) {
  const std::vector<Sphere> s{{{0, 0, 0}, 1, 1, {}}, {{1, 0, 0}, 1, 1, {}}};
  const std::vector<ImplicitObject> objs{make_sphere_object(0, s[0]), make_sphere_object(1, s[1])};
  EXPECT_EQ(detect_objects(objs, NarrowPhaseMode::ExactPairTest), detect_spheres(s));
  EXPECT_EQ(detect_objects(objs, NarrowPhaseMode::ExactPairTest).count(), 1u);
}

TEST(Objects, DisjointBoxesEmptyInBothModes) {
  const std::vector<ImplicitObject> objs{make_box_object(0, {{0, 0, 0}, {1, 1, 1}}),
                                         make_box_object(1, {{2, 0, 0}, {3, 1, 1}})};
  CollisionSet set(2);
  const auto stats = detect_objects(std::span<const ImplicitObject>(objs), NarrowPhaseMode::PaperPointTest, set);
  EXPECT_EQ(stats.broad_phase_hits, 0u);
  EXPECT_EQ(set.count(), 0u);
  EXPECT_EQ(detect_objects(objs, NarrowPhaseMode::ExactPairTest).count(), 0u);
}

TEST(Objects, MissingExactTestRejected) {
  auto obj = make_sphere_object(0, {{0, 0, 0}, 1, 1, {}});
  obj.exact_pair_test = nullptr;
  const std::vector<ImplicitObject> objs{obj};
  EXPECT_THROW(detect_objects(objs, NarrowPhaseMode::ExactPairTest), MissingExactTest);
  EXPECT_NO_THROW(detect_objects(objs, NarrowPhaseMode::PaperPointTest));
}

TEST(Objects, BoxesArePointTestExact) {
  // A box's AABB edges lie on the box, so the point test cannot miss.
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0, 1), s(0.01, 0.08);
  std::vector<ImplicitObject> objs;
  for (std::uint32_t k = 0; k < 800; ++k) {
    const Vec3 c{u(rng), u(rng), u(rng)};
    const Vec3 h{s(rng), s(rng), s(rng)};
    objs.push_back(make_box_object(k, {c - h, c + h}));
  }
  CollisionSet want(800);
  for (std::uint32_t i = 0; i < 800; ++i)
    for (std::uint32_t j = i + 1; j < 800; ++j)
      if (objs[i].aabb.overlaps(objs[j].aabb)) want.mark(i, j);
  EXPECT_EQ(detect_objects(objs, NarrowPhaseMode::PaperPointTest), want);
  EXPECT_EQ(detect_objects(objs, NarrowPhaseMode::ExactPairTest), want);
}

TEST(Objects, EllipsoidModesAgainstOracle) {
  const auto ellipsoids = random_ellipsoids(1000, 0.03, 21);
  std::vector<ImplicitObject> objs;
  for (std::uint32_t k = 0; k < ellipsoids.size(); ++k) objs.push_back(make_ellipsoid_object(k, ellipsoids[k]));
  const auto paper = detect_objects(objs, NarrowPhaseMode::PaperPointTest);
  const auto exact = detect_objects(objs, NarrowPhaseMode::ExactPairTest);
  const auto want = oracle::ellipsoid_pairs_oracle(ellipsoids);
  ASSERT_GT(want.count(), 50u);
  EXPECT_EQ(exact, want) << diff(exact, want);
  EXPECT_TRUE(subset(paper, exact));
  // The point test sits on AABB edges, which lie outside a smooth ellipsoid, so it
  // can only fire on near-degenerate contact. Record the size of the gap.
  RecordProperty("paper_mode_pairs", static_cast<int>(paper.count()));
  RecordProperty("exact_pairs", static_cast<int>(exact.count()));
  EXPECT_LT(paper.count(), exact.count());
}

TEST(Objects, EllipsoidOracleAgreesWithSampling) {
  // Dense rejection sampling can prove overlap (a shared sample point) but not its
  // absence, so it checks one direction and gives a floor on the other.
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(-1, 1), ax(0.2, 1.0);
  int agree = 0, witnessed = 0;
  for (int k = 0; k < 300; ++k) {
    const Ellipsoid a{{0, 0, 0}, {ax(rng), ax(rng), ax(rng)}};
    const Ellipsoid b{{u(rng) * 1.5, u(rng) * 1.5, u(rng) * 1.5}, {ax(rng), ax(rng), ax(rng)}};
    const bool analytic = oracle::ellipsoid_overlap_oracle(a, b);
    EXPECT_EQ(analytic, ellipsoids_overlap(a, b)) << k;
    bool sampled = false;
    for (int s = 0; s < 20000 && !sampled; ++s) {
      const Vec3 p = a.center + Vec3{u(rng) * a.semi_axes.x, u(rng) * a.semi_axes.y, u(rng) * a.semi_axes.z};
      sampled = a.contains(p) && b.contains(p);
    }
    if (sampled) {
      ++witnessed;
      EXPECT_TRUE(analytic) << "sample inside both but oracle says disjoint, case " << k;
    }
    agree += sampled == analytic;
  }
  EXPECT_GT(witnessed, 50);
  EXPECT_GT(agree, 270);
}

TEST(Objects, IsInsideStaysWithinAabb) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-2, 2);
  const auto e = make_ellipsoid_object(0, Ellipsoid{{0.1, 0.2, 0.3}, {0.5, 1.0, 0.25}});
  const auto s = make_sphere_object(1, {{1, 1, 1}, 0.7, 1, {}});
  for (int k = 0; k < 20000; ++k) {
    const Vec3 p{u(rng), u(rng), u(rng)};
    if (e.is_inside(p)) { EXPECT_TRUE(e.aabb.contains(p)); }
    if (s.is_inside(p)) { EXPECT_TRUE(s.aabb.contains(p)); }
  }
}

// ---------------------------------------------------------------------------
// Triangles

namespace {

CollisionSet detect(const TriangleFrame& f, bool aux = true, bool probes = true,
                    AdjacencyFilter filter = AdjacencyFilter::None) {
  TriangleFrame frame = f;
  make_auxiliaries(frame);
  TriangleDetectOptions opt;
  opt.adjacency = filter;
  opt.use_auxiliaries = aux;
  opt.use_vertex_probes = probes;
  return detect_triangles(frame, opt);
}

void expect_suite_exact(const suites::PairSuite& suite) {
  const TriangleFrame frame = suite.frame();
  const auto want = oracle::triangle_pairs_oracle(frame, AdjacencyFilter::None);
  for (std::size_t k = 0; k < suite.intersect.size(); ++k) {
    const auto i = static_cast<std::uint32_t>(2 * k);
    ASSERT_EQ(want.contains(i, i + 1), suite.intersect[k]) << suite.name << " oracle vs construction, pair " << k;
  }
  const auto got = detect(frame);
  EXPECT_EQ(got, want) << suite.name << diff(got, want);
}

}  // namespace

TEST(Triangles, PerpendicularPierce) {
  const std::vector<suites::Tri> tris{{Vec3{0, 0, 0}, {2, 0, 0}, {0, 2, 0}},
                                      {Vec3{0.5, 0.5, -1}, {0.5, 0.5, 1}, {0.5, 3, 0}}};
  const auto frame = make_soup_frame(tris);
  EXPECT_EQ(detect(frame, false, false).count(), 1u);
  EXPECT_EQ(detect(frame).count(), 1u);
}

TEST(Triangles, CoplanarNeedsAuxiliaries) {
  // Hexagram: edges cross, no vertex inside the other.
  const double r = 1.0;
  suites::Tri a, b;
  for (int k = 0; k < 3; ++k) {
    const double t = 2 * std::numbers::pi * k / 3;
    a[k] = {r * std::cos(t), r * std::sin(t), 0};
    b[k] = {-r * std::cos(t), -r * std::sin(t), 0};
  }
  const auto frame = make_soup_frame(std::vector<suites::Tri>{a, b});
  ASSERT_TRUE(oracle::tri_tri_oracle(frame.originals[0], frame.originals[1]));
  EXPECT_EQ(detect(frame).count(), 1u);
  EXPECT_EQ(detect(frame, true, false).count(), 1u);
  EXPECT_EQ(detect(frame, false, true).count(), 0u);
  EXPECT_EQ(detect(frame, false, false).count(), 0u);
}

TEST(Triangles, CoplanarContainmentNeedsProbes) {
  const std::vector<suites::Tri> tris{{Vec3{0, 0, 0}, {4, 0, 0}, {0, 4, 0}},
                                      {Vec3{0.5, 0.5, 0}, {1, 0.5, 0}, {0.5, 1, 0}}};
  const auto frame = make_soup_frame(tris);
  EXPECT_EQ(detect(frame).count(), 1u);
  EXPECT_EQ(detect(frame, true, false).count(), 0u) << "edge rays alone cannot see containment";
}

TEST(Triangles, DirectedSuitesMatchOracle) {
  expect_suite_exact(suites::coplanar_overlapping(64, 1));
  expect_suite_exact(suites::coplanar_disjoint(64, 2));
  expect_suite_exact(suites::edge_through_face(64, 3));
  expect_suite_exact(suites::face_piercing(64, 4));
  expect_suite_exact(suites::near_miss(64, 5));
}

TEST(Triangles, AuxOffMissesCoplanarPairs) {
  const auto suite = suites::coplanar_overlapping(64, 6);
  const auto frame = suite.frame();
  const auto want = oracle::triangle_pairs_oracle(frame, AdjacencyFilter::None);
  const auto without = detect(frame, false, true);
  EXPECT_TRUE(subset(without, want));
  EXPECT_GE(want.count() - without.count(), 16u) << "every hexagram pair must be missed";
}

TEST(Triangles, RandomSoupMatchesOracle) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto frame = make_soup_frame(random_triangle_soup(500, 0.08, seed));
    const auto want = oracle::triangle_pairs_oracle(frame, AdjacencyFilter::None);
    ASSERT_GT(want.count(), 10u);
    const auto got = detect(frame);
    ASSERT_EQ(got, want) << "seed " << seed << diff(got, want);
  }
}

TEST(Triangles, SharedVertexFilter) {
  // Two triangles of a folded strip share an edge and also cross elsewhere.
  const std::vector<Vec3> v{{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0.2, 0.2, -0.5}, {0.3, 0.3, 0.5}};
  const std::vector<Face> faces{{0, 1, 2}, {0, 3, 4}};
  const auto frame = make_frame(v, faces);
  EXPECT_EQ(detect(frame, true, true, AdjacencyFilter::SharedVertex).count(), 0u);
  EXPECT_TRUE(oracle::tri_tri_oracle(frame.originals[0], frame.originals[1]));
  EXPECT_EQ(oracle::triangle_pairs_oracle(frame, AdjacencyFilter::SharedVertex).count(), 0u);
}

TEST(Triangles, DeformingMeshMatchesOracle) {
  auto seq = deforming_mesh_sequence();
  std::uint64_t total = 0;
  for (std::size_t f = 0; f < seq.frames.size(); f += 3) {
    const auto want = oracle::triangle_pairs_oracle(seq.frames[f], AdjacencyFilter::SharedVertex);
    const auto got = detect(seq.frames[f], true, true, AdjacencyFilter::SharedVertex);
    ASSERT_EQ(got, want) << "frame " << f << diff(got, want);
    total += want.count();
  }
  EXPECT_GT(total, 0u);
}

TEST(TriangleSequence, RefitEqualsRebuild) {
  auto seq = deforming_mesh_sequence();
  TriangleDetectOptions opt;
  opt.adjacency = AdjacencyFilter::SharedVertex;
  TriangleSequenceDetector refit(BvhUpdate::Refit, opt), rebuild(BvhUpdate::Rebuild, opt);
  for (std::size_t f = 0; f < seq.frames.size(); ++f) {
    TriangleFrame a = seq.frames[f], b = seq.frames[f];
    FrameTimings ta, tb;
    const auto ra = refit.detect(a, &ta);
    const auto rb = rebuild.detect(b, &tb);
    ASSERT_EQ(ra, rb) << "frame " << f;
    EXPECT_EQ(refit.bvh()->topology_epoch(), 0u);
    EXPECT_EQ(rebuild.bvh()->topology_epoch(), f);
  }
}

TEST(TriangleSequence, RefitRejectsTopologyChange) {
  auto seq = deforming_mesh_sequence();
  TriangleSequenceDetector det(BvhUpdate::Refit, {});
  det.detect(seq.frames[0]);
  auto small = make_soup_frame(random_triangle_soup(10, 0.1, 1));
  EXPECT_THROW(det.detect(small), TopologyMismatch);
}
