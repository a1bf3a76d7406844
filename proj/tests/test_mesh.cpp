// Copyright 2026 The Mochi Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include "mochi/mesh.hpp"
#include "mochi/scene.hpp"

using namespace mochi;

namespace {

void expect_vec_near(const Vec3& a, const Vec3& b, double tol = 1e-15) {
  EXPECT_NEAR(a.x, b.x, tol);
  EXPECT_NEAR(a.y, b.y, tol);
  EXPECT_NEAR(a.z, b.z, tol);
}

}  // namespace

TEST(Auxiliaries, DirectSubstitution) {
  auto frame = make_frame({{0, 0, 0}, {1, 0, 0}, {0, 1, 0}}, {{0, 1, 2}});
  make_auxiliaries(frame, 0.01);
  ASSERT_EQ(frame.auxiliaries.size(), 3u);
  const Triangle& ab = frame.auxiliaries[0];
  expect_vec_near(ab.a, {0, 0, 0});
  expect_vec_near(ab.b, {1, 0, 0.01});
  expect_vec_near(ab.c, {1, 0, -0.01});
  EXPECT_EQ(ab.kind, TriangleKind::AuxAB);
  EXPECT_EQ(frame.auxiliaries[1].kind, TriangleKind::AuxBC);
  EXPECT_EQ(frame.auxiliaries[2].kind, TriangleKind::AuxCA);
  EXPECT_EQ(frame.epsilon, 0.01);
  EXPECT_EQ(check_auxiliaries(frame), "");
}

TEST(Auxiliaries, InvariantsOnDeformingMesh) {
  auto seq = deforming_mesh_sequence();
  for (auto& frame : seq.frames) {
    make_auxiliaries(frame);
    EXPECT_EQ(frame.auxiliaries.size(), 3 * frame.originals.size());
    EXPECT_EQ(check_auxiliaries(frame), "");
    EXPECT_DOUBLE_EQ(frame.epsilon, 1e-4 * mean_edge_length(frame));
    for (std::size_t i = 0; i < frame.auxiliaries.size(); ++i)
      EXPECT_EQ(frame.auxiliaries[i].source_id, i / 3);
  }
}

TEST(Auxiliaries, CheckCatchesCorruption) {
  auto frame = make_frame({{0, 0, 0}, {1, 0, 0}, {0, 1, 0}}, {{0, 1, 2}});
  make_auxiliaries(frame, 0.01);
  frame.auxiliaries[1] = make_triangle({1, 0, 0}, {0, 1, 0.01}, {0.5, 0.5, 0.3}, 0, TriangleKind::AuxBC);
  EXPECT_NE(check_auxiliaries(frame), "");
  frame.auxiliaries.pop_back();
  EXPECT_NE(check_auxiliaries(frame), "");
}

TEST(Mesh, FaceIndexOutOfRange) {
  EXPECT_THROW(make_frame({{0, 0, 0}, {1, 0, 0}, {0, 1, 0}}, {{0, 1, 3}}), IndexOutOfRange);
}

TEST(Mesh, DegenerateFaceRejected) {
  EXPECT_THROW(make_frame({{0, 0, 0}, {1, 0, 0}, {2, 0, 0}}, {{0, 1, 2}}), DegenerateTriangle);
}

TEST(Labels, DisjointTrianglesAreTwoObjects) {
  const auto frame = make_frame({{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {5, 0, 0}, {6, 0, 0}, {5, 1, 0}},
                                {{0, 1, 2}, {3, 4, 5}});
  const auto labels = label_components(frame);
  EXPECT_EQ(component_count(labels), 2u);
  EXPECT_NE(labels[0], labels[1]);
}

TEST(Labels, SharedVertexJoins) {
  const auto frame = make_frame({{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {-1, 0, 0}, {0, -1, 0}},
                                {{0, 1, 2}, {0, 3, 4}});
  EXPECT_EQ(component_count(label_components(frame)), 1u);
}

TEST(Labels, DeformingMeshHasSheetAndBall) {
  const auto seq = deforming_mesh_sequence();
  EXPECT_EQ(component_count(seq.object_labels), 2u);
}

TEST(Classify, Buckets) {
  const auto frame = make_frame({{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {1, 1, 0}, {5, 0, 0}, {6, 0, 0}, {5, 1, 0}},
                                {{0, 1, 2}, {1, 3, 2}, {4, 5, 6}});
  const auto labels = label_components(frame);
  CollisionSet set(3);
  auto empty = classify_collisions(set, labels);
  EXPECT_TRUE(empty.self_collisions.empty());
  EXPECT_TRUE(empty.inter_object_collisions.empty());
  set.mark(0, 1);
  set.mark(1, 2);
  const auto c = classify_collisions(set, labels);
  EXPECT_EQ(c.self_collisions, (std::vector<ObjectPair>{{0, 1}}));
  EXPECT_EQ(c.inter_object_collisions, (std::vector<ObjectPair>{{1, 2}}));
  EXPECT_THROW(classify_collisions(CollisionSet(2), labels), InvalidParams);
}

TEST(Sequence, TopologyMustMatch) {
  auto a = make_frame({{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {1, 1, 0}}, {{0, 1, 2}});
  auto b = make_frame({{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {1, 1, 0}}, {{1, 3, 2}});
  EXPECT_THROW(make_sequence({a, b}), TopologyMismatch);
  EXPECT_NO_THROW(make_sequence({a, a}));
}

TEST(Adjacency, ShareVertex) {
  EXPECT_TRUE(share_vertex({0, 1, 2}, {2, 3, 4}));
  EXPECT_FALSE(share_vertex({0, 1, 2}, {3, 4, 5}));
}
