// Copyright 2026 The Mochi Authors
// SPDX-License-Identifier: Apache-2.0

// Triangle frames, auxiliary triangles, vertex adjacency and connected-component
// labelling.

#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "mochi/collision_set.hpp"
#include "mochi/error.hpp"
#include "mochi/geometry.hpp"

namespace mochi {

using Face = std::array<std::uint32_t, 3>;

struct TriangleFrame {
  std::vector<Vec3> vertices;
  std::vector<Face> faces;
  std::vector<Triangle> originals;
  /// Three per original, ordered (AB, BC, CA) for original 0, then original 1, ...
  std::vector<Triangle> auxiliaries;
  double epsilon = 0.0;
};

/// Builds originals with unit normals from indexed geometry.
inline TriangleFrame make_frame(std::vector<Vec3> vertices, std::vector<Face> faces) {
  TriangleFrame frame;
  frame.vertices = std::move(vertices);
  frame.faces = std::move(faces);
  frame.originals.reserve(frame.faces.size());
  const auto nv = frame.vertices.size();
  for (std::size_t f = 0; f < frame.faces.size(); ++f) {
    const Face& face = frame.faces[f];
    for (std::uint32_t v : face)
      if (v >= nv)
        throw IndexOutOfRange("face " + std::to_string(f) + " references vertex " +
                              std::to_string(v) + " of " + std::to_string(nv));
    frame.originals.push_back(make_triangle(frame.vertices[face[0]], frame.vertices[face[1]],
                                            frame.vertices[face[2]],
                                            static_cast<std::uint32_t>(f)));
  }
  return frame;
}

/// Unindexed soup: every triangle gets its own three vertices, so no two triangles
/// are adjacent.
inline TriangleFrame make_soup_frame(std::span<const std::array<Vec3, 3>> triangles) {
  std::vector<Vec3> vertices;
  std::vector<Face> faces;
  vertices.reserve(3 * triangles.size());
  faces.reserve(triangles.size());
  for (const auto& t : triangles) {
    const auto base = static_cast<std::uint32_t>(vertices.size());
    vertices.insert(vertices.end(), t.begin(), t.end());
    faces.push_back({base, base + 1, base + 2});
  }
  return make_frame(std::move(vertices), std::move(faces));
}

inline double mean_edge_length(const TriangleFrame& frame) {
  if (frame.originals.empty()) return 0.0;
  double total = 0.0;
  for (const Triangle& t : frame.originals)
    total += length(t.b - t.a) + length(t.c - t.b) + length(t.a - t.c);
  return total / (3.0 * static_cast<double>(frame.originals.size()));
}

inline constexpr double kDefaultEpsilonScale = 1e-4;

inline double default_epsilon(const TriangleFrame& frame) {
  return kDefaultEpsilonScale * mean_edge_length(frame);
}

/// Erects a thin triangle on every edge, orthogonal to the face, whose median from
/// the first vertex is that edge: T(A, B+eN, B-eN), T(B, C+eN, C-eN), T(C, A+eN, A-eN).
inline void make_auxiliaries(TriangleFrame& frame, double epsilon) {
  if (!(epsilon > 0.0)) throw InvalidParams("auxiliary epsilon must be positive");
  frame.auxiliaries.clear();
  frame.auxiliaries.reserve(3 * frame.originals.size());
  for (const Triangle& t : frame.originals) {
    if (is_degenerate(t.a, t.b, t.c))
      throw DegenerateTriangle("triangle " + std::to_string(t.source_id));
    const Vec3 offset = t.normal * epsilon;
    const auto aux = [&](const Vec3& apex, const Vec3& far, TriangleKind kind) {
      const Vec3 p = far + offset;
      const Vec3 q = far - offset;
      return Triangle{apex, p, q, normalize(cross(p - apex, q - apex)), t.source_id, kind};
    };
    frame.auxiliaries.push_back(aux(t.a, t.b, TriangleKind::AuxAB));
    frame.auxiliaries.push_back(aux(t.b, t.c, TriangleKind::AuxBC));
    frame.auxiliaries.push_back(aux(t.c, t.a, TriangleKind::AuxCA));
  }
  frame.epsilon = epsilon;
}

inline void make_auxiliaries(TriangleFrame& frame) { make_auxiliaries(frame, default_epsilon(frame)); }

/// Median of an auxiliary triangle from its apex, i.e. the original edge it guards.
inline std::pair<Vec3, Vec3> auxiliary_median(const Triangle& aux) {
  return {aux.a, (aux.b + aux.c) * 0.5};
}

inline constexpr double kAuxOrthogonalityTolerance = 1e-6;  // radians

/// Checks orthogonality to the original plane and median/edge coincidence for every
/// auxiliary. Returns an empty string when all hold, otherwise a description.
inline std::string check_auxiliaries(const TriangleFrame& frame) {
  if (frame.auxiliaries.size() != 3 * frame.originals.size())
    return "auxiliary count " + std::to_string(frame.auxiliaries.size()) + " != 3 x " +
           std::to_string(frame.originals.size());
  for (std::size_t i = 0; i < frame.auxiliaries.size(); ++i) {
    const Triangle& aux = frame.auxiliaries[i];
    const Triangle& orig = frame.originals[i / 3];
    if (aux.source_id != orig.source_id) return "auxiliary " + std::to_string(i) + " source id";
    const double cos_angle = std::abs(dot(aux.normal, orig.normal));
    if (std::asin(std::min(1.0, cos_angle)) > kAuxOrthogonalityTolerance)
      return "auxiliary " + std::to_string(i) + " not orthogonal to its original";
    const std::array<Vec3, 3> v{orig.a, orig.b, orig.c};
    const Vec3& edge_start = v[i % 3];
    const Vec3& edge_end = v[(i % 3 + 1) % 3];
    const auto [m0, m1] = auxiliary_median(aux);
    const double tol = 1e-9 * std::max(1.0, length(edge_end - edge_start));
    if (length(m0 - edge_start) > tol || length(m1 - edge_end) > tol)
      return "auxiliary " + std::to_string(i) + " median does not coincide with its edge";
  }
  return {};
}

inline bool share_vertex(const Face& a, const Face& b) {
  for (std::uint32_t x : a)
    for (std::uint32_t y : b)
      if (x == y) return true;
  return false;
}

enum class AdjacencyFilter { None, SharedVertex };

class DisjointSet {
 public:
  explicit DisjointSet(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0u); }
  std::uint32_t find(std::uint32_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }
  void unite(std::uint32_t a, std::uint32_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent_[std::max(a, b)] = std::min(a, b);
  }

 private:
  std::vector<std::uint32_t> parent_;
};

/// Per-triangle component labels, dense in [0, components). Triangles sharing any
/// vertex get the same label.
inline std::vector<std::uint32_t> label_components(const TriangleFrame& frame) {
  DisjointSet vertex_sets(frame.vertices.size());
  for (const Face& f : frame.faces) {
    vertex_sets.unite(f[0], f[1]);
    vertex_sets.unite(f[0], f[2]);
  }
  std::vector<std::uint32_t> dense(frame.vertices.size(), UINT32_MAX);
  std::vector<std::uint32_t> labels(frame.faces.size());
  std::uint32_t next = 0;
  for (std::size_t f = 0; f < frame.faces.size(); ++f) {
    const std::uint32_t root = vertex_sets.find(frame.faces[f][0]);
    if (dense[root] == UINT32_MAX) dense[root] = next++;
    labels[f] = dense[root];
  }
  return labels;
}

inline std::size_t component_count(std::span<const std::uint32_t> labels) {
  std::uint32_t hi = 0;
  for (std::uint32_t l : labels) hi = std::max(hi, l + 1);
  return hi;
}

struct ClassifiedCollisions {
  std::vector<ObjectPair> self_collisions;
  std::vector<ObjectPair> inter_object_collisions;
};

inline ClassifiedCollisions classify_collisions(const CollisionSet& set,
                                                std::span<const std::uint32_t> labels) {
  if (labels.size() != set.n_objects())
    throw InvalidParams("label count does not match collision set size");
  ClassifiedCollisions out;
  set.for_each_pair([&](std::uint32_t i, std::uint32_t j) {
    (labels[i] == labels[j] ? out.self_collisions : out.inter_object_collisions).emplace_back(i, j);
  });
  return out;
}

/// Frames sharing one face list; labels come from frame 0.
struct FrameSequence {
  std::vector<TriangleFrame> frames;
  std::vector<std::uint32_t> object_labels;
};

inline FrameSequence make_sequence(std::vector<TriangleFrame> frames) {
  FrameSequence seq;
  if (!frames.empty()) {
    for (std::size_t i = 1; i < frames.size(); ++i)
      if (frames[i].faces != frames[0].faces)
        throw TopologyMismatch("frame " + std::to_string(i) + " has a different face list");
    seq.object_labels = label_components(frames[0]);
  }
  seq.frames = std::move(frames);
  return seq;
}

}  // namespace mochi
