// Copyright 2026 The Mochi Authors
// SPDX-License-Identifier: Apache-2.0

// Collision detection phrased as ray launches against the kernel in rt_kernel.hpp.
// The broad phase is whatever the kernel's any-hit reports; the narrow phase runs
// inside the callback and marks pairs in a CollisionSink.
//
//   detect_uniform_spheres  one infinitesimal ray per center against boxes of the
//                           doubled-radius representative spheres
//   detect_spheres          12 rays tracing each sphere's AABB edges
//   detect_objects          same rays over arbitrary implicit objects
//   detect_triangles        3 rays along each triangle's edges against originals
//                           plus auxiliary triangles, optionally 3 vertex probes

#pragma once

#include <any>
#include <array>
#include <atomic>
#include <chrono>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "mochi/collision_set.hpp"
#include "mochi/error.hpp"
#include "mochi/geometry.hpp"
#include "mochi/mesh.hpp"
#include "mochi/parallel.hpp"
#include "mochi/rt_kernel.hpp"

namespace mochi {

struct LaunchOptions {
  unsigned threads = 0;  // 0 = hardware concurrency
};

struct LaunchStats {
  std::uint64_t rays = 0;
  /// Any-hit reports excluding a ray hitting its own object.
  std::uint64_t broad_phase_hits = 0;
};

namespace detail {

// Runs launch(i, hit_counter) for i in [0, n) across workers and sums the counters.
template <class Launch>
std::uint64_t launch_all(std::size_t n, unsigned threads, Launch&& launch) {
  std::atomic<std::uint64_t> hits{0};
  parallel_for(n, threads, [&](unsigned, std::size_t begin, std::size_t end) {
    std::uint64_t local = 0;
    for (std::size_t i = begin; i < end; ++i) launch(i, local);
    hits.fetch_add(local, std::memory_order_relaxed);
  });
  return hits.load();
}

inline bool within_contact(const Vec3& ci, double ri, const Vec3& cj, double rj) {
  const double reach = ri + rj;
  return length_squared(ci - cj) <= reach * reach;
}

}  // namespace detail

inline Aabb scene_bounds(std::span<const Sphere> spheres) {
  Aabb box;
  for (const Sphere& s : spheres) box.expand(s.bounds());
  return box;
}

// ---------------------------------------------------------------------------
// Uniform-radius spheres

inline constexpr double kUniformRadiusTolerance = 1e-12;
inline constexpr double kInfinitesimalRayScale = 1e-7;

/// Common radius of the scene; throws NonUniformRadius otherwise.
inline double uniform_radius(std::span<const Sphere> spheres) {
  if (spheres.empty()) return 0.0;
  const double r = spheres.front().radius;
  for (const Sphere& s : spheres) {
    validate(s);
    if (std::abs(s.radius - r) > kUniformRadiusTolerance * r)
      throw NonUniformRadius("radius " + std::to_string(s.radius) + " differs from " +
                             std::to_string(r));
  }
  return r;
}

inline double infinitesimal_ray_length(const Aabb& scene) {
  const double diag = scene.valid() ? scene.diagonal() : 0.0;
  return kInfinitesimalRayScale * (diag > 0.0 ? diag : 1.0);
}

/// Boxes of the representative spheres: center +- 2r.
inline PrimitiveSoup representative_sphere_soup(std::span<const Sphere> spheres) {
  double r_max = 0.0;
  for (const Sphere& s : spheres) r_max = std::max(r_max, s.radius);
  std::vector<Aabb> boxes;
  boxes.reserve(spheres.size());
  for (const Sphere& s : spheres) boxes.push_back(Aabb::around(s.center, 2.0 * r_max));
  return PrimitiveSoup::from_aabbs(std::move(boxes));
}

template <CollisionSink Sink>
LaunchStats launch_uniform_sphere_rays(const Bvh& bvh, std::span<const Sphere> spheres, Sink& sink,
                                       const LaunchOptions& options = {}) {
  const double ray_length = infinitesimal_ray_length(scene_bounds(spheres));
  LaunchStats stats;
  stats.rays = spheres.size();
  stats.broad_phase_hits = detail::launch_all(
      spheres.size(), options.threads, [&](std::size_t i, std::uint64_t& hits) {
        const Sphere& source = spheres[i];
        const Ray ray{source.center, {1.0, 0.0, 0.0}, 0.0, ray_length, i};
        bvh.traverse(ray, [&](HitRecord& hit) {
          const std::uint32_t j = hit.primitive_id;
          if (j == i) return;
          ++hits;
          const Sphere& other = spheres[j];
          if (detail::within_contact(source.center, source.radius, other.center, other.radius))
            sink.mark(static_cast<std::uint32_t>(i), j);
        });
      });
  return stats;
}

template <CollisionSink Sink>
LaunchStats detect_uniform_spheres(std::span<const Sphere> spheres, Sink& sink,
                                   const LaunchOptions& options = {}) {
  uniform_radius(spheres);
  if (spheres.empty()) return {};
  const Bvh bvh = Bvh::build(representative_sphere_soup(spheres));
  return launch_uniform_sphere_rays(bvh, spheres, sink, options);
}

inline CollisionSet detect_uniform_spheres(std::span<const Sphere> spheres,
                                           const LaunchOptions& options = {}) {
  CollisionSet set(static_cast<std::uint32_t>(spheres.size()));
  detect_uniform_spheres(spheres, set, options);
  return set;
}

// ---------------------------------------------------------------------------
// AABB edge rays

inline constexpr int kEdgeRaysPerBox = 12;

/// The 12 edges of a box traced from four mutually non-adjacent corners, three rays
/// each. Ray ids are object_index * 12 + k.
inline std::array<Ray, kEdgeRaysPerBox> aabb_edge_rays(const Aabb& box, std::uint64_t object_index) {
  const Vec3 lo = box.min;
  const Vec3 hi = box.max;
  const Vec3 e = box.extent();
  struct Corner {
    Vec3 origin;
    double sx, sy, sz;  // direction sign along each axis from this corner
  };
  const std::array<Corner, 4> corners{{
      {{lo.x, lo.y, lo.z}, +1, +1, +1},
      {{hi.x, hi.y, lo.z}, -1, -1, +1},
      {{hi.x, lo.y, hi.z}, -1, +1, -1},
      {{lo.x, hi.y, hi.z}, +1, -1, -1},
  }};
  std::array<Ray, kEdgeRaysPerBox> rays;
  const std::uint64_t base = object_index * kEdgeRaysPerBox;
  for (int c = 0; c < 4; ++c) {
    const Corner& k = corners[c];
    rays[3 * c + 0] = {k.origin, {k.sx, 0, 0}, 0.0, e.x, base + 3 * c + 0};
    rays[3 * c + 1] = {k.origin, {0, k.sy, 0}, 0.0, e.y, base + 3 * c + 1};
    rays[3 * c + 2] = {k.origin, {0, 0, k.sz}, 0.0, e.z, base + 3 * c + 2};
  }
  return rays;
}

// ---------------------------------------------------------------------------
// Spheres with arbitrary radii

inline PrimitiveSoup sphere_soup(std::span<const Sphere> spheres) {
  std::vector<Aabb> boxes;
  boxes.reserve(spheres.size());
  for (const Sphere& s : spheres) boxes.push_back(s.bounds());
  return PrimitiveSoup::from_aabbs(std::move(boxes));
}

template <CollisionSink Sink>
LaunchStats launch_sphere_edge_rays(const Bvh& bvh, std::span<const Sphere> spheres, Sink& sink,
                                    const LaunchOptions& options = {}) {
  LaunchStats stats;
  stats.rays = kEdgeRaysPerBox * spheres.size();
  stats.broad_phase_hits = detail::launch_all(
      spheres.size(), options.threads, [&](std::size_t i, std::uint64_t& hits) {
        const Sphere& source = spheres[i];
        for (const Ray& ray : aabb_edge_rays(source.bounds(), i)) {
          bvh.traverse(ray, [&](HitRecord& hit) {
            const std::uint32_t j = hit.primitive_id;
            if (j == i) return;
            ++hits;
            const Sphere& other = spheres[j];
            if (detail::within_contact(source.center, source.radius, other.center, other.radius))
              sink.mark(static_cast<std::uint32_t>(i), j);
          });
        }
      });
  return stats;
}

template <CollisionSink Sink>
LaunchStats detect_spheres(std::span<const Sphere> spheres, Sink& sink,
                           const LaunchOptions& options = {}) {
  for (const Sphere& s : spheres) validate(s);
  if (spheres.empty()) return {};
  const Bvh bvh = Bvh::build(sphere_soup(spheres));
  return launch_sphere_edge_rays(bvh, spheres, sink, options);
}

inline CollisionSet detect_spheres(std::span<const Sphere> spheres, const LaunchOptions& options = {}) {
  CollisionSet set(static_cast<std::uint32_t>(spheres.size()));
  detect_spheres(spheres, set, options);
  return set;
}

// ---------------------------------------------------------------------------
// Implicit objects

struct ImplicitObject {
  std::uint32_t object_id = 0;
  Aabb aabb;
  std::function<bool(const Vec3&)> is_inside;
  std::function<bool(const ImplicitObject&, const ImplicitObject&)> exact_pair_test;
  /// Shape parameters for exact_pair_test; opaque to the engine.
  std::any shape;
};

enum class NarrowPhaseMode {
  /// Marks when the ray's entry point into the hit box lies inside both objects.
  PaperPointTest,
  /// Uses the edge rays only as a broad phase and asks exact_pair_test.
  ExactPairTest,
};

struct Ellipsoid {
  Vec3 center;
  Vec3 semi_axes{1.0, 1.0, 1.0};

  bool contains(const Vec3& p) const {
    const Vec3 d = p - center;
    const double q = (d.x / semi_axes.x) * (d.x / semi_axes.x) +
                     (d.y / semi_axes.y) * (d.y / semi_axes.y) +
                     (d.z / semi_axes.z) * (d.z / semi_axes.z);
    return q <= 1.0;
  }
  Aabb bounds() const { return {center - semi_axes, center + semi_axes}; }
};

/// Axis-aligned ellipsoid overlap through the Perram-Wertheim contact function
/// F(l) = sum_k l(1-l) d_k^2 / (l b_k^2 + (1-l) a_k^2), which is concave on [0, 1];
/// the ellipsoids are disjoint iff max F > 1.
inline bool ellipsoids_overlap(const Ellipsoid& e1, const Ellipsoid& e2) {
  const Vec3 d = e2.center - e1.center;
  const auto contact = [&](double l) {
    double f = 0.0;
    for (int k = 0; k < 3; ++k) {
      const double a2 = e1.semi_axes[k] * e1.semi_axes[k];
      const double b2 = e2.semi_axes[k] * e2.semi_axes[k];
      f += l * (1.0 - l) * d[k] * d[k] / (l * b2 + (1.0 - l) * a2);
    }
    return f;
  };
  constexpr double kInvPhi = 0.6180339887498949;
  double lo = 0.0;
  double hi = 1.0;
  double x1 = hi - kInvPhi * (hi - lo);
  double x2 = lo + kInvPhi * (hi - lo);
  double f1 = contact(x1);
  double f2 = contact(x2);
  for (int iter = 0; iter < 80; ++iter) {
    if (f1 > 1.0 || f2 > 1.0) return false;
    if (f1 < f2) {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + kInvPhi * (hi - lo);
      f2 = contact(x2);
    } else {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - kInvPhi * (hi - lo);
      f1 = contact(x1);
    }
  }
  return std::max(f1, f2) <= 1.0;
}

inline ImplicitObject make_sphere_object(std::uint32_t id, const Sphere& sphere) {
  ImplicitObject obj;
  obj.object_id = id;
  obj.aabb = sphere.bounds();
  obj.is_inside = [c = sphere.center, r = sphere.radius](const Vec3& p) {
    return length_squared(p - c) <= r * r;
  };
  obj.exact_pair_test = [](const ImplicitObject& a, const ImplicitObject& b) {
    const auto& sa = std::any_cast<const Sphere&>(a.shape);
    const auto& sb = std::any_cast<const Sphere&>(b.shape);
    return detail::within_contact(sa.center, sa.radius, sb.center, sb.radius);
  };
  obj.shape = sphere;
  return obj;
}

inline ImplicitObject make_ellipsoid_object(std::uint32_t id, const Ellipsoid& ellipsoid) {
  ImplicitObject obj;
  obj.object_id = id;
  obj.aabb = ellipsoid.bounds();
  obj.is_inside = [ellipsoid](const Vec3& p) { return ellipsoid.contains(p); };
  obj.exact_pair_test = [](const ImplicitObject& a, const ImplicitObject& b) {
    return ellipsoids_overlap(std::any_cast<const Ellipsoid&>(a.shape),
                              std::any_cast<const Ellipsoid&>(b.shape));
  };
  obj.shape = ellipsoid;
  return obj;
}

/// A solid box: the one shape whose AABB edges lie on the object itself.
inline ImplicitObject make_box_object(std::uint32_t id, const Aabb& box) {
  ImplicitObject obj;
  obj.object_id = id;
  obj.aabb = box;
  obj.is_inside = [box](const Vec3& p) { return box.contains(p); };
  obj.exact_pair_test = [](const ImplicitObject& a, const ImplicitObject& b) {
    return a.aabb.overlaps(b.aabb);
  };
  obj.shape = box;
  return obj;
}

inline PrimitiveSoup object_soup(std::span<const ImplicitObject> objects) {
  std::vector<Aabb> boxes;
  boxes.reserve(objects.size());
  for (const ImplicitObject& o : objects) boxes.push_back(o.aabb);
  return PrimitiveSoup::from_aabbs(std::move(boxes));
}

template <CollisionSink Sink>
LaunchStats launch_object_edge_rays(const Bvh& bvh, std::span<const ImplicitObject> objects,
                                    NarrowPhaseMode mode, Sink& sink,
                                    const LaunchOptions& options = {}) {
  if (mode == NarrowPhaseMode::ExactPairTest)
    for (const ImplicitObject& o : objects)
      if (!o.exact_pair_test)
        throw MissingExactTest("object " + std::to_string(o.object_id) + " has no exact test");
  LaunchStats stats;
  stats.rays = kEdgeRaysPerBox * objects.size();
  stats.broad_phase_hits = detail::launch_all(
      objects.size(), options.threads, [&](std::size_t i, std::uint64_t& hits) {
        for (const Ray& ray : aabb_edge_rays(objects[i].aabb, i)) {
          bvh.traverse(ray, [&](HitRecord& hit) {
            const auto& source = objects[hit.ray_id / kEdgeRaysPerBox];
            const std::uint32_t j = hit.primitive_id;
            if (j == i) return;
            ++hits;
            const auto& other = objects[j];
            bool collide = false;
            if (mode == NarrowPhaseMode::PaperPointTest) {
              const Vec3 p = ray.at(hit.t);
              collide = source.is_inside(p) && other.is_inside(p);
            } else {
              collide = source.exact_pair_test(source, other);
            }
            if (collide) sink.mark(static_cast<std::uint32_t>(i), j);
          });
        }
      });
  return stats;
}

template <CollisionSink Sink>
LaunchStats detect_objects(std::span<const ImplicitObject> objects, NarrowPhaseMode mode, Sink& sink,
                           const LaunchOptions& options = {}) {
  for (const ImplicitObject& o : objects) {
    if (!o.is_inside) throw InvalidScene("object " + std::to_string(o.object_id) + " has no is_inside");
    if (mode == NarrowPhaseMode::ExactPairTest && !o.exact_pair_test)
      throw MissingExactTest("object " + std::to_string(o.object_id) + " has no exact test");
  }
  if (objects.empty()) return {};
  const Bvh bvh = Bvh::build(object_soup(objects));
  return launch_object_edge_rays(bvh, objects, mode, sink, options);
}

inline CollisionSet detect_objects(std::span<const ImplicitObject> objects, NarrowPhaseMode mode,
                                   const LaunchOptions& options = {}) {
  CollisionSet set(static_cast<std::uint32_t>(objects.size()));
  detect_objects(objects, mode, set, options);
  return set;
}

// ---------------------------------------------------------------------------
// Triangle meshes

inline constexpr double kMedianToleranceScale = 1e-9;
inline constexpr double kVertexProbeScale = 1e-9;

struct TriangleDetectOptions {
  AdjacencyFilter adjacency = AdjacencyFilter::None;
  /// Diagnostic switch: without auxiliaries coplanar edge crossings go unseen.
  bool use_auxiliaries = true;
  /// Short rays through each vertex along the face normal. Edge rays cannot see a
  /// triangle lying strictly inside a coplanar one; the probes can.
  bool use_vertex_probes = true;
  unsigned threads = 0;
};

/// Originals at ids [0, T), auxiliaries at [T, 4T) when requested.
inline PrimitiveSoup triangle_soup(const TriangleFrame& frame, bool with_auxiliaries) {
  std::vector<Triangle> tris = frame.originals;
  if (with_auxiliaries) {
    if (frame.auxiliaries.size() != 3 * frame.originals.size())
      throw InvalidParams("frame has no auxiliary triangles; call make_auxiliaries first");
    tris.insert(tris.end(), frame.auxiliaries.begin(), frame.auxiliaries.end());
  }
  return PrimitiveSoup::from_triangles(std::move(tris));
}

template <CollisionSink Sink>
LaunchStats launch_triangle_rays(const Bvh& bvh, const TriangleFrame& frame, Sink& sink,
                                 const TriangleDetectOptions& options = {}) {
  const auto tris = bvh.soup().triangles();
  const std::size_t n = frame.originals.size();
  if (tris.size() < n) throw TopologyMismatch("BVH holds fewer triangles than the frame");

  LaunchStats stats;
  stats.rays = (options.use_vertex_probes ? 6 : 3) * n;
  stats.broad_phase_hits = detail::launch_all(n, options.threads, [&](std::size_t s,
                                                                      std::uint64_t& hits) {
    const Triangle& source = frame.originals[s];
    const Face& source_face = frame.faces[s];
    const auto on_hit = [&](const Ray& ray, HitRecord& hit) {
      const Triangle& target = tris[hit.primitive_id];
      if (target.source_id == s) return;
      if (options.adjacency == AdjacencyFilter::SharedVertex &&
          share_vertex(source_face, frame.faces[target.source_id]))
        return;
      ++hits;
      if (target.kind != TriangleKind::Original) {
        const auto [m0, m1] = auxiliary_median(target);
        const double tol = kMedianToleranceScale * length(m1 - m0);
        if (!point_on_segment(ray.at(hit.t), m0, m1, tol)) return;
      }
      sink.mark(static_cast<std::uint32_t>(s), target.source_id);
    };

    const std::array<Vec3, 3> v{source.a, source.b, source.c};
    for (int e = 0; e < 3; ++e) {
      const Vec3 edge = v[(e + 1) % 3] - v[e];
      const double len = length(edge);
      const Ray ray{v[e], edge / len, 0.0, len, 3 * s + static_cast<std::uint64_t>(e)};
      bvh.traverse(ray, [&](HitRecord& hit) { on_hit(ray, hit); });
    }
    if (options.use_vertex_probes) {
      const double reach = kVertexProbeScale * source.longest_edge();
      for (int k = 0; k < 3; ++k) {
        const Ray ray{v[k] - source.normal * reach, source.normal, 0.0, 2.0 * reach,
                      3 * n + 3 * s + static_cast<std::uint64_t>(k)};
        bvh.traverse(ray, [&](HitRecord& hit) { on_hit(ray, hit); });
      }
    }
  });
  return stats;
}

template <CollisionSink Sink>
LaunchStats detect_triangles(const TriangleFrame& frame, Sink& sink,
                             const TriangleDetectOptions& options = {}) {
  if (frame.originals.empty()) return {};
  const Bvh bvh = Bvh::build(triangle_soup(frame, options.use_auxiliaries));
  return launch_triangle_rays(bvh, frame, sink, options);
}

inline CollisionSet detect_triangles(const TriangleFrame& frame,
                                     const TriangleDetectOptions& options = {}) {
  CollisionSet set(static_cast<std::uint32_t>(frame.originals.size()));
  detect_triangles(frame, set, options);
  return set;
}

enum class BvhUpdate { Refit, Rebuild };

struct FrameTimings {
  double aux_ms = 0.0;
  double build_ms = 0.0;   // first frame only
  double update_ms = 0.0;  // refit or rebuild, later frames
  double cd_ms = 0.0;
  LaunchStats stats;
};

/// Runs reduction 4 across frames of one sequence, keeping the BVH alive between
/// frames and either refitting or rebuilding it.
class TriangleSequenceDetector {
 public:
  TriangleSequenceDetector(BvhUpdate update, TriangleDetectOptions options,
                           std::optional<double> epsilon = std::nullopt)
      : update_(update), options_(options), epsilon_(epsilon) {}

  CollisionSet detect(TriangleFrame& frame, FrameTimings* timings = nullptr) {
    using Clock = std::chrono::steady_clock;
    const auto ms = [](Clock::duration d) {
      return std::chrono::duration<double, std::milli>(d).count();
    };
    FrameTimings local;
    auto t0 = Clock::now();
    if (options_.use_auxiliaries) make_auxiliaries(frame, epsilon_ ? *epsilon_ : default_epsilon(frame));
    auto t1 = Clock::now();
    local.aux_ms = ms(t1 - t0);

    PrimitiveSoup soup = triangle_soup(frame, options_.use_auxiliaries);
    if (!bvh_) {
      bvh_ = Bvh::build(std::move(soup));
      local.build_ms = ms(Clock::now() - t1);
    } else if (update_ == BvhUpdate::Refit) {
      bvh_->refit(std::move(soup));
      local.update_ms = ms(Clock::now() - t1);
    } else {
      bvh_->rebuild(std::move(soup));
      local.update_ms = ms(Clock::now() - t1);
    }

    CollisionSet set(static_cast<std::uint32_t>(frame.originals.size()));
    auto t2 = Clock::now();
    local.stats = launch_triangle_rays(*bvh_, frame, set, options_);
    local.cd_ms = ms(Clock::now() - t2);
    if (timings) *timings = local;
    return set;
  }

  const Bvh* bvh() const { return bvh_ ? &*bvh_ : nullptr; }

 private:
  BvhUpdate update_;
  TriangleDetectOptions options_;
  std::optional<double> epsilon_;
  std::optional<Bvh> bvh_;
};

}  // namespace mochi
