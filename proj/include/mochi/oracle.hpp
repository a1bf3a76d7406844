// Copyright 2026 The Mochi Authors
// SPDX-License-Identifier: Apache-2.0

// Brute-force references for acceptance. Nothing here calls into the reductions'
// narrow phases; the triangle-triangle and ellipsoid tests are separate derivations.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "mochi/collision_set.hpp"
#include "mochi/geometry.hpp"
#include "mochi/mesh.hpp"
#include "mochi/reductions.hpp"
#include "mochi/rt_kernel.hpp"

namespace mochi::oracle {

inline CollisionSet sphere_pairs_oracle(std::span<const Sphere> spheres) {
  const auto n = static_cast<std::uint32_t>(spheres.size());
  CollisionSet set(n);
  for (std::uint32_t i = 0; i < n; ++i) {
    for (std::uint32_t j = i + 1; j < n; ++j) {
      const Vec3 d = spheres[i].center - spheres[j].center;
      const double reach = spheres[i].radius + spheres[j].radius;
      if (d.x * d.x + d.y * d.y + d.z * d.z <= reach * reach) set.mark(i, j);
    }
  }
  return set;
}

/// Sorted ids of every primitive the ray hits, by linear scan.
inline std::vector<std::uint32_t> ray_all_primitives_oracle(const PrimitiveSoup& soup, const Ray& ray) {
  std::vector<std::uint32_t> ids;
  for (std::size_t i = 0; i < soup.size(); ++i) {
    const bool hit = soup.kind() == GeometryKind::Aabbs
                         ? ray_aabb_intersect(ray, soup.aabbs()[i]).has_value()
                         : ray_triangle_intersect(ray, soup.triangles()[i]).has_value();
    if (hit) ids.push_back(static_cast<std::uint32_t>(i));
  }
  return ids;
}

namespace detail {

struct Point2 {
  double x, y;
};

inline double orient2(const Point2& a, const Point2& b, const Point2& c) {
  return (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x);
}

inline bool on_segment2(const Point2& a, const Point2& b, const Point2& p) {
  return std::min(a.x, b.x) <= p.x && p.x <= std::max(a.x, b.x) && std::min(a.y, b.y) <= p.y &&
         p.y <= std::max(a.y, b.y);
}

inline int sign_with(double v, double tol) { return v > tol ? 1 : (v < -tol ? -1 : 0); }

inline bool segments_intersect2(const Point2& p1, const Point2& p2, const Point2& q1,
                                const Point2& q2, double tol) {
  const int d1 = sign_with(orient2(q1, q2, p1), tol);
  const int d2 = sign_with(orient2(q1, q2, p2), tol);
  const int d3 = sign_with(orient2(p1, p2, q1), tol);
  const int d4 = sign_with(orient2(p1, p2, q2), tol);
  if (d1 * d2 < 0 && d3 * d4 < 0) return true;
  if (d1 == 0 && on_segment2(q1, q2, p1)) return true;
  if (d2 == 0 && on_segment2(q1, q2, p2)) return true;
  if (d3 == 0 && on_segment2(p1, p2, q1)) return true;
  if (d4 == 0 && on_segment2(p1, p2, q2)) return true;
  return false;
}

inline bool point_in_triangle2(const Point2& p, const std::array<Point2, 3>& t, double tol) {
  const double s = orient2(t[0], t[1], t[2]) > 0 ? 1.0 : -1.0;
  for (int k = 0; k < 3; ++k)
    if (s * orient2(t[k], t[(k + 1) % 3], p) < -tol) return false;
  return true;
}

inline bool coplanar_overlap(const std::array<Vec3, 3>& t1, const std::array<Vec3, 3>& t2,
                             const Vec3& normal, double scale) {
  // Drop the dominant normal axis.
  const Vec3 an{std::abs(normal.x), std::abs(normal.y), std::abs(normal.z)};
  const int drop = (an.x >= an.y && an.x >= an.z) ? 0 : (an.y >= an.z ? 1 : 2);
  const int u = (drop + 1) % 3;
  const int v = (drop + 2) % 3;
  std::array<Point2, 3> a, b;
  for (int k = 0; k < 3; ++k) {
    a[k] = {t1[k][u], t1[k][v]};
    b[k] = {t2[k][u], t2[k][v]};
  }
  const double tol = 1e-12 * scale * scale;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      if (segments_intersect2(a[i], a[(i + 1) % 3], b[j], b[(j + 1) % 3], tol)) return true;
  return point_in_triangle2(a[0], b, tol) || point_in_triangle2(b[0], a, tol);
}

// Interval where triangle `t` (with signed distances `d` to the other plane) crosses
// that plane, projected on direction `axis`.
inline std::array<double, 2> plane_crossing_interval(const std::array<Vec3, 3>& t,
                                                     const std::array<double, 3>& d,
                                                     const Vec3& axis) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  const auto add = [&](const Vec3& p) {
    const double s = dot(p, axis);
    lo = std::min(lo, s);
    hi = std::max(hi, s);
  };
  for (int k = 0; k < 3; ++k) {
    if (d[k] == 0.0) add(t[k]);
    const int m = (k + 1) % 3;
    if ((d[k] > 0.0 && d[m] < 0.0) || (d[k] < 0.0 && d[m] > 0.0))
      add(t[k] + (t[m] - t[k]) * (d[k] / (d[k] - d[m])));
  }
  return {lo, hi};
}

}  // namespace detail

/// Exact triangle-triangle predicate; touching counts as intersecting. Planes are
/// treated as coplanar under the same relative tolerance the ray test uses.
inline bool tri_tri_oracle(const Triangle& first, const Triangle& second) {
  using namespace detail;
  if (is_degenerate(first.a, first.b, first.c) || is_degenerate(second.a, second.b, second.c))
    throw DegenerateTriangle("tri_tri_oracle requires non-degenerate triangles");
  const std::array<Vec3, 3> t1{first.a, first.b, first.c};
  const std::array<Vec3, 3> t2{second.a, second.b, second.c};
  const double scale = std::max(first.longest_edge(), second.longest_edge());
  const double tol = kCoplanarTolerance * scale;

  const Vec3 n1 = normalize(cross(t1[1] - t1[0], t1[2] - t1[0]));
  const Vec3 n2 = normalize(cross(t2[1] - t2[0], t2[2] - t2[0]));
  std::array<double, 3> d2, d1;
  for (int k = 0; k < 3; ++k) {
    d2[k] = dot(n1, t2[k] - t1[0]);
    d1[k] = dot(n2, t1[k] - t2[0]);
    if (std::abs(d2[k]) <= tol) d2[k] = 0.0;
    if (std::abs(d1[k]) <= tol) d1[k] = 0.0;
  }
  const auto same_side = [](const std::array<double, 3>& d) {
    return (d[0] > 0 && d[1] > 0 && d[2] > 0) || (d[0] < 0 && d[1] < 0 && d[2] < 0);
  };
  if (same_side(d2) || same_side(d1)) return false;

  if (d2[0] == 0.0 && d2[1] == 0.0 && d2[2] == 0.0) return coplanar_overlap(t1, t2, n1, scale);
  if (d1[0] == 0.0 && d1[1] == 0.0 && d1[2] == 0.0) return coplanar_overlap(t1, t2, n2, scale);

  const Vec3 line = cross(n1, n2);
  if (length(line) < kCoplanarTolerance) return coplanar_overlap(t1, t2, n1, scale);
  const auto i1 = plane_crossing_interval(t1, d1, line);
  const auto i2 = plane_crossing_interval(t2, d2, line);
  const double slack = 1e-12 * scale;
  return std::max(i1[0], i2[0]) <= std::min(i1[1], i2[1]) + slack;
}

/// All intersecting pairs of a frame's original triangles under an adjacency filter.
inline CollisionSet triangle_pairs_oracle(const TriangleFrame& frame, AdjacencyFilter filter) {
  const auto n = static_cast<std::uint32_t>(frame.originals.size());
  CollisionSet set(n);
  std::vector<Aabb> boxes(n);
  for (std::uint32_t i = 0; i < n; ++i) boxes[i] = frame.originals[i].bounds();
  for (std::uint32_t i = 0; i < n; ++i) {
    for (std::uint32_t j = i + 1; j < n; ++j) {
      if (!boxes[i].overlaps(boxes[j])) continue;
      if (filter == AdjacencyFilter::SharedVertex && share_vertex(frame.faces[i], frame.faces[j]))
        continue;
      if (tri_tri_oracle(frame.originals[i], frame.originals[j])) set.mark(i, j);
    }
  }
  return set;
}

/// Ellipsoid overlap by a route independent of the contact function: scale space so
/// the first ellipsoid is the unit ball, then compare the distance from the origin
/// to the second (still axis-aligned) ellipsoid against 1.
inline bool ellipsoid_overlap_oracle(const Ellipsoid& e1, const Ellipsoid& e2) {
  Vec3 y;  // origin relative to the scaled second center
  Vec3 axes;
  for (int k = 0; k < 3; ++k) {
    y[k] = -(e2.center[k] - e1.center[k]) / e1.semi_axes[k];
    axes[k] = e2.semi_axes[k] / e1.semi_axes[k];
  }
  double inside = 0.0;
  for (int k = 0; k < 3; ++k) inside += (y[k] / axes[k]) * (y[k] / axes[k]);
  if (inside <= 1.0) return true;

  // Closest point x_k = e_k^2 y_k / (t + e_k^2), with t > 0 the root of
  // sum (e_k y_k / (t + e_k^2))^2 = 1.
  const auto g = [&](double t) {
    double s = 0.0;
    for (int k = 0; k < 3; ++k) {
      const double q = axes[k] * y[k] / (t + axes[k] * axes[k]);
      s += q * q;
    }
    return s - 1.0;
  };
  double lo = 0.0;
  double hi = length(y) * std::max({axes.x, axes.y, axes.z}) + 1.0;
  while (g(hi) > 0.0) hi *= 2.0;
  for (int iter = 0; iter < 200; ++iter) {
    const double mid = 0.5 * (lo + hi);
    (g(mid) > 0.0 ? lo : hi) = mid;
  }
  const double t = 0.5 * (lo + hi);
  double dist2 = 0.0;
  for (int k = 0; k < 3; ++k) {
    const double x = axes[k] * axes[k] * y[k] / (t + axes[k] * axes[k]);
    dist2 += (y[k] - x) * (y[k] - x);
  }
  return dist2 <= 1.0;
}

inline CollisionSet ellipsoid_pairs_oracle(std::span<const Ellipsoid> ellipsoids) {
  const auto n = static_cast<std::uint32_t>(ellipsoids.size());
  CollisionSet set(n);
  for (std::uint32_t i = 0; i < n; ++i)
    for (std::uint32_t j = i + 1; j < n; ++j)
      if (ellipsoids[i].bounds().overlaps(ellipsoids[j].bounds()) &&
          ellipsoid_overlap_oracle(ellipsoids[i], ellipsoids[j]))
        set.mark(i, j);
  return set;
}

}  // namespace mochi::oracle
