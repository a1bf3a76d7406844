// Copyright 2026 The Mochi Authors
// SPDX-License-Identifier: Apache-2.0

// Software stand-in for a ray tracing core. The only things a client can do with an
// acceleration structure are build it, refit it, rebuild it and trace rays through it
// with an any-hit callback. Tree nodes are never exposed.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "mochi/error.hpp"
#include "mochi/geometry.hpp"

namespace mochi {

enum class GeometryKind { Aabbs, Triangles };

/// Homogeneous list of primitives; primitive ids are list positions.
class PrimitiveSoup {
 public:
  static PrimitiveSoup from_aabbs(std::vector<Aabb> boxes) {
    for (const Aabb& b : boxes)
      if (!b.valid() || !is_finite(b.min) || !is_finite(b.max))
        throw InvalidScene("soup contains an invalid AABB");
    PrimitiveSoup soup;
    soup.prims_ = std::move(boxes);
    return soup;
  }
  static PrimitiveSoup from_triangles(std::vector<Triangle> tris) {
    PrimitiveSoup soup;
    soup.prims_ = std::move(tris);
    return soup;
  }

  GeometryKind kind() const {
    return std::holds_alternative<std::vector<Aabb>>(prims_) ? GeometryKind::Aabbs
                                                             : GeometryKind::Triangles;
  }
  std::size_t size() const {
    return std::visit([](const auto& v) { return v.size(); }, prims_);
  }
  bool empty() const { return size() == 0; }

  std::span<const Aabb> aabbs() const { return std::get<std::vector<Aabb>>(prims_); }
  std::span<const Triangle> triangles() const { return std::get<std::vector<Triangle>>(prims_); }

  /// Triangle boxes carry the barycentric slack of the hit test, so a node never
  /// culls a hit the primitive test would accept.
  Aabb bounds(std::size_t i) const {
    if (kind() == GeometryKind::Aabbs) return aabbs()[i];
    const Triangle& t = triangles()[i];
    Aabb box = t.bounds();
    const Vec3 slack = Vec3{1, 1, 1} * (2.0 * kBarycentricTolerance * t.longest_edge());
    box.min -= slack;
    box.max += slack;
    return box;
  }

 private:
  PrimitiveSoup() = default;
  std::variant<std::vector<Aabb>, std::vector<Triangle>> prims_;
};

/// Tests one primitive of a soup against a ray, returning the hit parameter.
inline std::optional<double> intersect_primitive(const PrimitiveSoup& soup, std::size_t i,
                                                 const Ray& ray) {
  if (soup.kind() == GeometryKind::Aabbs) return ray_aabb_intersect(ray, soup.aabbs()[i]);
  if (auto hit = ray_triangle_intersect(ray, soup.triangles()[i])) return hit->t;
  return std::nullopt;
}

struct HitRecord {
  std::uint64_t ray_id = 0;
  std::uint32_t primitive_id = 0;
  double t = 0.0;
  /// Cleared by the callback to stop traversal of this ray.
  bool continue_traversal = true;
};

struct BuildOptions {
  int bins = 16;
  std::size_t max_leaf_size = 4;
};

namespace detail {
struct BvhAccess;
}

class Bvh {
 public:
  static constexpr std::size_t kStackSize = 64;
  // Past this depth splits fall back to object median, which bounds total depth
  // well under the traversal stack limit for any realistic primitive count.
  static constexpr int kMedianForceDepth = 32;

  static Bvh build(PrimitiveSoup soup, const BuildOptions& options = {}) {
    if (soup.empty()) throw EmptySoup("cannot build a BVH over zero primitives");
    Bvh bvh(std::move(soup), options);
    bvh.construct();
    return bvh;
  }

  /// Fresh topology over the new primitives.
  void rebuild(PrimitiveSoup soup) {
    if (soup.empty()) throw EmptySoup("cannot rebuild a BVH over zero primitives");
    if (soup.kind() != soup_.kind())
      throw TopologyMismatch("rebuild must keep the geometry kind");
    soup_ = std::move(soup);
    construct();
    ++epoch_;
  }

  /// Recomputes node bounds bottom-up for moved primitives; topology is untouched.
  void refit(PrimitiveSoup soup) {
    if (soup.kind() != soup_.kind() || soup.size() != soup_.size())
      throw TopologyMismatch("refit requires the same primitive count and kind (" +
                             std::to_string(soup.size()) + " vs " +
                             std::to_string(soup_.size()) + ")");
    soup_ = std::move(soup);
    for (std::size_t i = nodes_.size(); i-- > 0;) {
      Node& node = nodes_[i];
      if (node.count > 0) {
        Aabb box;
        for (std::uint32_t k = 0; k < node.count; ++k)
          box.expand(soup_.bounds(indices_[node.first_or_right + k]));
        node.bounds = box;
      } else {
        node.bounds = nodes_[i + 1].bounds;
        node.bounds.expand(nodes_[node.first_or_right].bounds);
      }
    }
    update_pad();
  }

  /// Calls on_any_hit(HitRecord&) once per intersected primitive, in no particular
  /// order. Returns the number of hits reported.
  template <class OnAnyHit>
  std::size_t traverse(const Ray& ray, OnAnyHit&& on_any_hit) const {
    std::array<std::uint32_t, kStackSize> stack;
    std::size_t top = 0;
    stack[top++] = 0;
    std::size_t reported = 0;
    while (top > 0) {
      const Node& node = nodes_[stack[--top]];
      Aabb box = node.bounds;
      box.min -= Vec3{pad_, pad_, pad_};
      box.max += Vec3{pad_, pad_, pad_};
      if (!ray_aabb_intersect(ray, box)) continue;
      if (node.count > 0) {
        for (std::uint32_t k = 0; k < node.count; ++k) {
          const std::uint32_t prim = indices_[node.first_or_right + k];
          const auto t = intersect_primitive(soup_, prim, ray);
          if (!t) continue;
          HitRecord record{ray.ray_id, prim, *t, true};
          on_any_hit(record);
          ++reported;
          if (!record.continue_traversal) return reported;
        }
        continue;
      }
      if (top + 2 > kStackSize)
        throw TraversalStackOverflow("traversal stack exhausted at " +
                                     std::to_string(kStackSize) + " entries");
      const auto self = static_cast<std::uint32_t>(&node - nodes_.data());
      stack[top++] = node.first_or_right;
      stack[top++] = self + 1;
    }
    return reported;
  }

  GeometryKind kind() const { return soup_.kind(); }
  std::size_t primitive_count() const { return soup_.size(); }
  std::uint64_t topology_epoch() const { return epoch_; }
  Aabb root_bounds() const { return nodes_.front().bounds; }
  const PrimitiveSoup& soup() const { return soup_; }

 private:
  friend struct detail::BvhAccess;

  struct Node {
    Aabb bounds;
    std::uint32_t first_or_right = 0;  // leaf: first index; internal: right child
    std::uint32_t count = 0;           // 0 for internal nodes
  };

  struct Ref {
    Aabb box;
    Vec3 centroid;
    std::uint32_t id;
  };

  Bvh(PrimitiveSoup soup, const BuildOptions& options)
      : soup_(std::move(soup)), options_(options) {}

  void construct() {
    const std::size_t n = soup_.size();
    std::vector<Ref> refs(n);
    for (std::size_t i = 0; i < n; ++i) {
      const Aabb box = soup_.bounds(i);
      refs[i] = {box, box.centroid(), static_cast<std::uint32_t>(i)};
    }
    nodes_.clear();
    nodes_.reserve(2 * n / std::max<std::size_t>(options_.max_leaf_size, 1) + 1);
    indices_.clear();
    indices_.reserve(n);
    build_node(refs, 0, n, 0);
    update_pad();
  }

  // Rounding in the slab test can put a hit at the very end of a ray, or on a box face,
  // just outside the computed interval. Node tests use boxes grown by this margin.
  void update_pad() {
    const Aabb& root = nodes_.front().bounds;
    double scale = 0.0;
    for (int a = 0; a < 3; ++a)
      scale = std::max({scale, std::abs(root.min[a]), std::abs(root.max[a]), root.max[a] - root.min[a]});
    pad_ = 64.0 * std::numeric_limits<double>::epsilon() * scale;
  }

  std::uint32_t build_node(std::vector<Ref>& refs, std::size_t begin, std::size_t end, int depth) {
    const auto index = static_cast<std::uint32_t>(nodes_.size());
    nodes_.emplace_back();
    Aabb bounds;
    Aabb centroid_bounds;
    for (std::size_t i = begin; i < end; ++i) {
      bounds.expand(refs[i].box);
      centroid_bounds.expand(refs[i].centroid);
    }
    nodes_[index].bounds = bounds;

    const std::size_t count = end - begin;
    if (count <= options_.max_leaf_size) {
      nodes_[index].first_or_right = static_cast<std::uint32_t>(indices_.size());
      nodes_[index].count = static_cast<std::uint32_t>(count);
      for (std::size_t i = begin; i < end; ++i) indices_.push_back(refs[i].id);
      return index;
    }

    std::size_t mid = 0;
    if (depth < kMedianForceDepth) mid = sah_partition(refs, begin, end, centroid_bounds);
    if (mid == 0) mid = median_partition(refs, begin, end, centroid_bounds);

    build_node(refs, begin, mid, depth + 1);
    const std::uint32_t right = build_node(refs, mid, end, depth + 1);
    nodes_[index].first_or_right = right;
    return index;
  }

  // Binned SAH. Returns the partition point, or 0 when every candidate split leaves
  // one side empty.
  std::size_t sah_partition(std::vector<Ref>& refs, std::size_t begin, std::size_t end,
                            const Aabb& centroid_bounds) const {
    const int bins = std::max(options_.bins, 2);
    double best_cost = std::numeric_limits<double>::infinity();
    int best_axis = -1;
    int best_split = -1;
    std::vector<Aabb> bin_box(bins);
    std::vector<std::size_t> bin_count(bins);
    std::vector<double> right_area(bins);
    std::vector<std::size_t> right_count(bins);

    for (int axis = 0; axis < 3; ++axis) {
      const double lo = centroid_bounds.min[axis];
      const double extent = centroid_bounds.max[axis] - lo;
      if (!(extent > 0.0)) continue;
      std::fill(bin_box.begin(), bin_box.end(), Aabb{});
      std::fill(bin_count.begin(), bin_count.end(), 0);
      const double scale = bins / extent;
      for (std::size_t i = begin; i < end; ++i) {
        const int b = bin_of(refs[i].centroid[axis], lo, scale, bins);
        bin_box[b].expand(refs[i].box);
        ++bin_count[b];
      }
      Aabb acc;
      std::size_t cnt = 0;
      for (int b = bins - 1; b > 0; --b) {
        acc.expand(bin_box[b]);
        cnt += bin_count[b];
        right_area[b] = acc.surface_area();
        right_count[b] = cnt;
      }
      acc = Aabb{};
      cnt = 0;
      for (int split = 1; split < bins; ++split) {
        acc.expand(bin_box[split - 1]);
        cnt += bin_count[split - 1];
        if (cnt == 0 || right_count[split] == 0) continue;
        const double cost = acc.surface_area() * static_cast<double>(cnt) +
                            right_area[split] * static_cast<double>(right_count[split]);
        if (cost < best_cost) {
          best_cost = cost;
          best_axis = axis;
          best_split = split;
        }
      }
    }
    if (best_axis < 0) return 0;

    const double lo = centroid_bounds.min[best_axis];
    const double scale = bins / (centroid_bounds.max[best_axis] - lo);
    auto it = std::partition(refs.begin() + static_cast<std::ptrdiff_t>(begin),
                             refs.begin() + static_cast<std::ptrdiff_t>(end), [&](const Ref& r) {
                               return bin_of(r.centroid[best_axis], lo, scale, bins) < best_split;
                             });
    const auto mid = static_cast<std::size_t>(it - refs.begin());
    return (mid == begin || mid == end) ? 0 : mid;
  }

  static std::size_t median_partition(std::vector<Ref>& refs, std::size_t begin, std::size_t end,
                                      const Aabb& centroid_bounds) {
    const int axis = centroid_bounds.longest_axis();
    const std::size_t mid = begin + (end - begin) / 2;
    std::nth_element(refs.begin() + static_cast<std::ptrdiff_t>(begin),
                     refs.begin() + static_cast<std::ptrdiff_t>(mid),
                     refs.begin() + static_cast<std::ptrdiff_t>(end),
                     [axis](const Ref& a, const Ref& b) {
                       return a.centroid[axis] < b.centroid[axis];
                     });
    return mid;
  }

  static int bin_of(double value, double lo, double scale, int bins) {
    const int b = static_cast<int>((value - lo) * scale);
    return std::clamp(b, 0, bins - 1);
  }

  PrimitiveSoup soup_;
  BuildOptions options_;
  std::vector<Node> nodes_;
  std::vector<std::uint32_t> indices_;
  std::uint64_t epoch_ = 0;
  double pad_ = 0.0;
};

}  // namespace mochi
