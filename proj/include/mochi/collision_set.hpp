// Copyright 2026 The Mochi Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <atomic>
#include <bit>
#include <cstddef>
#include <cstdint>
#include <cstdlib>
#include <mutex>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mochi/error.hpp"

namespace mochi {

using ObjectPair = std::pair<std::uint32_t, std::uint32_t>;

inline constexpr std::size_t kDefaultMemoryBudget = std::size_t{2} << 30;

/// Parses sizes such as "2147483648", "512M" or "2G". Returns 0 on malformed input.
inline std::size_t parse_byte_size(const std::string& text) {
  if (text.empty()) return 0;
  char* end = nullptr;
  const double value = std::strtod(text.c_str(), &end);
  if (end == text.c_str() || !(value > 0.0)) return 0;
  double scale = 1.0;
  const std::string suffix(end);
  if (suffix == "K" || suffix == "k" || suffix == "KiB") scale = 1024.0;
  else if (suffix == "M" || suffix == "m" || suffix == "MiB") scale = 1024.0 * 1024.0;
  else if (suffix == "G" || suffix == "g" || suffix == "GiB") scale = 1024.0 * 1024.0 * 1024.0;
  else if (!suffix.empty()) return 0;
  return static_cast<std::size_t>(value * scale);
}

/// Budget for pair bit arrays; MOCHI_MEM_BUDGET overrides the 2 GiB default.
inline std::size_t memory_budget() {
  if (const char* env = std::getenv("MOCHI_MEM_BUDGET")) {
    if (const std::size_t parsed = parse_byte_size(env)) return parsed;
  }
  return kDefaultMemoryBudget;
}

/// Set of unordered object pairs packed one bit per pair, eight pairs per byte.
/// Pair (i, j), i < j, lives at bit i*(2n-i-1)/2 + (j-i-1). mark() is safe to call
/// concurrently.
class CollisionSet {
 public:
  CollisionSet() = default;

  explicit CollisionSet(std::uint32_t n_objects, std::size_t budget_bytes = memory_budget())
      : n_(n_objects) {
    const std::size_t bytes = byte_size_for(n_objects);
    if (bytes > budget_bytes)
      throw MemoryBudgetExceeded("pair bit array for n=" + std::to_string(n_objects) + " needs " +
                                 std::to_string(bytes) + " bytes, budget is " +
                                 std::to_string(budget_bytes) + "; max feasible n is " +
                                 std::to_string(max_objects_for(budget_bytes)));
    bits_.assign(bytes, 0);
  }

  static constexpr std::uint64_t pair_count_for(std::uint64_t n) {
    return n < 2 ? 0 : n * (n - 1) / 2;
  }
  static constexpr std::size_t byte_size_for(std::uint64_t n) {
    return static_cast<std::size_t>((pair_count_for(n) + 7) / 8);
  }
  static std::uint32_t max_objects_for(std::size_t budget_bytes) {
    std::uint64_t lo = 0;
    std::uint64_t hi = 1ull << 32;
    while (hi - lo > 1) {
      const std::uint64_t mid = (lo + hi) / 2;
      (byte_size_for(mid) <= budget_bytes ? lo : hi) = mid;
    }
    return static_cast<std::uint32_t>(std::min<std::uint64_t>(lo, 0xffffffffu));
  }

  std::uint64_t bit_index(std::uint32_t i, std::uint32_t j) const {
    if (i == j) throw SelfPair("object " + std::to_string(i) + " paired with itself");
    if (i >= n_ || j >= n_)
      throw IndexOutOfRange("pair (" + std::to_string(i) + "," + std::to_string(j) +
                            ") outside n=" + std::to_string(n_));
    if (i > j) std::swap(i, j);
    const std::uint64_t a = i;
    return a * (2 * std::uint64_t{n_} - a - 1) / 2 + (j - a - 1);
  }

  void mark(std::uint32_t i, std::uint32_t j) {
    const std::uint64_t bit = bit_index(i, j);
    const auto mask = static_cast<std::uint8_t>(1u << (bit & 7));
    std::uint8_t& byte = bits_[bit >> 3];
    std::atomic_ref<std::uint8_t> ref(byte);
    if ((ref.load(std::memory_order_relaxed) & mask) == 0)
      ref.fetch_or(mask, std::memory_order_relaxed);
  }

  bool contains(std::uint32_t i, std::uint32_t j) const {
    if (i == j || i >= n_ || j >= n_) return false;
    const std::uint64_t bit = bit_index(i, j);
    return (bits_[bit >> 3] >> (bit & 7)) & 1u;
  }

  std::uint32_t n_objects() const { return n_; }
  std::size_t byte_size() const { return bits_.size(); }
  std::span<const std::uint8_t> bytes() const { return bits_; }

  std::uint64_t count() const {
    std::uint64_t total = 0;
    for (std::uint8_t b : bits_) total += static_cast<std::uint64_t>(std::popcount(b));
    return total;
  }

  /// Visits pairs (i < j) in ascending bit order.
  template <class F>
  void for_each_pair(F&& visit) const {
    std::uint64_t row_start = 0;
    std::uint32_t i = 0;
    for (std::size_t byte = 0; byte < bits_.size(); ++byte) {
      std::uint8_t b = bits_[byte];
      while (b != 0) {
        const int k = std::countr_zero(b);
        b = static_cast<std::uint8_t>(b & (b - 1));
        const std::uint64_t bit = byte * 8 + static_cast<std::uint64_t>(k);
        while (bit >= row_start + (n_ - i - 1)) {
          row_start += n_ - i - 1;
          ++i;
        }
        visit(i, static_cast<std::uint32_t>(i + 1 + (bit - row_start)));
      }
    }
  }

  std::vector<ObjectPair> pairs() const {
    std::vector<ObjectPair> out;
    for_each_pair([&](std::uint32_t i, std::uint32_t j) { out.emplace_back(i, j); });
    return out;
  }

  friend bool operator==(const CollisionSet& a, const CollisionSet& b) {
    return a.n_ == b.n_ && a.bits_ == b.bits_;
  }

 private:
  std::uint32_t n_ = 0;
  std::vector<std::uint8_t> bits_;
};

/// Pair store whose memory scales with the number of marks rather than n^2. Used when
/// a bit array over all pairs would not fit.
class SparsePairSet {
 public:
  explicit SparsePairSet(std::uint32_t n_objects) : n_(n_objects) {}

  void mark(std::uint32_t i, std::uint32_t j) {
    if (i == j) throw SelfPair("object " + std::to_string(i) + " paired with itself");
    if (i >= n_ || j >= n_) throw IndexOutOfRange("pair outside object range");
    if (i > j) std::swap(i, j);
    std::lock_guard lock(mutex_);
    keys_.push_back((std::uint64_t{i} << 32) | j);
    sorted_ = false;
  }

  std::uint64_t count() {
    normalize();
    return keys_.size();
  }

  std::vector<ObjectPair> pairs() {
    normalize();
    std::vector<ObjectPair> out;
    out.reserve(keys_.size());
    for (std::uint64_t k : keys_)
      out.emplace_back(static_cast<std::uint32_t>(k >> 32), static_cast<std::uint32_t>(k));
    return out;
  }

  std::uint32_t n_objects() const { return n_; }

 private:
  void normalize() {
    if (sorted_) return;
    std::sort(keys_.begin(), keys_.end());
    keys_.erase(std::unique(keys_.begin(), keys_.end()), keys_.end());
    sorted_ = true;
  }

  std::uint32_t n_;
  std::mutex mutex_;
  std::vector<std::uint64_t> keys_;
  bool sorted_ = true;
};

template <class Sink>
concept CollisionSink = requires(Sink& sink, std::uint32_t i, std::uint32_t j) {
  sink.mark(i, j);
};

}  // namespace mochi
