#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <vector>

#include "polya/error.hpp"
#include "polya/random.hpp"

namespace polya {

/// Append-only dynamic discrete distribution over slots 0..size()-1.
///
/// Weights live in a flat array grouped into blocks of kBlock slots; a binary
/// indexed tree over the block sums answers prefix queries, and a lookup scans
/// one contiguous block. Point updates and inverse-CDF lookups are
/// O(log capacity), and the tree stays small enough to remain cache-resident.
/// Every max(kDriftCheckInterval, size()) operations the tree total is
/// compared with a fresh summation and rebuilt if they disagree by more than
/// kDriftTolerance (relative); the O(size) check is amortized O(1).
class WeightedIndex {
 public:
  static constexpr std::uint64_t kDriftCheckInterval = std::uint64_t{1} << 16;
  static constexpr double kDriftTolerance = 1e-9;
  static constexpr std::size_t kBlock = 32;

  WeightedIndex() = default;
  explicit WeightedIndex(std::size_t capacity) { grow_to(capacity); }

  std::size_t size() const noexcept { return weights_.size(); }
  std::size_t capacity() const noexcept { return capacity_; }
  double total() const noexcept { return total_; }
  double weight(std::size_t slot) const { return weights_.at(slot); }
  const std::vector<double>& weights() const noexcept { return weights_; }
  std::uint64_t rebuilds() const noexcept { return rebuilds_; }

  /// Adds w >= 0 to `slot`, extending the structure if slot >= size().
  void add(std::size_t slot, double w) {
    if (!(w >= 0.0)) throw NegativeWeight("weights must be non-negative");
    if (slot >= capacity_) grow_to(slot + 1);
    if (slot >= weights_.size()) weights_.resize(slot + 1, 0.0);
    weights_[slot] += w;
    for (std::size_t i = slot / kBlock + 1; i <= blocks_; i += i & (~i + 1)) tree_[i] += w;
    total_ += w;
    tick();
  }

  /// Appends a new slot with weight w and returns its index.
  std::size_t push_back(double w) {
    const std::size_t slot = weights_.size();
    add(slot, w);
    return slot;
  }

  /// Sum of weights of slots [0, count).
  double prefix_sum(std::size_t count) const noexcept {
    if (count > weights_.size()) count = weights_.size();
    const std::size_t full = count / kBlock;
    double s = 0.0;
    for (std::size_t i = full; i > 0; i -= i & (~i + 1)) s += tree_[i];
    for (std::size_t i = full * kBlock; i < count; ++i) s += weights_[i];
    return s;
  }

  /// Smallest slot i with prefix_sum(i + 1) > u, for u in [0, total()).
  /// Never returns a zero-weight slot while total() > 0.
  std::size_t locate(double u) const noexcept {
    std::size_t block = 0;
    for (std::size_t step = top_; step > 0; step >>= 1) {
      const std::size_t next = block + step;
      if (next <= blocks_ && tree_[next] <= u) {
        block = next;
        u -= tree_[next];
      }
    }
    const std::size_t begin = block * kBlock;
    const std::size_t end = begin + kBlock < weights_.size() ? begin + kBlock : weights_.size();
    for (std::size_t i = begin; i < end; ++i) {
      if (weights_[i] > u) return i;
      u -= weights_[i];
    }
    return nearest_positive(end == 0 ? 0 : end - 1);
  }

  std::size_t sample(RandomSource& rng) const {
    if (!(total_ > 0.0)) throw EmptyStructure("cannot sample from zero total weight");
    return locate(rng.uniform01() * total_);
  }

  void reserve(std::size_t capacity) {
    if (capacity > capacity_) grow_to(capacity);
    weights_.reserve(capacity);
  }

 private:
  std::size_t nearest_positive(std::size_t pos) const noexcept {
    if (pos >= weights_.size()) pos = weights_.empty() ? 0 : weights_.size() - 1;
    for (std::size_t i = pos + 1; i-- > 0;) {
      if (weights_[i] > 0.0) return i;
    }
    for (std::size_t i = pos + 1; i < weights_.size(); ++i) {
      if (weights_[i] > 0.0) return i;
    }
    return pos;
  }

  void grow_to(std::size_t needed) {
    std::size_t cap = capacity_ == 0 ? 1 : capacity_;
    while (cap < needed) cap <<= 1;
    capacity_ = cap;
    blocks_ = (cap + kBlock - 1) / kBlock;
    top_ = 1;
    while (top_ * 2 <= blocks_) top_ <<= 1;
    rebuild();
  }

  void rebuild() {
    tree_.assign(blocks_ + 1, 0.0);
    for (std::size_t i = 0; i < weights_.size(); ++i) tree_[i / kBlock + 1] += weights_[i];
    for (std::size_t i = 1; i <= blocks_; ++i) {
      const std::size_t parent = i + (i & (~i + 1));
      if (parent <= blocks_) tree_[parent] += tree_[i];
    }
    total_ = std::accumulate(weights_.begin(), weights_.end(), 0.0);
    ++rebuilds_;
  }

  void tick() {
    if (++ops_ < kDriftCheckInterval || ops_ < weights_.size()) return;
    ops_ = 0;
    const double fresh = std::accumulate(weights_.begin(), weights_.end(), 0.0);
    double tree_total = 0.0;
    for (std::size_t i = blocks_; i > 0; i -= i & (~i + 1)) tree_total += tree_[i];
    if (std::abs(tree_total - fresh) > kDriftTolerance * fresh ||
        std::abs(total_ - fresh) > kDriftTolerance * fresh) {
      rebuild();
    }
  }

  std::vector<double> weights_;
  std::vector<double> tree_{0.0};
  std::size_t capacity_ = 0;
  std::size_t blocks_ = 0;
  std::size_t top_ = 0;
  double total_ = 0.0;
  std::uint64_t ops_ = 0;
  std::uint64_t rebuilds_ = 0;
};

}  // namespace polya
