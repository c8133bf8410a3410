#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <unordered_map>
#include <utility>
#include <vector>

#include "polya/color.hpp"
#include "polya/error.hpp"
#include "polya/kernels.hpp"
#include "polya/random.hpp"
#include "polya/rational.hpp"
#include "polya/sampler.hpp"

namespace polya {

/// Explicit-weight urn U_n over a kernel with finitely supported rows.
///
/// Colors get slots in first-appearance order. The row R(c, .) of a slot is
/// resolved to (slot, weight) pairs the first time that color is drawn and
/// cached, so a draw costs one sampler lookup plus one update per row entry.
class UrnState {
 public:
  UrnState(KernelSpec kernel, const InitialConfig& init) : kernel_(validated(std::move(kernel))) {
    if (!has_finite_rows(kernel_)) {
      throw InfiniteSupport("kernel rows have infinite support; use the branching or marginal sampler");
    }
    validate_initial(kernel_, init);
    for (const auto& [color, w] : init.atoms) sampler_.add(slot_of(color), w);
  }

  const KernelSpec& kernel() const noexcept { return kernel_; }
  std::uint64_t draws() const noexcept { return n_; }
  double total() const noexcept { return sampler_.total(); }
  std::size_t color_count() const noexcept { return colors_.size(); }
  const Color& color(std::size_t slot) const { return colors_.at(slot); }
  double weight(std::size_t slot) const { return sampler_.weight(slot); }
  const WeightedIndex& sampler() const noexcept { return sampler_; }

  /// Current weight of `c` (0 if never seen).
  double weight_of(const Color& c) const {
    auto it = index_.find(c);
    return it == index_.end() ? 0.0 : sampler_.weight(it->second);
  }

  /// Draws Z_n with probability U_n(.)/(n+1), then adds R(Z_n, .).
  std::size_t draw_slot(RandomSource& rng) {
    const std::size_t slot = sampler_.sample(rng);
    for (const auto& [target, w] : row_of(slot)) sampler_.add(target, w);
    ++n_;
    return slot;
  }

  const Color& draw(RandomSource& rng) { return colors_[draw_slot(rng)]; }

  /// U_n / (n + 1) as an explicit finite measure, in slot order, zero weights omitted.
  Row configuration() const {
    Row out;
    const double mass = static_cast<double>(n_ + 1);
    for (std::size_t s = 0; s < colors_.size(); ++s) {
      if (sampler_.weight(s) > 0.0) out.emplace_back(colors_[s], sampler_.weight(s) / mass);
    }
    return out;
  }

 private:
  std::size_t slot_of(const Color& c) {
    auto [it, inserted] = index_.try_emplace(c, colors_.size());
    if (inserted) {
      colors_.push_back(c);
      rows_.emplace_back();
      sampler_.add(it->second, 0.0);
    }
    return it->second;
  }

  const std::vector<std::pair<std::size_t, double>>& row_of(std::size_t slot) {
    if (!rows_[slot]) {
      std::vector<std::pair<std::size_t, double>> resolved;
      const Row row = *row_support(kernel_, colors_[slot]);
      resolved.reserve(row.size());
      for (const auto& [color, w] : row) resolved.emplace_back(slot_of(color), w);
      rows_[slot] = std::move(resolved);
    }
    return *rows_[slot];
  }

  KernelSpec kernel_;
  std::vector<Color> colors_;
  std::unordered_map<Color, std::size_t, ColorHash> index_;
  std::vector<std::optional<std::vector<std::pair<std::size_t, double>>>> rows_;
  WeightedIndex sampler_;
  std::uint64_t n_ = 0;
};

inline UrnState urn_init(KernelSpec kernel, const InitialConfig& init) {
  return UrnState(std::move(kernel), init);
}

inline Color urn_draw(UrnState& state, RandomSource& rng) { return state.draw(rng); }

struct RecordFlags {
  bool history = true;
  bool configuration = true;
};

struct Trajectory {
  std::uint64_t n = 0;
  std::vector<Color> history;  // Z_0 .. Z_{n-1}
  Row configuration;           // U_n / (n + 1)
};

inline Trajectory urn_simulate(KernelSpec kernel, const InitialConfig& init, std::uint64_t n,
                               RandomSource& rng, RecordFlags record = {}) {
  UrnState state(std::move(kernel), init);
  Trajectory out;
  out.n = n;
  if (record.history) out.history.reserve(n);
  for (std::uint64_t k = 0; k < n; ++k) {
    const std::size_t slot = state.draw_slot(rng);
    if (record.history) out.history.push_back(state.color(slot));
  }
  if (record.configuration) out.configuration = state.configuration();
  return out;
}

/// Runs n draws and returns only the last color Z_{n-1}; n >= 1.
inline Color urn_last_color(const KernelSpec& kernel, const InitialConfig& init, std::uint64_t n,
                            RandomSource& rng) {
  UrnState state(kernel, init);
  std::size_t slot = 0;
  for (std::uint64_t k = 0; k < n; ++k) slot = state.draw_slot(rng);
  return state.color(slot);
}

inline constexpr std::size_t kExactOutcomeBudget = 1'000'000;

namespace detail {

using RationalRow = std::vector<std::pair<Color, Rational>>;

class RationalRows {
 public:
  explicit RationalRows(const KernelSpec& kernel) : kernel_(kernel) {}

  const RationalRow& operator()(const Color& c) {
    auto it = cache_.find(c);
    if (it != cache_.end()) return it->second;
    auto row = row_support(kernel_, c);
    if (!row) throw InfiniteSupport("exact laws need finitely supported rows");
    RationalRow out;
    for (const auto& [color, w] : *row) out.emplace_back(color, to_rational(w));
    return cache_.emplace(c, std::move(out)).first->second;
  }

 private:
  const KernelSpec& kernel_;
  std::map<Color, RationalRow> cache_;
};

inline RationalRow rational_initial(const KernelSpec& kernel, const InitialConfig& init) {
  validate_initial(kernel, init);
  std::map<Color, Rational> merged;
  for (const auto& [color, w] : init.atoms) merged[color] += to_rational(w);
  return {merged.begin(), merged.end()};
}

}  // namespace detail

/// Exact law of (Z_0, ..., Z_{n-1}) by enumerating every draw history with
/// rational arithmetic. Throws TooLarge past n = 6 or kExactOutcomeBudget histories.
inline ExactLaw urn_exact_law(const KernelSpec& kernel_in, const InitialConfig& init, std::size_t n) {
  if (n > 6) throw TooLarge("exact urn law is limited to n <= 6");
  const KernelSpec kernel = validated(kernel_in);
  if (!has_finite_rows(kernel)) throw InfiniteSupport("exact laws need finitely supported rows");
  detail::RationalRows rows(kernel);
  const auto u0 = detail::rational_initial(kernel, init);

  ExactLaw law;
  std::size_t leaves = 0;
  std::vector<Color> history;
  std::function<void(std::map<Color, Rational>&, const Rational&)> recurse =
      [&](std::map<Color, Rational>& urn, const Rational& prob) {
        const std::size_t k = history.size();
        if (k == n) {
          if (++leaves > kExactOutcomeBudget) throw TooLarge("more than 1e6 histories");
          law.outcomes[history] += prob;
          return;
        }
        const Rational mass(static_cast<long long>(k + 1));
        for (const auto& [color, w] : urn) {
          if (w == 0) continue;
          auto next = urn;
          for (const auto& [target, r] : rows(color)) next[target] += r;
          history.push_back(color);
          recurse(next, prob * w / mass);
          history.pop_back();
        }
      };
  std::map<Color, Rational> urn(u0.begin(), u0.end());
  recurse(urn, Rational(1));
  return law;
}

}  // namespace polya
