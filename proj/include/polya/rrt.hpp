#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "polya/color.hpp"
#include "polya/error.hpp"
#include "polya/kernels.hpp"
#include "polya/random.hpp"
#include "polya/rational.hpp"
#include "polya/urn.hpp"

namespace polya {

/// Vertex -1 is the root and carries the phantom state Delta.
inline constexpr std::int64_t kRoot = -1;

/// Random recursive tree on {-1, 0, .., n-1} with the branching chain values
/// W_0..W_{n-1}; parents[k] is uniform on {-1, .., k-1}.
struct BranchingTrajectory {
  std::vector<std::int64_t> parents;
  std::vector<Color> values;
};

inline BranchingTrajectory simulate_branching(const AugmentedKernel& kernel, std::uint64_t n,
                                              RandomSource& rng) {
  BranchingTrajectory out;
  out.parents.reserve(n);
  out.values.reserve(n);
  for (std::uint64_t k = 0; k < n; ++k) {
    const auto parent = static_cast<std::int64_t>(rng.below(k + 1)) - 1;
    out.parents.push_back(parent);
    if (parent == kRoot) {
      out.values.push_back(sample_initial(kernel.init(), rng));
    } else {
      out.values.push_back(kernel_step(kernel.base(), out.values[static_cast<std::size_t>(parent)], rng));
    }
  }
  return out;
}

/// tau_n, one less than the number of edges between vertex n and the root.
struct TauSample {
  std::uint64_t n = 0;
  std::uint64_t tau = 0;
  std::vector<std::int64_t> path;  // n, j_1, .., -1 when recorded
};

/// Walks from vertex n to the root drawing each parent uniformly below the
/// current vertex; the tree itself is never stored. O(log n) expected.
inline TauSample sample_ancestor_path(std::uint64_t n, RandomSource& rng, bool record_path = true) {
  TauSample out;
  out.n = n;
  if (record_path) out.path.push_back(static_cast<std::int64_t>(n));
  std::uint64_t edges = 0;
  auto current = static_cast<std::int64_t>(n);
  while (current != kRoot) {
    current = static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(current) + 1)) - 1;
    ++edges;
    if (record_path) out.path.push_back(current);
  }
  out.tau = edges - 1;
  return out;
}

inline std::uint64_t sample_tau(std::uint64_t n, RandomSource& rng) {
  return sample_ancestor_path(n, rng, false).tau;
}

/// tau_n as a sum of independent Bernoulli(1/(j+2)), j = 0..n-1. O(n).
inline TauSample sample_tau_bernoulli(std::uint64_t n, RandomSource& rng) {
  TauSample out;
  out.n = n;
  for (std::uint64_t j = 0; j < n; ++j) {
    if (rng.below(j + 2) == 0) ++out.tau;
  }
  return out;
}

struct TauMoments {
  double mean = 0.0;
  double variance = 0.0;
};

namespace detail {

inline constexpr std::uint64_t kDirectSumLimit = 10'000'000;

/// sum_{k=2}^{m} 1/k and sum_{k=2}^{m} 1/k^2.
inline std::pair<double, double> reciprocal_sums(std::uint64_t m) {
  if (m < 2) return {0.0, 0.0};
  if (m <= kDirectSumLimit) {
    double s1 = 0.0, s2 = 0.0;
    for (std::uint64_t k = m; k >= 2; --k) {
      const double inv = 1.0 / static_cast<double>(k);
      s1 += inv;
      s2 += inv * inv;
    }
    return {s1, s2};
  }
  constexpr double euler_gamma = 0.57721566490153286061;
  constexpr double zeta2 = 1.64493406684822643647;
  const double x = static_cast<double>(m);
  const double x2 = x * x;
  const double harmonic = std::log(x) + euler_gamma + 0.5 / x - 1.0 / (12.0 * x2) + 1.0 / (120.0 * x2 * x2);
  const double tail2 = 1.0 / x - 0.5 / x2 + 1.0 / (6.0 * x2 * x) - 1.0 / (30.0 * x2 * x2 * x);
  return {harmonic - 1.0, zeta2 - 1.0 - tail2};
}

}  // namespace detail

/// E[tau_n] = sum_{j<n} 1/(j+2) and var(tau_n) = sum_{j<n} (1/(j+2))(1 - 1/(j+2)).
/// Summed directly up to n = 1e7, Euler-Maclaurin beyond.
inline TauMoments tau_mean_var(std::uint64_t n) {
  const auto [s1, s2] = detail::reciprocal_sums(n + 1);
  return {s1, s1 - s2};
}

/// One draw with the law of Z_n: tau_n from an ancestor path, then X_0 ~ U_0
/// followed by tau_n kernel steps. Marginal only; successive calls are independent.
inline Color marginal_color(const AugmentedKernel& kernel, std::uint64_t n, RandomSource& rng) {
  const std::uint64_t tau = sample_tau(n, rng);
  Color x = sample_initial(kernel.init(), rng);
  for (std::uint64_t i = 0; i < tau; ++i) x = kernel_step(kernel.base(), x, rng);
  return x;
}

/// Exact law of (W_0, .., W_{n-1}): every parent vector has weight 1/n!, times
/// the exact transition products of R-hat along it.
inline ExactLaw rrt_exact_law(const AugmentedKernel& kernel, std::size_t n) {
  if (n > 5) throw TooLarge("exact branching law is limited to n <= 5");
  if (!has_finite_rows(kernel.base())) throw InfiniteSupport("exact laws need finitely supported rows");
  detail::RationalRows rows(kernel.base());
  const auto u0 = detail::rational_initial(kernel.base(), kernel.init());

  ExactLaw law;
  std::size_t leaves = 0;
  std::vector<Color> values;
  std::function<void(const Rational&)> recurse = [&](const Rational& prob) {
    const std::size_t k = values.size();
    if (k == n) {
      if (++leaves > kExactOutcomeBudget) throw TooLarge("more than 1e6 branching outcomes");
      law.outcomes[values] += prob;
      return;
    }
    const Rational parent_prob(1, static_cast<long long>(k + 1));
    for (std::int64_t parent = kRoot; parent < static_cast<std::int64_t>(k); ++parent) {
      const auto& row = parent == kRoot ? u0 : rows(values[static_cast<std::size_t>(parent)]);
      for (const auto& [color, r] : row) {
        values.push_back(color);
        recurse(prob * parent_prob * r);
        values.pop_back();
      }
    }
  };
  recurse(Rational(1));
  return law;
}

}  // namespace polya
