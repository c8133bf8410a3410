#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <vector>

#include <gtest/gtest.h>

#include "polya/polya.hpp"

namespace polya::testing {

/// |hits/trials - p| within 3 binomial standard errors.
inline ::testing::AssertionResult within_3sigma(std::uint64_t hits, std::uint64_t trials, double p) {
  const double freq = static_cast<double>(hits) / static_cast<double>(trials);
  const double se = std::sqrt(p * (1.0 - p) / static_cast<double>(trials));
  if (std::abs(freq - p) <= 3.0 * se) return ::testing::AssertionSuccess();
  return ::testing::AssertionFailure() << "frequency " << freq << " vs p=" << p << " (3se=" << 3.0 * se << ")";
}

/// Chi-square GOF of observed colors against a finite law given as (color, probability).
inline TestReport gof(const std::map<Color, std::uint64_t>& counts, const Row& law, std::uint64_t total,
                      double significance = 1e-3) {
  std::vector<double> observed, expected;
  std::uint64_t matched = 0;
  for (const auto& [c, p] : law) {
    auto it = counts.find(c);
    const std::uint64_t k = it == counts.end() ? 0 : it->second;
    matched += k;
    observed.push_back(static_cast<double>(k));
    expected.push_back(p * static_cast<double>(total));
  }
  // mass outside the support makes the test fail outright
  if (matched != total) return make_report("gof_support", 1.0, 0.0, total);
  return chi_square_gof(observed, expected, significance);
}

}  // namespace polya::testing
