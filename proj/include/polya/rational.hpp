#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "polya/color.hpp"
#include "polya/error.hpp"

namespace polya {

using Rational = boost::multiprecision::cpp_rational;

/// Largest denominator accepted when reading a float weight as a rational.
inline constexpr std::int64_t kMaxDenominator = 1'000'000;

/// Recovers p/q (q <= kMaxDenominator) from a float weight by continued
/// fractions. Throws IrrationalWeights when no such fraction is within 1e-12.
inline Rational to_rational(double x) {
  if (!std::isfinite(x) || x < 0.0) throw IrrationalWeights("weight is not a finite non-negative number");
  std::int64_t p0 = 0, q0 = 1, p1 = 1, q1 = 0;
  double rest = x;
  for (int iter = 0; iter < 64; ++iter) {
    const double whole = std::floor(rest);
    if (whole > 1e15) break;
    const auto a = static_cast<std::int64_t>(whole);
    const std::int64_t p2 = a * p1 + p0;
    const std::int64_t q2 = a * q1 + q0;
    if (q2 > kMaxDenominator) break;
    p0 = p1; q0 = q1; p1 = p2; q1 = q2;
    if (std::abs(static_cast<double>(p1) / static_cast<double>(q1) - x) <= 1e-12 * std::max(1.0, x)) {
      return Rational(p1, q1);
    }
    const double frac = rest - whole;
    if (frac <= 0.0) break;
    rest = 1.0 / frac;
  }
  throw IrrationalWeights("weight " + std::to_string(x) + " has no small-denominator rational form");
}

/// Exact joint law of a color sequence.
struct ExactLaw {
  std::map<std::vector<Color>, Rational> outcomes;

  Rational total() const {
    Rational s = 0;
    for (const auto& [seq, p] : outcomes) s += p;
    return s;
  }

  /// Law of the color at position k.
  std::map<Color, Rational> marginal(std::size_t k) const {
    std::map<Color, Rational> out;
    for (const auto& [seq, p] : outcomes) out[seq.at(k)] += p;
    return out;
  }

  /// Probability of every sequence that starts with `prefix`.
  Rational prefix_probability(const std::vector<Color>& prefix) const {
    Rational s = 0;
    for (const auto& [seq, p] : outcomes) {
      if (seq.size() >= prefix.size() && std::equal(prefix.begin(), prefix.end(), seq.begin())) s += p;
    }
    return s;
  }

  friend bool operator==(const ExactLaw&, const ExactLaw&) = default;
};

}  // namespace polya
