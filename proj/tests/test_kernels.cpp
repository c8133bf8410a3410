#include <cmath>
#include <map>
#include <vector>

#include "support.hpp"

using namespace polya;
using polya::testing::gof;
using polya::testing::within_3sigma;

namespace {

LatticeWalk srw() { return {1, {{{-1}, 0.5}, {{1}, 0.5}}}; }

// Power iteration from the uniform vector; independent of the linear solve.
std::vector<double> power_stationary(const FiniteMatrix& m, int iterations = 20000) {
  std::vector<double> pi(m.size(), 1.0 / static_cast<double>(m.size()));
  for (int it = 0; it < iterations; ++it) {
    std::vector<double> next(m.size(), 0.0);
    for (std::size_t i = 0; i < m.size(); ++i)
      for (std::size_t j = 0; j < m.size(); ++j) next[j] += pi[i] * m.rows[i][j];
    pi = next;
  }
  return pi;
}

}  // namespace

TEST(ValidateKernel, FlipIsValid) { EXPECT_FALSE(validate_kernel(FiniteMatrix{{{0, 1}, {1, 0}}})); }

TEST(ValidateKernel, NonStochasticRowReportsRowAndSum) {
  auto err = validate_kernel(FiniteMatrix{{{0.5, 0.4}, {1, 0}}});
  ASSERT_TRUE(err);
  EXPECT_EQ(err->kind(), ValidationError::Kind::NonStochasticRow);
  EXPECT_EQ(err->row(), 0u);
  EXPECT_NEAR(err->value(), 0.9, 1e-15);
}

TEST(ValidateKernel, NegativeWeight) {
  auto err = validate_kernel(FiniteMatrix{{{1.5, -0.5}, {1, 0}}});
  ASSERT_TRUE(err);
  EXPECT_EQ(err->kind(), ValidationError::Kind::NegativeWeight);
}

TEST(ValidateKernel, BlockLeak) {
  auto b = BlockDiagonal::from_blocks({FiniteMatrix{{{1.0}}}, FiniteMatrix{{{0.5, 0.5}, {0.5, 0.5}}}});
  b.matrix.rows[0] = {0.9, 0.1, 0.0};
  auto err = validate_kernel(b);
  ASSERT_TRUE(err);
  EXPECT_EQ(err->kind(), ValidationError::Kind::BlockLeak);
  EXPECT_EQ(err->row(), 0u);
}

TEST(ValidateKernel, MalformedWalks) {
  EXPECT_TRUE(validate_kernel(StableWalk{0.0}));
  EXPECT_TRUE(validate_kernel(StableWalk{2.5}));
  EXPECT_FALSE(validate_kernel(StableWalk{2.0}));
  EXPECT_TRUE(validate_kernel(LatticeWalk{0, {}}));
  EXPECT_TRUE(validate_kernel(PeriodicWalk{1, {}}));
  EXPECT_TRUE(validate_kernel(LatticeWalk{1, {{{1}, 0.7}}}));
}

TEST(ValidateKernel, ValidatedRenormalizesWithinTolerance) {
  auto spec = validated(FiniteMatrix{{{0.5 + 1e-13, 0.5}, {0, 1}}});
  const auto& rows = std::get<FiniteMatrix>(spec).rows;
  EXPECT_DOUBLE_EQ(rows[0][0] + rows[0][1], 1.0);
  EXPECT_THROW(validated(FiniteMatrix{{{0.5, 0.4}, {1, 0}}}), ValidationError);
}

TEST(KernelStep, DeterministicRow) {
  RandomSource rng(1);
  const KernelSpec flip = FiniteMatrix{{{0, 1}, {1, 0}}};
  for (int i = 0; i < 1000; ++i) EXPECT_EQ(kernel_step(flip, FiniteIdx{0}, rng), Color(FiniteIdx{1}));
}

TEST(KernelStep, SimpleWalkFrequencies) {
  RandomSource rng(2);
  const KernelSpec walk = srw();
  constexpr std::uint64_t trials = 100000;
  std::uint64_t up = 0;
  for (std::uint64_t i = 0; i < trials; ++i) {
    const auto next = std::get<Lattice>(kernel_step(walk, Lattice{{5}}, rng)).coords[0];
    ASSERT_TRUE(next == 4 || next == 6);
    up += next == 6;
  }
  EXPECT_TRUE(within_3sigma(up, trials, 0.5));
}

TEST(KernelStep, ColorOutOfSpace) {
  RandomSource rng(3);
  EXPECT_THROW(kernel_step(FiniteMatrix{{{0, 1}, {1, 0}}}, FiniteIdx{2}, rng), ColorOutOfSpace);
  EXPECT_THROW(kernel_step(srw(), Lattice{{0, 0}}, rng), ColorOutOfSpace);
  EXPECT_THROW(kernel_step(HexWalk{}, Hex{0, 0}, rng), ColorOutOfSpace);
  EXPECT_THROW(kernel_step(StableWalk{1.5}, FiniteIdx{0}, rng), ColorOutOfSpace);
}

TEST(KernelStep, StableTailIsExactPareto) {
  RandomSource rng(4);
  constexpr std::uint64_t trials = 1000000;
  std::uint64_t big = 0;
  for (std::uint64_t i = 0; i < trials; ++i) {
    const auto y = std::get<Lattice>(kernel_step(StableWalk{1.5}, Lattice{{0}}, rng)).coords[0];
    ASSERT_NE(y, 0);
    big += std::llabs(y) > 10;
  }
  EXPECT_TRUE(within_3sigma(big, trials, std::pow(10.0, -1.5)));
}

TEST(KernelStep, StableIncrementsAreSymmetric) {
  RandomSource rng(5);
  constexpr std::uint64_t trials = 1000000;
  std::uint64_t positive = 0, tail = 0, tail_positive = 0;
  for (std::uint64_t i = 0; i < trials; ++i) {
    const auto y = stable_increment(0.8, rng);
    positive += y > 0;
    if (std::llabs(y) > 20) {
      ++tail;
      tail_positive += y > 0;
    }
  }
  EXPECT_TRUE(within_3sigma(positive, trials, 0.5));
  EXPECT_TRUE(within_3sigma(tail_positive, tail, 0.5));
}

TEST(KernelStep, StableStepIsCapped) {
  RandomSource rng(6);
  for (int i = 0; i < 100000; ++i) EXPECT_LE(std::llabs(stable_increment(0.05, rng)), kStableStepCap);
}

TEST(KernelStep, HexStepsAlternateClasses) {
  RandomSource rng(7);
  Color c = Hex{1, 0};
  for (int i = 0; i < 100000; ++i) {
    const auto before = hex_class(std::get<Hex>(c));
    ASSERT_NE(before, HexClass::Centre);
    c = kernel_step(HexWalk{}, c, rng);
    const auto after = hex_class(std::get<Hex>(c));
    ASSERT_EQ(after, before == HexClass::V1 ? HexClass::V2 : HexClass::V1);
  }
}

TEST(KernelStep, HexStepsHaveUnitLength) {
  RandomSource rng(8);
  for (const Color& from : {Color(Hex{1, 0}), Color(Hex{2, 0})}) {
    const auto x = to_real(from);
    for (int i = 0; i < 100; ++i) {
      const auto y = to_real(kernel_step(HexWalk{}, from, rng));
      EXPECT_NEAR(std::hypot(y[0] - x[0], y[1] - x[1]), 1.0, 1e-12);
    }
  }
}

TEST(KernelStep, PeriodicWithOnePhaseMatchesLatticeWalk) {
  const LatticeWalk lattice{1, {{{-1}, 0.3}, {{0}, 0.2}, {{2}, 0.5}}};
  const PeriodicWalk periodic{1, {{{{-1.0}, 0.3}, {{0.0}, 0.2}, {{2.0}, 0.5}}}};
  RandomSource a(9), b(10);
  constexpr int samples = 100000, steps = 10;
  std::vector<double> xs, ys;
  for (int s = 0; s < samples; ++s) {
    Color x = Lattice{{0}};
    Color y = Phased{{0.0}, 0};
    for (int k = 0; k < steps; ++k) {
      x = kernel_step(lattice, x, a);
      y = kernel_step(periodic, y, b);
    }
    xs.push_back(static_cast<double>(std::get<Lattice>(x).coords[0]));
    EXPECT_EQ(std::get<Phased>(y).phase, 0);
    ys.push_back(std::get<Phased>(y).coords[0]);
  }
  EXPECT_LT(ks_two_sample(xs, ys).statistic, 0.01);
}

// kernel_step agrees with row_support for every finite-row kernel family.
TEST(KernelStep, MatchesRowSupportByChiSquare) {
  const std::vector<std::pair<KernelSpec, Color>> fixtures = {
      {FiniteMatrix{{{0, 1}, {1, 0}}}, FiniteIdx{0}},
      {FiniteMatrix{{{0.5, 0.25, 0.25}, {0.2, 0.6, 0.2}, {0.1, 0.3, 0.6}}}, FiniteIdx{1}},
      {BlockDiagonal::from_blocks({FiniteMatrix{{{1.0}}}, FiniteMatrix{{{0.3, 0.7}, {0.9, 0.1}}}}), FiniteIdx{1}},
      {LatticeWalk{2, {{{1, 0}, 0.25}, {{0, 1}, 0.25}, {{-1, -1}, 0.5}}}, Lattice{{3, -2}}},
      {PeriodicWalk{1, {{{{1.0}, 1.0}}, {{{-0.5}, 0.4}, {{0.5}, 0.6}}}}, Phased{{0.0}, 1}},
      {HexWalk{}, Hex{1, 0}},
      {HexWalk{}, Hex{2, 0}},
  };
  RandomSource rng(11);
  constexpr std::uint64_t trials = 100000;
  for (const auto& [spec, from] : fixtures) {
    const auto row = row_support(spec, from);
    ASSERT_TRUE(row);
    std::map<Color, std::uint64_t> counts;
    for (std::uint64_t i = 0; i < trials; ++i) ++counts[kernel_step(spec, from, rng)];
    const auto report = gof(counts, *row, trials);
    EXPECT_TRUE(report.pass) << to_string(from) << " chi2=" << report.statistic << " > " << report.threshold;
  }
}

TEST(RowSupport, Examples) {
  const auto flip = row_support(FiniteMatrix{{{0, 1}, {1, 0}}}, FiniteIdx{0});
  ASSERT_TRUE(flip);
  ASSERT_EQ(flip->size(), 1u);
  EXPECT_EQ((*flip)[0].first, Color(FiniteIdx{1}));
  EXPECT_EQ((*flip)[0].second, 1.0);

  const auto hex = row_support(HexWalk{}, Hex{1, 0});
  ASSERT_TRUE(hex);
  ASSERT_EQ(hex->size(), 3u);
  for (const auto& [c, w] : *hex) {
    EXPECT_EQ(hex_class(std::get<Hex>(c)), HexClass::V2);
    EXPECT_DOUBLE_EQ(w, 1.0 / 3.0);
  }

  EXPECT_FALSE(row_support(StableWalk{1.5}, Lattice{{0}}));
  EXPECT_THROW(row_support(HexWalk{}, Hex{1, 2}), ColorOutOfSpace);
}

TEST(Augment, RootStepDrawsInitial) {
  RandomSource rng(12);
  const auto aug = augment(FiniteMatrix{{{0, 1}, {1, 0}}}, InitialConfig::point_mass(FiniteIdx{0}));
  for (int i = 0; i < 1000; ++i) {
    EXPECT_EQ(aug.step(std::nullopt, rng), Color(FiniteIdx{0}));
    EXPECT_EQ(aug.step(Color(FiniteIdx{0}), rng), Color(FiniteIdx{1}));
  }
}

TEST(Augment, RootStepFollowsInitialWeights) {
  RandomSource rng(13);
  const auto aug = augment(FiniteMatrix{{{1, 0}, {0, 1}}}, InitialConfig{{{FiniteIdx{0}, 0.25}, {FiniteIdx{1}, 0.75}}});
  constexpr std::uint64_t trials = 100000;
  std::uint64_t ones = 0;
  for (std::uint64_t i = 0; i < trials; ++i) ones += aug.step(std::nullopt, rng) == Color(FiniteIdx{1});
  EXPECT_TRUE(within_3sigma(ones, trials, 0.75));
}

TEST(Augment, RejectsInitialOutsideSpace) {
  EXPECT_THROW(augment(FiniteMatrix{{{0, 1}, {1, 0}}}, InitialConfig::point_mass(FiniteIdx{5})), ColorOutOfSpace);
  EXPECT_THROW(augment(HexWalk{}, InitialConfig::point_mass(Hex{0, 0})), ColorOutOfSpace);
  EXPECT_THROW(augment(FiniteMatrix{{{0.5, 0.4}, {1, 0}}}, InitialConfig::point_mass(FiniteIdx{0})), ValidationError);
}

TEST(Stationary, TwoStateClosedForm) {
  const double p = 0.3, q = 0.1;
  const FiniteMatrix m{{{1 - p, p}, {q, 1 - q}}};
  const auto pi = stationary_distribution(m);
  EXPECT_NEAR(pi[0], q / (p + q), 1e-12);
  EXPECT_NEAR(pi[1], p / (p + q), 1e-12);
  EXPECT_NEAR(pi[0], 0.25, 1e-12);
}

TEST(Stationary, MatchesPowerIterationAndIsInvariant) {
  const FiniteMatrix m{{{0.5, 0.25, 0.25}, {0.2, 0.6, 0.2}, {0.1, 0.3, 0.6}}};
  const auto pi = stationary_distribution(m);
  const auto oracle = power_stationary(m);
  for (std::size_t j = 0; j < 3; ++j) {
    EXPECT_NEAR(pi[j], oracle[j], 1e-12);
    double image = 0.0;
    for (std::size_t i = 0; i < 3; ++i) image += pi[i] * m.rows[i][j];
    EXPECT_NEAR(image, pi[j], 1e-10);
  }
}

TEST(Stationary, NotErgodic) {
  EXPECT_THROW(stationary_distribution(FiniteMatrix{{{0, 1}, {1, 0}}}), NotErgodic);
  EXPECT_THROW(stationary_distribution(FiniteMatrix{{{1, 0}, {0, 1}}}), NotErgodic);
  EXPECT_THROW(stationary_distribution(FiniteMatrix{{{0, 1, 0}, {0, 0, 1}, {1, 0, 0}}}), NotErgodic);
}

TEST(Stationary, ThreeCycleWithLoopIsAperiodic) {
  const auto pi = stationary_distribution(FiniteMatrix{{{0.5, 0.5, 0}, {0, 0, 1}, {1, 0, 0}}});
  // pi_0 = 2 pi_1, pi_1 = pi_2
  EXPECT_NEAR(pi[0], 0.5, 1e-12);
  EXPECT_NEAR(pi[1], 0.25, 1e-12);
}

TEST(HexClass, ResiduesModThree) {
  EXPECT_EQ(hex_class(Hex{1, 0}), HexClass::V1);
  EXPECT_EQ(hex_class(Hex{0, 1}), HexClass::V1);
  EXPECT_EQ(hex_class(Hex{-1, -1}), HexClass::V1);
  EXPECT_EQ(hex_class(Hex{2, 0}), HexClass::V2);
  EXPECT_EQ(hex_class(Hex{-4, 0}), HexClass::V2);
  EXPECT_EQ(hex_class(Hex{0, 0}), HexClass::Centre);
  EXPECT_EQ(hex_class(Hex{-4, 2}), HexClass::V1);
}
