#include <cmath>
#include <vector>

#include "support.hpp"

using namespace polya;

namespace {

const Gaussian& gaussian(const LimitLaw& law) { return std::get<Gaussian>(law.law); }

// Beta/Dirichlet marginal variance a_i (a_0 - a_i) / (a_0^2 (a_0 + 1)).
double dirichlet_var(double ai, double a0) { return ai * (a0 - ai) / (a0 * a0 * (a0 + 1.0)); }

}  // namespace

TEST(ScalingFor, ErgodicIsPointMassAtStationary) {
  const auto [spec, law] = scaling_for(FiniteMatrix{{{0.7, 0.3}, {0.1, 0.9}}});
  EXPECT_EQ(spec.centering, Centering::Zero);
  EXPECT_EQ(spec.b(123.0), 1.0);
  const auto& atoms = std::get<PointMass>(law.law).atoms;
  ASSERT_EQ(atoms.size(), 2u);
  EXPECT_NEAR(atoms[0].second, 0.25, 1e-12);
  EXPECT_NEAR(atoms[1].second, 0.75, 1e-12);
}

TEST(ScalingFor, Unsupported) {
  EXPECT_THROW(scaling_for(FiniteMatrix{{{0, 1}, {1, 0}}}), UnsupportedKernel);
  EXPECT_THROW(scaling_for(BlockDiagonal::from_blocks({FiniteMatrix{{{1.0}}}, FiniteMatrix{{{1.0}}}})),
               UnsupportedKernel);
}

TEST(ScalingFor, SimpleWalkIsStandardNormal) {
  const auto [spec, law] = scaling_for(LatticeWalk{1, {{{-1}, 0.5}, {{1}, 0.5}}});
  EXPECT_EQ(spec.scale_exponent, 0.5);
  EXPECT_EQ(spec.direction(0), 0.0);
  EXPECT_DOUBLE_EQ(spec.b(16.0), 4.0);
  const auto& g = gaussian(law);
  EXPECT_EQ(g.mean.size(), 1);
  EXPECT_NEAR(g.mean(0), 0.0, 1e-15);
  EXPECT_NEAR(g.cov(0, 0), 1.0, 1e-15);
}

TEST(ScalingFor, DriftedWalkUsesSecondMoment) {
  // increments +1 w.p. 3/4, -1 w.p. 1/4: mu = 1/2, E[Y^2] = 1
  const auto [spec, law] = scaling_for(LatticeWalk{1, {{{-1}, 0.25}, {{1}, 0.75}}});
  EXPECT_EQ(spec.centering, Centering::Linear);
  EXPECT_NEAR(spec.direction(0), 0.5, 1e-15);
  EXPECT_NEAR(gaussian(law).cov(0, 0), 1.0, 1e-15);
}

TEST(ScalingFor, HexCovarianceIsHalfIdentity) {
  const auto [spec, law] = scaling_for(HexWalk{});
  const auto& g = gaussian(law);
  ASSERT_EQ(g.cov.rows(), 2);
  EXPECT_NEAR(spec.direction.norm(), 0.0, 1e-15);
  EXPECT_NEAR(g.cov(0, 0), 0.5, 1e-15);
  EXPECT_NEAR(g.cov(1, 1), 0.5, 1e-15);
  EXPECT_NEAR(g.cov(0, 1), 0.0, 1e-15);
  EXPECT_NEAR(g.cov(1, 0), 0.0, 1e-15);
}

TEST(ScalingFor, PeriodicWalkAveragesPhases) {
  // phase 0 always +1, phase 1 always -1: mu_bar = 0, phase variances 0
  const auto [spec, law] = scaling_for(PeriodicWalk{1, {{{{1.0}, 1.0}}, {{{-1.0}, 1.0}}}});
  EXPECT_NEAR(spec.direction(0), 0.0, 1e-15);
  EXPECT_NEAR(gaussian(law).cov(0, 0), 0.0, 1e-15);
  // one phase: same as the lattice walk
  const auto [s1, l1] = scaling_for(PeriodicWalk{1, {{{{-1.0}, 0.25}, {{1.0}, 0.75}}}});
  EXPECT_NEAR(s1.direction(0), 0.5, 1e-15);
  EXPECT_NEAR(gaussian(l1).cov(0, 0), 1.0, 1e-15);
}

TEST(ScalingFor, StableRegimes) {
  const auto [heavy, heavy_law] = scaling_for(StableWalk{0.8});
  EXPECT_EQ(heavy.centering, Centering::Zero);
  EXPECT_NEAR(heavy.scale_exponent, 1.0 / 0.8, 1e-15);
  EXPECT_EQ(std::get<SaS>(heavy_law.law).alpha, 0.8);

  const auto [light, light_law] = scaling_for(StableWalk{1.5});
  EXPECT_NEAR(light.scale_exponent, 1.0 / 1.5, 1e-15);
  EXPECT_EQ(light.b_tilde(), 0.0);
  EXPECT_EQ(std::get<SaS>(light_law.law).alpha, 1.5);
}

TEST(XiLimit, GaussianConvolutionIdentity) {
  RandomSource rng(1);
  for (int instance = 0; instance < 10; ++instance) {
    const Eigen::Index d = 1 + static_cast<Eigen::Index>(rng.below(4));
    Eigen::MatrixXd a(d, d);
    for (Eigen::Index i = 0; i < d; ++i)
      for (Eigen::Index j = 0; j < d; ++j) a(i, j) = 2.0 * rng.uniform01() - 1.0;
    Eigen::VectorXd mu(d);
    for (Eigen::Index i = 0; i < d; ++i) mu(i) = 2.0 * rng.uniform01() - 1.0;
    const Eigen::MatrixXd sigma = a * a.transpose() + mu * mu.transpose();
    const LimitLaw base{Gaussian{Eigen::VectorXd::Zero(d), sigma - mu * mu.transpose()}};
    const LimitLaw xi = xi_limit(base, 1.0, 1.0, mu);
    const auto& out = gaussian(xi);
    for (Eigen::Index i = 0; i < d; ++i)
      for (Eigen::Index j = 0; j < d; ++j) EXPECT_NEAR(out.cov(i, j), sigma(i, j), 1e-12);
  }
}

TEST(XiLimit, DegenerateFactorsLeaveBase) {
  const LimitLaw base{Gaussian{Eigen::VectorXd::Zero(1), Eigen::MatrixXd::Identity(1, 1)}};
  const Eigen::VectorXd v = Eigen::VectorXd::Ones(1);
  EXPECT_EQ(gaussian(xi_limit(base, 0.0, 1.0, v)).cov(0, 0), 1.0);
  EXPECT_EQ(gaussian(xi_limit(base, 1.0, 0.0, v)).cov(0, 0), 1.0);

  const LimitLaw sas{SaS{1.5}};
  const auto [spec, law] = scaling_for(StableWalk{1.5});
  const auto kept = xi_limit(sas, spec.a_tilde(), spec.b_tilde(), v);
  EXPECT_EQ(std::get<SaS>(kept.law).alpha, 1.5);

  const auto conv = xi_limit(sas, 1.0, 2.0, v);
  const auto& c = std::get<Convolved>(conv.law);
  EXPECT_EQ(c.extra_var, 4.0);
  EXPECT_EQ(std::get<SaS>(c.base->law).alpha, 1.5);
}

TEST(ScalingSpec, TildeLimits) {
  ScalingSpec spec;
  spec.centering = Centering::Linear;
  spec.scale_exponent = 0.5;
  EXPECT_EQ(spec.a_tilde(), 1.0);
  EXPECT_EQ(spec.b_tilde(), 1.0);
  spec.scale_exponent = 1.0;
  EXPECT_EQ(spec.b_tilde(), 0.0);
  spec.scale_exponent = 0.25;
  EXPECT_TRUE(std::isinf(spec.b_tilde()));
}

TEST(CenterScale, Examples) {
  ScalingSpec identity;
  identity.direction = Eigen::VectorXd::Zero(2);
  const std::vector<std::vector<double>> pts = {{1.0, -2.0}, {3.5, 0.25}};
  EXPECT_EQ(center_scale(pts, 1000.0, identity), pts);

  ScalingSpec linear;
  linear.centering = Centering::Linear;
  linear.direction = (Eigen::VectorXd(2) << 0.5, -1.5).finished();
  const double n = 1e6, x = std::log(n);
  const auto centered = center_scale({{x * 0.5, -x * 1.5}}, n, linear);
  EXPECT_NEAR(centered[0][0], 0.0, 1e-12);
  EXPECT_NEAR(centered[0][1], 0.0, 1e-12);

  const auto [srw, law] = scaling_for(LatticeWalk{1, {{{-1}, 0.5}, {{1}, 0.5}}});
  const auto scaled = center_scale({{3.717}}, n, srw);
  EXPECT_NEAR(scaled[0][0], 3.717 / std::sqrt(x), 1e-12);
  EXPECT_NEAR(std::sqrt(x), 3.717, 1e-3);
}

TEST(DirichletMoments, TwoHalves) {
  const BlockLimit limit{{0.5, 0.5}, {{1.0}, {1.0}}};
  const auto m = dirichlet_block_moments(limit);
  ASSERT_EQ(m.size(), 2u);
  for (const auto& b : m) {
    EXPECT_DOUBLE_EQ(b.mean, 0.5);
    EXPECT_DOUBLE_EQ(b.variance, 0.125);
    EXPECT_NEAR(b.variance, dirichlet_var(0.5, 1.0), 1e-15);
  }
}

TEST(DirichletMoments, DegenerateBlocks) {
  const auto one = dirichlet_block_moments(BlockLimit{{1.0}, {{1.0}}});
  EXPECT_EQ(one[0].mean, 1.0);
  EXPECT_EQ(one[0].variance, 0.0);
  const auto corner = dirichlet_block_moments(BlockLimit{{1.0, 0.0}, {{1.0}, {1.0}}});
  EXPECT_EQ(corner[0].mean, 1.0);
  EXPECT_EQ(corner[1].mean, 0.0);
  EXPECT_EQ(corner[0].variance, 0.0);
  EXPECT_EQ(corner[1].variance, 0.0);
}

TEST(DirichletMoments, IdentityKernelMatchesClassicalPolya) {
  const auto kernel = BlockDiagonal::from_blocks({FiniteMatrix{{{1.0}}}, FiniteMatrix{{{1.0}}}, FiniteMatrix{{{1.0}}}});
  const InitialConfig init{{{FiniteIdx{0}, 0.2}, {FiniteIdx{1}, 0.3}, {FiniteIdx{2}, 0.5}}};
  const auto limit = block_limit(kernel, init);
  const auto m = dirichlet_block_moments(limit);
  const std::vector<double> a = {0.2, 0.3, 0.5};
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_NEAR(m[i].mean, a[i], 1e-15);
    EXPECT_NEAR(m[i].variance, dirichlet_var(a[i], 1.0), 1e-15);
    EXPECT_EQ(limit.block_stationaries[i], std::vector<double>{1.0});
  }

  // Monte Carlo check of the first block fraction at n = 2000
  RandomSource rng(2);
  constexpr int reps = 4000;
  double sum = 0.0, sq = 0.0;
  for (int r = 0; r < reps; ++r) {
    auto urn = urn_init(kernel, init);
    for (int k = 0; k < 2000; ++k) urn.draw(rng);
    const double frac = urn.weight_of(FiniteIdx{0}) / urn.total();
    sum += frac;
    sq += frac * frac;
  }
  const double mean = sum / reps, var = sq / reps - mean * mean;
  EXPECT_NEAR(mean, 0.2, 4.0 * std::sqrt(dirichlet_var(0.2, 1.0) / reps));
  EXPECT_NEAR(var, dirichlet_var(0.2, 1.0), 0.012);
}

TEST(BlockLimit, MassesAndStationaries) {
  const auto kernel = BlockDiagonal::from_blocks({FiniteMatrix{{{0.7, 0.3}, {0.1, 0.9}}}, FiniteMatrix{{{1.0}}}});
  const auto limit = block_limit(kernel, InitialConfig{{{FiniteIdx{1}, 0.4}, {FiniteIdx{2}, 0.6}}});
  ASSERT_EQ(limit.masses.size(), 2u);
  EXPECT_NEAR(limit.masses[0], 0.4, 1e-15);
  EXPECT_NEAR(limit.masses[1], 0.6, 1e-15);
  EXPECT_NEAR(limit.block_stationaries[0][0], 0.25, 1e-12);
  EXPECT_NEAR(limit.block_stationaries[0][1], 0.75, 1e-12);
}
