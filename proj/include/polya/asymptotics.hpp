#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <memory>
#include <utility>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "polya/error.hpp"
#include "polya/kernels.hpp"

namespace polya {

enum class Centering { Zero, Linear };

/// Centering a(x) v and scaling b(x) = x^scale_exponent with
/// X_n - a(n) v over b(n) converging to the family's Lambda.
struct ScalingSpec {
  Centering centering = Centering::Zero;
  Eigen::VectorXd direction;
  double scale_exponent = 0.0;

  double a(double x) const noexcept { return centering == Centering::Linear ? x : 0.0; }
  double b(double x) const noexcept { return scale_exponent == 0.0 ? 1.0 : std::pow(x, scale_exponent); }

  /// lim a'(x).
  double a_tilde() const noexcept { return centering == Centering::Linear ? 1.0 : 0.0; }

  /// lim sqrt(x) / b(x).
  double b_tilde() const noexcept {
    if (scale_exponent > 0.5) return 0.0;
    if (scale_exponent == 0.5) return 1.0;
    return std::numeric_limits<double>::infinity();
  }
};

struct LimitLaw;

struct PointMass {
  Row atoms;
};

struct Gaussian {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
};

/// Symmetric alpha-stable law with characteristic function exp(-sigma^alpha |t|^alpha);
/// sigma is NaN when it is left as a nuisance parameter.
struct SaS {
  double alpha = 2.0;
  double sigma = std::numeric_limits<double>::quiet_NaN();
};

/// base convolved with Normal(0, extra_var) along direction.
struct Convolved {
  std::shared_ptr<const LimitLaw> base;
  double extra_var = 0.0;
  Eigen::VectorXd direction;
};

struct LimitLaw {
  std::variant<PointMass, Gaussian, SaS, Convolved> law;
};

/// Xi: Lambda when a~ = 0 or b~ = 0, otherwise Lambda * Normal(0, a~^2 b~^2) v.
/// A Gaussian base absorbs the extra term into its covariance.
inline LimitLaw xi_limit(const LimitLaw& base, double a_tilde, double b_tilde,
                         const Eigen::VectorXd& direction) {
  if (a_tilde == 0.0 || b_tilde == 0.0) return base;
  const double extra = a_tilde * a_tilde * b_tilde * b_tilde;
  if (const auto* g = std::get_if<Gaussian>(&base.law)) {
    return {Gaussian{g->mean, g->cov + extra * direction * direction.transpose()}};
  }
  return {Convolved{std::make_shared<const LimitLaw>(base), extra, direction}};
}

namespace detail {

struct StepMoments {
  Eigen::VectorXd mean;
  Eigen::MatrixXd second;  // E[Y Y^T]
};

template <class T>
StepMoments moments_of(const DiscreteLaw<T>& law, std::size_t dim) {
  StepMoments m{Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dim)),
                Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim))};
  for (const auto& atom : law) {
    Eigen::VectorXd y(static_cast<Eigen::Index>(dim));
    for (std::size_t i = 0; i < dim; ++i) y(static_cast<Eigen::Index>(i)) = static_cast<double>(atom.step[i]);
    m.mean += atom.p * y;
    m.second += atom.p * y * y.transpose();
  }
  return m;
}

/// Moments of the uniform law on sign * {1, w, w^2}, evaluated through the exact
/// quadratic form of the basis (x = a - b/2, y = (sqrt3/2) b) so no sqrt(3) is squared.
inline StepMoments hex_moments(int sign) {
  StepMoments m{Eigen::VectorXd::Zero(2), Eigen::MatrixXd::Zero(2, 2)};
  constexpr double half_sqrt3 = 0.86602540378443864676;
  double sx = 0.0, sb = 0.0, sxx = 0.0, sbb = 0.0, sxb = 0.0;
  for (const auto& d : kHexSteps) {
    const double a = sign * static_cast<double>(d[0]);
    const double b = sign * static_cast<double>(d[1]);
    const double x = a - 0.5 * b;
    sx += x;
    sb += b;
    sxx += x * x;
    sbb += b * b;
    sxb += x * b;
  }
  m.mean << sx / 3.0, half_sqrt3 * sb / 3.0;
  m.second << sxx / 3.0, half_sqrt3 * sxb / 3.0, half_sqrt3 * sxb / 3.0, 0.75 * sbb / 3.0;
  return m;
}

/// Averages over phases: mean of mu(i) and mean of var(Y(i)) = Sigma(i) - mu(i) mu(i)^T.
inline std::pair<Eigen::VectorXd, Eigen::MatrixXd> phase_average(const std::vector<StepMoments>& phases) {
  const auto d = phases.front().mean.size();
  Eigen::VectorXd mu = Eigen::VectorXd::Zero(d);
  Eigen::MatrixXd var = Eigen::MatrixXd::Zero(d, d);
  for (const auto& p : phases) {
    mu += p.mean;
    var += p.second - p.mean * p.mean.transpose();
  }
  const auto k = static_cast<double>(phases.size());
  return {mu / k, var / k};
}

inline std::pair<ScalingSpec, LimitLaw> diffusive(const Eigen::VectorXd& mu, const Eigen::MatrixXd& lambda_cov) {
  ScalingSpec spec{Centering::Linear, mu, 0.5};
  const LimitLaw lambda{Gaussian{Eigen::VectorXd::Zero(mu.size()), lambda_cov}};
  return {spec, xi_limit(lambda, spec.a_tilde(), spec.b_tilde(), mu)};
}

}  // namespace detail

/// Scaling (a, v, b) for the underlying chain and the limit of
/// (Z_n - a(log n) v) / b(log n) for the urn. Throws UnsupportedKernel.
inline std::pair<ScalingSpec, LimitLaw> scaling_for(const KernelSpec& kernel) {
  struct Visitor {
    std::pair<ScalingSpec, LimitLaw> operator()(const FiniteMatrix& m) const {
      std::vector<double> pi;
      try {
        pi = stationary_distribution(m);
      } catch (const NotErgodic& e) {
        throw UnsupportedKernel(std::string("finite kernel without a point-mass limit: ") + e.what());
      }
      Row atoms;
      for (std::size_t i = 0; i < pi.size(); ++i) atoms.emplace_back(FiniteIdx{i}, pi[i]);
      return {ScalingSpec{Centering::Zero, Eigen::VectorXd::Zero(1), 0.0}, {PointMass{std::move(atoms)}}};
    }
    std::pair<ScalingSpec, LimitLaw> operator()(const BlockDiagonal&) const {
      throw UnsupportedKernel("block-diagonal kernels have a random limit; use block_limit");
    }
    std::pair<ScalingSpec, LimitLaw> operator()(const LatticeWalk& w) const {
      const auto m = detail::moments_of(w.increment, w.dim);
      return detail::diffusive(m.mean, m.second - m.mean * m.mean.transpose());
    }
    std::pair<ScalingSpec, LimitLaw> operator()(const StableWalk& s) const {
      const Eigen::VectorXd v = Eigen::VectorXd::Zero(1);
      const LimitLaw lambda{SaS{s.alpha}};
      if (s.alpha <= 1.0) return {ScalingSpec{Centering::Zero, v, 1.0 / s.alpha}, lambda};
      ScalingSpec spec{Centering::Linear, v, 1.0 / s.alpha};
      return {spec, xi_limit(lambda, spec.a_tilde(), spec.b_tilde(), v)};
    }
    std::pair<ScalingSpec, LimitLaw> operator()(const PeriodicWalk& w) const {
      std::vector<detail::StepMoments> phases;
      for (const auto& law : w.increment_laws) phases.push_back(detail::moments_of(law, w.dim));
      const auto [mu, var] = detail::phase_average(phases);
      return detail::diffusive(mu, var);
    }
    std::pair<ScalingSpec, LimitLaw> operator()(const HexWalk&) const {
      const auto [mu, var] = detail::phase_average({detail::hex_moments(1), detail::hex_moments(-1)});
      return detail::diffusive(mu, var);
    }
  };
  return std::visit(Visitor{}, kernel);
}

/// x -> (x - a(ln n) v) / b(ln n) for each sample.
inline std::vector<std::vector<double>> center_scale(const std::vector<std::vector<double>>& samples,
                                                     double n, const ScalingSpec& spec) {
  const double log_n = std::log(n);
  const double shift = spec.a(log_n);
  const double scale = spec.b(log_n);
  std::vector<std::vector<double>> out;
  out.reserve(samples.size());
  for (const auto& x : samples) {
    std::vector<double> y(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double v = static_cast<Eigen::Index>(i) < spec.direction.size() ? spec.direction(static_cast<Eigen::Index>(i)) : 0.0;
      y[i] = (x[i] - shift * v) / scale;
    }
    out.push_back(std::move(y));
  }
  return out;
}

/// Block masses c_i = U_0(C_i) and per-block stationary laws pi_i.
struct BlockLimit {
  std::vector<double> masses;
  std::vector<std::vector<double>> block_stationaries;
};

inline BlockLimit block_limit(const BlockDiagonal& kernel, const InitialConfig& init) {
  validate_initial(kernel, init);
  BlockLimit out;
  out.masses.assign(kernel.block_count(), 0.0);
  for (const auto& [color, w] : init.atoms) {
    out.masses[kernel.block_of(static_cast<std::size_t>(std::get<FiniteIdx>(color).id))] += w;
  }
  for (std::size_t b = 0; b < kernel.block_count(); ++b) {
    const std::size_t lo = kernel.block_offsets[b];
    const std::size_t hi = kernel.block_end(b);
    FiniteMatrix sub;
    for (std::size_t i = lo; i < hi; ++i) {
      sub.rows.emplace_back(kernel.matrix.rows[i].begin() + static_cast<std::ptrdiff_t>(lo),
                            kernel.matrix.rows[i].begin() + static_cast<std::ptrdiff_t>(hi));
    }
    out.block_stationaries.push_back(stationary_distribution(sub));
  }
  return out;
}

struct BlockMoments {
  double mean = 0.0;
  double variance = 0.0;
};

/// Dirichlet(c_1, .., c_k) marginals with total concentration sum c_j = 1:
/// mean c_i, variance c_i (1 - c_i) / 2.
inline std::vector<BlockMoments> dirichlet_block_moments(const BlockLimit& limit) {
  double concentration = 0.0;
  for (double c : limit.masses) concentration += c;
  std::vector<BlockMoments> out;
  for (double c : limit.masses) {
    const double mean = c / concentration;
    out.push_back({mean, mean * (1.0 - mean) / (concentration + 1.0)});
  }
  return out;
}

}  // namespace polya
