#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <limits>
#include <map>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/distributions/chi_squared.hpp>

#include "polya/error.hpp"
#include "polya/kernels.hpp"

namespace polya {

/// Outcome of one statistical check; pass iff statistic <= threshold.
struct TestReport {
  std::string test_name;
  double statistic = 0.0;
  double threshold = 0.0;
  std::size_t sample_size = 0;
  bool pass = false;
  std::map<std::string, std::string> metadata;
};

inline TestReport make_report(std::string name, double statistic, double threshold, std::size_t sample_size) {
  return {std::move(name), statistic, threshold, sample_size, statistic <= threshold, {}};
}

/// Standard normal CDF.
inline double normal_cdf(double x) { return 0.5 * std::erfc(-x * 0.70710678118654752440); }

/// Asymptotic Kolmogorov critical value c(alpha) = sqrt(-ln(alpha/2) / 2); 1.9495 at alpha = 1e-3.
inline double ks_critical_coefficient(double significance) {
  return std::sqrt(-0.5 * std::log(0.5 * significance));
}

inline double ks_critical(std::size_t m, double significance = 1e-3) {
  return ks_critical_coefficient(significance) / std::sqrt(static_cast<double>(m));
}

inline double ks_critical_two_sample(std::size_t m, std::size_t n, double significance = 1e-3) {
  const auto a = static_cast<double>(m);
  const auto b = static_cast<double>(n);
  return ks_critical_coefficient(significance) * std::sqrt((a + b) / (a * b));
}

/// sup |F_M - cdf| over sorted samples, checking both sides of each jump.
/// Threshold defaults to the 1e-3 critical value.
inline TestReport ks_vs_cdf(std::vector<double> samples, const std::function<double(double)>& cdf,
                            double threshold = -1.0) {
  if (samples.size() < 2) throw TooFewSamples("KS needs at least two samples");
  std::sort(samples.begin(), samples.end());
  const auto m = static_cast<double>(samples.size());
  double d = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double f = cdf(samples[i]);
    d = std::max({d, static_cast<double>(i + 1) / m - f, f - static_cast<double>(i) / m});
  }
  return make_report("ks_vs_cdf", d, threshold < 0.0 ? ks_critical(samples.size()) : threshold,
                     samples.size());
}

/// KS for lattice-valued samples with lattice spacing `span`. The empirical CDF
/// is compared with the continuous law at the cell midpoints x +/- span/2 on
/// both sides of every jump, which removes the discretization gap of order
/// max pmf that the raw statistic carries.
inline TestReport ks_vs_cdf_lattice(std::vector<double> samples, const std::function<double(double)>& cdf,
                                    double span, double threshold = -1.0) {
  if (samples.size() < 2) throw TooFewSamples("KS needs at least two samples");
  std::sort(samples.begin(), samples.end());
  const auto m = static_cast<double>(samples.size());
  double d = 0.0;
  std::size_t i = 0;
  while (i < samples.size()) {
    const double x = samples[i];
    const double below = static_cast<double>(i) / m;
    while (i < samples.size() && samples[i] == x) ++i;
    const double at = static_cast<double>(i) / m;
    d = std::max({d, std::abs(below - cdf(x - 0.5 * span)), std::abs(at - cdf(x + 0.5 * span))});
  }
  return make_report("ks_vs_cdf_lattice", d, threshold < 0.0 ? ks_critical(samples.size()) : threshold,
                     samples.size());
}

inline TestReport ks_two_sample(std::vector<double> a, std::vector<double> b, double threshold = -1.0) {
  if (a.empty() || b.empty()) throw EmptyInput("two-sample KS needs nonempty samples");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const auto na = static_cast<double>(a.size());
  const auto nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] == x) ++i;
    while (j < b.size() && b[j] == x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return make_report("ks_two_sample", d,
                     threshold < 0.0 ? ks_critical_two_sample(a.size(), b.size()) : threshold,
                     a.size() + b.size());
}

/// Half the L1 distance after normalizing both to probabilities.
inline double tv_distance(std::span<const double> p, std::span<const double> q) {
  if (p.empty() || q.empty()) throw EmptyInput("tv distance of empty measures");
  if (p.size() != q.size()) throw SupportMismatch("measures indexed over different supports");
  const double sp = std::accumulate(p.begin(), p.end(), 0.0);
  const double sq = std::accumulate(q.begin(), q.end(), 0.0);
  double d = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) d += std::abs(p[i] / sp - q[i] / sq);
  return 0.5 * d;
}

/// Color-keyed version; atoms missing on one side count as zero there.
inline double tv_distance(const Row& p, const Row& q) {
  if (p.empty() || q.empty()) throw EmptyInput("tv distance of empty measures");
  std::map<Color, std::pair<double, double>> joint;
  for (const auto& [c, w] : p) joint[c].first += w;
  for (const auto& [c, w] : q) joint[c].second += w;
  std::vector<double> a, b;
  for (const auto& [c, ab] : joint) {
    a.push_back(ab.first);
    b.push_back(ab.second);
  }
  return tv_distance(a, b);
}

/// Pearson chi-square of counts against expected probabilities. Cells with zero
/// expectation must be empty. Threshold is the (1 - significance) quantile.
inline TestReport chi_square_gof(std::span<const double> counts, std::span<const double> expected,
                                 double significance = 1e-3) {
  if (counts.empty()) throw EmptyInput("chi-square needs at least one cell");
  if (counts.size() != expected.size()) throw SupportMismatch("counts and expectations differ in length");
  const double total = std::accumulate(counts.begin(), counts.end(), 0.0);
  const double mass = std::accumulate(expected.begin(), expected.end(), 0.0);
  double stat = 0.0;
  std::size_t cells = 0;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    const double e = total * expected[i] / mass;
    if (e <= 0.0) {
      if (counts[i] > 0.0) stat = std::numeric_limits<double>::infinity();
      continue;
    }
    ++cells;
    stat += (counts[i] - e) * (counts[i] - e) / e;
  }
  double threshold = 0.0;
  if (cells > 1) {
    const boost::math::chi_squared dist(static_cast<double>(cells - 1));
    threshold = boost::math::quantile(boost::math::complement(dist, significance));
  }
  auto report = make_report("chi_square_gof", stat, threshold, static_cast<std::size_t>(total));
  report.metadata["df"] = std::to_string(cells > 0 ? cells - 1 : 0);
  return report;
}

struct MeanCov {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;  // unbiased
};

inline MeanCov sample_mean_cov(const std::vector<std::vector<double>>& points) {
  if (points.size() < 2) throw EmptyInput("mean and covariance need at least two points");
  const auto d = static_cast<Eigen::Index>(points.front().size());
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(d);
  for (const auto& p : points) mean += Eigen::Map<const Eigen::VectorXd>(p.data(), d);
  mean /= static_cast<double>(points.size());
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(d, d);
  for (const auto& p : points) {
    const Eigen::VectorXd c = Eigen::Map<const Eigen::VectorXd>(p.data(), d) - mean;
    cov += c * c.transpose();
  }
  cov /= static_cast<double>(points.size() - 1);
  return {mean, cov};
}

/// Empirical characteristic function (1/M) sum exp(i t x_j) on each grid point.
inline std::vector<std::complex<double>> ecf(std::span<const double> samples, std::span<const double> t_grid) {
  if (samples.empty()) throw EmptyInput("ecf of an empty sample");
  std::vector<std::complex<double>> out;
  out.reserve(t_grid.size());
  const auto m = static_cast<double>(samples.size());
  for (double t : t_grid) {
    double re = 0.0, im = 0.0;
    for (double x : samples) {
      re += std::cos(t * x);
      im += std::sin(t * x);
    }
    out.emplace_back(re / m, im / m);
  }
  return out;
}

struct StableFit {
  double alpha_hat = 0.0;
  double sigma_hat = 0.0;
  std::vector<double> t_used;
};

/// |ECF| band in which log(-log|ECF|) is used for the regression.
inline constexpr double kEcfBandLow = 0.2;
inline constexpr double kEcfBandHigh = 0.9;

/// Regresses log(-log|ECF(t)|) = alpha log t + alpha log sigma over grid points
/// whose |ECF| lies in the usable band. An empty grid is chosen automatically
/// from the median absolute deviation. Throws DegenerateFit.
inline StableFit stable_alpha_fit(std::span<const double> samples, std::vector<double> t_grid = {}) {
  if (samples.size() < 2) throw TooFewSamples("stable fit needs at least two samples");
  if (t_grid.empty()) {
    std::vector<double> sorted(samples.begin(), samples.end());
    auto mid = sorted.begin() + static_cast<std::ptrdiff_t>(sorted.size() / 2);
    std::nth_element(sorted.begin(), mid, sorted.end());
    const double median = *mid;
    for (double& x : sorted) x = std::abs(x - median);
    std::nth_element(sorted.begin(), mid, sorted.end());
    const double mad = *mid;
    if (!(mad > 0.0)) throw DegenerateFit("sample has zero spread");
    constexpr int points = 48;
    for (int k = 0; k < points; ++k) {
      t_grid.push_back(0.02 * std::pow(250.0, static_cast<double>(k) / (points - 1)) / mad);
    }
  }
  const auto phi = ecf(samples, t_grid);
  std::vector<double> xs, ys;
  StableFit fit;
  for (std::size_t k = 0; k < t_grid.size(); ++k) {
    const double modulus = std::abs(phi[k]);
    if (t_grid[k] > 0.0 && modulus >= kEcfBandLow && modulus <= kEcfBandHigh) {
      xs.push_back(std::log(t_grid[k]));
      ys.push_back(std::log(-std::log(modulus)));
      fit.t_used.push_back(t_grid[k]);
    }
  }
  if (xs.size() < 2) throw DegenerateFit("|ECF| is outside [0.2, 0.9] on the grid");
  const double n = static_cast<double>(xs.size());
  const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
  }
  if (!(sxx > 0.0)) throw DegenerateFit("usable grid points coincide");
  fit.alpha_hat = sxy / sxx;
  fit.sigma_hat = std::exp((my - fit.alpha_hat * mx) / fit.alpha_hat);
  return fit;
}

}  // namespace polya
