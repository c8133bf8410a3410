#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "polya/asymptotics.hpp"
#include "polya/experiment.hpp"
#include "polya/kernels.hpp"
#include "polya/rrt.hpp"
#include "polya/stats.hpp"
#include "polya/urn.hpp"

namespace polya {

struct SuiteOptions {
  std::uint64_t seed = 20240601;
  unsigned threads = 1;
  std::string output_dir;  // empty: write nothing
};

namespace fixtures {

inline FiniteMatrix flip() { return {{{0.0, 1.0}, {1.0, 0.0}}}; }
inline FiniteMatrix identity2() { return {{{1.0, 0.0}, {0.0, 1.0}}}; }
inline FiniteMatrix two_state(double p, double q) { return {{{1.0 - p, p}, {q, 1.0 - q}}}; }

/// Irreducible, aperiodic; pi = (4/17, 7/17, 6/17).
inline FiniteMatrix ergodic3() {
  return {{{0.5, 0.25, 0.25}, {0.2, 0.6, 0.2}, {0.1, 0.3, 0.6}}};
}

inline LatticeWalk simple_walk() { return {1, {{{-1}, 0.5}, {{1}, 0.5}}}; }

inline InitialConfig delta0() { return InitialConfig::point_mass(FiniteIdx{0}); }
inline InitialConfig halves() { return {{{FiniteIdx{0}, 0.5}, {FiniteIdx{1}, 0.5}}}; }
inline InitialConfig origin() { return InitialConfig::point_mass(Lattice{{0}}); }

}  // namespace fixtures

namespace detail {

inline TestReport runtime_check(const std::string& name, double seconds, double budget) {
  auto r = make_report(name + "_runtime_s", seconds, budget, 0);
  return r;
}

template <class Sampler>
std::vector<Color> draw_many(std::uint64_t count, const SuiteOptions& opt, std::uint64_t stream, Sampler sampler) {
  constexpr std::uint64_t kChunk = 1024;
  std::vector<Color> out(count);
  const std::uint64_t chunks = (count + kChunk - 1) / kChunk;
  parallel_for(chunks, opt.threads, [&](std::uint64_t c) {
    RandomSource rng(derive_seed(opt.seed ^ (stream * 0x9e3779b97f4a7c15ULL), c));
    for (std::uint64_t i = c * kChunk; i < std::min(count, (c + 1) * kChunk); ++i) out[i] = sampler(rng);
  });
  return out;
}

inline std::vector<double> first_coordinate(const std::vector<Color>& colors) {
  std::vector<double> out;
  out.reserve(colors.size());
  for (const auto& c : colors) out.push_back(to_real(c)[0]);
  return out;
}

inline double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size();
  return m % 2 ? v[m / 2] : 0.5 * (v[m / 2 - 1] + v[m / 2]);
}

}  // namespace detail

/// Grand representation on small instances: the urn and branching-chain exact
/// laws agree as rationals.
inline RunReport suite_representation_exact(const SuiteOptions&) {
  RunReport report;
  Stopwatch clock;
  const std::vector<std::pair<std::string, FiniteMatrix>> kernels = {
      {"flip", fixtures::flip()}, {"identity", fixtures::identity2()}, {"ergodic3", fixtures::ergodic3()}};
  const std::vector<std::pair<std::string, InitialConfig>> inits = {{"delta0", fixtures::delta0()},
                                                                    {"halves", fixtures::halves()}};
  std::size_t mismatches = 0, compared = 0;
  for (const auto& [kname, k] : kernels) {
    for (const auto& [iname, init] : inits) {
      for (std::size_t n = 1; n <= 4; ++n) {
        const bool equal = urn_exact_law(k, init, n) == rrt_exact_law(augment(k, init), n);
        ++compared;
        if (!equal) {
          ++mismatches;
          report.extra["mismatch"].push_back(kname + "/" + iname + "/n=" + std::to_string(n));
        }
      }
    }
  }
  auto eq = make_report("urn_law_equals_tree_law_mismatches", static_cast<double>(mismatches), 0.0, compared);
  report.tests.push_back(eq);

  const auto law3 = urn_exact_law(fixtures::flip(), fixtures::delta0(), 3);
  const Rational p1 = law3.marginal(1)[FiniteIdx{0}];
  const Rational p12 = law3.prefix_probability({FiniteIdx{0}, FiniteIdx{0}, FiniteIdx{0}});
  auto hand = make_report("flip_hand_values_mismatches",
                          static_cast<double>((p1 != Rational(1, 2)) + (p12 != Rational(1, 6))), 0.0, 2);
  hand.metadata["P(Z1=0)"] = p1.str();
  hand.metadata["P(Z1=0,Z2=0)"] = p12.str();
  report.tests.push_back(hand);
  report.tests.push_back(detail::runtime_check("representation_exact", clock.seconds(), 1.0));
  return report;
}

/// tau_n: moments at n = 1e4 and the standardized CLT at n = 1e6.
inline RunReport suite_tau_clt(const SuiteOptions& opt) {
  RunReport report;
  Stopwatch clock;
  constexpr std::uint64_t kSamples = 100'000;

  auto taus = [&](std::uint64_t n, std::uint64_t stream) {
    const auto colors = detail::draw_many(kSamples, opt, stream, [n](RandomSource& rng) -> Color {
      return FiniteIdx{sample_tau(n, rng)};
    });
    std::vector<double> out;
    out.reserve(colors.size());
    for (const auto& c : colors) out.push_back(static_cast<double>(std::get<FiniteIdx>(c).id));
    return out;
  };

  {
    const auto exact = tau_mean_var(10'000);
    const auto sample = taus(10'000, 1);
    const auto m = static_cast<double>(sample.size());
    double mean = 0.0;
    for (double t : sample) mean += t;
    mean /= m;
    double m2 = 0.0, m4 = 0.0;
    for (double t : sample) {
      const double d = t - mean;
      m2 += d * d;
      m4 += d * d * d * d;
    }
    const double var = m2 / (m - 1.0);
    m4 /= m;
    const double se_mean = std::sqrt(exact.variance / m);
    const double se_var = std::sqrt((m4 - var * var) / m);
    auto r1 = make_report("tau_mean_z_n1e4", std::abs(mean - exact.mean) / se_mean, 3.0, kSamples);
    r1.metadata["sample_mean"] = std::to_string(mean);
    r1.metadata["exact_mean"] = std::to_string(exact.mean);
    auto r2 = make_report("tau_variance_z_n1e4", std::abs(var - exact.variance) / se_var, 3.0, kSamples);
    r2.metadata["sample_variance"] = std::to_string(var);
    r2.metadata["exact_variance"] = std::to_string(exact.variance);
    report.tests.push_back(r1);
    report.tests.push_back(r2);
  }
  {
    const auto exact = tau_mean_var(1'000'000);
    const double sd = std::sqrt(exact.variance);
    auto sample = taus(1'000'000, 2);
    for (double& t : sample) t = (t - exact.mean) / sd;
    auto ks = ks_vs_cdf_lattice(sample, normal_cdf, 1.0 / sd, 0.02);
    ks.test_name = "tau_clt_ks_n1e6";
    report.tests.push_back(ks);
  }
  report.tests.push_back(detail::runtime_check("tau_clt", clock.seconds(), 60.0));
  return report;
}

/// Z_n from the direct urn against the marginal sampler at n = 1000.
inline RunReport suite_marginal_representation(const SuiteOptions& opt) {
  RunReport report;
  Stopwatch clock;
  constexpr std::uint64_t kSamples = 10'000;
  constexpr std::uint64_t kN = 1000;
  const std::vector<std::tuple<std::string, KernelSpec, InitialConfig>> cases = {
      {"flip", fixtures::flip(), fixtures::delta0()}, {"srw", fixtures::simple_walk(), fixtures::origin()}};
  std::uint64_t stream = 10;
  for (const auto& [name, kernel, init] : cases) {
    const auto direct = detail::draw_many(kSamples, opt, stream++, [&](RandomSource& rng) {
      return urn_last_color(kernel, init, kN + 1, rng);
    });
    const AugmentedKernel aug = augment(kernel, init);
    const auto marginal = detail::draw_many(kSamples, opt, stream++, [&](RandomSource& rng) {
      return marginal_color(aug, kN, rng);
    });
    auto ks = ks_two_sample(detail::first_coordinate(direct), detail::first_coordinate(marginal));
    ks.test_name = "marginal_vs_direct_ks_" + name;
    report.tests.push_back(ks);
  }
  report.tests.push_back(detail::runtime_check("marginal_representation", clock.seconds(), 120.0));
  return report;
}

/// U_n/(n+1) approaches pi for an ergodic 3-color kernel.
inline RunReport suite_ergodic_limit(const SuiteOptions& opt) {
  RunReport report;
  Stopwatch clock;
  constexpr std::uint64_t kSeeds = 20;
  const FiniteMatrix kernel = fixtures::ergodic3();
  const auto pi = stationary_distribution(kernel);
  Row target;
  for (std::size_t i = 0; i < pi.size(); ++i) target.emplace_back(FiniteIdx{i}, pi[i]);

  auto tv_at = [&](std::uint64_t n, std::uint64_t stream) {
    std::vector<double> tv(kSeeds);
    parallel_for(kSeeds, opt.threads, [&](std::uint64_t r) {
      RandomSource rng(derive_seed(opt.seed + stream, r));
      const auto t = urn_simulate(kernel, fixtures::delta0(), n, rng, {false, true});
      tv[r] = tv_distance(t.configuration, target);
    });
    return tv;
  };
  const auto tv_big = tv_at(100'000, 100);
  const auto tv_small = tv_at(1'000, 200);
  const auto failures = static_cast<double>(std::count_if(tv_big.begin(), tv_big.end(), [](double t) { return t >= 0.05; }));
  auto r1 = make_report("ergodic_tv_failures_n1e5", failures, 1.0, kSeeds);
  r1.metadata["max_tv"] = std::to_string(*std::max_element(tv_big.begin(), tv_big.end()));
  report.tests.push_back(r1);
  const double med_big = detail::median(tv_big);
  const double med_small = detail::median(tv_small);
  auto r2 = make_report("ergodic_median_tv_ratio_1e5_over_1e3", med_big / med_small, 1.0, kSeeds);
  r2.pass = med_big < med_small;
  r2.metadata["median_tv_n1e5"] = std::to_string(med_big);
  r2.metadata["median_tv_n1e3"] = std::to_string(med_small);
  report.tests.push_back(r2);
  report.tests.push_back(detail::runtime_check("ergodic_limit", clock.seconds(), 60.0));
  return report;
}

/// Block mass of a two-color Polya urn against Beta(1/2, 1/2) moments.
inline RunReport suite_dirichlet_limit(const SuiteOptions& opt) {
  RunReport report;
  Stopwatch clock;
  constexpr std::uint64_t kSamples = 10'000;
  constexpr std::uint64_t kN = 10'000;
  const auto kernel = BlockDiagonal::from_blocks({FiniteMatrix{{{1.0}}}, FiniteMatrix{{{1.0}}}});
  const auto moments = dirichlet_block_moments(block_limit(kernel, fixtures::halves()));
  std::vector<double> mass(kSamples);
  parallel_for(kSamples, opt.threads, [&](std::uint64_t r) {
    RandomSource rng(derive_seed(opt.seed + 300, r));
    UrnState state(kernel, fixtures::halves());
    for (std::uint64_t k = 0; k < kN; ++k) state.draw_slot(rng);
    mass[r] = state.weight_of(FiniteIdx{0}) / static_cast<double>(kN + 1);
  });
  double mean = 0.0;
  for (double x : mass) mean += x;
  mean /= static_cast<double>(kSamples);
  double var = 0.0;
  for (double x : mass) var += (x - mean) * (x - mean);
  var /= static_cast<double>(kSamples - 1);
  auto r1 = make_report("dirichlet_block_mean_error", std::abs(mean - moments[0].mean), 0.015, kSamples);
  r1.metadata["sample_mean"] = std::to_string(mean);
  auto r2 = make_report("dirichlet_block_variance_error", std::abs(var - moments[0].variance), 0.01, kSamples);
  r2.metadata["sample_variance"] = std::to_string(var);
  r2.metadata["limit_variance"] = std::to_string(moments[0].variance);
  report.tests.push_back(r1);
  report.tests.push_back(r2);
  report.tests.push_back(detail::runtime_check("dirichlet_limit", clock.seconds(), 60.0));
  return report;
}

inline constexpr std::uint64_t kHugeN = 1'000'000'000;

/// Simple random walk urn at n = 1e9 via the marginal sampler.
inline RunReport suite_gaussian_limit(const SuiteOptions& opt) {
  RunReport report;
  Stopwatch clock;
  constexpr std::uint64_t kSamples = 100'000;
  const AugmentedKernel aug = augment(fixtures::simple_walk(), fixtures::origin());
  const auto colors = detail::draw_many(kSamples, opt, 400, [&](RandomSource& rng) {
    return marginal_color(aug, kHugeN, rng);
  });
  const auto [scaling, law] = scaling_for(aug.base());
  std::vector<std::vector<double>> points;
  for (const auto& c : colors) points.push_back(to_real(c));
  const auto scaled = center_scale(points, static_cast<double>(kHugeN), scaling);
  std::vector<double> xs;
  for (const auto& p : scaled) xs.push_back(p[0]);
  const double sd = std::sqrt(std::get<Gaussian>(law.law).cov(0, 0));
  const double span = 1.0 / scaling.b(std::log(static_cast<double>(kHugeN)));
  auto ks = ks_vs_cdf_lattice(xs, [sd](double x) { return normal_cdf(x / sd); }, span, 0.05);
  ks.test_name = "srw_gaussian_ks_n1e9";
  report.tests.push_back(ks);
  report.tests.push_back(detail::runtime_check("gaussian_limit", clock.seconds(), 120.0));
  return report;
}

/// Honeycomb walk urn at n = 1e9: covariance of Z_n / sqrt(ln n) against I/2.
inline RunReport suite_hex_covariance(const SuiteOptions& opt) {
  RunReport report;
  Stopwatch clock;
  constexpr std::uint64_t kSamples = 100'000;
  const AugmentedKernel aug = augment(HexWalk{}, InitialConfig::point_mass(Hex{1, 0}));
  const auto colors = detail::draw_many(kSamples, opt, 500, [&](RandomSource& rng) {
    return marginal_color(aug, kHugeN, rng);
  });
  const auto [scaling, law] = scaling_for(aug.base());
  std::vector<std::vector<double>> points;
  for (const auto& c : colors) points.push_back(to_real(c));
  const auto stats = sample_mean_cov(center_scale(points, static_cast<double>(kHugeN), scaling));
  const auto& target = std::get<Gaussian>(law.law).cov;
  for (int i = 0; i < 2; ++i) {
    auto r = make_report("hex_cov_diag_rel_error_" + std::to_string(i),
                         std::abs(stats.cov(i, i) - target(i, i)) / target(i, i), 0.10, kSamples);
    r.metadata["empirical"] = std::to_string(stats.cov(i, i));
    report.tests.push_back(r);
  }
  auto off = make_report("hex_cov_offdiag_abs", std::abs(stats.cov(0, 1)), 0.05, kSamples);
  off.metadata["empirical"] = std::to_string(stats.cov(0, 1));
  report.tests.push_back(off);

  // sqrt(2) Z_n / sqrt(ln n) should be close to N(0, I); 2 Z_n / sqrt(ln n) would have covariance 2I.
  const double diag = 0.5 * (stats.cov(0, 0) + stats.cov(1, 1));
  auto norm = make_report("hex_normalizer_sqrt2_rel_error", std::abs(2.0 * diag - 1.0), 0.10, kSamples);
  norm.metadata["cov_diag_with_sqrt2_normalizer"] = std::to_string(2.0 * diag);
  norm.metadata["cov_diag_with_2_normalizer"] = std::to_string(4.0 * diag);
  norm.metadata["verdict"] = std::abs(2.0 * diag - 1.0) < std::abs(4.0 * diag - 1.0) ? "sqrt2" : "2";
  report.tests.push_back(norm);
  report.tests.push_back(detail::runtime_check("hex_covariance", clock.seconds(), 180.0));
  return report;
}

/// Heavy-tailed walk urns at n = 1e9: ECF tail-index fit for alpha = 1.5 and 0.8.
inline RunReport suite_stable_limit(const SuiteOptions& opt) {
  RunReport report;
  Stopwatch clock;
  constexpr std::uint64_t kSamples = 100'000;
  std::uint64_t stream = 600;
  for (double alpha : {1.5, 0.8}) {
    const AugmentedKernel aug = augment(StableWalk{alpha}, fixtures::origin());
    const auto colors = detail::draw_many(kSamples, opt, stream++, [&](RandomSource& rng) {
      return marginal_color(aug, kHugeN, rng);
    });
    const auto [scaling, law] = scaling_for(aug.base());
    std::vector<std::vector<double>> points;
    for (const auto& c : colors) points.push_back(to_real(c));
    std::vector<double> xs;
    for (const auto& p : center_scale(points, static_cast<double>(kHugeN), scaling)) xs.push_back(p[0]);
    const auto fit = stable_alpha_fit(xs);
    std::ostringstream name;
    name << "stable_alpha_hat_abs_error_alpha" << alpha;
    auto r = make_report(name.str(), std::abs(fit.alpha_hat - alpha), 0.15, kSamples);
    r.metadata["alpha_hat"] = std::to_string(fit.alpha_hat);
    r.metadata["sigma_hat"] = std::to_string(fit.sigma_hat);
    r.metadata["grid_points_used"] = std::to_string(fit.t_used.size());
    report.tests.push_back(r);
  }
  report.tests.push_back(detail::runtime_check("stable_limit", clock.seconds(), 180.0));
  return report;
}

/// Throughput of the direct engine and the marginal sampler's advantage.
inline RunReport suite_performance(const SuiteOptions& opt) {
  RunReport report;
  RandomSource rng(derive_seed(opt.seed, 900));
  auto time_direct = [&](const KernelSpec& kernel, const InitialConfig& init, std::uint64_t n, int repeats) {
    double best = 1e300;
    for (int k = 0; k < repeats; ++k) {
      UrnState state(kernel, init);
      Stopwatch sw;
      for (std::uint64_t i = 0; i < n; ++i) state.draw_slot(rng);
      best = std::min(best, sw.seconds());
    }
    return best;
  };

  const KernelSpec two_color = fixtures::two_state(0.3, 0.1);
  const double t_rate = time_direct(two_color, fixtures::delta0(), 1'000'000, 3);
  auto rate = make_report("direct_seconds_per_1e6_draws_2color", t_rate, 1.0, 1'000'000);
  rate.metadata["draws_per_second"] = std::to_string(1e6 / t_rate);
  report.tests.push_back(rate);

  const KernelSpec walk = fixtures::simple_walk();
  double previous = 0.0;
  for (std::uint64_t n : {100'000ULL, 200'000ULL, 400'000ULL}) {
    const double t = time_direct(walk, fixtures::origin(), n, 5);
    if (previous > 0.0) {
      auto r = make_report("direct_doubling_ratio_srw_n" + std::to_string(n), t / previous, 2.5, n);
      report.tests.push_back(r);
    }
    previous = t;
  }

  constexpr std::uint64_t kMarginalSamples = 2000;
  const AugmentedKernel aug = augment(walk, fixtures::origin());
  Stopwatch sw;
  for (std::uint64_t i = 0; i < kMarginalSamples; ++i) (void)marginal_color(aug, 1'000'000, rng);
  const double t_marginal = sw.seconds() / static_cast<double>(kMarginalSamples);
  const double t_full = time_direct(walk, fixtures::origin(), 1'000'001, 1);
  auto speed = make_report("marginal_vs_direct_time_ratio_n1e6", t_marginal / t_full, 0.01, kMarginalSamples);
  speed.metadata["speedup"] = std::to_string(t_full / t_marginal);
  report.tests.push_back(speed);
  return report;
}

/// Identical config and seed give byte-identical CSV outputs, for every method
/// and independent of the worker count.
inline RunReport suite_determinism(const SuiteOptions& opt) {
  RunReport report;
  const auto root = opt.output_dir.empty()
                        ? std::filesystem::temp_directory_path() / ("polya-determinism-" + std::to_string(opt.seed))
                        : std::filesystem::path(opt.output_dir) / "determinism";
  std::size_t compared = 0, differing = 0;
  auto make = [&](KernelSpec kernel, InitialConfig init, std::uint64_t n, std::uint64_t reps, Method method) {
    ExperimentConfig c;
    c.kernel = std::move(kernel);
    c.init = std::move(init);
    c.n = n;
    c.replications = reps;
    c.seed = opt.seed;
    c.method = method;
    return c;
  };
  const std::vector<std::pair<std::string, ExperimentConfig>> configs = {
      {"direct", make(fixtures::simple_walk(), fixtures::origin(), 2000, 6, Method::Direct)},
      {"branching", make(HexWalk{}, InitialConfig::point_mass(Hex{1, 0}), 2000, 6, Method::Branching)},
      {"marginal", make(StableWalk{1.5}, fixtures::origin(), 1'000'000, 500, Method::Marginal)},
  };
  for (auto [name, config] : configs) {
    std::vector<std::filesystem::path> dirs;
    for (unsigned threads : {1u, 1u, 3u}) {
      const auto dir = root / (name + "_run" + std::to_string(dirs.size()));
      std::filesystem::remove_all(dir);
      config.output_dir = dir.string();
      run_experiment(config, threads);
      dirs.push_back(dir);
    }
    for (const auto& entry : std::filesystem::directory_iterator(dirs[0])) {
      if (entry.path().extension() != ".csv") continue;
      const auto first = read_file(entry.path());
      for (std::size_t k = 1; k < dirs.size(); ++k) {
        ++compared;
        if (read_file(dirs[k] / entry.path().filename()) != first) {
          ++differing;
          report.extra["differing"].push_back(name + "/" + entry.path().filename().string());
        }
      }
    }
  }
  if (opt.output_dir.empty()) std::filesystem::remove_all(root);
  report.tests.push_back(make_report("determinism_differing_csv_files", static_cast<double>(differing), 0.0, compared));
  auto covered = make_report("determinism_csv_files_compared_missing", compared >= 8 ? 0.0 : 1.0, 0.0, compared);
  report.tests.push_back(covered);
  return report;
}

struct SuiteEntry {
  std::string name;
  std::string description;
  std::function<RunReport(const SuiteOptions&)> run;
};

inline const std::vector<SuiteEntry>& suites() {
  static const std::vector<SuiteEntry> all = {
      {"representation-exact", "urn and branching-chain exact laws agree (n <= 4)", suite_representation_exact},
      {"tau-clt", "tau_n moments at n=1e4 and standardized KS at n=1e6", suite_tau_clt},
      {"marginal-representation", "direct urn Z_n vs marginal sampler at n=1000", suite_marginal_representation},
      {"ergodic-limit", "TV(U_n/(n+1), pi) for an ergodic 3-color kernel", suite_ergodic_limit},
      {"dirichlet-limit", "Polya block mass vs Beta(1/2,1/2) moments", suite_dirichlet_limit},
      {"gaussian-limit", "SRW urn at n=1e9 vs normal, lattice-corrected KS", suite_gaussian_limit},
      {"hex-covariance", "honeycomb urn covariance at n=1e9 vs I/2", suite_hex_covariance},
      {"stable-limit", "tail index of heavy-tailed walk urns at n=1e9", suite_stable_limit},
      {"performance", "direct engine throughput and marginal speedup", suite_performance},
      {"determinism", "byte-identical CSV across reruns and worker counts", suite_determinism},
  };
  return all;
}

inline RunReport run_suite(const std::string& name, const SuiteOptions& opt = {}) {
  for (const auto& s : suites()) {
    if (s.name != name) continue;
    Stopwatch clock;
    RunReport report = s.run(opt);
    report.config = {{"suite", name}, {"seed", opt.seed}, {"threads", opt.threads}};
    report.timing.emplace_back("total", clock.seconds());
    if (!opt.output_dir.empty()) {
      const auto path = std::filesystem::path(opt.output_dir) / (name + ".json");
      report.files.push_back(path.string());
      write_file_atomic(path, run_report_to_json(report).dump(2) + "\n");
    }
    return report;
  }
  throw UnknownSuite("unknown suite '" + name + "'");
}

}  // namespace polya
