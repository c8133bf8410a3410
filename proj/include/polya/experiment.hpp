#pragma once

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "polya/io.hpp"
#include "polya/kernels.hpp"
#include "polya/random.hpp"
#include "polya/rrt.hpp"
#include "polya/stats.hpp"
#include "polya/urn.hpp"

namespace polya {

enum class Method { Direct, Branching, Marginal, Exact };

inline std::string to_string(Method m) {
  switch (m) {
    case Method::Direct: return "direct";
    case Method::Branching: return "branching";
    case Method::Marginal: return "marginal";
    case Method::Exact: return "exact";
  }
  return "direct";
}

inline Method parse_method(const std::string& s) {
  if (s == "direct") return Method::Direct;
  if (s == "branching") return Method::Branching;
  if (s == "marginal") return Method::Marginal;
  if (s == "exact") return Method::Exact;
  throw ConfigError("method", "expected one of direct, branching, marginal, exact; got '" + s + "'");
}

/// n is the number of draws (urn) or vertices (tree); every sampling method
/// reports Z_{n-1}, the color of the n-th draw, as its final color.
struct ExperimentConfig {
  KernelSpec kernel;
  InitialConfig init;
  std::uint64_t n = 0;
  std::uint64_t replications = 1;
  std::uint64_t seed = 0;
  Method method = Method::Direct;
  std::optional<std::string> suite;
  std::string output_dir = "out";
  bool record_history = true;

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

/// Checks the cross-field invariants. Throws ConfigError.
inline void validate_config(const ExperimentConfig& c) {
  if (auto err = validate_kernel(c.kernel)) throw ConfigError("kernel", err->what());
  try {
    validate_initial(c.kernel, c.init);
  } catch (const Error& e) {
    throw ConfigError("init", e.what());
  }
  if (c.replications == 0) throw ConfigError("replications", "must be >= 1");
  if (c.method == Method::Exact && c.n > 6) throw ConfigError("n", "method=exact requires n <= 6");
  if ((c.method == Method::Direct || c.method == Method::Exact) && !has_finite_rows(c.kernel)) {
    throw ConfigError("method", "InfiniteSupport: method=" + to_string(c.method) +
                                    " needs finitely supported rows; use branching or marginal");
  }
  if (c.method == Method::Marginal && c.n == 0) throw ConfigError("n", "method=marginal requires n >= 1");
}

inline ExperimentConfig parse_config(const json& j) {
  ExperimentConfig c;
  c.kernel = parse_kernel(detail::field(j, "kernel", "config"), "kernel");
  c.init = parse_initial(c.kernel, detail::field(j, "init", "config"), "init");
  c.n = detail::as<std::uint64_t>(detail::field(j, "n", "config"), "n");
  if (j.contains("replications")) c.replications = detail::as<std::uint64_t>(j.at("replications"), "replications");
  if (j.contains("seed")) c.seed = detail::as<std::uint64_t>(j.at("seed"), "seed");
  if (j.contains("method")) c.method = parse_method(detail::as<std::string>(j.at("method"), "method"));
  if (j.contains("suite") && !j.at("suite").is_null()) c.suite = detail::as<std::string>(j.at("suite"), "suite");
  if (j.contains("output_dir")) c.output_dir = detail::as<std::string>(j.at("output_dir"), "output_dir");
  if (j.contains("record_history")) c.record_history = detail::as<bool>(j.at("record_history"), "record_history");
  validate_config(c);
  return c;
}

inline json config_to_json(const ExperimentConfig& c) {
  json j = {{"kernel", kernel_to_json(c.kernel)},
            {"init", initial_to_json(c.init)},
            {"n", c.n},
            {"replications", c.replications},
            {"seed", c.seed},
            {"method", to_string(c.method)},
            {"output_dir", c.output_dir},
            {"record_history", c.record_history}};
  j["suite"] = c.suite ? json(*c.suite) : json(nullptr);
  return j;
}

struct RunReport {
  json config;
  std::vector<TestReport> tests;
  std::vector<std::pair<std::string, double>> timing;
  std::vector<std::string> files;
  json extra = json::object();

  bool passed() const {
    return std::all_of(tests.begin(), tests.end(), [](const TestReport& t) { return t.pass; });
  }
};

inline json run_report_to_json(const RunReport& r) {
  json tests = json::array();
  for (const auto& t : r.tests) tests.push_back(report_to_json(t));
  json timing = json::object();
  for (const auto& [phase, seconds] : r.timing) timing[phase] = seconds;
  json out = {{"config", r.config},
              {"rng", std::string(RandomSource::algorithm)},
              {"seed_derivation", "splitmix64(splitmix64(seed) ^ replication)"},
              {"tests", tests},
              {"timing_seconds", timing},
              {"files", r.files},
              {"pass", r.passed()}};
  for (const auto& [k, v] : r.extra.items()) out[k] = v;
  return out;
}

/// Runs body(r) for r in [0, count) on up to `threads` workers. Workers take
/// interleaved indices; callers store results by index so output order never
/// depends on scheduling.
inline void parallel_for(std::uint64_t count, unsigned threads, const std::function<void(std::uint64_t)>& body) {
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::min<std::uint64_t>(count, 1024))));
  if (threads <= 1) {
    for (std::uint64_t r = 0; r < count; ++r) body(r);
    return;
  }
  std::vector<std::exception_ptr> errors(threads);
  {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) {
      pool.emplace_back([&, t] {
        try {
          for (std::uint64_t r = t; r < count; r += threads) body(r);
        } catch (...) {
          errors[t] = std::current_exception();
        }
      });
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

class Stopwatch {
 public:
  Stopwatch() : start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }
  double lap() {
    const auto now = std::chrono::steady_clock::now();
    const double s = std::chrono::duration<double>(now - start_).count();
    start_ = now;
    return s;
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

namespace detail {

inline void emit(RunReport& report, const ExperimentConfig& c, const std::string& name, const std::string& body) {
  if (c.output_dir.empty()) return;
  const auto path = std::filesystem::path(c.output_dir) / name;
  write_file_atomic(path, body);
  report.files.push_back(path.string());
}

inline std::string final_colors_csv(const KernelSpec& spec, const std::vector<std::optional<Color>>& finals) {
  std::ostringstream os;
  os << csv_header({"replication"}, spec);
  for (std::size_t r = 0; r < finals.size(); ++r) {
    if (!finals[r]) continue;
    os << r << ',';
    write_color_fields(os, *finals[r]);
    os << '\n';
  }
  return os.str();
}

}  // namespace detail

/// Executes one configured experiment. Replication r draws from
/// RandomSource(derive_seed(seed, r)); results are merged in replication order.
inline RunReport run_experiment(const ExperimentConfig& config, unsigned threads = 1) {
  validate_config(config);
  RunReport report;
  report.config = config_to_json(config);
  Stopwatch clock;
  const auto& kernel = config.kernel;
  const auto reps = config.replications;

  switch (config.method) {
    case Method::Exact: {
      const ExactLaw law = urn_exact_law(kernel, config.init, config.n);
      report.timing.emplace_back("exact_urn", clock.lap());
      report.extra["exact_law"] = exact_law_to_json(law);
      if (config.n <= 5) {
        const ExactLaw tree = rrt_exact_law(augment(kernel, config.init), config.n);
        report.timing.emplace_back("exact_tree", clock.lap());
        auto t = make_report("representation_exact", law == tree ? 0.0 : 1.0, 0.0, law.outcomes.size());
        t.metadata["comparison"] = "urn_exact_law == rrt_exact_law";
        report.tests.push_back(std::move(t));
      }
      detail::emit(report, config, "exact_law.json", report.extra["exact_law"].dump(2) + "\n");
      break;
    }
    case Method::Direct: {
      std::vector<Trajectory> runs(reps);
      parallel_for(reps, threads, [&](std::uint64_t r) {
        RandomSource rng(derive_seed(config.seed, r));
        runs[r] = urn_simulate(kernel, config.init, config.n, rng, {true, true});
      });
      report.timing.emplace_back("simulate", clock.lap());
      std::vector<std::optional<Color>> finals(reps);
      json configurations = json::array();
      std::ostringstream traj;
      traj << csv_header({"replication", "step"}, kernel);
      for (std::uint64_t r = 0; r < reps; ++r) {
        if (!runs[r].history.empty()) finals[r] = runs[r].history.back();
        configurations.push_back(row_to_json(runs[r].configuration));
        if (!config.record_history) continue;
        for (std::size_t k = 0; k < runs[r].history.size(); ++k) {
          traj << r << ',' << k << ',';
          write_color_fields(traj, runs[r].history[k]);
          traj << '\n';
        }
      }
      if (config.record_history) detail::emit(report, config, "trajectories.csv", traj.str());
      detail::emit(report, config, "final_colors.csv", detail::final_colors_csv(kernel, finals));
      detail::emit(report, config, "configurations.json", configurations.dump(1) + "\n");
      report.timing.emplace_back("write", clock.lap());
      break;
    }
    case Method::Branching: {
      const AugmentedKernel aug = augment(kernel, config.init);
      std::vector<BranchingTrajectory> runs(reps);
      parallel_for(reps, threads, [&](std::uint64_t r) {
        RandomSource rng(derive_seed(config.seed, r));
        runs[r] = simulate_branching(aug, config.n, rng);
      });
      report.timing.emplace_back("simulate", clock.lap());
      std::vector<std::optional<Color>> finals(reps);
      std::ostringstream os;
      os << csv_header({"replication", "vertex", "parent"}, kernel);
      for (std::uint64_t r = 0; r < reps; ++r) {
        if (!runs[r].values.empty()) finals[r] = runs[r].values.back();
        if (!config.record_history) continue;
        for (std::size_t k = 0; k < runs[r].values.size(); ++k) {
          os << r << ',' << k << ',' << runs[r].parents[k] << ',';
          write_color_fields(os, runs[r].values[k]);
          os << '\n';
        }
      }
      if (config.record_history) detail::emit(report, config, "branching.csv", os.str());
      detail::emit(report, config, "final_colors.csv", detail::final_colors_csv(kernel, finals));
      report.timing.emplace_back("write", clock.lap());
      break;
    }
    case Method::Marginal: {
      const AugmentedKernel aug = augment(kernel, config.init);
      std::vector<std::optional<Color>> finals(reps);
      parallel_for(reps, threads, [&](std::uint64_t r) {
        RandomSource rng(derive_seed(config.seed, r));
        finals[r] = marginal_color(aug, config.n - 1, rng);
      });
      report.timing.emplace_back("simulate", clock.lap());
      detail::emit(report, config, "final_colors.csv", detail::final_colors_csv(kernel, finals));
      report.timing.emplace_back("write", clock.lap());
      break;
    }
  }
  if (!config.output_dir.empty()) {
    const auto path = std::filesystem::path(config.output_dir) / "report.json";
    report.files.push_back(path.string());
    write_file_atomic(path, run_report_to_json(report).dump(2) + "\n");
  }
  return report;
}

struct BenchRow {
  std::string method;
  std::uint64_t n = 0;
  double seconds = 0.0;       // one direct trajectory, or one marginal sample
  double per_second = 0.0;    // draws/s (direct) or samples/s (marginal)
  double doubling_ratio = 0.0;  // seconds(n) / seconds(n/2) within the method, 0 for the first size
};

/// Best-of-`repeats` timing of the direct engine and of the marginal sampler at
/// n, 2n and 4n.
inline std::vector<BenchRow> bench(const ExperimentConfig& config, int repeats = 3,
                                   std::uint64_t marginal_samples = 1000) {
  validate_config(config);
  std::vector<BenchRow> rows;
  const std::uint64_t base = std::max<std::uint64_t>(config.n, 1);
  const std::vector<std::uint64_t> sizes = {base, 2 * base, 4 * base};
  RandomSource rng(derive_seed(config.seed, 0));
  if (has_finite_rows(config.kernel)) {
    double previous = 0.0;
    for (auto n : sizes) {
      double best = 1e300;
      for (int k = 0; k < repeats; ++k) {
        UrnState state(config.kernel, config.init);
        Stopwatch sw;
        for (std::uint64_t i = 0; i < n; ++i) state.draw_slot(rng);
        best = std::min(best, sw.seconds());
      }
      rows.push_back({"direct", n, best, static_cast<double>(n) / best, previous > 0.0 ? best / previous : 0.0});
      previous = best;
    }
  }
  const AugmentedKernel aug = augment(config.kernel, config.init);
  double previous = 0.0;
  for (auto n : sizes) {
    double best = 1e300;
    for (int k = 0; k < repeats; ++k) {
      Stopwatch sw;
      for (std::uint64_t i = 0; i < marginal_samples; ++i) (void)marginal_color(aug, n - 1, rng);
      best = std::min(best, sw.seconds() / static_cast<double>(marginal_samples));
    }
    rows.push_back({"marginal", n, best, 1.0 / best, previous > 0.0 ? best / previous : 0.0});
    previous = best;
  }
  return rows;
}

inline std::string bench_csv(const std::vector<BenchRow>& rows) {
  std::ostringstream os;
  os << "method,n,seconds,per_second,doubling_ratio,direct_over_marginal\n";
  for (const auto& r : rows) {
    double speedup = 0.0;
    if (r.method == "marginal") {
      for (const auto& d : rows) {
        if (d.method == "direct" && d.n == r.n) speedup = d.seconds / r.seconds;
      }
    }
    os << r.method << ',' << r.n << ',' << std::setprecision(6) << r.seconds << ',' << r.per_second << ','
       << r.doubling_ratio << ',' << speedup << '\n';
  }
  return os.str();
}

}  // namespace polya
