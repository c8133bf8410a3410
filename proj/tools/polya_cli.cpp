// Command-line runner for urn experiments, acceptance suites and benchmarks.
//
//   polya simulate --config exp.json [--seed S] [--out DIR] [--replications K] [--threads T]
//   polya exact    --config exp.json [--out DIR]
//   polya suite <name|all|list> [--seed S] [--out DIR] [--threads T]
//   polya bench    --config exp.json [--out DIR]
//
// Exit status is 0 iff every executed test passed; 2 on configuration or engine errors.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "polya/polya.hpp"

namespace {

struct Overrides {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::uint64_t> replications;
  unsigned threads = 1;
};

polya::ExperimentConfig load(const Overrides& o) {
  const auto text = polya::read_file(o.config_path);
  polya::json j;
  try {
    j = polya::json::parse(text);
  } catch (const polya::json::exception& e) {
    throw polya::ConfigError(o.config_path, e.what());
  }
  if (o.seed) j["seed"] = *o.seed;
  if (o.out) j["output_dir"] = *o.out;
  if (o.replications) j["replications"] = *o.replications;
  return polya::parse_config(j);
}

void print_tests(const polya::RunReport& report) {
  for (const auto& t : report.tests) {
    std::cout << (t.pass ? "[PASS] " : "[FAIL] ") << t.test_name << ": statistic=" << t.statistic
              << " threshold=" << t.threshold << "\n";
  }
}

int run_simulate(const Overrides& o, std::optional<polya::Method> force) {
  auto config = load(o);
  if (force) {
    config.method = *force;
    polya::validate_config(config);
  }
  const auto report = polya::run_experiment(config, o.threads);
  print_tests(report);
  for (const auto& f : report.files) std::cout << "wrote " << f << "\n";
  if (config.method == polya::Method::Exact) {
    for (const auto& row : report.extra.at("exact_law")) {
      std::cout << row.at("sequence").dump() << " " << row.at("probability").get<std::string>() << "\n";
    }
  }
  return report.passed() ? 0 : 1;
}

int run_suites(const std::string& name, const Overrides& o) {
  polya::SuiteOptions opt;
  if (o.seed) opt.seed = *o.seed;
  if (o.out) opt.output_dir = *o.out;
  opt.threads = o.threads;
  if (name == "list") {
    for (const auto& s : polya::suites()) std::cout << s.name << "\t" << s.description << "\n";
    return 0;
  }
  bool ok = true;
  for (const auto& s : polya::suites()) {
    if (name != "all" && s.name != name) continue;
    const auto report = polya::run_suite(s.name, opt);
    std::cout << "== " << s.name << (report.passed() ? " PASS" : " FAIL") << "\n";
    print_tests(report);
    ok = ok && report.passed();
  }
  if (name != "all") {
    bool known = false;
    for (const auto& s : polya::suites()) known = known || s.name == name;
    if (!known) throw polya::UnknownSuite("unknown suite '" + name + "' (try: polya suite list)");
  }
  return ok ? 0 : 1;
}

int run_bench(const Overrides& o) {
  const auto config = load(o);
  const auto csv = polya::bench_csv(polya::bench(config));
  std::cout << csv;
  if (!config.output_dir.empty()) {
    const auto path = std::filesystem::path(config.output_dir) / "bench.csv";
    polya::write_file_atomic(path, csv);
    std::cout << "wrote " << path.string() << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Balanced Polya urn simulator and verification harness"};
  app.require_subcommand(1);
  Overrides o;
  std::string suite_name;

  auto add_common = [&](CLI::App* cmd, bool needs_config) {
    if (needs_config) cmd->add_option("--config", o.config_path, "experiment JSON")->required()->check(CLI::ExistingFile);
    cmd->add_option("--seed", o.seed, "64-bit base seed");
    cmd->add_option("--out", o.out, "output directory");
    cmd->add_option("--replications", o.replications, "replication count");
    cmd->add_option("--threads", o.threads, "worker threads")->check(CLI::PositiveNumber);
  };
  auto* simulate = app.add_subcommand("simulate", "run the configured experiment");
  add_common(simulate, true);
  auto* exact = app.add_subcommand("exact", "exact rational law of the first n draws (n <= 6)");
  add_common(exact, true);
  auto* suite = app.add_subcommand("suite", "run an acceptance suite (name, 'all' or 'list')");
  suite->add_option("name", suite_name, "suite name")->required();
  add_common(suite, false);
  auto* benchmark = app.add_subcommand("bench", "time direct vs marginal sampling at n, 2n, 4n");
  add_common(benchmark, true);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*simulate) return run_simulate(o, std::nullopt);
    if (*exact) return run_simulate(o, polya::Method::Exact);
    if (*suite) return run_suites(suite_name, o);
    if (*benchmark) return run_bench(o);
  } catch (const polya::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
