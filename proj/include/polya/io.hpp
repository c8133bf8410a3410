#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include <json.hpp>

#include "polya/asymptotics.hpp"
#include "polya/color.hpp"
#include "polya/error.hpp"
#include "polya/kernels.hpp"
#include "polya/rational.hpp"
#include "polya/rrt.hpp"
#include "polya/stats.hpp"
#include "polya/urn.hpp"

namespace polya {

using nlohmann::json;

// Kernel JSON schema, tagged by "type":
//   {"type": "finite", "rows": [[..], ..]}
//   {"type": "block_diagonal", "blocks": [[[..]], ..]}
//     or {"type": "block_diagonal", "rows": [[..]], "block_offsets": [0, ..]}
//   {"type": "lattice_walk", "increment": [{"step": [..], "p": ..}, ..]}
//   {"type": "stable_walk", "alpha": a}
//   {"type": "periodic_walk", "increments": [[{"step": [..], "p": ..}, ..], ..]}
//   {"type": "hex_walk"}
// Colors: finite -> integer; lattice and stable -> integer array;
// periodic -> {"coords": [..], "phase": i}; hex -> [a, b].
// Initial configuration: {"atoms": [{"color": c, "weight": w}, ..]}.

namespace detail {

inline const json& field(const json& j, const std::string& key, const std::string& path) {
  if (!j.is_object() || !j.contains(key)) throw ConfigError(path + "." + key, "missing field");
  return j.at(key);
}

template <class T>
T as(const json& j, const std::string& path) {
  try {
    return j.get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(path, e.what());
  }
}

template <class T>
DiscreteLaw<T> parse_law(const json& j, const std::string& path, std::size_t& dim) {
  if (!j.is_array()) throw ConfigError(path, "expected an array of {step, p}");
  DiscreteLaw<T> law;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string p = path + "[" + std::to_string(i) + "]";
    Atom<T> atom{as<std::vector<T>>(field(j[i], "step", p), p + ".step"),
                 as<double>(field(j[i], "p", p), p + ".p")};
    if (dim == 0) dim = atom.step.size();
    law.push_back(std::move(atom));
  }
  return law;
}

template <class T>
json law_to_json(const DiscreteLaw<T>& law) {
  json out = json::array();
  for (const auto& a : law) out.push_back({{"step", a.step}, {"p", a.p}});
  return out;
}

}  // namespace detail

inline KernelSpec parse_kernel(const json& j, const std::string& path = "kernel") {
  const auto type = detail::as<std::string>(detail::field(j, "type", path), path + ".type");
  if (type == "finite") {
    return FiniteMatrix{detail::as<std::vector<std::vector<double>>>(detail::field(j, "rows", path), path + ".rows")};
  }
  if (type == "block_diagonal") {
    if (j.contains("blocks")) {
      std::vector<FiniteMatrix> blocks;
      for (const auto& b : detail::as<std::vector<std::vector<std::vector<double>>>>(j.at("blocks"), path + ".blocks")) {
        blocks.push_back(FiniteMatrix{b});
      }
      return BlockDiagonal::from_blocks(blocks);
    }
    return BlockDiagonal{
        FiniteMatrix{detail::as<std::vector<std::vector<double>>>(detail::field(j, "rows", path), path + ".rows")},
        detail::as<std::vector<std::size_t>>(detail::field(j, "block_offsets", path), path + ".block_offsets")};
  }
  if (type == "lattice_walk") {
    LatticeWalk w;
    w.dim = 0;
    w.increment = detail::parse_law<std::int64_t>(detail::field(j, "increment", path), path + ".increment", w.dim);
    return w;
  }
  if (type == "stable_walk") {
    return StableWalk{detail::as<double>(detail::field(j, "alpha", path), path + ".alpha")};
  }
  if (type == "periodic_walk") {
    PeriodicWalk w;
    w.dim = 0;
    const auto& laws = detail::field(j, "increments", path);
    if (!laws.is_array()) throw ConfigError(path + ".increments", "expected an array of laws");
    for (std::size_t i = 0; i < laws.size(); ++i) {
      w.increment_laws.push_back(
          detail::parse_law<double>(laws[i], path + ".increments[" + std::to_string(i) + "]", w.dim));
    }
    return w;
  }
  if (type == "hex_walk") return HexWalk{};
  throw ConfigError(path + ".type", "unknown kernel type '" + type + "'");
}

inline json kernel_to_json(const KernelSpec& spec) {
  struct Visitor {
    json operator()(const FiniteMatrix& m) const { return {{"type", "finite"}, {"rows", m.rows}}; }
    json operator()(const BlockDiagonal& b) const {
      return {{"type", "block_diagonal"}, {"rows", b.matrix.rows}, {"block_offsets", b.block_offsets}};
    }
    json operator()(const LatticeWalk& w) const {
      return {{"type", "lattice_walk"}, {"increment", detail::law_to_json(w.increment)}};
    }
    json operator()(const StableWalk& s) const { return {{"type", "stable_walk"}, {"alpha", s.alpha}}; }
    json operator()(const PeriodicWalk& w) const {
      json laws = json::array();
      for (const auto& law : w.increment_laws) laws.push_back(detail::law_to_json(law));
      return {{"type", "periodic_walk"}, {"increments", laws}};
    }
    json operator()(const HexWalk&) const { return {{"type", "hex_walk"}}; }
  };
  return std::visit(Visitor{}, spec);
}

inline Color parse_color(const KernelSpec& spec, const json& j, const std::string& path) {
  Color c = std::visit(
      [&](const auto& k) -> Color {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, FiniteMatrix> || std::is_same_v<T, BlockDiagonal>) {
          return FiniteIdx{detail::as<std::uint64_t>(j, path)};
        } else if constexpr (std::is_same_v<T, LatticeWalk> || std::is_same_v<T, StableWalk>) {
          return Lattice{detail::as<std::vector<std::int64_t>>(j, path)};
        } else if constexpr (std::is_same_v<T, PeriodicWalk>) {
          return Phased{detail::as<std::vector<double>>(detail::field(j, "coords", path), path + ".coords"),
                        detail::as<int>(detail::field(j, "phase", path), path + ".phase")};
        } else {
          const auto ab = detail::as<std::vector<std::int64_t>>(j, path);
          if (ab.size() != 2) throw ConfigError(path, "hex colors are [a, b]");
          return Hex{ab[0], ab[1]};
        }
      },
      spec);
  if (!in_space(spec, c)) throw ConfigError(path, "color " + to_string(c) + " is outside the kernel's space");
  return c;
}

inline json color_to_json(const Color& c) {
  struct Visitor {
    json operator()(const FiniteIdx& f) const { return f.id; }
    json operator()(const Lattice& l) const { return l.coords; }
    json operator()(const Phased& p) const { return {{"coords", p.coords}, {"phase", p.phase}}; }
    json operator()(const Hex& h) const { return json::array({h.a, h.b}); }
  };
  return std::visit(Visitor{}, c);
}

inline InitialConfig parse_initial(const KernelSpec& spec, const json& j, const std::string& path = "init") {
  const auto& atoms = detail::field(j, "atoms", path);
  if (!atoms.is_array()) throw ConfigError(path + ".atoms", "expected an array");
  InitialConfig init;
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    const std::string p = path + ".atoms[" + std::to_string(i) + "]";
    init.atoms.emplace_back(parse_color(spec, detail::field(atoms[i], "color", p), p + ".color"),
                            detail::as<double>(detail::field(atoms[i], "weight", p), p + ".weight"));
  }
  return init;
}

inline json initial_to_json(const InitialConfig& init) {
  json atoms = json::array();
  for (const auto& [c, w] : init.atoms) atoms.push_back({{"color", color_to_json(c)}, {"weight", w}});
  return {{"atoms", atoms}};
}

inline json row_to_json(const Row& row) {
  json out = json::array();
  for (const auto& [c, w] : row) out.push_back({{"color", color_to_json(c)}, {"weight", w}});
  return out;
}

/// Sequences with their probabilities as exact "p/q" strings.
inline json exact_law_to_json(const ExactLaw& law) {
  json out = json::array();
  for (const auto& [seq, p] : law.outcomes) {
    json s = json::array();
    for (const auto& c : seq) s.push_back(color_to_json(c));
    out.push_back({{"sequence", s}, {"probability", p.str()}});
  }
  return out;
}

inline json limit_law_to_json(const LimitLaw& law) {
  struct Visitor {
    json operator()(const PointMass& p) const { return {{"type", "point_mass"}, {"atoms", row_to_json(p.atoms)}}; }
    json operator()(const Gaussian& g) const {
      json cov = json::array();
      for (Eigen::Index i = 0; i < g.cov.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index k = 0; k < g.cov.cols(); ++k) row.push_back(g.cov(i, k));
        cov.push_back(row);
      }
      return {{"type", "gaussian"}, {"mean", std::vector<double>(g.mean.data(), g.mean.data() + g.mean.size())}, {"cov", cov}};
    }
    json operator()(const SaS& s) const {
      return {{"type", "sas"}, {"alpha", s.alpha}, {"sigma", std::isnan(s.sigma) ? json(nullptr) : json(s.sigma)}};
    }
    json operator()(const Convolved& c) const {
      return {{"type", "convolved"},
              {"base", limit_law_to_json(*c.base)},
              {"extra_var", c.extra_var},
              {"direction", std::vector<double>(c.direction.data(), c.direction.data() + c.direction.size())}};
    }
  };
  return std::visit(Visitor{}, law.law);
}

inline json report_to_json(const TestReport& r) {
  return {{"test_name", r.test_name},
          {"statistic", r.statistic},
          {"threshold", r.threshold},
          {"sample_size", r.sample_size},
          {"pass", r.pass},
          {"metadata", r.metadata}};
}

/// CSV column names for the components of colors of this kernel.
inline std::vector<std::string> color_columns(const KernelSpec& spec) {
  return std::visit(
      [](const auto& k) -> std::vector<std::string> {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, FiniteMatrix> || std::is_same_v<T, BlockDiagonal>) {
          return {"color"};
        } else if constexpr (std::is_same_v<T, LatticeWalk> || std::is_same_v<T, PeriodicWalk>) {
          std::vector<std::string> cols;
          for (std::size_t i = 0; i < k.dim; ++i) cols.push_back("x" + std::to_string(i));
          if constexpr (std::is_same_v<T, PeriodicWalk>) cols.emplace_back("phase");
          return cols;
        } else if constexpr (std::is_same_v<T, StableWalk>) {
          return {"x0"};
        } else {
          return {"a", "b"};
        }
      },
      spec);
}

/// Exact textual components; reals use 17 significant digits.
inline void write_color_fields(std::ostream& os, const Color& c) {
  std::visit(
      [&os](const auto& v) {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, FiniteIdx>) {
          os << v.id;
        } else if constexpr (std::is_same_v<T, Lattice>) {
          for (std::size_t i = 0; i < v.coords.size(); ++i) os << (i ? "," : "") << v.coords[i];
        } else if constexpr (std::is_same_v<T, Phased>) {
          for (double x : v.coords) os << std::setprecision(17) << x << ',';
          os << v.phase;
        } else {
          os << v.a << ',' << v.b;
        }
      },
      c);
}

inline std::string csv_header(const std::vector<std::string>& leading, const KernelSpec& spec) {
  std::string out;
  for (const auto& c : leading) out += c + ",";
  const auto cols = color_columns(spec);
  for (std::size_t i = 0; i < cols.size(); ++i) out += (i ? "," : "") + cols[i];
  return out + "\n";
}

/// step, color components.
inline std::string trajectory_csv(const KernelSpec& spec, const std::vector<Color>& history) {
  std::ostringstream os;
  os << csv_header({"step"}, spec);
  for (std::size_t k = 0; k < history.size(); ++k) {
    os << k << ',';
    write_color_fields(os, history[k]);
    os << '\n';
  }
  return os.str();
}

/// vertex, parent, color components.
inline std::string branching_csv(const KernelSpec& spec, const BranchingTrajectory& t) {
  std::ostringstream os;
  os << csv_header({"vertex", "parent"}, spec);
  for (std::size_t k = 0; k < t.values.size(); ++k) {
    os << k << ',' << t.parents[k] << ',';
    write_color_fields(os, t.values[k]);
    os << '\n';
  }
  return os.str();
}

/// Writes via a temporary sibling and rename, so readers never see partial files.
inline void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open " + tmp.string() + " for writing");
    out << contents;
    if (!out) throw Error("failed writing " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(path.string(), "cannot open file");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

}  // namespace polya
