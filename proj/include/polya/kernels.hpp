#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <optional>
#include <queue>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "polya/color.hpp"
#include "polya/error.hpp"
#include "polya/random.hpp"

namespace polya {

/// Row sums must be within this distance of 1.
inline constexpr double kStochasticTolerance = 1e-12;

template <class T>
struct Atom {
  std::vector<T> step;
  double p = 0.0;
  friend bool operator==(const Atom&, const Atom&) = default;
};

template <class T>
using DiscreteLaw = std::vector<Atom<T>>;

struct FiniteMatrix {
  std::vector<std::vector<double>> rows;
  std::size_t size() const noexcept { return rows.size(); }
  friend bool operator==(const FiniteMatrix&, const FiniteMatrix&) = default;
};

/// Finite matrix whose colors are partitioned into contiguous blocks
/// [block_offsets[i], block_offsets[i+1]); no row may charge a foreign block.
struct BlockDiagonal {
  FiniteMatrix matrix;
  std::vector<std::size_t> block_offsets;

  friend bool operator==(const BlockDiagonal&, const BlockDiagonal&) = default;

  static BlockDiagonal from_blocks(const std::vector<FiniteMatrix>& blocks) {
    BlockDiagonal out;
    std::size_t m = 0;
    for (const auto& b : blocks) m += b.size();
    out.matrix.rows.assign(m, std::vector<double>(m, 0.0));
    std::size_t offset = 0;
    for (const auto& b : blocks) {
      out.block_offsets.push_back(offset);
      for (std::size_t i = 0; i < b.size(); ++i) {
        for (std::size_t j = 0; j < b.rows[i].size(); ++j) {
          out.matrix.rows[offset + i][offset + j] = b.rows[i][j];
        }
      }
      offset += b.size();
    }
    return out;
  }

  std::size_t block_count() const noexcept { return block_offsets.size(); }
  std::size_t block_of(std::size_t color) const {
    auto it = std::upper_bound(block_offsets.begin(), block_offsets.end(), color);
    return static_cast<std::size_t>(it - block_offsets.begin()) - 1;
  }
  std::size_t block_end(std::size_t block) const {
    return block + 1 < block_offsets.size() ? block_offsets[block + 1] : matrix.size();
  }
};

/// R(u, v) = p(v - u) on Z^d.
struct LatticeWalk {
  std::size_t dim = 1;
  DiscreteLaw<std::int64_t> increment;
  friend bool operator==(const LatticeWalk&, const LatticeWalk&) = default;
};

/// Walk on Z with increments sign * ceil(V), V ~ Pareto(alpha) on [1, inf),
/// sign uniform on {-1, +1} and independent of V; P(|Y| > n) = n^-alpha.
struct StableWalk {
  double alpha = 1.5;
  friend bool operator==(const StableWalk&, const StableWalk&) = default;
};

/// k-periodic walk on R^d; from phase i the increment has law increment_laws[i]
/// and the phase advances to (i + 1) mod k.
struct PeriodicWalk {
  std::size_t dim = 1;
  std::vector<DiscreteLaw<double>> increment_laws;
  std::size_t period() const noexcept { return increment_laws.size(); }
  friend bool operator==(const PeriodicWalk&, const PeriodicWalk&) = default;
};

/// Nearest-neighbour walk on the honeycomb lattice: uniform over {1, w, w^2}
/// from V1 and over {-1, -w, -w^2} from V2.
struct HexWalk {
  friend bool operator==(const HexWalk&, const HexWalk&) = default;
};

using KernelSpec =
    std::variant<FiniteMatrix, BlockDiagonal, LatticeWalk, StableWalk, PeriodicWalk, HexWalk>;

/// U_0: a finitely supported probability on the color space.
struct InitialConfig {
  std::vector<std::pair<Color, double>> atoms;

  static InitialConfig point_mass(Color c) { return {{{std::move(c), 1.0}}}; }
  friend bool operator==(const InitialConfig&, const InitialConfig&) = default;
};

using Row = std::vector<std::pair<Color, double>>;

namespace detail {

inline std::optional<ValidationError> check_weights(std::size_t row,
                                                    const std::vector<double>& weights) {
  double sum = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) {
      return ValidationError(ValidationError::Kind::NegativeWeight, row, w,
                             "row " + std::to_string(row) + " has negative weight " +
                                 std::to_string(w));
    }
    sum += w;
  }
  if (std::abs(sum - 1.0) > kStochasticTolerance) {
    return ValidationError(ValidationError::Kind::NonStochasticRow, row, sum,
                           "row " + std::to_string(row) + " sums to " + std::to_string(sum));
  }
  return std::nullopt;
}

template <class T>
std::optional<ValidationError> check_law(std::size_t row, const DiscreteLaw<T>& law,
                                         std::size_t dim) {
  std::vector<double> weights;
  for (const auto& atom : law) {
    if (atom.step.size() != dim) {
      return ValidationError(ValidationError::Kind::Malformed, row, 0.0,
                             "increment of dimension " + std::to_string(atom.step.size()) +
                                 ", expected " + std::to_string(dim));
    }
    weights.push_back(atom.p);
  }
  if (law.empty()) {
    return ValidationError(ValidationError::Kind::NonStochasticRow, row, 0.0,
                           "empty increment law");
  }
  return check_weights(row, weights);
}

inline std::optional<ValidationError> check_matrix(const FiniteMatrix& m) {
  if (m.rows.empty()) {
    return ValidationError(ValidationError::Kind::Malformed, 0, 0.0, "empty matrix");
  }
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (m.rows[i].size() != m.size()) {
      return ValidationError(ValidationError::Kind::Malformed, i, 0.0,
                             "matrix is not square at row " + std::to_string(i));
    }
    if (auto err = check_weights(i, m.rows[i])) return err;
  }
  return std::nullopt;
}

template <class T>
void normalize_law(DiscreteLaw<T>& law) {
  double sum = 0.0;
  for (const auto& a : law) sum += a.p;
  for (auto& a : law) a.p /= sum;
}

inline void normalize_row(std::vector<double>& row) {
  const double sum = std::accumulate(row.begin(), row.end(), 0.0);
  for (double& w : row) w /= sum;
}

template <class T>
const Atom<T>& pick(const DiscreteLaw<T>& law, RandomSource& rng) {
  double u = rng.uniform01();
  for (const auto& atom : law) {
    if (u < atom.p) return atom;
    u -= atom.p;
  }
  // Rounding left u just above the last cumulative weight.
  for (auto it = law.rbegin(); it != law.rend(); ++it) {
    if (it->p > 0.0) return *it;
  }
  return law.back();
}

inline std::size_t pick_index(const std::vector<double>& row, RandomSource& rng) {
  double u = rng.uniform01();
  for (std::size_t j = 0; j < row.size(); ++j) {
    if (u < row[j]) return j;
    u -= row[j];
  }
  for (std::size_t j = row.size(); j-- > 0;) {
    if (row[j] > 0.0) return j;
  }
  return 0;
}

inline const FiniteMatrix& matrix_of(const KernelSpec& spec) {
  if (const auto* m = std::get_if<FiniteMatrix>(&spec)) return *m;
  return std::get<BlockDiagonal>(spec).matrix;
}

inline std::size_t finite_id(const Color& c, std::size_t m) {
  const auto* f = std::get_if<FiniteIdx>(&c);
  if (!f || f->id >= m) throw ColorOutOfSpace("color " + to_string(c) + " outside {0.." + std::to_string(m - 1) + "}");
  return static_cast<std::size_t>(f->id);
}

}  // namespace detail

/// Checks balancedness and block constraints; nullopt means the kernel is valid.
inline std::optional<ValidationError> validate_kernel(const KernelSpec& spec) {
  struct Visitor {
    std::optional<ValidationError> operator()(const FiniteMatrix& m) const {
      return detail::check_matrix(m);
    }
    std::optional<ValidationError> operator()(const BlockDiagonal& b) const {
      if (auto err = detail::check_matrix(b.matrix)) return err;
      const auto& offs = b.block_offsets;
      if (offs.empty() || offs.front() != 0 || !std::is_sorted(offs.begin(), offs.end()) ||
          std::adjacent_find(offs.begin(), offs.end()) != offs.end() ||
          offs.back() >= b.matrix.size()) {
        return ValidationError(ValidationError::Kind::Malformed, 0, 0.0,
                               "block offsets must start at 0 and increase strictly");
      }
      for (std::size_t i = 0; i < b.matrix.size(); ++i) {
        const std::size_t blk = b.block_of(i);
        for (std::size_t j = 0; j < b.matrix.size(); ++j) {
          const bool inside = j >= offs[blk] && j < b.block_end(blk);
          if (!inside && b.matrix.rows[i][j] != 0.0) {
            return ValidationError(ValidationError::Kind::BlockLeak, i, b.matrix.rows[i][j],
                                   "row " + std::to_string(i) + " charges color " +
                                       std::to_string(j) + " outside its block");
          }
        }
      }
      return std::nullopt;
    }
    std::optional<ValidationError> operator()(const LatticeWalk& w) const {
      if (w.dim == 0) {
        return ValidationError(ValidationError::Kind::Malformed, 0, 0.0, "dimension must be >= 1");
      }
      return detail::check_law(0, w.increment, w.dim);
    }
    std::optional<ValidationError> operator()(const StableWalk& s) const {
      if (!(s.alpha > 0.0 && s.alpha <= 2.0)) {
        return ValidationError(ValidationError::Kind::Malformed, 0, s.alpha,
                               "alpha must lie in (0, 2]");
      }
      return std::nullopt;
    }
    std::optional<ValidationError> operator()(const PeriodicWalk& w) const {
      if (w.dim == 0 || w.increment_laws.empty()) {
        return ValidationError(ValidationError::Kind::Malformed, 0, 0.0,
                               "periodic walk needs dim >= 1 and k >= 1 laws");
      }
      for (std::size_t i = 0; i < w.period(); ++i) {
        if (auto err = detail::check_law(i, w.increment_laws[i], w.dim)) return err;
      }
      return std::nullopt;
    }
    std::optional<ValidationError> operator()(const HexWalk&) const { return std::nullopt; }
  };
  return std::visit(Visitor{}, spec);
}

/// Validates and renormalizes rows that pass the tolerance check. Throws ValidationError.
inline KernelSpec validated(KernelSpec spec) {
  if (auto err = validate_kernel(spec)) throw *err;
  std::visit(
      [](auto& k) {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, FiniteMatrix>) {
          for (auto& r : k.rows) detail::normalize_row(r);
        } else if constexpr (std::is_same_v<T, BlockDiagonal>) {
          for (auto& r : k.matrix.rows) detail::normalize_row(r);
        } else if constexpr (std::is_same_v<T, LatticeWalk>) {
          detail::normalize_law(k.increment);
        } else if constexpr (std::is_same_v<T, PeriodicWalk>) {
          for (auto& law : k.increment_laws) detail::normalize_law(law);
        }
      },
      spec);
  return spec;
}

inline bool in_space(const KernelSpec& spec, const Color& c) {
  struct Visitor {
    const Color& c;
    bool operator()(const FiniteMatrix& m) const {
      const auto* f = std::get_if<FiniteIdx>(&c);
      return f && f->id < m.size();
    }
    bool operator()(const BlockDiagonal& b) const { return (*this)(b.matrix); }
    bool operator()(const LatticeWalk& w) const {
      const auto* l = std::get_if<Lattice>(&c);
      return l && l->coords.size() == w.dim;
    }
    bool operator()(const StableWalk&) const {
      const auto* l = std::get_if<Lattice>(&c);
      return l && l->coords.size() == 1;
    }
    bool operator()(const PeriodicWalk& w) const {
      const auto* p = std::get_if<Phased>(&c);
      return p && p->coords.size() == w.dim && p->phase >= 0 &&
             static_cast<std::size_t>(p->phase) < w.period();
    }
    bool operator()(const HexWalk&) const {
      const auto* h = std::get_if<Hex>(&c);
      return h && hex_class(*h) != HexClass::Centre;
    }
  };
  return std::visit(Visitor{c}, spec);
}

inline void require_in_space(const KernelSpec& spec, const Color& c) {
  if (!in_space(spec, c)) throw ColorOutOfSpace("color " + to_string(c) + " is not in the kernel's color space");
}

/// Magnitudes above this are saturated; the event has probability below 2^-46 per step.
inline constexpr std::int64_t kStableStepCap = std::int64_t{1} << 58;

inline std::int64_t stable_increment(double alpha, RandomSource& rng) {
  const double v = std::pow(rng.uniform_open_closed(), -1.0 / alpha);
  const double mag = std::ceil(v);
  const std::int64_t m =
      mag >= static_cast<double>(kStableStepCap) ? kStableStepCap : static_cast<std::int64_t>(mag);
  return rng.coin() ? m : -m;
}

namespace detail {

inline constexpr std::int64_t kHexSteps[3][2] = {{1, 0}, {0, 1}, {-1, -1}};

}  // namespace detail

/// One step of the kernel from `from`. Throws ColorOutOfSpace.
inline Color kernel_step(const KernelSpec& spec, const Color& from, RandomSource& rng) {
  struct Visitor {
    const Color& from;
    RandomSource& rng;
    Color operator()(const FiniteMatrix& m) const {
      const std::size_t i = detail::finite_id(from, m.size());
      return FiniteIdx{detail::pick_index(m.rows[i], rng)};
    }
    Color operator()(const BlockDiagonal& b) const { return (*this)(b.matrix); }
    Color operator()(const LatticeWalk& w) const {
      const auto* l = std::get_if<Lattice>(&from);
      if (!l || l->coords.size() != w.dim) throw ColorOutOfSpace("expected a lattice point of dimension " + std::to_string(w.dim));
      Lattice next = *l;
      const auto& atom = detail::pick(w.increment, rng);
      for (std::size_t i = 0; i < w.dim; ++i) next.coords[i] += atom.step[i];
      return next;
    }
    Color operator()(const StableWalk& s) const {
      const auto* l = std::get_if<Lattice>(&from);
      if (!l || l->coords.size() != 1) throw ColorOutOfSpace("expected a point of Z");
      return Lattice{{l->coords[0] + stable_increment(s.alpha, rng)}};
    }
    Color operator()(const PeriodicWalk& w) const {
      const auto* p = std::get_if<Phased>(&from);
      if (!p || p->coords.size() != w.dim || p->phase < 0 ||
          static_cast<std::size_t>(p->phase) >= w.period()) {
        throw ColorOutOfSpace("expected a phased point of dimension " + std::to_string(w.dim));
      }
      Phased next = *p;
      const auto& atom = detail::pick(w.increment_laws[static_cast<std::size_t>(p->phase)], rng);
      for (std::size_t i = 0; i < w.dim; ++i) next.coords[i] += atom.step[i];
      next.phase = static_cast<int>((static_cast<std::size_t>(p->phase) + 1) % w.period());
      return next;
    }
    Color operator()(const HexWalk&) const {
      const auto* h = std::get_if<Hex>(&from);
      if (!h || hex_class(*h) == HexClass::Centre) throw ColorOutOfSpace("expected a honeycomb vertex");
      const std::int64_t sign = hex_class(*h) == HexClass::V1 ? 1 : -1;
      const auto& d = detail::kHexSteps[rng.below(3)];
      return Hex{h->a + sign * d[0], h->b + sign * d[1]};
    }
  };
  return std::visit(Visitor{from, rng}, spec);
}

/// Exact finite row R(from, .), zero weights dropped; nullopt for infinite support.
inline std::optional<Row> row_support(const KernelSpec& spec, const Color& from) {
  require_in_space(spec, from);
  struct Visitor {
    const Color& from;
    std::optional<Row> finite(const FiniteMatrix& m) const {
      const auto& row = m.rows[std::get<FiniteIdx>(from).id];
      Row out;
      for (std::size_t j = 0; j < row.size(); ++j) {
        if (row[j] > 0.0) out.emplace_back(FiniteIdx{j}, row[j]);
      }
      return out;
    }
    std::optional<Row> operator()(const FiniteMatrix& m) const { return finite(m); }
    std::optional<Row> operator()(const BlockDiagonal& b) const { return finite(b.matrix); }
    std::optional<Row> operator()(const LatticeWalk& w) const {
      const auto& l = std::get<Lattice>(from);
      Row out;
      for (const auto& atom : w.increment) {
        if (atom.p <= 0.0) continue;
        Lattice next = l;
        for (std::size_t i = 0; i < w.dim; ++i) next.coords[i] += atom.step[i];
        out.emplace_back(std::move(next), atom.p);
      }
      return out;
    }
    std::optional<Row> operator()(const StableWalk&) const { return std::nullopt; }
    std::optional<Row> operator()(const PeriodicWalk& w) const {
      const auto& p = std::get<Phased>(from);
      Row out;
      for (const auto& atom : w.increment_laws[static_cast<std::size_t>(p.phase)]) {
        if (atom.p <= 0.0) continue;
        Phased next = p;
        for (std::size_t i = 0; i < w.dim; ++i) next.coords[i] += atom.step[i];
        next.phase = static_cast<int>((static_cast<std::size_t>(p.phase) + 1) % w.period());
        out.emplace_back(std::move(next), atom.p);
      }
      return out;
    }
    std::optional<Row> operator()(const HexWalk&) const {
      const auto& h = std::get<Hex>(from);
      const std::int64_t sign = hex_class(h) == HexClass::V1 ? 1 : -1;
      Row out;
      for (const auto& d : detail::kHexSteps) {
        out.emplace_back(Hex{h.a + sign * d[0], h.b + sign * d[1]}, 1.0 / 3.0);
      }
      return out;
    }
  };
  return std::visit(Visitor{from}, spec);
}

inline bool has_finite_rows(const KernelSpec& spec) {
  return !std::holds_alternative<StableWalk>(spec);
}

/// Checks U_0 is a probability on the kernel's color space. Throws.
inline void validate_initial(const KernelSpec& spec, const InitialConfig& init) {
  if (init.atoms.empty()) {
    throw ValidationError(ValidationError::Kind::Malformed, 0, 0.0, "initial configuration has no atoms");
  }
  double sum = 0.0;
  for (const auto& [color, w] : init.atoms) {
    require_in_space(spec, color);
    if (!(w > 0.0) || !std::isfinite(w)) {
      throw ValidationError(ValidationError::Kind::NegativeWeight, 0, w,
                            "initial weights must be positive");
    }
    sum += w;
  }
  if (std::abs(sum - 1.0) > kStochasticTolerance) {
    throw ValidationError(ValidationError::Kind::NonStochasticRow, 0, sum,
                          "initial weights sum to " + std::to_string(sum));
  }
}

inline const Color& sample_initial(const InitialConfig& init, RandomSource& rng) {
  if (init.atoms.size() == 1) return init.atoms.front().first;
  double u = rng.uniform01();
  for (const auto& [color, w] : init.atoms) {
    if (u < w) return color;
    u -= w;
  }
  return init.atoms.back().first;
}

/// R-hat on S + {Delta}: a step from Delta (std::nullopt) is a U_0 draw,
/// from any color it is a kernel step. No step ever returns Delta.
class AugmentedKernel {
 public:
  AugmentedKernel(KernelSpec base, InitialConfig init)
      : base_(validated(std::move(base))), init_(std::move(init)) {
    validate_initial(base_, init_);
  }

  const KernelSpec& base() const noexcept { return base_; }
  const InitialConfig& init() const noexcept { return init_; }

  Color step(const std::optional<Color>& from, RandomSource& rng) const {
    if (!from) return sample_initial(init_, rng);
    return kernel_step(base_, *from, rng);
  }

 private:
  KernelSpec base_;
  InitialConfig init_;
};

inline AugmentedKernel augment(KernelSpec spec, InitialConfig init) {
  return AugmentedKernel(std::move(spec), std::move(init));
}

namespace detail {

inline std::vector<std::vector<std::size_t>> adjacency(const FiniteMatrix& m, bool reverse) {
  std::vector<std::vector<std::size_t>> adj(m.size());
  for (std::size_t i = 0; i < m.size(); ++i) {
    for (std::size_t j = 0; j < m.size(); ++j) {
      if (m.rows[i][j] > 0.0) {
        if (reverse) {
          adj[j].push_back(i);
        } else {
          adj[i].push_back(j);
        }
      }
    }
  }
  return adj;
}

inline std::vector<long> bfs_levels(const std::vector<std::vector<std::size_t>>& adj) {
  std::vector<long> level(adj.size(), -1);
  std::queue<std::size_t> queue;
  level[0] = 0;
  queue.push(0);
  while (!queue.empty()) {
    const std::size_t u = queue.front();
    queue.pop();
    for (std::size_t v : adj[u]) {
      if (level[v] < 0) {
        level[v] = level[u] + 1;
        queue.push(v);
      }
    }
  }
  return level;
}

}  // namespace detail

/// Stationary law pi of an irreducible aperiodic stochastic matrix, from the
/// linear system pi (R - I) = 0, sum(pi) = 1. Throws NotErgodic.
inline std::vector<double> stationary_distribution(const FiniteMatrix& matrix) {
  if (auto err = detail::check_matrix(matrix)) throw *err;
  const std::size_t m = matrix.size();
  const auto forward = detail::adjacency(matrix, false);
  const auto levels = detail::bfs_levels(forward);
  const auto back_levels = detail::bfs_levels(detail::adjacency(matrix, true));
  for (std::size_t i = 0; i < m; ++i) {
    if (levels[i] < 0 || back_levels[i] < 0) throw NotErgodic("kernel is reducible");
  }
  long period = 0;
  for (std::size_t u = 0; u < m; ++u) {
    for (std::size_t v : forward[u]) {
      period = std::gcd(period, std::abs(levels[u] + 1 - levels[v]));
    }
  }
  if (period != 1) throw NotErgodic("kernel has period " + std::to_string(period));

  const auto n = static_cast<Eigen::Index>(m);
  Eigen::MatrixXd a(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      a(i, j) = matrix.rows[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)] - (i == j ? 1.0 : 0.0);
    }
  }
  a.row(n - 1).setOnes();
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
  rhs(n - 1) = 1.0;
  const Eigen::VectorXd pi = a.fullPivLu().solve(rhs);
  return {pi.data(), pi.data() + n};
}

}  // namespace polya
