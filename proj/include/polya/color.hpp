#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <variant>
#include <vector>

namespace polya {

struct FiniteIdx {
  std::uint64_t id = 0;
  auto operator<=>(const FiniteIdx&) const = default;
};

/// Point of the integer lattice Z^d.
struct Lattice {
  std::vector<std::int64_t> coords;
  auto operator<=>(const Lattice&) const = default;
};

/// Point of R^d tagged with the phase of a k-periodic walk.
struct Phased {
  std::vector<double> coords;
  int phase = 0;
  auto operator<=>(const Phased&) const = default;
};

/// Honeycomb vertex a*e1 + b*e2 with e1 = (1, 0), e2 = (-1/2, sqrt(3)/2).
///
/// The three unit steps 1, w, w^2 (w the primitive cube root of unity) are
/// (1,0), (0,1), (-1,-1) in this basis, each raising a+b by 1 mod 3. Vertices
/// are the points with a+b = 1 (mod 3), class V1, or a+b = 2 (mod 3), class V2;
/// points with a+b = 0 (mod 3) are hexagon centres and not colors.
struct Hex {
  std::int64_t a = 0;
  std::int64_t b = 0;
  auto operator<=>(const Hex&) const = default;
};

using Color = std::variant<FiniteIdx, Lattice, Phased, Hex>;

enum class HexClass { V1, V2, Centre };

inline HexClass hex_class(const Hex& h) noexcept {
  const std::int64_t r = ((h.a + h.b) % 3 + 3) % 3;
  return r == 1 ? HexClass::V1 : r == 2 ? HexClass::V2 : HexClass::Centre;
}

/// Euclidean embedding of a color; finite indices map to the 1-vector (id).
inline std::vector<double> to_real(const Color& c) {
  struct Visitor {
    std::vector<double> operator()(const FiniteIdx& f) const {
      return {static_cast<double>(f.id)};
    }
    std::vector<double> operator()(const Lattice& l) const {
      return {l.coords.begin(), l.coords.end()};
    }
    std::vector<double> operator()(const Phased& p) const { return p.coords; }
    std::vector<double> operator()(const Hex& h) const {
      constexpr double half_sqrt3 = 0.86602540378443864676;
      return {static_cast<double>(h.a) - 0.5 * static_cast<double>(h.b),
              half_sqrt3 * static_cast<double>(h.b)};
    }
  };
  return std::visit(Visitor{}, c);
}

inline std::string to_string(const Color& c) {
  struct Visitor {
    std::string operator()(const FiniteIdx& f) const { return std::to_string(f.id); }
    std::string operator()(const Lattice& l) const {
      std::string s = "(";
      for (std::size_t i = 0; i < l.coords.size(); ++i) {
        if (i) s += ',';
        s += std::to_string(l.coords[i]);
      }
      return s + ")";
    }
    std::string operator()(const Phased& p) const {
      std::string s = "(";
      for (std::size_t i = 0; i < p.coords.size(); ++i) {
        if (i) s += ',';
        s += std::to_string(p.coords[i]);
      }
      return s + ";" + std::to_string(p.phase) + ")";
    }
    std::string operator()(const Hex& h) const {
      return "hex(" + std::to_string(h.a) + "," + std::to_string(h.b) + ")";
    }
  };
  return std::visit(Visitor{}, c);
}

struct ColorHash {
  std::size_t operator()(const Color& c) const noexcept {
    std::size_t h = std::hash<std::size_t>{}(c.index());
    auto mix = [&h](std::size_t v) { h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2); };
    std::visit(
        [&](const auto& v) {
          using T = std::decay_t<decltype(v)>;
          if constexpr (std::is_same_v<T, FiniteIdx>) {
            mix(std::hash<std::uint64_t>{}(v.id));
          } else if constexpr (std::is_same_v<T, Lattice>) {
            for (auto x : v.coords) mix(std::hash<std::int64_t>{}(x));
          } else if constexpr (std::is_same_v<T, Phased>) {
            for (auto x : v.coords) mix(std::hash<double>{}(x));
            mix(std::hash<int>{}(v.phase));
          } else {
            mix(std::hash<std::int64_t>{}(v.a));
            mix(std::hash<std::int64_t>{}(v.b));
          }
        },
        c);
    return h;
  }
};

}  // namespace polya
