#pragma once

#include <cmath>
#include <cstdint>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <variant>

#include "latticeq/csv.hpp"
#include "latticeq/error.hpp"
#include "latticeq/lattice.hpp"

namespace latticeq {

using PotentialTable = std::map<Site, double>;

struct ZeroPotential {};

/// Explicit site values; unlisted sites carry 0. A value of +inf removes the site (hard wall).
struct TablePotential {
  PotentialTable values;
};

/// iid uniform on [-W/2, W/2), keyed by (seed, realization, site).
struct UniformPotential {
  double width = 1.0;
  std::uint64_t seed = 0;
  std::int64_t realization = 0;
};

namespace detail {

// splitmix64 finalizer
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline double site_uniform(std::uint64_t seed, std::int64_t realization, const Site& n) {
  std::uint64_t h = mix64(seed ^ 0x5bd1e9955bd1e995ULL);
  h = mix64(h ^ static_cast<std::uint64_t>(realization));
  for (auto c : n) h = mix64(h ^ static_cast<std::uint64_t>(c));
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

}  // namespace detail

class PotentialSpec {
 public:
  using Variant = std::variant<ZeroPotential, TablePotential, UniformPotential>;

  PotentialSpec(Variant v, TrimPattern support) : variant_(std::move(v)), support_(std::move(support)) {
    if (auto* u = std::get_if<UniformPotential>(&variant_)) {
      if (!(u->width > 0.0) || !std::isfinite(u->width)) throw ConfigError("uniform width W must be positive");
    }
    if (auto* t = std::get_if<TablePotential>(&variant_)) {
      for (const auto& [n, v] : t->values) {
        if (static_cast<int>(n.size()) != support_.dim())
          throw ConfigError("potential table site " + to_string(n) + " has wrong dimension");
        if (std::isnan(v) || v == -std::numeric_limits<double>::infinity())
          throw ConfigError("potential table value at " + to_string(n) + " is not a number");
        if (std::isfinite(v) && v != 0.0 && !support_.contains(n))
          throw ConfigError("potential table assigns a nonzero value off Gamma at " + to_string(n));
      }
    }
  }

  static PotentialSpec zero(int dim) { return {ZeroPotential{}, TrimPattern::untrimmed(dim)}; }
  static PotentialSpec table(PotentialTable values, TrimPattern support) {
    return {TablePotential{std::move(values)}, std::move(support)};
  }
  static PotentialSpec uniform(double width, std::uint64_t seed, std::int64_t realization, TrimPattern support) {
    return {UniformPotential{width, seed, realization}, std::move(support)};
  }

  int dim() const noexcept { return support_.dim(); }
  const TrimPattern& support() const noexcept { return support_; }
  const Variant& variant() const noexcept { return variant_; }

  /// V(n); zero off Gamma. +inf marks a removed site.
  double value_at(const Site& n) const {
    if (const auto* t = std::get_if<TablePotential>(&variant_)) {
      auto it = t->values.find(n);
      if (it == t->values.end()) return 0.0;
      if (std::isinf(it->second)) return it->second;
      return support_.contains(n) ? it->second : 0.0;
    }
    if (const auto* u = std::get_if<UniformPotential>(&variant_)) {
      if (!support_.contains(n)) return 0.0;
      return u->width * (detail::site_uniform(u->seed, u->realization, n) - 0.5);
    }
    return 0.0;
  }

  /// A-priori bound on |V| for random draws (W/2); 0 for deterministic variants.
  double a_priori_sup() const {
    if (const auto* u = std::get_if<UniformPotential>(&variant_)) {
      const bool empty = support_.d1() == 0 && !support_.is_full_lattice();
      return empty ? 0.0 : u->width / 2.0;
    }
    return 0.0;
  }

  bool is_uniform() const noexcept { return std::holds_alternative<UniformPotential>(variant_); }

 private:
  Variant variant_;
  TrimPattern support_;
};

/// Materializes V on Gamma cap box (sites off Gamma are omitted; they carry 0).
inline PotentialTable sample_potential(const PotentialSpec& pot, const LatticeBox& box) {
  if (pot.dim() != box.dim()) throw ConfigError("potential dimension does not match box dimension");
  PotentialTable out;
  box.for_each_site([&](std::size_t, const Site& n) {
    if (pot.support().contains(n)) out.emplace(n, pot.value_at(n));
  });
  return out;
}

/// CSV with header n1,...,nd,value.
inline void write_potential_csv(std::ostream& os, const PotentialTable& table, int dim) {
  for (int i = 1; i <= dim; ++i) os << 'n' << i << ',';
  os << "value\n";
  for (const auto& [n, v] : table) {
    for (auto c : n) os << c << ',';
    os << csv::number(v) << '\n';
  }
}

inline PotentialTable read_potential_csv(std::istream& is, int dim) {
  PotentialTable out;
  std::string line;
  if (!std::getline(is, line)) throw ConfigError("potential CSV is empty");
  const auto header = csv::split(line);
  if (static_cast<int>(header.size()) != dim + 1 || header.back() != "value")
    throw ConfigError("potential CSV header must be n1,...,n" + std::to_string(dim) + ",value");
  int lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto cells = csv::split(line);
    if (static_cast<int>(cells.size()) != dim + 1)
      throw ConfigError("potential CSV line " + std::to_string(lineno) + " has " + std::to_string(cells.size()) +
                        " fields");
    Site n(dim);
    try {
      for (int i = 0; i < dim; ++i) n[i] = std::stoll(cells[i]);
      out[n] = std::stod(cells.back());
    } catch (const std::exception&) {
      throw ConfigError("potential CSV line " + std::to_string(lineno) + " is not numeric");
    }
  }
  return out;
}

}  // namespace latticeq
