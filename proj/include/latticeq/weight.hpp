#pragma once

#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <variant>

#include "latticeq/error.hpp"
#include "latticeq/lattice.hpp"

namespace latticeq {

/// <n> = (1 + |n|_inf^2)^{1/2}
inline double japanese_bracket(const Site& n) {
  const auto r = static_cast<double>(sup_norm(n));
  return std::sqrt(1.0 + r * r);
}

struct PowerWeight {
  double q = 2.0;
  Site base;
};
struct ConstantOneWeight {};
struct TableWeight {
  std::map<Site, double> values;
  double default_value = 1.0;
};

/// phi <= C exp(|n|^beta) with beta < 1
struct SubexpCertificate {
  double C = 1.0;
  double beta = 0.5;
};

/**
 Weight phi for transport moments: <n - k>^q about a base site, the constant 1, or an explicit table.

 Table weights carry a subexponential certificate checked over their listed sites. Tables may hold
 zeros so that a single-site projector can be used as an observable.
 */
class GrowthWeight {
 public:
  using Variant = std::variant<PowerWeight, ConstantOneWeight, TableWeight>;

  static GrowthWeight power(double q, Site base) {
    if (!(q >= 0.0) || !std::isfinite(q)) throw ConfigError("weight exponent q must be a finite nonnegative number");
    return GrowthWeight(PowerWeight{q, std::move(base)}, std::nullopt);
  }
  static GrowthWeight constant_one() { return GrowthWeight(ConstantOneWeight{}, std::nullopt); }
  static GrowthWeight table(std::map<Site, double> values, SubexpCertificate cert, double default_value = 1.0) {
    if (!(cert.beta < 1.0) || !(cert.C > 0.0)) throw ConfigError("table weight needs a certificate with C > 0, beta < 1");
    auto check = [&](const Site& n, double v) {
      if (!(v >= 0.0) || !std::isfinite(v))
        throw ConfigError("table weight value at " + to_string(n) + " must be finite and nonnegative");
      const double bound = cert.C * std::exp(std::pow(static_cast<double>(sup_norm(n)), cert.beta));
      if (v > bound) throw ConfigError("table weight at " + to_string(n) + " exceeds its subexponential certificate");
    };
    for (const auto& [n, v] : values) check(n, v);
    if (!(default_value >= 0.0) || default_value > cert.C)
      throw ConfigError("table weight default value must lie in [0, C]");
    return GrowthWeight(TableWeight{std::move(values), default_value}, cert);
  }

  const Variant& variant() const noexcept { return variant_; }
  const std::optional<SubexpCertificate>& certificate() const noexcept { return cert_; }
  bool is_constant_one() const noexcept { return std::holds_alternative<ConstantOneWeight>(variant_); }

  double operator()(const Site& n) const {
    if (const auto* p = std::get_if<PowerWeight>(&variant_)) {
      if (p->q == 0.0) return 1.0;
      double r = 0.0;
      for (std::size_t i = 0; i < n.size(); ++i)
        r = std::max(r, std::abs(static_cast<double>(n[i] - (p->base.empty() ? 0 : p->base[i]))));
      return std::pow(1.0 + r * r, 0.5 * p->q);
    }
    if (const auto* t = std::get_if<TableWeight>(&variant_)) {
      auto it = t->values.find(n);
      return it == t->values.end() ? t->default_value : it->second;
    }
    return 1.0;
  }

  std::string describe() const {
    if (const auto* p = std::get_if<PowerWeight>(&variant_)) return "power(q=" + std::to_string(p->q) + ")";
    if (std::holds_alternative<TableWeight>(variant_)) return "table";
    return "constant_one";
  }

 private:
  GrowthWeight(Variant v, std::optional<SubexpCertificate> c) : variant_(std::move(v)), cert_(c) {}
  Variant variant_;
  std::optional<SubexpCertificate> cert_;
};

}  // namespace latticeq
