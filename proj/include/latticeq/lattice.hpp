#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <cstdlib>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "latticeq/error.hpp"

namespace latticeq {

/// A point of Z^d.
using Site = std::vector<std::int64_t>;

inline std::int64_t sup_norm(const Site& n) {
  std::int64_t r = 0;
  for (auto v : n) r = std::max<std::int64_t>(r, std::llabs(v));
  return r;
}

inline std::int64_t sup_distance(const Site& a, const Site& b) {
  std::int64_t r = 0;
  for (std::size_t i = 0; i < a.size(); ++i) r = std::max<std::int64_t>(r, std::llabs(a[i] - b[i]));
  return r;
}

inline std::int64_t l1_distance(const Site& a, const Site& b) {
  std::int64_t r = 0;
  for (std::size_t i = 0; i < a.size(); ++i) r += std::llabs(a[i] - b[i]);
  return r;
}

inline std::string to_string(const Site& n) {
  std::string s = "(";
  for (std::size_t i = 0; i < n.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(n[i]);
  }
  return s + ")";
}

/**
 Finite sup-norm box Lambda_L(n0) = { n : |n - n0|_inf <= L } in Z^d.

 Sites are indexed lexicographically in (n_1, ..., n_d), n_1 most significant.
 */
class LatticeBox {
 public:
  LatticeBox(int dim, Site center, std::int64_t radius)
      : dim_(dim), center_(std::move(center)), radius_(radius) {
    if (dim_ < 1) throw ConfigError("box dimension must be positive");
    if (static_cast<int>(center_.size()) != dim_)
      throw ConfigError("box center has " + std::to_string(center_.size()) + " coordinates, expected " +
                        std::to_string(dim_));
    if (radius_ < 0) throw ConfigError("box radius must be nonnegative");
    const auto side = static_cast<std::size_t>(2 * radius_ + 1);
    strides_.assign(dim_, 1);
    std::size_t total = 1;
    for (int i = dim_ - 1; i >= 0; --i) {
      strides_[i] = total;
      if (total > std::numeric_limits<std::size_t>::max() / side)
        throw ConfigError("site count (2L+1)^d overflows for d=" + std::to_string(dim_) +
                          ", L=" + std::to_string(radius_));
      total *= side;
    }
    size_ = total;
  }

  static LatticeBox at_origin(int dim, std::int64_t radius) { return {dim, Site(dim, 0), radius}; }

  int dim() const noexcept { return dim_; }
  const Site& center() const noexcept { return center_; }
  std::int64_t radius() const noexcept { return radius_; }
  std::int64_t side() const noexcept { return 2 * radius_ + 1; }
  std::size_t size() const noexcept { return size_; }
  std::size_t stride(int axis) const { return strides_.at(axis); }

  std::int64_t distance_from_center(const Site& n) const { return sup_distance(n, center_); }
  bool contains(const Site& n) const {
    return static_cast<int>(n.size()) == dim_ && distance_from_center(n) <= radius_;
  }

  std::size_t index_of(const Site& n) const {
    if (!contains(n)) throw ConfigError("site " + latticeq::to_string(n) + " lies outside the box");
    std::size_t idx = 0;
    for (int i = 0; i < dim_; ++i)
      idx += static_cast<std::size_t>(n[i] - center_[i] + radius_) * strides_[i];
    return idx;
  }

  Site site_at(std::size_t index) const {
    Site n(dim_);
    for (int i = 0; i < dim_; ++i) {
      n[i] = static_cast<std::int64_t>(index / strides_[i]) - radius_ + center_[i];
      index %= strides_[i];
    }
    return n;
  }

  /// Calls f(index, site) for every site in lexicographic order; the site reference is reused.
  template <class F>
  void for_each_site(F&& f) const {
    Site n(dim_);
    for (int i = 0; i < dim_; ++i) n[i] = center_[i] - radius_;
    for (std::size_t idx = 0; idx < size_; ++idx) {
      f(idx, static_cast<const Site&>(n));
      for (int i = dim_ - 1; i >= 0; --i) {
        if (n[i] < center_[i] + radius_) {
          ++n[i];
          break;
        }
        n[i] = center_[i] - radius_;
      }
    }
  }

  bool operator==(const LatticeBox& o) const {
    return dim_ == o.dim_ && center_ == o.center_ && radius_ == o.radius_;
  }

 private:
  int dim_;
  Site center_;
  std::int64_t radius_;
  std::size_t size_ = 0;
  std::vector<std::size_t> strides_;
};

inline std::vector<Site> box_sites(const LatticeBox& box) {
  std::vector<Site> out;
  out.reserve(box.size());
  box.for_each_site([&](std::size_t, const Site& n) { out.push_back(n); });
  return out;
}

enum class ShellKind {
  inner,     ///< sup-distance exactly L
  outer,     ///< sup-distance exactly L+1
  enlarged,  ///< inner and outer together
};

struct Shell {
  LatticeBox box;
  ShellKind kind = ShellKind::inner;
};

/// Sites of the requested shell around the box center, lexicographically ordered.
inline std::vector<Site> shell_sites(const Shell& shell) {
  const auto& box = shell.box;
  const std::int64_t L = box.radius();
  const std::int64_t lo = shell.kind == ShellKind::outer ? L + 1 : L;
  const std::int64_t hi = shell.kind == ShellKind::inner ? L : L + 1;
  std::vector<Site> out;
  LatticeBox(box.dim(), box.center(), hi).for_each_site([&](std::size_t, const Site& n) {
    const auto r = box.distance_from_center(n);
    if (r >= lo && r <= hi) out.push_back(n);
  });
  return out;
}

/**
 Periodic trimming pattern Gamma = W_rho^{d1} x Z^{d2}, where W_rho^{d1} is the union of the
 hyperplane families { n_i in rho_i Z }, i <= d1.

 d1 = 0 gives the empty set (no potential anywhere). The full-lattice mode represents Gamma = Z^d.
 */
class TrimPattern {
 public:
  static TrimPattern periodic(std::vector<std::int64_t> rho, int d2) {
    if (d2 < 0) throw ConfigError("d2 must be nonnegative");
    for (auto r : rho)
      if (r < 2) throw ConfigError("every trimming period rho_i must be >= 2");
    if (rho.empty() && d2 == 0) throw ConfigError("pattern dimension d1 + d2 must be positive");
    TrimPattern p;
    p.d1_ = static_cast<int>(rho.size());
    p.d2_ = d2;
    p.rho_ = std::move(rho);
    return p;
  }

  /// d1 = 0: Gamma is empty, the potential vanishes identically.
  static TrimPattern untrimmed(int dim) { return periodic({}, dim); }

  /// Gamma = Z^d, the classical Anderson setting.
  static TrimPattern full_lattice(int dim) {
    if (dim < 1) throw ConfigError("pattern dimension must be positive");
    TrimPattern p;
    p.d1_ = 0;
    p.d2_ = dim;
    p.full_ = true;
    return p;
  }

  int d1() const noexcept { return d1_; }
  int d2() const noexcept { return d2_; }
  int dim() const noexcept { return d1_ + d2_; }
  const std::vector<std::int64_t>& rho() const noexcept { return rho_; }
  bool is_full_lattice() const noexcept { return full_; }

  bool contains(const Site& n) const {
    if (static_cast<int>(n.size()) != dim())
      throw ConfigError("site " + latticeq::to_string(n) + " does not match pattern dimension " +
                        std::to_string(dim()));
    if (full_) return true;
    for (int i = 0; i < d1_; ++i)
      if (n[i] % rho_[i] == 0) return true;
    return false;
  }

  /// Limit of |Gamma cap Lambda_L| / |Lambda_L| as L grows.
  double asymptotic_density() const {
    if (full_) return 1.0;
    double miss = 1.0;
    for (auto r : rho_) miss *= 1.0 - 1.0 / static_cast<double>(r);
    return d1_ == 0 ? 0.0 : 1.0 - miss;
  }

  bool operator==(const TrimPattern&) const = default;

 private:
  TrimPattern() = default;
  int d1_ = 0;
  int d2_ = 0;
  std::vector<std::int64_t> rho_;
  bool full_ = false;
};

inline bool gamma_contains(const TrimPattern& pattern, const Site& n) { return pattern.contains(n); }

}  // namespace latticeq
