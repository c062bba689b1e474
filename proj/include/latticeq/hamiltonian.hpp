#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <span>
#include <vector>

#include "latticeq/error.hpp"
#include "latticeq/lattice.hpp"
#include "latticeq/potential.hpp"

namespace latticeq {

/// Interval guaranteed to contain the spectrum.
struct SpectralWindow {
  double lo = 0.0;
  double hi = 0.0;
  double center() const { return 0.5 * (lo + hi); }
  double half_width() const { return 0.5 * (hi - lo); }
  bool contains(double e) const { return e >= lo && e <= hi; }
};

/**
 H = H0 + V restricted to a box with simple boundary conditions: the adjacency operator over
 l1-nearest neighbours (2d per interior site), links leaving the box dropped.

 Sites whose table potential is +inf are removed: no links, zero diagonal, zero output.
 */
class SparseHamiltonian {
 public:
  SparseHamiltonian(LatticeBox box, std::vector<double> diagonal, std::vector<std::uint8_t> removed,
                    double potential_sup)
      : box_(std::move(box)),
        diagonal_(std::move(diagonal)),
        removed_(std::move(removed)),
        potential_sup_(potential_sup) {
    any_removed_ = std::any_of(removed_.begin(), removed_.end(), [](auto r) { return r != 0; });
  }

  const LatticeBox& box() const noexcept { return box_; }
  int dim() const noexcept { return box_.dim(); }
  std::size_t size() const noexcept { return box_.size(); }
  std::span<const double> diagonal() const noexcept { return diagonal_; }
  double potential_sup() const noexcept { return potential_sup_; }
  bool has_removed_sites() const noexcept { return any_removed_; }
  bool is_active(std::size_t i) const { return !any_removed_ || removed_[i] == 0; }

  /// y = H x
  template <class Scalar>
  void apply(std::span<const Scalar> x, std::span<Scalar> y) const {
    const std::size_t n = size();
    for (std::size_t i = 0; i < n; ++i) y[i] = diagonal_[i] * x[i];
    const auto side = static_cast<std::size_t>(box_.side());
    for (int axis = 0; axis < dim(); ++axis) {
      const std::size_t s = box_.stride(axis);
      const std::size_t block = s * side;
      const std::size_t run = s * (side - 1);
      for (std::size_t base = 0; base < n; base += block) {
        Scalar* yb = y.data() + base;
        const Scalar* xb = x.data() + base;
        if (!any_removed_) {
          for (std::size_t j = 0; j < run; ++j) {
            yb[j] += xb[j + s];
            yb[j + s] += xb[j];
          }
        } else {
          const std::uint8_t* rb = removed_.data() + base;
          for (std::size_t j = 0; j < run; ++j) {
            if (rb[j] | rb[j + s]) continue;
            yb[j] += xb[j + s];
            yb[j + s] += xb[j];
          }
        }
      }
    }
  }

  /// Matrix element H(i, j).
  double entry(std::size_t i, std::size_t j) const {
    if (!is_active(i) || !is_active(j)) return 0.0;
    if (i == j) return diagonal_[i];
    const Site a = box_.site_at(i);
    const Site b = box_.site_at(j);
    return l1_distance(a, b) == 1 ? 1.0 : 0.0;
  }

  /// Calls f(i, j) once for every hopping link i < j.
  template <class F>
  void for_each_link(F&& f) const {
    const auto side = static_cast<std::size_t>(box_.side());
    const std::size_t n = size();
    for (int axis = 0; axis < dim(); ++axis) {
      const std::size_t s = box_.stride(axis);
      for (std::size_t base = 0; base < n; base += s * side)
        for (std::size_t j = 0; j < s * (side - 1); ++j)
          if (is_active(base + j) && is_active(base + j + s)) f(base + j, base + j + s);
    }
  }

 private:
  LatticeBox box_;
  std::vector<double> diagonal_;
  std::vector<std::uint8_t> removed_;
  double potential_sup_ = 0.0;
  bool any_removed_ = false;
};

inline SparseHamiltonian assemble(const LatticeBox& box, const PotentialSpec& pot) {
  if (pot.dim() != box.dim())
    throw ConfigError("potential dimension " + std::to_string(pot.dim()) + " does not match box dimension " +
                      std::to_string(box.dim()));
  std::vector<double> diag(box.size(), 0.0);
  std::vector<std::uint8_t> removed(box.size(), 0);
  double sup = 0.0;
  box.for_each_site([&](std::size_t i, const Site& n) {
    const double v = pot.value_at(n);
    if (std::isinf(v)) {
      removed[i] = 1;
    } else {
      diag[i] = v;
      sup = std::max(sup, std::abs(v));
    }
  });
  if (pot.is_uniform()) sup = std::max(sup, pot.a_priori_sup());
  return {box, std::move(diag), std::move(removed), sup};
}

/// [-2d - |V|_inf, 2d + |V|_inf]
inline SpectralWindow spectrum_window(const SparseHamiltonian& h) {
  const double r = 2.0 * h.dim() + h.potential_sup();
  return {-r, r};
}

/// Distance from z to a window containing the spectrum (a lower bound on dist(z, sigma(H))).
inline double window_distance(std::complex<double> z, const SpectralWindow& w) {
  const double dx = z.real() < w.lo ? w.lo - z.real() : (z.real() > w.hi ? z.real() - w.hi : 0.0);
  return std::hypot(dx, z.imag());
}

}  // namespace latticeq
