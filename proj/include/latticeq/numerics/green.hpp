#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "latticeq/error.hpp"
#include "latticeq/hamiltonian.hpp"
#include "latticeq/numerics/chebyshev.hpp"
#include "latticeq/numerics/dense.hpp"

namespace latticeq {

enum class GreenMethod { automatic, tridiagonal, cocg, dense };

inline std::string to_string(GreenMethod m) {
  switch (m) {
    case GreenMethod::tridiagonal: return "tridiagonal";
    case GreenMethod::cocg: return "cocg";
    case GreenMethod::dense: return "dense";
    default: return "automatic";
  }
}

struct GreenOptions {
  double tol = 1e-8;             ///< absolute residual target, ||(H - z)x - b||_2
  std::size_t max_iter = 0;      ///< 0 picks 20 * size + 1000
  GreenMethod method = GreenMethod::automatic;
  std::size_t dense_cap = kDefaultDenseCap;
};

struct SolveResult {
  ComplexVector x;
  double residual_norm = 0.0;
  GreenMethod used = GreenMethod::automatic;
  std::size_t iterations = 0;
};

/// Column G_z(., n0) of the finite-box resolvent (H - z)^{-1}.
struct GreenColumn {
  std::complex<double> z;
  Site source;
  ComplexVector values;
  double residual_norm = 0.0;
  GreenMethod used = GreenMethod::automatic;
  std::size_t iterations = 0;
};

namespace detail {

// Removed sites have no links and zero diagonal, so (H - z) acts there as -z.
inline void shifted_apply(const SparseHamiltonian& h, std::complex<double> z, const ComplexVector& x, ComplexVector& y) {
  h.apply<std::complex<double>>(x, y);
  for (std::size_t i = 0; i < x.size(); ++i) y[i] -= z * x[i];
}

inline double residual(const SparseHamiltonian& h, std::complex<double> z, const ComplexVector& x,
                       const ComplexVector& b) {
  ComplexVector y(x.size());
  shifted_apply(h, z, x, y);
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += std::norm(y[i] - b[i]);
  return std::sqrt(s);
}

// Thomas algorithm for a d = 1 chain; returns false on a vanishing pivot.
inline bool solve_tridiagonal(const SparseHamiltonian& h, std::complex<double> z, const ComplexVector& b,
                              ComplexVector& x) {
  const std::size_t n = h.size();
  std::vector<std::complex<double>> c(n), d(n);
  auto diag = [&](std::size_t i) { return h.diagonal()[i] - z; };
  auto link = [&](std::size_t i) { return (h.is_active(i) && h.is_active(i + 1)) ? 1.0 : 0.0; };
  std::complex<double> piv = diag(0);
  for (std::size_t i = 0; i < n; ++i) {
    if (i > 0) piv = diag(i) - link(i - 1) * c[i - 1];
    if (std::abs(piv) < 1e-300) return false;
    c[i] = (i + 1 < n) ? link(i) / piv : 0.0;
    d[i] = (b[i] - (i > 0 ? link(i - 1) * d[i - 1] : 0.0)) / piv;
  }
  x.assign(n, 0.0);
  x[n - 1] = d[n - 1];
  for (std::size_t i = n - 1; i-- > 0;) x[i] = d[i] - c[i] * x[i + 1];
  for (const auto& v : x)
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
  return true;
}

// Conjugate orthogonal CG for the complex-symmetric matrix H - z (unconjugated bilinear form).
inline bool solve_cocg(const SparseHamiltonian& h, std::complex<double> z, const ComplexVector& b, double tol,
                       std::size_t max_iter, ComplexVector& x, std::size_t& iterations) {
  const std::size_t n = h.size();
  auto bilinear = [](const ComplexVector& u, const ComplexVector& v) {
    std::complex<double> s = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) s += u[i] * v[i];
    return s;
  };
  x.assign(n, 0.0);
  ComplexVector r = b, p = b, q(n);
  std::complex<double> rho = bilinear(r, r);
  // Stop a little below the target so the recomputed residual meets it.
  const double target = 0.5 * tol;
  for (iterations = 0; iterations < max_iter; ++iterations) {
    if (l2_norm(r) <= target) return true;
    shifted_apply(h, z, p, q);
    const auto pq = bilinear(p, q);
    if (std::abs(pq) < 1e-300 || std::abs(rho) < 1e-300) return false;
    const auto alpha = rho / pq;
    for (std::size_t i = 0; i < n; ++i) {
      x[i] += alpha * p[i];
      r[i] -= alpha * q[i];
    }
    const auto rho_next = bilinear(r, r);
    const auto beta = rho_next / rho;
    rho = rho_next;
    for (std::size_t i = 0; i < n; ++i) p[i] = r[i] + beta * p[i];
    if (!std::isfinite(std::abs(rho))) return false;
  }
  return l2_norm(r) <= target;
}

inline void solve_dense(const SparseHamiltonian& h, std::complex<double> z, const ComplexVector& b, std::size_t cap,
                        ComplexVector& x) {
  check_dense_cap(h.size(), cap);
  const auto n = static_cast<Eigen::Index>(h.size());
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) m(i, i) = h.diagonal()[static_cast<std::size_t>(i)] - z;
  h.for_each_link([&](std::size_t i, std::size_t j) {
    m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = 1.0;
    m(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = 1.0;
  });
  Eigen::VectorXcd rhs = Eigen::Map<const Eigen::VectorXcd>(b.data(), n);
  Eigen::VectorXcd sol = m.partialPivLu().solve(rhs);
  x.assign(sol.data(), sol.data() + n);
}

}  // namespace detail

/// Solves (H - z) x = b. Iterative routes fall back to a dense LU below the dense cap.
inline SolveResult solve_shifted(const SparseHamiltonian& h, std::complex<double> z, const ComplexVector& b,
                                 const GreenOptions& opt = {}) {
  if (b.size() != h.size()) throw ConfigError("right-hand side length does not match the box");
  if (!(opt.tol > 0.0)) throw ConfigError("solver tolerance must be positive");
  if (z.imag() == 0.0 && spectrum_window(h).contains(z.real()) && opt.method != GreenMethod::dense)
    throw PreconditionError("real z = " + std::to_string(z.real()) +
                            " lies inside the spectral window; use Im z != 0 or the dense route");
  SolveResult out;
  GreenMethod method = opt.method;
  if (method == GreenMethod::automatic) method = h.dim() == 1 ? GreenMethod::tridiagonal : GreenMethod::cocg;
  if (method == GreenMethod::tridiagonal && h.dim() != 1)
    throw ConfigError("tridiagonal route needs a one-dimensional box");

  bool ok = false;
  if (method == GreenMethod::tridiagonal) {
    ok = detail::solve_tridiagonal(h, z, b, out.x);
  } else if (method == GreenMethod::cocg) {
    const std::size_t max_iter = opt.max_iter ? opt.max_iter : 20 * h.size() + 1000;
    ok = detail::solve_cocg(h, z, b, opt.tol, max_iter, out.x, out.iterations);
  }
  if (ok) {
    out.used = method;
    out.residual_norm = detail::residual(h, z, out.x, b);
    ok = out.residual_norm <= opt.tol;
  }
  if (!ok) {
    if (h.size() > opt.dense_cap)
      throw NumericError(to_string(method) + " solve at z = (" + std::to_string(z.real()) + ", " +
                         std::to_string(z.imag()) + ") did not reach tolerance and the box exceeds the dense cap");
    detail::solve_dense(h, z, b, opt.dense_cap, out.x);
    out.used = GreenMethod::dense;
    out.residual_norm = detail::residual(h, z, out.x, b);
  }
  if (!std::isfinite(out.residual_norm))
    throw NumericError("non-finite resolvent solution at z = (" + std::to_string(z.real()) + ", " +
                       std::to_string(z.imag()) + ")");
  return out;
}

inline GreenColumn green_column(const SparseHamiltonian& h, std::complex<double> z, const Site& source,
                                const GreenOptions& opt = {}) {
  ComplexVector b(h.size());
  b[h.box().index_of(source)] = 1.0;
  auto s = solve_shifted(h, z, b, opt);
  return {z, source, std::move(s.x), s.residual_norm, s.used, s.iterations};
}

}  // namespace latticeq
