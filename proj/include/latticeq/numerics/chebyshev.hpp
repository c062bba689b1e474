#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "latticeq/error.hpp"
#include "latticeq/hamiltonian.hpp"

namespace latticeq {

using ComplexVector = std::vector<std::complex<double>>;

inline double l2_norm(std::span<const std::complex<double>> v) {
  double s = 0.0;
  for (const auto& c : v) s += std::norm(c);
  return std::sqrt(s);
}

/// Complex amplitudes over the sites of a box.
struct WaveState {
  LatticeBox box;
  ComplexVector amplitudes;

  static WaveState delta(const LatticeBox& box, const Site& n) {
    WaveState s{box, ComplexVector(box.size())};
    s.amplitudes[box.index_of(n)] = 1.0;
    return s;
  }
  double norm() const { return l2_norm(amplitudes); }
};

/**
 Chebyshev expansion of exp(-i dt H) with H rescaled into [-1, 1] by its spectral window:

   exp(-i dt H) = exp(-i b dt) sum_k (2 - delta_k0) (-i)^k J_k(a dt) T_k((H - b)/a).

 The order is the smallest one whose coefficient tail bound meets the requested tolerance.
 */
class ChebyshevPropagator {
 public:
  /// Largest a*dt handled in a single expansion; longer steps are chunked.
  static constexpr double kMaxArgument = 100.0;

  explicit ChebyshevPropagator(const SparseHamiltonian& h)
      : h_(h), t_prev_(h.size()), t_cur_(h.size()), t_next_(h.size()), acc_(h.size()) {
    const auto w = spectrum_window(h);
    center_ = w.center();
    scale_ = w.half_width() > 0.0 ? w.half_width() : 1.0;
  }

  double scale() const noexcept { return scale_; }
  double center() const noexcept { return center_; }

  /// Upper bound on 2 sum_{k > order} |J_k(x)| from |J_k(x)| <= (x/2)^k / k!.
  static double tail_bound(std::size_t order, double x) {
    if (x == 0.0) return 0.0;
    const double k1 = static_cast<double>(order + 1);
    const double ratio = (x / 2.0) / (k1 + 1.0);
    if (ratio >= 1.0) return 1.0;
    const double log_term = k1 * std::log(x / 2.0) - std::lgamma(k1 + 1.0);
    return 2.0 * std::exp(log_term) / (1.0 - ratio);
  }

  static std::size_t order_for(double x, double tol) {
    std::size_t k = 1;
    while (tail_bound(k, x) > tol) ++k;
    return k;
  }

  /// Advances psi by dt in place. Returns the truncation bound, relative to ||psi||.
  double step(ComplexVector& psi, double dt, double tol) {
    if (dt == 0.0) return 0.0;
    const double x_total = scale_ * std::abs(dt);
    const auto chunks = static_cast<std::size_t>(std::ceil(x_total / kMaxArgument));
    const double sub = dt / static_cast<double>(chunks);
    double bound = 0.0;
    for (std::size_t c = 0; c < chunks; ++c) bound += single(psi, sub, tol / static_cast<double>(chunks));
    return bound;
  }

 private:
  void rescaled_apply(const ComplexVector& in, ComplexVector& out) const {
    h_.apply<std::complex<double>>(in, out);
    const double inv = 1.0 / scale_;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = (out[i] - center_ * in[i]) * inv;
  }

  double single(ComplexVector& psi, double dt, double tol) {
    const double x = scale_ * dt;
    const double sign = dt < 0 ? -1.0 : 1.0;
    const std::size_t order = order_for(std::abs(x), tol);
    const std::size_t n = psi.size();

    // (-i)^k for forward time; i^k backwards (J_k(-x) = (-1)^k J_k(x)).
    auto coeff = [&](std::size_t k) {
      const double j = std::cyl_bessel_j(static_cast<double>(k), std::abs(x));
      static const std::complex<double> phases[4] = {{1, 0}, {0, -1}, {-1, 0}, {0, 1}};
      auto ph = phases[k % 4];
      if (sign < 0 && (k % 2 == 1)) ph = -ph;
      return (k == 0 ? 1.0 : 2.0) * j * ph;
    };

    t_prev_ = psi;
    rescaled_apply(t_prev_, t_cur_);
    const auto c0 = coeff(0);
    const auto c1 = coeff(1);
    for (std::size_t i = 0; i < n; ++i) acc_[i] = c0 * t_prev_[i] + c1 * t_cur_[i];
    for (std::size_t k = 2; k <= order; ++k) {
      rescaled_apply(t_cur_, t_next_);
      const auto ck = coeff(k);
      for (std::size_t i = 0; i < n; ++i) {
        t_next_[i] = 2.0 * t_next_[i] - t_prev_[i];
        acc_[i] += ck * t_next_[i];
      }
      std::swap(t_prev_, t_cur_);
      std::swap(t_cur_, t_next_);
    }
    const auto phase = std::exp(std::complex<double>(0.0, -center_ * dt));
    double norm2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      psi[i] = phase * acc_[i];
      norm2 += std::norm(psi[i]);
    }
    if (!std::isfinite(norm2))
      throw NumericError("non-finite amplitudes after Chebyshev step: dt=" + std::to_string(dt) +
                         ", order=" + std::to_string(order) + ", scale=" + std::to_string(scale_));
    return tail_bound(order, std::abs(x));
  }

  const SparseHamiltonian& h_;
  double center_ = 0.0;
  double scale_ = 1.0;
  ComplexVector t_prev_, t_cur_, t_next_, acc_;
};

/// psi_t = exp(-i t H) psi_0 with ||psi_t - exact|| <= tol ||psi_0||. Amplitudes on removed sites are dropped.
inline WaveState evolve(const SparseHamiltonian& h, const WaveState& psi0, double t, double tol = 1e-6) {
  if (!(tol > 0.0 && tol < 1.0)) throw ConfigError("propagation tolerance must lie in (0, 1)");
  if (t < 0.0) throw ConfigError("evolution time must be nonnegative");
  if (!(psi0.box == h.box())) throw ConfigError("wave state box does not match the Hamiltonian box");
  for (const auto& a : psi0.amplitudes)
    if (!std::isfinite(a.real()) || !std::isfinite(a.imag())) throw NumericError("initial state has non-finite amplitudes");
  WaveState out = psi0;
  for (std::size_t i = 0; i < out.amplitudes.size(); ++i)
    if (!h.is_active(i)) out.amplitudes[i] = 0.0;
  if (t == 0.0) return out;
  ChebyshevPropagator prop(h);
  prop.step(out.amplitudes, t, tol);
  return out;
}

}  // namespace latticeq
