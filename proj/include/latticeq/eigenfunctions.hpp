#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "latticeq/error.hpp"
#include "latticeq/hamiltonian.hpp"
#include "latticeq/lattice.hpp"
#include "latticeq/numerics/chebyshev.hpp"
#include "latticeq/numerics/dense.hpp"
#include "latticeq/parallel.hpp"
#include "latticeq/potential.hpp"
#include "latticeq/weight.hpp"

namespace latticeq {

/// Pure, thread-safe map from sites to amplitudes.
using Evaluator = std::function<std::complex<double>(const Site&)>;

/// Values of an evaluator over a box, in box index order.
inline ComplexVector tabulate(const Evaluator& psi, const LatticeBox& box) {
  ComplexVector out(box.size());
  box.for_each_site([&](std::size_t i, const Site& n) { out[i] = psi(n); });
  return out;
}

namespace detail {

/// sin(pi k n / rho) with exact zeros whenever rho divides k n.
inline double nodal_sin(std::int64_t k, std::int64_t n, std::int64_t rho) {
  const std::int64_t period = 2 * rho;
  auto mod = [period](std::int64_t a) { return ((a % period) + period) % period; };
  const std::int64_t a = mod(mod(k) * mod(n));
  if (a % rho == 0) return 0.0;
  return std::sin(std::numbers::pi * static_cast<double>(a) / static_cast<double>(rho));
}

}  // namespace detail

/**
 psi(n) = prod_{i <= d1} sin(pi k_i n_i / rho_i) * prod_{j <= d2} exp(i kappa_j n_{d1+j}).

 The trimmed factors vanish on rho_i Z, so psi vanishes on Gamma and V psi = 0 for any potential
 supported there; H psi = H0 psi = E psi.
 */
class TrimmedPlaneWave {
 public:
  TrimmedPlaneWave(TrimPattern pattern, std::vector<std::int64_t> k, std::vector<double> kappa)
      : pattern_(std::move(pattern)), k_(std::move(k)), kappa_(std::move(kappa)) {
    if (pattern_.is_full_lattice()) throw ConfigError("trimmed waves need a periodic pattern, not Gamma = Z^d");
    if (static_cast<int>(k_.size()) != pattern_.d1())
      throw ConfigError("expected " + std::to_string(pattern_.d1()) + " trimmed wave numbers k, got " +
                        std::to_string(k_.size()));
    if (static_cast<int>(kappa_.size()) != pattern_.d2())
      throw ConfigError("expected " + std::to_string(pattern_.d2()) + " free momenta kappa, got " +
                        std::to_string(kappa_.size()));
    energy_ = 0.0;
    for (int i = 0; i < pattern_.d1(); ++i) {
      const auto rho = pattern_.rho()[i];
      if (k_[i] % rho == 0)
        throw ConfigError("k_" + std::to_string(i + 1) + " = " + std::to_string(k_[i]) + " is a multiple of rho_" +
                          std::to_string(i + 1) + " = " + std::to_string(rho) + "; the wave would vanish identically");
      energy_ += 2.0 * std::cos(std::numbers::pi * static_cast<double>(k_[i]) / static_cast<double>(rho));
    }
    for (double kap : kappa_) {
      if (!std::isfinite(kap)) throw ConfigError("free momentum kappa must be finite");
      energy_ += 2.0 * std::cos(kap);
    }
  }

  const TrimPattern& pattern() const noexcept { return pattern_; }
  const std::vector<std::int64_t>& k() const noexcept { return k_; }
  const std::vector<double>& kappa() const noexcept { return kappa_; }
  double energy() const noexcept { return energy_; }
  int dim() const noexcept { return pattern_.dim(); }

  std::complex<double> operator()(const Site& n) const {
    double amp = 1.0;
    for (int i = 0; i < pattern_.d1(); ++i) amp *= detail::nodal_sin(k_[i], n[i], pattern_.rho()[i]);
    if (amp == 0.0) return 0.0;
    double phase = 0.0;
    for (int j = 0; j < pattern_.d2(); ++j) phase += kappa_[j] * static_cast<double>(n[pattern_.d1() + j]);
    return amp * std::complex<double>(std::cos(phase), std::sin(phase));
  }

 private:
  TrimPattern pattern_;
  std::vector<std::int64_t> k_;
  std::vector<double> kappa_;
  double energy_ = 0.0;
};

inline TrimmedPlaneWave make_trimmed_wave(const TrimPattern& pattern, std::vector<std::int64_t> k,
                                          std::vector<double> kappa) {
  return {pattern, std::move(k), std::move(kappa)};
}

/// exp(i theta . n), energy sum 2 cos theta_i.
inline Evaluator plane_wave(std::vector<double> theta) {
  return [theta = std::move(theta)](const Site& n) {
    double ph = 0.0;
    for (std::size_t i = 0; i < theta.size(); ++i) ph += theta[i] * static_cast<double>(n[i]);
    return std::complex<double>(std::cos(ph), std::sin(ph));
  };
}

/**
 Max over interior sites (all 2d neighbours in the box) of |(H psi)(n) - E psi(n)|. The evaluator is
 read on every site of H's box.
 */
inline double validate_generalized_eigenfunction(const SparseHamiltonian& h, const Evaluator& psi, double energy) {
  const auto& box = h.box();
  const ComplexVector v = tabulate(psi, box);
  ComplexVector hv(v.size());
  h.apply<std::complex<double>>(v, hv);
  double worst = 0.0;
  box.for_each_site([&](std::size_t i, const Site& n) {
    if (box.distance_from_center(n) >= box.radius() || !h.is_active(i)) return;
    worst = std::max(worst, std::abs(hv[i] - energy * v[i]));
  });
  return worst;
}

/**
 Solution of H0 psi = e psi on Z x Z^m that is l2 in the last m coordinates uniformly in the first:

   Psi(k, n) = amp * int_{S_e} exp(i k theta_1^+(theta)) exp(i n . theta) dtheta,
   theta_1^+ = acos(e/2 - sum_j cos theta_j),

 with S_e a cube about the diagonal on which |e - sum_j 2 cos theta_j| < 2, integrated by the tensor
 midpoint rule. Every node satisfies the dispersion relation exactly.
 */
class TransverseSolution {
 public:
  TransverseSolution(double e, int m, int resolution, double amplitude = 1.0)
      : e_(e), m_(m), M_(resolution), amplitude_(amplitude) {
    if (m_ < 0) throw ConfigError("transverse dimension m must be nonnegative");
    if (M_ < 8) throw ConfigError("quadrature resolution M must be at least 8");
    if (!(std::abs(e_) < 2.0 * (m_ + 1)))
      throw PreconditionError("transverse energy e = " + std::to_string(e_) + " must satisfy |e| < 2(m+1) = " +
                              std::to_string(2 * (m_ + 1)));
    if (m_ == 0) {
      theta1_.push_back(std::acos(e_ / 2.0));
      weight_ = amplitude_;
      return;
    }
    const double two_m = 2.0 * m_;
    const double eta = std::min(0.1, (2.0 * (m_ + 1) - std::abs(e_)) / 2.0);
    const double s_star = std::clamp(e_, -two_m + eta, two_m - eta);
    center_ = std::acos(s_star / two_m);
    const double margin = std::min(0.1, (2.0 - std::abs(e_ - s_star)) / 2.0);
    double r = std::min({center_, std::numbers::pi - center_, 0.5});
    auto worst = [&](double rad) {
      return std::max(std::abs(e_ - two_m * std::cos(center_ + rad)), std::abs(e_ - two_m * std::cos(center_ - rad)));
    };
    while (r > 0.0 && !(worst(r) <= 2.0 - margin && center_ - r > 0.0 && center_ + r < std::numbers::pi)) r *= 0.5;
    if (!(r > 0.0)) throw NumericError("could not place a quadrature ball for e = " + std::to_string(e_));
    radius_ = r;
    h_ = 2.0 * r / M_;
    weight_ = amplitude_ * std::pow(h_, m_);
    axis_.resize(M_);
    for (int i = 0; i < M_; ++i) axis_[i] = center_ - r + (i + 0.5) * h_;

    std::size_t count = 1;
    for (int j = 0; j < m_; ++j) {
      if (count > std::numeric_limits<std::size_t>::max() / M_ || count * M_ > (std::size_t{1} << 26))
        throw ResourceError("transverse quadrature with M^m nodes is too large");
      count *= M_;
    }
    theta1_.resize(count);
    std::vector<int> idx(m_, 0);
    for (std::size_t node = 0; node < count; ++node) {
      double s = 0.0;
      for (int j = 0; j < m_; ++j) s += std::cos(axis_[idx[j]]);
      theta1_[node] = std::acos(std::clamp(e_ / 2.0 - s, -1.0, 1.0));
      for (int j = m_ - 1; j >= 0; --j) {
        if (++idx[j] < M_) break;
        idx[j] = 0;
      }
    }
  }

  double energy() const noexcept { return e_; }
  int m() const noexcept { return m_; }
  int resolution() const noexcept { return M_; }
  double ball_center() const noexcept { return center_; }
  double ball_radius() const noexcept { return radius_; }
  double amplitude() const noexcept { return amplitude_; }
  std::size_t node_count() const noexcept { return theta1_.size(); }

  /// theta_j of node `node`; index 0 is theta_1^+.
  std::vector<double> node_angles(std::size_t node) const {
    std::vector<double> out{theta1_[node]};
    std::vector<double> rest(m_);
    for (int j = m_ - 1; j >= 0; --j) {
      rest[j] = axis_[node % M_];
      node /= M_;
    }
    out.insert(out.end(), rest.begin(), rest.end());
    return out;
  }

  /// Psi(k, n) with n of length m.
  std::complex<double> operator()(std::int64_t k, const std::int64_t* n) const {
    if (m_ == 0) return amplitude_ * std::polar(1.0, static_cast<double>(k) * theta1_[0]);
    std::complex<double> s = 0.0;
    const auto kd = static_cast<double>(k);
    std::vector<int> idx(m_, 0);
    for (std::size_t node = 0; node < theta1_.size(); ++node) {
      double ph = kd * theta1_[node];
      for (int j = 0; j < m_; ++j) ph += static_cast<double>(n[j]) * axis_[idx[j]];
      s += std::complex<double>(std::cos(ph), std::sin(ph));
      for (int j = m_ - 1; j >= 0; --j) {
        if (++idx[j] < M_) break;
        idx[j] = 0;
      }
    }
    return weight_ * s;
  }

  std::complex<double> operator()(const Site& kn) const { return (*this)(kn[0], kn.data() + 1); }

  /**
   Table of Psi(k, n) for k in [k_lo, k_hi], n in [n_lo, n_hi] when m = 1 (row k, column n), computed
   as one complex matrix product over the quadrature nodes.
   */
  Eigen::MatrixXcd tabulate_plane(std::int64_t k_lo, std::int64_t k_hi, std::int64_t n_lo, std::int64_t n_hi) const {
    if (m_ != 1) throw ConfigError("plane tabulation needs m = 1");
    const auto rows = static_cast<Eigen::Index>(k_hi - k_lo + 1);
    const auto cols = static_cast<Eigen::Index>(n_hi - n_lo + 1);
    Eigen::MatrixXcd a(rows, M_), b(M_, cols);
    for (Eigen::Index r = 0; r < rows; ++r)
      for (int j = 0; j < M_; ++j) a(r, j) = std::polar(1.0, static_cast<double>(k_lo + r) * theta1_[j]);
    for (int j = 0; j < M_; ++j)
      for (Eigen::Index c = 0; c < cols; ++c) b(j, c) = std::polar(1.0, static_cast<double>(n_lo + c) * axis_[j]);
    Eigen::MatrixXcd t = a * b;
    t *= weight_;
    return t;
  }

  /// sum_{|n|_inf <= window} |Psi(k, n)|^2
  double slice_l2(std::int64_t k, std::int64_t window) const {
    double s = 0.0;
    if (m_ == 0) return std::norm(amplitude_);
    LatticeBox slice = LatticeBox::at_origin(m_, window);
    slice.for_each_site([&](std::size_t, const Site& n) { s += std::norm((*this)(k, n.data())); });
    return s;
  }

  TransverseSolution scaled(double factor) const {
    TransverseSolution out = *this;
    out.amplitude_ *= factor;
    out.weight_ *= factor;
    return out;
  }

 private:
  double e_;
  int m_;
  int M_;
  double amplitude_;
  double center_ = 0.0;
  double radius_ = 0.0;
  double h_ = 0.0;
  double weight_ = 1.0;
  std::vector<double> axis_;
  std::vector<double> theta1_;
};

inline TransverseSolution make_transverse_solution(double e, int m, int resolution) { return {e, m, resolution}; }

/**
 psi(n) = prod_{i <= d1} sin(pi k_i n_i / rho_i) * Psi(n_{d1+1}, ..., n_d) with Psi the transverse solution
 on Z x Z^{d2-1} at energy e. Bounded in n_{d1+1}, l2 in the remaining free coordinates.

 With m <= 1 the transverse factor is tabulated on a square window of the given radius; sites outside
 fall back to the direct quadrature sum.
 */
class TrimmedTransverseWave {
 public:
  TrimmedTransverseWave(TrimPattern pattern, std::vector<std::int64_t> k, TransverseSolution transverse,
                        std::int64_t window = 0)
      : pattern_(std::move(pattern)), k_(std::move(k)), transverse_(std::move(transverse)), window_(window) {
    if (pattern_.is_full_lattice() || pattern_.d2() < 1)
      throw ConfigError("transverse trimmed waves need a periodic pattern with d2 >= 1");
    if (transverse_.m() != pattern_.d2() - 1) throw ConfigError("transverse solution must have m = d2 - 1");
    if (static_cast<int>(k_.size()) != pattern_.d1()) throw ConfigError("wrong number of trimmed wave numbers k");
    energy_ = transverse_.energy();
    for (int i = 0; i < pattern_.d1(); ++i) {
      if (k_[i] % pattern_.rho()[i] == 0) throw ConfigError("k_i must not be a multiple of rho_i");
      energy_ += 2.0 * std::cos(std::numbers::pi * static_cast<double>(k_[i]) / static_cast<double>(pattern_.rho()[i]));
    }
    if (window_ > 0 && transverse_.m() == 1)
      table_ = std::make_shared<Eigen::MatrixXcd>(transverse_.tabulate_plane(-window_, window_, -window_, window_));
  }

  double energy() const noexcept { return energy_; }
  const TransverseSolution& transverse() const noexcept { return transverse_; }
  const TrimPattern& pattern() const noexcept { return pattern_; }

  std::complex<double> operator()(const Site& n) const {
    double amp = 1.0;
    const int d1 = pattern_.d1();
    for (int i = 0; i < d1; ++i) amp *= detail::nodal_sin(k_[i], n[i], pattern_.rho()[i]);
    if (amp == 0.0) return 0.0;
    if (table_ && transverse_.m() == 1 && std::llabs(n[d1]) <= window_ && std::llabs(n[d1 + 1]) <= window_)
      return amp * (*table_)(n[d1] + window_, n[d1 + 1] + window_);
    return amp * transverse_(n[d1], n.data() + d1 + 1);
  }

 private:
  TrimPattern pattern_;
  std::vector<std::int64_t> k_;
  TransverseSolution transverse_;
  std::int64_t window_;
  double energy_ = 0.0;
  std::shared_ptr<const Eigen::MatrixXcd> table_;
};

/**
 Solution of u(n+1) + u(n-1) + V(n) u(n) = E u(n) on [-N, N] from two initial values, grown in both
 directions by the transfer matrix. Exact generalized eigenfunction of the d = 1 operator.
 */
class ChainSolution {
 public:
  ChainSolution(const PotentialSpec& pot, double energy, std::int64_t reach, double u0 = 1.0, double u1 = 1.0)
      : energy_(energy), reach_(reach), values_(static_cast<std::size_t>(2 * reach + 1)) {
    if (pot.dim() != 1) throw ConfigError("transfer-matrix solutions need a one-dimensional potential");
    if (reach < 1) throw ConfigError("chain reach must be at least 1");
    auto v = [&](std::int64_t n) {
      const double x = pot.value_at({n});
      if (std::isinf(x)) throw ConfigError("transfer matrix cannot cross a removed site");
      return x;
    };
    at(0) = u0;
    at(1) = u1;
    for (std::int64_t n = 1; n < reach; ++n) at(n + 1) = (energy - v(n)) * at(n) - at(n - 1);
    for (std::int64_t n = 0; n > -reach; --n) at(n - 1) = (energy - v(n)) * at(n) - at(n + 1);
    for (double x : values_)
      if (!std::isfinite(x)) throw NumericError("transfer-matrix solution overflowed; reduce the reach");
  }

  double energy() const noexcept { return energy_; }
  std::int64_t reach() const noexcept { return reach_; }

  double value(std::int64_t n) const {
    if (std::llabs(n) > reach_)
      throw ConfigError("site " + std::to_string(n) + " lies beyond the chain reach " + std::to_string(reach_));
    return values_[static_cast<std::size_t>(n + reach_)];
  }
  std::complex<double> operator()(const Site& n) const { return value(n[0]); }

 private:
  double& at(std::int64_t n) { return values_[static_cast<std::size_t>(n + reach_)]; }
  double energy_;
  std::int64_t reach_;
  std::vector<double> values_;
};

/// psi(n) = prod_i f_i(n_i) for one-dimensional factors; energies add.
inline Evaluator product_evaluator(std::vector<Evaluator> factors) {
  return [factors = std::move(factors)](const Site& n) {
    std::complex<double> p = 1.0;
    for (std::size_t i = 0; i < factors.size(); ++i) p *= factors[i](Site{n[i]});
    return p;
  };
}

/// Evaluator scaled by a constant.
inline Evaluator scaled_evaluator(Evaluator psi, std::complex<double> c) {
  return [psi = std::move(psi), c](const Site& n) { return c * psi(n); };
}

struct PowerLawFit {
  double nu = 0.0;         ///< clamped to [0, 1)
  double nu_raw = 0.0;     ///< unclamped exponent
  double nu_loglog = 0.0;  ///< plain log S vs log L slope over the same window
  double amplitude = 0.0;  ///< A = max_L S(L) / L^nu
  double residual = 0.0;   ///< rms residual of the increment fit (log scale)
  std::int64_t l_lo = 0;
  std::int64_t l_hi = 0;
};

/// Shell and weighted sums of |psi| about n0, L = 0..L_max (index L).
struct GrowthProfile {
  Site center;
  std::int64_t l_max = 0;
  std::vector<double> shell_l1;  ///< sum over the enlarged shell of |psi|
  std::vector<double> weighted;  ///< sum over Lambda_L of |psi|^2 / phi
  PowerLawFit fit;
};

namespace detail {

inline std::pair<double, double> least_squares(const std::vector<double>& x, const std::vector<double>& y,
                                               double* rms = nullptr) {
  const auto n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  const double den = n * sxx - sx * sx;
  const double slope = den != 0.0 ? (n * sxy - sx * sy) / den : 0.0;
  const double icpt = (sy - slope * sx) / n;
  if (rms) {
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += std::pow(y[i] - (icpt + slope * x[i]), 2);
    *rms = std::sqrt(s / n);
  }
  return {slope, icpt};
}

}  // namespace detail

/**
 Fits S(L) <= A L^nu over the largest decade [L_max/10, L_max]. The exponent comes from the per-shell
 increments S(L) - S(L-1) ~ nu A L^{nu-1}, which converge to the asymptotic rate much faster than log S
 itself when S carries a large constant part. A is the envelope max_L S(L)/L^nu over L >= 1.
 */
inline PowerLawFit fit_growth(const std::vector<double>& sums) {
  PowerLawFit fit;
  const auto l_max = static_cast<std::int64_t>(sums.size()) - 1;
  if (l_max < 2) throw ConfigError("growth fit needs L_max >= 2");
  fit.l_hi = l_max;
  fit.l_lo = std::max<std::int64_t>(2, l_max / 10);
  std::vector<double> xi, yi, xs, ys;
  for (std::int64_t L = fit.l_lo; L <= l_max; ++L) {
    const double inc = sums[L] - sums[L - 1];
    const double lg = std::log(static_cast<double>(L));
    if (inc > 0.0) {
      xi.push_back(lg);
      yi.push_back(std::log(inc));
    }
    if (sums[L] > 0.0) {
      xs.push_back(lg);
      ys.push_back(std::log(sums[L]));
    }
  }
  if (xi.size() >= 2) {
    fit.nu_raw = detail::least_squares(xi, yi, &fit.residual).first + 1.0;
  } else {
    fit.nu_raw = 0.0;  // no growth at all in the window
  }
  if (xs.size() >= 2) fit.nu_loglog = detail::least_squares(xs, ys).first;
  fit.nu = std::clamp(fit.nu_raw, 0.0, std::nextafter(1.0, 0.0));
  for (std::int64_t L = 1; L <= l_max; ++L)
    fit.amplitude = std::max(fit.amplitude, sums[L] / std::pow(static_cast<double>(L), fit.nu));
  return fit;
}

/**
 One pass over Lambda_{L_max+1}(n0). A site at sup-distance r from n0 contributes |psi| to the
 enlarged shells of L = r and L = r - 1 and |psi|^2/phi to every box sum with L >= r.
 */
inline GrowthProfile growth_profile(const Evaluator& psi, const GrowthWeight& phi, const Site& n0, std::int64_t l_max,
                                    std::size_t threads = 0) {
  if (l_max < 1) throw ConfigError("growth profile needs L_max >= 1");
  const LatticeBox outer(static_cast<int>(n0.size()), n0, l_max + 1);
  const std::int64_t side = outer.side();
  const auto bins = static_cast<std::size_t>(l_max + 2);
  struct Slab {
    std::vector<double> l1, w;
  };
  // One slab per value of the first coordinate keeps the reduction order fixed.
  auto slabs = parallel_map<Slab>(
      static_cast<std::size_t>(side),
      [&](std::size_t s) {
        Slab out{std::vector<double>(bins, 0.0), std::vector<double>(bins, 0.0)};
        const int d = outer.dim();
        Site c = n0;
        c[0] = n0[0] - (l_max + 1) + static_cast<std::int64_t>(s);
        auto visit = [&](const Site& n) {
          const auto r = static_cast<std::size_t>(sup_distance(n, n0));
          const std::complex<double> v = psi(n);
          const double a = std::abs(v);
          out.l1[r] += a;
          if (r <= static_cast<std::size_t>(l_max)) {
            const double w = phi(n);
            if (!(w > 0.0)) throw ConfigError("growth profiles need a strictly positive weight; phi(" + to_string(n) + ") = " + std::to_string(w));
            out.w[r] += a * a / w;
          }
        };
        if (d == 1) {
          visit(c);
        } else {
          const LatticeBox rest(d - 1, Site(n0.begin() + 1, n0.end()), l_max + 1);
          Site n(d);
          n[0] = c[0];
          rest.for_each_site([&](std::size_t, const Site& m) {
            std::copy(m.begin(), m.end(), n.begin() + 1);
            visit(n);
          });
        }
        return out;
      },
      threads);
  std::vector<double> ring_l1(bins, 0.0), ring_w(bins, 0.0);
  for (const auto& s : slabs)
    for (std::size_t r = 0; r < bins; ++r) {
      ring_l1[r] += s.l1[r];
      ring_w[r] += s.w[r];
    }
  GrowthProfile p;
  p.center = n0;
  p.l_max = l_max;
  p.shell_l1.assign(static_cast<std::size_t>(l_max + 1), 0.0);
  p.weighted.assign(static_cast<std::size_t>(l_max + 1), 0.0);
  double acc = 0.0;
  for (std::int64_t L = 0; L <= l_max; ++L) {
    p.shell_l1[L] = ring_l1[L] + ring_l1[L + 1];
    acc += ring_w[L];
    p.weighted[L] = acc;
  }
  p.fit = fit_growth(p.weighted);
  return p;
}

/// Combes-Thomas rate: c = 1/(12d) for delta <= 1, c = 1/(12 d delta) beyond.
inline double combes_thomas_constant(int dim, double delta) {
  if (!(delta > 0.0)) throw PreconditionError("Combes-Thomas constant needs delta > 0");
  return delta <= 1.0 ? 1.0 / (12.0 * dim) : 1.0 / (12.0 * dim * delta);
}

enum class DistanceMode { window, dense, automatic };

/// dist(E, sigma(H)): exact finite-volume value on dense-capable boxes, else the window bound.
inline double distance_to_spectrum(const SparseHamiltonian& h, std::complex<double> z, DistanceMode mode,
                                   std::size_t dense_cap = kDefaultDenseCap) {
  if (mode == DistanceMode::automatic) mode = h.size() <= dense_cap ? DistanceMode::dense : DistanceMode::window;
  if (mode == DistanceMode::dense) return spectrum_distance(z, dense_eig(h, dense_cap));
  return window_distance(z, spectrum_window(h));
}

struct BoundaryGrowthRow {
  std::int64_t L = 0;
  double shell_sum = 0.0;
  double ratio = 0.0;  ///< shell_sum / |psi(n0)|; NaN when psi(n0) = 0
  double threshold = 0.0;
  bool violated = false;
};

struct BoundaryGrowthReport {
  double energy = 0.0;
  double delta = 0.0;
  double c = 0.0;
  double psi_center = 0.0;
  bool ratio_defined = true;
  std::vector<BoundaryGrowthRow> rows;
  std::size_t violations() const {
    return static_cast<std::size_t>(std::count_if(rows.begin(), rows.end(), [](const auto& r) { return r.violated; }));
  }
};

/**
 For E outside the spectrum, checks sum_{enlarged shell L} |psi| >= (delta / 2d) e^{c delta L} |psi(n0)|
 for L in [l_lo, l_hi], with n0 the centre of H's box.
 */
inline BoundaryGrowthReport boundary_growth_check(const Evaluator& psi, double energy, const SparseHamiltonian& h,
                                                  std::int64_t l_lo, std::int64_t l_hi,
                                                  DistanceMode mode = DistanceMode::window) {
  if (l_lo < 0 || l_hi < l_lo) throw ConfigError("invalid L range for the boundary growth check");
  BoundaryGrowthReport rep;
  rep.energy = energy;
  rep.delta = distance_to_spectrum(h, energy, mode);
  if (!(rep.delta > 0.0))
    throw PreconditionError("E = " + std::to_string(energy) + " is not separated from the spectrum (delta = 0)");
  const int d = h.dim();
  rep.c = combes_thomas_constant(d, rep.delta);
  const Site& n0 = h.box().center();
  rep.psi_center = std::abs(psi(n0));
  rep.ratio_defined = rep.psi_center > 0.0;
  const auto prof = growth_profile(psi, GrowthWeight::constant_one(), n0, std::max<std::int64_t>(l_hi, 1), 1);
  for (std::int64_t L = l_lo; L <= l_hi; ++L) {
    BoundaryGrowthRow row;
    row.L = L;
    row.shell_sum = prof.shell_l1[L];
    row.threshold = rep.delta / (2.0 * d) * std::exp(rep.c * rep.delta * static_cast<double>(L));
    if (rep.ratio_defined) {
      row.ratio = row.shell_sum / rep.psi_center;
      row.violated = row.ratio < row.threshold;
    } else {
      row.ratio = std::numeric_limits<double>::quiet_NaN();
    }
    rep.rows.push_back(row);
  }
  return rep;
}

struct RemainderEntry {
  Site site;
  std::complex<double> value;
};

/**
 R(m) = sum_{|k|_1 = 1} [chi_L(m+k) - chi_L(m)] psi(m+k), the commutator [H0, chi_L] psi, listed over the
 enlarged shell of Lambda_L (its support) in lexicographic order.
 */
inline std::vector<RemainderEntry> commutator_remainder(const Evaluator& psi, const LatticeBox& box) {
  const Site& c = box.center();
  const std::int64_t L = box.radius();
  auto inside = [&](const Site& n) { return sup_distance(n, c) <= L; };
  std::vector<RemainderEntry> out;
  for (const Site& m : shell_sites({box, ShellKind::enlarged})) {
    const bool in_m = inside(m);
    std::complex<double> r = 0.0;
    Site nb = m;
    for (std::size_t axis = 0; axis < m.size(); ++axis)
      for (int s : {-1, 1}) {
        nb[axis] = m[axis] + s;
        const bool in_nb = inside(nb);
        if (in_nb != in_m && sup_distance(nb, c) <= L + 1) r += (in_nb ? 1.0 : -1.0) * psi(nb);
        nb[axis] = m[axis];
      }
    out.push_back({m, r});
  }
  return out;
}

inline double remainder_l1(const std::vector<RemainderEntry>& r) {
  double s = 0.0;
  for (const auto& e : r) s += std::abs(e.value);
  return s;
}

/// sum over the enlarged shell of Lambda_L of |psi|
inline double enlarged_shell_l1(const Evaluator& psi, const LatticeBox& box) {
  double s = 0.0;
  for (const Site& m : shell_sites({box, ShellKind::enlarged})) s += std::abs(psi(m));
  return s;
}

}  // namespace latticeq
