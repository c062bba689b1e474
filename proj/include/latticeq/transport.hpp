#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <numbers>
#include <ostream>
#include <string>
#include <vector>

#include "latticeq/csv.hpp"
#include "latticeq/eigenfunctions.hpp"
#include "latticeq/error.hpp"
#include "latticeq/hamiltonian.hpp"
#include "latticeq/numerics/chebyshev.hpp"
#include "latticeq/numerics/dense.hpp"
#include "latticeq/numerics/green.hpp"
#include "latticeq/numerics/quadrature.hpp"
#include "latticeq/parallel.hpp"
#include "latticeq/weight.hpp"

namespace latticeq {

enum class MomentRoute { abel, cesaro, resolvent, spectral_abel, spectral_cesaro };

inline std::string to_string(MomentRoute r) {
  switch (r) {
    case MomentRoute::abel: return "abel";
    case MomentRoute::cesaro: return "cesaro";
    case MomentRoute::resolvent: return "resolvent";
    case MomentRoute::spectral_abel: return "spectral_abel";
    default: return "spectral_cesaro";
  }
}

struct MomentValue {
  double T = 0.0;
  double value = 0.0;
  double error = 0.0;  ///< quadrature + truncation + solver/propagation estimate
};

struct MomentSeries {
  Site base;
  std::string weight;
  MomentRoute route = MomentRoute::abel;
  std::vector<MomentValue> points;
  // quadrature metadata
  double time_horizon = 0.0;           ///< largest time reached (time routes)
  std::int64_t truncation_radius = 0;  ///< box radius the sums run over
  std::size_t quadrature_nodes = 0;    ///< time nodes or energy nodes, summed over the grid
  double max_boundary_mass = 0.0;      ///< time routes: worst mass seen in the boundary layer

  std::vector<double> values() const {
    std::vector<double> v;
    for (const auto& p : points) v.push_back(p.value);
    return v;
  }
};

/// CSV with columns T,value,err,route.
inline void write_series_csv(std::ostream& os, const std::vector<MomentSeries>& all) {
  csv::Writer w(os, {"T", "value", "err", "route"});
  for (const auto& s : all)
    for (const auto& p : s.points) {
      w.cell(p.T).cell(p.value).cell(p.error).cell(to_string(s.route));
      w.end_row();
    }
}

struct TimeMomentOptions {
  double time_tol = 1e-8;   ///< Abel horizon t* = T ln(1/time_tol); boundary-layer mass threshold
  double prop_tol = 1e-10;  ///< total Chebyshev error budget over the trajectory
  double panel_scale = 12.0;  ///< panel width = panel_scale / (spectral width)
  bool check_containment = true;
  std::int64_t boundary_layer = 5;
};

namespace detail {

inline std::vector<double> weight_vector(const SparseHamiltonian& h, const GrowthWeight& phi) {
  std::vector<double> w(h.size());
  h.box().for_each_site([&](std::size_t i, const Site& n) {
    const double v = phi(n);
    if (!(v >= 0.0) || !std::isfinite(v)) throw ConfigError("weight must be finite and nonnegative at " + to_string(n));
    w[i] = v;
  });
  return w;
}

inline void check_grid(const std::vector<double>& grid) {
  if (grid.empty()) throw ConfigError("T grid is empty");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!(grid[i] > 0.0) || !std::isfinite(grid[i])) throw ConfigError("T grid values must be positive and finite");
    if (i > 0 && !(grid[i] > grid[i - 1])) throw ConfigError("T grid must be strictly ascending");
  }
}

inline double abel_horizon(double T, double time_tol) { return T * std::log(1.0 / time_tol); }

struct Panel {
  double a, b;
};

}  // namespace detail

/// Abel and Cesaro series computed from one trajectory.
struct TimeMomentResult {
  MomentSeries abel;
  MomentSeries cesaro;
};

/**
 Abel and Cesaro moments of phi(X) in the state exp(-itH) delta_k for every T of the grid.

 A single Chebyshev trajectory visits all Gauss-Kronrod nodes of a composite rule on [0, max t*], with
 panel breakpoints at each T and each Abel horizon t*(T) so every average is a sum over whole panels.
 Reported errors add the Kronrod-Gauss difference, the Abel tail beyond t* and the propagation error.
 */
inline TimeMomentResult time_moments(const SparseHamiltonian& h, const GrowthWeight& phi, const Site& k,
                                     const std::vector<double>& t_grid, const TimeMomentOptions& opt = {}) {
  detail::check_grid(t_grid);
  if (!(opt.time_tol > 0.0 && opt.time_tol < 1.0)) throw ConfigError("time_tol must lie in (0, 1)");
  if (!(opt.prop_tol > 0.0 && opt.prop_tol < 1.0)) throw ConfigError("prop_tol must lie in (0, 1)");
  const auto& box = h.box();
  const std::size_t k_idx = box.index_of(k);
  if (!h.is_active(k_idx)) throw PreconditionError("base site " + to_string(k) + " is removed from the box");
  const auto w = detail::weight_vector(h, phi);
  const double max_w = *std::max_element(w.begin(), w.end());

  const auto window = spectrum_window(h);
  const double omega = std::max(2.0 * window.half_width(), 1e-12);
  const double width_cap = opt.panel_scale / omega;

  std::vector<double> horizon(t_grid.size());
  std::vector<double> breaks{0.0};
  for (std::size_t i = 0; i < t_grid.size(); ++i) {
    horizon[i] = detail::abel_horizon(t_grid[i], opt.time_tol);
    breaks.push_back(t_grid[i]);
    breaks.push_back(horizon[i]);
  }
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());

  std::vector<detail::Panel> panels;
  for (std::size_t s = 0; s + 1 < breaks.size(); ++s) {
    const double a = breaks[s], b = breaks[s + 1];
    double cap = width_cap;
    // The Abel kernel exp(-t/T) of the smallest T still active on this segment limits the panel width.
    for (std::size_t i = 0; i < t_grid.size(); ++i)
      if (horizon[i] >= b) {
        cap = std::min(cap, 4.0 * t_grid[i]);
        break;
      }
    const auto n = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil((b - a) / cap - 1e-12)));
    for (std::size_t j = 0; j < n; ++j)
      panels.push_back({a + (b - a) * j / n, j + 1 == n ? b : a + (b - a) * (j + 1) / n});
  }

  const auto& rule = gk31();
  const std::size_t per = rule.size();
  const std::size_t total_nodes = panels.size() * per;
  std::vector<double> f(total_nodes), prop_err(total_nodes);

  // Boundary layer: sites within `boundary_layer` of the box surface.
  std::vector<std::size_t> layer;
  box.for_each_site([&](std::size_t i, const Site& n) {
    if (box.distance_from_center(n) >= box.radius() - opt.boundary_layer) layer.push_back(i);
  });

  ChebyshevPropagator prop(h);
  ComplexVector psi(h.size());
  psi[k_idx] = 1.0;
  double t_now = 0.0, delta = 0.0, worst_layer = 0.0;
  const double step_tol = opt.prop_tol / static_cast<double>(total_nodes);
  for (std::size_t p = 0; p < panels.size(); ++p) {
    const double mid = 0.5 * (panels[p].a + panels[p].b), half = 0.5 * (panels[p].b - panels[p].a);
    for (std::size_t j = 0; j < per; ++j) {
      const double t = mid + half * rule.nodes[j];
      delta += prop.step(psi, t - t_now, step_tol);
      t_now = t;
      double fv = 0.0;
      for (std::size_t i = 0; i < psi.size(); ++i) fv += w[i] * std::norm(psi[i]);
      double lm = 0.0;
      for (auto i : layer) lm += std::norm(psi[i]);
      worst_layer = std::max(worst_layer, lm);
      if (opt.check_containment && lm > opt.time_tol) {
        const auto inner = static_cast<double>(std::max<std::int64_t>(box.radius() - opt.boundary_layer, 1));
        const auto safe = static_cast<std::int64_t>(std::ceil(inner * breaks.back() / std::max(t, 1e-12))) + opt.boundary_layer;
        throw ContainmentError("wavefront reached the boundary layer at t = " + std::to_string(t) + " (mass " +
                                   std::to_string(lm) + " > " + std::to_string(opt.time_tol) +
                                   "); box radius " + std::to_string(box.radius()) + " is too small, need about L >= " +
                                   std::to_string(safe),
                               safe);
      }
      f[p * per + j] = fv;
      prop_err[p * per + j] = std::sqrt(max_w) * delta * (2.0 * std::sqrt(fv) + std::sqrt(max_w) * delta);
    }
  }

  TimeMomentResult out;
  for (auto* s : {&out.abel, &out.cesaro}) {
    s->base = k;
    s->weight = phi.describe();
    s->time_horizon = t_now;
    s->truncation_radius = box.radius();
    s->quadrature_nodes = total_nodes;
    s->max_boundary_mass = worst_layer;
  }
  out.abel.route = MomentRoute::abel;
  out.cesaro.route = MomentRoute::cesaro;

  for (std::size_t i = 0; i < t_grid.size(); ++i) {
    const double T = t_grid[i];
    double ak = 0, ag = 0, ap = 0, ck = 0, cg = 0, cp = 0;
    for (std::size_t p = 0; p < panels.size(); ++p) {
      const double mid = 0.5 * (panels[p].a + panels[p].b), half = 0.5 * (panels[p].b - panels[p].a);
      const bool in_abel = panels[p].b <= horizon[i] * (1 + 1e-14);
      const bool in_ces = panels[p].b <= T * (1 + 1e-14);
      if (!in_abel && !in_ces) continue;
      for (std::size_t j = 0; j < per; ++j) {
        const double t = mid + half * rule.nodes[j];
        const double fv = f[p * per + j];
        if (in_abel) {
          const double ker = std::exp(-t / T) / T * half;
          ak += rule.kronrod_weights[j] * ker * fv;
          ag += rule.gauss_weights[j] * ker * fv;
          ap = std::max(ap, prop_err[p * per + j]);
        }
        if (in_ces) {
          const double ker = half / T;
          ck += rule.kronrod_weights[j] * ker * fv;
          cg += rule.gauss_weights[j] * ker * fv;
          cp = std::max(cp, prop_err[p * per + j]);
        }
      }
    }
    const double tail = max_w * std::exp(-horizon[i] / T);
    out.abel.points.push_back({T, ak, std::abs(ak - ag) + tail + ap});
    out.cesaro.points.push_back({T, ck, std::abs(ck - cg) + cp});
  }
  return out;
}

/// Abel-averaged moment (1/T) int_0^inf e^{-t/T} <delta_k, e^{iHt} phi(X) e^{-iHt} delta_k> dt.
inline MomentValue abel_moment(const SparseHamiltonian& h, const GrowthWeight& phi, const Site& k, double T,
                               const TimeMomentOptions& opt = {}) {
  return time_moments(h, phi, k, {T}, opt).abel.points.front();
}

/// Cesaro moment (1/T) int_0^T <delta_k, e^{iHt} phi(X) e^{-iHt} delta_k> dt.
inline MomentValue cesaro_moment(const SparseHamiltonian& h, const GrowthWeight& phi, const Site& k, double T,
                                 const TimeMomentOptions& opt = {}) {
  return time_moments(h, phi, k, {T}, opt).cesaro.points.front();
}

/**
 Exact finite-box moments from a full diagonalization: with c_j = v_j(k) and
 Phi_jl = sum_n phi(n) v_j(n) v_l(n),

   Abel:   sum_{j,l} c_j c_l Phi_jl / (1 + (lambda_j - lambda_l)^2 T^2)
   Cesaro: sum_{j,l} c_j c_l Phi_jl sinc((lambda_j - lambda_l) T).
 */
inline MomentSeries spectral_moments(const SparseHamiltonian& h, const DenseSpectrum& spec, const GrowthWeight& phi,
                                     const Site& k, const std::vector<double>& t_grid, bool abel) {
  detail::check_grid(t_grid);
  const auto w = detail::weight_vector(h, phi);
  const auto k_idx = static_cast<Eigen::Index>(h.box().index_of(k));
  const Eigen::Index n = spec.values.size();
  Eigen::VectorXd c = spec.vectors.row(k_idx).transpose();
  Eigen::MatrixXd scaled = spec.vectors;
  for (Eigen::Index r = 0; r < scaled.rows(); ++r) scaled.row(r) *= w[static_cast<std::size_t>(r)];
  Eigen::MatrixXd Phi = spec.vectors.transpose() * scaled;
  MomentSeries s;
  s.base = k;
  s.weight = phi.describe();
  s.route = abel ? MomentRoute::spectral_abel : MomentRoute::spectral_cesaro;
  s.truncation_radius = h.box().radius();
  for (double T : t_grid) {
    double acc = 0.0;
    for (Eigen::Index j = 0; j < n; ++j)
      for (Eigen::Index l = 0; l < n; ++l) {
        const double om = (spec.values(j) - spec.values(l)) * T;
        const double ker = abel ? 1.0 / (1.0 + om * om) : (om == 0.0 ? 1.0 : std::sin(om) / om);
        acc += c(j) * c(l) * Phi(j, l) * ker;
      }
    s.points.push_back({T, acc, 1e-12 * std::max(1.0, std::abs(acc))});
  }
  return s;
}

struct ResolventOptions {
  double solve_tol = 1e-10;
  double padding = 10.0;      ///< window padding in units of epsilon
  double panel_width = 1.0;   ///< inner panel width in units of epsilon
  std::size_t tail_panels = 16;
  GreenMethod method = GreenMethod::automatic;
  std::size_t threads = 0;
};

/// epsilon * sum_n phi(n) |G_{E + i epsilon}(n, n0)|^2 over the box, with the solve used.
struct WeightedResolventSum {
  double value = 0.0;
  double residual = 0.0;
  double plain_norm2 = 0.0;  ///< sum_n |G|^2
};

inline WeightedResolventSum weighted_resolvent_sum(const SparseHamiltonian& h, const GrowthWeight& phi, const Site& n0,
                                                   double energy, double eps, const GreenOptions& gopt = {}) {
  if (!(eps > 0.0)) throw ConfigError("epsilon must be positive");
  const auto w = detail::weight_vector(h, phi);
  const auto col = green_column(h, {energy, eps}, n0, gopt);
  WeightedResolventSum r;
  for (std::size_t i = 0; i < w.size(); ++i) {
    r.value += w[i] * std::norm(col.values[i]);
    r.plain_norm2 += std::norm(col.values[i]);
  }
  r.value *= eps;
  r.residual = col.residual_norm;
  return r;
}

/**
 M(T) = (1 / 2 pi T) int_R sum_n phi(n) |G_{E + i/(2T)}(n, n0)|^2 dE.

 The padded spectral window is cut into panels no wider than epsilon (the Lorentzian width) and
 integrated with Gauss-Kronrod 21; each tail beyond it is mapped to [0, 1) by E = edge + s u/(1-u), which
 leaves a bounded integrand. One Green column per node.
 */
inline MomentSeries moment_via_resolvent(const SparseHamiltonian& h, const GrowthWeight& phi, const Site& n0,
                                         const std::vector<double>& t_grid, const ResolventOptions& opt = {}) {
  detail::check_grid(t_grid);
  const auto w = detail::weight_vector(h, phi);
  const double max_w = *std::max_element(w.begin(), w.end());
  const auto src = h.box().index_of(n0);
  if (!h.is_active(src)) throw PreconditionError("source site " + to_string(n0) + " is removed from the box");
  const auto window = spectrum_window(h);
  const auto& rule = gk21();
  const std::size_t per = rule.size();

  MomentSeries s;
  s.base = n0;
  s.weight = phi.describe();
  s.route = MomentRoute::resolvent;
  s.truncation_radius = h.box().radius();
  GreenOptions gopt;
  gopt.tol = opt.solve_tol;
  gopt.method = opt.method;

  for (double T : t_grid) {
    const double eps = 1.0 / (2.0 * T);
    const double lo = window.lo - opt.padding * eps, hi = window.hi + opt.padding * eps;
    const auto inner = static_cast<std::size_t>(std::ceil((hi - lo) / (opt.panel_width * eps)));
    const double scale = std::max(opt.padding * eps, 1.0);
    struct Node {
      double energy, jac_k, jac_g;
    };
    std::vector<Node> nodes;
    for (std::size_t p = 0; p < inner; ++p) {
      const double a = lo + (hi - lo) * p / inner, b = lo + (hi - lo) * (p + 1) / inner;
      const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
      for (std::size_t j = 0; j < per; ++j)
        nodes.push_back({mid + half * rule.nodes[j], half * rule.kronrod_weights[j], half * rule.gauss_weights[j]});
    }
    for (int side : {-1, 1}) {
      const double edge = side > 0 ? hi : lo;
      for (std::size_t p = 0; p < opt.tail_panels; ++p) {
        const double a = static_cast<double>(p) / opt.tail_panels, b = static_cast<double>(p + 1) / opt.tail_panels;
        const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
        for (std::size_t j = 0; j < per; ++j) {
          const double u = mid + half * rule.nodes[j];
          const double jac = scale / ((1.0 - u) * (1.0 - u));
          nodes.push_back({edge + side * scale * u / (1.0 - u), half * rule.kronrod_weights[j] * jac,
                           half * rule.gauss_weights[j] * jac});
        }
      }
    }
    struct NodeValue {
      double sum, bound;
    };
    auto vals = parallel_map<NodeValue>(
        nodes.size(),
        [&](std::size_t i) {
          const auto col = green_column(h, {nodes[i].energy, eps}, n0, gopt);
          double sw = 0.0, s2 = 0.0;
          for (std::size_t m = 0; m < w.size(); ++m) {
            const double a2 = std::norm(col.values[m]);
            sw += w[m] * a2;
            s2 += a2;
          }
          // |G - G_exact| <= residual / eps
          const double dg = col.residual_norm / eps;
          return NodeValue{sw, max_w * dg * (2.0 * std::sqrt(s2) + dg)};
        },
        opt.threads);
    double vk = 0.0, vg = 0.0, solver = 0.0;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      vk += nodes[i].jac_k * vals[i].sum;
      vg += nodes[i].jac_g * vals[i].sum;
      solver += nodes[i].jac_k * vals[i].bound;
    }
    const double norm = 1.0 / (2.0 * std::numbers::pi * T);
    s.points.push_back({T, norm * vk, norm * (std::abs(vk - vg) + solver)});
    s.quadrature_nodes += nodes.size();
  }
  return s;
}

inline MomentValue moment_via_resolvent(const SparseHamiltonian& h, const GrowthWeight& phi, const Site& n0, double T,
                                        const ResolventOptions& opt = {}) {
  return moment_via_resolvent(h, phi, n0, std::vector<double>{T}, opt).points.front();
}

struct ExponentFit {
  double slope = 0.0;
  double intercept = 0.0;
  double residual = 0.0;  ///< rms residual in log space
  std::size_t points = 0;
};

/// Least-squares slope of log value against log T over T in [t_lo, t_hi].
inline ExponentFit fit_transport_exponent(const MomentSeries& series, double t_lo, double t_hi) {
  std::vector<double> x, y;
  for (const auto& p : series.points) {
    if (p.T < t_lo || p.T > t_hi) continue;
    if (!(p.value > 0.0))
      throw PreconditionError("moment value " + std::to_string(p.value) + " at T = " + std::to_string(p.T) +
                              " is not positive; log-log fit undefined");
    x.push_back(std::log(p.T));
    y.push_back(std::log(p.value));
  }
  if (x.size() < 5)
    throw ConfigError("exponent fit needs at least 5 grid points in [" + std::to_string(t_lo) + ", " +
                      std::to_string(t_hi) + "], got " + std::to_string(x.size()));
  ExponentFit fit;
  fit.points = x.size();
  std::tie(fit.slope, fit.intercept) = detail::least_squares(x, y, &fit.residual);
  return fit;
}

/// Geometric T grid with n points from t_lo to t_hi.
inline std::vector<double> geometric_grid(double t_lo, double t_hi, std::size_t n) {
  if (!(t_lo > 0.0) || !(t_hi > t_lo) || n < 2) throw ConfigError("geometric grid needs 0 < t_lo < t_hi and n >= 2");
  std::vector<double> g(n);
  for (std::size_t i = 0; i < n; ++i)
    g[i] = t_lo * std::pow(t_hi / t_lo, static_cast<double>(i) / static_cast<double>(n - 1));
  g.back() = t_hi;
  return g;
}

/**
 Lower bound implied by a growth profile (A, nu) and psi(n0) != 0:

   epsilon sum phi |G_{E+i epsilon}(n0, .)|^2 >= epsilon^{alpha nu - 1} |psi(n0)|^2 / (4A),

 i.e. (2T)^{1 - alpha nu} |psi(n0)|^2 / (4A) at epsilon = 1/(2T).
 */
struct DelocalizationCertificate {
  double alpha = 1.05;
  double nu = 0.0;
  double amplitude = 1.0;
  double psi_n0 = 0.0;

  double exponent() const { return 1.0 - alpha * nu; }
  double constant() const { return psi_n0 * psi_n0 / (4.0 * amplitude); }
  double value(double T) const { return std::pow(2.0 * T, exponent()) * constant(); }
  double resolvent_bound(double eps) const { return std::pow(eps, alpha * nu - 1.0) * constant(); }
  std::vector<double> curve(const std::vector<double>& t_grid) const {
    std::vector<double> out;
    for (double T : t_grid) out.push_back(value(T));
    return out;
  }
};

inline DelocalizationCertificate delocalization_certificate(const PowerLawFit& fit, double psi_n0, double alpha = 1.05) {
  if (!(alpha >= 1.0)) throw ConfigError("certificate exponent alpha must be >= 1");
  if (!(fit.nu_raw < 1.0))
    throw PreconditionError("growth exponent nu = " + std::to_string(fit.nu_raw) + " >= 1; certificate unavailable");
  if (!(std::abs(psi_n0) > 0.0)) throw PreconditionError("psi(n0) = 0; recenter the profile at a site where psi is nonzero");
  if (!(fit.amplitude > 0.0)) throw PreconditionError("growth amplitude A must be positive");
  return {alpha, fit.nu, fit.amplitude, std::abs(psi_n0)};
}

inline DelocalizationCertificate delocalization_certificate(const GrowthProfile& profile, double psi_n0,
                                                            double alpha = 1.05) {
  return delocalization_certificate(profile.fit, psi_n0, alpha);
}

/**
 Radius that keeps the evolved state away from a box boundary up to time t: the spreading speed of
 nearest-neighbour hopping is bounded by 2d, plus the boundary layer.
 */
inline std::int64_t containment_radius(int dim, double t, std::int64_t boundary_layer = 5) {
  return static_cast<std::int64_t>(std::ceil(2.0 * dim * t)) + boundary_layer;
}

/**
 Smallest R such that the free d-dimensional wavepacket started at a site carries mass <= tol at
 sup-distance >= R at time t, from the Bessel amplitudes |<delta_n, e^{-itH0} delta_0>| = |J_n(2t)| and a
 union bound over coordinates. An optimistic (non-rigorous for V != 0) front estimate.
 */
inline std::int64_t free_wavefront_radius(int dim, double t, double tol) {
  std::int64_t r = static_cast<std::int64_t>(std::ceil(2.0 * t));
  auto tail = [&](std::int64_t R) {
    double s = 0.0;
    for (std::int64_t n = R; n < R + 200 + static_cast<std::int64_t>(t); ++n) {
      const double j = std::cyl_bessel_j(static_cast<double>(n), 2.0 * t);
      s += j * j;
      if (n > 2 * t + 10 && j * j < 1e-300) break;
    }
    return 2.0 * dim * s;
  };
  while (r > 0 && tail(r - 1) <= tol) --r;
  while (tail(r) > tol) ++r;
  return r;
}

}  // namespace latticeq
