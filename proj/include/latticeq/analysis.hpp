#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "latticeq/csv.hpp"
#include "latticeq/eigenfunctions.hpp"
#include "latticeq/error.hpp"
#include "latticeq/hamiltonian.hpp"
#include "latticeq/numerics/green.hpp"
#include "latticeq/parallel.hpp"
#include "latticeq/potential.hpp"
#include "latticeq/svg.hpp"
#include "latticeq/transport.hpp"

namespace latticeq {

// ---------------------------------------------------------------------------------------------------
// Combes-Thomas

struct CombesThomasOptions {
  bool all_interior_sources = false;  ///< every interior site as a source instead of n0 only
  std::int64_t interior_margin = 3;
  DistanceMode distance = DistanceMode::automatic;
  GreenOptions green{1e-12};
  std::size_t threads = 0;
};

struct CombesThomasRow {
  std::int64_t distance = 0;  ///< l1 (graph) distance |n - m|_1
  double max_abs_g = 0.0;
  double threshold = 0.0;
  std::size_t pairs = 0;
};

struct CombesThomasViolation {
  Site n, m;
  double abs_g = 0.0;
  double threshold = 0.0;
};

struct CombesThomasReport {
  std::complex<double> z;
  double delta = 0.0;
  double c = 0.0;
  std::vector<CombesThomasRow> rows;
  double fitted_rate = 0.0;  ///< -slope of log max|G| against distance over reliable values
  std::size_t pairs_checked = 0;
  std::size_t sources = 0;
  double max_residual = 0.0;
  std::vector<CombesThomasViolation> violations;
  bool holds() const { return violations.empty(); }
};

/**
 Checks |G_z(n, m)| <= (2/delta) e^{-c delta |n - m|} at interior pairs (both sites at least the margin
 away from the box surface), c from combes_thomas_constant. Distances are graph (l1) distances, which
 dominate the sup-norm distance, so the check is at least as strict as the sup-norm form.
 */
inline CombesThomasReport combes_thomas_check(const SparseHamiltonian& h, std::complex<double> z, const Site& n0,
                                              const CombesThomasOptions& opt = {}) {
  CombesThomasReport rep;
  rep.z = z;
  rep.delta = distance_to_spectrum(h, z, opt.distance);
  if (!(rep.delta > 0.0))
    throw PreconditionError("z = (" + std::to_string(z.real()) + ", " + std::to_string(z.imag()) +
                            ") is not separated from the spectrum");
  rep.c = combes_thomas_constant(h.dim(), rep.delta);
  const auto& box = h.box();
  const std::int64_t inner = box.radius() - opt.interior_margin;
  if (inner < 0) throw ConfigError("box too small for the interior margin");
  auto interior = [&](const Site& n) { return box.distance_from_center(n) <= inner; };
  std::vector<Site> sources;
  if (opt.all_interior_sources) {
    box.for_each_site([&](std::size_t, const Site& n) {
      if (interior(n)) sources.push_back(n);
    });
  } else {
    if (!interior(n0)) throw ConfigError("source " + to_string(n0) + " is not an interior site");
    sources.push_back(n0);
  }
  std::vector<std::size_t> targets;
  box.for_each_site([&](std::size_t i, const Site& n) {
    if (interior(n)) targets.push_back(i);
  });
  const auto sites = box_sites(box);
  const std::int64_t max_dist = 2 * inner * box.dim();
  auto threshold = [&](std::int64_t r) { return 2.0 / rep.delta * std::exp(-rep.c * rep.delta * static_cast<double>(r)); };

  struct Partial {
    std::vector<double> max_g;
    std::vector<std::size_t> count;
    std::vector<CombesThomasViolation> bad;
    double residual = 0.0;
  };
  auto parts = parallel_map<Partial>(
      sources.size(),
      [&](std::size_t s) {
        Partial p{std::vector<double>(max_dist + 1, 0.0), std::vector<std::size_t>(max_dist + 1, 0), {}, 0.0};
        const auto col = green_column(h, z, sources[s], opt.green);
        p.residual = col.residual_norm;
        for (auto i : targets) {
          const auto r = l1_distance(sources[s], sites[i]);
          const double g = std::abs(col.values[i]);
          p.max_g[r] = std::max(p.max_g[r], g);
          ++p.count[r];
          if (g > threshold(r)) p.bad.push_back({sources[s], sites[i], g, threshold(r)});
        }
        return p;
      },
      opt.threads);

  std::vector<double> max_g(max_dist + 1, 0.0);
  std::vector<std::size_t> count(max_dist + 1, 0);
  for (auto& p : parts) {
    for (std::int64_t r = 0; r <= max_dist; ++r) {
      max_g[r] = std::max(max_g[r], p.max_g[r]);
      count[r] += p.count[r];
    }
    rep.max_residual = std::max(rep.max_residual, p.residual);
    rep.violations.insert(rep.violations.end(), p.bad.begin(), p.bad.end());
  }
  rep.sources = sources.size();
  std::vector<double> x, y;
  // Values within a few hundred solver tolerances of zero carry no decay information.
  const double floor = 100.0 * std::max(opt.green.tol, rep.max_residual) / rep.delta;
  for (std::int64_t r = 0; r <= max_dist; ++r) {
    if (!count[r]) continue;
    rep.rows.push_back({r, max_g[r], threshold(r), count[r]});
    rep.pairs_checked += count[r];
    if (r >= 1 && max_g[r] > floor) {
      x.push_back(static_cast<double>(r));
      y.push_back(std::log(max_g[r]));
    }
  }
  if (x.size() >= 2) rep.fitted_rate = -detail::least_squares(x, y).first;
  return rep;
}

inline void write_ct_csv(std::ostream& os, const CombesThomasReport& rep) {
  csv::Writer w(os, {"distance", "max_abs_g", "threshold", "pairs", "err"});
  for (const auto& r : rep.rows) {
    w.cell(static_cast<long long>(r.distance)).cell(r.max_abs_g).cell(r.threshold).cell(r.pairs).cell(rep.max_residual / rep.delta);
    w.end_row();
  }
}

// ---------------------------------------------------------------------------------------------------
// Borel-transform scaling

struct BorelRow {
  double gamma = 0.0, alpha = 0.0, eps = 0.0;
  std::int64_t radius = 0;  ///< floor(eps^{-alpha})
  double im_g = 0.0;
  double lhs = 0.0;      ///< eps^gamma Im G(n, n)
  double rhs = 0.0;      ///< eps^{1 - gamma} sum_{|m - n| <= radius} |psi(m)|^2
  double product = 0.0;  ///< lhs * rhs
  double psi_n2 = 0.0;   ///< |psi(n)|^2
  double margin = 0.0;   ///< product / |psi(n)|^2 - 1
  double slack = 0.0;    ///< solver-error allowance on the product
  bool holds = false;
};

struct BorelScalingReport {
  Site n;
  double energy = 0.0;
  double residual = 0.0;  ///< eigen-relation residual of psi on the working box
  std::vector<BorelRow> rows;
  bool herglotz = true;  ///< Im G(n, n) > 0 at every epsilon
  std::size_t failures() const {
    return static_cast<std::size_t>(std::count_if(rows.begin(), rows.end(), [](const auto& r) { return !r.holds; }));
  }
};

/**
 For every (gamma, alpha, eps) node checks

   |psi(n)|^2 <= [eps^gamma Im G_{E+i eps}(n, n)] * [eps^{1-gamma} sum_{|m-n| <= floor(eps^{-alpha})} |psi(m)|^2],

 balls in the sup norm. Gamma cancels in the product; the factors are reported separately for trends.
 */
inline BorelScalingReport borel_scaling_check(const SparseHamiltonian& h, const Evaluator& psi, double energy,
                                              const Site& n, const std::vector<double>& gammas,
                                              const std::vector<double>& alphas, const std::vector<double>& epsilons,
                                              const GreenOptions& gopt = GreenOptions{1e-12}) {
  if (gammas.empty() || alphas.empty() || epsilons.empty()) throw ConfigError("Borel grids must be nonempty");
  for (double e : epsilons)
    if (!(e > 0.0)) throw ConfigError("epsilon grid values must be positive");
  const auto& box = h.box();
  const double psi_n2 = std::norm(psi(n));
  if (!(psi_n2 > 0.0)) throw PreconditionError("psi(" + to_string(n) + ") = 0; the Borel inequality needs psi(n) != 0");
  const double eps_min = *std::min_element(epsilons.begin(), epsilons.end());
  const double alpha_max = *std::max_element(alphas.begin(), alphas.end());
  const auto r_max = static_cast<std::int64_t>(std::floor(std::pow(eps_min, -alpha_max)));
  if (sup_distance(n, box.center()) + r_max > box.radius())
    throw PreconditionError("ball of radius " + std::to_string(r_max) + " about " + to_string(n) +
                            " does not fit in the working box of radius " + std::to_string(box.radius()));

  BorelScalingReport rep;
  rep.n = n;
  rep.energy = energy;
  rep.residual = validate_generalized_eigenfunction(h, psi, energy);

  // Ball sums sum_{|m - n| <= r} |psi(m)|^2 for r <= r_max.
  std::vector<double> ring(static_cast<std::size_t>(r_max + 1), 0.0);
  LatticeBox(box.dim(), n, r_max).for_each_site([&](std::size_t, const Site& m) {
    ring[static_cast<std::size_t>(sup_distance(m, n))] += std::norm(psi(m));
  });
  for (std::size_t r = 1; r < ring.size(); ++r) ring[r] += ring[r - 1];

  const auto idx = box.index_of(n);
  for (double eps : epsilons) {
    const auto col = green_column(h, {energy, eps}, n, gopt);
    const double im_g = col.values[idx].imag();
    const double g_err = col.residual_norm / eps;
    if (!(im_g > 0.0)) rep.herglotz = false;
    for (double alpha : alphas) {
      const auto radius = static_cast<std::int64_t>(std::floor(std::pow(eps, -alpha)));
      const double ball = ring[static_cast<std::size_t>(radius)];
      for (double gamma : gammas) {
        BorelRow row;
        row.gamma = gamma;
        row.alpha = alpha;
        row.eps = eps;
        row.radius = radius;
        row.im_g = im_g;
        row.lhs = std::pow(eps, gamma) * im_g;
        row.rhs = std::pow(eps, 1.0 - gamma) * ball;
        row.product = row.lhs * row.rhs;
        row.psi_n2 = psi_n2;
        row.margin = row.product / psi_n2 - 1.0;
        row.slack = eps * ball * g_err;
        row.holds = row.product + row.slack >= psi_n2;
        rep.rows.push_back(row);
      }
    }
  }
  return rep;
}

inline void write_borel_csv(std::ostream& os, const BorelScalingReport& rep) {
  csv::Writer w(os, {"gamma", "alpha", "eps", "radius", "im_g", "lhs", "rhs", "product", "psi_n2", "margin", "err", "holds"});
  for (const auto& r : rep.rows) {
    w.cell(r.gamma).cell(r.alpha).cell(r.eps).cell(static_cast<long long>(r.radius)).cell(r.im_g).cell(r.lhs).cell(r.rhs);
    w.cell(r.product).cell(r.psi_n2).cell(r.margin).cell(r.slack).cell(r.holds ? 1 : 0);
    w.end_row();
  }
}

// ---------------------------------------------------------------------------------------------------
// Localization / delocalization contrast

/// A disordered model on a centred box: iid uniform V of width W on Gamma.
struct ModelConfig {
  std::string name = "model";
  TrimPattern pattern = TrimPattern::full_lattice(1);
  double width = 1.0;  ///< W; zero gives the free operator
  std::uint64_t seed = 0;
  std::int64_t radius = 0;  ///< 0: chosen from the containment radius at the largest Abel horizon
  std::size_t max_sites = 20'000'000;

  int dim() const { return pattern.dim(); }
  PotentialSpec potential(std::int64_t realization) const {
    if (width == 0.0) return PotentialSpec::zero(dim());
    return PotentialSpec::uniform(width, seed, realization, pattern);
  }
};

struct RealizationExponent {
  std::int64_t realization = 0;
  ExponentFit fit;
  MomentSeries series;
};

struct ModelExponents {
  std::string name;
  std::int64_t radius = 0;
  std::vector<RealizationExponent> runs;
  double min_slope() const {
    double m = std::numeric_limits<double>::infinity();
    for (const auto& r : runs) m = std::min(m, r.fit.slope);
    return m;
  }
  double max_slope() const {
    double m = -std::numeric_limits<double>::infinity();
    for (const auto& r : runs) m = std::max(m, r.fit.slope);
    return m;
  }
  double mean_slope() const {
    double s = 0.0;
    for (const auto& r : runs) s += r.fit.slope;
    return runs.empty() ? 0.0 : s / static_cast<double>(runs.size());
  }
};

inline std::int64_t model_radius(const ModelConfig& m, const std::vector<double>& t_grid, const TimeMomentOptions& opt) {
  std::int64_t L = m.radius;
  if (L == 0) {
    // 2d t alone ignores the Airy tail ahead of the free front; take the larger of the two estimates.
    const double t_star = t_grid.back() * std::log(1.0 / opt.time_tol);
    L = std::max(containment_radius(m.dim(), t_star, opt.boundary_layer),
                 free_wavefront_radius(m.dim(), t_star, opt.time_tol) + opt.boundary_layer);
  }
  const double sites = std::pow(2.0 * static_cast<double>(L) + 1.0, m.dim());
  if (sites > static_cast<double>(m.max_sites))
    throw ResourceError(m.name + ": box radius " + std::to_string(L) + " in d = " + std::to_string(m.dim()) + " needs " +
                        std::to_string(sites) + " sites, above the cap of " + std::to_string(m.max_sites));
  return L;
}

/// Abel moments of <n>^q over T for each realization and their log-log slopes; realizations run in parallel.
inline ModelExponents model_exponents(const ModelConfig& m, double q, const std::vector<double>& t_grid,
                                      std::int64_t realizations, const TimeMomentOptions& opt = {},
                                      std::size_t threads = 0) {
  detail::check_grid(t_grid);
  if (realizations < 1) throw ConfigError("need at least one realization");
  ModelExponents out;
  out.name = m.name;
  out.radius = model_radius(m, t_grid, opt);
  const auto box = LatticeBox::at_origin(m.dim(), out.radius);
  out.runs = parallel_map<RealizationExponent>(
      static_cast<std::size_t>(realizations),
      [&](std::size_t r) {
        const auto h = assemble(box, m.potential(static_cast<std::int64_t>(r)));
        const Site origin(m.dim(), 0);
        auto res = time_moments(h, GrowthWeight::power(q, origin), origin, t_grid, opt);
        RealizationExponent e;
        e.realization = static_cast<std::int64_t>(r);
        e.fit = fit_transport_exponent(res.abel, t_grid.front(), t_grid.back());
        e.series = std::move(res.abel);
        return e;
      },
      threads);
  return out;
}

struct ContrastReport {
  double q = 0.0;
  ModelExponents trimmed;
  ModelExponents anderson;
  double delocalization_threshold = 0.7;
  double localization_threshold = 0.1;
  bool trimmed_delocalized() const { return trimmed.min_slope() >= delocalization_threshold; }
  bool anderson_localized() const { return anderson.max_slope() <= localization_threshold; }
  bool contrast() const { return trimmed_delocalized() && anderson_localized(); }
};

inline ContrastReport localization_contrast_report(const ModelConfig& trimmed, const std::vector<double>& trimmed_grid,
                                                   const ModelConfig& anderson, const std::vector<double>& anderson_grid,
                                                   double q, std::int64_t realizations,
                                                   const TimeMomentOptions& opt = {}, std::size_t threads = 0) {
  ContrastReport rep;
  rep.q = q;
  rep.trimmed = model_exponents(trimmed, q, trimmed_grid, realizations, opt, threads);
  rep.anderson = model_exponents(anderson, q, anderson_grid, realizations, opt, threads);
  return rep;
}

inline void write_exponents_csv(std::ostream& os, const std::vector<const ModelExponents*>& models) {
  csv::Writer w(os, {"model", "realization", "radius", "slope", "intercept", "fit_residual", "points"});
  for (const auto* m : models)
    for (const auto& r : m->runs) {
      w.cell(m->name).cell(static_cast<long long>(r.realization)).cell(static_cast<long long>(m->radius));
      w.cell(r.fit.slope).cell(r.fit.intercept).cell(r.fit.residual).cell(r.fit.points);
      w.end_row();
    }
}

/// Profile CSV: L, shell_sum, weighted_sum, threshold (threshold column is the fitted A L^nu).
inline void write_profile_csv(std::ostream& os, const GrowthProfile& p) {
  csv::Writer w(os, {"L", "shell_sum", "weighted_sum", "threshold"});
  for (std::int64_t L = 1; L <= p.l_max; ++L) {
    w.cell(static_cast<long long>(L)).cell(p.shell_l1[L]).cell(p.weighted[L]);
    w.cell(p.fit.amplitude * std::pow(static_cast<double>(L), p.fit.nu));
    w.end_row();
  }
}

inline void write_ct_svg(std::ostream& os, const CombesThomasReport& rep) {
  svg::Series g{"max |G| per distance", {}, {}}, b{"Combes-Thomas bound", {}, {}, true};
  for (const auto& r : rep.rows) {
    g.x.push_back(static_cast<double>(r.distance));
    g.y.push_back(r.max_abs_g);
    b.x.push_back(static_cast<double>(r.distance));
    b.y.push_back(r.threshold);
  }
  svg::write_plot(os, {"Green function decay", "|n - m|_1", "|G|", false, true}, {g, b});
}

inline void write_borel_svg(std::ostream& os, const BorelScalingReport& rep) {
  std::map<double, svg::Series> by_alpha;
  svg::Series target{"|psi(n)|^2", {}, {}, true};
  for (const auto& r : rep.rows) {
    if (r.gamma != rep.rows.front().gamma) continue;
    auto& s = by_alpha[r.alpha];
    s.name = "product, alpha = " + svg::detail::fmt(r.alpha);
    s.x.push_back(r.eps);
    s.y.push_back(r.product);
    target.x.push_back(r.eps);
    target.y.push_back(r.psi_n2);
  }
  std::vector<svg::Series> all;
  for (auto& [a, s] : by_alpha) all.push_back(s);
  all.push_back(target);
  svg::write_plot(os, {"Borel scaling product", "epsilon", "value", true, true}, all);
}

inline void write_series_svg(std::ostream& os, const std::vector<MomentSeries>& all, const std::string& title) {
  std::vector<svg::Series> s;
  for (const auto& m : all) {
    svg::Series one{to_string(m.route), {}, {}};
    for (const auto& p : m.points) {
      one.x.push_back(p.T);
      one.y.push_back(p.value);
    }
    s.push_back(one);
  }
  svg::write_plot(os, {title, "T", "moment", true, true}, s);
}

}  // namespace latticeq
