#pragma once

// Subcommand runners. Each reads its block of the resolved configuration, writes CSV (and SVG)
// artifacts into the output directory and records them in the manifest.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "config.hpp"

namespace latticeq::cli {

namespace fs = std::filesystem;

struct Context {
  json doc;  ///< resolved configuration
  fs::path out;
  std::size_t threads = 1;
  std::uint64_t seed = 0;
  bool has_seed = false;
  json artifacts = json::array();
  json results = json::object();
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
  double max_seconds = 3600.0;

  Node root() const { return {doc, ""}; }

  void check_clock() const {
    const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (s > max_seconds)
      throw ResourceError("wall-clock cap of " + std::to_string(max_seconds) + " s exceeded after " + std::to_string(s) + " s");
  }

  std::ofstream open(const std::string& name) {
    std::ofstream f(out / name, std::ios::binary);
    if (!f) throw ConfigError("cannot write " + (out / name).string(), "/output");
    artifacts.push_back(name);
    return f;
  }
};

inline void check_sites(const Model& m, const Limits& lim) {
  const double sites = std::pow(2.0 * static_cast<double>(m.radius) + 1.0, m.dim);
  if (sites > static_cast<double>(lim.max_sites))
    throw ResourceError("box with " + std::to_string(sites) + " sites exceeds limits.max_sites = " +
                        std::to_string(lim.max_sites));
}

inline std::string suffix(std::int64_t r) { return "_r" + std::to_string(r); }

inline std::vector<std::string> site_header(int dim) {
  std::vector<std::string> h;
  for (int i = 1; i <= dim; ++i) h.push_back("n" + std::to_string(i));
  return h;
}

inline void write_header(std::ostream& os, const std::vector<std::string>& cols) {
  for (std::size_t i = 0; i < cols.size(); ++i) os << (i ? "," : "") << cols[i];
  os << '\n';
}

inline void write_site(std::ostream& os, const Site& n) {
  for (auto c : n) os << c << ',';
}

inline void write_key_values(std::ostream& os, const std::vector<std::pair<std::string, double>>& kv) {
  os << "key,value\n";
  for (const auto& [k, v] : kv) os << k << ',' << csv::number(v) << '\n';
}

// --------------------------------------------------------------------------------------------- spectrum
inline void run_spectrum(Context& ctx) {
  const auto root = ctx.root();
  const auto model = model_from(root, ctx.seed, ctx.has_seed);
  const auto lim = limits_from(root);
  check_sites(model, lim);
  json windows = json::array();
  for (std::int64_t r = 0; r < model.realizations; ++r) {
    ctx.check_clock();
    const auto h = assemble(model.box(), model.spec(r));
    const auto w = spectrum_window(h);
    windows.push_back({w.lo, w.hi});
    if (h.size() > lim.max_dense) continue;
    const auto spec = dense_eig(h, lim.max_dense);
    auto f = ctx.open("spectrum" + suffix(r) + ".csv");
    csv::Writer out(f, {"index", "eigenvalue", "err"});
    const auto active = detail::active_indices(h);
    for (Eigen::Index j = 0; j < spec.values.size(); ++j) {
      ComplexVector v(h.size()), hv(h.size());
      for (std::size_t i = 0; i < h.size(); ++i) v[i] = spec.vectors(static_cast<Eigen::Index>(i), j);
      h.apply<std::complex<double>>(v, hv);
      double res = 0.0;
      for (std::size_t i = 0; i < h.size(); ++i) res += std::norm(hv[i] - spec.values(j) * v[i]);
      out.cell(static_cast<long long>(j)).cell(spec.values(j)).cell(std::sqrt(res));
      out.end_row();
    }
  }
  ctx.results["spectral_windows"] = windows;
}

// --------------------------------------------------------------------------------------------- evolve
inline void run_evolve(Context& ctx) {
  const auto root = ctx.root();
  const auto model = model_from(root, ctx.seed, ctx.has_seed);
  const auto lim = limits_from(root);
  const auto tol = tolerances_from(root);
  check_sites(model, lim);
  const Node ev = root.child("evolve");
  auto times = ev.get<std::vector<double>>("times");
  for (std::size_t i = 0; i < times.size(); ++i)
    if (!(times[i] >= 0.0) || (i && !(times[i] > times[i - 1])))
      throw ConfigError("times must be nonnegative and strictly ascending", ev.at("times") + "/" + std::to_string(i));
  const Site start = site_from(ev, "initial_site", model.dim, model.center);
  const double min_prob = ev.get<double>("min_prob", 1e-12);
  for (std::int64_t r = 0; r < model.realizations; ++r) {
    const auto h = assemble(model.box(), model.spec(r));
    auto snap = ctx.open("evolve" + suffix(r) + ".csv");
    auto cols = site_header(model.dim);
    cols.insert(cols.begin(), "t");
    cols.insert(cols.end(), {"prob", "err"});
    write_header(snap, cols);
    auto summary = ctx.open("evolve_summary" + suffix(r) + ".csv");
    csv::Writer sum(summary, {"t", "norm", "boundary_mass", "err"});
    auto state = WaveState::delta(h.box(), start);
    ChebyshevPropagator prop(h);
    double t_now = 0.0, err = 0.0;
    const auto sites = box_sites(h.box());
    for (double t : times) {
      ctx.check_clock();
      err += prop.step(state.amplitudes, t - t_now, tol.evolve_tol / static_cast<double>(times.size()));
      t_now = t;
      double layer = 0.0;
      for (std::size_t i = 0; i < sites.size(); ++i) {
        const double p = std::norm(state.amplitudes[i]);
        if (h.box().distance_from_center(sites[i]) >= h.box().radius() - 5) layer += p;
        if (p < min_prob) continue;
        snap << csv::number(t) << ',';
        write_site(snap, sites[i]);
        snap << csv::number(p) << ',' << csv::number(2.0 * err) << '\n';
      }
      sum.cell(t).cell(state.norm()).cell(layer).cell(err);
      sum.end_row();
    }
  }
}

// --------------------------------------------------------------------------------------------- moments
inline void run_moments(Context& ctx) {
  const auto root = ctx.root();
  const auto model = model_from(root, ctx.seed, ctx.has_seed);
  const auto lim = limits_from(root);
  const auto tol = tolerances_from(root);
  check_sites(model, lim);
  const Node obs = root.child("observable");
  const Site base = site_from(obs, "base_site", model.dim, model.center);
  const auto phi = weight_from(obs, model.dim, base);
  const auto grid = t_grid_from(obs, "T_grid");
  const auto route = root.get<std::string>("route", std::string("abel"));
  if (route != "abel" && route != "cesaro" && route != "resolvent" && route != "all")
    throw ConfigError("route must be abel, cesaro, resolvent or all", "/route");
  TimeMomentOptions topt;
  topt.time_tol = tol.time_tol;
  topt.prop_tol = tol.prop_tol;
  topt.check_containment = tol.check_containment;
  ResolventOptions ropt;
  ropt.solve_tol = tol.solve_tol;
  ropt.threads = ctx.threads;
  json summary = json::array();
  for (std::int64_t r = 0; r < model.realizations; ++r) {
    ctx.check_clock();
    const auto h = assemble(model.box(), model.spec(r));
    std::vector<MomentSeries> all;
    if (route != "resolvent") {
      auto res = time_moments(h, phi, base, grid, topt);
      if (route == "abel" || route == "all") all.push_back(res.abel);
      if (route == "cesaro" || route == "all") all.push_back(res.cesaro);
    }
    ctx.check_clock();
    if (route == "resolvent" || route == "all") all.push_back(moment_via_resolvent(h, phi, base, grid, ropt));
    {
      auto f = ctx.open("moments" + suffix(r) + ".csv");
      write_series_csv(f, all);
    }
    {
      auto f = ctx.open("moments" + suffix(r) + ".svg");
      write_series_svg(f, all, "transport moments, realization " + std::to_string(r));
    }
    json s{{"realization", r}};
    for (const auto& m : all) {
      s[to_string(m.route)] = {{"quadrature_nodes", m.quadrature_nodes},
                               {"time_horizon", m.time_horizon},
                               {"truncation_radius", m.truncation_radius},
                               {"max_boundary_mass", m.max_boundary_mass}};
      if (m.points.size() >= 5) {
        try {
          const auto fit = fit_transport_exponent(m, grid.front(), grid.back());
          s[to_string(m.route)]["slope"] = fit.slope;
          s[to_string(m.route)]["fit_residual"] = fit.residual;
        } catch (const PreconditionError&) {
        }
      }
    }
    summary.push_back(s);
  }
  ctx.results["moments"] = summary;
}

// --------------------------------------------------------------------------------------------- green
inline void run_green(Context& ctx) {
  const auto root = ctx.root();
  const auto model = model_from(root, ctx.seed, ctx.has_seed);
  const auto lim = limits_from(root);
  const auto tol = tolerances_from(root);
  check_sites(model, lim);
  const Node g = root.child("green");
  const auto zv = g.get<std::vector<double>>("z");
  if (zv.size() != 2) throw ConfigError("z must be [re, im]", g.at("z"));
  const std::complex<double> z(zv[0], zv[1]);
  const Site src = site_from(g, "source", model.dim, model.center);
  GreenOptions gopt;
  gopt.tol = tol.solve_tol;
  gopt.dense_cap = lim.max_dense;
  json summary = json::array();
  for (std::int64_t r = 0; r < model.realizations; ++r) {
    ctx.check_clock();
    const auto h = assemble(model.box(), model.spec(r));
    const auto col = green_column(h, z, src, gopt);
    const double dist = window_distance(z, spectrum_window(h));
    const double err = dist > 0 ? col.residual_norm / dist : col.residual_norm;
    auto f = ctx.open("green" + suffix(r) + ".csv");
    auto cols = site_header(model.dim);
    cols.insert(cols.end(), {"re", "im", "abs", "err"});
    write_header(f, cols);
    h.box().for_each_site([&](std::size_t i, const Site& n) {
      write_site(f, n);
      f << csv::number(col.values[i].real()) << ',' << csv::number(col.values[i].imag()) << ','
        << csv::number(std::abs(col.values[i])) << ',' << csv::number(err) << '\n';
    });
    summary.push_back({{"realization", r}, {"residual", col.residual_norm}, {"method", to_string(col.used)},
                       {"iterations", col.iterations}});
  }
  ctx.results["green"] = summary;
}

// --------------------------------------------------------------------------------------------- eigenfun
struct BuiltWave {
  Evaluator psi;
  double energy = 0.0;
  std::string kind;
};

inline BuiltWave build_wave(const Node& e, const Model& model, std::int64_t window) {
  const auto kind = e.get<std::string>("kind", std::string("trimmed"));
  if (model.pattern.is_full_lattice())
    throw ConfigError("trimmed constructions need a periodic gamma pattern", "/model/gamma");
  const auto k = e.get<std::vector<std::int64_t>>("k");
  try {
    if (kind == "trimmed") {
      auto w = make_trimmed_wave(model.pattern, k, e.get<std::vector<double>>("kappa"));
      return {w, w.energy(), kind};
    }
    if (kind == "transverse") {
      TransverseSolution ts(e.get<double>("e"), model.pattern.d2() - 1, static_cast<int>(e.get<std::int64_t>("M", 64)));
      TrimmedTransverseWave w(model.pattern, k, ts, window);
      return {w, w.energy(), kind};
    }
  } catch (const ConfigError& err) {
    throw ConfigError(err.what(), e.path());
  }
  throw ConfigError("kind must be trimmed or transverse", e.at("kind"));
}

inline double nodal_max(const Evaluator& psi, const LatticeBox& box, const TrimPattern& pattern) {
  double worst = 0.0;
  box.for_each_site([&](std::size_t, const Site& n) {
    if (pattern.contains(n)) worst = std::max(worst, std::abs(psi(n)));
  });
  return worst;
}

inline void run_eigenfun(Context& ctx) {
  const auto root = ctx.root();
  const auto model = model_from(root, ctx.seed, ctx.has_seed);
  const auto lim = limits_from(root);
  check_sites(model, lim);
  const Node e = root.child("eigenfun");
  std::int64_t l_max = 0;
  double q = 0.0;
  Site center = model.center;
  if (e.has("profile")) {
    const Node p = e.child("profile");
    l_max = p.get<std::int64_t>("L_max");
    q = p.get<double>("q");
    center = site_from(p, "center", model.dim, center);
    if (l_max < 2) throw ConfigError("L_max must be >= 2", p.at("L_max"));
  }
  const auto wave = build_wave(e, model, std::max<std::int64_t>(model.radius, l_max) + 2);
  const auto h = assemble(model.box(), model.spec(0));
  std::vector<std::pair<std::string, double>> kv{
      {"energy", wave.energy},
      {"residual", validate_generalized_eigenfunction(h, wave.psi, wave.energy)},
      {"nodal_max", nodal_max(wave.psi, model.box(), model.pattern)},
      {"psi_center", std::abs(wave.psi(center))}};
  ctx.check_clock();
  if (l_max > 0) {
    const auto prof = growth_profile(wave.psi, GrowthWeight::power(q, center), center, l_max, ctx.threads);
    auto f = ctx.open("profile.csv");
    write_profile_csv(f, prof);
    kv.insert(kv.end(), {{"q", q}, {"nu", prof.fit.nu}, {"nu_raw", prof.fit.nu_raw}, {"nu_loglog", prof.fit.nu_loglog},
                         {"A", prof.fit.amplitude}, {"fit_residual", prof.fit.residual}});
  }
  auto f = ctx.open("eigenfun.csv");
  write_key_values(f, kv);
  for (const auto& [k, v] : kv) ctx.results[k] = v;
}

// --------------------------------------------------------------------------------------------- ct-check
inline DistanceMode distance_mode(const Node& n) {
  const auto s = n.get<std::string>("distance", std::string("automatic"));
  if (s == "window") return DistanceMode::window;
  if (s == "dense") return DistanceMode::dense;
  if (s == "automatic") return DistanceMode::automatic;
  throw ConfigError("distance must be window, dense or automatic", n.at("distance"));
}

inline void run_ct(Context& ctx) {
  const auto root = ctx.root();
  const auto model = model_from(root, ctx.seed, ctx.has_seed);
  const auto lim = limits_from(root);
  const auto tol = tolerances_from(root);
  check_sites(model, lim);
  const Node c = root.child("ct");
  const auto zv = c.get<std::vector<double>>("z");
  if (zv.size() != 2) throw ConfigError("z must be [re, im]", c.at("z"));
  CombesThomasOptions opt;
  opt.all_interior_sources = c.get<bool>("all_interior", false);
  opt.interior_margin = c.get<std::int64_t>("margin", 3);
  opt.distance = distance_mode(c);
  opt.green.tol = c.get<double>("solve_tol", std::min(tol.solve_tol, 1e-12));
  opt.green.dense_cap = lim.max_dense;
  opt.threads = ctx.threads;
  const Site src = site_from(c, "source", model.dim, model.center);
  const auto h = assemble(model.box(), model.spec(0));
  const auto rep = combes_thomas_check(h, {zv[0], zv[1]}, src, opt);
  {
    auto f = ctx.open("ct.csv");
    write_ct_csv(f, rep);
  }
  {
    auto f = ctx.open("ct.svg");
    write_ct_svg(f, rep);
  }
  std::vector<std::pair<std::string, double>> kv{{"delta", rep.delta},
                                                 {"c", rep.c},
                                                 {"fitted_rate", rep.fitted_rate},
                                                 {"c_delta", rep.c * rep.delta},
                                                 {"pairs", static_cast<double>(rep.pairs_checked)},
                                                 {"violations", static_cast<double>(rep.violations.size())},
                                                 {"max_residual", rep.max_residual}};
  auto f = ctx.open("ct_summary.csv");
  write_key_values(f, kv);
  for (const auto& [k, v] : kv) ctx.results[k] = v;
}

// --------------------------------------------------------------------------------------------- borel
inline void run_borel(Context& ctx) {
  const auto root = ctx.root();
  const auto model = model_from(root, ctx.seed, ctx.has_seed);
  const auto lim = limits_from(root);
  const auto tol = tolerances_from(root);
  check_sites(model, lim);
  const Node b = root.child("borel");
  const Node p = b.child("psi");
  const auto h = assemble(model.box(), model.spec(0));
  Evaluator psi;
  double energy = 0.0;
  const auto kind = p.get<std::string>("kind");
  if (kind == "cos" || kind == "plane") {
    const auto theta = p.get<std::vector<double>>("theta");
    if (static_cast<int>(theta.size()) != model.dim) throw ConfigError("theta needs d entries", p.at("theta"));
    for (double t : theta) energy += 2.0 * std::cos(t);
    auto wave = plane_wave(theta);
    psi = kind == "plane" ? wave : Evaluator([wave](const Site& n) { return std::complex<double>(wave(n).real(), 0.0); });
  } else if (kind == "eigenvector") {
    const auto spec = dense_eig(h, lim.max_dense);
    const auto idx = p.get<std::int64_t>("index", 0);
    if (idx < 0 || idx >= spec.values.size()) throw ConfigError("eigenvector index out of range", p.at("index"));
    energy = spec.values(idx);
    Eigen::VectorXd v = spec.vectors.col(idx);
    const LatticeBox box = h.box();
    psi = [v, box](const Site& n) { return std::complex<double>(box.contains(n) ? v(static_cast<Eigen::Index>(box.index_of(n))) : 0.0, 0.0); };
  } else {
    throw ConfigError("psi kind must be cos, plane or eigenvector", p.at("kind"));
  }
  if (p.has("scale")) psi = scaled_evaluator(psi, p.get<double>("scale"));
  const Site n = site_from(b, "site", model.dim, model.center);
  GreenOptions gopt;
  gopt.tol = b.get<double>("solve_tol", std::min(tol.solve_tol, 1e-12));
  gopt.dense_cap = lim.max_dense;
  const auto rep = borel_scaling_check(h, psi, energy, n, b.get<std::vector<double>>("gamma"),
                                       b.get<std::vector<double>>("alpha"), b.get<std::vector<double>>("eps"), gopt);
  {
    auto f = ctx.open("borel.csv");
    write_borel_csv(f, rep);
  }
  {
    auto f = ctx.open("borel.svg");
    write_borel_svg(f, rep);
  }
  ctx.results["energy"] = energy;
  ctx.results["residual"] = rep.residual;
  ctx.results["failures"] = rep.failures();
  ctx.results["herglotz"] = rep.herglotz;
}

// --------------------------------------------------------------------------------------------- contrast
inline ModelConfig contrast_model(const Node& n, const Context& ctx, const std::string& name, std::size_t max_sites) {
  ModelConfig m;
  m.name = name;
  const auto d = n.get<std::int64_t>("d");
  if (d < 1 || d > 6) throw ConfigError("d must lie in [1, 6]", n.at("d"));
  m.pattern = pattern_from(n, static_cast<int>(d));
  m.width = n.get<double>("W", 0.0);
  if (m.width < 0.0) throw ConfigError("W must be nonnegative", n.at("W"));
  m.seed = ctx.has_seed ? ctx.seed : n.get<std::uint64_t>("seed", 0);
  m.radius = n.get<std::int64_t>("L", 0);
  m.max_sites = max_sites;
  return m;
}

inline void run_contrast(Context& ctx) {
  const auto root = ctx.root();
  const auto lim = limits_from(root);
  const auto tol = tolerances_from(root);
  const Node c = root.child("contrast");
  const double q = c.get<double>("q");
  const auto realizations = c.get<std::int64_t>("realizations", 5);
  const Node tn = c.child("trimmed"), an = c.child("anderson");
  const auto tm = contrast_model(tn, ctx, "trimmed", lim.max_sites);
  const auto am = contrast_model(an, ctx, "anderson", lim.max_sites);
  TimeMomentOptions topt;
  topt.time_tol = tol.time_tol;
  topt.prop_tol = tol.prop_tol;
  topt.check_containment = tol.check_containment;
  auto rep = localization_contrast_report(tm, t_grid_from(tn, "T_grid"), am, t_grid_from(an, "T_grid"), q, realizations,
                                          topt, ctx.threads);
  rep.delocalization_threshold = c.get<double>("delocalization_threshold", 0.7);
  rep.localization_threshold = c.get<double>("localization_threshold", 0.1);
  {
    auto f = ctx.open("exponents.csv");
    write_exponents_csv(f, {&rep.trimmed, &rep.anderson});
  }
  ctx.results["trimmed_min_slope"] = rep.trimmed.min_slope();
  ctx.results["anderson_max_slope"] = rep.anderson.max_slope();
  ctx.results["delocalization_flag"] = rep.contrast();
}

// --------------------------------------------------------------------------------------------- certify
inline void run_certify(Context& ctx) {
  const auto root = ctx.root();
  const auto model = model_from(root, ctx.seed, ctx.has_seed);
  const auto lim = limits_from(root);
  const auto tol = tolerances_from(root);
  check_sites(model, lim);
  const Node c = root.child("certify");
  const Node e = root.child("eigenfun");
  const Node p = e.child("profile");
  const auto l_max = p.get<std::int64_t>("L_max");
  const double q = p.get<double>("q");
  const Site center = site_from(p, "center", model.dim, model.center);
  const auto wave = build_wave(e, model, std::max<std::int64_t>(model.radius, l_max) + 2);
  const auto h = assemble(model.box(), model.spec(0));
  const double residual = validate_generalized_eigenfunction(h, wave.psi, wave.energy);
  const auto phi = GrowthWeight::power(q, center);
  const auto prof = growth_profile(wave.psi, phi, center, l_max, ctx.threads);
  const double alpha = c.get<double>("alpha", 1.05);
  const auto cert = delocalization_certificate(prof, std::abs(wave.psi(center)), alpha);
  GreenOptions gopt;
  gopt.tol = tol.solve_tol;
  gopt.dense_cap = lim.max_dense;
  auto f = ctx.open("certify.csv");
  csv::Writer w(f, {"eps", "T", "measured", "bound", "err", "holds"});
  std::size_t failures = 0;
  for (double eps : c.get<std::vector<double>>("eps")) {
    ctx.check_clock();
    if (!(eps > 0.0)) throw ConfigError("eps values must be positive", c.at("eps"));
    const auto s = weighted_resolvent_sum(h, phi, center, wave.energy, eps, gopt);
    const double bound = cert.resolvent_bound(eps);
    const bool holds = s.value >= bound;
    failures += holds ? 0 : 1;
    w.cell(eps).cell(1.0 / (2.0 * eps)).cell(s.value).cell(bound).cell(s.residual / eps).cell(holds ? 1 : 0);
    w.end_row();
  }
  ctx.results["residual"] = residual;
  ctx.results["nu"] = cert.nu;
  ctx.results["nu_raw"] = prof.fit.nu_raw;
  ctx.results["A"] = cert.amplitude;
  ctx.results["exponent"] = cert.exponent();
  ctx.results["failures"] = failures;
}

}  // namespace latticeq::cli
