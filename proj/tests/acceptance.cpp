// Acceptance gates. Usage: latticeq_acceptance [criterion ...]; with no arguments every criterion runs.
// Prints one "CRITERION <n> PASS|FAIL: ..." line per criterion and exits nonzero if any failed.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "latticeq/latticeq.hpp"

using namespace latticeq;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;
double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

void info(const std::string& s) { std::cout << "  info: " << s << '\n'; }

const Site kOrigin1{0};

// 1. Abel route vs resolvent route, d = 1 chain of 201 sites, W = 2, q = 2, T = 5.
Outcome moment_resolvent_identity() {
  const auto t0 = Clock::now();
  const auto h = assemble(LatticeBox::at_origin(1, 100), PotentialSpec::uniform(2.0, 1, 0, TrimPattern::full_lattice(1)));
  const auto phi = GrowthWeight::power(2.0, kOrigin1);
  TimeMomentOptions topt;
  topt.check_containment = false;  // the identity is exact for the finite-box operator itself
  const auto abel = abel_moment(h, phi, kOrigin1, 5.0, topt);
  const auto res = moment_via_resolvent(h, phi, kOrigin1, 5.0);
  const double rel = std::abs(abel.value - res.value) / std::abs(res.value);
  const double secs = seconds_since(t0);
  return {rel <= 1e-3 && secs <= 60.0,
          fmt("abel %.10g (err %.2g), resolvent %.10g (err %.2g), relative difference %.3g <= 1e-3, runtime %.2f s <= 60 s",
              abel.value, abel.error, res.value, res.error, rel, secs)};
}

// 2. constant_one weight gives 1 on all three routes for 5 random systems.
Outcome normalization() {
  struct System {
    int dim;
    std::int64_t L;
    double W;
    std::uint64_t seed;
  };
  const std::vector<System> systems{{1, 100, 2.0, 11}, {1, 60, 5.0, 12}, {1, 40, 0.5, 13}, {2, 8, 3.0, 14}, {2, 6, 8.0, 15}};
  const std::vector<double> grid{0.2, 1.0, 5.0, 20.0};
  TimeMomentOptions topt;
  topt.check_containment = false;
  double worst = 0.0;
  for (const auto& s : systems) {
    const auto h = assemble(LatticeBox::at_origin(s.dim, s.L), PotentialSpec::uniform(s.W, s.seed, 0, TrimPattern::full_lattice(s.dim)));
    const Site o(s.dim, 0);
    const auto one = GrowthWeight::constant_one();
    const auto tm = time_moments(h, one, o, grid, topt);
    const auto rs = moment_via_resolvent(h, one, o, grid);
    for (const auto* series : {&tm.abel, &tm.cesaro, &rs})
      for (const auto& p : series->points) worst = std::max(worst, std::abs(p.value - 1.0));
  }
  return {worst <= 1e-6, fmt("5 systems x 3 routes x %zu T values: max |M - 1| = %.3g <= 1e-6", grid.size(), worst)};
}

// 3. Combes-Thomas on the 61 x 61 free box, z = 4.5.
Outcome combes_thomas() {
  const auto t0 = Clock::now();
  const auto h = assemble(LatticeBox::at_origin(2, 30), PotentialSpec::zero(2));
  CombesThomasOptions opt;
  opt.all_interior_sources = true;
  opt.distance = DistanceMode::window;
  const auto rep = combes_thomas_check(h, {4.5, 0.0}, Site{0, 0}, opt);
  const double secs = seconds_since(t0);
  const double need = rep.c * rep.delta;
  const bool ok = std::abs(rep.delta - 0.5) < 1e-15 && std::abs(rep.c - 1.0 / 24.0) < 1e-15 && rep.holds() &&
                  rep.fitted_rate >= need && secs <= 120.0;
  return {ok, fmt("delta %.3g, c %.6g, %zu interior pairs from %zu sources, %zu violations, fitted rate %.4g >= c delta = %.4g, "
                  "runtime %.1f s <= 120 s",
                  rep.delta, rep.c, rep.pairs_checked, rep.sources, rep.violations.size(), rep.fitted_rate, need, secs)};
}

// 4. 20 random trimmed plane waves in d = 3 on random potentials supported on Gamma.
Outcome trimmed_validity() {
  std::mt19937_64 rng(20240601);
  std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi), width(0.5, 10.0);
  double worst_res = 0.0, worst_nodal = 0.0;
  for (int c = 0; c < 20; ++c) {
    const int d1 = 1 + static_cast<int>(rng() % 3);
    std::vector<std::int64_t> rho, k;
    for (int i = 0; i < d1; ++i) {
      rho.push_back(2 + static_cast<std::int64_t>(rng() % 5));
      k.push_back(1 + static_cast<std::int64_t>(rng() % (rho.back() - 1)));
    }
    std::vector<double> kappa;
    for (int j = 0; j < 3 - d1; ++j) kappa.push_back(angle(rng));
    const auto pattern = TrimPattern::periodic(rho, 3 - d1);
    const auto wave = make_trimmed_wave(pattern, k, kappa);
    const auto box = LatticeBox::at_origin(3, 7);
    const auto h = assemble(box, PotentialSpec::uniform(width(rng), rng(), 0, pattern));
    worst_res = std::max(worst_res, validate_generalized_eigenfunction(h, wave, wave.energy()));
    box.for_each_site([&](std::size_t, const Site& n) {
      if (pattern.contains(n)) worst_nodal = std::max(worst_nodal, std::abs(wave(n)));
    });
  }
  return {worst_res <= 1e-10 && worst_nodal <= 1e-14,
          fmt("20 configurations: max interior residual %.3g <= 1e-10, max |psi| on Gamma %.3g <= 1e-14", worst_res, worst_nodal)};
}

// 5. Growth exponent of the transverse trimmed wave, d = 3, rho = (2), L <= 200.
Outcome growth_profiles() {
  const auto pattern = TrimPattern::periodic({2}, 2);
  const std::int64_t l_max = 200;
  TrimmedTransverseWave wave(pattern, {1}, TransverseSolution(0.5, 1, 256), l_max + 1);
  const Site o{0, 0, 0};
  bool ok = true;
  std::string detail;
  for (double dq : {0.25, 0.5, 0.75}) {
    const double q = 1.0 + dq;
    const auto prof = growth_profile(wave, GrowthWeight::power(q, o), o, l_max);
    const double expect = 2.0 - q;
    const bool good = std::abs(prof.fit.nu - expect) <= 0.1;
    ok = ok && good;
    detail += fmt("q=%.2f nu=%.4f (target %.2f, fit residual %.2g, log-log %.3f)%s", q, prof.fit.nu, expect, prof.fit.residual,
                  prof.fit.nu_loglog, dq < 0.7 ? "; " : "");
  }
  return {ok, detail};
}

// 6. Measured resolvent sums against the certificate, trimmed model with W = 4 on Gamma, q = d1 + 2.
Outcome resolvent_lower_bound() {
  const auto pattern = TrimPattern::periodic({2}, 2);
  const Site n0{1, 0, 0};
  TrimmedTransverseWave wave(pattern, {1}, TransverseSolution(0.5, 1, 64), 64);
  const auto h = assemble(LatticeBox(3, n0, 20), PotentialSpec::uniform(4.0, 6, 0, pattern));
  const double residual = validate_generalized_eigenfunction(h, wave, wave.energy());
  const auto phi = GrowthWeight::power(3.0, n0);
  const auto prof = growth_profile(wave, phi, n0, 60);
  const double psi0 = std::abs(wave(n0));
  const auto cert = delocalization_certificate(prof, psi0, 1.05);
  bool ok = residual <= 1e-10 && prof.fit.nu <= 0.1;
  std::string detail = fmt("residual %.2g, nu %.3g (raw %.3g), A %.4g, |psi(n0)| %.4g;", residual, prof.fit.nu, prof.fit.nu_raw,
                           cert.amplitude, psi0);
  GreenOptions gopt;
  gopt.tol = 1e-8;
  for (double eps : {0.1, 0.05, 0.025}) {
    const auto s = weighted_resolvent_sum(h, phi, n0, wave.energy(), eps, gopt);
    const double bound = cert.resolvent_bound(eps);
    ok = ok && s.value >= bound;
    detail += fmt(" eps=%.3g: %.5g >= %.5g", eps, s.value, bound);
    const auto r = static_cast<std::size_t>(std::min<double>(std::floor(std::pow(eps, -1.05)), 60.0));
    info(fmt("eps %.3g: S(floor(eps^-alpha)) = %.4g against |psi(n0)|/2 = %.4g", eps, prof.weighted[r], psi0 / 2));
  }
  return {ok, detail};
}

// 7. Dynamical delocalization of the trimmed model, box from the containment precondition.
Outcome dynamical_delocalization() {
  const auto t0 = Clock::now();
  ModelConfig m;
  m.name = "trimmed";
  m.pattern = TrimPattern::periodic({2}, 2);
  m.width = 8.0;
  m.seed = 77;
  const auto grid = geometric_grid(5.0, 50.0, 8);
  TimeMomentOptions opt;
  Outcome out;
  try {
    const auto ex = model_exponents(m, 3.0, grid, 5, opt);
    out.pass = ex.min_slope() >= 0.7 && seconds_since(t0) <= 1800.0;
    out.detail = fmt("box radius %lld, min slope %.3f >= 0.7, runtime %.0f s", static_cast<long long>(ex.radius), ex.min_slope(),
                     seconds_since(t0));
  } catch (const ResourceError& e) {
    out.pass = false;
    out.detail = std::string("containment box is beyond the resource cap: ") + e.what();
  }
  if (!out.pass) {
    // Not gated: a small box with the containment check off shows the trend that is reachable here.
    ModelConfig small = m;
    small.radius = 20;
    TimeMomentOptions loose;
    loose.time_tol = 1e-4;
    loose.check_containment = false;
    const auto ex = model_exponents(small, 3.0, geometric_grid(1.0, 6.0, 6), 1, loose);
    info(fmt("diagnostic only (L = 20, containment off, T in [1, 6], 1 realization): slope %.3f", ex.min_slope()));
  }
  return out;
}

// 8. Full Anderson model, d = 1, W = 10, 2001 sites.
Outcome localization_contrast() {
  ModelConfig m;
  m.name = "anderson";
  m.pattern = TrimPattern::full_lattice(1);
  m.width = 10.0;
  m.seed = 2001;
  m.radius = 1000;
  const auto ex = model_exponents(m, 2.0, geometric_grid(50.0, 500.0, 8), 5);
  std::string slopes;
  for (const auto& r : ex.runs) slopes += fmt(" %.4f", r.fit.slope);
  return {ex.max_slope() <= 0.1, "slopes" + slopes + fmt(", max %.4f <= 0.1", ex.max_slope())};
}

// 9. Growth of the outside-spectrum solution, d = 1 free, E = 2.5.
Outcome outside_spectrum_growth() {
  const auto h = assemble(LatticeBox::at_origin(1, 45), PotentialSpec::zero(1));
  const ChainSolution psi(PotentialSpec::zero(1), 2.5, 60);
  const double residual = validate_generalized_eigenfunction(h, psi, 2.5);
  const auto rep = boundary_growth_check(psi, 2.5, h, 5, 40);
  double min_ratio = std::numeric_limits<double>::infinity();
  for (const auto& r : rep.rows) min_ratio = std::min(min_ratio, r.ratio / r.threshold);
  return {rep.violations() == 0 && residual <= 1e-10,
          fmt("delta %.3g, c %.4g, residual %.2g, %zu violations over L in [5, 40], min ratio/threshold %.3g", rep.delta, rep.c,
              residual, rep.violations(), min_ratio)};
}

// 10. Borel product inequality for the cos wave and for a bound state.
Outcome borel_scaling() {
  const std::vector<double> gammas{0.3, 0.5, 0.7}, alphas{1.1, 1.5}, eps{0.1, 0.05, 0.02};
  std::string detail;
  std::size_t failures = 0;
  {
    const auto h = assemble(LatticeBox::at_origin(1, 2000), PotentialSpec::zero(1));
    const Evaluator psi = [](const Site& n) { return std::complex<double>(detail::nodal_sin(1, n[0] + 1, 2), 0.0); };
    const auto rep = borel_scaling_check(h, psi, 0.0, kOrigin1, gammas, alphas, eps);
    failures += rep.failures();
    double worst = std::numeric_limits<double>::infinity();
    for (const auto& r : rep.rows) worst = std::min(worst, r.product / r.psi_n2);
    detail += fmt("cos wave on 4001 sites: %zu/%zu nodes fail (min product/|psi|^2 %.4f, residual %.2g)", rep.failures(),
                  rep.rows.size(), worst, rep.residual);
    for (const auto& r : rep.rows)
      if (!r.holds && r.gamma == 0.5) info(fmt("cos wave alpha %.1f eps %.2f: product/|psi(0)|^2 = %.4f", r.alpha, r.eps, r.product / r.psi_n2));
  }
  {
    const auto box = LatticeBox::at_origin(1, 400);
    const auto h = assemble(box, PotentialSpec::table({{kOrigin1, -3.0}}, TrimPattern::full_lattice(1)));
    const auto spec = dense_eig(h);
    Eigen::VectorXd v = spec.vectors.col(0);
    const Evaluator psi = [v, box](const Site& n) {
      return std::complex<double>(box.contains(n) ? v(static_cast<Eigen::Index>(box.index_of(n))) : 0.0, 0.0);
    };
    const auto rep = borel_scaling_check(h, psi, spec.values(0), kOrigin1, gammas, alphas, eps);
    failures += rep.failures();
    double worst = std::numeric_limits<double>::infinity();
    for (const auto& r : rep.rows) worst = std::min(worst, r.product / r.psi_n2);
    detail += fmt("; bound state E = %.6f: %zu/%zu nodes fail (min product/|psi|^2 %.4f)", spec.values(0), rep.failures(),
                  rep.rows.size(), worst);
    for (const auto& r : rep.rows)
      if (r.gamma == 0.7 && r.alpha == 1.1) info(fmt("bound state eps %.2f: eps^{1-gamma} Im G = %.4g", r.eps, std::pow(r.eps, 0.3) * r.im_g));
  }
  return {failures == 0, detail};
}

// 11. Cesaro vs Abel: M <= e * Abel.
Outcome abel_cesaro() {
  std::mt19937_64 rng(11);
  const std::vector<double> grid{0.3, 1.0, 3.0, 10.0, 30.0};
  TimeMomentOptions topt;
  topt.check_containment = false;
  std::size_t tested = 0, violations = 0, printed_form = 0;
  double worst = 0.0;
  for (int s = 0; s < 8; ++s) {
    const int d = s < 5 ? 1 : 2;
    const std::int64_t L = d == 1 ? 40 : 8;
    const double W = s == 0 ? 0.0 : 1.0 + 2.0 * s;
    const auto pot = W == 0.0 ? PotentialSpec::zero(d) : PotentialSpec::uniform(W, rng(), 0, TrimPattern::full_lattice(d));
    const auto h = assemble(LatticeBox::at_origin(d, L), pot);
    const Site o(d, 0);
    std::vector<GrowthWeight> weights{GrowthWeight::constant_one(), GrowthWeight::power(1.0, o), GrowthWeight::power(2.0, o),
                                      GrowthWeight::power(3.0, o)};
    std::map<Site, double> proj{{Site(d, 1), 1.0}};
    weights.push_back(GrowthWeight::table(proj, {1.0, 0.5}, 0.0));
    for (const auto& phi : weights) {
      const auto tm = time_moments(h, phi, o, grid, topt);
      for (std::size_t i = 0; i < grid.size(); ++i) {
        const auto& a = tm.abel.points[i];
        const auto& c = tm.cesaro.points[i];
        ++tested;
        if (c.value > std::numbers::e * a.value + c.error + std::numbers::e * a.error) ++violations;
        if (a.value > 0) worst = std::max(worst, c.value / a.value);
        if (c.value > a.value / std::numbers::e) ++printed_form;
      }
    }
  }
  info(fmt("printed 1/e form M <= Abel / e fails at %zu of %zu points (expected: a constant weight already violates it)",
           printed_form, tested));
  return {violations == 0, fmt("%zu (H, phi, T) points, %zu violations of M <= e Abel, max ratio M/Abel = %.4f", tested, violations, worst)};
}

// 12. Property suites, 100 randomized cases each.
double random_dense_error(const SparseHamiltonian& h, const ComplexVector& psi0, double t, const DenseSpectrum& spec) {
  const auto n = static_cast<Eigen::Index>(psi0.size());
  Eigen::VectorXcd x(n);
  for (Eigen::Index i = 0; i < n; ++i) x(i) = psi0[static_cast<std::size_t>(i)];
  Eigen::VectorXcd c = spec.vectors.transpose().cast<std::complex<double>>() * x;
  for (Eigen::Index j = 0; j < c.size(); ++j) c(j) *= std::polar(1.0, -spec.values(j) * t);
  Eigen::VectorXcd y = spec.vectors.cast<std::complex<double>>() * c;
  WaveState s{h.box(), psi0};
  const auto out = evolve(h, s, t, 1e-9);
  double e = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) e += std::norm(out.amplitudes[static_cast<std::size_t>(i)] - y(i));
  return std::sqrt(e);
}

SparseHamiltonian random_system(std::mt19937_64& rng, int max_dim, std::int64_t max_l) {
  const int d = 1 + static_cast<int>(rng() % max_dim);
  const std::int64_t L = 1 + static_cast<std::int64_t>(rng() % max_l);
  const double W = std::uniform_real_distribution<double>(0.0, 6.0)(rng);
  return assemble(LatticeBox::at_origin(d, L), PotentialSpec::uniform(W, rng(), 0, TrimPattern::full_lattice(d)));
}

ComplexVector random_state(std::mt19937_64& rng, std::size_t n) {
  std::normal_distribution<double> g;
  ComplexVector v(n);
  for (auto& x : v) x = {g(rng), g(rng)};
  const double s = l2_norm(v);
  for (auto& x : v) x /= s;
  return v;
}

Outcome property_suites() {
  std::mt19937_64 rng(12);
  const int cases = 100;
  // propagator: unitarity, composition, agreement with the dense exponential
  double unit = 0.0, comp = 0.0, exact = 0.0;
  const double tol = 1e-8;
  for (int c = 0; c < cases; ++c) {
    const auto h = random_system(rng, 2, 5);
    const WaveState psi{h.box(), random_state(rng, h.size())};
    std::uniform_real_distribution<double> tt(0.0, 8.0);
    const double t1 = tt(rng), t2 = tt(rng);
    const auto a = evolve(h, psi, t1 + t2, tol);
    const auto b = evolve(h, evolve(h, psi, t1, tol), t2, tol);
    unit = std::max(unit, std::abs(a.norm() - 1.0));
    double diff = 0.0;
    for (std::size_t i = 0; i < h.size(); ++i) diff += std::norm(a.amplitudes[i] - b.amplitudes[i]);
    comp = std::max(comp, std::sqrt(diff));
    exact = std::max(exact, random_dense_error(h, psi.amplitudes, t1, dense_eig(h)));
  }
  const bool prop_ok = unit <= 10 * tol && comp <= 2 * tol && exact <= 1e-9;

  // commutator remainder: matches H0 chi - chi H0 on a larger box, support, l1 bound
  double rem_diff = 0.0, rem_ratio = 0.0;
  std::size_t off_support = 0;
  for (int c = 0; c < cases; ++c) {
    const int d = 1 + static_cast<int>(rng() % 3);
    // L = 0 is excluded: the single inner site has 2d crossing links and the bound becomes 2d.
    const std::int64_t L = 1 + static_cast<std::int64_t>(rng() % (d == 3 ? 3 : 5));
    const auto seed = rng();
    const Evaluator psi = [seed](const Site& n) {
      return std::complex<double>(2.0 * detail::site_uniform(seed, 0, n) - 1.0, 2.0 * detail::site_uniform(seed, 1, n) - 1.0);
    };
    const Site o(d, 0);
    const LatticeBox inner(d, o, L), big(d, o, L + 3);
    const auto r = commutator_remainder(psi, inner);
    const auto h0 = assemble(big, PotentialSpec::zero(d));
    ComplexVector u = tabulate(psi, big), chi_u(big.size()), a(big.size()), b(big.size());
    big.for_each_site([&](std::size_t i, const Site& n) { chi_u[i] = inner.contains(n) ? u[i] : 0.0; });
    h0.apply<std::complex<double>>(chi_u, a);
    h0.apply<std::complex<double>>(u, b);
    std::map<Site, std::complex<double>> listed;
    for (const auto& e : r) listed[e.site] = e.value;
    big.for_each_site([&](std::size_t i, const Site& n) {
      if (sup_distance(n, o) > L + 2) return;  // neighbours of these sites leave the big box
      const std::complex<double> want = a[i] - (inner.contains(n) ? b[i] : 0.0);
      const auto it = listed.find(n);
      if (it == listed.end()) {
        if (std::abs(want) > 1e-14) ++off_support;
      } else {
        rem_diff = std::max(rem_diff, std::abs(it->second - want));
      }
    });
    rem_ratio = std::max(rem_ratio, remainder_l1(r) / (d * enlarged_shell_l1(psi, inner)));
  }
  const bool rem_ok = rem_diff <= 1e-13 && off_support == 0 && rem_ratio <= 1.0 + 1e-12;  // equality holds for d = 1

  // eigen-relation reconstruction psi = (E - z) G chi_L psi + G R at sites of Lambda_L
  double recon = 0.0;
  for (int c = 0; c < cases; ++c) {
    Evaluator psi;
    double energy = 0.0;
    std::unique_ptr<SparseHamiltonian> h;
    const std::int64_t L = 2 + static_cast<std::int64_t>(rng() % 4);
    if (c % 2 == 0) {
      const auto pot = PotentialSpec::uniform(1.0 + 5.0 * detail::site_uniform(c, 0, {0}), rng(), 0, TrimPattern::full_lattice(1));
      const double E = std::uniform_real_distribution<double>(-4.0, 4.0)(rng);
      ChainSolution s(pot, E, L + 3, 1.0, std::uniform_real_distribution<double>(-1.0, 1.0)(rng));
      psi = s;
      energy = E;
      h = std::make_unique<SparseHamiltonian>(assemble(LatticeBox::at_origin(1, L + 2), pot));
    } else {
      const int d = 2 + static_cast<int>(rng() % 2);
      const auto pattern = TrimPattern::periodic({2 + static_cast<std::int64_t>(rng() % 3)}, d - 1);
      std::vector<double> kappa;
      for (int j = 1; j < d; ++j) kappa.push_back(std::uniform_real_distribution<double>(0.0, 6.28)(rng));
      const auto w = make_trimmed_wave(pattern, {1}, kappa);
      psi = w;
      energy = w.energy();
      h = std::make_unique<SparseHamiltonian>(
          assemble(LatticeBox::at_origin(d, std::min<std::int64_t>(L, 3) + 2), PotentialSpec::uniform(4.0, rng(), 0, pattern)));
    }
    const auto& box = h->box();
    const LatticeBox inner(box.dim(), box.center(), box.radius() - 2);
    const std::complex<double> z(energy + std::uniform_real_distribution<double>(-0.5, 0.5)(rng),
                                 std::uniform_real_distribution<double>(0.05, 1.0)(rng));
    ComplexVector rhs(box.size(), 0.0);
    box.for_each_site([&](std::size_t i, const Site& n) {
      if (inner.contains(n)) rhs[i] = (energy - z) * psi(n);
    });
    for (const auto& e : commutator_remainder(psi, inner)) rhs[box.index_of(e.site)] += e.value;
    GreenOptions g;
    g.method = GreenMethod::dense;
    const auto sol = solve_shifted(*h, z, rhs, g);
    box.for_each_site([&](std::size_t i, const Site& n) {
      if (inner.contains(n)) recon = std::max(recon, std::abs(sol.x[i] - psi(n)) / std::max(1.0, std::abs(psi(n))));
    });
  }
  const bool recon_ok = recon <= 1e-8;

  // Green column vs spectral sum
  double green = 0.0;
  for (int c = 0; c < cases; ++c) {
    const auto h = random_system(rng, 3, 4);
    const auto spec = dense_eig(h);
    const Site src = h.box().site_at(rng() % h.size());
    const std::complex<double> z(std::uniform_real_distribution<double>(-8.0, 8.0)(rng),
                                 (c % 2 ? 1.0 : -1.0) * std::uniform_real_distribution<double>(0.01, 2.0)(rng));
    GreenOptions g;
    g.tol = 1e-12;
    const auto col = green_column(h, z, src, g);
    const auto s = static_cast<Eigen::Index>(h.box().index_of(src));
    for (Eigen::Index n = 0; n < spec.vectors.rows(); ++n) {
      std::complex<double> want = 0.0;
      for (Eigen::Index j = 0; j < spec.values.size(); ++j) want += spec.vectors(n, j) * spec.vectors(s, j) / (spec.values(j) - z);
      green = std::max(green, std::abs(col.values[static_cast<std::size_t>(n)] - want));
    }
  }
  const bool green_ok = green <= 1e-8;

  return {prop_ok && rem_ok && recon_ok && green_ok,
          fmt("%d cases each: propagator |norm-1| %.2g, composition %.2g, vs dense %.2g; remainder mismatch %.2g, off-support %zu, "
              "l1 ratio %.3f <= 1; reconstruction %.2g; Green vs eig %.2g",
              cases, unit, comp, exact, rem_diff, off_support, rem_ratio, recon, green)};
}

const std::vector<std::function<Outcome()>> kCriteria{
    moment_resolvent_identity, normalization,          combes_thomas,           trimmed_validity,
    growth_profiles,           resolvent_lower_bound,  dynamical_delocalization, localization_contrast,
    outside_spectrum_growth,   borel_scaling,          abel_cesaro,             property_suites};

}  // namespace

int main(int argc, char** argv) {
  std::vector<int> which;
  for (int i = 1; i < argc; ++i) which.push_back(std::atoi(argv[i]));
  if (which.empty())
    for (int i = 1; i <= static_cast<int>(kCriteria.size()); ++i) which.push_back(i);
  int failed = 0;
  for (int c : which) {
    if (c < 1 || c > static_cast<int>(kCriteria.size())) {
      std::cerr << "unknown criterion " << c << '\n';
      return 2;
    }
    const auto t0 = Clock::now();
    Outcome o;
    try {
      o = kCriteria[c - 1]();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::cout << "CRITERION " << c << ' ' << (o.pass ? "PASS" : "FAIL") << ": " << o.detail
              << fmt(" [%.1f s]", seconds_since(t0)) << std::endl;
    failed += o.pass ? 0 : 1;
  }
  return failed ? 1 : 0;
}
