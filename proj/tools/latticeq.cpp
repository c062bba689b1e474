// latticeq command-line runner.

#include <cstdlib>
#include <iostream>
#include <map>

#include <CLI11.hpp>

#include "commands.hpp"

namespace {

using namespace latticeq;
using namespace latticeq::cli;

struct Subcommand {
  const char* name;
  const char* help;
  void (*run)(Context&);
};

const Subcommand kCommands[] = {
    {"spectrum", "Dense spectrum of H_L.  spectrum_r{r}.csv: index,eigenvalue,err (err = ||H v - E v||).", run_spectrum},
    {"evolve",
     "Chebyshev propagation of delta_{initial_site}.  evolve_r{r}.csv: t,n1..nd,prob,err (sites with prob >= min_prob); "
     "evolve_summary_r{r}.csv: t,norm,boundary_mass,err.",
     run_evolve},
    {"moments",
     "Weighted transport moments on a T grid, route abel|cesaro|resolvent|all.  moments_r{r}.csv: T,value,err,route; "
     "moments_r{r}.svg.",
     run_moments},
    {"green", "Green column G(z) e_source.  green_r{r}.csv: n1..nd,re,im,abs,err (err = residual / dist(z, window)).",
     run_green},
    {"eigenfun",
     "Trimmed generalized eigenfunction and its growth profile.  eigenfun.csv: key,value; "
     "profile.csv: L,shell_sum,weighted_sum,threshold.",
     run_eigenfun},
    {"ct-check",
     "Combes-Thomas decay check.  ct.csv: distance,max_abs_g,threshold,pairs,err; ct.svg; ct_summary.csv: key,value.",
     run_ct},
    {"borel",
     "Borel-type lower bound check on |psi(n)|^2.  borel.csv: gamma,alpha,eps,radius,im_g,lhs,rhs,product,psi_n2,"
     "margin,err,holds; borel.svg.",
     run_borel},
    {"contrast", "Trimmed vs Anderson transport exponents.  exponents.csv: model,realization,radius,slope,intercept,fit_residual,points.",
     run_contrast},
    {"certify",
     "Delocalization certificate against measured resolvent sums.  certify.csv: eps,T,measured,bound,err,holds.",
     run_certify},
};

int emit_error(const std::string& kind, const std::string& message, int code, const std::string& path = {},
               std::int64_t min_safe = -1) {
  json e{{"error", kind}, {"message", message}, {"exit_code", code}};
  if (!path.empty()) e["path"] = path;
  if (min_safe >= 0) e["min_safe_radius"] = min_safe;
  std::cerr << e.dump() << std::endl;
  return code;
}

int execute(const Subcommand& cmd, const std::string& config, const std::string& out, std::size_t threads,
            const std::vector<std::string>& overrides, std::optional<std::uint64_t> seed) {
  try {
    Context ctx;
    ctx.doc = load_json(config);
    for (const auto& o : overrides) apply_override(ctx.doc, o);
    ctx.threads = resolve_threads(threads);
    ctx.has_seed = seed.has_value();
    ctx.seed = seed.value_or(0);
    ctx.max_seconds = limits_from(ctx.root()).max_seconds;
    ctx.out = out;
    std::error_code ec;
    fs::create_directories(ctx.out, ec);
    if (ec) throw ConfigError("cannot create output directory " + out + ": " + ec.message(), "");
    cmd.run(ctx);
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - ctx.start).count();
    json manifest{{"tool", "latticeq"},
                  {"version", LATTICEQ_VERSION},
                  {"subcommand", cmd.name},
                  {"threads", ctx.threads},
                  {"config", ctx.doc},
                  {"artifacts", ctx.artifacts},
                  {"results", ctx.results},
                  {"seconds", seconds}};
    std::ofstream(ctx.out / "manifest.json") << manifest.dump(2) << '\n';
    std::cout << ctx.results.dump() << std::endl;
    return 0;
  } catch (const ConfigError& e) {
    return emit_error("ConfigError", e.what(), 1, e.path());
  } catch (const ContainmentError& e) {
    return emit_error("ContainmentError", e.what(), 1, {}, e.min_safe_radius());
  } catch (const PreconditionError& e) {
    return emit_error("PreconditionError", e.what(), 1);
  } catch (const NumericError& e) {
    return emit_error("NumericError", e.what(), 2);
  } catch (const ResourceError& e) {
    return emit_error("ResourceError", e.what(), 3);
  } catch (const std::bad_alloc&) {
    return emit_error("ResourceError", "out of memory", 3);
  } catch (const std::exception& e) {
    return emit_error("NumericError", e.what(), 2);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"latticeq: transport and generalized eigenfunctions for trimmed lattice Schrodinger operators"};
  app.require_subcommand(1);
  std::string config, out = ".";
  std::size_t threads = 0;
  std::vector<std::string> overrides;
  std::uint64_t seed = 0;
  const Subcommand* chosen = nullptr;
  std::map<std::string, CLI::Option*> seed_opts;
  for (const auto& cmd : kCommands) {
    auto* sub = app.add_subcommand(cmd.name, cmd.help);
    sub->add_option("--config", config, "JSON experiment configuration")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", out, "output directory (created if missing)");
    sub->add_option("--threads", threads, "worker threads; 0 reads LATTICEQ_THREADS, then hardware concurrency");
    seed_opts[cmd.name] = sub->add_option("--seed", seed, "override the disorder seed");
    sub->add_option("--override", overrides, "dotted key=value applied to the configuration (repeatable)");
    sub->callback([&chosen, &cmd] { chosen = &cmd; });
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return emit_error("ConfigError", e.what(), 1, "");
  }
  std::optional<std::uint64_t> seed_value;
  if (seed_opts.at(chosen->name)->count() > 0) seed_value = seed;
  return execute(*chosen, config, out, threads, overrides, seed_value);
}
