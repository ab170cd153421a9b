#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "stokeslab/app.hpp"

namespace {

struct Flags {
  std::optional<std::string> config;
  std::optional<int> n, coarsest_n, nu1, nu2, max_iters, threads, seed;
  std::optional<double> tol;
  std::optional<std::string> pc, out;
  std::vector<std::string> sets;
};

void add_common(CLI::App* cmd, Flags& f) {
  cmd->add_option("--config", f.config, "key=value configuration file");
  cmd->add_option("--n", f.n, "elements per direction");
  cmd->add_option("--pc", f.pc, "mg-bs | mg-vanka | mg-vanka-simple | mg-uzawa | block-tri | none");
  cmd->add_option("--tol", f.tol, "relative residual tolerance");
  cmd->add_option("--max-iters", f.max_iters, "FGMRES iteration limit");
  cmd->add_option("--coarsest-n", f.coarsest_n, "coarsest multigrid grid");
  cmd->add_option("--nu1", f.nu1, "pre-smoothing sweeps");
  cmd->add_option("--nu2", f.nu2, "post-smoothing sweeps");
  cmd->add_option("--threads", f.threads, "worker threads (1 = reference mode)");
  cmd->add_option("--seed", f.seed, "seed for randomized inputs");
  cmd->add_option("--out", f.out, "output directory (default $STOKESLAB_OUT or ./stokeslab-out)");
  cmd->add_option("--set", f.sets, "dotted setting, e.g. vanka.omega=0.7")->take_all();
}

void apply(stokeslab::RunConfig& cfg, const Flags& f) {
  using stokeslab::apply_setting;
  if (f.config) stokeslab::load_config_file(cfg, *f.config);
  if (f.n) apply_setting(cfg, "n", std::to_string(*f.n));
  if (f.pc) apply_setting(cfg, "pc", *f.pc);
  if (f.tol) cfg.solver.rel_tol = *f.tol;
  if (f.max_iters) apply_setting(cfg, "max_iters", std::to_string(*f.max_iters));
  if (f.coarsest_n) apply_setting(cfg, "mg.coarsest_n", std::to_string(*f.coarsest_n));
  if (f.nu1) apply_setting(cfg, "mg.nu1", std::to_string(*f.nu1));
  if (f.nu2) apply_setting(cfg, "mg.nu2", std::to_string(*f.nu2));
  if (f.threads) apply_setting(cfg, "threads", std::to_string(*f.threads));
  if (f.seed) apply_setting(cfg, "seed", std::to_string(*f.seed));
  if (f.out) cfg.out_dir = *f.out;
  for (const auto& s : f.sets) stokeslab::apply_assignment(cfg, s);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Q2-Q1 Stokes solvers with monolithic multigrid"};
  app.require_subcommand(1);
  Flags flags;
  for (const char* name : {"solve", "verify", "tune", "bench"}) {
    const char* help = std::string(name) == "solve"    ? "solve the manufactured problem once"
                       : std::string(name) == "verify" ? "convergence study over verify.grids"
                       : std::string(name) == "tune"   ? "parameter grid search (tune.* keys)"
                                                       : "kernel cost and roofline reports";
    add_common(app.add_subcommand(name, help), flags);
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : stokeslab::kExitConfig;
  }

  stokeslab::RunConfig cfg;
  try {
    cfg.command = app.get_subcommands().front()->get_name();
    if (cfg.command == "tune") cfg.n = 16;
    apply(cfg, flags);
  } catch (const stokeslab::ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return stokeslab::kExitConfig;
  }
  try {
    return stokeslab::run_command(cfg, std::cout);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return stokeslab::kExitConfig;
  }
}
