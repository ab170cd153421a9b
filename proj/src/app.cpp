#include "stokeslab/app.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>

#include "json.hpp"
#include "stokeslab/parallel.hpp"

namespace stokeslab {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

namespace {

constexpr int kSchemaVersion = 1;

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

int parse_int(const std::string& key, const std::string& v) {
  int out = 0;
  const auto s = trim(v);
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  if (ec != std::errc() || p != s.data() + s.size() || s.empty()) {
    throw ConfigError(key + ": expected an integer, got '" + v + "'");
  }
  return out;
}

double parse_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  const auto s = trim(v);
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  if (ec != std::errc() || p != s.data() + s.size() || s.empty() || !std::isfinite(out)) {
    throw ConfigError(key + ": expected a number, got '" + v + "'");
  }
  return out;
}

std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::vector<double> parse_doubles(const std::string& key, const std::string& v) {
  std::vector<double> out;
  for (const auto& s : split_list(v)) out.push_back(parse_double(key, s));
  if (out.empty()) throw ConfigError(key + ": empty list");
  return out;
}

std::vector<int> parse_ints(const std::string& key, const std::string& v) {
  std::vector<int> out;
  for (const auto& s : split_list(v)) out.push_back(parse_int(key, s));
  if (out.empty()) throw ConfigError(key + ": empty list");
  return out;
}

bool uses_mg(PcKind k) {
  return k == PcKind::MgBs || k == PcKind::MgVanka || k == PcKind::MgVankaSimple ||
         k == PcKind::MgUzawa;
}

RelaxationKind relaxation_of(const RunConfig& cfg) {
  switch (cfg.pc) {
    case PcKind::MgVanka:
      return cfg.mg.vanka.mode == VankaMode::Simple ? RelaxationKind::VankaSimple
                                                    : RelaxationKind::Vanka;
    case PcKind::MgVankaSimple: return RelaxationKind::VankaSimple;
    case PcKind::MgUzawa: return RelaxationKind::Uzawa;
    default: return RelaxationKind::BS;
  }
}

void validate_grid(const RunConfig& cfg, int n) {
  if (n < 1) throw ConfigError("n must be >= 1");
  if (uses_mg(cfg.pc) || cfg.pc == PcKind::BlockTri) {
    try {
      level_count(n, cfg.mg.coarsest_n);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
  }
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::ofstream open_out(const fs::path& p) {
  std::ofstream os(p);
  if (!os) throw std::runtime_error("cannot write " + p.string());
  return os;
}

json config_json(const RunConfig& c) {
  json j;
  j["command"] = c.command;
  j["n"] = c.n;
  j["pc"] = to_string(c.pc);
  j["nu"] = c.nu;
  j["solver"] = {{"tol", c.solver.rel_tol}, {"max_iters", c.solver.max_iters},
                 {"restart", c.solver.restart}};
  j["mg"] = {{"nu1", c.mg.nu1},
             {"nu2", c.mg.nu2},
             {"coarsest_n", c.mg.coarsest_n},
             {"coarse_solver", c.mg.coarse_solver == CoarseSolverKind::LU ? "lu" : "sweeps"},
             {"coarse_sweeps", c.mg.coarse_sweeps}};
  j["bs"] = {{"t", c.mg.bs.t},
             {"omega", c.mg.bs.omega},
             {"jacobi_omega", c.mg.bs.jacobi_omega},
             {"jacobi_sweeps", c.mg.bs.jacobi_sweeps}};
  j["uzawa"] = {{"t", c.mg.uzawa.t},
                {"jacobi_omega", c.mg.uzawa.jacobi_omega},
                {"jacobi_sweeps", c.mg.uzawa.jacobi_sweeps}};
  j["vanka"] = {{"mode", to_string(c.mg.vanka.mode)},
                {"omega", c.mg.vanka.omega},
                {"weighting", to_string(c.mg.vanka.weighting)}};
  j["bt"] = {{"cycles", c.bt.cycles},
             {"omega_p", c.bt.omega_p},
             {"omega_u", c.bt.omega_u},
             {"nu1", c.bt.nu1},
             {"nu2", c.bt.nu2}};
  j["machine"] = {{"peak_gflops", c.machine.peak_flops / 1e9},
                  {"bandwidth_gbs", c.machine.bandwidth / 1e9}};
  j["threads"] = c.threads;
  j["seed"] = c.seed;
  return j;
}

json cost_json(const CostReport& rep) {
  json rows = json::array();
  for (const auto& r : rep.rows) {
    rows.push_back({{"kernel", r.kernel},
                    {"calls", r.counts.calls},
                    {"reads", r.counts.reads},
                    {"writes", r.counts.writes},
                    {"flops", r.counts.flops},
                    {"ai", r.ai},
                    {"modeled_perf", r.perf},
                    {"modeled_time", r.time},
                    {"pct", r.pct}});
  }
  return {{"total_modeled_time", rep.total_time}, {"kernels", rows}};
}

json errors_json(const ErrorNorms& e) {
  return {{"l2_velocity", e.l2_velocity},
          {"l2_pressure", e.l2_pressure},
          {"l2_discrete_velocity", e.l2_discrete_velocity},
          {"l2_discrete_pressure", e.l2_discrete_pressure}};
}

json outcome_json(const SolveOutcome& o) {
  return {{"n", o.n},
          {"converged", o.report.converged},
          {"diverged", o.diverged},
          {"failure", o.failure},
          {"iterations", o.report.iterations},
          {"final_rel_residual", o.report.final_rel_residual},
          {"history", o.report.history},
          {"cumulative_modeled_cost", o.cumulative_cost}};
}

void write_json(const fs::path& p, const json& j) {
  auto os = open_out(p);
  os << j.dump(2) << '\n';
}

void write_history_csv(const fs::path& p, const SolveOutcome& o) {
  auto os = open_out(p);
  os << "iteration,relative_residual,cumulative_modeled_cost\n";
  for (std::size_t k = 0; k < o.report.history.size(); ++k) {
    const double c = k < o.cumulative_cost.size() ? o.cumulative_cost[k] : 0.0;
    os << k << ',' << fmt(o.report.history[k]) << ',' << fmt(c) << '\n';
  }
}

fs::path prepare_out(const RunConfig& cfg) {
  const auto dir = resolve_out_dir(cfg);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create output directory " + dir.string());
  return dir;
}

}  // namespace

const char* to_string(PcKind k) {
  switch (k) {
    case PcKind::MgBs: return "mg-bs";
    case PcKind::MgVanka: return "mg-vanka";
    case PcKind::MgVankaSimple: return "mg-vanka-simple";
    case PcKind::MgUzawa: return "mg-uzawa";
    case PcKind::BlockTri: return "block-tri";
    case PcKind::None: return "none";
  }
  return "?";
}

PcKind parse_pc(const std::string& s) {
  for (auto k : {PcKind::MgBs, PcKind::MgVanka, PcKind::MgVankaSimple, PcKind::MgUzawa,
                 PcKind::BlockTri, PcKind::None}) {
    if (s == to_string(k)) return k;
  }
  throw ConfigError("unknown preconditioner '" + s +
                    "' (expected mg-bs, mg-vanka, mg-vanka-simple, mg-uzawa, block-tri, none)");
}

void apply_setting(RunConfig& c, const std::string& raw_key, const std::string& raw_value) {
  const std::string key = trim(raw_key);
  const std::string v = trim(raw_value);
  using Setter = std::function<void()>;
  const std::map<std::string, Setter> setters = {
      {"command", [&] { c.command = v; }},
      {"n", [&] { c.n = parse_int(key, v); }},
      {"pc", [&] { c.pc = parse_pc(v); }},
      {"nu", [&] { c.nu = parse_double(key, v); }},
      {"tol", [&] { c.solver.rel_tol = parse_double(key, v); }},
      {"solver.tol", [&] { c.solver.rel_tol = parse_double(key, v); }},
      {"max_iters", [&] { c.solver.max_iters = parse_int(key, v); }},
      {"solver.max_iters", [&] { c.solver.max_iters = parse_int(key, v); }},
      {"solver.restart", [&] { c.solver.restart = parse_int(key, v); }},
      {"mg.nu1", [&] { c.mg.nu1 = parse_int(key, v); }},
      {"mg.nu2", [&] { c.mg.nu2 = parse_int(key, v); }},
      {"mg.coarsest_n", [&] { c.mg.coarsest_n = c.bt.coarsest_n = parse_int(key, v); }},
      {"mg.coarse_solver",
       [&] {
         if (v == "lu") c.mg.coarse_solver = CoarseSolverKind::LU;
         else if (v == "sweeps") c.mg.coarse_solver = CoarseSolverKind::Sweeps;
         else throw ConfigError(key + ": expected lu or sweeps");
       }},
      {"mg.coarse_sweeps", [&] { c.mg.coarse_sweeps = parse_int(key, v); }},
      {"bs.t", [&] { c.mg.bs.t = parse_double(key, v); }},
      {"bs.omega", [&] { c.mg.bs.omega = parse_double(key, v); }},
      {"bs.jacobi_omega", [&] { c.mg.bs.jacobi_omega = parse_double(key, v); }},
      {"bs.jacobi_sweeps", [&] { c.mg.bs.jacobi_sweeps = parse_int(key, v); }},
      {"uzawa.t", [&] { c.mg.uzawa.t = parse_double(key, v); }},
      {"uzawa.jacobi_omega", [&] { c.mg.uzawa.jacobi_omega = parse_double(key, v); }},
      {"uzawa.jacobi_sweeps", [&] { c.mg.uzawa.jacobi_sweeps = parse_int(key, v); }},
      {"vanka.omega", [&] { c.mg.vanka.omega = parse_double(key, v); }},
      {"vanka.mode",
       [&] {
         if (v == "tuned") c.mg.vanka.mode = VankaMode::Tuned;
         else if (v == "simple") c.mg.vanka.mode = VankaMode::Simple;
         else throw ConfigError(key + ": expected tuned or simple");
       }},
      {"mg.relaxation",
       [&] {
         try {
           switch (parse_relaxation(v)) {
             case RelaxationKind::BS: c.pc = PcKind::MgBs; break;
             case RelaxationKind::Vanka: c.pc = PcKind::MgVanka; break;
             case RelaxationKind::VankaSimple: c.pc = PcKind::MgVankaSimple; break;
             case RelaxationKind::Uzawa: c.pc = PcKind::MgUzawa; break;
           }
         } catch (const std::invalid_argument& e) {
           throw ConfigError(e.what());
         }
       }},
      {"vanka.weighting",
       [&] {
         if (v == "overlap") c.mg.vanka.weighting = VankaWeighting::Overlap;
         else if (v == "scalar") c.mg.vanka.weighting = VankaWeighting::Scalar;
         else throw ConfigError(key + ": expected overlap or scalar");
       }},
      {"bt.cycles", [&] { c.bt.cycles = parse_int(key, v); }},
      {"bt.omega_p", [&] { c.bt.omega_p = parse_double(key, v); }},
      {"bt.omega_u", [&] { c.bt.omega_u = parse_double(key, v); }},
      {"bt.nu1", [&] { c.bt.nu1 = parse_int(key, v); }},
      {"bt.nu2", [&] { c.bt.nu2 = parse_int(key, v); }},
      {"machine.peak_gflops", [&] { c.machine.peak_flops = parse_double(key, v) * 1e9; }},
      {"machine.bandwidth_gbs", [&] { c.machine.bandwidth = parse_double(key, v) * 1e9; }},
      {"threads", [&] { c.threads = parse_int(key, v); }},
      {"seed",
       [&] {
         const int s = parse_int(key, v);
         if (s < 0) throw ConfigError("seed must be >= 0");
         c.seed = static_cast<std::uint64_t>(s);
       }},
      {"out", [&] { c.out_dir = v; }},
      {"verify.grids", [&] { c.verify_grids = parse_ints(key, v); }},
      {"tune.scheme", [&] { c.tune.scheme = v; }},
      {"tune.t", [&] { c.tune.t = parse_doubles(key, v); }},
      {"tune.omega", [&] { c.tune.omega = parse_doubles(key, v); }},
      {"tune.jacobi_omega", [&] { c.tune.jacobi_omega = parse_doubles(key, v); }},
      {"tune.jacobi_sweeps", [&] { c.tune.jacobi_sweeps = parse_ints(key, v); }},
      {"tune.vanka_omega", [&] { c.tune.vanka_omega = parse_doubles(key, v); }},
      {"bench.table_n", [&] { c.table_n = parse_int(key, v); }},
  };
  const auto it = setters.find(key);
  if (it == setters.end()) throw ConfigError("unknown setting '" + key + "'");
  it->second();
}

void apply_assignment(RunConfig& cfg, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) throw ConfigError("expected key=value, got '" + assignment + "'");
  apply_setting(cfg, assignment.substr(0, eq), assignment.substr(eq + 1));
}

void load_config_file(RunConfig& cfg, const fs::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config file " + path.string());
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    try {
      apply_assignment(cfg, line);
    } catch (const ConfigError& e) {
      throw ConfigError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
}

void validate(const RunConfig& cfg) {
  static const char* commands[] = {"solve", "verify", "tune", "bench"};
  if (std::find(std::begin(commands), std::end(commands), cfg.command) == std::end(commands)) {
    throw ConfigError("unknown command '" + cfg.command + "'");
  }
  if (!(cfg.nu > 0.0)) throw ConfigError("nu must be > 0");
  if (cfg.threads < 1) throw ConfigError("threads must be >= 1");
  if (cfg.table_n < 1) throw ConfigError("bench.table_n must be >= 1");
  try {
    cfg.solver.validate();
    cfg.machine.validate();
    if (cfg.mg.nu1 < 0 || cfg.mg.nu2 < 0) throw std::invalid_argument("mg.nu1/nu2 must be >= 0");
    if (cfg.mg.coarse_sweeps < 1) throw std::invalid_argument("mg.coarse_sweeps must be >= 1");
    cfg.mg.bs.validate();
    cfg.mg.uzawa.validate();
    cfg.mg.vanka.validate();
    if (cfg.pc == PcKind::BlockTri) cfg.bt.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (cfg.command == "verify") {
    if (cfg.verify_grids.size() < 3) throw ConfigError("verify.grids needs at least 3 grids");
    for (int n : cfg.verify_grids) validate_grid(cfg, n);
  } else {
    validate_grid(cfg, cfg.n);
  }
  if (cfg.command == "tune" && cfg.tune.scheme != "bs" && cfg.tune.scheme != "uzawa" &&
      cfg.tune.scheme != "vanka") {
    throw ConfigError("tune.scheme must be bs, uzawa or vanka");
  }
}

fs::path resolve_out_dir(const RunConfig& cfg) {
  if (!cfg.out_dir.empty()) return cfg.out_dir;
  if (const char* env = std::getenv("STOKESLAB_OUT"); env && *env) return env;
  return "stokeslab-out";
}

SolveOutcome run_solve(const RunConfig& cfg, int n) {
  SolveOutcome out;
  out.n = n;
  const auto t0 = std::chrono::steady_clock::now();
  const StructuredGrid grid(n);
  const auto prob = make_problem(grid, cfg.nu);

  Preconditioner pc;
  std::optional<MGHierarchy> mg;
  std::optional<BlockTriangular> bt;
  if (uses_mg(cfg.pc)) {
    MGConfig mc = cfg.mg;
    mc.relaxation = relaxation_of(cfg);
    mg.emplace(grid, cfg.nu, mc);
    pc = [&](const BlockVector& r, BlockVector& z) { mg->apply(r, z); };
  } else if (cfg.pc == PcKind::BlockTri) {
    BlockTriConfig bc = cfg.bt;
    bc.coarsest_n = cfg.mg.coarsest_n;
    bt.emplace(prob.ops, bc);
    pc = [&](const BlockVector& r, BlockVector& z) { bt->apply(r, z); };
  }
  out.setup_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  BlockVector x(grid);
  const LinearOperator A = [&](const BlockVector& v, BlockVector& y) { prob.ops.apply(v, y); };
  const IterationObserver observe = [&](int, double) {
    out.cumulative_cost.push_back(modeled_cost(out.counters, cfg.machine));
  };
  {
    CounterScope scope(out.counters);
    try {
      out.report = fgmres_solve(A, prob.rhs, x, cfg.solver, pc, observe);
    } catch (const DivergenceError& e) {
      out.diverged = true;
      out.failure = e.what();
      out.report.converged = false;
    }
  }
  remove_pressure_mean(x);
  out.errors = solution_errors(grid, x);
  return out;
}

int cmd_solve(const RunConfig& cfg, std::ostream& log) {
  const auto dir = prepare_out(cfg);
  const auto o = run_solve(cfg, cfg.n);
  const auto cost = cost_report(o.counters, cfg.machine);

  json bundle;
  bundle["schema_version"] = kSchemaVersion;
  bundle["config"] = config_json(cfg);
  bundle["result"] = outcome_json(o);
  bundle["errors"] = errors_json(o.errors);
  bundle["cost"] = cost_json(cost);
  write_json(dir / "bundle.json", bundle);
  write_history_csv(dir / "history.csv", o);
  {
    auto os = open_out(dir / "kernels.csv");
    write_kernels_csv(os, cost);
  }
  {
    auto os = open_out(dir / "roofline.csv");
    write_roofline_csv(os, cost, cfg.machine);
  }
  write_json(dir / "timing.json",
             {{"setup_seconds", o.setup_seconds}, {"solve_seconds", o.report.solve_seconds}});

  char line[256];
  std::snprintf(line, sizeof line,
                "solve N=%d pc=%s converged=%s iterations=%d rel_residual=%.3e "
                "l2_velocity=%.4e l2_pressure=%.4e modeled_cost=%.4e s\n",
                cfg.n, to_string(cfg.pc), o.report.converged ? "true" : "false",
                o.report.iterations, o.report.final_rel_residual, o.errors.l2_velocity,
                o.errors.l2_pressure, cost.total_time);
  log << line;
  if (o.diverged) log << "diverged: " << o.failure << '\n';
  log << "wrote " << dir.string() << '\n';
  return o.report.converged ? kExitOk : kExitNotConverged;
}

int cmd_verify(const RunConfig& cfg, std::ostream& log) {
  const auto dir = prepare_out(cfg);
  std::vector<SolveOutcome> runs;
  for (int n : cfg.verify_grids) runs.push_back(run_solve(cfg, n));

  auto os = open_out(dir / "verify.csv");
  os << "n,h,iterations,converged,l2_velocity,l2_pressure,order_velocity,order_pressure\n";
  json rows = json::array();
  bool all = true;
  for (std::size_t k = 0; k < runs.size(); ++k) {
    const auto& o = runs[k];
    all = all && o.report.converged;
    std::optional<double> ou, op;
    if (k > 0) {
      const double ratio = static_cast<double>(o.n) / runs[k - 1].n;
      ou = std::log(runs[k - 1].errors.l2_velocity / o.errors.l2_velocity) / std::log(ratio);
      op = std::log(runs[k - 1].errors.l2_pressure / o.errors.l2_pressure) / std::log(ratio);
    }
    os << o.n << ',' << fmt(1.0 / o.n) << ',' << o.report.iterations << ','
       << (o.report.converged ? "true" : "false") << ',' << fmt(o.errors.l2_velocity) << ','
       << fmt(o.errors.l2_pressure) << ',' << (ou ? fmt(*ou) : "") << ','
       << (op ? fmt(*op) : "") << '\n';
    json row = {{"n", o.n},
                {"iterations", o.report.iterations},
                {"converged", o.report.converged},
                {"errors", errors_json(o.errors)}};
    row["order_velocity"] = ou ? json(*ou) : json(nullptr);
    row["order_pressure"] = op ? json(*op) : json(nullptr);
    rows.push_back(row);

    char line[200];
    std::snprintf(line, sizeof line, "N=%-5d its=%-4d eu=%.4e ep=%.4e", o.n,
                  o.report.iterations, o.errors.l2_velocity, o.errors.l2_pressure);
    log << line;
    if (ou) {
      std::snprintf(line, sizeof line, "  order_u=%.3f order_p=%.3f", *ou, *op);
      log << line;
    }
    log << '\n';
  }
  write_json(dir / "verify.json",
             {{"schema_version", kSchemaVersion}, {"config", config_json(cfg)}, {"grids", rows}});
  return all ? kExitOk : kExitNotConverged;
}

std::vector<TuneTrial> tune_trials(const RunConfig& cfg) {
  const auto& tc = cfg.tune;
  auto pick = [](const std::vector<double>& given, std::vector<double> fallback) {
    return given.empty() ? fallback : given;
  };
  std::vector<TuneTrial> trials;
  RunConfig run = cfg;
  auto evaluate = [&](TuneTrial t) {
    const auto o = run_solve(run, cfg.n);
    t.iterations = o.report.iterations;
    t.converged = o.report.converged;
    t.modeled_cost = modeled_cost(o.counters, cfg.machine);
    trials.push_back(t);
  };
  if (tc.scheme == "vanka") {
    run.pc = PcKind::MgVanka;
    for (double w : pick(tc.vanka_omega, {0.5, 0.6, 0.7, 0.8, 0.9, 1.0})) {
      run.mg.vanka.omega = w;
      TuneTrial t;
      t.vanka_omega = w;
      evaluate(t);
    }
  } else if (tc.scheme == "uzawa") {
    run.pc = PcKind::MgUzawa;
    const std::vector<int> sweeps =
        tc.jacobi_sweeps.empty() ? std::vector<int>{cfg.mg.uzawa.jacobi_sweeps} : tc.jacobi_sweeps;
    for (double tt : pick(tc.t, {1.0}))
      for (double wj : pick(tc.jacobi_omega, {0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0}))
        for (int s : sweeps) {
          run.mg.uzawa.t = tt;
          run.mg.uzawa.jacobi_omega = wj;
          run.mg.uzawa.jacobi_sweeps = s;
          TuneTrial t;
          t.t = tt;
          t.jacobi_omega = wj;
          t.jacobi_sweeps = s;
          evaluate(t);
        }
  } else {
    run.pc = PcKind::MgBs;
    const std::vector<int> sweeps =
        tc.jacobi_sweeps.empty() ? std::vector<int>{cfg.mg.bs.jacobi_sweeps} : tc.jacobi_sweeps;
    for (double tt : pick(tc.t, {0.8, 1.0, 1.2}))
      for (double w : pick(tc.omega, {0.6, 0.8, 1.0}))
        for (double wj : pick(tc.jacobi_omega, {0.6, 0.8, 1.0}))
          for (int s : sweeps) {
            run.mg.bs.t = tt;
            run.mg.bs.omega = w;
            run.mg.bs.jacobi_omega = wj;
            run.mg.bs.jacobi_sweeps = s;
            TuneTrial t;
            t.t = tt;
            t.omega = w;
            t.jacobi_omega = wj;
            t.jacobi_sweeps = s;
            evaluate(t);
          }
  }
  return trials;
}

const TuneTrial& best_trial(const std::vector<TuneTrial>& trials) {
  if (trials.empty()) throw std::invalid_argument("best_trial: no trials");
  const auto better = [](const TuneTrial& a, const TuneTrial& b) {
    if (a.converged != b.converged) return a.converged;
    if (a.iterations != b.iterations) return a.iterations < b.iterations;
    return a.modeled_cost < b.modeled_cost;
  };
  const TuneTrial* best = &trials.front();
  for (const auto& t : trials)
    if (better(t, *best)) best = &t;
  return *best;
}

int cmd_tune(const RunConfig& cfg, std::ostream& log) {
  const auto dir = prepare_out(cfg);
  const auto trials = tune_trials(cfg);
  const auto& best = best_trial(trials);
  auto os = open_out(dir / "tune.csv");
  os << "scheme,t,omega,jacobi_omega,jacobi_sweeps,vanka_omega,iterations,converged,modeled_cost\n";
  auto trial_json = [&](const TuneTrial& t) {
    return json{{"t", t.t},
                {"omega", t.omega},
                {"jacobi_omega", t.jacobi_omega},
                {"jacobi_sweeps", t.jacobi_sweeps},
                {"vanka_omega", t.vanka_omega},
                {"iterations", t.iterations},
                {"converged", t.converged},
                {"modeled_cost", t.modeled_cost}};
  };
  for (const auto& t : trials) {
    os << cfg.tune.scheme << ',' << fmt(t.t) << ',' << fmt(t.omega) << ',' << fmt(t.jacobi_omega)
       << ',' << t.jacobi_sweeps << ',' << fmt(t.vanka_omega) << ',' << t.iterations << ','
       << (t.converged ? "true" : "false") << ',' << fmt(t.modeled_cost) << '\n';
  }
  write_json(dir / "tune_best.json", {{"schema_version", kSchemaVersion},
                                      {"scheme", cfg.tune.scheme},
                                      {"n", cfg.n},
                                      {"trials", trials.size()},
                                      {"best", trial_json(best)}});
  char line[256];
  if (cfg.tune.scheme == "vanka") {
    std::snprintf(line, sizeof line, "best vanka.omega=%g iterations=%d (%zu trials)\n",
                  best.vanka_omega, best.iterations, trials.size());
  } else {
    std::snprintf(line, sizeof line,
                  "best t=%g omega=%g jacobi_omega=%g jacobi_sweeps=%d iterations=%d (%zu trials)\n",
                  best.t, best.omega, best.jacobi_omega, best.jacobi_sweeps, best.iterations,
                  trials.size());
  }
  log << line;
  return kExitOk;
}

int cmd_bench(const RunConfig& cfg, std::ostream& log) {
  const auto dir = prepare_out(cfg);
  const StructuredGrid grid(cfg.n);
  const auto ops = assemble_operators(grid, cfg.nu);
  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  BlockVector b(grid), x0(grid);
  for (std::size_t k = 0; k < b.size(); ++k) b[k] = dist(rng);
  for (std::size_t k = 0; k < x0.size(); ++k) x0[k] = dist(rng);

  json summary = json::array();
  json timing;
  OpCounter all;
  for (auto kind : {RelaxationKind::BS, RelaxationKind::Uzawa, RelaxationKind::Vanka,
                    RelaxationKind::VankaSimple}) {
    MGConfig mc = cfg.mg;
    mc.relaxation = kind;
    const auto relax = make_relaxation(ops, mc);
    OpCounter counter;
    BlockVector x = x0;
    const auto t0 = std::chrono::steady_clock::now();
    {
      CounterScope scope(counter);
      relax->smooth(b, x);
    }
    timing[to_string(kind)] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    all += counter;
    const auto rep = cost_report(counter, cfg.machine);
    const auto sub = dir / to_string(kind);
    fs::create_directories(sub);
    {
      auto os = open_out(sub / "kernels.csv");
      write_kernels_csv(os, rep);
    }
    {
      auto os = open_out(sub / "roofline.csv");
      write_roofline_csv(os, rep, cfg.machine);
    }
    summary.push_back({{"scheme", to_string(kind)}, {"cost", cost_json(rep)}});
    char line[160];
    std::snprintf(line, sizeof line, "%-13s modeled sweep time %.4e s\n", to_string(kind),
                  rep.total_time);
    log << line;
  }
  const auto all_rep = cost_report(all, cfg.machine);
  {
    auto os = open_out(dir / "kernels.csv");
    write_kernels_csv(os, all_rep);
  }
  {
    auto os = open_out(dir / "roofline.csv");
    write_roofline_csv(os, all_rep, cfg.machine);
  }

  // Closed-form counts at this N against the measured per-call counts.
  {
    auto os = open_out(dir / "theoretical.csv");
    os << "kernel,theory_reads,theory_writes,theory_flops,measured_reads,measured_writes,"
          "measured_flops,status\n";
    for (auto k : model_kernels()) {
      const auto th = theoretical_counts(k, cfg.n);
      KernelCounts me;
      if (k == model_kernel::kArrayAddSub || k == model_kernel::kArrayScale) {
        // Sweeps also touch partial vectors; probe one full-vector call.
        OpCounter probe;
        {
          CounterScope scope(probe);
          if (k == model_kernel::kArrayAddSub) (void)sub(b, x0);
          else (void)scale(0.5, b);
        }
        me = probe.get(k);
      } else if (k == model_kernel::kVankaApply) {
        me = all.get(kernel::kVankaApplyInt) + all.get(kernel::kVankaApplyExt);
        me.calls = all.get(kernel::kVankaApplyExt).calls;
      } else {
        me = all.get(k);
      }
      std::string status = "not-measured";
      if (me.calls > 0) {
        me.reads /= me.calls;
        me.writes /= me.calls;
        me.flops /= me.calls;
        const bool matvec = k == model_kernel::kMatvecQ2Q2 || k == model_kernel::kMatvecQ2ToQ1 ||
                            k == model_kernel::kMatvecQ1ToQ2;
        status = me == th ? "exact" : (matvec ? "stencil-vs-dense" : "differs");
      }
      os << k << ',' << th.reads << ',' << th.writes << ',' << th.flops << ',';
      if (me.calls > 0) os << me.reads << ',' << me.writes << ',' << me.flops;
      else os << ",,";
      os << ',' << status << '\n';
    }
  }

  const auto t2 = table2(cfg.machine, cfg.table_n);
  {
    auto os = open_out(dir / "table2.csv");
    write_table2_csv(os, t2);
  }
  int ai_ok = 0, perf_ok = 0;
  for (const auto& r : t2) {
    ai_ok += same_3sf(r.ai, r.printed_ai);
    perf_ok += same_3sf(r.perf_gflops, r.printed_perf_gflops);
  }
  char line[160];
  std::snprintf(line, sizeof line, "table2 N=%d: AI matches %d/%zu, performance matches %d/%zu\n",
                cfg.table_n, ai_ok, t2.size(), perf_ok, t2.size());
  log << line;

  write_json(dir / "bench.json", {{"schema_version", kSchemaVersion},
                                  {"config", config_json(cfg)},
                                  {"schemes", summary}});
  write_json(dir / "timing.json", timing);
  log << "wrote " << dir.string() << '\n';
  return kExitOk;
}

int run_command(const RunConfig& cfg, std::ostream& log) {
  try {
    validate(cfg);
  } catch (const ConfigError& e) {
    log << "configuration error: " << e.what() << '\n';
    return kExitConfig;
  }
  set_num_threads(cfg.threads);
  if (cfg.command == "solve") return cmd_solve(cfg, log);
  if (cfg.command == "verify") return cmd_verify(cfg, log);
  if (cfg.command == "tune") return cmd_tune(cfg, log);
  return cmd_bench(cfg, log);
}

}  // namespace stokeslab
