#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "stokeslab/assembly.hpp"
#include "stokeslab/block_tri.hpp"
#include "stokeslab/counters.hpp"
#include "stokeslab/krylov.hpp"
#include "stokeslab/mg.hpp"
#include "stokeslab/perfmodel.hpp"

namespace stokeslab {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class PcKind { MgBs, MgVanka, MgVankaSimple, MgUzawa, BlockTri, None };

const char* to_string(PcKind k);
PcKind parse_pc(const std::string& s);

struct TuneConfig {
  std::string scheme = "bs";  // bs | uzawa | vanka
  // Empty lists fall back to per-scheme defaults.
  std::vector<double> t;
  std::vector<double> omega;
  std::vector<double> jacobi_omega;
  std::vector<int> jacobi_sweeps;
  std::vector<double> vanka_omega;
};

struct RunConfig {
  std::string command = "solve";
  int n = 16;
  PcKind pc = PcKind::MgBs;
  double nu = 1.0;
  FgmresConfig solver;
  MGConfig mg;
  BlockTriConfig bt;
  MachineModel machine;
  int threads = 1;
  std::uint64_t seed = 42;
  std::string out_dir;
  std::vector<int> verify_grids = {16, 32, 64};
  TuneConfig tune;
  int table_n = 512;
};

/// Applies one dotted key=value setting. Throws ConfigError.
void apply_setting(RunConfig& cfg, const std::string& key, const std::string& value);
/// Parses "key=value" (used by --set).
void apply_assignment(RunConfig& cfg, const std::string& assignment);
/// key=value lines, '#' starts a comment.
void load_config_file(RunConfig& cfg, const std::filesystem::path& path);
/// Throws ConfigError.
void validate(const RunConfig& cfg);

/// Explicit out_dir, else $STOKESLAB_OUT, else ./stokeslab-out.
std::filesystem::path resolve_out_dir(const RunConfig& cfg);

struct SolveOutcome {
  int n = 0;
  SolveReport report;
  bool diverged = false;
  std::string failure;
  ErrorNorms errors;
  OpCounter counters;
  /// Modeled seconds spent up to each history entry.
  std::vector<double> cumulative_cost;
  double setup_seconds = 0.0;
};

/// Assembles the manufactured-solution problem on an n x n grid, builds
/// the configured preconditioner and runs FGMRES from zero.
SolveOutcome run_solve(const RunConfig& cfg, int n);

/// Exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 1;
inline constexpr int kExitNotConverged = 2;

int cmd_solve(const RunConfig& cfg, std::ostream& log);
int cmd_verify(const RunConfig& cfg, std::ostream& log);
int cmd_tune(const RunConfig& cfg, std::ostream& log);
int cmd_bench(const RunConfig& cfg, std::ostream& log);
/// Dispatches on cfg.command after validation; ConfigError maps to 1.
int run_command(const RunConfig& cfg, std::ostream& log);

struct TuneTrial {
  double t = 1.0;
  double omega = 1.0;
  double jacobi_omega = 0.0;
  int jacobi_sweeps = 0;
  double vanka_omega = 0.0;
  int iterations = 0;
  bool converged = false;
  double modeled_cost = 0.0;
};

/// All trials of the parameter grid in enumeration order.
std::vector<TuneTrial> tune_trials(const RunConfig& cfg);
/// Converged before not, then fewer iterations, then lower modeled cost.
const TuneTrial& best_trial(const std::vector<TuneTrial>& trials);

}  // namespace stokeslab
