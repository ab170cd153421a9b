#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "stokeslab/counters.hpp"

namespace stokeslab {

/// Kernels with closed-form counts. Names match the counter labels where
/// a measured counterpart exists; vanka_apply is interior plus exterior.
namespace model_kernel {
inline constexpr std::string_view kArrayAddSub = "array_add_sub";
inline constexpr std::string_view kArrayScale = "array_scale";
inline constexpr std::string_view kMatvecQ2Q2 = "matvec_q2q2";
inline constexpr std::string_view kMatvecQ2ToQ1 = "matvec_q2_to_q1";
inline constexpr std::string_view kMatvecQ1ToQ2 = "matvec_q1_to_q2";
inline constexpr std::string_view kWeightedJacobi = "weighted_jacobi";
inline constexpr std::string_view kVankaFormRhs = "vanka_form_rhs";
inline constexpr std::string_view kVankaApply = "vanka_apply";
inline constexpr std::string_view kVankaUpdate = "vanka_update";
}  // namespace model_kernel

const std::vector<std::string_view>& model_kernels();

/// Closed-form reads/writes/flops for an N x N element grid with
/// n = (2N+1)^2 per velocity component, m = (N+1)^2, l = N-1.
/// Throws std::invalid_argument for an unknown kernel or N < 1.
KernelCounts theoretical_counts(std::string_view kernel, int n_elem);

struct MachineModel {
  double peak_flops = 9472.34e9;  // flop/s
  double bandwidth = 1264.42e9;   // byte/s

  void validate() const;
};

inline constexpr double kBytesPerDouble = 8.0;

/// flops per byte moved; 0 for kernels without memory traffic or flops.
double arithmetic_intensity(const KernelCounts& c);
double modeled_time(const KernelCounts& c, const MachineModel& m);
/// flops / max(bytes / bandwidth, flops / peak); 0 for flop-free kernels.
double modeled_performance(const KernelCounts& c, const MachineModel& m);
/// min(peak, AI * bandwidth).
double roofline_bound(double ai, const MachineModel& m);

struct CostRow {
  std::string kernel;
  KernelCounts counts;
  double ai = 0.0;
  double perf = 0.0;
  double time = 0.0;
  double pct = 0.0;
};

struct CostReport {
  std::vector<CostRow> rows;  // sorted by kernel name
  double total_time = 0.0;
};

CostReport cost_report(const OpCounter& counters, const MachineModel& m);
/// Sum of modeled kernel times in seconds.
double modeled_cost(const OpCounter& counters, const MachineModel& m);

struct Table2Row {
  std::string label;
  std::string kernel;
  double ai = 0.0;
  double perf_gflops = 0.0;
  double printed_ai = 0.0;
  double printed_perf_gflops = 0.0;
};

/// Model values for the published kernel table (N = 512 by default)
/// next to the published figures.
std::vector<Table2Row> table2(const MachineModel& m, int n_elem = 512);

/// Relative agreement to three significant figures.
bool same_3sf(double a, double b);

void write_kernels_csv(std::ostream& os, const CostReport& report);
void write_roofline_csv(std::ostream& os, const CostReport& report, const MachineModel& m);
void write_table2_csv(std::ostream& os, const std::vector<Table2Row>& rows);

}  // namespace stokeslab
