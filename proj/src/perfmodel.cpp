#include "stokeslab/perfmodel.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace stokeslab {

const std::vector<std::string_view>& model_kernels() {
  static const std::vector<std::string_view> k = {
      model_kernel::kArrayAddSub,  model_kernel::kArrayScale,     model_kernel::kMatvecQ2Q2,
      model_kernel::kMatvecQ2ToQ1, model_kernel::kMatvecQ1ToQ2,   model_kernel::kWeightedJacobi,
      model_kernel::kVankaFormRhs, model_kernel::kVankaApply,     model_kernel::kVankaUpdate};
  return k;
}

KernelCounts theoretical_counts(std::string_view kernel, int n_elem) {
  if (n_elem < 1) throw std::invalid_argument("theoretical_counts: N must be >= 1");
  const std::uint64_t N = static_cast<std::uint64_t>(n_elem);
  const std::uint64_t n = (2 * N + 1) * (2 * N + 1);
  const std::uint64_t m = (N + 1) * (N + 1);
  const std::uint64_t l = N - 1;
  const std::uint64_t total = 2 * n + m;
  const std::uint64_t patch = 76 + 124 * l + 51 * l * l;
  using namespace model_kernel;
  KernelCounts c;
  c.calls = 1;
  if (kernel == kArrayAddSub) {
    c.reads = 2 * total, c.writes = total, c.flops = total;
  } else if (kernel == kArrayScale) {
    c.reads = total, c.writes = total, c.flops = total;
  } else if (kernel == kMatvecQ2Q2) {
    c.reads = n * n + n, c.writes = n, c.flops = n * n;
  } else if (kernel == kMatvecQ2ToQ1) {
    c.reads = n * m + n, c.writes = m, c.flops = n * m;
  } else if (kernel == kMatvecQ1ToQ2) {
    c.reads = n * m + m, c.writes = n, c.flops = n * m;
  } else if (kernel == kWeightedJacobi) {
    c.reads = 2 * m, c.writes = m, c.flops = 2 * m;
  } else if (kernel == kVankaFormRhs) {
    c.reads = patch, c.writes = patch, c.flops = 0;
  } else if (kernel == kVankaApply) {
    c.reads = 1520 + 3968 * l + 2652 * l * l;
    c.writes = patch;
    c.flops = 2888 + 7688 * l + 5202 * l * l;
  } else if (kernel == kVankaUpdate) {
    c.reads = patch, c.writes = patch, c.flops = patch;
  } else {
    throw std::invalid_argument("theoretical_counts: unknown kernel '" + std::string(kernel) + "'");
  }
  return c;
}

void MachineModel::validate() const {
  if (!(peak_flops > 0.0)) throw std::invalid_argument("machine.peak_gflops must be > 0");
  if (!(bandwidth > 0.0)) throw std::invalid_argument("machine.bandwidth_gbs must be > 0");
}

double arithmetic_intensity(const KernelCounts& c) {
  const double bytes = kBytesPerDouble * static_cast<double>(c.reads + c.writes);
  if (bytes == 0.0) return 0.0;
  return static_cast<double>(c.flops) / bytes;
}

double modeled_time(const KernelCounts& c, const MachineModel& m) {
  const double bytes = kBytesPerDouble * static_cast<double>(c.reads + c.writes);
  return std::max(bytes / m.bandwidth, static_cast<double>(c.flops) / m.peak_flops);
}

double modeled_performance(const KernelCounts& c, const MachineModel& m) {
  const double t = modeled_time(c, m);
  if (t == 0.0 || c.flops == 0) return 0.0;
  return static_cast<double>(c.flops) / t;
}

double roofline_bound(double ai, const MachineModel& m) {
  return std::min(m.peak_flops, ai * m.bandwidth);
}

CostReport cost_report(const OpCounter& counters, const MachineModel& m) {
  m.validate();
  CostReport rep;
  for (const auto& [name, c] : counters.by_kernel()) {
    CostRow row;
    row.kernel = name;
    row.counts = c;
    row.ai = arithmetic_intensity(c);
    row.perf = modeled_performance(c, m);
    row.time = modeled_time(c, m);
    rep.total_time += row.time;
    rep.rows.push_back(std::move(row));
  }
  for (auto& row : rep.rows) row.pct = rep.total_time > 0.0 ? 100.0 * row.time / rep.total_time : 0.0;
  return rep;
}

double modeled_cost(const OpCounter& counters, const MachineModel& m) {
  double t = 0.0;
  for (const auto& [name, c] : counters.by_kernel()) t += modeled_time(c, m);
  return t;
}

std::vector<Table2Row> table2(const MachineModel& m, int n_elem) {
  struct Entry {
    const char* label;
    std::string_view kernel;
    double ai, perf;
  };
  using namespace model_kernel;
  static const Entry entries[] = {
      {"array plus/minus array", kArrayAddSub, 0.0417, 9.821},
      {"array times scalar", kArrayScale, 0.0625, 14.731},
      {"Q2 matrix * Q2 vector", kMatvecQ2Q2, 0.125, 29.462},
      {"Q2Q1 matrix * Q2 vector", kMatvecQ2ToQ1, 0.125, 29.462},
      {"Q2Q1 matrix * Q1 vector", kMatvecQ1ToQ2, 0.125, 29.462},
      {"weighted Jacobi", kWeightedJacobi, 0.0833, 16.367},
      {"Vanka form patch RHS", kVankaFormRhs, 0.0, 0.0},
      {"Vanka apply matrix inverse", kVankaApply, 0.241, 56.697},
      {"Vanka update solution", kVankaUpdate, 0.0625, 14.731},
  };
  std::vector<Table2Row> rows;
  for (const auto& e : entries) {
    const auto c = theoretical_counts(e.kernel, n_elem);
    rows.push_back({e.label, std::string(e.kernel), arithmetic_intensity(c),
                    modeled_performance(c, m) / 1e9, e.ai, e.perf});
  }
  return rows;
}

bool same_3sf(double a, double b) {
  if (a == b) return true;
  char sa[32], sb[32];
  std::snprintf(sa, sizeof sa, "%.2e", a);
  std::snprintf(sb, sizeof sb, "%.2e", b);
  return std::string(sa) == sb;
}

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

}  // namespace

void write_kernels_csv(std::ostream& os, const CostReport& report) {
  os << "kernel,reads,writes,flops,ai,modeled_perf,modeled_time,pct\n";
  for (const auto& r : report.rows) {
    os << r.kernel << ',' << r.counts.reads << ',' << r.counts.writes << ',' << r.counts.flops
       << ',' << fmt(r.ai) << ',' << fmt(r.perf) << ',' << fmt(r.time) << ',' << fmt(r.pct)
       << '\n';
  }
}

void write_roofline_csv(std::ostream& os, const CostReport& report, const MachineModel& m) {
  os << "kernel,ai,perf,bound\n";
  for (const auto& r : report.rows) {
    os << r.kernel << ',' << fmt(r.ai) << ',' << fmt(r.perf) << ','
       << fmt(roofline_bound(r.ai, m)) << '\n';
  }
}

void write_table2_csv(std::ostream& os, const std::vector<Table2Row>& rows) {
  os << "label,kernel,ai,printed_ai,ai_match,perf_gflops,printed_perf_gflops,perf_match\n";
  for (const auto& r : rows) {
    os << '"' << r.label << "\"," << r.kernel << ',' << fmt(r.ai) << ',' << fmt(r.printed_ai)
       << ',' << (same_3sf(r.ai, r.printed_ai) ? "yes" : "no") << ',' << fmt(r.perf_gflops) << ','
       << fmt(r.printed_perf_gflops) << ','
       << (same_3sf(r.perf_gflops, r.printed_perf_gflops) ? "yes" : "no") << '\n';
  }
}

}  // namespace stokeslab
