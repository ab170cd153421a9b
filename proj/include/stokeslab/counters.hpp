#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>

namespace stokeslab {

/// Doubles read, doubles written and floating-point operations of a kernel.
struct KernelCounts {
  std::uint64_t reads = 0;
  std::uint64_t writes = 0;
  std::uint64_t flops = 0;
  std::uint64_t calls = 0;

  KernelCounts& operator+=(const KernelCounts& o) {
    reads += o.reads;
    writes += o.writes;
    flops += o.flops;
    calls += o.calls;
    return *this;
  }
  friend KernelCounts operator+(KernelCounts a, const KernelCounts& b) { return a += b; }
  friend bool operator==(const KernelCounts& a, const KernelCounts& b) {
    return a.reads == b.reads && a.writes == b.writes && a.flops == b.flops;
  }
};

/// Kernel labels used by the instrumented kernels.
namespace kernel {
inline constexpr std::string_view kArrayAddSub = "array_add_sub";
inline constexpr std::string_view kArrayScale = "array_scale";
inline constexpr std::string_view kAxpy = "axpy";
inline constexpr std::string_view kDot = "dot";
inline constexpr std::string_view kMatvecQ2Q2 = "matvec_q2q2";
inline constexpr std::string_view kMatvecQ2ToQ1 = "matvec_q2_to_q1";
inline constexpr std::string_view kMatvecQ1ToQ2 = "matvec_q1_to_q2";
inline constexpr std::string_view kMatvecQ1Q1 = "matvec_q1q1";
inline constexpr std::string_view kDiagScale = "diag_scale";
inline constexpr std::string_view kWeightedJacobi = "weighted_jacobi";
inline constexpr std::string_view kScalarJacobi = "scalar_jacobi";
inline constexpr std::string_view kVankaFormRhs = "vanka_form_rhs";
inline constexpr std::string_view kVankaApplyInt = "vanka_apply_int";
inline constexpr std::string_view kVankaApplyExt = "vanka_apply_ext";
inline constexpr std::string_view kVankaUpdate = "vanka_update";
inline constexpr std::string_view kGridTransfer = "grid_transfer";
inline constexpr std::string_view kCoarseSolve = "coarse_solve";
}  // namespace kernel

/// Per-kernel tallies. Additive and deterministic: kernels record counts
/// derived from problem sizes, never from timing.
class OpCounter {
 public:
  void add(std::string_view label, const KernelCounts& c);
  KernelCounts get(std::string_view label) const;
  KernelCounts total() const;
  const std::map<std::string, KernelCounts, std::less<>>& by_kernel() const { return by_kernel_; }
  void clear() { by_kernel_.clear(); }
  bool empty() const { return by_kernel_.empty(); }

  OpCounter& operator+=(const OpCounter& o);

 private:
  std::map<std::string, KernelCounts, std::less<>> by_kernel_;
};

/// Installs a counter as the active sink for the current thread.
class CounterScope {
 public:
  explicit CounterScope(OpCounter& counter);
  ~CounterScope();
  CounterScope(const CounterScope&) = delete;
  CounterScope& operator=(const CounterScope&) = delete;

 private:
  OpCounter* previous_;
};

OpCounter* active_counter();

/// Adds one call with the given counts to the active counter, if any.
void record(std::string_view label, std::uint64_t reads, std::uint64_t writes,
            std::uint64_t flops);

}  // namespace stokeslab
