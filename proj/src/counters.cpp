#include "stokeslab/counters.hpp"

namespace stokeslab {

namespace {
thread_local OpCounter* t_active = nullptr;
}

void OpCounter::add(std::string_view label, const KernelCounts& c) {
  auto it = by_kernel_.find(label);
  if (it == by_kernel_.end()) {
    by_kernel_.emplace(std::string(label), c);
  } else {
    it->second += c;
  }
}

KernelCounts OpCounter::get(std::string_view label) const {
  auto it = by_kernel_.find(label);
  return it == by_kernel_.end() ? KernelCounts{} : it->second;
}

KernelCounts OpCounter::total() const {
  KernelCounts t;
  for (const auto& [_, c] : by_kernel_) t += c;
  return t;
}

OpCounter& OpCounter::operator+=(const OpCounter& o) {
  for (const auto& [k, c] : o.by_kernel_) add(k, c);
  return *this;
}

CounterScope::CounterScope(OpCounter& counter) : previous_(t_active) { t_active = &counter; }

CounterScope::~CounterScope() { t_active = previous_; }

OpCounter* active_counter() { return t_active; }

void record(std::string_view label, std::uint64_t reads, std::uint64_t writes,
            std::uint64_t flops) {
  if (t_active != nullptr) {
    t_active->add(label, KernelCounts{reads, writes, flops, 1});
  }
}

}  // namespace stokeslab
