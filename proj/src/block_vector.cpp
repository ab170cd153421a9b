#include "stokeslab/block_vector.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "stokeslab/counters.hpp"

namespace stokeslab {

namespace {

void require_same(const BlockVector& x, const BlockVector& y, const char* op) {
  if (!x.same_shape(y)) {
    throw std::invalid_argument(std::string(op) + ": block vector length mismatch (" +
                                std::to_string(x.size()) + " vs " + std::to_string(y.size()) +
                                ")");
  }
}

void require_len(std::size_t a, std::size_t b, const char* op) {
  if (a != b) {
    throw std::invalid_argument(std::string(op) + ": length mismatch (" + std::to_string(a) +
                                " vs " + std::to_string(b) + ")");
  }
}

}  // namespace

void BlockVector::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

BlockVector add(const BlockVector& x, const BlockVector& y) {
  require_same(x, y, "add");
  BlockVector out(x.n_vel(), x.n_p());
  const std::size_t n = x.size();
  for (std::size_t k = 0; k < n; ++k) out[k] = x[k] + y[k];
  record(kernel::kArrayAddSub, 2 * n, n, n);
  return out;
}

BlockVector sub(const BlockVector& x, const BlockVector& y) {
  require_same(x, y, "sub");
  BlockVector out(x.n_vel(), x.n_p());
  const std::size_t n = x.size();
  for (std::size_t k = 0; k < n; ++k) out[k] = x[k] - y[k];
  record(kernel::kArrayAddSub, 2 * n, n, n);
  return out;
}

BlockVector scale(double a, const BlockVector& x) {
  BlockVector out(x.n_vel(), x.n_p());
  const std::size_t n = x.size();
  for (std::size_t k = 0; k < n; ++k) out[k] = a * x[k];
  record(kernel::kArrayScale, n, n, n);
  return out;
}

BlockVector axpy(double a, const BlockVector& x, const BlockVector& y) {
  BlockVector out = y;
  axpy_inplace(a, x, out);
  return out;
}

void axpy_inplace(double a, const BlockVector& x, BlockVector& y) {
  require_same(x, y, "axpy");
  axpy_inplace(a, x.data(), y.data());
}

void add_inplace(const BlockVector& x, BlockVector& y) {
  require_same(x, y, "add_inplace");
  add_inplace(x.data(), y.data());
}

void scale_inplace(double a, BlockVector& x) {
  const std::size_t n = x.size();
  for (std::size_t k = 0; k < n; ++k) x[k] *= a;
  record(kernel::kArrayScale, n, n, n);
}

double dot(const BlockVector& x, const BlockVector& y) {
  require_same(x, y, "dot");
  return dot(x.data(), y.data());
}

double norm2(const BlockVector& x) {
  double s = 0.0;
  for (double v : x.data()) s += v * v;
  record(kernel::kDot, x.size(), 0, 2 * x.size());
  return std::sqrt(s);
}

void sub(std::span<const double> x, std::span<const double> y, std::span<double> out) {
  require_len(x.size(), y.size(), "sub");
  require_len(x.size(), out.size(), "sub");
  const std::size_t n = x.size();
  for (std::size_t k = 0; k < n; ++k) out[k] = x[k] - y[k];
  record(kernel::kArrayAddSub, 2 * n, n, n);
}

void add_inplace(std::span<const double> x, std::span<double> y) {
  require_len(x.size(), y.size(), "add_inplace");
  const std::size_t n = x.size();
  for (std::size_t k = 0; k < n; ++k) y[k] += x[k];
  record(kernel::kArrayAddSub, 2 * n, n, n);
}

void axpy_inplace(double a, std::span<const double> x, std::span<double> y) {
  require_len(x.size(), y.size(), "axpy");
  const std::size_t n = x.size();
  for (std::size_t k = 0; k < n; ++k) y[k] += a * x[k];
  record(kernel::kAxpy, 2 * n, n, 2 * n);
}

double dot(std::span<const double> x, std::span<const double> y) {
  require_len(x.size(), y.size(), "dot");
  double s = 0.0;
  const std::size_t n = x.size();
  for (std::size_t k = 0; k < n; ++k) s += x[k] * y[k];
  record(kernel::kDot, 2 * n, 0, 2 * n);
  return s;
}

double mean(std::span<const double> v) {
  if (v.empty()) return 0.0;
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

void remove_pressure_mean(BlockVector& x) {
  auto p = x.p();
  const double m = mean(p);
  for (double& v : p) v -= m;
  record(kernel::kArrayAddSub, 2 * p.size(), p.size(), 2 * p.size());
}

}  // namespace stokeslab
