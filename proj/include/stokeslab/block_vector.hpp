#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "stokeslab/mesh.hpp"

namespace stokeslab {

/// Concatenated (u_x, u_y, p) coefficient vector. Velocity components are
/// stored in fine-lattice order, pressure in nodal order.
class BlockVector {
 public:
  BlockVector() = default;
  BlockVector(std::size_t n_vel, std::size_t n_p)
      : n_vel_(n_vel), n_p_(n_p), data_(2 * n_vel + n_p, 0.0) {}
  explicit BlockVector(const StructuredGrid& grid) : BlockVector(grid.q2_size(), grid.q1_size()) {}

  std::size_t n_vel() const { return n_vel_; }
  std::size_t n_p() const { return n_p_; }
  std::size_t size() const { return data_.size(); }

  std::span<double> ux() { return {data_.data(), n_vel_}; }
  std::span<double> uy() { return {data_.data() + n_vel_, n_vel_}; }
  std::span<double> p() { return {data_.data() + 2 * n_vel_, n_p_}; }
  std::span<const double> ux() const { return {data_.data(), n_vel_}; }
  std::span<const double> uy() const { return {data_.data() + n_vel_, n_vel_}; }
  std::span<const double> p() const { return {data_.data() + 2 * n_vel_, n_p_}; }
  /// Velocity component 0 (x) or 1 (y).
  std::span<double> u(int comp) { return comp == 0 ? ux() : uy(); }
  std::span<const double> u(int comp) const { return comp == 0 ? ux() : uy(); }

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }
  double& operator[](std::size_t k) { return data_[k]; }
  double operator[](std::size_t k) const { return data_[k]; }

  void fill(double v);
  bool same_shape(const BlockVector& o) const { return n_vel_ == o.n_vel_ && n_p_ == o.n_p_; }

 private:
  std::size_t n_vel_ = 0;
  std::size_t n_p_ = 0;
  std::vector<double> data_;
};

// Instrumented array operations. Counts follow the per-element conventions
// reads/writes/flops of the structured kernels (see perfmodel).
BlockVector add(const BlockVector& x, const BlockVector& y);
BlockVector sub(const BlockVector& x, const BlockVector& y);
BlockVector scale(double a, const BlockVector& x);
/// Returns y + a x.
BlockVector axpy(double a, const BlockVector& x, const BlockVector& y);
/// y += a x in place.
void axpy_inplace(double a, const BlockVector& x, BlockVector& y);
/// y += x in place.
void add_inplace(const BlockVector& x, BlockVector& y);
void scale_inplace(double a, BlockVector& x);
double dot(const BlockVector& x, const BlockVector& y);
double norm2(const BlockVector& x);

// Same operations on plain spans (used by scalar multigrid and pressure kernels).
void sub(std::span<const double> x, std::span<const double> y, std::span<double> out);
void add_inplace(std::span<const double> x, std::span<double> y);
void axpy_inplace(double a, std::span<const double> x, std::span<double> y);
double dot(std::span<const double> x, std::span<const double> y);

/// Subtracts the arithmetic mean of the pressure block (projection onto the
/// complement of the constant-pressure nullspace).
void remove_pressure_mean(BlockVector& x);
double mean(std::span<const double> v);

}  // namespace stokeslab
