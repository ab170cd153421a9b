#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

#include "stokeslab/mesh.hpp"

namespace stokeslab {

using EntryVisitor = std::function<void(std::size_t row, std::size_t col, double value)>;

/// Scalar Q2 -> Q2 operator stored per row as a fixed-order neighbour array.
///
/// Rows are grouped by DOF class into contiguous planes; slot k of a row
/// multiplies the k-th offset of q2_stencil(class). Neighbours outside the
/// lattice hold exact zeros.
class StencilQ2Q2 {
 public:
  explicit StencilQ2Q2(const StructuredGrid& grid);
  static StencilQ2Q2 identity(const StructuredGrid& grid);

  const StructuredGrid& grid() const { return grid_; }
  static constexpr int width(DofClass c) {
    return c == DofClass::Node ? 25 : (c == DofClass::Center ? 9 : 15);
  }

  /// Coefficient array of the row at fine-lattice point (a, b).
  std::span<double> row(int a, int b);
  std::span<const double> row(int a, int b) const;
  /// Coefficient of column (c, d) in row (a, b); zero outside the stencil.
  double entry(int a, int b, int c, int d) const;
  double& entry_ref(int a, int b, int c, int d);

  /// y = A x for one velocity component (fine-lattice ordered vectors).
  void apply(std::span<const double> x, std::span<double> y) const;

  std::vector<double> diagonal() const;
  std::size_t stored_entries() const;
  std::span<const double> plane(DofClass c) const { return planes_[index(c)]; }

  /// Visits every in-lattice stencil slot (including explicit zeros).
  void for_each_entry(const EntryVisitor& fn) const;

 private:
  static int index(DofClass c) { return static_cast<int>(c); }
  std::size_t row_offset(int a, int b, DofClass& cls) const;

  StructuredGrid grid_;
  std::array<std::vector<double>, 4> planes_;
};

/// Discrete divergence B: per pressure row, 25 coefficients against each
/// velocity component over the surrounding 2x2 element patch, in the node
/// stencil order.
class StencilQ2Q1 {
 public:
  static constexpr int kWidth = 25;

  explicit StencilQ2Q1(const StructuredGrid& grid);

  const StructuredGrid& grid() const { return grid_; }
  std::span<double> row(int comp, std::size_t p_row);
  std::span<const double> row(int comp, std::size_t p_row) const;
  double entry(int comp, std::size_t p_row, int a, int b) const;
  double& entry_ref(int comp, std::size_t p_row, int a, int b);

  /// out = B (ux, uy).
  void apply(std::span<const double> ux, std::span<const double> uy, std::span<double> out) const;
  std::size_t stored_entries() const { return 2 * coef_[0].size(); }

  /// Visits entries; col is the velocity block offset comp * n + lattice.
  void for_each_entry(const EntryVisitor& fn) const;

 private:
  StructuredGrid grid_;
  std::array<std::vector<double>, 2> coef_;
};

/// Discrete gradient B^T: per Q2 row, coefficients against the pressure nodes
/// whose element patch contains the row (widths 9/6/6/4 for node/x/y/center).
class StencilQ1Q2 {
 public:
  explicit StencilQ1Q2(const StructuredGrid& grid);

  const StructuredGrid& grid() const { return grid_; }
  static constexpr int width(DofClass c) {
    return c == DofClass::Node ? 9 : (c == DofClass::Center ? 4 : 6);
  }
  /// Lowest pressure index coupled to fine-lattice coordinate a.
  static int pressure_base(int a) { return (a % 2 == 0) ? a / 2 - 1 : (a - 1) / 2; }
  static int pressure_span(int a) { return (a % 2 == 0) ? 3 : 2; }

  std::span<double> row(int comp, int a, int b);
  std::span<const double> row(int comp, int a, int b) const;
  double entry(int comp, int a, int b, int pi, int pj) const;
  double& entry_ref(int comp, int a, int b, int pi, int pj);

  /// (out_x, out_y) = B^T p.
  void apply(std::span<const double> p, std::span<double> out_x, std::span<double> out_y) const;
  std::size_t stored_entries() const;

  /// Visits entries; row is the velocity block offset comp * n + lattice.
  void for_each_entry(const EntryVisitor& fn) const;

 private:
  std::size_t row_offset(int a, int b, DofClass& cls) const;

  StructuredGrid grid_;
  // [comp][class]
  std::array<std::array<std::vector<double>, 4>, 2> planes_;
};

/// Q1 -> Q1 operator (pressure mass matrix): 3x3 nodal neighbours per row.
class StencilQ1Q1 {
 public:
  static constexpr int kWidth = 9;

  explicit StencilQ1Q1(const StructuredGrid& grid);

  const StructuredGrid& grid() const { return grid_; }
  std::span<double> row(std::size_t r) { return {coef_.data() + r * kWidth, kWidth}; }
  std::span<const double> row(std::size_t r) const { return {coef_.data() + r * kWidth, kWidth}; }
  double entry(int i, int j, int ci, int cj) const;
  double& entry_ref(int i, int j, int ci, int cj);

  void apply(std::span<const double> x, std::span<double> y) const;
  std::vector<double> diagonal() const;
  std::size_t stored_entries() const { return coef_.size(); }
  void scale(double a);

  void for_each_entry(const EntryVisitor& fn) const;

 private:
  StructuredGrid grid_;
  std::vector<double> coef_;
};

/// B^T as a mirror copy of B.
StencilQ1Q2 transpose(const StencilQ2Q1& b);
StencilQ2Q1 transpose(const StencilQ1Q2& bt);

/// Matrix Market coordinate export (1-based, 17 significant digits). Only
/// nonzero entries are written.
void write_matrix_market(std::ostream& os, std::size_t rows, std::size_t cols,
                         const std::function<void(const EntryVisitor&)>& entries);

}  // namespace stokeslab
