#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "stokeslab/block_vector.hpp"
#include "stokeslab/mesh.hpp"

namespace stokeslab {

/// Weights of the three coarse Q2 points of an element at fine local
/// position 0..4 (fine spacing h/2 of a coarse element of width 2h).
inline constexpr std::array<std::array<double, 3>, 5> kQ2Prolong1D = {{
    {1.0, 0.0, 0.0},
    {0.375, 0.75, -0.125},
    {0.0, 1.0, 0.0},
    {-0.125, 0.75, 0.375},
    {0.0, 0.0, 1.0},
}};

/// Canonical prolongation between a coarse grid and its refinement:
/// tensor-product Q2 interpolation for velocity components, bilinear for
/// pressure. Restriction is the transpose.
///
/// With mask_dirichlet, coarse Dirichlet inputs are ignored and fine
/// Dirichlet outputs are zero (velocity only), so the transfer commutes with
/// homogeneous boundary corrections.
class Interpolation {
 public:
  explicit Interpolation(const StructuredGrid& coarse, bool mask_dirichlet = true);

  const StructuredGrid& coarse() const { return coarse_; }
  const StructuredGrid& fine() const { return fine_; }
  bool masked() const { return masked_; }

  void prolong_q2(std::span<const double> coarse, std::span<double> fine) const;
  void restrict_q2(std::span<const double> fine, std::span<double> coarse) const;
  void prolong_q1(std::span<const double> coarse, std::span<double> fine) const;
  void restrict_q1(std::span<const double> fine, std::span<double> coarse) const;

  BlockVector prolong(const BlockVector& coarse) const;
  BlockVector restrict(const BlockVector& fine) const;

  /// Nonzero (coarse column, weight) pairs of the Q2 prolongation row at
  /// fine lattice point (a, b), ignoring the mask.
  std::vector<std::pair<std::size_t, double>> q2_row(int a, int b) const;

  std::size_t q2_nonzeros() const { return nnz_q2_; }
  std::size_t q1_nonzeros() const { return nnz_q1_; }

 private:
  struct Row1D {
    int first = 0;  // first coarse index
    std::array<double, 3> w{};
    int count = 0;
  };

  StructuredGrid coarse_;
  StructuredGrid fine_;
  bool masked_;
  std::vector<Row1D> q2_rows_;  // per fine lattice coordinate
  std::vector<Row1D> q1_rows_;  // per fine pressure coordinate
  std::size_t nnz_q2_ = 0;
  std::size_t nnz_q1_ = 0;
};

}  // namespace stokeslab
