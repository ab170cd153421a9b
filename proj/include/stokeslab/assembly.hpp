#pragma once

#include <array>
#include <cstddef>

#include "stokeslab/block_vector.hpp"
#include "stokeslab/mesh.hpp"
#include "stokeslab/stencil.hpp"

namespace stokeslab {

namespace fe {

enum class BasisKind { Q2, Q1 };

struct BasisValue {
  double value = 0.0;
  double d_xi = 0.0;
  double d_eta = 0.0;
};

/// Tensor-product Lagrange basis on [-1,1]^2. Local index idx = la + w * lb
/// (w = 3 for Q2, 2 for Q1), with la along xi.
BasisValue reference_basis(BasisKind kind, int idx, double xi, double eta);

/// Three-point Gauss-Legendre rule on [-1, 1].
inline constexpr std::array<double, 3> kGaussPoints = {-0.7745966692414834, 0.0,
                                                       0.7745966692414834};
inline constexpr std::array<double, 3> kGaussWeights = {5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0};

}  // namespace fe

/// Element matrices of a square h x h element.
///
/// stiffness(i, j) = nu * int grad psi_j . grad psi_i, one velocity component;
/// div_x/div_y(k, j) = -int phi_k d(psi_j)/dx (resp. dy);
/// mass(k, l) = int phi_k phi_l.
struct ElementMatrices {
  std::array<std::array<double, 9>, 9> stiffness{};
  std::array<std::array<double, 9>, 4> div_x{};
  std::array<std::array<double, 9>, 4> div_y{};
  std::array<std::array<double, 4>, 4> mass{};
};

ElementMatrices element_matrices(double h, double nu);

/// Assembled Stokes block operator [L B^T; B 0] on one grid, plus the
/// pressure mass matrix used by block preconditioners.
struct StokesOperators {
  StructuredGrid grid;
  double nu = 1.0;
  StencilQ2Q2 L;
  StencilQ2Q1 B;
  StencilQ1Q2 BT;
  StencilQ1Q1 M;
  BoundaryMask mask;
  bool dirichlet_applied = false;

  explicit StokesOperators(const StructuredGrid& g);

  std::size_t size() const { return 2 * grid.q2_size() + grid.q1_size(); }
  BlockVector zeros() const { return BlockVector(grid); }

  /// y = A x.
  void apply(const BlockVector& x, BlockVector& y) const;
  /// b - A x.
  BlockVector residual(const BlockVector& b, const BlockVector& x) const;
  /// Entry of A addressed by BlockVector offsets.
  double entry(std::size_t row, std::size_t col) const;
};

/// Element loops with 3x3 Gauss quadrature, no boundary conditions.
StokesOperators assemble_raw_operators(const StructuredGrid& grid, double nu);

/// Converts Dirichlet velocity rows to identity rows and zeroes Dirichlet
/// columns of L and B. When rhs is given, the eliminated columns times the
/// boundary values are moved to it and its Dirichlet rows are overwritten.
void apply_dirichlet(StokesOperators& ops, const BlockVector& boundary_values, BlockVector* rhs);

/// Raw operators with Dirichlet conditions applied.
StokesOperators assemble_operators(const StructuredGrid& grid, double nu);

/// Closed-form manufactured Stokes solution on the unit square.
struct ManufacturedSolution {
  static std::array<double, 2> velocity(double x, double y);
  static double pressure(double x, double y);
  /// f = -nu lap(u) + grad(p).
  static std::array<double, 2> forcing(double x, double y, double nu);
  static double divergence(double x, double y);
};

/// Velocity load int f . psi_i (3x3 Gauss), pressure block zero.
BlockVector assemble_load(const StructuredGrid& grid, double nu);

/// Manufactured velocity at every velocity DOF (pressure block zero).
BlockVector boundary_values(const StructuredGrid& grid);

struct StokesProblem {
  StokesOperators ops;
  BlockVector rhs;
};

/// Operators with Dirichlet conditions and the matching right-hand side.
StokesProblem make_problem(const StructuredGrid& grid, double nu);

BlockVector assemble_rhs(const StructuredGrid& grid, double nu);

/// Nodal interpolant of the manufactured (u, p).
BlockVector interpolate_exact(const StructuredGrid& grid);

struct ErrorNorms {
  double l2_velocity = 0.0;
  double l2_pressure = 0.0;
  double l2_discrete_velocity = 0.0;
  double l2_discrete_pressure = 0.0;
};

/// Errors against the manufactured solution. Quadrature L2 uses a 4x4 Gauss
/// rule per element; pressure is compared after removing the integral mean.
ErrorNorms solution_errors(const StructuredGrid& grid, const BlockVector& x);

}  // namespace stokeslab
