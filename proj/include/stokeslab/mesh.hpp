#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace stokeslab {

/// Degree-of-freedom classes on the structured Q2-Q1 mesh.
///
/// The four Q2 classes partition the (2N+1)x(2N+1) fine lattice by coordinate
/// parity: nodes at (even, even), x-edge midpoints at (odd, even), y-edge
/// midpoints at (even, odd) and cell centers at (odd, odd). Pressure DOFs live
/// on the (N+1)x(N+1) nodal lattice.
enum class DofClass : std::uint8_t { Node, XEdge, YEdge, Center, Pressure };

inline constexpr std::array<DofClass, 4> kQ2Classes = {DofClass::Node, DofClass::XEdge,
                                                       DofClass::YEdge, DofClass::Center};

const char* to_string(DofClass c);

struct DofIndex {
  DofClass cls = DofClass::Node;
  int i = 0;
  int j = 0;

  friend bool operator==(const DofIndex&, const DofIndex&) = default;
};

struct Point {
  double x = 0.0;
  double y = 0.0;
};

/// Offset into the fine lattice, relative to a row DOF.
struct LatticeOffset {
  int da = 0;
  int db = 0;
};

struct DofCounts {
  std::size_t vel_per_comp = 0;
  std::size_t vel_total = 0;
  std::size_t pressure = 0;

  friend bool operator==(const DofCounts&, const DofCounts&) = default;
};

/// Uniform N x N element mesh of the unit square.
class StructuredGrid {
 public:
  explicit StructuredGrid(int n_elem, int level = 0);

  int n_elem() const { return n_; }
  double h() const { return h_; }
  int level() const { return level_; }

  /// Points per dimension of the Q2 fine lattice, 2N+1.
  int lattice_dim() const { return 2 * n_ + 1; }
  /// Q2 DOFs per velocity component, (2N+1)^2.
  std::size_t q2_size() const { return static_cast<std::size_t>(lattice_dim()) * lattice_dim(); }
  /// Q1 (pressure) DOFs, (N+1)^2.
  std::size_t q1_size() const { return static_cast<std::size_t>(n_ + 1) * (n_ + 1); }

  /// (nx, ny) extent of the lexicographic index range of a class.
  std::array<int, 2> class_extent(DofClass c) const;
  std::size_t class_count(DofClass c) const;

  bool valid(const DofIndex& d) const;
  void check(const DofIndex& d) const;

  /// Fine-lattice coordinates (a, b) of a Q2 DOF.
  std::array<int, 2> to_lattice(const DofIndex& d) const;
  DofIndex from_lattice(int a, int b) const;
  bool lattice_valid(int a, int b) const {
    return a >= 0 && b >= 0 && a < lattice_dim() && b < lattice_dim();
  }
  std::size_t lattice_offset(int a, int b) const {
    return static_cast<std::size_t>(b) * lattice_dim() + a;
  }
  bool lattice_on_boundary(int a, int b) const {
    return a == 0 || b == 0 || a == 2 * n_ || b == 2 * n_;
  }

  /// Flat offset of a DOF inside its component vector: the fine-lattice
  /// offset for Q2 classes, the nodal offset for pressure.
  std::size_t flat_offset(const DofIndex& d) const;
  DofIndex q2_dof(std::size_t lattice_offset) const;
  DofIndex pressure_dof(std::size_t offset) const;

  /// Offset inside the contiguous per-class plane (i + j * nx).
  std::size_t class_offset(const DofIndex& d) const;
  DofIndex class_dof(DofClass c, std::size_t offset) const;

  /// Grid with half the elements per dimension, one level down.
  StructuredGrid coarsened() const;

  friend bool operator==(const StructuredGrid& a, const StructuredGrid& b) {
    return a.n_ == b.n_;
  }

 private:
  int n_;
  double h_;
  int level_;
};

DofCounts dof_counts(const StructuredGrid& grid);

Point dof_coordinates(const StructuredGrid& grid, const DofIndex& d);

/// Class of a Q2 row given its fine-lattice parity.
DofClass lattice_class(int a, int b);

/// Canonical neighbour offsets of a Q2 row: the fine-lattice points of the
/// elements sharing the DOF, lexicographic with x fastest. Widths are 25 for
/// nodes, 15 for edge midpoints and 9 for centers.
std::span<const LatticeOffset> q2_stencil(DofClass c);

/// Slot of (da, db) in the canonical stencil of class c, or -1.
int q2_stencil_slot(DofClass c, int da, int db);

/// Q2 DOFs of the element patch supporting d, truncated at the boundary, in
/// canonical stencil order.
std::vector<DofIndex> local_patch_numbering(const StructuredGrid& grid, const DofIndex& d);

/// Dirichlet flags for velocity DOFs. Pressure is never constrained.
class BoundaryMask {
 public:
  explicit BoundaryMask(const StructuredGrid& grid);

  bool dirichlet(std::size_t lattice_offset) const { return flags_[lattice_offset] != 0; }
  std::span<const std::uint8_t> flags() const { return flags_; }
  std::size_t count() const { return count_; }

 private:
  std::vector<std::uint8_t> flags_;
  std::size_t count_ = 0;
};

}  // namespace stokeslab
