#include "stokeslab/mesh.hpp"

#include <sstream>

namespace stokeslab {

namespace {

template <int WX, int WY>
constexpr std::array<LatticeOffset, WX * WY> make_stencil() {
  std::array<LatticeOffset, WX * WY> s{};
  int k = 0;
  for (int db = -(WY / 2); db <= WY / 2; ++db) {
    for (int da = -(WX / 2); da <= WX / 2; ++da) {
      s[k++] = LatticeOffset{da, db};
    }
  }
  return s;
}

constexpr auto kNodeStencil = make_stencil<5, 5>();
constexpr auto kXEdgeStencil = make_stencil<3, 5>();
constexpr auto kYEdgeStencil = make_stencil<5, 3>();
constexpr auto kCenterStencil = make_stencil<3, 3>();

}  // namespace

const char* to_string(DofClass c) {
  switch (c) {
    case DofClass::Node: return "node";
    case DofClass::XEdge: return "x-edge";
    case DofClass::YEdge: return "y-edge";
    case DofClass::Center: return "center";
    case DofClass::Pressure: return "pressure";
  }
  return "?";
}

StructuredGrid::StructuredGrid(int n_elem, int level) : n_(n_elem), h_(0.0), level_(level) {
  if (n_elem < 1) {
    throw std::invalid_argument("StructuredGrid: n_elem must be >= 1, got " +
                                std::to_string(n_elem));
  }
  h_ = 1.0 / static_cast<double>(n_elem);
}

std::array<int, 2> StructuredGrid::class_extent(DofClass c) const {
  switch (c) {
    case DofClass::Node:
    case DofClass::Pressure: return {n_ + 1, n_ + 1};
    case DofClass::XEdge: return {n_, n_ + 1};
    case DofClass::YEdge: return {n_ + 1, n_};
    case DofClass::Center: return {n_, n_};
  }
  return {0, 0};
}

std::size_t StructuredGrid::class_count(DofClass c) const {
  const auto e = class_extent(c);
  return static_cast<std::size_t>(e[0]) * static_cast<std::size_t>(e[1]);
}

bool StructuredGrid::valid(const DofIndex& d) const {
  const auto e = class_extent(d.cls);
  return d.i >= 0 && d.j >= 0 && d.i < e[0] && d.j < e[1];
}

void StructuredGrid::check(const DofIndex& d) const {
  if (!valid(d)) {
    std::ostringstream os;
    os << "DOF index out of range: " << to_string(d.cls) << " (" << d.i << ", " << d.j
       << ") on N=" << n_;
    throw std::out_of_range(os.str());
  }
}

std::array<int, 2> StructuredGrid::to_lattice(const DofIndex& d) const {
  check(d);
  switch (d.cls) {
    case DofClass::Node: return {2 * d.i, 2 * d.j};
    case DofClass::XEdge: return {2 * d.i + 1, 2 * d.j};
    case DofClass::YEdge: return {2 * d.i, 2 * d.j + 1};
    case DofClass::Center: return {2 * d.i + 1, 2 * d.j + 1};
    case DofClass::Pressure: break;
  }
  throw std::invalid_argument("to_lattice: pressure DOFs are not on the Q2 lattice");
}

DofClass lattice_class(int a, int b) {
  const bool ao = (a & 1) != 0;
  const bool bo = (b & 1) != 0;
  if (!ao && !bo) return DofClass::Node;
  if (ao && !bo) return DofClass::XEdge;
  if (!ao && bo) return DofClass::YEdge;
  return DofClass::Center;
}

DofIndex StructuredGrid::from_lattice(int a, int b) const {
  if (!lattice_valid(a, b)) {
    throw std::out_of_range("from_lattice: (" + std::to_string(a) + ", " + std::to_string(b) +
                            ") outside the fine lattice");
  }
  return DofIndex{lattice_class(a, b), a / 2, b / 2};
}

std::size_t StructuredGrid::flat_offset(const DofIndex& d) const {
  check(d);
  if (d.cls == DofClass::Pressure) {
    return static_cast<std::size_t>(d.j) * (n_ + 1) + d.i;
  }
  const auto ab = to_lattice(d);
  return lattice_offset(ab[0], ab[1]);
}

DofIndex StructuredGrid::q2_dof(std::size_t offset) const {
  if (offset >= q2_size()) throw std::out_of_range("q2_dof: offset out of range");
  const int a = static_cast<int>(offset % lattice_dim());
  const int b = static_cast<int>(offset / lattice_dim());
  return from_lattice(a, b);
}

DofIndex StructuredGrid::pressure_dof(std::size_t offset) const {
  if (offset >= q1_size()) throw std::out_of_range("pressure_dof: offset out of range");
  return DofIndex{DofClass::Pressure, static_cast<int>(offset % (n_ + 1)),
                  static_cast<int>(offset / (n_ + 1))};
}

std::size_t StructuredGrid::class_offset(const DofIndex& d) const {
  check(d);
  const auto e = class_extent(d.cls);
  return static_cast<std::size_t>(d.j) * e[0] + d.i;
}

DofIndex StructuredGrid::class_dof(DofClass c, std::size_t offset) const {
  if (offset >= class_count(c)) throw std::out_of_range("class_dof: offset out of range");
  const auto e = class_extent(c);
  return DofIndex{c, static_cast<int>(offset % e[0]), static_cast<int>(offset / e[0])};
}

StructuredGrid StructuredGrid::coarsened() const {
  if (n_ % 2 != 0 || n_ < 2) {
    throw std::invalid_argument("cannot coarsen a grid with N=" + std::to_string(n_));
  }
  return StructuredGrid(n_ / 2, level_ - 1);
}

DofCounts dof_counts(const StructuredGrid& grid) {
  const std::size_t per = grid.q2_size();
  return DofCounts{per, 2 * per, grid.q1_size()};
}

Point dof_coordinates(const StructuredGrid& grid, const DofIndex& d) {
  grid.check(d);
  const double h = grid.h();
  switch (d.cls) {
    case DofClass::Node:
    case DofClass::Pressure: return {d.i * h, d.j * h};
    case DofClass::XEdge: return {(d.i + 0.5) * h, d.j * h};
    case DofClass::YEdge: return {d.i * h, (d.j + 0.5) * h};
    case DofClass::Center: return {(d.i + 0.5) * h, (d.j + 0.5) * h};
  }
  return {};
}

std::span<const LatticeOffset> q2_stencil(DofClass c) {
  switch (c) {
    case DofClass::Node: return kNodeStencil;
    case DofClass::XEdge: return kXEdgeStencil;
    case DofClass::YEdge: return kYEdgeStencil;
    case DofClass::Center: return kCenterStencil;
    case DofClass::Pressure: break;
  }
  throw std::invalid_argument("q2_stencil: pressure has no Q2 stencil");
}

int q2_stencil_slot(DofClass c, int da, int db) {
  int wx = 0;
  int wy = 0;
  switch (c) {
    case DofClass::Node: wx = 5; wy = 5; break;
    case DofClass::XEdge: wx = 3; wy = 5; break;
    case DofClass::YEdge: wx = 5; wy = 3; break;
    case DofClass::Center: wx = 3; wy = 3; break;
    case DofClass::Pressure: return -1;
  }
  const int hx = wx / 2;
  const int hy = wy / 2;
  if (da < -hx || da > hx || db < -hy || db > hy) return -1;
  return (db + hy) * wx + (da + hx);
}

std::vector<DofIndex> local_patch_numbering(const StructuredGrid& grid, const DofIndex& d) {
  if (d.cls == DofClass::Pressure) {
    throw std::invalid_argument("local_patch_numbering: expects a Q2 DOF");
  }
  const auto ab = grid.to_lattice(d);
  std::vector<DofIndex> out;
  for (const auto& o : q2_stencil(d.cls)) {
    const int a = ab[0] + o.da;
    const int b = ab[1] + o.db;
    if (grid.lattice_valid(a, b)) out.push_back(grid.from_lattice(a, b));
  }
  return out;
}

BoundaryMask::BoundaryMask(const StructuredGrid& grid) : flags_(grid.q2_size(), 0) {
  const int dim = grid.lattice_dim();
  for (int b = 0; b < dim; ++b) {
    for (int a = 0; a < dim; ++a) {
      if (grid.lattice_on_boundary(a, b)) {
        flags_[grid.lattice_offset(a, b)] = 1;
        ++count_;
      }
    }
  }
}

}  // namespace stokeslab
