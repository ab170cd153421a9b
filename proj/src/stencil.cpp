#include "stokeslab/stencil.hpp"

#include <iomanip>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "stokeslab/counters.hpp"
#include "stokeslab/parallel.hpp"

namespace stokeslab {

namespace {

void require_len(std::size_t got, std::size_t want, const char* op) {
  if (got != want) {
    throw std::invalid_argument(std::string(op) + ": vector length " + std::to_string(got) +
                                " does not match operator size " + std::to_string(want));
  }
}

std::array<int, 2> lattice_of(DofClass c, int i, int j) {
  switch (c) {
    case DofClass::Node: return {2 * i, 2 * j};
    case DofClass::XEdge: return {2 * i + 1, 2 * j};
    case DofClass::YEdge: return {2 * i, 2 * j + 1};
    case DofClass::Center: return {2 * i + 1, 2 * j + 1};
    case DofClass::Pressure: break;
  }
  return {0, 0};
}

}  // namespace

// ---------------------------------------------------------------- Q2 -> Q2

StencilQ2Q2::StencilQ2Q2(const StructuredGrid& grid) : grid_(grid) {
  for (DofClass c : kQ2Classes) {
    planes_[index(c)].assign(grid.class_count(c) * width(c), 0.0);
  }
}

StencilQ2Q2 StencilQ2Q2::identity(const StructuredGrid& grid) {
  StencilQ2Q2 s(grid);
  for (DofClass c : kQ2Classes) {
    const int slot = q2_stencil_slot(c, 0, 0);
    auto& plane = s.planes_[index(c)];
    for (std::size_t r = 0; r < grid.class_count(c); ++r) plane[r * width(c) + slot] = 1.0;
  }
  return s;
}

std::size_t StencilQ2Q2::row_offset(int a, int b, DofClass& cls) const {
  if (!grid_.lattice_valid(a, b)) {
    throw std::out_of_range("StencilQ2Q2: row outside the fine lattice");
  }
  cls = lattice_class(a, b);
  const auto e = grid_.class_extent(cls);
  return (static_cast<std::size_t>(b / 2) * e[0] + a / 2) * width(cls);
}

std::span<double> StencilQ2Q2::row(int a, int b) {
  DofClass c{};
  const std::size_t off = row_offset(a, b, c);
  return {planes_[index(c)].data() + off, static_cast<std::size_t>(width(c))};
}

std::span<const double> StencilQ2Q2::row(int a, int b) const {
  DofClass c{};
  const std::size_t off = row_offset(a, b, c);
  return {planes_[index(c)].data() + off, static_cast<std::size_t>(width(c))};
}

double StencilQ2Q2::entry(int a, int b, int c, int d) const {
  const int slot = q2_stencil_slot(lattice_class(a, b), c - a, d - b);
  if (slot < 0 || !grid_.lattice_valid(c, d)) return 0.0;
  return row(a, b)[slot];
}

double& StencilQ2Q2::entry_ref(int a, int b, int c, int d) {
  const int slot = q2_stencil_slot(lattice_class(a, b), c - a, d - b);
  if (slot < 0 || !grid_.lattice_valid(c, d)) {
    throw std::out_of_range("StencilQ2Q2: column outside the row stencil");
  }
  return row(a, b)[slot];
}

void StencilQ2Q2::apply(std::span<const double> x, std::span<double> y) const {
  require_len(x.size(), grid_.q2_size(), "matvec_q2q2");
  require_len(y.size(), grid_.q2_size(), "matvec_q2q2");
  const int dim = grid_.lattice_dim();
  for (DofClass c : kQ2Classes) {
    const auto stencil = q2_stencil(c);
    const int w = width(c);
    const auto e = grid_.class_extent(c);
    const auto& plane = planes_[index(c)];
    std::vector<std::ptrdiff_t> lin(stencil.size());
    for (std::size_t k = 0; k < stencil.size(); ++k) {
      lin[k] = static_cast<std::ptrdiff_t>(stencil[k].db) * dim + stencil[k].da;
    }
    const int hx = (c == DofClass::Node || c == DofClass::YEdge) ? 2 : 1;
    const int hy = (c == DofClass::Node || c == DofClass::XEdge) ? 2 : 1;
    parallel_for(grid_.class_count(c), [&](std::size_t begin, std::size_t end) {
      for (std::size_t r = begin; r < end; ++r) {
        const int i = static_cast<int>(r % e[0]);
        const int j = static_cast<int>(r / e[0]);
        const auto ab = lattice_of(c, i, j);
        const double* coef = plane.data() + r * w;
        const std::size_t center = grid_.lattice_offset(ab[0], ab[1]);
        double s = 0.0;
        if (ab[0] >= hx && ab[1] >= hy && ab[0] + hx < dim && ab[1] + hy < dim) {
          for (int k = 0; k < w; ++k) s += coef[k] * x[center + lin[k]];
        } else {
          for (int k = 0; k < w; ++k) {
            const int ca = ab[0] + stencil[k].da;
            const int cb = ab[1] + stencil[k].db;
            if (grid_.lattice_valid(ca, cb)) s += coef[k] * x[center + lin[k]];
          }
        }
        y[center] = s;
      }
    });
  }
  const std::size_t nnz = stored_entries();
  record(kernel::kMatvecQ2Q2, nnz + x.size(), y.size(), nnz);
}

std::vector<double> StencilQ2Q2::diagonal() const {
  std::vector<double> d(grid_.q2_size());
  const int dim = grid_.lattice_dim();
  for (int b = 0; b < dim; ++b) {
    for (int a = 0; a < dim; ++a) {
      d[grid_.lattice_offset(a, b)] = row(a, b)[q2_stencil_slot(lattice_class(a, b), 0, 0)];
    }
  }
  return d;
}

std::size_t StencilQ2Q2::stored_entries() const {
  std::size_t n = 0;
  for (const auto& p : planes_) n += p.size();
  return n;
}

void StencilQ2Q2::for_each_entry(const EntryVisitor& fn) const {
  const int dim = grid_.lattice_dim();
  for (int b = 0; b < dim; ++b) {
    for (int a = 0; a < dim; ++a) {
      const auto coef = row(a, b);
      const auto stencil = q2_stencil(lattice_class(a, b));
      for (std::size_t k = 0; k < stencil.size(); ++k) {
        const int ca = a + stencil[k].da;
        const int cb = b + stencil[k].db;
        if (grid_.lattice_valid(ca, cb)) {
          fn(grid_.lattice_offset(a, b), grid_.lattice_offset(ca, cb), coef[k]);
        }
      }
    }
  }
}

// ---------------------------------------------------------------- B (Q2 -> Q1)

StencilQ2Q1::StencilQ2Q1(const StructuredGrid& grid) : grid_(grid) {
  coef_[0].assign(grid.q1_size() * kWidth, 0.0);
  coef_[1].assign(grid.q1_size() * kWidth, 0.0);
}

std::span<double> StencilQ2Q1::row(int comp, std::size_t p_row) {
  return {coef_[comp].data() + p_row * kWidth, static_cast<std::size_t>(kWidth)};
}

std::span<const double> StencilQ2Q1::row(int comp, std::size_t p_row) const {
  return {coef_[comp].data() + p_row * kWidth, static_cast<std::size_t>(kWidth)};
}

double StencilQ2Q1::entry(int comp, std::size_t p_row, int a, int b) const {
  const auto d = grid_.pressure_dof(p_row);
  const int slot = q2_stencil_slot(DofClass::Node, a - 2 * d.i, b - 2 * d.j);
  if (slot < 0 || !grid_.lattice_valid(a, b)) return 0.0;
  return row(comp, p_row)[slot];
}

double& StencilQ2Q1::entry_ref(int comp, std::size_t p_row, int a, int b) {
  const auto d = grid_.pressure_dof(p_row);
  const int slot = q2_stencil_slot(DofClass::Node, a - 2 * d.i, b - 2 * d.j);
  if (slot < 0 || !grid_.lattice_valid(a, b)) {
    throw std::out_of_range("StencilQ2Q1: column outside the pressure patch");
  }
  return row(comp, p_row)[slot];
}

void StencilQ2Q1::apply(std::span<const double> ux, std::span<const double> uy,
                        std::span<double> out) const {
  require_len(ux.size(), grid_.q2_size(), "matvec_q2_to_q1");
  require_len(uy.size(), grid_.q2_size(), "matvec_q2_to_q1");
  require_len(out.size(), grid_.q1_size(), "matvec_q2_to_q1");
  const int np = grid_.n_elem() + 1;
  const int dim = grid_.lattice_dim();
  const auto stencil = q2_stencil(DofClass::Node);
  parallel_for(grid_.q1_size(), [&](std::size_t begin, std::size_t end) {
    for (std::size_t r = begin; r < end; ++r) {
      const int a = 2 * static_cast<int>(r % np);
      const int b = 2 * static_cast<int>(r / np);
      const double* cx = coef_[0].data() + r * kWidth;
      const double* cy = coef_[1].data() + r * kWidth;
      double s = 0.0;
      for (int k = 0; k < kWidth; ++k) {
        const int ca = a + stencil[k].da;
        const int cb = b + stencil[k].db;
        if (ca < 0 || cb < 0 || ca >= dim || cb >= dim) continue;
        const std::size_t col = static_cast<std::size_t>(cb) * dim + ca;
        s += cx[k] * ux[col] + cy[k] * uy[col];
      }
      out[r] = s;
    }
  });
  const std::size_t nnz = stored_entries();
  record(kernel::kMatvecQ2ToQ1, nnz + ux.size() + uy.size(), out.size(), nnz);
}

void StencilQ2Q1::for_each_entry(const EntryVisitor& fn) const {
  const std::size_t n = grid_.q2_size();
  const auto stencil = q2_stencil(DofClass::Node);
  for (std::size_t r = 0; r < grid_.q1_size(); ++r) {
    const auto d = grid_.pressure_dof(r);
    for (int comp = 0; comp < 2; ++comp) {
      const auto coef = row(comp, r);
      for (int k = 0; k < kWidth; ++k) {
        const int ca = 2 * d.i + stencil[k].da;
        const int cb = 2 * d.j + stencil[k].db;
        if (grid_.lattice_valid(ca, cb)) fn(r, comp * n + grid_.lattice_offset(ca, cb), coef[k]);
      }
    }
  }
}

// ---------------------------------------------------------------- B^T (Q1 -> Q2)

StencilQ1Q2::StencilQ1Q2(const StructuredGrid& grid) : grid_(grid) {
  for (int comp = 0; comp < 2; ++comp) {
    for (DofClass c : kQ2Classes) {
      planes_[comp][static_cast<int>(c)].assign(grid.class_count(c) * width(c), 0.0);
    }
  }
}

std::size_t StencilQ1Q2::row_offset(int a, int b, DofClass& cls) const {
  if (!grid_.lattice_valid(a, b)) {
    throw std::out_of_range("StencilQ1Q2: row outside the fine lattice");
  }
  cls = lattice_class(a, b);
  const auto e = grid_.class_extent(cls);
  return (static_cast<std::size_t>(b / 2) * e[0] + a / 2) * width(cls);
}

std::span<double> StencilQ1Q2::row(int comp, int a, int b) {
  DofClass c{};
  const std::size_t off = row_offset(a, b, c);
  return {planes_[comp][static_cast<int>(c)].data() + off, static_cast<std::size_t>(width(c))};
}

std::span<const double> StencilQ1Q2::row(int comp, int a, int b) const {
  DofClass c{};
  const std::size_t off = row_offset(a, b, c);
  return {planes_[comp][static_cast<int>(c)].data() + off, static_cast<std::size_t>(width(c))};
}

double StencilQ1Q2::entry(int comp, int a, int b, int pi, int pj) const {
  const int di = pi - pressure_base(a);
  const int dj = pj - pressure_base(b);
  const int wx = pressure_span(a);
  if (di < 0 || dj < 0 || di >= wx || dj >= pressure_span(b)) return 0.0;
  if (pi < 0 || pj < 0 || pi > grid_.n_elem() || pj > grid_.n_elem()) return 0.0;
  return row(comp, a, b)[dj * wx + di];
}

double& StencilQ1Q2::entry_ref(int comp, int a, int b, int pi, int pj) {
  const int di = pi - pressure_base(a);
  const int dj = pj - pressure_base(b);
  const int wx = pressure_span(a);
  if (di < 0 || dj < 0 || di >= wx || dj >= pressure_span(b) || pi < 0 || pj < 0 ||
      pi > grid_.n_elem() || pj > grid_.n_elem()) {
    throw std::out_of_range("StencilQ1Q2: pressure column outside the row stencil");
  }
  return row(comp, a, b)[dj * wx + di];
}

void StencilQ1Q2::apply(std::span<const double> p, std::span<double> out_x,
                        std::span<double> out_y) const {
  require_len(p.size(), grid_.q1_size(), "matvec_q1_to_q2");
  require_len(out_x.size(), grid_.q2_size(), "matvec_q1_to_q2");
  require_len(out_y.size(), grid_.q2_size(), "matvec_q1_to_q2");
  const int np = grid_.n_elem() + 1;
  for (DofClass c : kQ2Classes) {
    const int w = width(c);
    const auto e = grid_.class_extent(c);
    const auto& px = planes_[0][static_cast<int>(c)];
    const auto& py = planes_[1][static_cast<int>(c)];
    parallel_for(grid_.class_count(c), [&](std::size_t begin, std::size_t end) {
      for (std::size_t r = begin; r < end; ++r) {
        const int i = static_cast<int>(r % e[0]);
        const int j = static_cast<int>(r / e[0]);
        const auto ab = lattice_of(c, i, j);
        const int bi = pressure_base(ab[0]);
        const int bj = pressure_base(ab[1]);
        const int wx = pressure_span(ab[0]);
        const int wy = pressure_span(ab[1]);
        const double* cx = px.data() + r * w;
        const double* cy = py.data() + r * w;
        double sx = 0.0;
        double sy = 0.0;
        for (int dj = 0; dj < wy; ++dj) {
          const int pj = bj + dj;
          if (pj < 0 || pj >= np) continue;
          for (int di = 0; di < wx; ++di) {
            const int pi = bi + di;
            if (pi < 0 || pi >= np) continue;
            const double pv = p[static_cast<std::size_t>(pj) * np + pi];
            sx += cx[dj * wx + di] * pv;
            sy += cy[dj * wx + di] * pv;
          }
        }
        const std::size_t out = grid_.lattice_offset(ab[0], ab[1]);
        out_x[out] = sx;
        out_y[out] = sy;
      }
    });
  }
  const std::size_t nnz = stored_entries();
  record(kernel::kMatvecQ1ToQ2, nnz + p.size(), out_x.size() + out_y.size(), nnz);
}

std::size_t StencilQ1Q2::stored_entries() const {
  std::size_t n = 0;
  for (const auto& comp : planes_) {
    for (const auto& p : comp) n += p.size();
  }
  return n;
}

void StencilQ1Q2::for_each_entry(const EntryVisitor& fn) const {
  const std::size_t n = grid_.q2_size();
  const int dim = grid_.lattice_dim();
  const int np = grid_.n_elem() + 1;
  for (int comp = 0; comp < 2; ++comp) {
    for (int b = 0; b < dim; ++b) {
      for (int a = 0; a < dim; ++a) {
        const auto coef = row(comp, a, b);
        const int wx = pressure_span(a);
        for (int dj = 0; dj < pressure_span(b); ++dj) {
          for (int di = 0; di < wx; ++di) {
            const int pi = pressure_base(a) + di;
            const int pj = pressure_base(b) + dj;
            if (pi < 0 || pj < 0 || pi >= np || pj >= np) continue;
            fn(comp * n + grid_.lattice_offset(a, b), static_cast<std::size_t>(pj) * np + pi,
               coef[dj * wx + di]);
          }
        }
      }
    }
  }
}

StencilQ1Q2 transpose(const StencilQ2Q1& b) {
  const auto& grid = b.grid();
  StencilQ1Q2 bt(grid);
  const auto stencil = q2_stencil(DofClass::Node);
  for (std::size_t r = 0; r < grid.q1_size(); ++r) {
    const auto d = grid.pressure_dof(r);
    for (int comp = 0; comp < 2; ++comp) {
      const auto coef = b.row(comp, r);
      for (int k = 0; k < StencilQ2Q1::kWidth; ++k) {
        const int a = 2 * d.i + stencil[k].da;
        const int bb = 2 * d.j + stencil[k].db;
        if (grid.lattice_valid(a, bb)) bt.entry_ref(comp, a, bb, d.i, d.j) = coef[k];
      }
    }
  }
  return bt;
}

StencilQ2Q1 transpose(const StencilQ1Q2& bt) {
  const auto& grid = bt.grid();
  StencilQ2Q1 b(grid);
  const std::size_t n = grid.q2_size();
  bt.for_each_entry([&](std::size_t row, std::size_t col, double v) {
    const int comp = row >= n ? 1 : 0;
    const std::size_t lat = row - comp * n;
    const int a = static_cast<int>(lat % grid.lattice_dim());
    const int bb = static_cast<int>(lat / grid.lattice_dim());
    b.entry_ref(comp, col, a, bb) = v;
  });
  return b;
}

// ---------------------------------------------------------------- Q1 -> Q1

StencilQ1Q1::StencilQ1Q1(const StructuredGrid& grid)
    : grid_(grid), coef_(grid.q1_size() * kWidth, 0.0) {}

double StencilQ1Q1::entry(int i, int j, int ci, int cj) const {
  const int di = ci - i;
  const int dj = cj - j;
  const int np = grid_.n_elem() + 1;
  if (di < -1 || di > 1 || dj < -1 || dj > 1 || ci < 0 || cj < 0 || ci >= np || cj >= np) {
    return 0.0;
  }
  return coef_[(static_cast<std::size_t>(j) * np + i) * kWidth + (dj + 1) * 3 + (di + 1)];
}

double& StencilQ1Q1::entry_ref(int i, int j, int ci, int cj) {
  const int di = ci - i;
  const int dj = cj - j;
  const int np = grid_.n_elem() + 1;
  if (di < -1 || di > 1 || dj < -1 || dj > 1 || ci < 0 || cj < 0 || ci >= np || cj >= np ||
      i < 0 || j < 0 || i >= np || j >= np) {
    throw std::out_of_range("StencilQ1Q1: entry outside the 3x3 stencil");
  }
  return coef_[(static_cast<std::size_t>(j) * np + i) * kWidth + (dj + 1) * 3 + (di + 1)];
}

void StencilQ1Q1::apply(std::span<const double> x, std::span<double> y) const {
  require_len(x.size(), grid_.q1_size(), "matvec_q1q1");
  require_len(y.size(), grid_.q1_size(), "matvec_q1q1");
  const int np = grid_.n_elem() + 1;
  parallel_for(grid_.q1_size(), [&](std::size_t begin, std::size_t end) {
    for (std::size_t r = begin; r < end; ++r) {
      const int i = static_cast<int>(r % np);
      const int j = static_cast<int>(r / np);
      const double* c = coef_.data() + r * kWidth;
      double s = 0.0;
      for (int dj = -1; dj <= 1; ++dj) {
        const int cj = j + dj;
        if (cj < 0 || cj >= np) continue;
        for (int di = -1; di <= 1; ++di) {
          const int ci = i + di;
          if (ci < 0 || ci >= np) continue;
          s += c[(dj + 1) * 3 + (di + 1)] * x[static_cast<std::size_t>(cj) * np + ci];
        }
      }
      y[r] = s;
    }
  });
  const std::size_t nnz = stored_entries();
  record(kernel::kMatvecQ1Q1, nnz + x.size(), y.size(), nnz);
}

std::vector<double> StencilQ1Q1::diagonal() const {
  std::vector<double> d(grid_.q1_size());
  for (std::size_t r = 0; r < d.size(); ++r) d[r] = coef_[r * kWidth + 4];
  return d;
}

void StencilQ1Q1::scale(double a) {
  for (double& v : coef_) v *= a;
}

void StencilQ1Q1::for_each_entry(const EntryVisitor& fn) const {
  const int np = grid_.n_elem() + 1;
  for (int j = 0; j < np; ++j) {
    for (int i = 0; i < np; ++i) {
      for (int dj = -1; dj <= 1; ++dj) {
        for (int di = -1; di <= 1; ++di) {
          const int ci = i + di;
          const int cj = j + dj;
          if (ci < 0 || cj < 0 || ci >= np || cj >= np) continue;
          fn(static_cast<std::size_t>(j) * np + i, static_cast<std::size_t>(cj) * np + ci,
             entry(i, j, ci, cj));
        }
      }
    }
  }
}

void write_matrix_market(std::ostream& os, std::size_t rows, std::size_t cols,
                         const std::function<void(const EntryVisitor&)>& entries) {
  std::ostringstream body;
  body << std::setprecision(17);
  std::size_t nnz = 0;
  entries([&](std::size_t r, std::size_t c, double v) {
    if (v == 0.0) return;
    body << (r + 1) << ' ' << (c + 1) << ' ' << v << '\n';
    ++nnz;
  });
  os << "%%MatrixMarket matrix coordinate real general\n";
  os << rows << ' ' << cols << ' ' << nnz << '\n';
  os << body.str();
}

}  // namespace stokeslab
