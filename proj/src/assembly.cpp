#include "stokeslab/assembly.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "stokeslab/counters.hpp"

namespace stokeslab {

namespace fe {

namespace {

double lagrange2(int k, double t) {
  switch (k) {
    case 0: return 0.5 * t * (t - 1.0);
    case 1: return 1.0 - t * t;
    case 2: return 0.5 * t * (t + 1.0);
  }
  return 0.0;
}

double lagrange2_d(int k, double t) {
  switch (k) {
    case 0: return t - 0.5;
    case 1: return -2.0 * t;
    case 2: return t + 0.5;
  }
  return 0.0;
}

double lagrange1(int k, double t) { return k == 0 ? 0.5 * (1.0 - t) : 0.5 * (1.0 + t); }
double lagrange1_d(int k, double) { return k == 0 ? -0.5 : 0.5; }

}  // namespace

BasisValue reference_basis(BasisKind kind, int idx, double xi, double eta) {
  if (kind == BasisKind::Q2) {
    if (idx < 0 || idx > 8) throw std::out_of_range("Q2 basis index must be in 0..8");
    const int la = idx % 3;
    const int lb = idx / 3;
    return {lagrange2(la, xi) * lagrange2(lb, eta), lagrange2_d(la, xi) * lagrange2(lb, eta),
            lagrange2(la, xi) * lagrange2_d(lb, eta)};
  }
  if (idx < 0 || idx > 3) throw std::out_of_range("Q1 basis index must be in 0..3");
  const int la = idx % 2;
  const int lb = idx / 2;
  return {lagrange1(la, xi) * lagrange1(lb, eta), lagrange1_d(la, xi) * lagrange1(lb, eta),
          lagrange1(la, xi) * lagrange1_d(lb, eta)};
}

}  // namespace fe

ElementMatrices element_matrices(double h, double nu) {
  using fe::BasisKind;
  ElementMatrices em;
  const double jac = 0.25 * h * h;  // dA = (h/2)^2 dxi deta
  const double dinv = 2.0 / h;      // d/dx = (2/h) d/dxi
  for (int qy = 0; qy < 3; ++qy) {
    for (int qx = 0; qx < 3; ++qx) {
      const double xi = fe::kGaussPoints[qx];
      const double eta = fe::kGaussPoints[qy];
      const double w = fe::kGaussWeights[qx] * fe::kGaussWeights[qy] * jac;
      std::array<fe::BasisValue, 9> q2{};
      std::array<fe::BasisValue, 4> q1{};
      for (int i = 0; i < 9; ++i) q2[i] = fe::reference_basis(BasisKind::Q2, i, xi, eta);
      for (int k = 0; k < 4; ++k) q1[k] = fe::reference_basis(BasisKind::Q1, k, xi, eta);
      for (int i = 0; i < 9; ++i) {
        for (int j = 0; j < 9; ++j) {
          em.stiffness[i][j] += nu * w * dinv * dinv *
                                (q2[i].d_xi * q2[j].d_xi + q2[i].d_eta * q2[j].d_eta);
        }
      }
      for (int k = 0; k < 4; ++k) {
        for (int j = 0; j < 9; ++j) {
          em.div_x[k][j] -= w * q1[k].value * dinv * q2[j].d_xi;
          em.div_y[k][j] -= w * q1[k].value * dinv * q2[j].d_eta;
        }
        for (int l = 0; l < 4; ++l) em.mass[k][l] += w * q1[k].value * q1[l].value;
      }
    }
  }
  return em;
}

StokesOperators::StokesOperators(const StructuredGrid& g)
    : grid(g), L(g), B(g), BT(g), M(g), mask(g) {}

void StokesOperators::apply(const BlockVector& x, BlockVector& y) const {
  if (x.n_vel() != grid.q2_size() || x.n_p() != grid.q1_size() || !x.same_shape(y)) {
    throw std::invalid_argument("StokesOperators::apply: vector does not match the grid");
  }
  L.apply(x.ux(), y.ux());
  L.apply(x.uy(), y.uy());
  std::vector<double> gx(grid.q2_size());
  std::vector<double> gy(grid.q2_size());
  BT.apply(x.p(), gx, gy);
  add_inplace(std::span<const double>(gx), y.ux());
  add_inplace(std::span<const double>(gy), y.uy());
  B.apply(x.ux(), x.uy(), y.p());
}

BlockVector StokesOperators::residual(const BlockVector& b, const BlockVector& x) const {
  BlockVector ax(x.n_vel(), x.n_p());
  apply(x, ax);
  return sub(b, ax);
}

double StokesOperators::entry(std::size_t row, std::size_t col) const {
  const std::size_t n = grid.q2_size();
  const std::size_t total = size();
  if (row >= total || col >= total) throw std::out_of_range("StokesOperators::entry");
  const int dim = grid.lattice_dim();
  auto lattice = [dim](std::size_t off) {
    return std::array<int, 2>{static_cast<int>(off % dim), static_cast<int>(off / dim)};
  };
  const bool row_p = row >= 2 * n;
  const bool col_p = col >= 2 * n;
  if (row_p && col_p) return 0.0;
  if (!row_p && !col_p) {
    if ((row >= n) != (col >= n)) return 0.0;
    const auto r = lattice(row % n);
    const auto c = lattice(col % n);
    return L.entry(r[0], r[1], c[0], c[1]);
  }
  if (row_p) {
    const int comp = col >= n ? 1 : 0;
    const auto c = lattice(col - comp * n);
    return B.entry(comp, row - 2 * n, c[0], c[1]);
  }
  const int comp = row >= n ? 1 : 0;
  const auto r = lattice(row - comp * n);
  const auto pd = grid.pressure_dof(col - 2 * n);
  return BT.entry(comp, r[0], r[1], pd.i, pd.j);
}

StokesOperators assemble_raw_operators(const StructuredGrid& grid, double nu) {
  StokesOperators ops(grid);
  ops.nu = nu;
  const auto em = element_matrices(grid.h(), nu);
  const int n = grid.n_elem();
  for (int ey = 0; ey < n; ++ey) {
    for (int ex = 0; ex < n; ++ex) {
      std::array<std::array<int, 2>, 9> q2{};
      for (int i = 0; i < 9; ++i) q2[i] = {2 * ex + i % 3, 2 * ey + i / 3};
      for (int i = 0; i < 9; ++i) {
        for (int j = 0; j < 9; ++j) {
          ops.L.entry_ref(q2[i][0], q2[i][1], q2[j][0], q2[j][1]) += em.stiffness[i][j];
        }
      }
      for (int k = 0; k < 4; ++k) {
        const int pi = ex + k % 2;
        const int pj = ey + k / 2;
        const std::size_t prow = static_cast<std::size_t>(pj) * (n + 1) + pi;
        for (int j = 0; j < 9; ++j) {
          ops.B.entry_ref(0, prow, q2[j][0], q2[j][1]) += em.div_x[k][j];
          ops.B.entry_ref(1, prow, q2[j][0], q2[j][1]) += em.div_y[k][j];
        }
        for (int l = 0; l < 4; ++l) {
          ops.M.entry_ref(pi, pj, ex + l % 2, ey + l / 2) += em.mass[k][l];
        }
      }
    }
  }
  ops.BT = transpose(ops.B);
  return ops;
}

void apply_dirichlet(StokesOperators& ops, const BlockVector& boundary, BlockVector* rhs) {
  if (ops.dirichlet_applied) {
    throw std::logic_error("apply_dirichlet: boundary conditions already applied");
  }
  const auto& grid = ops.grid;
  const auto& mask = ops.mask;
  const std::size_t n = grid.q2_size();
  if (rhs != nullptr) {
    BlockVector lifted(grid);
    for (std::size_t k = 0; k < n; ++k) {
      if (mask.dirichlet(k)) {
        lifted.ux()[k] = boundary.ux()[k];
        lifted.uy()[k] = boundary.uy()[k];
      }
    }
    BlockVector a_lift(grid);
    ops.apply(lifted, a_lift);
    for (std::size_t k = 0; k < rhs->size(); ++k) (*rhs)[k] -= a_lift[k];
    for (std::size_t k = 0; k < n; ++k) {
      if (mask.dirichlet(k)) {
        rhs->ux()[k] = boundary.ux()[k];
        rhs->uy()[k] = boundary.uy()[k];
      }
    }
  }

  const int dim = grid.lattice_dim();
  for (int b = 0; b < dim; ++b) {
    for (int a = 0; a < dim; ++a) {
      auto row = ops.L.row(a, b);
      const auto cls = lattice_class(a, b);
      const auto stencil = q2_stencil(cls);
      if (mask.dirichlet(grid.lattice_offset(a, b))) {
        for (double& v : row) v = 0.0;
        row[q2_stencil_slot(cls, 0, 0)] = 1.0;
        continue;
      }
      for (std::size_t k = 0; k < stencil.size(); ++k) {
        const int ca = a + stencil[k].da;
        const int cb = b + stencil[k].db;
        if (grid.lattice_valid(ca, cb) && mask.dirichlet(grid.lattice_offset(ca, cb))) {
          row[k] = 0.0;
        }
      }
    }
  }
  const auto node = q2_stencil(DofClass::Node);
  for (std::size_t r = 0; r < grid.q1_size(); ++r) {
    const auto d = grid.pressure_dof(r);
    for (int comp = 0; comp < 2; ++comp) {
      auto row = ops.B.row(comp, r);
      for (std::size_t k = 0; k < node.size(); ++k) {
        const int ca = 2 * d.i + node[k].da;
        const int cb = 2 * d.j + node[k].db;
        if (grid.lattice_valid(ca, cb) && mask.dirichlet(grid.lattice_offset(ca, cb))) {
          row[k] = 0.0;
        }
      }
    }
  }
  ops.BT = transpose(ops.B);
  ops.dirichlet_applied = true;
}

StokesOperators assemble_operators(const StructuredGrid& grid, double nu) {
  auto ops = assemble_raw_operators(grid, nu);
  apply_dirichlet(ops, BlockVector(grid), nullptr);
  return ops;
}

std::array<double, 2> ManufacturedSolution::velocity(double x, double y) {
  return {x * (1.0 - x) * (2.0 * x - 1.0) * (6.0 * y * y - 6.0 * y + 1.0),
          y * (y - 1.0) * (2.0 * y - 1.0) * (6.0 * x * x - 6.0 * x + 1.0)};
}

double ManufacturedSolution::pressure(double x, double y) {
  return x * x - 3.0 * y * y + (8.0 / 3.0) * x * y;
}

std::array<double, 2> ManufacturedSolution::forcing(double x, double y, double nu) {
  // u_x = X(x) Y(y), X = x(1-x)(2x-1), Y = 6y^2-6y+1; u_y = Yh(y) G(x) likewise.
  const double X = x * (1.0 - x) * (2.0 * x - 1.0);
  const double Xpp = 6.0 - 12.0 * x;
  const double Y = 6.0 * y * y - 6.0 * y + 1.0;
  const double lap_ux = Xpp * Y + X * 12.0;
  const double Yh = y * (y - 1.0) * (2.0 * y - 1.0);
  const double Yhpp = 12.0 * y - 6.0;
  const double G = 6.0 * x * x - 6.0 * x + 1.0;
  const double lap_uy = Yhpp * G + Yh * 12.0;
  const double px = 2.0 * x + (8.0 / 3.0) * y;
  const double py = -6.0 * y + (8.0 / 3.0) * x;
  return {-nu * lap_ux + px, -nu * lap_uy + py};
}

double ManufacturedSolution::divergence(double x, double y) {
  const double dux = (-6.0 * x * x + 6.0 * x - 1.0) * (6.0 * y * y - 6.0 * y + 1.0);
  const double duy = (6.0 * y * y - 6.0 * y + 1.0) * (6.0 * x * x - 6.0 * x + 1.0);
  return dux + duy;
}

BlockVector assemble_load(const StructuredGrid& grid, double nu) {
  BlockVector f(grid);
  const int n = grid.n_elem();
  const double h = grid.h();
  const double jac = 0.25 * h * h;
  for (int ey = 0; ey < n; ++ey) {
    for (int ex = 0; ex < n; ++ex) {
      for (int qy = 0; qy < 3; ++qy) {
        for (int qx = 0; qx < 3; ++qx) {
          const double xi = fe::kGaussPoints[qx];
          const double eta = fe::kGaussPoints[qy];
          const double x = (ex + 0.5 * (xi + 1.0)) * h;
          const double y = (ey + 0.5 * (eta + 1.0)) * h;
          const double w = fe::kGaussWeights[qx] * fe::kGaussWeights[qy] * jac;
          const auto fv = ManufacturedSolution::forcing(x, y, nu);
          for (int i = 0; i < 9; ++i) {
            const double psi = fe::reference_basis(fe::BasisKind::Q2, i, xi, eta).value;
            const std::size_t k = grid.lattice_offset(2 * ex + i % 3, 2 * ey + i / 3);
            f.ux()[k] += w * fv[0] * psi;
            f.uy()[k] += w * fv[1] * psi;
          }
        }
      }
    }
  }
  return f;
}

BlockVector boundary_values(const StructuredGrid& grid) {
  BlockVector g(grid);
  const int dim = grid.lattice_dim();
  const double hh = 0.5 * grid.h();
  for (int b = 0; b < dim; ++b) {
    for (int a = 0; a < dim; ++a) {
      const auto u = ManufacturedSolution::velocity(a * hh, b * hh);
      const std::size_t k = grid.lattice_offset(a, b);
      g.ux()[k] = u[0];
      g.uy()[k] = u[1];
    }
  }
  return g;
}

StokesProblem make_problem(const StructuredGrid& grid, double nu) {
  StokesProblem prob{assemble_raw_operators(grid, nu), assemble_load(grid, nu)};
  apply_dirichlet(prob.ops, boundary_values(grid), &prob.rhs);
  return prob;
}

BlockVector assemble_rhs(const StructuredGrid& grid, double nu) {
  return make_problem(grid, nu).rhs;
}

BlockVector interpolate_exact(const StructuredGrid& grid) {
  BlockVector x = boundary_values(grid);
  auto p = x.p();
  for (std::size_t r = 0; r < grid.q1_size(); ++r) {
    const auto pt = dof_coordinates(grid, grid.pressure_dof(r));
    p[r] = ManufacturedSolution::pressure(pt.x, pt.y);
  }
  return x;
}

ErrorNorms solution_errors(const StructuredGrid& grid, const BlockVector& x) {
  if (x.n_vel() != grid.q2_size() || x.n_p() != grid.q1_size()) {
    throw std::invalid_argument("solution_errors: vector does not match the grid");
  }
  // Four-point Gauss rule.
  constexpr std::array<double, 4> gp = {-0.8611363115940526, -0.3399810435848563,
                                        0.3399810435848563, 0.8611363115940526};
  constexpr std::array<double, 4> gw = {0.3478548451374538, 0.6521451548625461,
                                        0.6521451548625461, 0.3478548451374538};
  const int n = grid.n_elem();
  const double h = grid.h();
  const double jac = 0.25 * h * h;

  auto eval = [&](int ex, int ey, double xi, double eta, double& ux, double& uy, double& ph) {
    ux = uy = ph = 0.0;
    for (int i = 0; i < 9; ++i) {
      const double psi = fe::reference_basis(fe::BasisKind::Q2, i, xi, eta).value;
      const std::size_t k = grid.lattice_offset(2 * ex + i % 3, 2 * ey + i / 3);
      ux += psi * x.ux()[k];
      uy += psi * x.uy()[k];
    }
    for (int k = 0; k < 4; ++k) {
      const double phi = fe::reference_basis(fe::BasisKind::Q1, k, xi, eta).value;
      ph += phi * x.p()[static_cast<std::size_t>(ey + k / 2) * (n + 1) + ex + k % 2];
    }
  };

  double ph_mean = 0.0;
  double pe_mean = 0.0;
  for (int ey = 0; ey < n; ++ey) {
    for (int ex = 0; ex < n; ++ex) {
      for (int qy = 0; qy < 4; ++qy) {
        for (int qx = 0; qx < 4; ++qx) {
          double ux = 0, uy = 0, ph = 0;
          eval(ex, ey, gp[qx], gp[qy], ux, uy, ph);
          const double w = gw[qx] * gw[qy] * jac;
          const double xx = (ex + 0.5 * (gp[qx] + 1.0)) * h;
          const double yy = (ey + 0.5 * (gp[qy] + 1.0)) * h;
          ph_mean += w * ph;
          pe_mean += w * ManufacturedSolution::pressure(xx, yy);
        }
      }
    }
  }

  ErrorNorms e;
  double ev = 0.0;
  double ep = 0.0;
  for (int ey = 0; ey < n; ++ey) {
    for (int ex = 0; ex < n; ++ex) {
      for (int qy = 0; qy < 4; ++qy) {
        for (int qx = 0; qx < 4; ++qx) {
          double ux = 0, uy = 0, ph = 0;
          eval(ex, ey, gp[qx], gp[qy], ux, uy, ph);
          const double w = gw[qx] * gw[qy] * jac;
          const double xx = (ex + 0.5 * (gp[qx] + 1.0)) * h;
          const double yy = (ey + 0.5 * (gp[qy] + 1.0)) * h;
          const auto u = ManufacturedSolution::velocity(xx, yy);
          const double pe = ManufacturedSolution::pressure(xx, yy) - pe_mean;
          ev += w * ((ux - u[0]) * (ux - u[0]) + (uy - u[1]) * (uy - u[1]));
          ep += w * (ph - ph_mean - pe) * (ph - ph_mean - pe);
        }
      }
    }
  }
  e.l2_velocity = std::sqrt(ev);
  e.l2_pressure = std::sqrt(ep);

  const BlockVector exact = interpolate_exact(grid);
  double dv = 0.0;
  for (std::size_t k = 0; k < grid.q2_size(); ++k) {
    dv += std::pow(x.ux()[k] - exact.ux()[k], 2) + std::pow(x.uy()[k] - exact.uy()[k], 2);
  }
  const double xm = mean(x.p());
  const double em = mean(exact.p());
  double dp = 0.0;
  for (std::size_t k = 0; k < grid.q1_size(); ++k) {
    dp += std::pow((x.p()[k] - xm) - (exact.p()[k] - em), 2);
  }
  e.l2_discrete_velocity = std::sqrt(dv / static_cast<double>(2 * grid.q2_size()));
  e.l2_discrete_pressure = std::sqrt(dp / static_cast<double>(grid.q1_size()));
  return e;
}

}  // namespace stokeslab
