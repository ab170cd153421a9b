#include "stokeslab/transfer.hpp"

#include <algorithm>
#include <stdexcept>

#include "stokeslab/counters.hpp"

namespace stokeslab {

namespace {

void zero_boundary(const StructuredGrid& g, std::span<double> v) {
  const int dim = g.lattice_dim();
  for (int k = 0; k < dim; ++k) {
    v[g.lattice_offset(k, 0)] = 0.0;
    v[g.lattice_offset(k, dim - 1)] = 0.0;
    v[g.lattice_offset(0, k)] = 0.0;
    v[g.lattice_offset(dim - 1, k)] = 0.0;
  }
}

template <typename Row>
void tensor_prolong(const std::vector<Row>& rows, int dc, std::span<const double> in,
                    std::span<double> out) {
  const int df = static_cast<int>(rows.size());
  std::vector<double> tmp(static_cast<std::size_t>(dc) * df, 0.0);
  for (int bc = 0; bc < dc; ++bc) {
    for (int af = 0; af < df; ++af) {
      const auto& r = rows[af];
      double s = 0.0;
      for (int k = 0; k < r.count; ++k) s += r.w[k] * in[static_cast<std::size_t>(bc) * dc + r.first + k];
      tmp[static_cast<std::size_t>(bc) * df + af] = s;
    }
  }
  for (int bf = 0; bf < df; ++bf) {
    const auto& r = rows[bf];
    for (int af = 0; af < df; ++af) {
      double s = 0.0;
      for (int k = 0; k < r.count; ++k) s += r.w[k] * tmp[static_cast<std::size_t>(r.first + k) * df + af];
      out[static_cast<std::size_t>(bf) * df + af] = s;
    }
  }
}

template <typename Row>
void tensor_restrict(const std::vector<Row>& rows, int dc, std::span<const double> in,
                     std::span<double> out) {
  const int df = static_cast<int>(rows.size());
  std::vector<double> tmp(static_cast<std::size_t>(df) * dc, 0.0);
  for (int bf = 0; bf < df; ++bf) {
    for (int af = 0; af < df; ++af) {
      const auto& r = rows[af];
      const double v = in[static_cast<std::size_t>(bf) * df + af];
      for (int k = 0; k < r.count; ++k) tmp[static_cast<std::size_t>(bf) * dc + r.first + k] += r.w[k] * v;
    }
  }
  std::fill(out.begin(), out.end(), 0.0);
  for (int bf = 0; bf < df; ++bf) {
    const auto& r = rows[bf];
    for (int k = 0; k < r.count; ++k) {
      for (int ac = 0; ac < dc; ++ac) {
        out[static_cast<std::size_t>(r.first + k) * dc + ac] +=
            r.w[k] * tmp[static_cast<std::size_t>(bf) * dc + ac];
      }
    }
  }
}

}  // namespace

Interpolation::Interpolation(const StructuredGrid& coarse, bool mask_dirichlet)
    : coarse_(coarse), fine_(2 * coarse.n_elem(), coarse.level() + 1), masked_(mask_dirichlet) {
  const int nc = coarse.n_elem();
  q2_rows_.resize(4 * nc + 1);
  std::size_t nnz1 = 0;
  for (int f = 0; f <= 4 * nc; ++f) {
    const int e = std::min(f / 4, nc - 1);
    const int loc = f - 4 * e;
    Row1D r;
    if (loc % 2 == 0) {
      r.first = 2 * e + loc / 2;
      r.w = {1.0, 0.0, 0.0};
      r.count = 1;
    } else {
      r.first = 2 * e;
      r.w = kQ2Prolong1D[loc];
      r.count = 3;
    }
    nnz1 += r.count;
    q2_rows_[f] = r;
  }
  nnz_q2_ = nnz1 * nnz1;
  q1_rows_.resize(2 * nc + 1);
  std::size_t nnzp = 0;
  for (int f = 0; f <= 2 * nc; ++f) {
    Row1D r;
    if (f % 2 == 0) {
      r.first = f / 2;
      r.w = {1.0, 0.0, 0.0};
      r.count = 1;
    } else {
      r.first = (f - 1) / 2;
      r.w = {0.5, 0.5, 0.0};
      r.count = 2;
    }
    nnzp += r.count;
    q1_rows_[f] = r;
  }
  nnz_q1_ = nnzp * nnzp;
}

void Interpolation::prolong_q2(std::span<const double> coarse, std::span<double> fine) const {
  if (coarse.size() != coarse_.q2_size() || fine.size() != fine_.q2_size()) {
    throw std::invalid_argument("prolong_q2: size mismatch");
  }
  if (masked_) {
    std::vector<double> c(coarse.begin(), coarse.end());
    zero_boundary(coarse_, c);
    tensor_prolong(q2_rows_, coarse_.lattice_dim(), c, fine);
    zero_boundary(fine_, fine);
  } else {
    tensor_prolong(q2_rows_, coarse_.lattice_dim(), coarse, fine);
  }
  record(kernel::kGridTransfer, nnz_q2_ + coarse.size(), fine.size(), 2 * nnz_q2_);
}

void Interpolation::restrict_q2(std::span<const double> fine, std::span<double> coarse) const {
  if (coarse.size() != coarse_.q2_size() || fine.size() != fine_.q2_size()) {
    throw std::invalid_argument("restrict_q2: size mismatch");
  }
  if (masked_) {
    std::vector<double> f(fine.begin(), fine.end());
    zero_boundary(fine_, f);
    tensor_restrict(q2_rows_, coarse_.lattice_dim(), f, coarse);
    zero_boundary(coarse_, coarse);
  } else {
    tensor_restrict(q2_rows_, coarse_.lattice_dim(), fine, coarse);
  }
  record(kernel::kGridTransfer, nnz_q2_ + fine.size(), coarse.size(), 2 * nnz_q2_);
}

void Interpolation::prolong_q1(std::span<const double> coarse, std::span<double> fine) const {
  if (coarse.size() != coarse_.q1_size() || fine.size() != fine_.q1_size()) {
    throw std::invalid_argument("prolong_q1: size mismatch");
  }
  tensor_prolong(q1_rows_, coarse_.n_elem() + 1, coarse, fine);
  record(kernel::kGridTransfer, nnz_q1_ + coarse.size(), fine.size(), 2 * nnz_q1_);
}

void Interpolation::restrict_q1(std::span<const double> fine, std::span<double> coarse) const {
  if (coarse.size() != coarse_.q1_size() || fine.size() != fine_.q1_size()) {
    throw std::invalid_argument("restrict_q1: size mismatch");
  }
  tensor_restrict(q1_rows_, coarse_.n_elem() + 1, fine, coarse);
  record(kernel::kGridTransfer, nnz_q1_ + fine.size(), coarse.size(), 2 * nnz_q1_);
}

BlockVector Interpolation::prolong(const BlockVector& coarse) const {
  BlockVector out(fine_);
  prolong_q2(coarse.ux(), out.ux());
  prolong_q2(coarse.uy(), out.uy());
  prolong_q1(coarse.p(), out.p());
  return out;
}

BlockVector Interpolation::restrict(const BlockVector& fine) const {
  BlockVector out(coarse_);
  restrict_q2(fine.ux(), out.ux());
  restrict_q2(fine.uy(), out.uy());
  restrict_q1(fine.p(), out.p());
  return out;
}

std::vector<std::pair<std::size_t, double>> Interpolation::q2_row(int a, int b) const {
  if (!fine_.lattice_valid(a, b)) throw std::out_of_range("q2_row: outside the fine lattice");
  std::vector<std::pair<std::size_t, double>> out;
  const auto& ra = q2_rows_[a];
  const auto& rb = q2_rows_[b];
  for (int t = 0; t < rb.count; ++t) {
    for (int s = 0; s < ra.count; ++s) {
      const double w = ra.w[s] * rb.w[t];
      if (w != 0.0) out.emplace_back(coarse_.lattice_offset(ra.first + s, rb.first + t), w);
    }
  }
  return out;
}

}  // namespace stokeslab
