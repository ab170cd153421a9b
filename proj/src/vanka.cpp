#include "stokeslab/vanka.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <map>
#include <string>

#include "stokeslab/counters.hpp"
#include "stokeslab/parallel.hpp"

namespace stokeslab {

const char* to_string(VankaMode m) { return m == VankaMode::Tuned ? "tuned" : "simple"; }
const char* to_string(VankaWeighting w) { return w == VankaWeighting::Scalar ? "scalar" : "overlap"; }

void VankaConfig::validate() const {
  if (!(omega > 0.0)) throw std::invalid_argument("vanka.omega must be > 0");
}

int VankaPatchSet::category(int i, int n) {
  if (i == 0) return 0;
  if (i == n) return 4;
  if (i == 1) return 1;
  if (i == n - 1) return 3;
  return 2;
}

namespace {

using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

std::vector<double> invert(const std::vector<double>& a, std::size_t s, std::size_t node) {
  const Eigen::Map<const RowMajor> m(a.data(), s, s);
  Eigen::FullPivLU<RowMajor> lu(m);
  if (!lu.isInvertible()) {
    throw std::runtime_error("singular Vanka patch matrix at node " + std::to_string(node));
  }
  RowMajor inv = lu.inverse();
  return std::vector<double>(inv.data(), inv.data() + s * s);
}

}  // namespace

VankaPatchSet::VankaPatchSet(const StokesOperators& ops, VankaMode mode) : ops_(&ops), mode_(mode) {
  const auto& grid = ops.grid;
  const int n = grid.n_elem();
  const std::size_t nv = grid.q2_size();
  const auto node = q2_stencil(DofClass::Node);
  patches_.resize(grid.q1_size());
  for (std::size_t r = 0; r < patches_.size(); ++r) {
    auto& p = patches_[r];
    p.center = grid.pressure_dof(r);
    std::vector<std::size_t> vel;
    for (const auto& o : node) {
      const int a = 2 * p.center.i + o.da;
      const int b = 2 * p.center.j + o.db;
      if (grid.lattice_valid(a, b)) vel.push_back(grid.lattice_offset(a, b));
    }
    p.dofs.reserve(2 * vel.size() + 1);
    for (auto v : vel) p.dofs.push_back(v);
    for (auto v : vel) p.dofs.push_back(nv + v);
    p.dofs.push_back(2 * nv + r);
    p.group = 5 * category(p.center.j, n) + category(p.center.i, n);
  }

  std::map<int, std::vector<std::size_t>> members;
  for (std::size_t r = 0; r < patches_.size(); ++r) members[patches_[r].group].push_back(r);
  for (auto& [id, list] : members) {
    PatchGroup g;
    g.id = id;
    g.first = order_.size();
    g.count = list.size();
    g.size = patches_[list.front()].size();
    g.interior = (id == 5 * 2 + 2);
    for (auto r : list) {
      if (patches_[r].size() != g.size) {
        throw std::runtime_error("Vanka group " + std::to_string(id) + " mixes patch sizes");
      }
      order_.push_back(r);
    }
    groups_.push_back(g);
  }
  for (std::size_t k = 0; k < order_.size(); ++k) {
    auto& p = patches_[order_[k]];
    p.offset = packed_size_;
    packed_size_ += p.size();
  }

  // Members must share the representative matrix exactly up to round-off.
  for (std::size_t gi = 0; gi < groups_.size(); ++gi) {
    const auto& g = groups_[gi];
    const std::size_t rep = order_[g.first];
    const auto a_rep = patch_matrix(rep);
    if (mode_ == VankaMode::Tuned) {
      inverse_offset_.push_back(inverses_.size());
      const auto inv = invert(a_rep, g.size, rep);
      inverses_.insert(inverses_.end(), inv.begin(), inv.end());
    }
    for (std::size_t k = g.first; k < g.first + g.count; ++k) {
      const std::size_t r = order_[k];
      const auto a = (r == rep) ? a_rep : patch_matrix(r);
      double diff = 0.0;
      for (std::size_t e = 0; e < a.size(); ++e) diff = std::max(diff, std::abs(a[e] - a_rep[e]));
      if (diff > 1e-12) {
        throw std::runtime_error("Vanka group " + std::to_string(g.id) +
                                 ": patch matrix differs from representative by " +
                                 std::to_string(diff));
      }
      if (mode_ == VankaMode::Simple) {
        inverse_offset_.push_back(inverses_.size());
        const auto inv = invert(a, g.size, r);
        inverses_.insert(inverses_.end(), inv.begin(), inv.end());
      }
    }
  }
}

std::vector<double> VankaPatchSet::patch_matrix(std::size_t r) const {
  const auto& d = patches_.at(r).dofs;
  const std::size_t s = d.size();
  std::vector<double> a(s * s);
  for (std::size_t i = 0; i < s; ++i)
    for (std::size_t j = 0; j < s; ++j) a[i * s + j] = ops_->entry(d[i], d[j]);
  return a;
}

const double* VankaPatchSet::inverse(std::size_t r) const {
  const auto& p = patches_.at(r);
  if (mode_ == VankaMode::Tuned) {
    for (std::size_t gi = 0; gi < groups_.size(); ++gi) {
      if (groups_[gi].id == p.group) return inverses_.data() + inverse_offset_[gi];
    }
    return nullptr;
  }
  // Simple mode stores inverses in packed order; the offset of patch r is
  // its position there.
  const auto it = std::find(order_.begin(), order_.end(), r);
  return inverses_.data() + inverse_offset_[static_cast<std::size_t>(it - order_.begin())];
}

void VankaPatchSet::form_rhs(const BlockVector& r, std::vector<double>& packed) const {
  packed.resize(packed_size_);
  parallel_for(patches_.size(), [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) {
      const auto& p = patches_[i];
      for (std::size_t k = 0; k < p.size(); ++k) packed[p.offset + k] = r[p.dofs[k]];
    }
  });
  record(kernel::kVankaFormRhs, packed_size_, packed_size_, 0);
}

void VankaPatchSet::apply_inverses(const std::vector<double>& in, std::vector<double>& out) const {
  out.resize(packed_size_);
  std::uint64_t r_int = 0, w_int = 0, f_int = 0, r_ext = 0, w_ext = 0, f_ext = 0;
  for (std::size_t gi = 0; gi < groups_.size(); ++gi) {
    const auto& g = groups_[gi];
    const std::size_t s = g.size;
    parallel_for(g.count, [&](std::size_t b, std::size_t e) {
      for (std::size_t k = g.first + b; k < g.first + e; ++k) {
        const auto& p = patches_[order_[k]];
        const double* inv = inverses_.data() +
                            (mode_ == VankaMode::Tuned ? inverse_offset_[gi] : inverse_offset_[k]);
        const double* x = in.data() + p.offset;
        double* y = out.data() + p.offset;
        for (std::size_t i = 0; i < s; ++i) {
          double acc = 0.0;
          const double* row = inv + i * s;
          for (std::size_t j = 0; j < s; ++j) acc += row[j] * x[j];
          y[i] = acc;
        }
      }
    });
    const std::uint64_t c = g.count;
    if (g.interior) {
      r_int += c * (s * s + s);
      w_int += c * s;
      f_int += c * 2 * s * s;
    } else {
      r_ext += c * (s * s + s);
      w_ext += c * s;
      f_ext += c * 2 * s * s;
    }
  }
  if (f_int > 0) record(kernel::kVankaApplyInt, r_int, w_int, f_int);
  record(kernel::kVankaApplyExt, r_ext, w_ext, f_ext);
}

void VankaPatchSet::scatter(const std::vector<double>& upd, const std::vector<double>& weights,
                            BlockVector& x) const {
  for (const auto& p : patches_) {
    for (std::size_t k = 0; k < p.size(); ++k) {
      const std::size_t j = p.dofs[k];
      x[j] += weights[j] * upd[p.offset + k];
    }
  }
  record(kernel::kVankaUpdate, packed_size_, packed_size_, packed_size_);
}

std::vector<double> VankaPatchSet::multiplicity() const {
  const auto& grid = ops_->grid;
  std::vector<double> m(2 * grid.q2_size() + grid.q1_size(), 0.0);
  for (const auto& p : patches_)
    for (auto j : p.dofs) m[j] += 1.0;
  return m;
}

Vanka::Vanka(const StokesOperators& ops, const VankaConfig& cfg)
    : Relaxation(ops), cfg_(cfg), set_(ops, cfg.mode) {
  cfg_.validate();
  if (cfg_.weighting == VankaWeighting::Scalar) {
    weights_.assign(ops.size(), cfg_.omega);
  } else {
    weights_ = set_.multiplicity();
    for (double& w : weights_) w = cfg_.omega / w;
  }
}

void Vanka::correction(const BlockVector& r, BlockVector& delta) const {
  std::vector<double> rhs, upd;
  set_.form_rhs(r, rhs);
  set_.apply_inverses(rhs, upd);
  delta.fill(0.0);
  set_.scatter(upd, weights_, delta);
}

BlockVector vanka_sweep(const StokesOperators& ops, const BlockVector& r, const VankaConfig& cfg) {
  Vanka v(ops, cfg);
  BlockVector d(r.n_vel(), r.n_p());
  v.correction(r, d);
  return d;
}

}  // namespace stokeslab
