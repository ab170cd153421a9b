#pragma once

#include <cstddef>
#include <string_view>
#include <vector>

#include "stokeslab/relaxation.hpp"

namespace stokeslab {

enum class VankaMode { Tuned, Simple };
enum class VankaWeighting { Scalar, Overlap };

const char* to_string(VankaMode m);
const char* to_string(VankaWeighting w);

struct VankaConfig {
  VankaMode mode = VankaMode::Tuned;
  double omega = 0.8;
  VankaWeighting weighting = VankaWeighting::Overlap;

  void validate() const;
};

/// Velocity DOFs (x then y, canonical node-stencil order, truncated at the
/// boundary) of the elements around a mesh node, followed by that node's
/// pressure DOF. Indices are BlockVector offsets.
struct VankaPatch {
  DofIndex center;
  std::vector<std::size_t> dofs;
  int group = 0;
  std::size_t offset = 0;  // start in packed storage
  std::size_t size() const { return dofs.size(); }
};

struct PatchGroup {
  int id = 0;               // 5 * cat_y + cat_x
  std::size_t first = 0;    // range in packed patch order
  std::size_t count = 0;
  std::size_t size = 0;     // patch dimension
  bool interior = false;    // generic interior group
};

/// Patches at every mesh node, grouped by per-dimension position category
/// {0, 1, 2..N-2, N-1, N}. Tuned mode stores one dense inverse per group,
/// simple mode one per patch.
class VankaPatchSet {
 public:
  VankaPatchSet(const StokesOperators& ops, VankaMode mode);

  static int category(int i, int n);

  VankaMode mode() const { return mode_; }
  std::size_t num_patches() const { return patches_.size(); }
  std::size_t num_groups() const { return groups_.size(); }
  /// Patch centered at pressure node offset r.
  const VankaPatch& patch(std::size_t r) const { return patches_[r]; }
  const std::vector<PatchGroup>& groups() const { return groups_; }
  /// Node offsets in packed (group-major) order.
  const std::vector<std::size_t>& packed_order() const { return order_; }
  std::size_t packed_size() const { return packed_size_; }

  /// Dense row-major V_i A V_i^T.
  std::vector<double> patch_matrix(std::size_t r) const;
  /// Inverse used for patch r (shared within a group in tuned mode).
  const double* inverse(std::size_t r) const;
  std::size_t stored_inverses() const { return inverse_offset_.size(); }
  std::size_t inverse_bytes() const { return inverses_.size() * sizeof(double); }

  /// packed = (V_i r)_i, gather only.
  void form_rhs(const BlockVector& r, std::vector<double>& packed) const;
  /// out_i = A_i^{-1} in_i.
  void apply_inverses(const std::vector<double>& in, std::vector<double>& out) const;
  /// x += sum_i V_i^T W_i upd_i, W_i = diag(weights at the patch DOFs),
  /// accumulated in ascending patch order.
  void scatter(const std::vector<double>& upd, const std::vector<double>& weights,
               BlockVector& x) const;

  /// Number of patches containing each global DOF.
  std::vector<double> multiplicity() const;

 private:
  const StokesOperators* ops_;
  VankaMode mode_;
  std::vector<VankaPatch> patches_;
  std::vector<PatchGroup> groups_;
  std::vector<std::size_t> order_;
  std::size_t packed_size_ = 0;
  std::vector<double> inverses_;
  std::vector<std::size_t> inverse_offset_;  // per group (tuned) or per patch (simple)
};

/// Additive Vanka: delta = sum_i V_i^T W_i A_i^{-1} V_i r.
class Vanka final : public Relaxation {
 public:
  Vanka(const StokesOperators& ops, const VankaConfig& cfg);

  void correction(const BlockVector& r, BlockVector& delta) const override;
  std::string_view name() const override {
    return cfg_.mode == VankaMode::Tuned ? "vanka" : "vanka-simple";
  }
  const VankaPatchSet& patches() const { return set_; }
  const std::vector<double>& weights() const { return weights_; }

 private:
  VankaConfig cfg_;
  VankaPatchSet set_;
  std::vector<double> weights_;
};

BlockVector vanka_sweep(const StokesOperators& ops, const BlockVector& r, const VankaConfig& cfg);

}  // namespace stokeslab
