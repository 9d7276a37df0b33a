#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "cpcert/algebra.hpp"

namespace cpcert {

struct DensityState {
  Mat rho;
  bool faithful = false;
  double min_eig = 0;
  double max_eig = 0;
};

// Validates PSD and unit trace; records faithfulness (min_eig above the rank
// cutoff relative to max_eig).
DensityState make_density(const Mat& rho, const Tolerance& tol);

// Heisenberg-picture CP map tau(x) = sum_k v_k x v_k^* on the algebra's
// carrier. Unital by default; pass require_unital=false for dominated maps
// (Radon-Nikodym numerators) that are CP but not unital.
class KrausChannel {
 public:
  KrausChannel(std::shared_ptr<const AlgebraModel> algebra, std::vector<Mat> kraus,
               std::string label, const Tolerance& tol, bool require_unital = true);

  const AlgebraModel& algebra() const { return *algebra_; }
  std::shared_ptr<const AlgebraModel> algebra_ptr() const { return algebra_; }
  const std::vector<Mat>& kraus() const { return kraus_; }
  Index kraus_count() const { return static_cast<Index>(kraus_.size()); }
  Index carrier_dim() const { return algebra_->carrier_dim(); }
  const std::string& label() const { return label_; }
  double unitality_defect() const { return unitality_defect_; }

  // Vertical stack of the v_k^* (dN x N): the Stinespring isometry into
  // C^d (x) H with the Kraus index major.
  Mat stacked_adjoint() const;
  // Horizontal [v_1 ... v_d] (N x dN).
  Mat row() const;

  // tau(x) = sum_k v_k x v_k^*; maps M into B(H), and into M when the family
  // is inner.
  Mat apply(const Mat& x) const;

 private:
  std::shared_ptr<const AlgebraModel> algebra_;
  std::vector<Mat> kraus_;
  std::string label_;
  double unitality_defect_ = 0;
};


// Max Frobenius deviation of the two maps over the algebra basis.
double channel_distance(const KrausChannel& a, const KrausChannel& b);

// All Kraus operators lie in M.
bool is_inner(const KrausChannel& ch, const Tolerance& tol);

// ===========================================================================
// Choi representation (row-major vectorization; C = sum vec(v) vec(v)^*)
// ===========================================================================

struct ChoiMatrix {
  Mat matrix;  // N^2 x N^2
};

ChoiMatrix to_choi(const KrausChannel& ch);
// tau(x) = tr_2[ C (I (x) x^T) ]
Mat choi_apply(const Mat& choi, const Mat& x);
KrausChannel from_choi(std::shared_ptr<const AlgebraModel> algebra, const Mat& choi,
                       const Tolerance& tol, std::string label, bool require_unital = true);

// ===========================================================================
// Minimal Stinespring data
// ===========================================================================

struct StinespringData {
  Index d = 0;              // Kraus count of the analyzed family
  Mat support_projection;   // on C^d (x) H; orthogonal projection commuting with I_d (x) M
  Index index = 0;          // minimal dilation multiplicity: max_b ceil(r_b / m_b)
  std::vector<Index> block_ranks;  // r_b per central block
  RealVec span_spectrum;    // singular values of the cyclic spanning set
};

StinespringData stinespring_support(const KrausChannel& ch, const Tolerance& tol);

// Rebuilds a Kraus family of cardinality index(tau) representing the same map
// (block-wise isometry onto C^{m_b} (x) C^{index}, zero-padded). Returns the
// input unchanged when it is already of minimal cardinality.
KrausChannel minimal_kraus(const KrausChannel& ch, const Tolerance& tol);

// Kernel of (M')^d -> B(H), (c_a) -> sum_a c_a v_a^*.
struct CommKernelElement {
  std::vector<Mat> coeffs;  // d entries in M'
};
struct CommKernel {
  std::vector<CommKernelElement> basis;  // orthonormal in the direct-sum trace norm
  RealVec singular_values;
  bool indeterminate = false;
};

CommKernel kraus_comm_kernel(const KrausChannel& ch, const Tolerance& tol);

struct PhiPreservation {
  bool preserving = false;
  double defect = 0;  // max |tr(rho (tau(x)-x))| over the algebra basis
};

PhiPreservation is_phi_preserving(const KrausChannel& ch, const DensityState& phi,
                                  const Tolerance& tol);

// ===========================================================================
// Seeded generators
// ===========================================================================

// Slices a Haar-random isometry H -> C^d (x) H; unital by construction.
KrausChannel random_channel(std::shared_ptr<const AlgebraModel> algebra, Index d,
                            std::uint64_t seed, const Tolerance& tol);

// Convex mixture of d conjugations by unitaries in M commuting with rho;
// unital, CP and phi-preserving by construction. Requires faithful phi with
// density in M.
KrausChannel random_phi_channel(std::shared_ptr<const AlgebraModel> algebra,
                                const DensityState& phi, Index d, std::uint64_t seed,
                                const Tolerance& tol);

}  // namespace cpcert
