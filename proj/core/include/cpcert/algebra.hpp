#pragma once

#include <vector>

#include "cpcert/linalg.hpp"
#include "cpcert/types.hpp"

namespace cpcert {

struct Block {
  Index dim = 0;          // n_b
  Index multiplicity = 0; // m_b
};

struct AlgebraSpec {
  std::vector<Block> blocks;

  Index carrier_dim() const {
    Index n = 0;
    for (const auto& b : blocks) n += b.dim * b.multiplicity;
    return n;
  }
  Index block_count() const { return static_cast<Index>(blocks.size()); }
  bool multiplicity_free() const {
    for (const auto& b : blocks)
      if (b.multiplicity != 1) return false;
    return true;
  }
  void validate() const;
};

enum class SpanKind { Algebra, Commutant, Center };

// Finite-dimensional von Neumann algebra M = ⊕_b M_{n_b} ⊗ I_{m_b} acting on
// H = ⊕_b C^{n_b} ⊗ C^{m_b}, with trace-orthonormal bases of M, its commutant
// M' = ⊕_b I_{n_b} ⊗ M_{m_b} and its center. Basis ordering is part of the
// file-format contract: blocks in spec order, matrix units row-major within a
// block. Within a block the carrier index is i*m_b + alpha (matrix-unit index
// major, multiplicity minor).
class AlgebraModel {
 public:
  static AlgebraModel build(const AlgebraSpec& spec);

  const AlgebraSpec& spec() const { return spec_; }
  Index carrier_dim() const { return dim_; }
  Index block_offset(Index b) const { return offsets_.at(static_cast<size_t>(b)); }

  const std::vector<Mat>& basis(SpanKind which) const;
  const std::vector<Mat>& block_projections() const { return block_projections_; }

  // Block-diagonal embedding ⊕_b (x_b ⊗ I_{m_b}); one n_b x n_b matrix per block.
  Mat embed(const std::vector<Mat>& block_elements) const;

  // Trace-orthogonal projection onto the span of the chosen basis.
  Mat project(const Mat& x, SpanKind which) const;

  struct Membership {
    bool is_member = false;
    double distance = 0;
  };
  Membership membership(const Mat& x, SpanKind which, const Tolerance& tol) const;

 private:
  AlgebraSpec spec_;
  Index dim_ = 0;
  std::vector<Index> offsets_;
  std::vector<Mat> basis_m_, basis_comm_, basis_center_, block_projections_;
};

}  // namespace cpcert
