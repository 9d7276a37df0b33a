#include "cpcert/algebra.hpp"

#include <cmath>

namespace cpcert {

void AlgebraSpec::validate() const {
  if (blocks.empty()) throw PreconditionError("algebra spec needs at least one block");
  for (const auto& b : blocks)
    if (b.dim < 1 || b.multiplicity < 1)
      throw PreconditionError("algebra block dims and multiplicities must be >= 1");
}

AlgebraModel AlgebraModel::build(const AlgebraSpec& spec) {
  spec.validate();
  AlgebraModel model;
  model.spec_ = spec;
  model.dim_ = spec.carrier_dim();
  const Index n_total = model.dim_;

  Index off = 0;
  for (const auto& blk : spec.blocks) {
    model.offsets_.push_back(off);
    off += blk.dim * blk.multiplicity;
  }

  for (size_t b = 0; b < spec.blocks.size(); ++b) {
    const Index n = spec.blocks[b].dim;
    const Index m = spec.blocks[b].multiplicity;
    const Index o = model.offsets_[b];

    // M basis: (E_ij ⊗ I_m)/sqrt(m), row-major over (i,j).
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < n; ++j) {
        Mat e = Mat::Zero(n_total, n_total);
        for (Index a = 0; a < m; ++a) e(o + i * m + a, o + j * m + a) = 1.0 / std::sqrt(double(m));
        model.basis_m_.push_back(std::move(e));
      }

    // Commutant basis: (I_n ⊗ F_ab)/sqrt(n), row-major over (a,b).
    for (Index a = 0; a < m; ++a)
      for (Index c = 0; c < m; ++c) {
        Mat e = Mat::Zero(n_total, n_total);
        for (Index i = 0; i < n; ++i) e(o + i * m + a, o + i * m + c) = 1.0 / std::sqrt(double(n));
        model.basis_comm_.push_back(std::move(e));
      }

    // Center basis: normalized block identity. Block projections: unnormalized.
    Mat p = Mat::Zero(n_total, n_total);
    for (Index k = 0; k < n * m; ++k) p(o + k, o + k) = 1.0;
    model.basis_center_.push_back(p / std::sqrt(double(n * m)));
    model.block_projections_.push_back(std::move(p));
  }
  return model;
}

const std::vector<Mat>& AlgebraModel::basis(SpanKind which) const {
  switch (which) {
    case SpanKind::Algebra: return basis_m_;
    case SpanKind::Commutant: return basis_comm_;
    case SpanKind::Center: return basis_center_;
  }
  return basis_m_;
}

Mat AlgebraModel::embed(const std::vector<Mat>& block_elements) const {
  if (block_elements.size() != spec_.blocks.size())
    throw ShapeError("embed: one element per block required");
  Mat out = Mat::Zero(dim_, dim_);
  for (size_t b = 0; b < spec_.blocks.size(); ++b) {
    const Index n = spec_.blocks[b].dim;
    const Index m = spec_.blocks[b].multiplicity;
    const Mat& x = block_elements[b];
    if (x.rows() != n || x.cols() != n)
      throw ShapeError("embed: block element has wrong shape");
    const Index o = offsets_[b];
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < n; ++j)
        for (Index a = 0; a < m; ++a) out(o + i * m + a, o + j * m + a) = x(i, j);
  }
  return out;
}

Mat AlgebraModel::project(const Mat& x, SpanKind which) const {
  if (x.rows() != dim_ || x.cols() != dim_) throw ShapeError("project: matrix must be N x N");
  Mat out = Mat::Zero(dim_, dim_);
  for (const Mat& e : basis(which)) out += trace_inner(e, x) * e;
  return out;
}

AlgebraModel::Membership AlgebraModel::membership(const Mat& x, SpanKind which,
                                                  const Tolerance& tol) const {
  Membership out;
  out.distance = (x - project(x, which)).norm();
  out.is_member = out.distance <= tol.residual_tol * std::max(1.0, x.norm());
  return out;
}

}  // namespace cpcert
