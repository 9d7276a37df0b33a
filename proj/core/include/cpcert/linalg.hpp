#pragma once

#include <cstdint>

#include "cpcert/types.hpp"

namespace cpcert {

// ===========================================================================
// Factorizations and rank decisions
// ===========================================================================

// a = u * s.asDiagonal() * v.adjoint(); s nonincreasing, u/v column-orthonormal.
struct SvdResult {
  Mat u;
  RealVec s;
  Mat v;
};

SvdResult svd(const Mat& a);

// Largest singular value.
double op_norm(const Mat& a);

struct RankDecision {
  Index rank = 0;
  bool indeterminate = false;
};

// Counts singular values above rank_tol * s_max; indeterminate when any value
// lies inside [rank_tol/band, rank_tol*band] * s_max.
RankDecision decide_rank(const RealVec& singular_values, const Tolerance& tol);

struct NullspaceResult {
  Mat basis;  // orthonormal columns spanning ker(a)
  RealVec singular_values;
  bool indeterminate = false;
};

NullspaceResult nullspace(const Mat& a, const Tolerance& tol);

struct SpanBasis {
  Mat basis;  // orthonormal columns spanning the column span of a
  RealVec singular_values;
  bool indeterminate = false;
};

SpanBasis column_span(const Mat& a, const Tolerance& tol);

// ===========================================================================
// Hermitian matrix functions and positivity
// ===========================================================================

// Q exp(w log lambda) Q^* from the eigendecomposition a = Q diag(lambda) Q^*.
// Integer real powers accept any Hermitian input; fractional nonnegative real
// powers accept PSD input (eigenvalues inside the negative tolerance band are
// clamped to zero); negative or complex powers require strict positivity.
Mat hermitian_power(const Mat& a, Complex w, const Tolerance& tol);

struct PsdResult {
  PsdVerdict verdict = PsdVerdict::Indeterminate;
  double min_eig = 0;
  double max_eig = 0;
  double asymmetry = 0;  // ||a - a^*|| reported before symmetrizing
};

PsdResult psd_check(const Mat& a, const Tolerance& tol);

// ===========================================================================
// Tensor plumbing
// ===========================================================================

Mat kron(const Mat& a, const Mat& b);

// Row-major stacking, so that vectorize(A X B) = kron(A, B.transpose()) * vectorize(X).
Vec vectorize(const Mat& a);
Mat devectorize(const Vec& v, Index rows, Index cols);

// a acts on C^{d1} (x) C^{d2} with the first factor major (index = i*d2 + j).
Mat partial_trace_first(const Mat& a, Index d1, Index d2);
Mat partial_trace_second(const Mat& a, Index d1, Index d2);

// <a,b> = tr(a^* b)
Complex trace_inner(const Mat& a, const Mat& b);

// ===========================================================================
// Seeded samplers
// ===========================================================================

Mat random_gaussian(Index rows, Index cols, std::uint64_t seed);
Mat haar_unitary(Index n, std::uint64_t seed);
// rows >= cols; columns orthonormal, Haar-distributed (QR with phase-fixed R).
Mat haar_isometry_columns(Index rows, Index cols, std::uint64_t seed);
Mat random_psd(Index n, std::uint64_t seed);
// Faithful density: eigenvalues bounded away from zero by `floor` before
// normalization.
Mat random_density(Index n, std::uint64_t seed, double floor = 1e-2);

}  // namespace cpcert
