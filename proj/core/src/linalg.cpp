#include "cpcert/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace cpcert {

namespace {

void require_finite(const RealVec& s, const char* where) {
  for (Index i = 0; i < s.size(); ++i)
    if (!std::isfinite(s[i])) throw NumericalError(std::string(where) + ": factorization produced non-finite values");
}


}  // namespace

SvdResult svd(const Mat& a) {
  Eigen::JacobiSVD<Mat> dec(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
  if (dec.info() != Eigen::Success)
    throw NumericalError("svd: factorization did not converge");
  SvdResult out{dec.matrixU(), dec.singularValues(), dec.matrixV()};
  require_finite(out.s, "svd");
  return out;
}

double op_norm(const Mat& a) {
  if (a.size() == 0) return 0.0;
  Eigen::JacobiSVD<Mat> dec(a);
  return dec.singularValues().size() ? dec.singularValues()[0] : 0.0;
}

RankDecision decide_rank(const RealVec& s, const Tolerance& tol) {
  tol.validate();
  RankDecision out;
  if (s.size() == 0) return out;
  const double smax = s[0];
  if (smax <= 0) return out;  // identically zero matrix: rank 0, no ambiguity
  const double cut = tol.rank_tol * smax;
  const double lo = cut / tol.indeterminate_band;
  const double hi = cut * tol.indeterminate_band;
  for (Index i = 0; i < s.size(); ++i) {
    if (s[i] > cut) ++out.rank;
    if (s[i] >= lo && s[i] <= hi) out.indeterminate = true;
  }
  return out;
}

NullspaceResult nullspace(const Mat& a, const Tolerance& tol) {
  Eigen::JacobiSVD<Mat> dec(a, Eigen::ComputeFullV);
  if (dec.info() != Eigen::Success)
    throw NumericalError("nullspace: factorization did not converge");
  RealVec s = RealVec::Zero(a.cols());
  s.head(dec.singularValues().size()) = dec.singularValues();
  require_finite(s, "nullspace");
  const RankDecision rd = decide_rank(s, tol);
  NullspaceResult out;
  out.singular_values = s;
  out.indeterminate = rd.indeterminate;
  const Index nullity = a.cols() - rd.rank;
  out.basis = dec.matrixV().rightCols(nullity);
  return out;
}

SpanBasis column_span(const Mat& a, const Tolerance& tol) {
  Eigen::JacobiSVD<Mat> dec(a, Eigen::ComputeFullU);
  if (dec.info() != Eigen::Success)
    throw NumericalError("column_span: factorization did not converge");
  const RealVec s = dec.singularValues();
  require_finite(s, "column_span");
  const RankDecision rd = decide_rank(s, tol);
  SpanBasis out;
  out.singular_values = s;
  out.indeterminate = rd.indeterminate;
  out.basis = dec.matrixU().leftCols(rd.rank);
  return out;
}

Mat hermitian_power(const Mat& a, Complex w, const Tolerance& tol) {
  if (a.rows() != a.cols()) throw ShapeError("hermitian_power: matrix must be square");
  const double scale = a.norm();
  const double asym = (a - a.adjoint()).norm();
  if (asym > tol.residual_tol * std::max(1.0, scale))
    throw PreconditionError("hermitian_power: input is not Hermitian (asymmetry " + std::to_string(asym) + ")");

  Eigen::SelfAdjointEigenSolver<Mat> es((a + a.adjoint()) / 2.0);
  if (es.info() != Eigen::Success)
    throw NumericalError("hermitian_power: eigendecomposition did not converge");
  const RealVec& lam = es.eigenvalues();
  const Mat& q = es.eigenvectors();
  const double lmax = lam.size() ? lam.cwiseAbs().maxCoeff() : 0.0;

  const bool integer_power =
      w.imag() == 0.0 && std::abs(w.real() - std::round(w.real())) < 1e-12 && w.real() >= 0;
  const bool fractional_nonneg = w.imag() == 0.0 && w.real() >= 0 && !integer_power;
  const bool needs_strict = w.imag() != 0.0 || w.real() < 0.0;

  Vec f(lam.size());
  for (Index i = 0; i < lam.size(); ++i) {
    double x = lam[i];
    if (integer_power) {
      f[i] = std::pow(Complex(x, 0.0), static_cast<int>(std::llround(w.real())));
      continue;
    }
    if (needs_strict) {
      if (x <= tol.rank_tol * std::max(1.0, lmax))
        throw PreconditionError("hermitian_power: negative/complex power requires a strictly positive matrix");
    } else if (fractional_nonneg) {
      if (x < -tol.rank_tol * std::max(1.0, lmax))
        throw PreconditionError("hermitian_power: fractional power of a non-PSD matrix");
      if (x < 0) x = 0;  // clamp roundoff negatives
      if (x == 0) { f[i] = 0.0; continue; }
    }
    f[i] = std::exp(w * std::log(x));
  }
  return q * f.asDiagonal() * q.adjoint();
}

PsdResult psd_check(const Mat& a, const Tolerance& tol) {
  if (a.rows() != a.cols()) throw ShapeError("psd_check: matrix must be square");
  PsdResult out;
  out.asymmetry = (a - a.adjoint()).norm();
  if (out.asymmetry > tol.residual_tol * std::max(1.0, a.norm()))
    throw PreconditionError("psd_check: input is not Hermitian within tolerance (asymmetry " +
                            std::to_string(out.asymmetry) + ")");
  Eigen::SelfAdjointEigenSolver<Mat> es((a + a.adjoint()) / 2.0, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success)
    throw NumericalError("psd_check: eigendecomposition did not converge");
  const RealVec& lam = es.eigenvalues();
  out.min_eig = lam.minCoeff();
  out.max_eig = lam.maxCoeff();
  const double scale = std::max(1.0, out.max_eig);
  const double cut = tol.rank_tol * scale;
  if (out.min_eig > -cut / tol.indeterminate_band)
    out.verdict = PsdVerdict::Psd;
  else if (out.min_eig < -cut * tol.indeterminate_band)
    out.verdict = PsdVerdict::NotPsd;
  else
    out.verdict = PsdVerdict::Indeterminate;
  return out;
}

Mat kron(const Mat& a, const Mat& b) {
  Mat out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Index i = 0; i < a.rows(); ++i)
    for (Index k = 0; k < a.cols(); ++k)
      out.block(i * b.rows(), k * b.cols(), b.rows(), b.cols()) = a(i, k) * b;
  return out;
}

Vec vectorize(const Mat& a) {
  Vec v(a.size());
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j) v[i * a.cols() + j] = a(i, j);
  return v;
}

Mat devectorize(const Vec& v, Index rows, Index cols) {
  if (v.size() != rows * cols) throw ShapeError("devectorize: size mismatch");
  Mat a(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) a(i, j) = v[i * cols + j];
  return a;
}

Mat partial_trace_first(const Mat& a, Index d1, Index d2) {
  if (a.rows() != d1 * d2 || a.cols() != d1 * d2)
    throw ShapeError("partial_trace_first: dimension mismatch");
  Mat out = Mat::Zero(d2, d2);
  for (Index i = 0; i < d1; ++i)
    for (Index j = 0; j < d2; ++j)
      for (Index l = 0; l < d2; ++l) out(j, l) += a(i * d2 + j, i * d2 + l);
  return out;
}

Mat partial_trace_second(const Mat& a, Index d1, Index d2) {
  if (a.rows() != d1 * d2 || a.cols() != d1 * d2)
    throw ShapeError("partial_trace_second: dimension mismatch");
  Mat out = Mat::Zero(d1, d1);
  for (Index i = 0; i < d1; ++i)
    for (Index k = 0; k < d1; ++k)
      for (Index j = 0; j < d2; ++j) out(i, k) += a(i * d2 + j, k * d2 + j);
  return out;
}

Complex trace_inner(const Mat& a, const Mat& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw ShapeError("trace_inner: shape mismatch");
  return (a.adjoint() * b).trace();
}

Mat random_gaussian(Index rows, Index cols, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> dist(0.0, 1.0);
  Mat out(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) {
      const double re = dist(gen);
      const double im = dist(gen);
      out(i, j) = Complex(re, im);
    }
  return out;
}

Mat haar_isometry_columns(Index rows, Index cols, std::uint64_t seed) {
  if (rows < cols) throw ShapeError("haar_isometry_columns: rows < cols");
  const Mat g = random_gaussian(rows, cols, seed);
  Eigen::HouseholderQR<Mat> qr(g);
  Mat q = qr.householderQ() * Mat::Identity(rows, cols);
  const Mat r = qr.matrixQR().topRows(cols).triangularView<Eigen::Upper>();
  // Fix the phase of R's diagonal so the distribution is Haar.
  for (Index j = 0; j < cols; ++j) {
    const Complex d = r(j, j);
    const double ad = std::abs(d);
    q.col(j) *= (ad > 0 ? d / ad : Complex(1, 0));
  }
  return q;
}

Mat haar_unitary(Index n, std::uint64_t seed) { return haar_isometry_columns(n, n, seed); }

Mat random_psd(Index n, std::uint64_t seed) {
  const Mat g = random_gaussian(n, n, seed);
  return g * g.adjoint();
}

Mat random_density(Index n, std::uint64_t seed, double floor) {
  Mat rho = random_psd(n, seed) + floor * static_cast<double>(n) * Mat::Identity(n, n);
  rho /= rho.trace().real();
  return rho;
}

}  // namespace cpcert
