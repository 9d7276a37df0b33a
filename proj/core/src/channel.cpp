#include "cpcert/channel.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace cpcert {

DensityState make_density(const Mat& rho, const Tolerance& tol) {
  if (rho.rows() != rho.cols()) throw ShapeError("density must be square");
  const PsdResult psd = psd_check(rho, tol);
  if (psd.verdict == PsdVerdict::NotPsd)
    throw PreconditionError("density is not positive semidefinite (min eig " +
                            std::to_string(psd.min_eig) + ")");
  const double tr = rho.trace().real();
  if (std::abs(tr - 1.0) > 1e-8)
    throw PreconditionError("density trace must be 1 (got " + std::to_string(tr) + ")");
  DensityState out;
  out.rho = rho;
  out.min_eig = psd.min_eig;
  out.max_eig = psd.max_eig;
  out.faithful = psd.min_eig > tol.rank_tol * std::max(1.0, psd.max_eig);
  return out;
}

KrausChannel::KrausChannel(std::shared_ptr<const AlgebraModel> algebra, std::vector<Mat> kraus,
                           std::string label, const Tolerance& tol, bool require_unital)
    : algebra_(std::move(algebra)), kraus_(std::move(kraus)), label_(std::move(label)) {
  if (!algebra_) throw PreconditionError("channel needs an algebra");
  if (kraus_.empty()) throw PreconditionError("channel needs at least one Kraus operator");
  const Index n = algebra_->carrier_dim();
  for (const Mat& v : kraus_)
    if (v.rows() != n || v.cols() != n)
      throw ShapeError("Kraus operator shape does not match the carrier dimension");
  Mat s = Mat::Zero(n, n);
  for (const Mat& v : kraus_) s += v * v.adjoint();
  unitality_defect_ = (s - Mat::Identity(n, n)).norm();
  if (require_unital && unitality_defect_ > std::max(tol.residual_tol, 1e-9))
    throw PreconditionError("Kraus family is not unital (defect " +
                            std::to_string(unitality_defect_) + ")");
}

Mat KrausChannel::stacked_adjoint() const {
  const Index n = carrier_dim();
  Mat out(kraus_count() * n, n);
  for (Index k = 0; k < kraus_count(); ++k) out.block(k * n, 0, n, n) = kraus_[k].adjoint();
  return out;
}

Mat KrausChannel::row() const {
  const Index n = carrier_dim();
  Mat out(n, kraus_count() * n);
  for (Index k = 0; k < kraus_count(); ++k) out.block(0, k * n, n, n) = kraus_[k];
  return out;
}

Mat KrausChannel::apply(const Mat& x) const {
  const Index n = carrier_dim();
  if (x.rows() != n || x.cols() != n) throw ShapeError("apply: argument must be N x N");
  Mat out = Mat::Zero(n, n);
  for (const Mat& v : kraus_) out += v * x * v.adjoint();
  return out;
}

double channel_distance(const KrausChannel& a, const KrausChannel& b) {
  if (a.carrier_dim() != b.carrier_dim())
    throw ShapeError("channel_distance: carrier dimensions differ");
  double dist = 0;
  for (const Mat& x : a.algebra().basis(SpanKind::Algebra))
    dist = std::max(dist, (a.apply(x) - b.apply(x)).norm());
  return dist;
}

bool is_inner(const KrausChannel& ch, const Tolerance& tol) {
  for (const Mat& v : ch.kraus())
    if (!ch.algebra().membership(v, SpanKind::Algebra, tol).is_member) return false;
  return true;
}

ChoiMatrix to_choi(const KrausChannel& ch) {
  const Index n = ch.carrier_dim();
  Mat c = Mat::Zero(n * n, n * n);
  for (const Mat& v : ch.kraus()) {
    const Vec w = vectorize(v);
    c += w * w.adjoint();
  }
  return ChoiMatrix{std::move(c)};
}

Mat choi_apply(const Mat& choi, const Mat& x) {
  const Index n = x.rows();
  if (x.cols() != n || choi.rows() != n * n || choi.cols() != n * n)
    throw ShapeError("choi_apply: shape mismatch");
  return partial_trace_second(choi * kron(Mat::Identity(n, n), x.transpose()), n, n);
}

KrausChannel from_choi(std::shared_ptr<const AlgebraModel> algebra, const Mat& choi,
                       const Tolerance& tol, std::string label, bool require_unital) {
  const Index n = algebra->carrier_dim();
  if (choi.rows() != n * n || choi.cols() != n * n)
    throw ShapeError("from_choi: Choi matrix must be N^2 x N^2");
  const PsdResult psd = psd_check(choi, tol);
  if (psd.verdict == PsdVerdict::NotPsd)
    throw PreconditionError("from_choi: Choi matrix is not PSD (min eig " +
                            std::to_string(psd.min_eig) + ")");
  if (psd.verdict == PsdVerdict::Indeterminate)
    throw IndeterminateError("from_choi: Choi positivity is indeterminate", {psd.min_eig, psd.max_eig});

  Eigen::SelfAdjointEigenSolver<Mat> es((choi + choi.adjoint()) / 2.0);
  if (es.info() != Eigen::Success) throw NumericalError("from_choi: eigendecomposition failed");
  RealVec lam = es.eigenvalues();  // ascending
  const double lmax = std::max(0.0, lam.maxCoeff());

  // Rank decision with the indeterminate band on the eigenvalue spectrum.
  RealVec desc(lam.size());
  for (Index i = 0; i < lam.size(); ++i) desc[i] = std::max(0.0, lam[lam.size() - 1 - i]);
  const RankDecision rd = decide_rank(desc, tol);
  if (rd.indeterminate)
    throw IndeterminateError("from_choi: Choi rank is indeterminate",
                             std::vector<double>(desc.data(), desc.data() + desc.size()));
  if (rd.rank == 0) throw PreconditionError("from_choi: zero Choi matrix");
  (void)lmax;

  std::vector<Mat> kraus;
  for (Index r = 0; r < rd.rank; ++r) {
    const Index i = lam.size() - 1 - r;  // descending order
    Vec col = es.eigenvectors().col(i);
    // Deterministic phase: largest-magnitude component made real positive.
    Index imax = 0;
    col.cwiseAbs().maxCoeff(&imax);
    const Complex piv = col[imax];
    if (std::abs(piv) > 0) col *= std::conj(piv) / std::abs(piv);
    kraus.push_back(std::sqrt(desc[r]) * devectorize(col, n, n));
  }
  return KrausChannel(std::move(algebra), std::move(kraus), std::move(label), tol, require_unital);
}

// ===========================================================================
// Stinespring support projection and index
// ===========================================================================

namespace {

// Rows of the block-b slice of C^d (x) H, reordered as C^{n_b} (x) C^{m_b d}
// with composite inner index alpha*d + k.
std::vector<Index> block_slice_rows(const AlgebraModel& alg, Index b, Index d) {
  const Index n = alg.spec().blocks[static_cast<size_t>(b)].dim;
  const Index m = alg.spec().blocks[static_cast<size_t>(b)].multiplicity;
  const Index o = alg.block_offset(b);
  const Index big_n = alg.carrier_dim();
  std::vector<Index> rows;
  rows.reserve(static_cast<size_t>(n * m * d));
  for (Index i = 0; i < n; ++i)
    for (Index a = 0; a < m; ++a)
      for (Index k = 0; k < d; ++k) rows.push_back(k * big_n + o + i * m + a);
  return rows;
}

Mat gather(const Mat& a, const std::vector<Index>& rows, const std::vector<Index>& cols) {
  Mat out(static_cast<Index>(rows.size()), static_cast<Index>(cols.size()));
  for (size_t i = 0; i < rows.size(); ++i)
    for (size_t j = 0; j < cols.size(); ++j) out(static_cast<Index>(i), static_cast<Index>(j)) = a(rows[i], cols[j]);
  return out;
}

}  // namespace

StinespringData stinespring_support(const KrausChannel& ch, const Tolerance& tol) {
  const AlgebraModel& alg = ch.algebra();
  const Index n = ch.carrier_dim();
  const Index d = ch.kraus_count();
  const Mat vstar = ch.stacked_adjoint();  // dN x N
  const auto& basis = alg.basis(SpanKind::Algebra);

  // Cyclic spanning set { (I_d (x) x) V^* e_h }.
  Mat span(d * n, static_cast<Index>(basis.size()) * n);
  Index col = 0;
  for (const Mat& x : basis) {
    Mat img(d * n, n);
    for (Index k = 0; k < d; ++k) img.block(k * n, 0, n, n) = x * vstar.block(k * n, 0, n, n);
    span.block(0, col, d * n, n) = img;
    col += n;
  }

  const SpanBasis sb = column_span(span, tol);
  if (sb.indeterminate)
    throw IndeterminateError("stinespring_support: spanning-set rank is indeterminate",
                             std::vector<double>(sb.singular_values.data(),
                                                 sb.singular_values.data() + sb.singular_values.size()));

  StinespringData out;
  out.d = d;
  out.span_spectrum = sb.singular_values;
  out.support_projection = sb.basis * sb.basis.adjoint();

  // Per central block b the slice of P has the form I_{n_b} (x) q_b; the rank
  // of q_b is the multiplicity of block b inside the minimal dilation.
  out.index = 0;
  for (Index b = 0; b < alg.spec().block_count(); ++b) {
    const Index nb = alg.spec().blocks[static_cast<size_t>(b)].dim;
    const Index mb = alg.spec().blocks[static_cast<size_t>(b)].multiplicity;
    const auto rows = block_slice_rows(alg, b, d);
    const Mat pb = gather(out.support_projection, rows, rows);
    const Mat qb = partial_trace_first(pb, nb, mb * d) / static_cast<double>(nb);
    Eigen::SelfAdjointEigenSolver<Mat> es(qb, Eigen::EigenvaluesOnly);
    Index rb = 0;
    for (Index i = 0; i < es.eigenvalues().size(); ++i)
      if (es.eigenvalues()[i] > 0.5) ++rb;  // q_b is a projection
    out.block_ranks.push_back(rb);
    out.index = std::max(out.index, (rb + mb - 1) / mb);
  }
  return out;
}

KrausChannel minimal_kraus(const KrausChannel& ch, const Tolerance& tol) {
  const StinespringData sd = stinespring_support(ch, tol);
  if (sd.index == sd.d) return ch;

  const AlgebraModel& alg = ch.algebra();
  const Index n = ch.carrier_dim();
  const Index d = sd.d;
  const Index ind = sd.index;
  const Mat vstar = ch.stacked_adjoint();

  Mat wstar = Mat::Zero(ind * n, n);
  for (Index b = 0; b < alg.spec().block_count(); ++b) {
    const Index nb = alg.spec().blocks[static_cast<size_t>(b)].dim;
    const Index mb = alg.spec().blocks[static_cast<size_t>(b)].multiplicity;
    const Index o = alg.block_offset(b);
    const auto rows = block_slice_rows(alg, b, d);
    const Mat pb = gather(sd.support_projection, rows, rows);
    const Mat qb = partial_trace_first(pb, nb, mb * d) / static_cast<double>(nb);
    Eigen::SelfAdjointEigenSolver<Mat> es(qb);
    if (es.info() != Eigen::Success) throw NumericalError("minimal_kraus: eigendecomposition failed");

    // Orthonormal basis of range(q_b), deterministic phase.
    std::vector<Index> keep;
    for (Index i = 0; i < es.eigenvalues().size(); ++i)
      if (es.eigenvalues()[i] > 0.5) keep.push_back(i);

    Index j = 0;
    for (Index idx : keep) {
      Vec g = es.eigenvectors().col(idx);
      Index imax = 0;
      g.cwiseAbs().maxCoeff(&imax);
      const Complex piv = g[imax];
      if (std::abs(piv) > 0) g *= std::conj(piv) / std::abs(piv);

      // Contract the slice of V^* against g, then embed slot j into
      // C^{m_b} (x) C^{index} as (alpha', kappa) = (j / index, j % index).
      const Index ap = j / ind;
      const Index kp = j % ind;
      for (Index c = 0; c < n; ++c)
        for (Index i = 0; i < nb; ++i) {
          Complex acc = 0;
          for (Index a = 0; a < mb; ++a)
            for (Index k = 0; k < d; ++k)
              acc += std::conj(g[a * d + k]) * vstar(k * n + o + i * mb + a, c);
          wstar(kp * n + o + i * mb + ap, c) += acc;
        }
      ++j;
    }
  }

  std::vector<Mat> kraus;
  for (Index k = 0; k < ind; ++k) kraus.push_back(wstar.block(k * n, 0, n, n).adjoint());
  KrausChannel out(ch.algebra_ptr(), std::move(kraus), ch.label(), tol);

  const double dist = channel_distance(ch, out);
  if (dist > std::max(tol.residual_tol, 1e-9) * 10)
    throw NumericalError("minimal_kraus: rebuilt family does not reproduce the channel (distance " +
                         std::to_string(dist) + ")");
  return out;
}

CommKernel kraus_comm_kernel(const KrausChannel& ch, const Tolerance& tol) {
  const Index n = ch.carrier_dim();
  const Index d = ch.kraus_count();
  const auto& comm = ch.algebra().basis(SpanKind::Commutant);
  const Index dim_comm = static_cast<Index>(comm.size());

  Mat a(n * n, d * dim_comm);
  for (Index k = 0; k < d; ++k) {
    const Mat vk_star = ch.kraus()[static_cast<size_t>(k)].adjoint();
    for (Index m = 0; m < dim_comm; ++m)
      a.col(k * dim_comm + m) = vectorize(comm[static_cast<size_t>(m)] * vk_star);
  }

  const NullspaceResult ns = nullspace(a, tol);
  CommKernel out;
  out.singular_values = ns.singular_values;
  out.indeterminate = ns.indeterminate;
  for (Index c = 0; c < ns.basis.cols(); ++c) {
    CommKernelElement el;
    for (Index k = 0; k < d; ++k) {
      Mat ck = Mat::Zero(n, n);
      for (Index m = 0; m < dim_comm; ++m)
        ck += ns.basis(k * dim_comm + m, c) * comm[static_cast<size_t>(m)];
      el.coeffs.push_back(std::move(ck));
    }
    out.basis.push_back(std::move(el));
  }
  return out;
}

PhiPreservation is_phi_preserving(const KrausChannel& ch, const DensityState& phi,
                                  const Tolerance& tol) {
  if (phi.rho.rows() != ch.carrier_dim())
    throw ShapeError("is_phi_preserving: state dimension mismatch");
  PhiPreservation out;
  for (const Mat& x : ch.algebra().basis(SpanKind::Algebra)) {
    const Complex lhs = (phi.rho * ch.apply(x)).trace();
    const Complex rhs = (phi.rho * x).trace();
    out.defect = std::max(out.defect, std::abs(lhs - rhs));
  }
  out.preserving = out.defect <= std::max(tol.residual_tol, 1e-9);
  return out;
}

KrausChannel random_channel(std::shared_ptr<const AlgebraModel> algebra, Index d,
                            std::uint64_t seed, const Tolerance& tol) {
  if (d < 1) throw PreconditionError("random_channel: d must be >= 1");
  const Index n = algebra->carrier_dim();
  const Mat vstar = haar_isometry_columns(d * n, n, seed);
  std::vector<Mat> kraus;
  for (Index k = 0; k < d; ++k) kraus.push_back(vstar.block(k * n, 0, n, n).adjoint());
  return KrausChannel(std::move(algebra), std::move(kraus), "random", tol);
}

KrausChannel random_phi_channel(std::shared_ptr<const AlgebraModel> algebra,
                                const DensityState& phi, Index d, std::uint64_t seed,
                                const Tolerance& tol) {
  if (d < 1) throw PreconditionError("random_phi_channel: d must be >= 1");
  if (!phi.faithful) throw PreconditionError("random_phi_channel: state must be faithful");
  if (!algebra->membership(phi.rho, SpanKind::Algebra, tol).is_member)
    throw PreconditionError("random_phi_channel: state density must lie in the algebra");

  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> uphase(0.0, 2.0 * M_PI);
  std::uniform_real_distribution<double> uw(0.1, 1.0);

  // Per-block eigenbases of rho; random phases in those bases give unitaries
  // in M commuting with rho.
  const auto& blocks = algebra->spec().blocks;
  std::vector<Eigen::SelfAdjointEigenSolver<Mat>> eig;
  for (size_t b = 0; b < blocks.size(); ++b) {
    const Index nb = blocks[b].dim;
    const Index mb = blocks[b].multiplicity;
    const Index o = algebra->block_offset(static_cast<Index>(b));
    Mat rb(nb, nb);
    for (Index i = 0; i < nb; ++i)
      for (Index j = 0; j < nb; ++j) rb(i, j) = phi.rho(o + i * mb, o + j * mb);
    eig.emplace_back(rb);
  }

  std::vector<double> weights(static_cast<size_t>(d));
  double wsum = 0;
  for (auto& w : weights) {
    w = uw(gen);
    wsum += w;
  }

  std::vector<Mat> kraus;
  for (Index k = 0; k < d; ++k) {
    std::vector<Mat> ublocks;
    for (size_t b = 0; b < blocks.size(); ++b) {
      const Index nb = blocks[b].dim;
      Vec phases(nb);
      for (Index i = 0; i < nb; ++i) phases[i] = std::exp(Complex(0, uphase(gen)));
      ublocks.push_back(eig[b].eigenvectors() * phases.asDiagonal() *
                        eig[b].eigenvectors().adjoint());
    }
    kraus.push_back(std::sqrt(weights[static_cast<size_t>(k)] / wsum) * algebra->embed(ublocks));
  }
  return KrausChannel(std::move(algebra), std::move(kraus), "random_phi", tol);
}

}  // namespace cpcert
