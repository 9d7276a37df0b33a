#include "cpcert/extremal.hpp"

#include <algorithm>
#include <cmath>

namespace cpcert {

namespace {

std::vector<double> to_std(const RealVec& s) {
  return std::vector<double>(s.data(), s.data() + s.size());
}

Certificate indeterminate_certificate(const IndeterminateError& err, Index d) {
  Certificate cert;
  cert.verdict = Verdict::Indeterminate;
  cert.d = d;
  cert.singular_spectrum =
      Eigen::Map<const RealVec>(err.spectrum().data(), static_cast<Index>(err.spectrum().size()));
  cert.notes.push_back(err.what());
  return cert;
}

}  // namespace

std::vector<Mat> compressed_coefficient_basis(const AlgebraModel& algebra, Index d,
                                              SpanKind coefficients, const Mat& projection,
                                              const Tolerance& tol) {
  const Index n = algebra.carrier_dim();
  const auto& coeff = algebra.basis(coefficients);
  const Index dim_s = static_cast<Index>(coeff.size());
  const bool trivial_p = (projection - Mat::Identity(d * n, d * n)).norm() < 1e-12;

  Mat cols(d * n * d * n, d * d * dim_s);
  Index c = 0;
  for (Index k = 0; k < d; ++k)
    for (Index j = 0; j < d; ++j)
      for (Index m = 0; m < dim_s; ++m) {
        Mat gen = Mat::Zero(d * n, d * n);
        gen.block(k * n, j * n, n, n) = coeff[static_cast<size_t>(m)];
        if (!trivial_p) gen = projection * gen * projection;
        cols.col(c++) = vectorize(gen);
      }

  const SpanBasis sb = column_span(cols, tol);
  if (sb.indeterminate)
    throw IndeterminateError("coefficient-space compression rank is indeterminate",
                             to_std(sb.singular_values));
  std::vector<Mat> out;
  for (Index i = 0; i < sb.basis.cols(); ++i)
    out.push_back(devectorize(sb.basis.col(i), d * n, d * n));
  return out;
}

std::vector<Mat> hermitian_representatives(const std::vector<Mat>& kernel, const Tolerance& tol) {
  if (kernel.empty()) return {};
  const Index dn = kernel.front().rows();
  // Real-linear span of the Hermitian and anti-Hermitian parts.
  Eigen::MatrixXd cols(2 * dn * dn, 2 * static_cast<Index>(kernel.size()));
  Index c = 0;
  for (const Mat& lam : kernel) {
    const Mat h1 = (lam + lam.adjoint()) / 2.0;
    const Mat h2 = (lam - lam.adjoint()) / Complex(0, 2);
    for (const Mat* h : {&h1, &h2}) {
      const Vec v = vectorize(*h);
      cols.col(c).head(dn * dn) = v.real();
      cols.col(c).tail(dn * dn) = v.imag();
      ++c;
    }
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> dec(cols, Eigen::ComputeFullU);
  const Eigen::VectorXd s = dec.singularValues();
  Index rank = 0;
  for (Index i = 0; i < s.size(); ++i)
    if (s[i] > tol.rank_tol * std::max(1.0, s[0])) ++rank;

  std::vector<Mat> out;
  for (Index i = 0; i < rank; ++i) {
    Vec v(dn * dn);
    v.real() = dec.matrixU().col(i).head(dn * dn);
    v.imag() = dec.matrixU().col(i).tail(dn * dn);
    Mat h = devectorize(v, dn, dn);
    h = (h + h.adjoint()) / 2.0;
    const double nrm = op_norm(h);
    if (nrm > 0) h /= nrm;
    out.push_back(std::move(h));
  }
  return out;
}

namespace {

// Kernel of Lambda -> V Lambda V^* restricted to the given coefficient basis.
Certificate kernel_certificate(const KrausChannel& ch, const std::vector<Mat>& basis,
                               Index index, const Tolerance& tol) {
  const Index n = ch.carrier_dim();
  const Index d = ch.kraus_count();
  const Mat v = ch.row();
  const Mat vst = ch.stacked_adjoint();

  Certificate cert;
  cert.d = d;
  cert.index = index;
  if (basis.empty()) {  // no admissible coefficients at all
    cert.verdict = Verdict::Extremal;
    return cert;
  }

  Mat a(n * n, static_cast<Index>(basis.size()));
  for (size_t i = 0; i < basis.size(); ++i) a.col(static_cast<Index>(i)) = vectorize(v * basis[i] * vst);

  const NullspaceResult ns = nullspace(a, tol);
  cert.singular_spectrum = ns.singular_values;
  if (ns.indeterminate) {
    cert.verdict = Verdict::Indeterminate;
    cert.notes.push_back("constraint-system rank falls inside the indeterminate band");
    return cert;
  }

  cert.kernel_dim = ns.basis.cols();
  cert.verdict = cert.kernel_dim == 0 ? Verdict::Extremal : Verdict::NotExtremal;

  if (cert.kernel_dim > 0) {
    std::vector<Mat> kernel;
    for (Index c = 0; c < ns.basis.cols(); ++c) {
      Mat lam = Mat::Zero(d * n, d * n);
      for (size_t i = 0; i < basis.size(); ++i) lam += ns.basis(static_cast<Index>(i), c) * basis[i];
      kernel.push_back(std::move(lam));
    }
    cert.kernel_basis = hermitian_representatives(kernel, tol);
    double worst = 0;
    for (const Mat& h : cert.kernel_basis) worst = std::max(worst, (v * h * vst).norm());
    cert.residuals["kernel_constraint"] = worst;
  }
  return cert;
}

}  // namespace

CpAnalysis analyze_extremality_cp(const KrausChannel& ch, const Tolerance& tol) {
  try {
    KrausChannel reduced = minimal_kraus(ch, tol);
    StinespringData sd = stinespring_support(reduced, tol);
    const auto basis = compressed_coefficient_basis(reduced.algebra(), reduced.kraus_count(),
                                                    SpanKind::Commutant, sd.support_projection, tol);
    Certificate cert = kernel_certificate(reduced, basis, sd.index, tol);
    cert.notes.push_back("kernel condition uses the adjoint form sum_{a,b} v_a c^a_b v_b^* = 0");
    if (reduced.kraus_count() != ch.kraus_count())
      cert.residuals["reduction_distance"] = channel_distance(ch, reduced);
    CpAnalysis out{std::move(reduced), std::move(sd), std::move(cert)};
    return out;
  } catch (const IndeterminateError& err) {
    return CpAnalysis{ch, std::nullopt, indeterminate_certificate(err, ch.kraus_count())};
  }
}

Certificate extremality_cp(const KrausChannel& ch, const Tolerance& tol) {
  return analyze_extremality_cp(ch, tol).certificate;
}

Certificate extremality_choi(const KrausChannel& ch, const Tolerance& tol) {
  const auto& blocks = ch.algebra().spec().blocks;
  if (blocks.size() != 1 || blocks[0].multiplicity != 1)
    throw PreconditionError("extremality_choi needs a single block of multiplicity 1");
  try {
    const KrausChannel reduced = minimal_kraus(ch, tol);
    const Index n = reduced.carrier_dim();
    const Index d = reduced.kraus_count();

    Mat a(n * n, d * d);
    for (Index k = 0; k < d; ++k)
      for (Index j = 0; j < d; ++j)
        a.col(k * d + j) =
            vectorize(reduced.kraus()[static_cast<size_t>(k)] * reduced.kraus()[static_cast<size_t>(j)].adjoint());

    const NullspaceResult ns = nullspace(a, tol);
    Certificate cert;
    cert.d = d;
    cert.index = d;
    cert.singular_spectrum = ns.singular_values;
    if (ns.indeterminate) {
      cert.verdict = Verdict::Indeterminate;
      cert.notes.push_back("product-family rank falls inside the indeterminate band");
      return cert;
    }
    cert.kernel_dim = ns.basis.cols();
    cert.verdict = cert.kernel_dim == 0 ? Verdict::Extremal : Verdict::NotExtremal;
    if (cert.kernel_dim > 0) {
      std::vector<Mat> kernel;
      for (Index c = 0; c < ns.basis.cols(); ++c) {
        Mat lam = Mat::Zero(d * n, d * n);
        for (Index k = 0; k < d; ++k)
          for (Index j = 0; j < d; ++j)
            lam.block(k * n, j * n, n, n) = ns.basis(k * d + j, c) * Mat::Identity(n, n);
        kernel.push_back(std::move(lam));
      }
      cert.kernel_basis = hermitian_representatives(kernel, tol);
      const Mat v = reduced.row();
      const Mat vst = reduced.stacked_adjoint();
      double worst = 0;
      for (const Mat& h : cert.kernel_basis) worst = std::max(worst, (v * h * vst).norm());
      cert.residuals["kernel_constraint"] = worst;
    }
    cert.notes.push_back("scalar product-family independence test");
    return cert;
  } catch (const IndeterminateError& err) {
    return indeterminate_certificate(err, ch.kraus_count());
  }
}

Certificate extremality_inner_center(const KrausChannel& ch, const Tolerance& tol) {
  if (!is_inner(ch, tol))
    throw PreconditionError("extremality_inner_center requires Kraus operators inside the algebra");
  try {
    KrausChannel reduced = minimal_kraus(ch, tol);
    if (!is_inner(reduced, tol)) reduced = ch;  // reduction may leave M; fall back
    const StinespringData sd = stinespring_support(reduced, tol);
    const auto basis = compressed_coefficient_basis(reduced.algebra(), reduced.kraus_count(),
                                                    SpanKind::Center, sd.support_projection, tol);
    Certificate cert = kernel_certificate(reduced, basis, sd.index, tol);
    cert.notes.push_back("coefficients restricted to the center");
    return cert;
  } catch (const IndeterminateError& err) {
    return indeterminate_certificate(err, ch.kraus_count());
  }
}

std::pair<KrausChannel, KrausChannel> decompose_cp(const KrausChannel& reduced,
                                                   const Mat& hermitian_kernel,
                                                   const Tolerance& tol) {
  const Index n = reduced.carrier_dim();
  const Index d = reduced.kraus_count();
  if (hermitian_kernel.rows() != d * n || hermitian_kernel.cols() != d * n)
    throw ShapeError("decompose_cp: kernel element must act on the dilation space");
  Mat lam = (hermitian_kernel + hermitian_kernel.adjoint()) / 2.0;
  if ((lam - hermitian_kernel).norm() > tol.residual_tol * std::max(1.0, lam.norm()))
    throw PreconditionError("decompose_cp: kernel element must be Hermitian");
  const double nrm = op_norm(lam);
  if (nrm > 1.0) lam /= nrm;  // spec scaling ||Lambda|| = 1

  const Mat v = reduced.row();
  const Mat vst = reduced.stacked_adjoint();
  const double resid = (v * lam * vst).norm();
  if (resid > std::max(tol.residual_tol, 1e-9) * 100)
    throw PreconditionError("decompose_cp: element is not in the kernel (residual " +
                            std::to_string(resid) + ")");

  const Mat eye = Mat::Identity(d * n, d * n);
  std::pair<KrausChannel, KrausChannel> out{reduced, reduced};
  bool first = true;
  for (const double sign : {-1.0, +1.0}) {
    const Mat w = hermitian_power(eye + sign * lam, 0.5, tol);
    const Mat ustar = w * vst;
    std::vector<Mat> kraus;
    for (Index k = 0; k < d; ++k) kraus.push_back(ustar.block(k * n, 0, n, n).adjoint());
    KrausChannel part(reduced.algebra_ptr(), std::move(kraus),
                      reduced.label() + (sign > 0 ? "+" : "-"), tol);
    (first ? out.first : out.second) = std::move(part);
    first = false;
  }
  return out;
}

RNDerivative radon_nikodym(const KrausChannel& eta, const KrausChannel& tau, double c,
                           const Tolerance& tol) {
  if (c <= 0) throw PreconditionError("radon_nikodym: domination constant must be positive");
  if (eta.carrier_dim() != tau.carrier_dim())
    throw ShapeError("radon_nikodym: carrier dimensions differ");

  RNDerivative out;
  out.domination_constant = c;

  KrausChannel reduced = minimal_kraus(tau, tol);
  if (reduced.kraus_count() != tau.kraus_count())
    out.notes.push_back("tau was reduced to its minimal Kraus family first");

  // Complete domination: Choi(c tau - eta) PSD. Stronger than positivity-only
  // domination; the note records which condition was checked.
  const Mat dom = c * to_choi(reduced).matrix - to_choi(eta).matrix;
  const PsdResult dom_psd = psd_check(dom, tol);
  if (dom_psd.verdict == PsdVerdict::NotPsd)
    throw PreconditionError("radon_nikodym: complete domination c*tau - eta >= 0 fails (min eig " +
                            std::to_string(dom_psd.min_eig) + ")");
  if (dom_psd.verdict == PsdVerdict::Indeterminate)
    throw IndeterminateError("radon_nikodym: domination check is indeterminate",
                             {dom_psd.min_eig, dom_psd.max_eig});
  out.notes.push_back("domination verified as Choi(c*tau - eta) >= 0 (complete domination)");

  const StinespringData sd = stinespring_support(reduced, tol);
  const auto basis = compressed_coefficient_basis(reduced.algebra(), reduced.kraus_count(),
                                                  SpanKind::Commutant, sd.support_projection, tol);
  const Index n = reduced.carrier_dim();
  const Index d = reduced.kraus_count();
  out.d = d;
  const Mat v = reduced.row();
  const Mat vst = reduced.stacked_adjoint();
  const auto& alg_basis = reduced.algebra().basis(SpanKind::Algebra);

  Mat a(n * n * static_cast<Index>(alg_basis.size()), static_cast<Index>(basis.size()));
  Vec rhs(a.rows());
  Index roff = 0;
  for (const Mat& x : alg_basis) {
    const Mat pix = kron(Mat::Identity(d, d), x);
    for (size_t i = 0; i < basis.size(); ++i)
      a.block(roff, static_cast<Index>(i), n * n, 1) = vectorize(v * pix * basis[i] * vst);
    rhs.segment(roff, n * n) = vectorize(eta.apply(x));
    roff += n * n;
  }

  Eigen::JacobiSVD<Mat> dec(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  out.singular_spectrum = dec.singularValues();
  const RankDecision rd = decide_rank(out.singular_spectrum, tol);
  if (rd.rank < static_cast<Index>(basis.size()))
    throw NumericalError("radon_nikodym: reconstruction system is rank-deficient; this contradicts minimality");
  const Vec coef = dec.solve(rhs);
  out.reconstruction_residual = (a * coef - rhs).norm();
  if (out.reconstruction_residual > std::max(tol.residual_tol, 1e-8) * 100)
    throw PreconditionError("radon_nikodym: eta is not representable over tau's dilation (residual " +
                            std::to_string(out.reconstruction_residual) + ")");

  Mat t = Mat::Zero(d * n, d * n);
  for (size_t i = 0; i < basis.size(); ++i) t += coef[static_cast<Index>(i)] * basis[i];
  out.t = (t + t.adjoint()) / 2.0;
  out.psd = psd_check(out.t, tol);
  out.max_eig = out.psd.max_eig;
  out.identity_distance = (out.t - sd.support_projection).norm();
  return out;
}

IntertwinerResult intertwiner(const KrausChannel& v_family, const KrausChannel& w_family,
                              const Tolerance& tol) {
  IntertwinerResult out;
  if (v_family.carrier_dim() != w_family.carrier_dim()) {
    out.failure_reason = "carrier dimensions differ";
    return out;
  }
  if (v_family.kraus_count() != w_family.kraus_count()) {
    out.failure_reason = "Kraus cardinalities differ (inconsistent minimality)";
    return out;
  }
  const double dist = channel_distance(v_family, w_family);
  if (dist > std::max(tol.residual_tol, 1e-9) * 100) {
    out.failure_reason = "channels differ (distance " + std::to_string(dist) + ")";
    return out;
  }

  const Index n = v_family.carrier_dim();
  const Index d = v_family.kraus_count();
  const auto& comm = v_family.algebra().basis(SpanKind::Commutant);
  const Index dim_comm = static_cast<Index>(comm.size());

  Mat a(n * n, d * dim_comm);
  for (Index j = 0; j < d; ++j) {
    const Mat wj_star = w_family.kraus()[static_cast<size_t>(j)].adjoint();
    for (Index m = 0; m < dim_comm; ++m)
      a.col(j * dim_comm + m) = vectorize(comm[static_cast<size_t>(m)] * wj_star);
  }
  Eigen::JacobiSVD<Mat> dec(a, Eigen::ComputeThinU | Eigen::ComputeThinV);

  out.lambda = Mat::Zero(d * n, d * n);
  double resid = 0;
  for (Index k = 0; k < d; ++k) {
    const Vec rhs = vectorize(v_family.kraus()[static_cast<size_t>(k)].adjoint());
    const Vec coef = dec.solve(rhs);
    resid = std::max(resid, (a * coef - rhs).norm());
    for (Index j = 0; j < d; ++j) {
      Mat lkj = Mat::Zero(n, n);
      for (Index m = 0; m < dim_comm; ++m) lkj += coef[j * dim_comm + m] * comm[static_cast<size_t>(m)];
      out.lambda.block(k * n, j * n, n, n) = lkj;
    }
  }
  out.residual = resid;
  if (resid > std::max(tol.residual_tol, 1e-9) * 100) {
    out.failure_reason = "no solution over the commutant (inconsistent minimality)";
    return out;
  }
  out.unitarity_defect =
      (out.lambda * out.lambda.adjoint() - Mat::Identity(d * n, d * n)).norm();
  out.found = true;
  return out;
}

std::vector<Mat> operator_system_basis(const KrausChannel& ch, const Tolerance& tol) {
  const Index n = ch.carrier_dim();
  const Index d = ch.kraus_count();
  const auto& comm = ch.algebra().basis(SpanKind::Commutant);

  Mat cols(n * n, d * d * static_cast<Index>(comm.size()));
  Index c = 0;
  for (Index i = 0; i < d; ++i)
    for (Index j = 0; j < d; ++j)
      for (const Mat& e : comm)
        cols.col(c++) = vectorize(ch.kraus()[static_cast<size_t>(i)] * e *
                                  ch.kraus()[static_cast<size_t>(j)].adjoint());

  const SpanBasis sb = column_span(cols, tol);
  if (sb.indeterminate)
    throw IndeterminateError("operator_system_basis: span rank is indeterminate",
                             to_std(sb.singular_values));
  std::vector<Mat> out;
  for (Index i = 0; i < sb.basis.cols(); ++i) out.push_back(devectorize(sb.basis.col(i), n, n));
  return out;
}

}  // namespace cpcert
