#include <doctest.h>

#include <cpcert/extremal.hpp>

#include "test_support.hpp"

using namespace cpcert;
using namespace cpcert::testing;

namespace {
const Tolerance kTol{};
}

TEST_SUITE("extremal") {

TEST_CASE("identity channel is extremal") {
  auto alg = full_block(2);
  KrausChannel id(alg, {Mat::Identity(2, 2)}, "id", kTol);
  const Certificate cert = extremality_cp(id, kTol);
  CHECK(cert.verdict == Verdict::Extremal);
  CHECK(cert.kernel_dim == 0);
}

TEST_CASE("pinching is not extremal with kernel dimension 2") {
  const auto analysis = analyze_extremality_cp(pinching_m2(kTol), kTol);
  const Certificate& cert = analysis.certificate;
  CHECK(cert.verdict == Verdict::NotExtremal);
  CHECK(cert.kernel_dim == 2);
  REQUIRE_FALSE(cert.kernel_basis.empty());
  CHECK(cert.residuals.at("kernel_constraint") <= kTol.residual_tol);
  // witnesses are Hermitian with unit operator norm
  for (const Mat& h : cert.kernel_basis) {
    CHECK((h - h.adjoint()).norm() <= 1e-12);
    CHECK(std::abs(op_norm(h) - 1.0) <= 1e-10);
  }
}

TEST_CASE("dual amplitude damping is extremal") {
  for (double g : {0.3, 0.5, 0.7}) {
    const Certificate cert = extremality_cp(dual_amplitude_damping(g, kTol), kTol);
    CHECK(cert.verdict == Verdict::Extremal);
  }
}

TEST_CASE("choi criterion: unitary, two-unitary mixture, pinching") {
  auto alg = full_block(2);
  const Mat u = haar_unitary(2, 3);
  KrausChannel uc(alg, {u}, "u", kTol);
  CHECK(extremality_choi(uc, kTol).verdict == Verdict::Extremal);

  const Mat w = haar_unitary(2, 4);
  const Certificate mix = extremality_choi(mix_two_unitaries(u, w, kTol), kTol);
  CHECK(mix.verdict == Verdict::NotExtremal);
  CHECK(mix.kernel_dim >= 1);

  CHECK(extremality_choi(pinching_m2(kTol), kTol).verdict == Verdict::NotExtremal);

  auto blocky = make_algebra({Block{2, 2}});
  const KrausChannel bad = random_channel(blocky, 1, 5, kTol);
  CHECK_THROWS_AS(extremality_choi(bad, kTol), PreconditionError);
}

TEST_CASE("choi and commutant tests agree on random single-block channels") {
  for (Index n : {2, 3}) {
    auto alg = full_block(n);
    for (Index d = 1; d <= 4; ++d) {
      for (std::uint64_t s = 0; s < 5; ++s) {
        const KrausChannel ch =
            random_channel(alg, d, 1000 + static_cast<std::uint64_t>(100 * n + 10 * d) + s, kTol);
        CHECK(extremality_cp(ch, kTol).verdict == extremality_choi(ch, kTol).verdict);
      }
    }
  }
}

TEST_CASE("conjugation invariance of the verdict") {
  const KrausChannel pinch = pinching_m2(kTol);
  const KrausChannel ad = dual_amplitude_damping(0.4, kTol);
  for (std::uint64_t s : {1, 2, 3}) {
    const Mat u = haar_unitary(2, 600 + s);
    for (const KrausChannel* ch : {&pinch, &ad}) {
      std::vector<Mat> conj;
      for (const Mat& v : ch->kraus()) conj.push_back(u * v * u.adjoint());
      KrausChannel rotated(ch->algebra_ptr(), conj, "rotated", kTol);
      CHECK(extremality_cp(rotated, kTol).verdict == extremality_cp(*ch, kTol).verdict);
    }
  }
}

TEST_CASE("inner-center test") {
  // single block: center = commutant, identical verdicts
  auto alg = full_block(2);
  const KrausChannel pinch = pinching_m2(kTol);
  CHECK(extremality_inner_center(pinch, kTol).verdict ==
        extremality_cp(pinch, kTol).verdict);
  KrausChannel id(alg, {Mat::Identity(2, 2)}, "id", kTol);
  CHECK(extremality_inner_center(id, kTol).verdict == Verdict::Extremal);

  // abelian identity
  auto abelian = make_algebra({Block{1, 1}, Block{1, 1}});
  KrausChannel aid(abelian, {Mat::Identity(2, 2)}, "id", kTol);
  CHECK(extremality_inner_center(aid, kTol).verdict == Verdict::Extremal);

  // per-block unitary conjugation on [(2,1),(2,1)]
  auto two_blocks = make_algebra({Block{2, 1}, Block{2, 1}});
  const Mat u1 = haar_unitary(2, 71), u2 = haar_unitary(2, 72);
  KrausChannel per_block(two_blocks, {two_blocks->embed({u1, u2})}, "u1+u2", kTol);
  CHECK(extremality_inner_center(per_block, kTol).verdict == Verdict::Extremal);

  // non-inner input is rejected
  const Mat off = haar_unitary(4, 73);  // mixes the two blocks
  KrausChannel non_inner(two_blocks, {off}, "non_inner", kTol);
  CHECK_THROWS_AS(extremality_inner_center(non_inner, kTol), PreconditionError);
}

TEST_CASE("extremality on an algebra with multiplicity") {
  auto alg = make_algebra({Block{2, 2}});
  // inner unitary conjugation: extremal
  const Mat u = kron(haar_unitary(2, 85), Mat::Identity(2, 2));
  KrausChannel uc(alg, {u}, "inner_u", kTol);
  CHECK(extremality_cp(uc, kTol).verdict == Verdict::Extremal);
  CHECK(extremality_inner_center(uc, kTol).verdict == Verdict::Extremal);

  // two-projection pinching lifted to M_2 (x) I_2: not extremal, and the
  // witness decomposes it within the unital CP maps
  KrausChannel pinch(alg, {alg->embed({unit(2, 0, 0)}), alg->embed({unit(2, 1, 1)})},
                     "lifted_pinching", kTol);
  const auto analysis = analyze_extremality_cp(pinch, kTol);
  CHECK(analysis.certificate.verdict == Verdict::NotExtremal);
  REQUIRE_FALSE(analysis.certificate.kernel_basis.empty());
  const auto [plus, minus] =
      decompose_cp(analysis.reduced, analysis.certificate.kernel_basis.front(), kTol);
  double resid = 0;
  for (const Mat& x : alg->basis(SpanKind::Algebra))
    resid = std::max(resid,
                     (0.5 * (plus.apply(x) + minus.apply(x)) - analysis.reduced.apply(x)).norm());
  CHECK(resid <= 1e-9);
  CHECK(psd_check(to_choi(plus).matrix, kTol).verdict == PsdVerdict::Psd);
}

TEST_CASE("decompose_cp splits the pinching into id and AdZ") {
  const auto analysis = analyze_extremality_cp(pinching_m2(kTol), kTol);
  REQUIRE(analysis.certificate.verdict == Verdict::NotExtremal);

  // hand-picked Hermitian kernel element: lambda^1_2 = lambda^2_1 = 1
  Mat lam = Mat::Zero(4, 4);
  lam.block(0, 2, 2, 2) = Mat::Identity(2, 2);
  lam.block(2, 0, 2, 2) = Mat::Identity(2, 2);
  const auto [plus, minus] = decompose_cp(analysis.reduced, lam, kTol);

  // average returns the pinching
  double avg_dist = 0;
  for (const Mat& x : analysis.reduced.algebra().basis(SpanKind::Algebra))
    avg_dist = std::max(avg_dist,
                        (0.5 * (plus.apply(x) + minus.apply(x)) - analysis.reduced.apply(x)).norm());
  CHECK(avg_dist <= 1e-9);
  CHECK(channel_distance(plus, minus) > 0.1);

  // this particular split is { AdZ, id }
  auto alg = full_block(2);
  Mat z = Mat::Zero(2, 2);
  z(0, 0) = 1.0;
  z(1, 1) = -1.0;
  KrausChannel adz(alg, {z}, "adz", kTol);
  KrausChannel id(alg, {Mat::Identity(2, 2)}, "id", kTol);
  const double d1 = std::min(channel_distance(plus, adz), channel_distance(plus, id));
  const double d2 = std::min(channel_distance(minus, adz), channel_distance(minus, id));
  CHECK(d1 <= 1e-9);
  CHECK(d2 <= 1e-9);

  // the numerically found witness also yields a valid decomposition
  const auto [p2, m2] = decompose_cp(analysis.reduced, analysis.certificate.kernel_basis[0], kTol);
  double resid = 0;
  for (const Mat& x : analysis.reduced.algebra().basis(SpanKind::Algebra))
    resid = std::max(resid, (0.5 * (p2.apply(x) + m2.apply(x)) - analysis.reduced.apply(x)).norm());
  CHECK(resid <= 1e-9);
}

TEST_CASE("decompose_cp on a two-unitary mixture") {
  const Mat u = haar_unitary(2, 81), w = haar_unitary(2, 82);
  const auto analysis = analyze_extremality_cp(mix_two_unitaries(u, w, kTol), kTol);
  REQUIRE(analysis.certificate.verdict == Verdict::NotExtremal);
  const auto [plus, minus] = decompose_cp(analysis.reduced, analysis.certificate.kernel_basis[0], kTol);
  CHECK(plus.unitality_defect() <= 1e-9);
  CHECK(minus.unitality_defect() <= 1e-9);
  CHECK(psd_check(to_choi(plus).matrix, kTol).verdict == PsdVerdict::Psd);
  double resid = 0;
  for (const Mat& x : analysis.reduced.algebra().basis(SpanKind::Algebra))
    resid = std::max(resid, (0.5 * (plus.apply(x) + minus.apply(x)) - analysis.reduced.apply(x)).norm());
  CHECK(resid <= 1e-9);
}

TEST_CASE("decompose_cp rejects non-kernel elements") {
  const auto analysis = analyze_extremality_cp(dual_amplitude_damping(0.5, kTol), kTol);
  REQUIRE(analysis.certificate.verdict == Verdict::Extremal);
  Mat lam = Mat::Identity(4, 4);  // not in the kernel: V lam V^* = I
  CHECK_THROWS_AS(decompose_cp(analysis.reduced, lam, kTol), PreconditionError);
}

TEST_CASE("radon_nikodym: eta = tau gives the identity derivative") {
  const KrausChannel tau = pinching_m2(kTol);
  const RNDerivative rn = radon_nikodym(tau, tau, 1.0, kTol);
  CHECK(rn.identity_distance <= 1e-10);
  CHECK(rn.psd.verdict == PsdVerdict::Psd);
  CHECK(rn.reconstruction_residual <= 1e-10);
}

TEST_CASE("radon_nikodym: compression of the pinching") {
  const KrausChannel tau = pinching_m2(kTol);
  // eta(x) = P x P: dominated by tau with c = 1
  auto alg = full_block(2);
  KrausChannel eta(alg, {unit(2, 0, 0)}, "PxP", kTol, /*require_unital=*/false);
  const RNDerivative rn = radon_nikodym(eta, tau, 1.0, kTol);
  // t = diag(1, 0) over the Kraus index
  Mat expected = Mat::Zero(4, 4);
  expected.block(0, 0, 2, 2) = Mat::Identity(2, 2);
  CHECK((rn.t - expected).norm() <= 1e-9);
  CHECK(rn.psd.verdict == PsdVerdict::Psd);
  CHECK(rn.max_eig <= 1.0 + 1e-9);
}

TEST_CASE("radon_nikodym recovers a constructed derivative") {
  auto alg = full_block(3);
  for (std::uint64_t s : {1, 2, 3}) {
    const KrausChannel tau0 = random_channel(alg, 2, 900 + s, kTol);
    const KrausChannel tau = minimal_kraus(tau0, kTol);
    const Index d = tau.kraus_count();
    Mat t0_small = random_psd(d, 950 + s);
    t0_small /= op_norm(t0_small);  // 0 <= t0 <= I
    const Mat t0 = kron(t0_small, Mat::Identity(3, 3));  // scalar commutant entries
    // eta = sum v_k x (t0)^k_j v_j^*, CP with Kraus rows sqrt(t0) V^*
    const Mat mu = hermitian_power(t0, 0.5, kTol);
    const Mat ustar = mu * tau.stacked_adjoint();
    std::vector<Mat> ek;
    for (Index k = 0; k < d; ++k) ek.push_back(ustar.block(k * 3, 0, 3, 3).adjoint());
    KrausChannel eta(alg, ek, "eta", kTol, /*require_unital=*/false);

    const double c = 1.05;
    const RNDerivative rn = radon_nikodym(eta, tau, c, kTol);
    CHECK((rn.t - t0).norm() <= 1e-8);
    CHECK(rn.max_eig <= c + 1e-9);
  }
}

TEST_CASE("radon_nikodym enforces domination") {
  const KrausChannel tau = pinching_m2(kTol);
  auto alg = full_block(2);
  KrausChannel id(alg, {Mat::Identity(2, 2)}, "id", kTol);
  // the identity map is not completely dominated by any multiple that small
  CHECK_THROWS_AS(radon_nikodym(id, tau, 0.5, kTol), PreconditionError);
  CHECK_THROWS_AS(radon_nikodym(id, tau, -1.0, kTol), PreconditionError);
}

TEST_CASE("intertwiner on identical and mixed families") {
  auto alg = full_block(2);
  const KrausChannel tau = minimal_kraus(random_channel(alg, 2, 111, kTol), kTol);

  auto res = intertwiner(tau, tau, kTol);
  REQUIRE(res.found);
  CHECK((res.lambda - Mat::Identity(4, 4)).norm() <= 1e-9);
  CHECK(res.unitarity_defect <= 1e-9);

  // W^* = (U^* (x) I) V^* for a scalar unitary U: recovered lambda = U (x) I
  const Mat u_mix = haar_unitary(2, 112);
  std::vector<Mat> mixed(2, Mat::Zero(2, 2));
  for (Index k = 0; k < 2; ++k) {
    Mat wk_star = Mat::Zero(2, 2);
    for (Index j = 0; j < 2; ++j)
      wk_star += u_mix.adjoint()(k, j) * tau.kraus()[static_cast<size_t>(j)].adjoint();
    mixed[static_cast<size_t>(k)] = wk_star.adjoint();
  }
  KrausChannel w_family(alg, mixed, "mixed", kTol);
  res = intertwiner(tau, w_family, kTol);
  REQUIRE(res.found);
  CHECK((res.lambda - kron(u_mix, Mat::Identity(2, 2))).norm() <= 1e-10);
  CHECK(res.unitarity_defect <= 1e-9);

  // two minimal representations of the same channel from different routes
  const KrausChannel via_choi = from_choi(alg, to_choi(tau).matrix, kTol, "via_choi");
  res = intertwiner(tau, via_choi, kTol);
  REQUIRE(res.found);
  CHECK(res.unitarity_defect <= 1e-8);

  // different channels fail
  const KrausChannel other = minimal_kraus(random_channel(alg, 2, 113, kTol), kTol);
  CHECK_FALSE(intertwiner(tau, other, kTol).found);
}

TEST_CASE("operator system basis") {
  auto alg = full_block(2);
  KrausChannel id(alg, {Mat::Identity(2, 2)}, "id", kTol);
  auto s_id = operator_system_basis(id, kTol);
  CHECK(s_id.size() == 1);  // scalars only

  // pinching: products {v_i v_j^*} = {P, 0, 0, Q}; the system is span{P, Q}.
  // Rank-nullity cross-check: d^2 products minus kernel dimension 2.
  const auto s_pinch = operator_system_basis(pinching_m2(kTol), kTol);
  CHECK(s_pinch.size() == 2);

  // contains the identity and is *-closed
  const KrausChannel tau = minimal_kraus(random_channel(alg, 2, 121, kTol), kTol);
  const auto s = operator_system_basis(tau, kTol);
  Mat cols(4, static_cast<Index>(s.size()));
  for (size_t i = 0; i < s.size(); ++i) cols.col(static_cast<Index>(i)) = vectorize(s[i]);
  auto dist_to_span = [&](const Mat& x) {
    const Vec v = vectorize(x);
    return (v - cols * (cols.adjoint() * v)).norm();
  };
  CHECK(dist_to_span(Mat::Identity(2, 2)) <= 1e-9);
  for (const Mat& b : s) CHECK(dist_to_span(b.adjoint()) <= 1e-9);

  // invariance under scalar unitary mixing of the Kraus family
  const Mat u_mix = haar_unitary(2, 122);
  std::vector<Mat> mixed;
  for (Index k = 0; k < 2; ++k) {
    Mat wk_star = Mat::Zero(2, 2);
    for (Index j = 0; j < 2; ++j) wk_star += u_mix(k, j) * tau.kraus()[static_cast<size_t>(j)].adjoint();
    mixed.push_back(wk_star.adjoint());
  }
  KrausChannel w_family(alg, mixed, "mixed", kTol);
  const auto sw = operator_system_basis(w_family, kTol);
  REQUIRE(sw.size() == s.size());
  for (const Mat& b : sw) CHECK(dist_to_span(b) <= 1e-9);
}

}  // TEST_SUITE
