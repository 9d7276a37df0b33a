#include <doctest.h>

#include <cpcert/modular.hpp>

#include "test_support.hpp"

using namespace cpcert;
using namespace cpcert::testing;

namespace {
const Tolerance kTol{};

ModularData md_for(std::shared_ptr<const AlgebraModel> alg, const DensityState& phi) {
  return ModularData::build(std::move(alg), phi, kTol);
}

}  // namespace

TEST_SUITE("modular") {

TEST_CASE("sigma is trivial at the tracial state") {
  auto alg = full_block(3);
  const ModularData md = md_for(alg, tracial_state(3, kTol));
  for (std::uint64_t s : {1, 2}) {
    const Mat x = random_gaussian(3, 3, s);
    CHECK((md.sigma(Complex(0.4, -1.1), x) - x).norm() <= 1e-12);
  }
}

TEST_CASE("sigma at real time is a state-preserving *-automorphism") {
  auto alg = full_block(2);
  const DensityState phi = random_state_in(*alg, 5, kTol);
  const ModularData md = md_for(alg, phi);
  const double t = 0.83;
  const Mat x = random_gaussian(2, 2, 6);
  const Mat y = random_gaussian(2, 2, 7);
  CHECK((md.sigma(t, x * y) - md.sigma(t, x) * md.sigma(t, y)).norm() <= 1e-12);
  CHECK((md.sigma(t, x.adjoint()) - md.sigma(t, x).adjoint()).norm() <= 1e-12);
  CHECK(std::abs(md.phi(md.sigma(t, x)) - md.phi(x)) <= 1e-12);
}

TEST_CASE("sigma fixed example on a diagonal state") {
  auto alg = full_block(2);
  Mat rho = Mat::Zero(2, 2);
  rho(0, 0) = 2.0 / 3.0;
  rho(1, 1) = 1.0 / 3.0;
  const ModularData md = md_for(alg, make_density(rho, kTol));
  const Mat e12 = unit(2, 0, 1);
  const Mat out = md.sigma(Complex(0, -0.5), e12);
  CHECK(std::abs(out(0, 1) - std::sqrt(2.0)) <= 1e-12);
  CHECK(std::abs(out(1, 0)) <= 1e-14);
}

TEST_CASE("group law for complex parameters") {
  auto alg = make_algebra({Block{2, 1}, Block{2, 1}});
  const DensityState phi = random_state_in(*alg, 11, kTol);
  const ModularData md = md_for(alg, phi);
  const Complex z(0.3, 0.9), w(-0.7, 0.2);
  for (const Mat& x : alg->basis(SpanKind::Algebra)) {
    const Mat lhs = md.sigma(z, md.sigma(w, x));
    CHECK((lhs - md.sigma(z + w, x)).norm() <= 1e-9);
  }
}

TEST_CASE("kms relation") {
  auto alg = full_block(2);
  {  // x = y = I: both sides are 1
    const ModularData md = md_for(alg, random_state_in(*alg, 21, kTol));
    CHECK(md.kms_defect(Mat::Identity(2, 2), Mat::Identity(2, 2)) <= 1e-12);
  }
  {  // tracial state: reduces to trace cyclicity
    const ModularData md = md_for(alg, tracial_state(2, kTol));
    for (std::uint64_t s : {31, 32})
      CHECK(md.kms_defect(random_gaussian(2, 2, s), random_gaussian(2, 2, s + 5)) <= 1e-12);
  }
  {  // random faithful state
    const ModularData md = md_for(alg, random_state_in(*alg, 41, kTol));
    for (std::uint64_t s : {51, 52, 53})
      CHECK(md.kms_defect(random_gaussian(2, 2, s), random_gaussian(2, 2, s + 9)) <= 1e-9);
  }
}

TEST_CASE("tilde reduces to the adjoint at tracial states and is involutive") {
  auto alg = full_block(3);
  const ModularData tr = md_for(alg, tracial_state(3, kTol));
  const Mat v = random_gaussian(3, 3, 61);
  CHECK((tr.tilde(v) - v.adjoint()).norm() <= 1e-12);

  const ModularData md = md_for(alg, random_state_in(*alg, 62, kTol));
  CHECK((md.tilde(md.tilde(v)) - v).norm() <= 1e-10);
}

TEST_CASE("tilde fixed example on a diagonal state") {
  auto alg = full_block(2);
  Mat rho = Mat::Zero(2, 2);
  rho(0, 0) = 0.8;
  rho(1, 1) = 0.2;
  const ModularData md = md_for(alg, make_density(rho, kTol));
  const Mat out = md.tilde(unit(2, 0, 1));
  // rho^{-1/2} E21 rho^{1/2} = sqrt(rho11/rho22) E21
  CHECK(std::abs(out(1, 0) - std::sqrt(0.8 / 0.2)) <= 1e-12);
  CHECK(std::abs(out(0, 1)) <= 1e-14);
}

TEST_CASE("tilde rejects operators outside the algebra") {
  auto alg = make_algebra({Block{2, 1}, Block{2, 1}});
  const ModularData md = md_for(alg, random_state_in(*alg, 63, kTol));
  CHECK_THROWS_AS(md.tilde(haar_unitary(4, 64)), PreconditionError);
}

TEST_CASE("adjoint channel of a rho-commuting unitary conjugation") {
  auto alg = full_block(2);
  const DensityState phi = random_state_in(*alg, 71, kTol);
  const ModularData md = md_for(alg, phi);
  // unitary diagonal in rho's eigenbasis
  Eigen::SelfAdjointEigenSolver<Mat> es(phi.rho);
  Vec phases(2);
  phases << std::exp(Complex(0, 0.7)), std::exp(Complex(0, -1.2));
  const Mat u = es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
  KrausChannel uc(alg, {u}, "u", kTol);
  const KrausChannel adj = adjoint_channel(md, uc, kTol);
  KrausChannel expected(alg, {u.adjoint().eval()}, "u*", kTol);
  CHECK(channel_distance(adj, expected) <= 1e-10);
}

TEST_CASE("adjoint at the tracial state is the Kraus-adjoint channel") {
  auto alg = full_block(2);
  const DensityState tr = tracial_state(2, kTol);
  const ModularData md = md_for(alg, tr);
  const KrausChannel ch = random_phi_channel(alg, tr, 2, 73, kTol);
  const KrausChannel adj = adjoint_channel(md, ch, kTol);
  std::vector<Mat> expected;
  for (const Mat& v : ch.kraus()) expected.push_back(v.adjoint());
  KrausChannel ls(alg, expected, "ls", kTol);
  CHECK(channel_distance(adj, ls) <= 1e-11);
}

TEST_CASE("duality holds for a CP_phi channel with non-commuting Kraus") {
  // the decisive fixture: generalized-amplitude-damping dual at p != 1/2
  auto alg = full_block(2);
  Mat rho = Mat::Zero(2, 2);
  rho(0, 0) = 0.7;
  rho(1, 1) = 0.3;
  const DensityState phi = make_density(rho, kTol);
  const ModularData md = md_for(alg, phi);
  const KrausChannel tau = gad_dual(0.7, 0.5, kTol);
  REQUIRE(is_phi_preserving(tau, phi, kTol).preserving);
  REQUIRE(is_inner(tau, kTol));

  const KrausChannel adj = adjoint_channel(md, tau, kTol);
  CHECK(duality_defect(md, tau, adj) <= 1e-9);
  CHECK(adj.unitality_defect() <= 1e-9);
  CHECK(is_phi_preserving(adj, phi, kTol).defect <= 1e-9);
}

TEST_CASE("double adjoint returns the channel; indices agree") {
  auto alg = make_algebra({Block{2, 1}, Block{2, 1}});
  const DensityState phi = random_state_in(*alg, 81, kTol);
  const ModularData md = md_for(alg, phi);
  for (std::uint64_t s : {82, 83}) {
    const KrausChannel tau = random_phi_channel(alg, phi, 3, s, kTol);
    const KrausChannel adj = adjoint_channel(md, tau, kTol);
    CHECK(duality_defect(md, tau, adj) <= 1e-9);
    const KrausChannel twice = adjoint_channel(md, adj, kTol);
    CHECK(channel_distance(twice, tau) <= 1e-10);
    CHECK(stinespring_support(adj, kTol).index == stinespring_support(tau, kTol).index);
  }
}

TEST_CASE("modular data rejects unfaithful or misplaced states") {
  auto alg = full_block(2);
  Mat rho = Mat::Zero(2, 2);
  rho(0, 0) = 1.0;
  DensityState singular;
  singular.rho = rho;
  singular.faithful = false;
  CHECK_THROWS_AS(ModularData::build(alg, singular, kTol), PreconditionError);

  auto blocks = make_algebra({Block{1, 1}, Block{1, 1}});
  Mat off = Mat::Identity(2, 2) / 2.0;
  off(0, 1) = 0.1;
  off(1, 0) = 0.1;
  CHECK_THROWS_AS(ModularData::build(blocks, make_density(off, kTol), kTol), PreconditionError);
}

}  // TEST_SUITE
