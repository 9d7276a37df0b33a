#pragma once

#include <cpcert/coupling.hpp>
#include <cpcert/extremal.hpp>
#include <cpcert/modular.hpp>

#include <memory>
#include <vector>

namespace cpcert::testing {

inline bool mat_close(const Mat& a, const Mat& b, double tol) { return (a - b).norm() <= tol; }

inline std::shared_ptr<const AlgebraModel> full_block(Index n) {
  return std::make_shared<const AlgebraModel>(AlgebraModel::build(AlgebraSpec{{Block{n, 1}}}));
}

inline std::shared_ptr<const AlgebraModel> make_algebra(std::vector<Block> blocks) {
  return std::make_shared<const AlgebraModel>(AlgebraModel::build(AlgebraSpec{std::move(blocks)}));
}

inline Mat unit(Index n, Index i, Index j) {
  Mat e = Mat::Zero(n, n);
  e(i, j) = 1.0;
  return e;
}

// Pinching onto the diagonal of M_2: Kraus {diag(1,0), diag(0,1)}.
inline KrausChannel pinching_m2(const Tolerance& tol) {
  auto alg = full_block(2);
  return KrausChannel(alg, {unit(2, 0, 0), unit(2, 1, 1)}, "pinching", tol);
}

// Dual amplitude damping {diag(1, sqrt(1-g)), sqrt(g) E21}; unital, extremal.
inline KrausChannel dual_amplitude_damping(double g, const Tolerance& tol) {
  auto alg = full_block(2);
  Mat v1 = Mat::Zero(2, 2);
  v1(0, 0) = 1.0;
  v1(1, 1) = std::sqrt(1.0 - g);
  Mat v2 = Mat::Zero(2, 2);
  v2(1, 0) = std::sqrt(g);
  return KrausChannel(alg, {v1, v2}, "dual_ad", tol);
}

inline KrausChannel mix_two_unitaries(const Mat& u, const Mat& w, const Tolerance& tol) {
  auto alg = full_block(u.rows());
  return KrausChannel(alg, {u / std::sqrt(2.0), w / std::sqrt(2.0)}, "two_unitary_mix", tol);
}

// Heisenberg dual of generalized amplitude damping with stationary state
// diag(p, 1-p): unital, phi-preserving, inner, Kraus not commuting with rho.
inline KrausChannel gad_dual(double p, double g, const Tolerance& tol) {
  auto alg = full_block(2);
  Mat k1 = Mat::Zero(2, 2), k2 = Mat::Zero(2, 2), k3 = Mat::Zero(2, 2), k4 = Mat::Zero(2, 2);
  k1(0, 0) = std::sqrt(p);
  k1(1, 1) = std::sqrt(p * (1 - g));
  k2(0, 1) = std::sqrt(p * g);
  k3(0, 0) = std::sqrt((1 - p) * (1 - g));
  k3(1, 1) = std::sqrt(1 - p);
  k4(1, 0) = std::sqrt((1 - p) * g);
  return KrausChannel(alg, {k1.adjoint(), k2.adjoint(), k3.adjoint(), k4.adjoint()}, "gad_dual", tol);
}

inline DensityState tracial_state(Index n, const Tolerance& tol) {
  return make_density(Mat::Identity(n, n) / static_cast<double>(n), tol);
}

// Faithful random density inside the algebra (block form rho_b (x) I_m / m).
inline DensityState random_state_in(const AlgebraModel& alg, std::uint64_t seed,
                                    const Tolerance& tol) {
  std::vector<Mat> blocks;
  double total = 0;
  std::vector<double> weights;
  for (size_t b = 0; b < alg.spec().blocks.size(); ++b) {
    const Index nb = alg.spec().blocks[b].dim;
    Mat rb = random_density(nb, seed + 101 * static_cast<std::uint64_t>(b), 5e-2);
    blocks.push_back(rb);
    const double w = 1.0 + 0.3 * static_cast<double>((seed + b) % 5);
    weights.push_back(w);
    total += w;
  }
  std::vector<Mat> scaled;
  for (size_t b = 0; b < blocks.size(); ++b) {
    const Index mb = alg.spec().blocks[b].multiplicity;
    scaled.push_back(blocks[b] * (weights[b] / total / static_cast<double>(mb)));
  }
  return make_density(alg.embed(scaled), tol);
}

}  // namespace cpcert::testing
