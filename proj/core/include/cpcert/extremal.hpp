#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cpcert/channel.hpp"

namespace cpcert {

// Extremality verdict with witness data. kernel_basis holds Hermitian
// representatives Lambda acting on the dilation space C^d (x) H with entries
// in M' (block (k,j) of the dN x dN matrix is lambda^k_j), each of unit
// operator norm and each satisfying sum_{k,j} v_k lambda^k_j v_j^* = 0 within
// tolerance. The full singular spectrum of the constraint system is embedded
// so a reviewer can re-threshold.
struct Certificate {
  Verdict verdict = Verdict::Indeterminate;
  Index kernel_dim = 0;
  std::vector<Mat> kernel_basis;
  Index d = 0;      // Kraus cardinality entering the linear system
  Index index = 0;  // minimal dilation multiplicity
  RealVec singular_spectrum;
  std::map<std::string, double> residuals;
  std::vector<std::string> notes;
};

struct CpAnalysis {
  KrausChannel reduced;
  std::optional<StinespringData> dilation;
  Certificate certificate;
};

// Dilation-commutant test: tau is extremal in CP iff the only Lambda in the
// commutant of the minimal dilation (elements of M_d(M') compressed by the
// support projection) with V Lambda V^* = 0 is zero.
CpAnalysis analyze_extremality_cp(const KrausChannel& ch, const Tolerance& tol);
Certificate extremality_cp(const KrausChannel& ch, const Tolerance& tol);

// Specialization for M = B(H): extremal iff { v_k v_j^* } is linearly
// independent over scalars. Must agree with extremality_cp.
Certificate extremality_choi(const KrausChannel& ch, const Tolerance& tol);

// Coefficients restricted to the center; certifies extremality among UCP maps
// of M into M for inner Kraus families.
Certificate extremality_inner_center(const KrausChannel& ch, const Tolerance& tol);

// Splits tau = (tau_plus + tau_minus)/2 along a Hermitian kernel element of
// unit operator norm; Kraus rows are (I -/+ Lambda)^{1/2} V^*.
std::pair<KrausChannel, KrausChannel> decompose_cp(const KrausChannel& reduced,
                                                   const Mat& hermitian_kernel,
                                                   const Tolerance& tol);

struct RNDerivative {
  Mat t;  // on C^d (x) H, entries in M', compressed by the support projection
  PsdResult psd;
  double domination_constant = 0;
  double max_eig = 0;
  double reconstruction_residual = 0;
  double identity_distance = 0;  // ||t - P|| on the compressed space
  RealVec singular_spectrum;     // of the reconstruction system
  Index d = 0;
  std::vector<std::string> notes;
};

// Solves eta(x) = sum v_k x t^k_j v_j^* with t in the compressed commutant.
// Domination is checked through the stronger decidable condition
// Choi(c tau - eta) >= 0; the report notes which condition was verified.
RNDerivative radon_nikodym(const KrausChannel& eta, const KrausChannel& tau, double c,
                           const Tolerance& tol);

struct IntertwinerResult {
  bool found = false;
  Mat lambda;  // dN x dN over M' with v_k^* = sum_j lambda^k_j w_j^*
  double residual = 0;
  double unitarity_defect = 0;
  std::string failure_reason;
};

IntertwinerResult intertwiner(const KrausChannel& v_family, const KrausChannel& w_family,
                              const Tolerance& tol);

// Trace-orthonormal basis of S^tau = span{ sum v_i lambda^i_j v_j^* }.
std::vector<Mat> operator_system_basis(const KrausChannel& ch, const Tolerance& tol);

// ===========================================================================
// Shared kernel machinery (also used by the CP_phi test)
// ===========================================================================

// Orthonormal basis of { Lambda in M_d(S) : P Lambda P = Lambda } where S is
// the chosen coefficient span. Pass P = identity for the uncompressed space.
std::vector<Mat> compressed_coefficient_basis(const AlgebraModel& algebra, Index d,
                                              SpanKind coefficients, const Mat& projection,
                                              const Tolerance& tol);

// Hermitian representatives of a *-closed kernel: real-orthonormal basis of
// the Hermitian part, normalized to unit operator norm.
std::vector<Mat> hermitian_representatives(const std::vector<Mat>& kernel, const Tolerance& tol);

}  // namespace cpcert
