#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cpcert/extremal.hpp"
#include "cpcert/modular.hpp"

namespace cpcert {

// State on the doubled carrier C^N (x) C^N with both marginals phi, under the
// pairing psi(x (x) y) = tr(D (x^T (x) y)). The transpose on the first leg is
// the matrix realization of the commutant action JxJ and is what makes D PSD.
// Only multiplicity-free algebras carry couplings here; multiplicities of the
// original action are irrelevant to states on M (x) M.
struct CouplingState {
  Mat density;
};

struct CouplingChecks {
  double psd_min_eig = 0;
  double trace_defect = 0;
  double marginal_first = 0;   // ||tr_2(D) - rho^T||
  double marginal_second = 0;  // ||tr_1(D) - rho||
  bool valid = false;
};

CouplingChecks validate_coupling(const AlgebraModel& algebra, const CouplingState& d,
                                 const DensityState& phi, const Tolerance& tol);

// D is the unique matrix supported in span(M^T (x) M) with
//   tr(D (x^T (x) y)) = tr(rho^{1/2} tau(y) rho^{1/2} x)  for all x, y in M.
CouplingState channel_to_coupling(const KrausChannel& tau, const DensityState& phi,
                                  const Tolerance& tol);

// tau(y) = rho^{-1/2} [tr_2(D (I (x) y))]^T rho^{-1/2}, Kraus-decomposed via the
// Choi matrix of its trivial extension. Flags D whose induced map fails CP.
KrausChannel coupling_to_channel(std::shared_ptr<const AlgebraModel> algebra,
                                 const CouplingState& d, const DensityState& phi,
                                 const Tolerance& tol);

// Certificate for extremality inside CP_phi. kernel_basis holds Hermitian
// representatives with entries in the center satisfying both defining systems;
// gauge directions (solutions that do not perturb the channel at all, possible
// for non-balanced families) are excluded from the count.
struct PhiCertificate {
  Verdict verdict = Verdict::Indeterminate;
  Index kernel_dim = 0;
  std::vector<Mat> kernel_basis;
  Index d = 0;
  RealVec singular_spectrum;
  std::map<std::string, double> residuals;
  std::vector<std::string> notes;
  bool inner = false;
  bool via_cp_certificate = false;  // settled through extremality in the ambient CP set
};

struct CpPhiAnalysis {
  KrausChannel family;  // the Kraus family the systems were evaluated on
  PhiCertificate certificate;
};

// Joint-system test: tau in CP_phi with inner Kraus is extremal iff the only
// central lambda with sum v_k l^k_j v_j^* = 0 and sum v~_j l^k_j v~_k^* = 0 is
// the one that does not perturb the channel. Non-inner channels are first
// settled through the ambient-CP certificate (extremal there implies extremal
// here); otherwise the verdict is an explicit indeterminate, never a guess.
CpPhiAnalysis analyze_extremality_cp_phi(const KrausChannel& tau, const DensityState& phi,
                                         const Tolerance& tol);
PhiCertificate extremality_cp_phi(const KrausChannel& tau, const DensityState& phi,
                                  const Tolerance& tol);

// eta_pm with Kraus rows (I pm lambda)^{1/2} V^*; both in CP_phi, averaging to tau.
std::pair<KrausChannel, KrausChannel> decompose_cp_phi(const KrausChannel& inner_family,
                                                       const ModularData& md,
                                                       const Mat& hermitian_lambda,
                                                       const Tolerance& tol);

// Transfers D to its channel and certifies there; the transfer of extremality
// along the affine correspondence is applied in this direction only.
PhiCertificate coupling_extremality(std::shared_ptr<const AlgebraModel> algebra,
                                    const CouplingState& d, const DensityState& phi,
                                    const Tolerance& tol);

}  // namespace cpcert
