#pragma once

#include <memory>

#include "cpcert/channel.hpp"

namespace cpcert {

// Modular data of (M, phi) at finite dimension. The modular operator and
// conjugation act implicitly through powers of the density and adjoints; the
// density is required to lie in M itself so that every formula closes over M.
class ModularData {
 public:
  static ModularData build(std::shared_ptr<const AlgebraModel> algebra, const DensityState& phi,
                           const Tolerance& tol);

  const DensityState& state() const { return phi_; }
  const AlgebraModel& algebra() const { return *algebra_; }
  std::shared_ptr<const AlgebraModel> algebra_ptr() const { return algebra_; }
  const Tolerance& tolerance() const { return tol_; }
  const Mat& sqrt_rho() const { return sqrt_rho_; }
  const Mat& inv_sqrt_rho() const { return inv_sqrt_rho_; }

  // rho^{iz} via the cached eigensystem.
  Mat rho_power_i(Complex z) const;

  // sigma_z(x) = rho^{iz} x rho^{-iz}; the modular group at real z.
  Mat sigma(Complex z, const Mat& x) const;

  // |phi(x^* y) - phi(sigma_{i/2}(y) sigma_{-i/2}(x^*))|
  double kms_defect(const Mat& x, const Mat& y) const;

  // KMS-dual Kraus map: v -> rho^{-1/2} v^* rho^{1/2} (= sigma_{i/2}(v^*)).
  // Involutive; reduces to v^* at tracial phi. Requires v in M.
  Mat tilde(const Mat& v) const;

  Complex phi(const Mat& x) const { return (phi_.rho * x).trace(); }

 private:
  std::shared_ptr<const AlgebraModel> algebra_;
  DensityState phi_;
  Tolerance tol_;
  Mat eigvec_;
  RealVec eigval_;
  Mat sqrt_rho_, inv_sqrt_rho_;
};

// phi-adjoint of tau in CP_phi with inner Kraus: tau~ = sum tilde(v_k) . tilde(v_k)^*.
// Unital, phi-preserving, same index; satisfies the duality
// phi(tau(x) sigma_{-i/2}(y)) = phi(sigma_{i/2}(x) tau~(y)) on all of M x M.
KrausChannel adjoint_channel(const ModularData& md, const KrausChannel& tau, const Tolerance& tol);

// Max duality defect over the full basis grid.
double duality_defect(const ModularData& md, const KrausChannel& tau,
                      const KrausChannel& tau_tilde);

}  // namespace cpcert
