#include "cpcert/modular.hpp"

#include <cmath>

namespace cpcert {

ModularData ModularData::build(std::shared_ptr<const AlgebraModel> algebra,
                               const DensityState& phi, const Tolerance& tol) {
  if (!algebra) throw PreconditionError("modular data needs an algebra");
  if (phi.rho.rows() != algebra->carrier_dim())
    throw ShapeError("modular data: state dimension mismatch");
  if (!phi.faithful)
    throw PreconditionError("modular data requires a faithful state (min eig " +
                            std::to_string(phi.min_eig) + ")");
  if (!algebra->membership(phi.rho, SpanKind::Algebra, tol).is_member)
    throw PreconditionError("modular data: state density must lie in the algebra");

  ModularData md;
  md.algebra_ = std::move(algebra);
  md.phi_ = phi;
  md.tol_ = tol;
  Eigen::SelfAdjointEigenSolver<Mat> es((phi.rho + phi.rho.adjoint()) / 2.0);
  if (es.info() != Eigen::Success) throw NumericalError("modular data: eigendecomposition failed");
  md.eigvec_ = es.eigenvectors();
  md.eigval_ = es.eigenvalues();
  md.sqrt_rho_ = hermitian_power(phi.rho, 0.5, tol);
  md.inv_sqrt_rho_ = hermitian_power(phi.rho, -0.5, tol);
  return md;
}

Mat ModularData::rho_power_i(Complex z) const {
  Vec f(eigval_.size());
  const Complex w = Complex(0, 1) * z;
  for (Index i = 0; i < eigval_.size(); ++i) f[i] = std::exp(w * std::log(eigval_[i]));
  return eigvec_ * f.asDiagonal() * eigvec_.adjoint();
}

Mat ModularData::sigma(Complex z, const Mat& x) const {
  if (x.rows() != phi_.rho.rows() || x.cols() != phi_.rho.cols())
    throw ShapeError("sigma: argument must be N x N");
  return rho_power_i(z) * x * rho_power_i(-z);
}

double ModularData::kms_defect(const Mat& x, const Mat& y) const {
  const Complex lhs = phi(x.adjoint() * y);
  const Complex rhs = phi(sigma(Complex(0, 0.5), y) * sigma(Complex(0, -0.5), x.adjoint()));
  return std::abs(lhs - rhs);
}

Mat ModularData::tilde(const Mat& v) const {
  if (!algebra_->membership(v, SpanKind::Algebra, tol_).is_member)
    throw PreconditionError("tilde: Kraus operator must lie in the algebra (inner representation)");
  return inv_sqrt_rho_ * v.adjoint() * sqrt_rho_;
}

KrausChannel adjoint_channel(const ModularData& md, const KrausChannel& tau, const Tolerance& tol) {
  if (tau.algebra().carrier_dim() != md.algebra().carrier_dim())
    throw ShapeError("adjoint_channel: dimension mismatch");
  const PhiPreservation pres = is_phi_preserving(tau, md.state(), tol);
  if (!pres.preserving)
    throw PreconditionError("adjoint_channel: channel does not preserve the state (defect " +
                            std::to_string(pres.defect) + ")");
  std::vector<Mat> kraus;
  for (const Mat& v : tau.kraus()) kraus.push_back(md.tilde(v));
  return KrausChannel(tau.algebra_ptr(), std::move(kraus), tau.label() + "~", tol);
}

double duality_defect(const ModularData& md, const KrausChannel& tau,
                      const KrausChannel& tau_tilde) {
  double defect = 0;
  const auto& basis = tau.algebra().basis(SpanKind::Algebra);
  for (const Mat& x : basis)
    for (const Mat& y : basis) {
      const Complex lhs = md.phi(tau.apply(x) * md.sigma(Complex(0, -0.5), y));
      const Complex rhs = md.phi(md.sigma(Complex(0, 0.5), x) * tau_tilde.apply(y));
      defect = std::max(defect, std::abs(lhs - rhs));
    }
  return defect;
}

}  // namespace cpcert
