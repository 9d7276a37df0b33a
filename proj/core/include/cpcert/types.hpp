#pragma once

#include <Eigen/Dense>

#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

namespace cpcert {

using Complex = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;
using RealVec = Eigen::VectorXd;
using Index = Eigen::Index;

// Tolerance knobs used by every rank / positivity / residual decision.
//   rank_tol          relative singular-value cutoff
//   residual_tol      absolute norm cutoff for reconstruction checks
//   indeterminate_band multiplicative width of the refusal band around rank_tol
struct Tolerance {
  double rank_tol = 1e-9;
  double residual_tol = 1e-9;
  double indeterminate_band = 10.0;

  void validate() const {
    if (rank_tol < 0 || residual_tol < 0)
      throw std::invalid_argument("tolerances must be nonnegative");
    if (indeterminate_band < 1.0)
      throw std::invalid_argument("indeterminate_band must be >= 1");
  }
};

struct ShapeError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct PreconditionError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Numerical failure (factorization non-convergence, rank-deficient solve).
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A rank decision fell inside the indeterminate band. Carries the singular
// spectrum so callers can embed it in certificates instead of guessing.
class IndeterminateError : public std::runtime_error {
 public:
  IndeterminateError(const std::string& what, std::vector<double> spectrum)
      : std::runtime_error(what), spectrum_(std::move(spectrum)) {}
  const std::vector<double>& spectrum() const noexcept { return spectrum_; }

 private:
  std::vector<double> spectrum_;
};

enum class Verdict { Extremal, NotExtremal, Indeterminate };
enum class PsdVerdict { Psd, NotPsd, Indeterminate };

inline const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::Extremal: return "extremal";
    case Verdict::NotExtremal: return "not_extremal";
    case Verdict::Indeterminate: return "indeterminate";
  }
  return "?";
}

inline const char* to_string(PsdVerdict v) {
  switch (v) {
    case PsdVerdict::Psd: return "psd";
    case PsdVerdict::NotPsd: return "not_psd";
    case PsdVerdict::Indeterminate: return "indeterminate";
  }
  return "?";
}

}  // namespace cpcert
