#pragma once

#include <Eigen/Dense>

#include <complex>
#include <stdexcept>
#include <string>

namespace ppb {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using Index = Eigen::Index;

// Tolerances shared by the kernel and the analysis layers.
struct ToleranceConfig {
  double eq_tol = 1e-9;            // absolute entrywise matrix equality
  double rank_tol_factor = 1e-10;  // relative singular-value cutoff
  double peripheral_tol = 1e-8;    // distance to the unit circle
  double cluster_tol = 1e-7;       // eigenvalue clustering radius

  // cluster_tol must dominate rank_tol_factor so clustered eigenvalues never
  // fall below the rank cutoff.
  void check() const {
    if (eq_tol <= 0 || rank_tol_factor <= 0 || peripheral_tol <= 0 ||
        cluster_tol <= 0)
      throw std::invalid_argument(
          "ToleranceConfig: tolerances must be strictly positive");
    if (cluster_tol < rank_tol_factor)
      throw std::invalid_argument(
          "ToleranceConfig: cluster_tol must be >= rank_tol_factor");
  }
};

// Every failure mode carries a stable kind string so batch reports can record
// it without parsing what().
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& message)
      : std::runtime_error(kind + ": " + message), kind_(std::move(kind)) {}
  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

#define PPB_DEFINE_ERROR(Name)                                           \
  struct Name : Error {                                                  \
    explicit Name(const std::string& message) : Error(#Name, message) {} \
  }

PPB_DEFINE_ERROR(NonConvergence);
PPB_DEFINE_ERROR(BoundaryAmbiguity);
PPB_DEFINE_ERROR(SylvesterSingular);
PPB_DEFINE_ERROR(NotHermitian);
PPB_DEFINE_ERROR(DimensionMismatch);
PPB_DEFINE_ERROR(BadWeights);
PPB_DEFINE_ERROR(BadPartition);
PPB_DEFINE_ERROR(UnknownFixture);
PPB_DEFINE_ERROR(BadParams);
PPB_DEFINE_ERROR(NotAnEigenvalue);
PPB_DEFINE_ERROR(NoSpectralGap);
PPB_DEFINE_ERROR(NotPeripheral);
PPB_DEFINE_ERROR(SubsequenceNotFound);
PPB_DEFINE_ERROR(NotStationary);
PPB_DEFINE_ERROR(DegenerateDraws);
PPB_DEFINE_ERROR(NotAState);
PPB_DEFINE_ERROR(NotAProjection);
PPB_DEFINE_ERROR(NotUCP);
PPB_DEFINE_ERROR(InternalInconsistency);
PPB_DEFINE_ERROR(ParseError);

#undef PPB_DEFINE_ERROR

}  // namespace ppb
