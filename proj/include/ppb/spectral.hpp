#pragma once

#include <vector>

#include "ppb/channel.hpp"
#include "ppb/numkernel.hpp"
#include "ppb/types.hpp"

namespace ppb {

struct EigCluster {
  Complex value;        // cluster mean; peripheral values are snapped to |z|=1
  int multiplicity = 0; // algebraic, i.e. cluster population
  bool peripheral = false;
};

// Clustered spectrum of the superoperator, ordered by decreasing modulus then
// increasing phase.
struct SpectralData {
  std::vector<EigCluster> clusters;
  double transient_radius = 0.0;  // max modulus among non-peripheral clusters

  std::vector<Complex> peripheral_values() const;
  int total_multiplicity() const;
  int peripheral_multiplicity() const;
  bool unimodular() const;  // no transient cluster at all
};

SpectralData spectrum(const Channel& ch);

// Orthonormal (Hilbert-Schmidt) basis of {X : tau(X) = lambda X}.
std::vector<CMatrix> eigenspace(const Channel& ch, Complex lambda);

enum class ProjectorMethod { schur, contour };

// Projector onto vec(P(tau)). The Schur route reorders the peripheral
// eigenvalues to the leading block; the contour route evaluates
// I - (2 pi i)^-1 contour-integral of the resolvent over the circle midway
// between the transient radius and 1, by the N-node trapezoid rule.
CMatrix peripheral_projector(const Channel& ch, ProjectorMethod method,
                             int contour_nodes = 256);

struct PeripheralMode {
  Complex eigenvalue;  // on the unit circle
  CMatrix matrix;      // unit Hilbert-Schmidt norm
};

struct PeripheralDecomposition {
  std::vector<PeripheralMode> p_basis;
  HSBasis n_basis;
  CMatrix projector;     // d^2 x d^2 spectral projector onto vec(P)
  CMatrix p_range;       // orthonormal columns spanning range(projector)
  CMatrix n_range;       // orthonormal columns spanning the complement
  SpectralData spectral;

  Index dim_p() const { return static_cast<Index>(p_basis.size()); }
  Index dim_n() const { return n_basis.size(); }
};

// M_d = P(tau) + N(tau). The peripheral eigenbasis is refined inside the
// invariant subspace (restriction is diagonalizable there), which conditions
// better than global eigenvectors when the transient part is defective.
PeripheralDecomposition peripheral_decomposition(const Channel& ch);

struct JordanCheckEntry {
  Complex value;
  int algebraic = 0;
  int geometric = 0;
};

struct JordanCheck {
  bool ok = false;
  std::vector<JordanCheckEntry> entries;
};

// Peripheral Jordan blocks of a UCP map are trivial; this confirms algebraic
// = geometric multiplicity per peripheral eigenvalue.
JordanCheck check_peripheral_diagonalizable(const Channel& ch);

struct DecayReport {
  bool decayed = false;
  bool inconclusive = false;  // iteration cap hit with no spectral gap
  int first_n = -1;
  std::vector<double> residuals;  // ||tau^n(X)|| for n = 1..
};

// Iterates tau^n(X) until ||tau^n(X)|| <= tol or n_max. n_max <= 0 picks
// 2*ceil(log tol / log transient_radius), at least dim^2+1, capped at 10^4.
DecayReport decay_verify(const Channel& ch, const CMatrix& X, int n_max = 0,
                         double tol = 1e-10);

struct PowerSpaceReport {
  bool p_equal = false;
  bool n_equal = false;
};

// P(tau^m) = P(tau) and N(tau^m) = N(tau), compared as subspaces.
PowerSpaceReport power_space_equality(const Channel& ch, int m);

}  // namespace ppb
