#pragma once

#include <cstdint>

#include "ppb/spectral.hpp"

namespace ppb {

// Choi-Effros product on P(tau). For peripheral eigenvectors X, Y the
// subsequence limit of (lambda mu)^-n tau^n(XY) kills the transient component
// of XY and restores every peripheral component, so the closed form is the
// peripheral projection of the ordinary product; it extends bilinearly to all
// of P(tau).
CMatrix ce_product(const Channel& ch, const PeripheralDecomposition& pd,
                   const CMatrix& X, const CMatrix& Y);
CMatrix ce_product(const Channel& ch, const CMatrix& X, const CMatrix& Y);

struct IterativeCEResult {
  CMatrix estimate;
  long k_used = 0;
};

// The subsequence route: scan k <= k_max for the first k at which the
// peripheral phases simultaneously return, max_i |mu_i^k - 1| < delta, and the
// transient factor transient_radius^k has dropped below delta as well, then
// evaluate (lambda mu)^-k tau^k(XY). X and Y must be peripheral eigenvectors
// with (snapped) eigenvalues lambda and mu.
IterativeCEResult ce_product_iterative(const Channel& ch, const CMatrix& X,
                                       Complex lambda, const CMatrix& Y,
                                       Complex mu, long k_max = 100000,
                                       double delta = 1e-3);

struct BoundaryAlgebra {
  std::vector<PeripheralMode> basis;
  // structure[a](b, c) is the coefficient of basis c in (B_a o B_b).
  std::vector<CMatrix> structure;
  CVector unit_coords;
  double closure_residual = 0.0;
  CMatrix projector;  // kept for evaluating o on span elements

  Index dim() const { return static_cast<Index>(basis.size()); }
  double checksum() const;  // sqrt(sum |gamma|^2)
};

BoundaryAlgebra boundary_algebra(const Channel& ch);

struct CStarAxiomReport {
  double associativity_gap = 0.0;
  double involution_gap = 0.0;
  double unit_gap = 0.0;
  double cstar_identity_gap = 0.0;  // | ||X^dag o X||_op - ||X||_op^2 |
};

// Exercises the axioms over all basis triples plus sample_count random
// elements of the span; norms and adjoints are the original matrix ones.
CStarAxiomReport verify_cstar_axioms(const Channel& ch,
                                     const BoundaryAlgebra& alg,
                                     int sample_count, std::uint64_t seed);

struct RestrictedAutomorphismReport {
  double hom_gap = 0.0;      // max ||tau(X o Y) - tau(X) o tau(Y)||
  double adjoint_gap = 0.0;  // max ||tau(X^dag) - tau(X)^dag||
  bool bijective = false;
};

RestrictedAutomorphismReport verify_restricted_automorphism(const Channel& ch);

}  // namespace ppb
