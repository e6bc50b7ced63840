#pragma once

#include <functional>
#include <vector>

#include "ppb/types.hpp"

namespace ppb {

// --- Hilbert-Schmidt basics ------------------------------------------------
//
// vec is column stacking: vec(M) = [M e_0; M e_1; ...]. All superoperator
// formulas in the channel layer depend on this convention.

CVector vec(const CMatrix& A);
CMatrix unvec(const CVector& v, Index rows, Index cols);
CMatrix unvec_square(const CVector& v);
CMatrix kron(const CMatrix& A, const CMatrix& B);
CMatrix matrix_unit(Index d, Index i, Index j);

// tr(A^dag B), antilinear in the first argument.
Complex hs_inner(const CMatrix& A, const CMatrix& B);
double hs_norm(const CMatrix& A);

// Orthonormal families of d x d matrices under the unnormalized trace inner
// product.
struct HSBasis {
  Index dim = 0;
  std::vector<CMatrix> elements;
  Index size() const { return static_cast<Index>(elements.size()); }
};

// Modified Gram-Schmidt with reorthogonalization. Keeps input order, discards
// directions whose residual after projection falls below
// rank_tol_factor * (largest input norm).
HSBasis orthonormalize_hs(const std::vector<CMatrix>& vectors,
                          const ToleranceConfig& tol);

// --- dense eigenproblems ---------------------------------------------------

struct EigResult {
  CVector values;
  CMatrix vectors;  // right eigenvectors as columns, unit 2-norm
};

// General complex eigendecomposition; eigenvalues carry algebraic multiplicity
// as repetition.
EigResult eig_general(const CMatrix& A);
CVector eig_values(const CMatrix& A);

// Eigenvalue selection with an explicit gray zone. An eigenvalue in the gray
// zone means the requested split is numerically meaningless; callers get a
// BoundaryAmbiguity instead of an arbitrary verdict.
struct EigSelector {
  std::function<bool(Complex)> select;
  std::function<bool(Complex)> ambiguous;

  static EigSelector modulus_at_least(double cutoff, double guard);
  // |lambda| within peripheral_tol of 1 selects; the open annulus between
  // peripheral_tol and cluster_tol is ambiguous.
  static EigSelector peripheral_band(const ToleranceConfig& tol);
  // cluster around a fixed point of the plane, typically 1.
  static EigSelector near_point(Complex center, double radius,
                                double ambiguous_radius);
};

struct SpectralProjection {
  CMatrix projector;     // idempotent, commutes with A, generally oblique
  CMatrix range_basis;   // orthonormal columns spanning range(projector)
  CMatrix kernel_basis;  // orthonormal columns spanning range(I - projector)
  Index rank = 0;
};

// Spectral projector onto the invariant subspace of the selected eigenvalues,
// via complex Schur factorization: selected eigenvalues are reordered to the
// leading block and the coupling block R solves the triangular Sylvester
// equation S11 R - R S22 = S12. Robust when unselected eigenvalues are
// defective.
SpectralProjection spectral_projection(const CMatrix& A,
                                       const EigSelector& selector,
                                       const ToleranceConfig& tol);
CMatrix spectral_projector(const CMatrix& A, const EigSelector& selector,
                           const ToleranceConfig& tol);

// Solves A R - R B = C for upper triangular A, B by column back-substitution.
CMatrix sylvester_triangular(const CMatrix& A, const CMatrix& B,
                             const CMatrix& C);

// Orthonormal basis of {v : ||Av|| <= rank_tol_factor * sigma_max * ||v||}.
// Empty (n x 0) result allowed; the zero matrix yields the full space.
CMatrix null_space(const CMatrix& A, const ToleranceConfig& tol);

// Same with an absolute singular-value cutoff. The relative rule breaks down
// for shifted operators T - lambda I that are themselves nearly zero, where
// "null" must mean small against the caller's scale, not against sigma_max.
CMatrix null_space_abs(const CMatrix& A, double threshold);

// Smallest eigenvalue of (A + A^dag)/2. Rejects inputs that are not Hermitian
// within eq_tol relative to their norm.
double psd_gap(const CMatrix& A, const ToleranceConfig& tol);

// Largest singular value.
double operator_norm(const CMatrix& A);

// --- subspace arithmetic on orthonormal column bases ------------------------

// Orthonormal basis of the column span.
CMatrix orth_columns(const CMatrix& M, const ToleranceConfig& tol);

// max_j || (I - B B^dag) v_j || / ||v_j|| over the columns of V.
double subspace_residual(const CMatrix& V, const CMatrix& B);

bool subspaces_equal(const CMatrix& B1, const CMatrix& B2, double tol);

// Basis of span(B1) /\ span(B2); directions are kept when the PSD defect
// (I - P1) + (I - P2) vanishes below null_floor.
CMatrix subspace_intersection(const CMatrix& B1, const CMatrix& B2,
                              double null_floor);

// Hermitian orthonormal basis with the same complex span as the given
// adjoint-closed family.
std::vector<CMatrix> hermitian_basis(const std::vector<CMatrix>& span,
                                     const ToleranceConfig& tol);

CMatrix matrix_power(const CMatrix& A, long k);

// Rotates each column so its largest-modulus entry is real positive; pure
// cosmetics for reproducible bases.
void canonicalize_phases(CMatrix& columns);

}  // namespace ppb
