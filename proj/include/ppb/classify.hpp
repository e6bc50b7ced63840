#pragma once

#include <cstdint>
#include <optional>

#include "ppb/boundary.hpp"
#include "ppb/spectral.hpp"

namespace ppb {

// Subspace of M_d with a product-closure measurement; star_closed records
// whether the span is adjoint-closed.
struct SubalgebraBasis {
  HSBasis basis;
  bool star_closed = false;
  double product_closure_residual = 0.0;
};

// Multiplicative domain of tau^k. The defect forms
//   tr(tau^k(A^dag B)) - <tau^k A, tau^k B>  and its X X^dag twin
// are PSD by Kadison-Schwarz, so the domain is the exact null space of their
// Gram matrix over the matrix-unit basis.
SubalgebraBasis multiplicative_domain(const Channel& ch, int k = 1);

struct MultDomainInf {
  SubalgebraBasis algebra;
  int stabilized_at = 0;
  bool not_stabilized = false;
};

// Intersection of M_{tau^k} until the dimension holds for d^2 consecutive k;
// k_max <= 0 defaults to 4 d^2.
MultDomainInf multiplicative_domain_inf(const Channel& ch, int k_max = 0);

struct PACondition {
  bool ok = false;
  double gap = 0.0;
};

// Five equivalent characterizations of peripherally automorphic, evaluated
// independently:
//   c1  peripheral basis inside the multiplicative domain (direct gaps)
//   c2  peripheral basis inside the truncated M_{tau^infty}
//   c3  Choi-Effros product equals the matrix product on basis pairs
//   c4  tau(B_a^dag B_b) = B_a^dag B_b per peripheral eigenspace (polarized)
//   c5  B L_i = lambda L_i B against every Kraus coefficient
// overall follows c5; agree records whether all five concur.
struct PAReport {
  PACondition c1, c2, c3, c4, c5;
  bool agree = false;
  bool overall = false;
};

PAReport is_peripherally_automorphic(const Channel& ch);

// Non-unital algebra generated by the Kraus coefficients; star_closed checks
// every L_i^dag against the closed span.
SubalgebraBasis kraus_algebra(const Channel& ch);

struct InvariantStates {
  std::vector<CMatrix> fixed_basis;  // Hermitian basis of E_1(tau^*)
  StateDensity rho0;                 // unit-eigenvalue projection of I/d
  double faithful_gap = 0.0;         // smallest eigenvalue of rho0
};

// rho0 dominates sigma/d for every invariant state sigma, so it is full rank
// exactly when some faithful invariant state exists.
InvariantStates invariant_states(const Channel& ch);

struct StationarityReport {
  bool star_closed = false;
  int algebra_dim = 0;
  StateDensity rho0;
  double faithful_gap = 0.0;
  bool stationary = false;
  // Support projection of ker(rho0); satisfies tau(P) <= P, tau(P) != P.
  std::optional<CMatrix> witness;
};

// Cross-checks the spectral criterion (full-rank rho0) against Kraus-algebra
// star-closure; disagreement raises InternalInconsistency.
StationarityReport is_stationary(const Channel& ch);

struct BlockDecomposition {
  std::vector<CMatrix> projections;  // mutually orthogonal, summing to I
  std::vector<bool> irreducible_flags;
};

// Splits a stationary channel along spectral projections of random Hermitian
// fixed points until every block restricts irreducibly.
BlockDecomposition irreducible_blocks(const Channel& ch,
                                      std::uint64_t seed = 0);

struct StateReducingReport {
  double gap = 0.0;  // smallest eigenvalue of sigma_psi - tau^*(sigma_psi)
  bool reducing = false;
  bool preserving = false;
  bool consistent = false;  // reducing must imply preserving for unital maps
};

StateReducingReport state_reducing_gap(const Channel& ch,
                                       const StateDensity& psi);

struct KribsReport {
  bool sub = false;    // tau(P) <= P
  bool super = false;  // P <= tau(P)
  bool range_invariant = false;    // L_i range(P) inside range(P)
  bool corange_invariant = false;  // same for L_i^dag
  bool consistent = false;
};

// Invariant-subspace characterization: P <= tau(P) iff range(P) is invariant
// under every L_i, and dually for tau(P) <= P with the adjoints.
KribsReport kribs_check(const Channel& ch, const CMatrix& P);

struct AutomorphismReport {
  bool unimodular = false;
  std::optional<double> multiplicative_gap;  // set only when unimodular
  bool bijective = false;
  bool is_automorphism = false;
};

// A UCP map with spectrum on the unit circle is a *-automorphism; verified by
// multiplicativity over all matrix-unit pairs plus invertibility.
AutomorphismReport automorphism_check(const Channel& ch);

struct ConvexityReport {
  bool applicable = false;  // the combination is peripherally automorphic
  bool spectrum_contained = false;
  bool space_contained = false;
  bool action_agrees = false;
};

// For a peripherally automorphic convex combination, its peripheral spectrum
// and space embed into every part's, and all parts agree with it on P.
ConvexityReport convexity_check(const std::vector<double>& weights,
                                const std::vector<Channel>& parts);

// max |tr(rho0 X^dag Y)| over peripheral X and transient Y; the decomposition
// is orthogonal in the GNS inner product of the invariant state.
double gns_orthogonality_gap(const Channel& ch);

}  // namespace ppb
