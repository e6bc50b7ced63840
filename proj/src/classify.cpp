#include "ppb/classify.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>

namespace ppb {

namespace {

constexpr double kGapTol = 1e-7;       // verdict threshold for exact identities
constexpr double kStarTol = 1e-8;      // adjoint-closure membership
constexpr double kGramNullFloor = 1e-11;  // PSD Gram null cutoff, above fp noise

CMatrix stack_vecs(const std::vector<CMatrix>& mats) {
  if (mats.empty()) return CMatrix(0, 0);
  CMatrix V(mats.front().size(), static_cast<Index>(mats.size()));
  for (std::size_t j = 0; j < mats.size(); ++j)
    V.col(static_cast<Index>(j)) = vec(mats[j]);
  return V;
}

SubalgebraBasis make_subalgebra(const Channel& ch, const CMatrix& span_cols) {
  const Index d = ch.dim();
  SubalgebraBasis out;
  out.basis.dim = d;
  for (Index j = 0; j < span_cols.cols(); ++j)
    out.basis.elements.push_back(unvec(span_cols.col(j), d, d));
  double star = 0.0;
  double closure = 0.0;
  for (const auto& A : out.basis.elements) {
    star = std::max(star,
                    subspace_residual(stack_vecs({A.adjoint()}), span_cols));
    for (const auto& B : out.basis.elements)
      closure = std::max(
          closure, subspace_residual(stack_vecs({(A * B).eval()}), span_cols));
  }
  out.star_closed = star <= kStarTol;
  out.product_closure_residual = closure;
  return out;
}

// Gram matrix of the two scalarized Kadison-Schwarz defect forms of tau^k over
// the matrix-unit basis, assembled from S^k alone.
CMatrix mult_domain_gram(const Channel& ch, const CMatrix& Sk) {
  const Index d = ch.dim();
  const Index n = d * d;
  const CVector trace_row = Sk.adjoint() * vec(CMatrix(CMatrix::Identity(d, d)));
  // w(m) = tr(tau^k(E_m)) where vec(E_ij) is the standard basis vector i+j*d.
  CMatrix G = CMatrix::Zero(n, n);
  for (Index i = 0; i < d; ++i)
    for (Index j = 0; j < d; ++j)
      for (Index kk = 0; kk < d; ++kk)
        for (Index l = 0; l < d; ++l) {
          const Index a = i + j * d;
          const Index b = kk + l * d;
          Complex g(0.0, 0.0);
          if (i == kk) g += std::conj(trace_row(j + l * d));  // tr tau^k(E_a^dag E_b)
          if (j == l) g += std::conj(trace_row(kk + i * d));  // tr tau^k(E_b E_a^dag)
          G(a, b) = g;
        }
  G -= 2.0 * (Sk.adjoint() * Sk);
  return 0.5 * (G + G.adjoint()).eval();
}

CMatrix gram_null_basis(const CMatrix& G) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(G);
  if (es.info() != Eigen::Success)
    throw NonConvergence("multiplicative_domain: eigensolver failed");
  Index count = 0;
  while (count < G.rows() && es.eigenvalues()(count) <= kGramNullFloor) ++count;
  CMatrix B = es.eigenvectors().leftCols(count);
  canonicalize_phases(B);
  return B;
}

}  // namespace

SubalgebraBasis multiplicative_domain(const Channel& ch, int k) {
  ch.require_ucp("multiplicative_domain");
  if (k < 1) throw BadParams("multiplicative_domain: k must be >= 1");
  const CMatrix Sk = matrix_power(ch.superop(), k);
  return make_subalgebra(ch, gram_null_basis(mult_domain_gram(ch, Sk)));
}

MultDomainInf multiplicative_domain_inf(const Channel& ch, int k_max) {
  ch.require_ucp("multiplicative_domain_inf");
  const Index n = ch.dim() * ch.dim();
  const int window = static_cast<int>(n);
  if (k_max <= 0) k_max = static_cast<int>(4 * n);

  CMatrix Sk = ch.superop();
  CMatrix basis = gram_null_basis(mult_domain_gram(ch, Sk));
  int last_change = 1;
  int k = 1;
  while (k < k_max && k - last_change < window && basis.cols() > 0) {
    ++k;
    Sk = (Sk * ch.superop()).eval();
    const CMatrix next = gram_null_basis(mult_domain_gram(ch, Sk));
    const CMatrix inter = subspace_intersection(basis, next, kGramNullFloor);
    if (inter.cols() != basis.cols()) last_change = k;
    basis = inter;
  }

  MultDomainInf out;
  out.algebra = make_subalgebra(ch, basis);
  out.stabilized_at = last_change;
  out.not_stabilized = (k >= k_max) && (k - last_change < window);
  return out;
}

PAReport is_peripherally_automorphic(const Channel& ch) {
  ch.require_ucp("is_peripherally_automorphic");
  const PeripheralDecomposition pd = peripheral_decomposition(ch);
  PAReport rep;

  // c1: direct multiplicative-domain gaps on the peripheral basis.
  for (const auto& mode : pd.p_basis) {
    const CMatrix& B = mode.matrix;
    rep.c1.gap = std::max(
        rep.c1.gap, hs_norm(ch.apply((B.adjoint() * B).eval()) -
                            ch.apply(B.adjoint()) * ch.apply(B)));
    rep.c1.gap = std::max(
        rep.c1.gap, hs_norm(ch.apply((B * B.adjoint()).eval()) -
                            ch.apply(B) * ch.apply(B.adjoint())));
  }
  rep.c1.ok = rep.c1.gap <= kGapTol;

  // c2: membership of the peripheral basis in the truncated M_{tau^infty}.
  const MultDomainInf inf = multiplicative_domain_inf(ch);
  CMatrix inf_span(ch.dim() * ch.dim(), inf.algebra.basis.size());
  for (Index j = 0; j < inf.algebra.basis.size(); ++j)
    inf_span.col(j) = vec(inf.algebra.basis.elements[static_cast<std::size_t>(j)]);
  for (const auto& mode : pd.p_basis)
    rep.c2.gap = std::max(
        rep.c2.gap, subspace_residual(stack_vecs({mode.matrix}), inf_span));
  rep.c2.ok = rep.c2.gap <= kGapTol;

  // c3: the Choi-Effros product against the ordinary product.
  for (const auto& a : pd.p_basis)
    for (const auto& b : pd.p_basis)
      rep.c3.gap = std::max(
          rep.c3.gap, hs_norm(ce_product(ch, pd, a.matrix, b.matrix) -
                              a.matrix * b.matrix));
  rep.c3.ok = rep.c3.gap <= kGapTol;

  // c4: tau fixes B_a^dag B_b within each peripheral eigenspace (the
  // sesquilinear polarization of tau(X^dag X) = X^dag X over E_lambda).
  for (const auto& a : pd.p_basis)
    for (const auto& b : pd.p_basis) {
      if (std::abs(a.eigenvalue - b.eigenvalue) > ch.tol().cluster_tol)
        continue;
      const CMatrix W = (a.matrix.adjoint() * b.matrix).eval();
      rep.c4.gap = std::max(rep.c4.gap, hs_norm(ch.apply(W) - W));
    }
  rep.c4.ok = rep.c4.gap <= kGapTol;

  // c5: the Kraus commutation relations.
  for (const auto& mode : pd.p_basis)
    for (const auto& L : ch.kraus())
      rep.c5.gap = std::max(
          rep.c5.gap, hs_norm(mode.matrix * L -
                              mode.eigenvalue * (L * mode.matrix).eval()));
  rep.c5.ok = rep.c5.gap <= kGapTol;

  rep.overall = rep.c5.ok;
  rep.agree = (rep.c1.ok == rep.c5.ok) && (rep.c2.ok == rep.c5.ok) &&
              (rep.c3.ok == rep.c5.ok) && (rep.c4.ok == rep.c5.ok);
  return rep;
}

SubalgebraBasis kraus_algebra(const Channel& ch) {
  ch.require_ucp("kraus_algebra");
  const ToleranceConfig& tol = ch.tol();
  HSBasis span = orthonormalize_hs(ch.kraus(), tol);
  for (;;) {
    std::vector<CMatrix> extended = span.elements;
    for (const auto& A : span.elements)
      for (const auto& B : span.elements) extended.push_back(A * B);
    HSBasis next = orthonormalize_hs(extended, tol);
    if (next.size() == span.size()) break;
    span = std::move(next);
  }
  SubalgebraBasis out = make_subalgebra(ch, stack_vecs(span.elements));
  // star closure is judged against the generators, not the basis
  const CMatrix cols = stack_vecs(span.elements);
  double star = 0.0;
  for (const auto& L : ch.kraus())
    star = std::max(star, subspace_residual(stack_vecs({L.adjoint()}), cols));
  out.star_closed = star <= kStarTol;
  return out;
}

InvariantStates invariant_states(const Channel& ch) {
  ch.require_ucp("invariant_states");
  const ToleranceConfig& tol = ch.tol();
  const Index d = ch.dim();
  const CMatrix S_adj = ch.superop().adjoint();

  InvariantStates out;
  const CMatrix fixed = null_space_abs(
      CMatrix(S_adj - CMatrix::Identity(d * d, d * d)), tol.eq_tol);
  std::vector<CMatrix> complex_basis;
  for (Index j = 0; j < fixed.cols(); ++j)
    complex_basis.push_back(unvec(fixed.col(j), d, d));
  out.fixed_basis = hermitian_basis(complex_basis, tol);
  if (static_cast<Index>(out.fixed_basis.size()) != fixed.cols())
    throw InternalInconsistency(
        "invariant_states: fixed space of the dual is not adjoint-closed");

  const EigSelector near_one = EigSelector::near_point(
      Complex(1.0, 0.0), tol.cluster_tol, 10.0 * tol.cluster_tol);
  const CMatrix P1 = spectral_projector(S_adj, near_one, tol);
  CMatrix rho = unvec(CVector(P1 * vec(CMatrix(CMatrix::Identity(d, d) /
                                               static_cast<double>(d)))),
                      d, d);
  rho = 0.5 * (rho + rho.adjoint()).eval();
  const double tr = rho.trace().real();
  if (std::abs(tr) < 0.5)
    throw InternalInconsistency("invariant_states: projected state trace " +
                                std::to_string(tr));
  rho /= tr;
  out.rho0.dim = d;
  out.rho0.rho = rho;
  out.faithful_gap = psd_gap(rho, tol);
  return out;
}

namespace {

Index state_rank(const CMatrix& rho, const ToleranceConfig& tol) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(rho, Eigen::EigenvaluesOnly);
  const double emax = es.eigenvalues().cwiseAbs().maxCoeff();
  Index rank = 0;
  for (Index i = 0; i < es.eigenvalues().size(); ++i)
    if (es.eigenvalues()(i) > tol.rank_tol_factor * emax) ++rank;
  return rank;
}

}  // namespace

StationarityReport is_stationary(const Channel& ch) {
  ch.require_ucp("is_stationary");
  const ToleranceConfig& tol = ch.tol();
  const Index d = ch.dim();
  const InvariantStates inv = invariant_states(ch);
  const SubalgebraBasis ka = kraus_algebra(ch);

  StationarityReport rep;
  rep.star_closed = ka.star_closed;
  rep.algebra_dim = static_cast<int>(ka.basis.size());
  rep.rho0 = inv.rho0;
  rep.faithful_gap = inv.faithful_gap;
  const bool spectral_verdict =
      inv.faithful_gap > tol.eq_tol && state_rank(inv.rho0.rho, tol) == d;
  if (spectral_verdict != ka.star_closed)
    throw InternalInconsistency(
        "is_stationary: faithful_gap " + std::to_string(inv.faithful_gap) +
        " and Kraus-algebra star closure disagree");
  rep.stationary = spectral_verdict;

  if (!rep.stationary) {
    Eigen::SelfAdjointEigenSolver<CMatrix> es(inv.rho0.rho);
    const double emax = es.eigenvalues().cwiseAbs().maxCoeff();
    CMatrix P = CMatrix::Zero(d, d);
    for (Index i = 0; i < es.eigenvalues().size(); ++i)
      if (es.eigenvalues()(i) <= tol.rank_tol_factor * emax)
        P += es.eigenvectors().col(i) * es.eigenvectors().col(i).adjoint();
    rep.witness = P;
  }
  return rep;
}

namespace {

// Recursive splitting along spectral projections of a random Hermitian fixed
// point; blocks arrive ordered by descending H-eigenvalue.
void split_blocks(const Channel& ch, std::mt19937_64& rng, int depth,
                  std::vector<CMatrix>& blocks_out) {
  const Index d = ch.dim();
  const ToleranceConfig& tol = ch.tol();
  if (depth > 2 * static_cast<int>(d))
    throw InternalInconsistency("irreducible_blocks: runaway recursion");

  const CMatrix fixed = null_space_abs(
      CMatrix(ch.superop() - CMatrix::Identity(d * d, d * d)), tol.eq_tol);
  if (fixed.cols() <= 1) {
    blocks_out.push_back(CMatrix::Identity(d, d));
    return;
  }
  std::vector<CMatrix> complex_basis;
  for (Index j = 0; j < fixed.cols(); ++j)
    complex_basis.push_back(unvec(fixed.col(j), d, d));
  const std::vector<CMatrix> herm = hermitian_basis(complex_basis, tol);

  for (int attempt = 0; attempt < 8; ++attempt) {
    CMatrix H = CMatrix::Zero(d, d);
    for (const auto& B : herm) H += gaussian(rng) * B;
    Eigen::SelfAdjointEigenSolver<CMatrix> es(H);
    const double scale = std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff());

    // group eigenvalues of H, descending
    std::vector<std::pair<Index, Index>> groups;  // [begin, end)
    Index begin = 0;
    for (Index i = 1; i <= d; ++i) {
      if (i == d ||
          es.eigenvalues()(i) - es.eigenvalues()(i - 1) > tol.cluster_tol * scale) {
        groups.emplace_back(begin, i);
        begin = i;
      }
    }
    if (groups.size() < 2) continue;  // degenerate draw, H nearly scalar
    std::reverse(groups.begin(), groups.end());

    for (const auto& [g0, g1] : groups) {
      const CMatrix Vc = es.eigenvectors().middleCols(g0, g1 - g0);
      // corner channel on range of the spectral projection
      std::vector<CMatrix> corner_kraus;
      for (const auto& L : ch.kraus())
        corner_kraus.push_back(Vc.adjoint() * L * Vc);
      const Channel corner = Channel::from_kraus(std::move(corner_kraus), tol);
      std::vector<CMatrix> sub;
      split_blocks(corner, rng, depth + 1, sub);
      for (const auto& Ps : sub) blocks_out.push_back(Vc * Ps * Vc.adjoint());
    }
    return;
  }
  throw DegenerateDraws(
      "irreducible_blocks: 8 random fixed points failed to split a reducible "
      "block");
}

}  // namespace

BlockDecomposition irreducible_blocks(const Channel& ch, std::uint64_t seed) {
  const StationarityReport st = is_stationary(ch);
  if (!st.stationary)
    throw NotStationary("irreducible_blocks: no faithful invariant state");
  std::mt19937_64 rng(seed ^ 0xb10cull);
  BlockDecomposition out;
  split_blocks(ch, rng, 0, out.projections);
  for (const auto& P : out.projections) {
    // restricted fixed space must be one-dimensional
    const CMatrix V = orth_columns(P, ch.tol());
    std::vector<CMatrix> corner_kraus;
    for (const auto& L : ch.kraus())
      corner_kraus.push_back(V.adjoint() * L * V);
    const Channel corner = Channel::from_kraus(std::move(corner_kraus), ch.tol());
    const Index b = V.cols();
    const CMatrix fixed = null_space_abs(
        CMatrix(corner.superop() - CMatrix::Identity(b * b, b * b)),
        ch.tol().eq_tol);
    out.irreducible_flags.push_back(fixed.cols() == 1);
  }
  return out;
}

StateReducingReport state_reducing_gap(const Channel& ch,
                                       const StateDensity& psi) {
  ch.require_ucp("state_reducing_gap");
  StateDensity checked = StateDensity::checked(psi.rho, ch.tol());
  if (checked.dim != ch.dim())
    throw DimensionMismatch("state_reducing_gap: state dimension differs");
  const CMatrix diff = psi.rho - ch.apply_adjoint(psi.rho);
  StateReducingReport rep;
  rep.gap = psd_gap(diff, ch.tol());
  rep.reducing = rep.gap >= -ch.tol().eq_tol;
  rep.preserving = diff.norm() <= ch.tol().eq_tol;
  rep.consistent = !(rep.reducing && !rep.preserving);
  return rep;
}

KribsReport kribs_check(const Channel& ch, const CMatrix& P) {
  const ToleranceConfig& tol = ch.tol();
  if (P.rows() != ch.dim() || P.cols() != ch.dim())
    throw DimensionMismatch("kribs_check: wrong projection shape");
  if ((P * P - P).norm() > tol.eq_tol * std::max(1.0, P.norm()) ||
      (P - P.adjoint()).norm() > tol.eq_tol * std::max(1.0, P.norm()))
    throw NotAProjection("kribs_check: P is not an orthogonal projection");

  const CMatrix tauP = ch.apply(P);
  const CMatrix comp = CMatrix::Identity(ch.dim(), ch.dim()) - P;
  KribsReport rep;
  rep.sub = psd_gap(CMatrix(P - tauP), tol) >= -tol.eq_tol;
  rep.super = psd_gap(CMatrix(tauP - P), tol) >= -tol.eq_tol;
  double range_leak = 0.0, corange_leak = 0.0;
  for (const auto& L : ch.kraus()) {
    range_leak = std::max(range_leak, (comp * L * P).norm());
    corange_leak = std::max(corange_leak, (comp * L.adjoint() * P).norm());
  }
  rep.range_invariant = range_leak <= tol.eq_tol;
  rep.corange_invariant = corange_leak <= tol.eq_tol;
  rep.consistent = (rep.super == rep.range_invariant) &&
                   (rep.sub == rep.corange_invariant);
  return rep;
}

AutomorphismReport automorphism_check(const Channel& ch) {
  ch.require_ucp("automorphism_check");
  const SpectralData sd = spectrum(ch);
  AutomorphismReport rep;
  rep.unimodular = sd.unimodular();
  if (!rep.unimodular) {
    rep.is_automorphism = false;
    return rep;
  }
  const Index d = ch.dim();
  double gap = 0.0;
  for (Index a = 0; a < d * d; ++a)
    for (Index b = 0; b < d * d; ++b) {
      const CMatrix Ea = matrix_unit(d, a % d, a / d);
      const CMatrix Eb = matrix_unit(d, b % d, b / d);
      gap = std::max(gap, hs_norm(ch.apply((Ea * Eb).eval()) -
                                  ch.apply(Ea) * ch.apply(Eb)));
    }
  rep.multiplicative_gap = gap;
  Eigen::JacobiSVD<CMatrix> svd(ch.superop());
  const auto& sigma = svd.singularValues();
  rep.bijective =
      sigma(sigma.size() - 1) > ch.tol().rank_tol_factor * sigma(0);
  rep.is_automorphism = rep.unimodular && gap <= 1e-8 && rep.bijective;
  return rep;
}

ConvexityReport convexity_check(const std::vector<double>& weights,
                                const std::vector<Channel>& parts) {
  const Channel avg = convex_combine(weights, parts);
  ConvexityReport rep;
  rep.applicable = is_peripherally_automorphic(avg).overall;
  if (!rep.applicable) return rep;

  const PeripheralDecomposition pd = peripheral_decomposition(avg);
  const ToleranceConfig& tol = avg.tol();
  rep.spectrum_contained = true;
  rep.space_contained = true;
  double action_gap = 0.0;
  for (const auto& part : parts) {
    const SpectralData sd = spectrum(part);
    for (const auto& lambda : pd.spectral.peripheral_values()) {
      bool found = false;
      for (const auto& mu : sd.peripheral_values())
        if (std::abs(lambda - mu) <= tol.cluster_tol) found = true;
      if (!found) rep.spectrum_contained = false;
    }
    const CMatrix part_proj =
        peripheral_projector(part, ProjectorMethod::schur);
    for (const auto& mode : pd.p_basis) {
      const CVector v = vec(mode.matrix);
      if ((v - part_proj * v).norm() > kGapTol) rep.space_contained = false;
      action_gap = std::max(
          action_gap, hs_norm(avg.apply(mode.matrix) - part.apply(mode.matrix)));
    }
  }
  rep.action_agrees = action_gap <= kGapTol;
  return rep;
}

double gns_orthogonality_gap(const Channel& ch) {
  const StationarityReport st = is_stationary(ch);
  if (!st.stationary)
    throw NotStationary("gns_orthogonality_gap: no faithful invariant state");
  const PeripheralDecomposition pd = peripheral_decomposition(ch);
  double gap = 0.0;
  for (const auto& x : pd.p_basis)
    for (const auto& y : pd.n_basis.elements)
      gap = std::max(gap,
                     std::abs((st.rho0.rho * x.matrix.adjoint() * y).trace()));
  return gap;
}

}  // namespace ppb
