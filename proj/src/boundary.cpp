#include "ppb/boundary.hpp"

#include <Eigen/QR>

#include <algorithm>
#include <cmath>

namespace ppb {

namespace {

constexpr double kMembershipTol = 1e-7;

void require_in_p(const PeripheralDecomposition& pd, const CMatrix& X,
                  const char* who) {
  const CVector v = vec(X);
  const double n = v.norm();
  if (n == 0.0) return;
  const double resid = (v - pd.projector * v).norm() / n;
  if (resid > kMembershipTol)
    throw NotPeripheral(std::string(who) + ": peripheral residual " +
                        std::to_string(resid));
}

}  // namespace

CMatrix ce_product(const Channel& ch, const PeripheralDecomposition& pd,
                   const CMatrix& X, const CMatrix& Y) {
  require_in_p(pd, X, "ce_product");
  require_in_p(pd, Y, "ce_product");
  return unvec(pd.projector * vec((X * Y).eval()), ch.dim(), ch.dim());
}

CMatrix ce_product(const Channel& ch, const CMatrix& X, const CMatrix& Y) {
  return ce_product(ch, peripheral_decomposition(ch), X, Y);
}

IterativeCEResult ce_product_iterative(const Channel& ch, const CMatrix& X,
                                       Complex lambda, const CMatrix& Y,
                                       Complex mu, long k_max, double delta) {
  ch.require_ucp("ce_product_iterative");
  const auto check_mode = [&](const CMatrix& Z, Complex value) {
    const double n = hs_norm(Z);
    if (n == 0.0) throw NotPeripheral("ce_product_iterative: zero input");
    if (std::abs(std::abs(value) - 1.0) > ch.tol().peripheral_tol)
      throw NotPeripheral("ce_product_iterative: eigenvalue off the circle");
    const double resid = hs_norm(ch.apply(Z) - value * Z) / n;
    if (resid > kMembershipTol)
      throw NotPeripheral("ce_product_iterative: eigen residual " +
                          std::to_string(resid));
  };
  check_mode(X, lambda);
  check_mode(Y, mu);

  const SpectralData sd = spectrum(ch);
  const std::vector<Complex> peripheral = sd.peripheral_values();
  // The limit needs the peripheral phases to return AND the transient factor
  // to die; a k that only wins the phase race still carries
  // transient_radius^k of the transient component of XY.
  std::vector<Complex> pows(peripheral.size(), Complex(1.0, 0.0));
  double transient_pow = 1.0;
  long k_used = -1;
  long best_k = 0;
  double best = 1e300;
  for (long k = 1; k <= k_max; ++k) {
    transient_pow *= sd.transient_radius;
    double worst = transient_pow;
    for (std::size_t i = 0; i < pows.size(); ++i) {
      pows[i] *= peripheral[i];
      worst = std::max(worst, std::abs(pows[i] - Complex(1.0, 0.0)));
    }
    if (worst < best) {
      best = worst;
      best_k = k;
    }
    if (worst < delta) {
      k_used = k;
      break;
    }
  }
  if (k_used < 0)
    throw SubsequenceNotFound(
        "ce_product_iterative: no simultaneous return within k_max, best "
        "max|mu^k - 1| = " + std::to_string(best) + " at k = " +
        std::to_string(best_k));

  const double phase = std::arg(lambda * mu);
  const Complex factor =
      std::exp(Complex(0.0, -phase * static_cast<double>(k_used)));
  const CMatrix Sk = matrix_power(ch.superop(), k_used);
  IterativeCEResult out;
  out.k_used = k_used;
  out.estimate =
      unvec(CVector(factor * (Sk * vec((X * Y).eval()))), ch.dim(), ch.dim());
  return out;
}

double BoundaryAlgebra::checksum() const {
  double s = 0.0;
  for (const auto& g : structure) s += g.squaredNorm();
  return std::sqrt(s);
}

BoundaryAlgebra boundary_algebra(const Channel& ch) {
  const PeripheralDecomposition pd = peripheral_decomposition(ch);
  const Index k = pd.dim_p();
  const Index d = ch.dim();

  BoundaryAlgebra alg;
  alg.basis = pd.p_basis;
  alg.projector = pd.projector;

  // p_basis spans range(projector) but is not orthogonal in general, so
  // coordinates come from a least-squares solve.
  CMatrix Vp(d * d, k);
  for (Index a = 0; a < k; ++a) Vp.col(a) = vec(pd.p_basis[a].matrix);
  Eigen::ColPivHouseholderQR<CMatrix> solver(Vp);

  alg.structure.assign(static_cast<std::size_t>(k), CMatrix::Zero(k, k));
  double worst = 0.0;
  for (Index a = 0; a < k; ++a) {
    for (Index b = 0; b < k; ++b) {
      const CMatrix Z =
          ce_product(ch, pd, pd.p_basis[a].matrix, pd.p_basis[b].matrix);
      const CVector coords = solver.solve(vec(Z));
      alg.structure[static_cast<std::size_t>(a)].row(b) = coords.transpose();
      worst = std::max(worst, (vec(Z) - Vp * coords).norm());
    }
  }
  alg.closure_residual = worst;
  alg.unit_coords = solver.solve(vec(CMatrix(CMatrix::Identity(d, d))));
  return alg;
}

CStarAxiomReport verify_cstar_axioms(const Channel& ch,
                                     const BoundaryAlgebra& alg,
                                     int sample_count, std::uint64_t seed) {
  const Index d = ch.dim();
  const std::size_t k = static_cast<std::size_t>(alg.dim());

  auto product = [&](const CMatrix& X, const CMatrix& Y) {
    return unvec(CVector(alg.projector * vec((X * Y).eval())), d, d);
  };

  std::vector<CMatrix> elems;
  for (const auto& m : alg.basis) elems.push_back(m.matrix);
  std::mt19937_64 rng(seed ^ 0xce5a11ull);
  for (int s = 0; s < sample_count; ++s) {
    CMatrix Z = CMatrix::Zero(d, d);
    for (const auto& m : alg.basis) Z += gaussian_complex(rng) * m.matrix;
    const double n = hs_norm(Z);
    if (n > 0) elems.push_back(Z / n);
  }

  CStarAxiomReport rep;
  const CMatrix I = CMatrix::Identity(d, d);
  const std::size_t total = elems.size();
  // Triples over the basis plus a sampled tail; everything stays O(k^3).
  for (std::size_t a = 0; a < total; ++a) {
    const CMatrix& X = elems[a];
    rep.unit_gap = std::max(rep.unit_gap, hs_norm(product(I, X) - X));
    rep.unit_gap = std::max(rep.unit_gap, hs_norm(product(X, I) - X));
    const double op = operator_norm(X);
    rep.cstar_identity_gap =
        std::max(rep.cstar_identity_gap,
                 std::abs(operator_norm(product(X.adjoint(), X)) - op * op));
    for (std::size_t b = 0; b < total; ++b) {
      const CMatrix& Y = elems[b];
      const CMatrix XY = product(X, Y);
      rep.involution_gap =
          std::max(rep.involution_gap,
                   hs_norm(XY.adjoint() - product(Y.adjoint(), X.adjoint())));
      for (std::size_t c = 0; c < std::min(total, k); ++c) {
        const CMatrix& Z = elems[c];
        rep.associativity_gap =
            std::max(rep.associativity_gap,
                     hs_norm(product(XY, Z) - product(X, product(Y, Z))));
      }
    }
  }
  return rep;
}

RestrictedAutomorphismReport verify_restricted_automorphism(const Channel& ch) {
  const PeripheralDecomposition pd = peripheral_decomposition(ch);
  RestrictedAutomorphismReport rep;
  for (const auto& a : pd.p_basis) {
    rep.adjoint_gap = std::max(
        rep.adjoint_gap,
        hs_norm(ch.apply(a.matrix.adjoint()) - ch.apply(a.matrix).adjoint()));
    for (const auto& b : pd.p_basis) {
      const CMatrix lhs = ch.apply(ce_product(ch, pd, a.matrix, b.matrix));
      const CMatrix rhs =
          ce_product(ch, pd, ch.apply(a.matrix), ch.apply(b.matrix));
      rep.hom_gap = std::max(rep.hom_gap, hs_norm(lhs - rhs));
    }
  }
  const CMatrix M = pd.p_range.adjoint() * ch.superop() * pd.p_range;
  if (M.rows() == 0) {
    rep.bijective = true;
    return rep;
  }
  Eigen::JacobiSVD<CMatrix> svd(M);
  const auto& sigma = svd.singularValues();
  rep.bijective =
      sigma(sigma.size() - 1) > ch.tol().rank_tol_factor * sigma(0);
  return rep;
}

}  // namespace ppb
