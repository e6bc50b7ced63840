#include <doctest.h>

#include "oracles.hpp"
#include "ppb/boundary.hpp"
#include "ppb/classify.hpp"

using namespace ppb;

TEST_CASE("ce_product unit law") {
  for (const char* name : {"shemesh2", "avg3", "station3", "comp3"}) {
    const Channel ch = fixture(name);
    const CMatrix I = CMatrix::Identity(ch.dim(), ch.dim());
    CHECK(hs_norm(ce_product(ch, I, I) - I) < 1e-10);
  }
}

TEST_CASE("ce_product on avg3 differs from the ordinary square") {
  const Channel ch = fixture("avg3");
  const CMatrix D = oracle::diag3(1, 3, 2);
  const CMatrix DD = ce_product(ch, D, D);
  CHECK(hs_norm(DD - oracle::diag3(1, 9, 5)) < 1e-9);
  CHECK(hs_norm(DD - D * D) > 0.5);  // diag(1,9,5) vs diag(1,9,4)
}

TEST_CASE("ce_product on station3 equals the ordinary product") {
  const Channel ch = fixture("station3");
  const CMatrix X = oracle::diag3(1, 1, -1);
  const CMatrix XX = ce_product(ch, X, X);
  CHECK(hs_norm(XX - CMatrix::Identity(3, 3)) < 1e-9);
}

TEST_CASE("ce_product on comp3 projects the square onto the fixed plane") {
  const Channel ch = fixture("comp3");
  const CMatrix D = oracle::diag3(3, 0, 1);
  CHECK(hs_norm(ch.apply(D) - D) < 1e-12);  // D is fixed
  const CMatrix DD = ce_product(ch, D, D);
  CHECK(hs_norm(DD - oracle::diag3(9, 0, 3)) < 1e-9);
}

TEST_CASE("ce_product rejects non-peripheral input") {
  const Channel ch = fixture("shemesh2");
  CHECK_THROWS_AS(ce_product(ch, matrix_unit(2, 0, 1), matrix_unit(2, 0, 1)),
                  NotPeripheral);
}

TEST_CASE("ce_product_iterative reports a failed subsequence search") {
  // station3 needs k = 2; capping the scan at k = 1 must fail loudly
  const Channel ch = fixture("station3");
  const CMatrix X = oracle::diag3(1, 1, -1) / std::sqrt(3.0);
  CHECK_THROWS_AS(ce_product_iterative(ch, X, Complex(-1, 0), X,
                                       Complex(-1, 0), /*k_max=*/1),
                  SubsequenceNotFound);
}

TEST_CASE("ce_product_iterative matches the spectral route") {
  SUBCASE("station3 with the -1 eigenvector returns at k = 2") {
    const Channel ch = fixture("station3");
    const CMatrix X = oracle::diag3(1, 1, -1) / std::sqrt(3.0);
    const auto r = ce_product_iterative(ch, X, Complex(-1, 0), X,
                                        Complex(-1, 0));
    CHECK(r.k_used == 2);
    CHECK(hs_norm(r.estimate - CMatrix::Identity(3, 3) / 3.0) < 1e-9);
  }
  SUBCASE("avg3 with the fixed diagonal returns at k = 1") {
    const Channel ch = fixture("avg3");
    const CMatrix D = oracle::diag3(1, 3, 2);
    const auto r =
        ce_product_iterative(ch, D, Complex(1, 0), D, Complex(1, 0));
    CHECK(r.k_used == 1);
    CHECK(hs_norm(r.estimate - oracle::diag3(1, 9, 5)) < 1e-9);
  }
  SUBCASE("rational rotation returns at the rotation order") {
    const int q = 5;
    CMatrix U = CMatrix::Identity(2, 2);
    U(1, 1) = std::exp(Complex(0, 2.0 * M_PI / q));
    const Channel ch = unitary_channel(U);
    const CMatrix X = matrix_unit(2, 1, 0);  // eigenvalue conj(omega)
    const CMatrix Y = matrix_unit(2, 0, 1);  // eigenvalue omega
    const Complex omega = std::exp(Complex(0, 2.0 * M_PI / q));
    const auto r =
        ce_product_iterative(ch, X, std::conj(omega), Y, omega);
    CHECK(r.k_used == q);
    CHECK(hs_norm(r.estimate - X * Y) < 1e-9);
  }
}

TEST_CASE("spectral and iterative products agree on fixture eigenpairs") {
  constexpr double kDelta = 1e-3;
  for (const char* name :
       {"shemesh2", "avg3", "comp3", "station3", "faithful3", "tau1_avg"}) {
    const Channel ch = fixture(name);
    const PeripheralDecomposition pd = peripheral_decomposition(ch);
    for (const auto& a : pd.p_basis)
      for (const auto& b : pd.p_basis) {
        const CMatrix direct = ce_product(ch, pd, a.matrix, b.matrix);
        const auto iter = ce_product_iterative(ch, a.matrix, a.eigenvalue,
                                               b.matrix, b.eigenvalue);
        CHECK(hs_norm(direct - iter.estimate) <=
              10.0 * kDelta * hs_norm(a.matrix) * hs_norm(b.matrix));
      }
  }
}

TEST_CASE("the product of eigenvectors is an eigenvector for the product") {
  for (const char* name : {"avg3", "comp3", "station3", "faithful3"}) {
    const Channel ch = fixture(name);
    const PeripheralDecomposition pd = peripheral_decomposition(ch);
    for (const auto& a : pd.p_basis)
      for (const auto& b : pd.p_basis) {
        const CMatrix Z = ce_product(ch, pd, a.matrix, b.matrix);
        const Complex lm = a.eigenvalue * b.eigenvalue;
        CHECK(hs_norm(ch.apply(Z) - lm * Z) <= 1e-7);
      }
  }
}

TEST_CASE("boundary_algebra dimensions and unit coordinates") {
  SUBCASE("shemesh2 is the scalars") {
    const BoundaryAlgebra alg = boundary_algebra(fixture("shemesh2"));
    CHECK(alg.dim() == 1);
    CHECK(alg.closure_residual < 1e-10);
    // gamma for a one-dimensional algebra: B o B = gamma B with gamma the
    // norm of I relative to the basis element
    CHECK(alg.structure.size() == 1);
  }
  SUBCASE("station3 is two-dimensional and commutative") {
    const BoundaryAlgebra alg = boundary_algebra(fixture("station3"));
    CHECK(alg.dim() == 2);
    CHECK(alg.closure_residual < 1e-9);
    // commutativity: gamma[a](b,:) == gamma[b](a,:)
    for (Index a = 0; a < 2; ++a)
      for (Index b = 0; b < 2; ++b)
        CHECK((alg.structure[static_cast<std::size_t>(a)].row(b) -
               alg.structure[static_cast<std::size_t>(b)].row(a))
                  .norm() < 1e-9);
  }
  SUBCASE("identity channel on M_2 carries the full matrix product") {
    const BoundaryAlgebra alg = boundary_algebra(identity_channel(2));
    CHECK(alg.dim() == 4);
    // unit coordinates reproduce I
    CMatrix I_rec = CMatrix::Zero(2, 2);
    for (Index c = 0; c < 4; ++c)
      I_rec += alg.unit_coords(c) * alg.basis[static_cast<std::size_t>(c)].matrix;
    CHECK(hs_norm(I_rec - CMatrix::Identity(2, 2)) < 1e-10);
  }
}

TEST_CASE("C* axioms hold on the fixtures") {
  for (const char* name : {"station3", "avg3", "identity(2)"}) {
    const Channel ch = fixture(name);
    const BoundaryAlgebra alg = boundary_algebra(ch);
    const CStarAxiomReport rep = verify_cstar_axioms(ch, alg, 10, 42);
    CHECK(rep.associativity_gap <= 1e-8);
    CHECK(rep.involution_gap <= 1e-8);
    CHECK(rep.unit_gap <= 1e-8);
    CHECK(rep.cstar_identity_gap <= 1e-8);
  }
}

TEST_CASE("the restriction to P is an automorphism") {
  SUBCASE("station3 swaps the eigenlines and stays bijective") {
    const RestrictedAutomorphismReport rep =
        verify_restricted_automorphism(fixture("station3"));
    CHECK(rep.hom_gap <= 1e-8);
    CHECK(rep.adjoint_gap <= 1e-8);
    CHECK(rep.bijective);
  }
  SUBCASE("avg3 restricts to the identity on its fixed plane") {
    const RestrictedAutomorphismReport rep =
        verify_restricted_automorphism(fixture("avg3"));
    CHECK(rep.hom_gap <= 1e-8);
    CHECK(rep.bijective);
  }
  SUBCASE("identity channel") {
    const RestrictedAutomorphismReport rep =
        verify_restricted_automorphism(identity_channel(2));
    CHECK(rep.hom_gap <= 1e-10);
    CHECK(rep.adjoint_gap <= 1e-10);
    CHECK(rep.bijective);
  }
}

TEST_CASE("spectral vs iterative agreement on block permutation channels") {
  for (int rep = 0; rep < 10; ++rep) {
    const Channel ch =
        random_channel(RandomKind::block_permutation, 2 + rep % 3, 1, rep);
    const PeripheralDecomposition pd = peripheral_decomposition(ch);
    // a couple of representative pairs per channel keeps this quick
    const std::size_t take = std::min<std::size_t>(pd.p_basis.size(), 3);
    for (std::size_t i = 0; i < take; ++i)
      for (std::size_t j = 0; j < take; ++j) {
        const auto& a = pd.p_basis[i];
        const auto& b = pd.p_basis[j];
        const CMatrix direct = ce_product(ch, pd, a.matrix, b.matrix);
        const auto iter = ce_product_iterative(ch, a.matrix, a.eigenvalue,
                                               b.matrix, b.eigenvalue);
        CHECK(hs_norm(direct - iter.estimate) <= 1e-2);
      }
  }
}

TEST_CASE("structure constants express the plain product exactly for PA maps") {
  for (const char* name : {"station3", "shemesh2", "avg3", "comp3"}) {
    const Channel ch = fixture(name);
    const BoundaryAlgebra alg = boundary_algebra(ch);
    const bool pa = is_peripherally_automorphic(ch).overall;
    // compare gamma against least-squares coordinates of the plain product
    CMatrix Vp(ch.dim() * ch.dim(), alg.dim());
    for (Index a = 0; a < alg.dim(); ++a)
      Vp.col(a) = vec(alg.basis[static_cast<std::size_t>(a)].matrix);
    double worst = 0.0;
    for (Index a = 0; a < alg.dim(); ++a)
      for (Index b = 0; b < alg.dim(); ++b) {
        const CVector gamma =
            alg.structure[static_cast<std::size_t>(a)].row(b).transpose();
        const CMatrix recon_gap =
            alg.basis[static_cast<std::size_t>(a)].matrix *
                alg.basis[static_cast<std::size_t>(b)].matrix -
            unvec(CVector(Vp * gamma), ch.dim(), ch.dim());
        worst = std::max(worst, hs_norm(recon_gap));
      }
    if (pa)
      CHECK(worst <= 1e-7);
    else
      CHECK(worst > 1e-5);
  }
}
