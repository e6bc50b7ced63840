#include <doctest.h>

#include <algorithm>
#include <random>

#include "oracles.hpp"
#include "ppb/channel.hpp"
#include "ppb/numkernel.hpp"

using namespace ppb;

namespace {

const ToleranceConfig kTol{};

CMatrix cdiag(std::initializer_list<Complex> entries) {
  const Index n = static_cast<Index>(entries.size());
  CMatrix D = CMatrix::Zero(n, n);
  Index i = 0;
  for (Complex z : entries) D(i, i) = z, ++i;
  return D;
}

// multiset comparison of eigenvalues against expected values
void check_eigs(const CVector& values, std::vector<Complex> expected,
                double tol) {
  REQUIRE(values.size() == static_cast<Index>(expected.size()));
  for (Index i = 0; i < values.size(); ++i) {
    auto it = std::min_element(expected.begin(), expected.end(),
                               [&](Complex a, Complex b) {
                                 return std::abs(a - values(i)) <
                                        std::abs(b - values(i));
                               });
    REQUIRE(std::abs(*it - values(i)) < tol);
    expected.erase(it);
  }
}

}  // namespace

TEST_CASE("vec and kron follow the column-stacking rule") {
  CMatrix A(2, 2), B(2, 2), X(2, 2);
  A << Complex(1, 1), Complex(0, 2), Complex(3, 0), Complex(-1, 0.5);
  B << Complex(0, 1), Complex(2, 0), Complex(1, -1), Complex(0.5, 0);
  X << Complex(1, 0), Complex(2, 3), Complex(-1, 1), Complex(0, -2);
  // vec(A X B) = (B^T kron A) vec(X)
  const CVector lhs = vec((A * X * B).eval());
  const CVector rhs = kron(B.transpose(), A) * vec(X);
  CHECK((lhs - rhs).norm() < 1e-14);
  CHECK(unvec(vec(X), 2, 2) == X);
}

TEST_CASE("eig_general on the identity") {
  const auto r = eig_general(CMatrix::Identity(3, 3));
  check_eigs(r.values, {1, 1, 1}, 1e-12);
}

TEST_CASE("eig_general flags a defective nilpotent block by eigenvector rank") {
  CMatrix A(2, 2);
  A << 0, 1, 0, 0;
  const auto r = eig_general(A);
  check_eigs(r.values, {0, 0}, 1e-12);
  CHECK(orth_columns(r.vectors, kTol).cols() == 1);
}

TEST_CASE("eig_general on the shemesh2 superoperator") {
  // Oracle: superoperator built from the printed formula, not from Kraus.
  const CMatrix T = oracle::formula_superop(2, oracle::shemesh2_formula());
  const auto r = eig_general(T);
  check_eigs(r.values, {1.0, 0.5, 0.0, 0.0}, 1e-12);
}

TEST_CASE("eig_general residuals on random matrices") {
  std::mt19937_64 rng(21);
  for (Index n : {4, 9, 16, 64}) {  // superoperator sizes for d = 2, 3, 4, 8
    double worst = 0.0;
    for (int rep = 0; rep < 100; ++rep) {
      const CMatrix A = ginibre(n, n, rng);
      const auto r = eig_general(A);
      for (Index k = 0; k < n; ++k) {
        const double resid =
            (A * r.vectors.col(k) - r.values(k) * r.vectors.col(k)).norm();
        worst = std::max(worst, resid / A.norm());
      }
    }
    CHECK(worst <= 1e-8);
  }
}

TEST_CASE("spectral_projector on diagonal examples") {
  const auto sel = EigSelector::modulus_at_least(0.9, kTol.cluster_tol);
  const CMatrix P =
      spectral_projector(cdiag({1.0, 0.5}), sel, kTol);
  CHECK((P - cdiag({1.0, 0.0})).norm() < 1e-12);
  const CMatrix Q = spectral_projector(CMatrix::Identity(2, 2), sel, kTol);
  CHECK((Q - CMatrix::Identity(2, 2)).norm() < 1e-12);
}

TEST_CASE("spectral_projector of shemesh2 ranges over span{vec(I)}") {
  const CMatrix T = oracle::formula_superop(2, oracle::shemesh2_formula());
  const auto sel = EigSelector::peripheral_band(kTol);
  const auto sp = spectral_projection(T, sel, kTol);
  CHECK(sp.rank == 1);
  const CVector vI = vec(CMatrix(CMatrix::Identity(2, 2))).normalized();
  CHECK((sp.projector * vI - vI).norm() < 1e-10);
  // the Riesz projector is oblique; only its range is span{vec(I)}
  CHECK(subspace_residual(sp.projector, CMatrix(vI)) < 1e-10);
  CHECK((sp.projector * sp.projector - sp.projector).norm() < 1e-10);
}

TEST_CASE("spectral_projector raises BoundaryAmbiguity in the gray zone") {
  const auto sel = EigSelector::modulus_at_least(0.9, 0.05);
  CHECK_THROWS_AS(spectral_projector(cdiag({1.0, 0.91}), sel, kTol),
                  BoundaryAmbiguity);
}

TEST_CASE("spectral projector properties on random split spectra") {
  std::mt19937_64 rng(5);
  for (int rep = 0; rep < 20; ++rep) {
    const Index d = 5;
    // eigenvalues split across |z| = 0.6
    CMatrix D = CMatrix::Zero(d, d);
    int selected = 0;
    for (Index i = 0; i < d; ++i) {
      const bool big = (rng() & 1) != 0;
      const double mod = big ? 0.9 + 0.1 * gaussian(rng) * 0.05
                             : 0.3 + 0.1 * gaussian(rng) * 0.05;
      D(i, i) = std::polar(std::min(std::max(mod, 0.05), 1.2),
                           gaussian(rng));
      if (std::abs(D(i, i)) >= 0.6) ++selected;
    }
    const CMatrix V = ginibre(d, d, rng);
    const CMatrix A = V * D * V.inverse();
    const auto sel = EigSelector::modulus_at_least(0.6, 1e-6);
    const auto sp = spectral_projection(A, sel, kTol);
    CHECK(sp.rank == selected);
    CHECK((sp.projector * sp.projector - sp.projector).norm() <=
          1e-8 * std::max(1.0, sp.projector.norm()));
    CHECK((sp.projector * A - A * sp.projector).norm() <=
          1e-8 * A.norm() * std::max(1.0, sp.projector.norm()));
  }
}

TEST_CASE("null_space basics") {
  CMatrix A(2, 2);
  A << 1, 0, 0, 0;
  const CMatrix N = null_space(A, kTol);
  REQUIRE(N.cols() == 1);
  CHECK(std::abs(N(0, 0)) < 1e-14);
  CHECK(std::abs(N(1, 0) - Complex(1, 0)) < 1e-14);

  CHECK(null_space(CMatrix::Zero(2, 2), kTol).cols() == 2);
}

TEST_CASE("null_space of (T - I) for shemesh2 is spanned by vec(I)") {
  const CMatrix T = oracle::formula_superop(2, oracle::shemesh2_formula());
  const CMatrix N =
      null_space(CMatrix(T - CMatrix::Identity(4, 4)), kTol);
  REQUIRE(N.cols() == 1);
  const CVector vI = vec(CMatrix(CMatrix::Identity(2, 2))).normalized();
  CHECK((N.col(0) - vI).norm() < 1e-10);
}

TEST_CASE("null_space is orthogonal to the row space") {
  std::mt19937_64 rng(7);
  for (int rep = 0; rep < 20; ++rep) {
    CMatrix A = ginibre(3, 5, rng);
    A.row(2) = A.row(0) + A.row(1);  // force rank deficiency in the domain
    const CMatrix N = null_space(A, kTol);
    CHECK(N.cols() >= 2);
    CHECK((A * N).norm() <= 1e-10 * A.norm());
    CHECK((N.adjoint() * N - CMatrix::Identity(N.cols(), N.cols())).norm() <
          1e-12);
  }
}

TEST_CASE("psd_gap") {
  CHECK(psd_gap(cdiag({0.25, 0.25, 0.5}), kTol) == doctest::Approx(0.25));
  CHECK(psd_gap(cdiag({0.0, 1.0}), kTol) == doctest::Approx(0.0));
  CHECK(psd_gap(cdiag({1.0, -0.3}), kTol) == doctest::Approx(-0.3));
  CMatrix A(2, 2);
  A << 0, 1, 0, 0;
  CHECK_THROWS_AS(psd_gap(A, kTol), NotHermitian);
}

TEST_CASE("operator_norm") {
  CHECK(operator_norm(CMatrix::Identity(4, 4)) == doctest::Approx(1.0));
  CHECK(operator_norm(cdiag({1.0, 3.0, 2.0})) == doctest::Approx(3.0));
  CHECK(operator_norm(matrix_unit(2, 0, 1)) == doctest::Approx(1.0));
}

TEST_CASE("orthonormalize_hs") {
  const CMatrix I2 = CMatrix::Identity(2, 2);
  SUBCASE("collinear inputs collapse to one unit vector") {
    const auto b = orthonormalize_hs({I2, 2.0 * I2}, kTol);
    REQUIRE(b.size() == 1);
    CHECK((b.elements[0] - I2 / std::sqrt(2.0)).norm() < 1e-14);
  }
  SUBCASE("an orthonormal pair passes through unchanged") {
    const auto b =
        orthonormalize_hs({matrix_unit(2, 0, 0), matrix_unit(2, 1, 1)}, kTol);
    REQUIRE(b.size() == 2);
    CHECK((b.elements[0] - matrix_unit(2, 0, 0)).norm() < 1e-14);
    CHECK((b.elements[1] - matrix_unit(2, 1, 1)).norm() < 1e-14);
  }
  SUBCASE("peripheral eigenvectors of avg3 span a 2-dim space") {
    const CMatrix v1 = oracle::diag3(1, 0, 0.5);
    const CMatrix v2 = oracle::diag3(0, 1, 0.5);
    const auto b = orthonormalize_hs({v1, v2}, kTol);
    REQUIRE(b.size() == 2);
    for (const auto& e : b.elements) CHECK(hs_norm(e) == doctest::Approx(1.0));
    CHECK(std::abs(hs_inner(b.elements[0], b.elements[1])) < 1e-13);
    // span preserved
    CMatrix span(9, 2);
    span.col(0) = vec(v1);
    span.col(1) = vec(v2);
    const CMatrix onb = orth_columns(span, kTol);
    CHECK(subspace_residual(vec(b.elements[0]), onb) < 1e-10);
    CHECK(subspace_residual(vec(b.elements[1]), onb) < 1e-10);
  }
}

TEST_CASE("sylvester_triangular solves A R - R B = C") {
  std::mt19937_64 rng(11);
  CMatrix A = ginibre(3, 3, rng).triangularView<Eigen::Upper>();
  CMatrix B = ginibre(2, 2, rng).triangularView<Eigen::Upper>();
  B.diagonal().array() += 5.0;  // separate the spectra
  const CMatrix C = ginibre(3, 2, rng);
  const CMatrix R = sylvester_triangular(A, B, C);
  CHECK((A * R - R * B - C).norm() < 1e-10);
}

TEST_CASE("sylvester_triangular rejects shared eigenvalues") {
  CMatrix A = cdiag({1.0, 2.0});
  CMatrix B = cdiag({2.0});
  CMatrix C = CMatrix::Ones(2, 1);
  CHECK_THROWS_AS(sylvester_triangular(A, B, C), SylvesterSingular);
}

TEST_CASE("hermitian_basis spans the same space with Hermitian elements") {
  std::mt19937_64 rng(13);
  const CMatrix F = ginibre(3, 3, rng);
  const auto basis = hermitian_basis({F}, kTol);
  // F generic: F and F^dag are independent, so the adjoint-closed span is 2-dim
  REQUIRE(basis.size() == 2);
  for (const auto& H : basis) {
    CHECK((H - H.adjoint()).norm() < 1e-13);
    CHECK(hs_norm(H) == doctest::Approx(1.0));
  }
}

TEST_CASE("subspace_intersection") {
  CMatrix B1(3, 2), B2(3, 2);
  B1 << 1, 0, 0, 1, 0, 0;
  B2 << 0, 0, 1, 0, 0, 1;
  const CMatrix I12 = subspace_intersection(B1, B2, 1e-11);
  REQUIRE(I12.cols() == 1);
  CHECK(std::abs(std::abs(I12(1, 0)) - 1.0) < 1e-12);
}
