#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "ppb/spectral.hpp"

using namespace ppb;

namespace {

const ToleranceConfig kTol{};

bool contains_value(const std::vector<Complex>& values, Complex z,
                    double tol = 1e-9) {
  for (Complex v : values)
    if (std::abs(v - z) <= tol) return true;
  return false;
}

}  // namespace

TEST_CASE("spectrum of shemesh2") {
  const SpectralData sd = spectrum(fixture("shemesh2"));
  CHECK(sd.total_multiplicity() == 4);
  // oracle values {1, 1/2, 0, 0} from the formula superoperator
  const CVector oracle_eigs =
      eig_values(oracle::formula_superop(2, oracle::shemesh2_formula()));
  for (Index i = 0; i < 4; ++i) {
    bool found = false;
    for (const auto& c : sd.clusters)
      if (std::abs(c.value - oracle_eigs(i)) < 1e-9) found = true;
    CHECK(found);
  }
  CHECK(sd.peripheral_values().size() == 1);
  CHECK(contains_value(sd.peripheral_values(), Complex(1, 0)));
  CHECK(sd.transient_radius == doctest::Approx(0.5));
}

TEST_CASE("spectrum of station3 contains 1 and -1 peripherally") {
  const SpectralData sd = spectrum(fixture("station3"));
  CHECK(contains_value(sd.peripheral_values(), Complex(1, 0)));
  CHECK(contains_value(sd.peripheral_values(), Complex(-1, 0)));
}

TEST_CASE("spectrum of the identity") {
  const SpectralData sd = spectrum(identity_channel(2));
  REQUIRE(sd.clusters.size() == 1);
  CHECK(sd.clusters[0].multiplicity == 4);
  CHECK(sd.clusters[0].peripheral);
  CHECK(sd.transient_radius == 0.0);
}

TEST_CASE("spectrum requires a unital channel") {
  const Channel e11 = Channel::from_kraus({matrix_unit(2, 0, 0)});
  CHECK_THROWS_AS(spectrum(e11), NotUCP);
}

TEST_CASE("eigenspace examples") {
  SUBCASE("shemesh2 at 1 is spanned by the identity") {
    const auto basis = eigenspace(fixture("shemesh2"), Complex(1, 0));
    REQUIRE(basis.size() == 1);
    const CMatrix expected = CMatrix::Identity(2, 2) / std::sqrt(2.0);
    CHECK((basis[0] - expected).norm() < 1e-10);
  }
  SUBCASE("station3 at -1 is spanned by diag(1,1,-1)") {
    const auto basis = eigenspace(fixture("station3"), Complex(-1, 0));
    REQUIRE(basis.size() == 1);
    const CMatrix expected = oracle::diag3(1, 1, -1) / std::sqrt(3.0);
    CHECK((basis[0] - expected).norm() < 1e-10);
  }
  SUBCASE("avg3 at 1 is the printed fixed plane") {
    const auto basis = eigenspace(fixture("avg3"), Complex(1, 0));
    REQUIRE(basis.size() == 2);
    CMatrix span(9, 2);
    span.col(0) = vec(oracle::diag3(1, 0, 0.5));
    span.col(1) = vec(oracle::diag3(0, 1, 0.5));
    const CMatrix onb = orth_columns(span, kTol);
    for (const auto& B : basis) {
      CHECK(hs_norm(B) == doctest::Approx(1.0));
      CHECK(subspace_residual(vec(B), onb) < 1e-9);
    }
  }
  SUBCASE("an off-spectrum point raises NotAnEigenvalue") {
    CHECK_THROWS_AS(eigenspace(fixture("shemesh2"), Complex(0.7, 0)),
                    NotAnEigenvalue);
  }
}

TEST_CASE("peripheral projector, both routes") {
  SUBCASE("identity channel") {
    for (auto method : {ProjectorMethod::schur, ProjectorMethod::contour}) {
      const CMatrix P = peripheral_projector(identity_channel(2), method);
      CHECK((P - CMatrix::Identity(4, 4)).norm() < 1e-10);
    }
  }
  SUBCASE("shemesh2 is rank one onto vec(I)") {
    const CMatrix P =
        peripheral_projector(fixture("shemesh2"), ProjectorMethod::schur);
    const CVector vI = vec(CMatrix(CMatrix::Identity(2, 2))).normalized();
    CHECK((P * vI - vI).norm() < 1e-9);
    CHECK(std::abs(P.trace().real() - 1.0) < 1e-9);  // rank one
    CHECK(subspace_residual(P, CMatrix(vI)) < 1e-9);
    const CMatrix Pc =
        peripheral_projector(fixture("shemesh2"), ProjectorMethod::contour);
    CHECK((P - Pc).norm() < 1e-8);
  }
  SUBCASE("station3 is rank two with the printed range") {
    const CMatrix P =
        peripheral_projector(fixture("station3"), ProjectorMethod::schur);
    CHECK(std::abs(P.trace().real() - 2.0) < 1e-9);
    CMatrix span(9, 2);
    span.col(0) = vec(CMatrix(CMatrix::Identity(3, 3)));
    span.col(1) = vec(oracle::diag3(1, 1, -1));
    for (Index j = 0; j < 2; ++j)
      CHECK((P * span.col(j) - span.col(j)).norm() < 1e-9);
  }
}

TEST_CASE("schur and contour projectors agree when a gap exists") {
  for (const char* name : {"shemesh2", "avg3", "comp3", "station3",
                           "faithful3"}) {
    const Channel ch = fixture(name);
    const CMatrix Ps = peripheral_projector(ch, ProjectorMethod::schur);
    const CMatrix Pc = peripheral_projector(ch, ProjectorMethod::contour);
    CHECK((Ps - Pc).norm() <= 1e-8);
  }
}

TEST_CASE("contour projector converges exponentially in the node count") {
  // narrow-gap channel: the N-node trapezoid acts as the rational filter
  // 1/(1 - (lambda/r)^N), so its error floor is max(r^N, (tr/r)^N)
  const Channel ch = random_channel(RandomKind::mixed_unitary, 2, 2, 3024);
  const SpectralData sd = spectrum(ch);
  REQUIRE(sd.transient_radius > 0.9);
  REQUIRE(sd.transient_radius < 1.0 - 0.05);
  const double r = 0.5 * (1.0 + sd.transient_radius);
  const CMatrix Ps = peripheral_projector(ch, ProjectorMethod::schur);

  const double dis256 =
      (Ps - peripheral_projector(ch, ProjectorMethod::contour, 256)).norm();
  const double floor256 =
      std::max(std::pow(r, 256), std::pow(sd.transient_radius / r, 256));
  CHECK(dis256 <= 20.0 * floor256);
  CHECK(dis256 >= 0.01 * floor256);  // genuinely pinned at the filter floor

  const double dis1024 =
      (Ps - peripheral_projector(ch, ProjectorMethod::contour, 1024)).norm();
  CHECK(dis1024 <= 1e-8);
}

TEST_CASE("peripheral_decomposition dimensions and residuals") {
  SUBCASE("station3") {
    const PeripheralDecomposition pd =
        peripheral_decomposition(fixture("station3"));
    CHECK(pd.dim_p() == 2);
    CHECK(pd.dim_n() == 7);
    for (const auto& mode : pd.p_basis) {
      const Channel ch = fixture("station3");
      CHECK(hs_norm(ch.apply(mode.matrix) - mode.eigenvalue * mode.matrix) <=
            1e-8);
      // P(station3) = {diag(a,a,b)}
      CHECK(std::abs(mode.matrix(0, 0) - mode.matrix(1, 1)) < 1e-9);
      CHECK(std::abs(mode.matrix(0, 1)) < 1e-9);
    }
  }
  SUBCASE("avg3") {
    const PeripheralDecomposition pd =
        peripheral_decomposition(fixture("avg3"));
    CHECK(pd.dim_p() == 2);
    CHECK(pd.dim_n() == 7);
    for (const auto& mode : pd.p_basis)
      CHECK(std::abs(mode.eigenvalue - Complex(1, 0)) < 1e-10);
  }
  SUBCASE("irrational rotation keeps all of M_2") {
    CMatrix U = CMatrix::Identity(2, 2);
    U(1, 1) = std::exp(Complex(0, 1.0));  // theta = 1, not a pi multiple
    const PeripheralDecomposition pd =
        peripheral_decomposition(unitary_channel(U));
    CHECK(pd.dim_p() == 4);
    CHECK(pd.dim_n() == 0);
  }
  SUBCASE("identity over P and dims always sum to d^2") {
    for (const char* name :
         {"shemesh2", "avg3", "comp3", "station3", "faithful3", "tau1_avg"}) {
      const Channel ch = fixture(name);
      const PeripheralDecomposition pd = peripheral_decomposition(ch);
      CHECK(pd.dim_p() + pd.dim_n() == ch.dim() * ch.dim());
      const CVector vI = vec(CMatrix(
          CMatrix::Identity(ch.dim(), ch.dim())));
      CHECK((pd.projector * vI - vI).norm() < 1e-9 * vI.norm());
    }
  }
}

TEST_CASE("projector fixes every computed peripheral eigenvector") {
  for (int rep = 0; rep < 12; ++rep) {
    const Channel ch = random_channel(
        rep % 2 ? RandomKind::mixed_unitary : RandomKind::pinching, 2 + rep % 3,
        2 + rep % 2, 500 + rep);
    const PeripheralDecomposition pd = peripheral_decomposition(ch);
    for (const auto& mode : pd.p_basis) {
      const CVector v = vec(mode.matrix);
      CHECK((pd.projector * v - v).norm() <= 1e-8);
    }
  }
}

TEST_CASE("check_peripheral_diagonalizable") {
  for (const char* name :
       {"shemesh2", "avg3", "comp3", "station3", "faithful3"}) {
    CHECK(check_peripheral_diagonalizable(fixture(name)).ok);
  }
  const JordanCheck jc = check_peripheral_diagonalizable(identity_channel(2));
  REQUIRE(jc.entries.size() == 1);
  CHECK(jc.entries[0].algebraic == 4);
  CHECK(jc.entries[0].geometric == 4);
  CHECK(check_peripheral_diagonalizable(
            random_channel(RandomKind::block_permutation, 4, 1, 5))
            .ok);
}

TEST_CASE("decay_verify") {
  SUBCASE("off-diagonals of shemesh2 die instantly") {
    const DecayReport rep =
        decay_verify(fixture("shemesh2"), matrix_unit(2, 0, 1));
    CHECK(rep.decayed);
    CHECK(rep.first_n == 1);
  }
  SUBCASE("the transient component of avg3 dies in one step") {
    const DecayReport rep =
        decay_verify(fixture("avg3"), oracle::diag3(0, 0, -1));
    CHECK(rep.decayed);
    CHECK(rep.first_n == 1);
  }
  SUBCASE("peripheral modes never decay") {
    const Channel ch = fixture("station3");
    const PeripheralDecomposition pd = peripheral_decomposition(ch);
    for (const auto& mode : pd.p_basis) {
      const DecayReport rep = decay_verify(ch, mode.matrix, 50);
      CHECK_FALSE(rep.decayed);
      for (double r : rep.residuals) CHECK(r == doctest::Approx(1.0));
    }
  }
}

TEST_CASE("isometry of the channel on P in operator norm") {
  for (int rep = 0; rep < 8; ++rep) {
    const Channel ch =
        random_channel(RandomKind::pinching, 3, 1, 600 + rep);
    const PeripheralDecomposition pd = peripheral_decomposition(ch);
    std::mt19937_64 rng(rep);
    CMatrix X = CMatrix::Zero(3, 3);
    for (const auto& mode : pd.p_basis) X += gaussian_complex(rng) * mode.matrix;
    CHECK(operator_norm(ch.apply(X)) ==
          doctest::Approx(operator_norm(X)).epsilon(1e-7));
  }
}

TEST_CASE("power_space_equality") {
  const PowerSpaceReport st2 = power_space_equality(fixture("station3"), 2);
  CHECK(st2.p_equal);
  CHECK(st2.n_equal);
  const PowerSpaceReport sh3 = power_space_equality(fixture("shemesh2"), 3);
  CHECK(sh3.p_equal);
  CHECK(sh3.n_equal);
  const PowerSpaceReport id5 = power_space_equality(identity_channel(2), 5);
  CHECK(id5.p_equal);
  CHECK(id5.n_equal);
}

TEST_CASE("spectrum stays in the closed unit disk on random channels") {
  double worst = 0.0;
  for (int rep = 0; rep < 200; ++rep) {
    const RandomKind kind = static_cast<RandomKind>(rep % 5);
    const Channel ch = random_channel(kind, 2 + rep % 3, 2 + rep % 2, rep);
    const SpectralData sd = spectrum(ch);
    for (const auto& c : sd.clusters)
      worst = std::max(worst, std::abs(c.value));
    CHECK(contains_value(sd.peripheral_values(), Complex(1, 0), 1e-7));
  }
  CHECK(worst <= 1.0 + 1e-9);
}
