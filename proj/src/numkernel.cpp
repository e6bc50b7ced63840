#include "ppb/numkernel.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>

namespace ppb {

CVector vec(const CMatrix& A) {
  CVector v(A.rows() * A.cols());
  for (Index j = 0; j < A.cols(); ++j) v.segment(j * A.rows(), A.rows()) = A.col(j);
  return v;
}

CMatrix unvec(const CVector& v, Index rows, Index cols) {
  if (v.size() != rows * cols)
    throw DimensionMismatch("unvec: length " + std::to_string(v.size()) +
                            " does not fit " + std::to_string(rows) + "x" +
                            std::to_string(cols));
  CMatrix A(rows, cols);
  for (Index j = 0; j < cols; ++j) A.col(j) = v.segment(j * rows, rows);
  return A;
}

CMatrix unvec_square(const CVector& v) {
  const auto d = static_cast<Index>(std::llround(std::sqrt(static_cast<double>(v.size()))));
  if (d * d != v.size())
    throw DimensionMismatch("unvec_square: length is not a perfect square");
  return unvec(v, d, d);
}

CMatrix kron(const CMatrix& A, const CMatrix& B) {
  CMatrix K(A.rows() * B.rows(), A.cols() * B.cols());
  for (Index i = 0; i < A.rows(); ++i)
    for (Index j = 0; j < A.cols(); ++j)
      K.block(i * B.rows(), j * B.cols(), B.rows(), B.cols()) = A(i, j) * B;
  return K;
}

CMatrix matrix_unit(Index d, Index i, Index j) {
  CMatrix E = CMatrix::Zero(d, d);
  E(i, j) = 1.0;
  return E;
}

Complex hs_inner(const CMatrix& A, const CMatrix& B) {
  return (A.adjoint() * B).trace();
}

double hs_norm(const CMatrix& A) { return A.norm(); }

HSBasis orthonormalize_hs(const std::vector<CMatrix>& vectors,
                          const ToleranceConfig& tol) {
  HSBasis basis;
  if (vectors.empty()) return basis;
  const Index r = vectors.front().rows();
  const Index c = vectors.front().cols();
  basis.dim = r;
  double max_norm = 0.0;
  for (const auto& v : vectors) {
    if (v.rows() != r || v.cols() != c)
      throw DimensionMismatch("orthonormalize_hs: mixed shapes");
    max_norm = std::max(max_norm, hs_norm(v));
  }
  const double threshold = tol.rank_tol_factor * max_norm;
  for (const auto& v : vectors) {
    CMatrix w = v;
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& b : basis.elements) w -= hs_inner(b, w) * b;
    const double n = hs_norm(w);
    if (n > threshold) basis.elements.push_back(w / n);
  }
  return basis;
}

EigResult eig_general(const CMatrix& A) {
  if (A.rows() != A.cols()) throw DimensionMismatch("eig_general: not square");
  Eigen::ComplexEigenSolver<CMatrix> solver(A, /*computeEigenvectors=*/true);
  if (solver.info() != Eigen::Success)
    throw NonConvergence("eig_general: QR iteration failed after " +
                         std::to_string(30 * A.rows()) + " implicit steps");
  return {solver.eigenvalues(), solver.eigenvectors()};
}

CVector eig_values(const CMatrix& A) {
  if (A.rows() != A.cols()) throw DimensionMismatch("eig_values: not square");
  Eigen::ComplexEigenSolver<CMatrix> solver(A, /*computeEigenvectors=*/false);
  if (solver.info() != Eigen::Success)
    throw NonConvergence("eig_values: QR iteration failed after " +
                         std::to_string(30 * A.rows()) + " implicit steps");
  return solver.eigenvalues();
}

EigSelector EigSelector::modulus_at_least(double cutoff, double guard) {
  return {[cutoff](Complex z) { return std::abs(z) >= cutoff; },
          [cutoff, guard](Complex z) {
            return std::abs(std::abs(z) - cutoff) < guard;
          }};
}

EigSelector EigSelector::peripheral_band(const ToleranceConfig& tol) {
  const double inner = tol.peripheral_tol;
  const double outer = tol.cluster_tol;
  return {[inner](Complex z) { return std::abs(std::abs(z) - 1.0) <= inner; },
          [inner, outer](Complex z) {
            const double m = std::abs(std::abs(z) - 1.0);
            return m > inner && m < outer;
          }};
}

EigSelector EigSelector::near_point(Complex center, double radius,
                                    double ambiguous_radius) {
  return {[center, radius](Complex z) { return std::abs(z - center) <= radius; },
          [center, radius, ambiguous_radius](Complex z) {
            const double m = std::abs(z - center);
            return m > radius && m < ambiguous_radius;
          }};
}

CMatrix sylvester_triangular(const CMatrix& A, const CMatrix& B,
                             const CMatrix& C) {
  const Index k = A.rows();
  const Index m = B.rows();
  CMatrix R(k, m);
  for (Index j = 0; j < m; ++j) {
    CVector rhs = C.col(j);
    for (Index i = 0; i < j; ++i) rhs += R.col(i) * B(i, j);
    // back-substitute (A - B(j,j) I) R(:,j) = rhs
    for (Index i = k - 1; i >= 0; --i) {
      Complex s = rhs(i);
      for (Index p = i + 1; p < k; ++p) s -= A(i, p) * R(p, j);
      const Complex div = A(i, i) - B(j, j);
      if (std::abs(div) < 1e-13 * (std::abs(A(i, i)) + std::abs(B(j, j)) + 1.0))
        throw SylvesterSingular("sylvester_triangular: shared eigenvalue " +
                                std::to_string(A(i, i).real()));
      R(i, j) = s / div;
    }
  }
  return R;
}

namespace {

// Unitary similarity swapping the two eigenvalues of the trailing 2x2 block at
// position p of an upper triangular T; applied to T and accumulated into U.
void swap_adjacent_schur(CMatrix& T, CMatrix& U, Index p) {
  const Complex a = T(p, p);
  const Complex b = T(p + 1, p + 1);
  const Complex c = T(p, p + 1);
  Eigen::Matrix2cd G;
  CVector v(2);
  v << c, b - a;
  const double n = v.norm();
  if (n <= 1e-15 * (std::abs(a) + std::abs(b) + std::abs(c))) return;  // equal eigenvalues
  v /= n;
  G << v(0), -std::conj(v(1)), v(1), std::conj(v(0));
  T.middleCols(p, 2) = (T.middleCols(p, 2) * G).eval();
  T.middleRows(p, 2) = (G.adjoint() * T.middleRows(p, 2)).eval();
  U.middleCols(p, 2) = (U.middleCols(p, 2) * G).eval();
  T(p + 1, p) = 0.0;
}

}  // namespace

SpectralProjection spectral_projection(const CMatrix& A,
                                       const EigSelector& selector,
                                       const ToleranceConfig&) {
  if (A.rows() != A.cols())
    throw DimensionMismatch("spectral_projection: not square");
  const Index n = A.rows();
  Eigen::ComplexSchur<CMatrix> schur(A, /*computeU=*/true);
  if (schur.info() != Eigen::Success)
    throw NonConvergence("spectral_projection: Schur iteration failed");
  CMatrix T = schur.matrixT();
  CMatrix U = schur.matrixU();

  for (Index i = 0; i < n; ++i)
    if (selector.ambiguous && selector.ambiguous(T(i, i)))
      throw BoundaryAmbiguity(
          "spectral_projection: eigenvalue near the selection boundary, "
          "|lambda| = " + std::to_string(std::abs(T(i, i))));

  // Bubble selected eigenvalues to the leading block, preserving order.
  Index next = 0;
  for (Index i = 0; i < n; ++i) {
    if (!selector.select(T(i, i))) continue;
    for (Index j = i; j > next; --j) swap_adjacent_schur(T, U, j - 1);
    ++next;
  }
  const Index k = next;

  SpectralProjection out;
  out.rank = k;
  out.range_basis = U.leftCols(k);
  if (k == 0) {
    out.projector = CMatrix::Zero(n, n);
    out.kernel_basis = U;
    return out;
  }
  if (k == n) {
    out.projector = CMatrix::Identity(n, n);
    out.kernel_basis = CMatrix(n, 0);
    return out;
  }
  const CMatrix S11 = T.topLeftCorner(k, k);
  const CMatrix S22 = T.bottomRightCorner(n - k, n - k);
  const CMatrix S12 = T.topRightCorner(k, n - k);
  const CMatrix R = sylvester_triangular(S11, S22, S12);

  CMatrix P = CMatrix::Zero(n, n);
  P.topLeftCorner(k, k) = CMatrix::Identity(k, k);
  P.topRightCorner(k, n - k) = R;
  out.projector = U * P * U.adjoint();

  // ker(P) in the Schur frame is spanned by [-R; I]; orthonormalize and map
  // back.
  CMatrix K(n, n - k);
  K.topRows(k) = -R;
  K.bottomRows(n - k) = CMatrix::Identity(n - k, n - k);
  Eigen::HouseholderQR<CMatrix> qr(K);
  CMatrix Q = qr.householderQ() * CMatrix::Identity(n, n - k);
  out.kernel_basis = U * Q;
  canonicalize_phases(out.kernel_basis);
  return out;
}

CMatrix spectral_projector(const CMatrix& A, const EigSelector& selector,
                           const ToleranceConfig& tol) {
  return spectral_projection(A, selector, tol).projector;
}

namespace {

Eigen::JacobiSVD<CMatrix> small_svd(const CMatrix& A, unsigned options) {
  return Eigen::JacobiSVD<CMatrix>(A, options);
}

}  // namespace

namespace {

CMatrix null_space_impl(const CMatrix& A, double abs_threshold,
                        double rel_factor) {
  const Index n = A.cols();
  Eigen::JacobiSVD<CMatrix> svd(A, Eigen::ComputeFullV);
  const auto& sigma = svd.singularValues();
  const double smax = sigma.size() > 0 ? sigma(0) : 0.0;
  const double threshold = std::max(abs_threshold, rel_factor * smax);
  Index rank = 0;
  for (Index i = 0; i < sigma.size(); ++i)
    if (sigma(i) > threshold) ++rank;
  CMatrix N = svd.matrixV().rightCols(n - rank);
  canonicalize_phases(N);
  return N;
}

}  // namespace

CMatrix null_space(const CMatrix& A, const ToleranceConfig& tol) {
  return null_space_impl(A, 0.0, tol.rank_tol_factor);
}

CMatrix null_space_abs(const CMatrix& A, double threshold) {
  return null_space_impl(A, threshold, 0.0);
}

double psd_gap(const CMatrix& A, const ToleranceConfig& tol) {
  if (A.rows() != A.cols()) throw DimensionMismatch("psd_gap: not square");
  const double defect = (A - A.adjoint()).norm();
  if (defect > tol.eq_tol * A.norm())
    throw NotHermitian("psd_gap: Hermitian defect " + std::to_string(defect));
  const CMatrix H = 0.5 * (A + A.adjoint());
  Eigen::SelfAdjointEigenSolver<CMatrix> es(H, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success)
    throw NonConvergence("psd_gap: symmetric QL failed");
  return es.eigenvalues()(0);
}

double operator_norm(const CMatrix& A) {
  if (A.size() == 0) return 0.0;
  if (A.rows() > 64 || A.cols() > 64)
    return Eigen::BDCSVD<CMatrix>(A).singularValues()(0);
  return small_svd(A, 0).singularValues()(0);
}

CMatrix orth_columns(const CMatrix& M, const ToleranceConfig& tol) {
  if (M.cols() == 0) return CMatrix(M.rows(), 0);
  Eigen::JacobiSVD<CMatrix> svd(M, Eigen::ComputeThinU);
  const auto& sigma = svd.singularValues();
  const double smax = sigma.size() > 0 ? sigma(0) : 0.0;
  Index rank = 0;
  for (Index i = 0; i < sigma.size(); ++i)
    if (smax > 0 && sigma(i) > tol.rank_tol_factor * smax) ++rank;
  CMatrix B = svd.matrixU().leftCols(rank);
  canonicalize_phases(B);
  return B;
}

double subspace_residual(const CMatrix& V, const CMatrix& B) {
  double worst = 0.0;
  for (Index j = 0; j < V.cols(); ++j) {
    const CVector v = V.col(j);
    const double n = v.norm();
    if (n == 0.0) continue;
    const CVector r = v - B * (B.adjoint() * v);
    worst = std::max(worst, r.norm() / n);
  }
  return worst;
}

bool subspaces_equal(const CMatrix& B1, const CMatrix& B2, double tol) {
  if (B1.cols() != B2.cols()) return false;
  return subspace_residual(B1, B2) <= tol && subspace_residual(B2, B1) <= tol;
}

CMatrix subspace_intersection(const CMatrix& B1, const CMatrix& B2,
                              double null_floor) {
  const Index n = B1.rows();
  if (B2.rows() != n)
    throw DimensionMismatch("subspace_intersection: ambient dims differ");
  CMatrix D = 2.0 * CMatrix::Identity(n, n) - B1 * B1.adjoint() -
              B2 * B2.adjoint();
  D = 0.5 * (D + D.adjoint()).eval();
  Eigen::SelfAdjointEigenSolver<CMatrix> es(D);
  if (es.info() != Eigen::Success)
    throw NonConvergence("subspace_intersection: symmetric QL failed");
  Index count = 0;
  while (count < n && es.eigenvalues()(count) <= null_floor) ++count;
  CMatrix B = es.eigenvectors().leftCols(count);
  canonicalize_phases(B);
  return B;
}

std::vector<CMatrix> hermitian_basis(const std::vector<CMatrix>& span,
                                     const ToleranceConfig& tol) {
  if (span.empty()) return {};
  const Index d = span.front().rows();
  // Real isometric coordinates for Hermitian matrices: diagonal, then
  // sqrt(2) * (Re, Im) of the strict upper triangle.
  const Index m = d * d;
  auto coords = [d, m](const CMatrix& H) {
    Eigen::VectorXd r(m);
    Index p = 0;
    for (Index i = 0; i < d; ++i) r(p++) = H(i, i).real();
    for (Index i = 0; i < d; ++i)
      for (Index j = i + 1; j < d; ++j) {
        r(p++) = std::sqrt(2.0) * H(i, j).real();
        r(p++) = std::sqrt(2.0) * H(i, j).imag();
      }
    return r;
  };
  auto from_coords = [d, m](const Eigen::VectorXd& r) {
    CMatrix H = CMatrix::Zero(d, d);
    Index p = 0;
    for (Index i = 0; i < d; ++i) H(i, i) = r(p++);
    for (Index i = 0; i < d; ++i)
      for (Index j = i + 1; j < d; ++j) {
        const double re = r(p++) / std::sqrt(2.0);
        const double im = r(p++) / std::sqrt(2.0);
        H(i, j) = Complex(re, im);
        H(j, i) = Complex(re, -im);
      }
    return H;
  };

  Eigen::MatrixXd C(m, 2 * static_cast<Index>(span.size()));
  Index col = 0;
  for (const auto& F : span) {
    if (F.rows() != d || F.cols() != d)
      throw DimensionMismatch("hermitian_basis: mixed shapes");
    const CMatrix H1 = 0.5 * (F + F.adjoint());
    const CMatrix H2 = (F - F.adjoint()) / Complex(0.0, 2.0);
    C.col(col++) = coords(H1);
    C.col(col++) = coords(H2);
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(C, Eigen::ComputeThinU);
  const auto& sigma = svd.singularValues();
  const double smax = sigma.size() > 0 ? sigma(0) : 0.0;
  std::vector<CMatrix> out;
  for (Index i = 0; i < sigma.size(); ++i)
    if (smax > 0 && sigma(i) > tol.rank_tol_factor * smax)
      out.push_back(from_coords(svd.matrixU().col(i)));
  return out;
}

CMatrix matrix_power(const CMatrix& A, long k) {
  if (A.rows() != A.cols()) throw DimensionMismatch("matrix_power: not square");
  if (k < 0) throw BadParams("matrix_power: negative exponent");
  CMatrix result = CMatrix::Identity(A.rows(), A.cols());
  CMatrix base = A;
  while (k > 0) {
    if (k & 1) result = (result * base).eval();
    base = (base * base).eval();
    k >>= 1;
  }
  return result;
}

void canonicalize_phases(CMatrix& columns) {
  for (Index j = 0; j < columns.cols(); ++j) {
    Index imax = 0;
    double best = -1.0;
    for (Index i = 0; i < columns.rows(); ++i) {
      const double a = std::abs(columns(i, j));
      if (a > best) {
        best = a;
        imax = i;
      }
    }
    if (best <= 0.0) continue;
    const Complex z = columns(imax, j);
    columns.col(j) *= std::conj(z) / std::abs(z);
  }
}

}  // namespace ppb
