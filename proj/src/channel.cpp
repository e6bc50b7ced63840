#include "ppb/channel.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numeric>

namespace ppb {

namespace {

CMatrix build_superop(const std::vector<CMatrix>& kraus) {
  const Index d = kraus.front().rows();
  CMatrix S = CMatrix::Zero(d * d, d * d);
  for (const auto& L : kraus) S += kron(L.transpose(), L.adjoint());
  return S;
}

CMatrix build_choi(const std::vector<CMatrix>& kraus) {
  // choi = sum_i vec(L_i^dag) vec(L_i^dag)^dag, equal to
  // sum_{jk} E_jk (x) tau(E_jk).
  const Index d = kraus.front().rows();
  CMatrix C = CMatrix::Zero(d * d, d * d);
  for (const auto& L : kraus) {
    const CVector w = vec(L.adjoint().eval());
    C += w * w.adjoint();
  }
  return C;
}

std::vector<CMatrix> kraus_from_choi(const CMatrix& choi, Index d,
                                     const ToleranceConfig& tol) {
  CMatrix H = 0.5 * (choi + choi.adjoint());
  Eigen::SelfAdjointEigenSolver<CMatrix> es(H);
  if (es.info() != Eigen::Success)
    throw NonConvergence("kraus_from_choi: eigensolver failed");
  const double emax = es.eigenvalues().cwiseAbs().maxCoeff();
  if (es.eigenvalues()(0) < -tol.eq_tol * std::max(emax, 1.0))
    throw BadParams("kraus_from_choi: Choi matrix is not PSD, min eigenvalue " +
                    std::to_string(es.eigenvalues()(0)));
  std::vector<CMatrix> kraus;
  for (Index i = 0; i < es.eigenvalues().size(); ++i) {
    const double mu = es.eigenvalues()(i);
    if (mu <= tol.rank_tol_factor * std::max(emax, 1.0)) continue;
    const CVector w = std::sqrt(mu) * es.eigenvectors().col(i);
    kraus.push_back(unvec(w, d, d).adjoint());
  }
  if (kraus.empty()) kraus.push_back(CMatrix::Zero(d, d));
  return kraus;
}

}  // namespace

Channel Channel::from_kraus(std::vector<CMatrix> kraus, ToleranceConfig tol) {
  tol.check();
  if (kraus.empty()) throw BadParams("from_kraus: empty Kraus list");
  const Index d = kraus.front().rows();
  for (const auto& L : kraus)
    if (L.rows() != d || L.cols() != d)
      throw DimensionMismatch("from_kraus: Kraus blocks must share one square shape");
  Channel ch;
  ch.dim_ = d;
  ch.kraus_ = std::move(kraus);
  ch.superop_ = build_superop(ch.kraus_);
  ch.choi_ = build_choi(ch.kraus_);
  ch.tol_ = tol;
  CMatrix unit = CMatrix::Zero(d, d);
  for (const auto& L : ch.kraus_) unit += L.adjoint() * L;
  ch.unitality_gap_ = (unit - CMatrix::Identity(d, d)).norm();
  ch.unital_ = ch.unitality_gap_ <= tol.eq_tol;
  return ch;
}

Channel Channel::from_choi(const CMatrix& choi, ToleranceConfig tol) {
  tol.check();
  const auto dd = choi.rows();
  const auto d = static_cast<Index>(std::llround(std::sqrt(static_cast<double>(dd))));
  if (d * d != dd || choi.cols() != dd)
    throw DimensionMismatch("from_choi: expected a d^2 x d^2 matrix");
  return from_kraus(kraus_from_choi(choi, d, tol), tol);
}

void Channel::require_ucp(const char* where) const {
  if (!unital_)
    throw NotUCP(std::string(where) + ": channel is not unital, gap " +
                 std::to_string(unitality_gap_));
}

CMatrix Channel::apply(const CMatrix& X) const {
  if (X.rows() != dim_ || X.cols() != dim_)
    throw DimensionMismatch("apply: argument must be " + std::to_string(dim_) +
                            "x" + std::to_string(dim_));
  CMatrix Y = CMatrix::Zero(dim_, dim_);
  for (const auto& L : kraus_) Y += L.adjoint() * X * L;
  return Y;
}

CMatrix Channel::apply_adjoint(const CMatrix& X) const {
  if (X.rows() != dim_ || X.cols() != dim_)
    throw DimensionMismatch("apply_adjoint: wrong argument shape");
  CMatrix Y = CMatrix::Zero(dim_, dim_);
  for (const auto& L : kraus_) Y += L * X * L.adjoint();
  return Y;
}

Channel Channel::adjoint_map() const {
  std::vector<CMatrix> dual;
  dual.reserve(kraus_.size());
  for (const auto& L : kraus_) dual.push_back(L.adjoint());
  return from_kraus(std::move(dual), tol_);
}

Channel Channel::power(int m) const {
  if (m < 1) throw BadParams("power: exponent must be >= 1");
  Channel result = *this;
  for (int i = 1; i < m; ++i) {
    result = compose(result, *this);
    if (static_cast<Index>(result.kraus_.size()) > dim_ * dim_)
      result = from_kraus(kraus_from_choi(result.choi_, dim_, tol_), tol_);
  }
  return result;
}

ValidationReport validate(const Channel& ch) {
  const Index d = ch.dim();
  ValidationReport rep;
  Eigen::SelfAdjointEigenSolver<CMatrix> es(
      0.5 * (ch.choi() + ch.choi().adjoint()), Eigen::EigenvaluesOnly);
  rep.choi_gap = es.eigenvalues()(0);
  rep.is_cp = rep.choi_gap >= -ch.tol().eq_tol;
  rep.unitality_gap = ch.unitality_gap();
  rep.is_unital = ch.is_ucp();
  CMatrix dual_unit = CMatrix::Zero(d, d);
  for (const auto& L : ch.kraus()) dual_unit += L * L.adjoint();
  rep.tp_gap = (dual_unit - CMatrix::Identity(d, d)).norm();
  rep.is_trace_preserving = rep.tp_gap <= ch.tol().eq_tol;
  // tau(X^dag X) = 0 iff X kills the joint column space of the L_i.
  CMatrix stacked(d, d * static_cast<Index>(ch.kraus().size()));
  for (Index i = 0; i < static_cast<Index>(ch.kraus().size()); ++i)
    stacked.middleCols(i * d, d) = ch.kraus()[i];
  rep.joint_rank = orth_columns(stacked, ch.tol()).cols();
  rep.is_faithful = rep.joint_rank == d;
  return rep;
}

Channel compose(const Channel& outer, const Channel& inner) {
  if (outer.dim() != inner.dim())
    throw DimensionMismatch("compose: dimensions differ");
  std::vector<CMatrix> kraus;
  kraus.reserve(inner.kraus().size() * outer.kraus().size());
  for (const auto& Li : inner.kraus())
    for (const auto& Lj : outer.kraus()) kraus.push_back(Li * Lj);
  return Channel::from_kraus(std::move(kraus), outer.tol());
}

Channel convex_combine(const std::vector<double>& weights,
                       const std::vector<Channel>& parts) {
  if (weights.empty() || weights.size() != parts.size())
    throw BadWeights("convex_combine: weights and channels must pair up");
  double sum = 0.0;
  for (double w : weights) {
    if (w <= 0.0) throw BadWeights("convex_combine: weights must be positive");
    sum += w;
  }
  const ToleranceConfig tol = parts.front().tol();
  if (std::abs(sum - 1.0) > tol.eq_tol)
    throw BadWeights("convex_combine: weights sum to " + std::to_string(sum));
  const Index d = parts.front().dim();
  std::vector<CMatrix> kraus;
  for (std::size_t j = 0; j < parts.size(); ++j) {
    if (parts[j].dim() != d)
      throw DimensionMismatch("convex_combine: dimensions differ");
    for (const auto& L : parts[j].kraus())
      kraus.push_back(std::sqrt(weights[j]) * L);
  }
  return Channel::from_kraus(std::move(kraus), tol);
}

Channel pinch_compress(const Channel& ch, const std::vector<Index>& block_dims) {
  Index total = 0;
  for (Index b : block_dims) {
    if (b < 1) throw BadPartition("pinch_compress: block dims must be >= 1");
    total += b;
  }
  if (total != ch.dim())
    throw BadPartition("pinch_compress: blocks sum to " + std::to_string(total) +
                       ", dim is " + std::to_string(ch.dim()));
  // Kraus of X -> sum_j P_j X P_j are the projections themselves; composing
  // gives {P_j L_i}.
  std::vector<CMatrix> kraus;
  Index offset = 0;
  for (Index b : block_dims) {
    CMatrix P = CMatrix::Zero(ch.dim(), ch.dim());
    P.block(offset, offset, b, b) = CMatrix::Identity(b, b);
    for (const auto& L : ch.kraus()) kraus.push_back(P * L);
    offset += b;
  }
  return Channel::from_kraus(std::move(kraus), ch.tol());
}

StateDensity StateDensity::checked(const CMatrix& rho,
                                   const ToleranceConfig& tol) {
  if (rho.rows() != rho.cols()) throw NotAState("state must be square");
  StateDensity s;
  s.dim = rho.rows();
  s.rho = rho;
  const double herm = (rho - rho.adjoint()).norm();
  if (herm > tol.eq_tol * std::max(rho.norm(), 1.0))
    throw NotAState("state is not Hermitian, defect " + std::to_string(herm));
  const double gap = psd_gap(rho, tol);
  if (gap < -tol.eq_tol)
    throw NotAState("state is not PSD, min eigenvalue " + std::to_string(gap));
  const double tr = rho.trace().real();
  if (std::abs(rho.trace() - Complex(1.0, 0.0)) > tol.eq_tol)
    throw NotAState("state trace is " + std::to_string(tr));
  return s;
}

// --- fixtures ----------------------------------------------------------------

namespace {

// Diagonal-functional maps tau(X) = sum_l (sum_k c(l,k) x_kk) E_ll have Kraus
// list {sqrt(c(l,k)) E_kl}.
Channel diag_functional(const Eigen::MatrixXd& c, const ToleranceConfig& tol) {
  const Index d = c.rows();
  std::vector<CMatrix> kraus;
  for (Index l = 0; l < d; ++l)
    for (Index k = 0; k < d; ++k)
      if (c(l, k) != 0.0)
        kraus.push_back(std::sqrt(c(l, k)) * matrix_unit(d, k, l));
  return Channel::from_kraus(std::move(kraus), tol);
}

Eigen::MatrixXd coeffs3(std::initializer_list<double> rows) {
  Eigen::MatrixXd c(3, 3);
  Index i = 0;
  for (double v : rows) {
    c(i / 3, i % 3) = v;
    ++i;
  }
  return c;
}

}  // namespace

Channel identity_channel(Index d, ToleranceConfig tol) {
  if (d < 1) throw BadParams("identity_channel: d must be >= 1");
  return Channel::from_kraus({CMatrix::Identity(d, d)}, tol);
}

Channel unitary_channel(const CMatrix& U, ToleranceConfig tol) {
  if (U.rows() != U.cols()) throw BadParams("unitary_channel: not square");
  const double defect =
      (U.adjoint() * U - CMatrix::Identity(U.rows(), U.rows())).norm();
  if (defect > 1e-8)
    throw BadParams("unitary_channel: not unitary, defect " +
                    std::to_string(defect));
  return Channel::from_kraus({U}, tol);
}

Channel pinch_diag_channel(Index d, ToleranceConfig tol) {
  if (d < 1) throw BadParams("pinch_diag_channel: d must be >= 1");
  std::vector<CMatrix> kraus;
  for (Index j = 0; j < d; ++j) kraus.push_back(matrix_unit(d, j, j));
  return Channel::from_kraus(std::move(kraus), tol);
}

const std::vector<std::string>& fixture_names() {
  static const std::vector<std::string> names = {
      "shemesh2", "tau1_avg",  "tau2_avg", "avg3",      "tau1_comp",
      "tau2_comp", "comp3",    "station3", "faithful3",
  };
  return names;
}

Channel fixture(const std::string& name, ToleranceConfig tol) {
  if (name == "shemesh2") {
    // tau(X) = [[(x11+x22)/2, 0], [0, x22]]
    CMatrix L1 = CMatrix::Zero(2, 2), L2 = CMatrix::Zero(2, 2),
            L3 = CMatrix::Zero(2, 2);
    L1(0, 0) = 1.0 / std::sqrt(2.0);
    L2(1, 0) = 1.0 / std::sqrt(2.0);
    L3(1, 1) = 1.0;
    return Channel::from_kraus({L1, L2, L3}, tol);
  }
  if (name == "tau1_avg")  // diag(x11, x22, x11)
    return diag_functional(coeffs3({1, 0, 0, 0, 1, 0, 1, 0, 0}), tol);
  if (name == "tau2_avg")  // diag(x11, x22, x22)
    return diag_functional(coeffs3({1, 0, 0, 0, 1, 0, 0, 1, 0}), tol);
  if (name == "avg3")
    return convex_combine({0.5, 0.5},
                          {fixture("tau1_avg", tol), fixture("tau2_avg", tol)});
  if (name == "tau1_comp")  // diag(x11, x22, (x11+x33)/2)
    return diag_functional(coeffs3({1, 0, 0, 0, 1, 0, 0.5, 0, 0.5}), tol);
  if (name == "tau2_comp")  // diag(x11, x22, (x22+x33)/2)
    return diag_functional(coeffs3({1, 0, 0, 0, 1, 0, 0, 0.5, 0.5}), tol);
  if (name == "comp3")  // tau2_comp after tau1_comp
    return compose(fixture("tau2_comp", tol), fixture("tau1_comp", tol));
  if (name == "station3")  // diag(x33, x33, (x11+x22)/2)
    return diag_functional(coeffs3({0, 0, 1, 0, 0, 1, 0.5, 0.5, 0}), tol);
  if (name == "faithful3")  // diag(x11, x22, (x11+x22+x33)/3)
    return diag_functional(
        coeffs3({1, 0, 0, 0, 1, 0, 1.0 / 3, 1.0 / 3, 1.0 / 3}), tol);
  // parametrized families: identity(d), pinch_diag(d)
  for (const char* prefix : {"identity", "pinch_diag"}) {
    const std::string p = std::string(prefix) + "(";
    if (name.rfind(p, 0) == 0 && name.back() == ')') {
      const std::string inner = name.substr(p.size(), name.size() - p.size() - 1);
      char* end = nullptr;
      const long d = std::strtol(inner.c_str(), &end, 10);
      if (end == inner.c_str() || *end != '\0' || d < 1)
        throw UnknownFixture("bad dimension in fixture name '" + name + "'");
      return std::string(prefix) == "identity"
                 ? identity_channel(static_cast<Index>(d), tol)
                 : pinch_diag_channel(static_cast<Index>(d), tol);
    }
  }
  throw UnknownFixture("no fixture named '" + name + "'");
}

// --- random generators --------------------------------------------------------

double gaussian(std::mt19937_64& rng) {
  // Box-Muller on 53-bit uniforms; u1 is kept away from 0.
  const double u1 =
      (static_cast<double>(rng() >> 11) + 1.0) / 9007199254740993.0;
  const double u2 = static_cast<double>(rng() >> 11) / 9007199254740992.0;
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

Complex gaussian_complex(std::mt19937_64& rng) {
  const double re = gaussian(rng);
  const double im = gaussian(rng);
  return Complex(re, im) / std::sqrt(2.0);
}

CMatrix ginibre(Index rows, Index cols, std::mt19937_64& rng) {
  CMatrix G(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) G(i, j) = gaussian_complex(rng);
  return G;
}

namespace {

// QR of a Ginibre matrix with the R-diagonal phase fix, which makes Q
// Haar-distributed.
CMatrix haar_qr(Index rows, Index cols, std::mt19937_64& rng) {
  const CMatrix G = ginibre(rows, cols, rng);
  Eigen::HouseholderQR<CMatrix> qr(G);
  CMatrix Q = qr.householderQ() * CMatrix::Identity(rows, cols);
  const CMatrix R = Q.adjoint() * G;
  for (Index j = 0; j < cols; ++j) {
    const Complex r = R(j, j);
    if (std::abs(r) > 0) Q.col(j) *= r / std::abs(r);
  }
  return Q;
}

std::uint64_t mix_seed(RandomKind kind, Index d, Index env_rank,
                       std::uint64_t seed) {
  std::uint64_t h = 0x9e3779b97f4a7c15ull;
  for (std::uint64_t x : {static_cast<std::uint64_t>(kind) + 1,
                          static_cast<std::uint64_t>(d),
                          static_cast<std::uint64_t>(env_rank), seed}) {
    h ^= x + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
    h *= 0xbf58476d1ce4e5b9ull;
    h ^= h >> 31;
  }
  return h;
}

std::vector<Index> random_partition(Index d, std::mt19937_64& rng) {
  // at least two blocks whenever d >= 2
  std::vector<Index> blocks;
  Index left = d;
  while (left > 0) {
    Index b = 1 + static_cast<Index>(rng() % static_cast<std::uint64_t>(left));
    if (blocks.empty() && b == d && d >= 2) b = d - 1;
    blocks.push_back(b);
    left -= b;
  }
  return blocks;
}

}  // namespace

CMatrix haar_unitary(Index d, std::mt19937_64& rng) {
  return haar_qr(d, d, rng);
}

CMatrix haar_isometry(Index rows, Index cols, std::mt19937_64& rng) {
  if (cols > rows) throw BadParams("haar_isometry: cols must be <= rows");
  return haar_qr(rows, cols, rng);
}

RandomKind random_kind_from_string(const std::string& s) {
  if (s == "haar_stinespring") return RandomKind::haar_stinespring;
  if (s == "unitary") return RandomKind::unitary;
  if (s == "mixed_unitary") return RandomKind::mixed_unitary;
  if (s == "pinching") return RandomKind::pinching;
  if (s == "block_permutation") return RandomKind::block_permutation;
  throw BadParams("unknown random channel kind '" + s + "'");
}

std::string to_string(RandomKind kind) {
  switch (kind) {
    case RandomKind::haar_stinespring: return "haar_stinespring";
    case RandomKind::unitary: return "unitary";
    case RandomKind::mixed_unitary: return "mixed_unitary";
    case RandomKind::pinching: return "pinching";
    case RandomKind::block_permutation: return "block_permutation";
  }
  return "?";
}

Channel random_channel(RandomKind kind, Index d, Index env_rank,
                       std::uint64_t seed, ToleranceConfig tol) {
  if (d < 1 || env_rank < 1)
    throw BadParams("random_channel: d and env_rank must be >= 1");
  std::mt19937_64 rng(mix_seed(kind, d, env_rank, seed));
  switch (kind) {
    case RandomKind::haar_stinespring: {
      // Kraus blocks of a Haar isometry C^d -> C^d (x) C^env; unitality is
      // V^dag V = I.
      const CMatrix V = haar_isometry(d * env_rank, d, rng);
      std::vector<CMatrix> kraus;
      for (Index i = 0; i < env_rank; ++i)
        kraus.push_back(V.middleRows(i * d, d));
      return Channel::from_kraus(std::move(kraus), tol);
    }
    case RandomKind::unitary:
      return Channel::from_kraus({haar_unitary(d, rng)}, tol);
    case RandomKind::mixed_unitary: {
      // Dirichlet(1,...,1) weights via normalized exponentials.
      std::vector<double> w(static_cast<std::size_t>(env_rank));
      double sum = 0.0;
      for (auto& x : w) {
        const double u =
            (static_cast<double>(rng() >> 11) + 1.0) / 9007199254740993.0;
        x = -std::log(u);
        sum += x;
      }
      std::vector<CMatrix> kraus;
      for (Index i = 0; i < env_rank; ++i)
        kraus.push_back(std::sqrt(w[static_cast<std::size_t>(i)] / sum) *
                        haar_unitary(d, rng));
      return Channel::from_kraus(std::move(kraus), tol);
    }
    case RandomKind::pinching: {
      // Pinching onto a random flag, conjugated by a Haar unitary.
      const auto blocks = random_partition(d, rng);
      const CMatrix W = haar_unitary(d, rng);
      std::vector<CMatrix> kraus;
      Index offset = 0;
      for (Index b : blocks) {
        CMatrix P = CMatrix::Zero(d, d);
        P.block(offset, offset, b, b) = CMatrix::Identity(b, b);
        kraus.push_back(W.adjoint() * P * W);
        offset += b;
      }
      return Channel::from_kraus(std::move(kraus), tol);
    }
    case RandomKind::block_permutation: {
      // Conjugation by (cyclic block permutation) * blockdiag(Haar W_j); a
      // *-automorphism whose peripheral spectrum always contains roots of
      // unity.
      Index m = 1;
      if (d >= 2) {
        std::vector<Index> divisors;
        for (Index q = 2; q <= d; ++q)
          if (d % q == 0) divisors.push_back(q);
        m = divisors[rng() % divisors.size()];
      }
      const Index b = d / m;
      CMatrix U = CMatrix::Zero(d, d);
      for (Index j = 0; j < m; ++j) {
        const CMatrix W = haar_unitary(b, rng);
        const Index dest = (j + 1) % m;
        U.block(dest * b, j * b, b, b) = W;
      }
      return Channel::from_kraus({U}, tol);
    }
  }
  throw BadParams("random_channel: unreachable kind");
}

}  // namespace ppb
