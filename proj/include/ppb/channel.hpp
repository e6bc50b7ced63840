#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "ppb/numkernel.hpp"
#include "ppb/types.hpp"

namespace ppb {

// Completely positive map in Kraus form, acting as
//
//   tau(X) = sum_i L_i^dag X L_i.
//
// The superoperator (column-stacking convention) and the Choi matrix
// sum_{jk} E_jk (x) tau(E_jk) are computed once at construction and never
// mutated; Channel values are immutable and safe to share across threads.
class Channel {
 public:
  static Channel from_kraus(std::vector<CMatrix> kraus,
                            ToleranceConfig tol = {});
  // Recovers a minimal Kraus list from the Hermitian eigendecomposition of a
  // Choi matrix.
  static Channel from_choi(const CMatrix& choi, ToleranceConfig tol = {});

  Index dim() const { return dim_; }
  const std::vector<CMatrix>& kraus() const { return kraus_; }
  const CMatrix& superop() const { return superop_; }
  const CMatrix& choi() const { return choi_; }
  const ToleranceConfig& tol() const { return tol_; }

  // CP holds by construction; unitality is measured at construction time.
  bool is_ucp() const { return unital_; }
  double unitality_gap() const { return unitality_gap_; }
  void require_ucp(const char* where) const;

  CMatrix apply(const CMatrix& X) const;
  // Action of the trace dual tau^*(X) = sum_i L_i X L_i^dag.
  CMatrix apply_adjoint(const CMatrix& X) const;
  // The dual as a channel-like object (usually non-unital); its superoperator
  // is the conjugate transpose of superop().
  Channel adjoint_map() const;
  // m-fold self-composition; the Kraus list is recompressed through the Choi
  // matrix when it outgrows dim^2.
  Channel power(int m) const;

 private:
  Channel() = default;
  Index dim_ = 0;
  std::vector<CMatrix> kraus_;
  CMatrix superop_;
  CMatrix choi_;
  ToleranceConfig tol_;
  bool unital_ = false;
  double unitality_gap_ = 0.0;
};

struct ValidationReport {
  bool is_cp = false;
  double choi_gap = 0.0;  // smallest Choi eigenvalue
  bool is_unital = false;
  double unitality_gap = 0.0;  // ||sum L_i^dag L_i - I||
  bool is_trace_preserving = false;
  double tp_gap = 0.0;  // ||sum L_i L_i^dag - I||
  bool is_faithful = false;
  Index joint_rank = 0;  // column rank of [L_1 | ... | L_r]
};

ValidationReport validate(const Channel& ch);

// outer(inner(X)); Kraus list is {inner_i * outer_j}, i outer loop.
Channel compose(const Channel& outer, const Channel& inner);

Channel convex_combine(const std::vector<double>& weights,
                       const std::vector<Channel>& parts);

// X -> tau(sum_j P_j X P_j) for the coordinate block projections of the
// partition.
Channel pinch_compress(const Channel& ch, const std::vector<Index>& block_dims);

struct StateDensity {
  Index dim = 0;
  CMatrix rho;
  // Validates Hermitian + PSD + unit trace within tolerances.
  static StateDensity checked(const CMatrix& rho, const ToleranceConfig& tol);
};

// Named example channels plus "identity(d)" and "pinch_diag(d)".
Channel fixture(const std::string& name, ToleranceConfig tol = {});
const std::vector<std::string>& fixture_names();

Channel identity_channel(Index d, ToleranceConfig tol = {});
Channel unitary_channel(const CMatrix& U, ToleranceConfig tol = {});
Channel pinch_diag_channel(Index d, ToleranceConfig tol = {});

enum class RandomKind {
  haar_stinespring,
  unitary,
  mixed_unitary,
  pinching,
  block_permutation,
};

RandomKind random_kind_from_string(const std::string& s);
std::string to_string(RandomKind kind);

// Deterministic given (kind, d, env_rank, seed). env_rank is the Stinespring
// environment dimension / number of mixed unitaries; ignored by kinds that do
// not need it.
Channel random_channel(RandomKind kind, Index d, Index env_rank,
                       std::uint64_t seed, ToleranceConfig tol = {});

// Deterministic Gaussian and Haar draws (Box-Muller over the raw 64-bit
// stream, Mezzadri phase fix); std::normal_distribution is not portable
// across standard libraries.
double gaussian(std::mt19937_64& rng);
Complex gaussian_complex(std::mt19937_64& rng);
CMatrix ginibre(Index rows, Index cols, std::mt19937_64& rng);
CMatrix haar_unitary(Index d, std::mt19937_64& rng);
CMatrix haar_isometry(Index rows, Index cols, std::mt19937_64& rng);

}  // namespace ppb
