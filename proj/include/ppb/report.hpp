#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ppb/boundary.hpp"
#include "ppb/channel.hpp"
#include "ppb/classify.hpp"
#include "ppb/spectral.hpp"

namespace ppb {

struct CommandSet {
  bool validate = false;
  bool spectrum = false;
  bool decompose = false;
  bool boundary = false;
  bool classify = false;

  void enable(const std::string& name);  // "all" switches everything on
  bool any() const;
};

struct RequestChannel {
  std::string label;
  Channel channel;
};

struct AnalysisRequest {
  std::vector<RequestChannel> channels;
  CommandSet commands;
  ToleranceConfig tolerances;
  std::uint64_t seed = 0;
};

// Command-line overrides applied before channels are materialized, since the
// tolerance config is baked into each channel.
struct CliOverrides {
  std::optional<double> eq_tol;
  std::optional<double> peripheral_tol;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> commands;
};

// Accepts {"channels": [...], "commands": [...], "tolerances": {...},
// "seed": n}. Channel descriptors are one of
//   {"fixture": name}
//   {"dim": d, "kraus": [matrix, ...]}
//   {"dim": d, "choi": matrix}
//   {"random": {"kind": k, "d": d, "env_rank": r, "seed": s}}
// with matrices given as rows of [re, im] pairs.
AnalysisRequest parse_request(const std::string& text,
                              const CliOverrides& overrides = {});

struct ErrorInfo {
  std::string kind;
  std::string message;
};

struct DecomposeSummary {
  Index dim_p = 0;
  Index dim_n = 0;
  std::vector<Complex> peripheral_eigenvalues;
  bool jordan_ok = false;
  std::optional<double> projector_agreement;  // Schur vs contour, when gapped
  PowerSpaceReport power2;
};

struct BoundarySummary {
  Index algebra_dim = 0;
  double structure_checksum = 0.0;
  double closure_residual = 0.0;
  std::vector<Complex> unit_coords;
  CStarAxiomReport cstar;
  RestrictedAutomorphismReport restricted;
};

struct BlockSummary {
  std::vector<Index> ranks;
  std::vector<bool> irreducible;
};

struct ClassifySummary {
  PAReport pa;
  StationarityReport stationarity;
  std::optional<BlockSummary> blocks;  // stationary channels only
  AutomorphismReport automorphism;
};

struct ChannelEntry {
  std::string label;
  Index dim = 0;
  Index kraus_rank = 0;
  bool ucp = false;
  std::optional<ErrorInfo> error;
  std::vector<std::string> warnings;
  std::optional<ValidationReport> validation;
  std::optional<SpectralData> spectral;
  std::optional<DecomposeSummary> decompose;
  std::optional<BoundarySummary> boundary;
  std::optional<ClassifySummary> classify;
};

struct AnalysisReport {
  std::uint64_t seed = 0;
  ToleranceConfig tolerances;
  std::vector<ChannelEntry> channels;

  bool any_error() const;
};

// Executes the requested sections per channel; failures are captured per
// channel, never fatal to the batch. Output is deterministic for a fixed
// request and seed.
AnalysisReport run(const AnalysisRequest& request);

enum class EmitFormat { json, text };

// JSON uses a fixed key order and %.12e floats with negative zero normalized,
// so identical requests serialize byte-identically.
std::string emit(const AnalysisReport& report, EmitFormat format);

// 0 clean, 1 any per-channel error (warnings allowed).
int exit_code(const AnalysisReport& report);

}  // namespace ppb
