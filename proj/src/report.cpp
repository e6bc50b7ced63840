#include "ppb/report.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace ppb {

void CommandSet::enable(const std::string& name) {
  if (name == "all") {
    validate = spectrum = decompose = boundary = classify = true;
  } else if (name == "validate") {
    validate = true;
  } else if (name == "spectrum") {
    spectrum = true;
  } else if (name == "decompose") {
    decompose = true;
  } else if (name == "boundary") {
    boundary = true;
  } else if (name == "classify") {
    classify = true;
  } else {
    throw BadParams("unknown command '" + name + "'");
  }
}

bool CommandSet::any() const {
  return validate || spectrum || decompose || boundary || classify;
}

namespace {

using nlohmann::json;

CMatrix parse_matrix(const json& j, Index rows, Index cols,
                     const std::string& what) {
  if (!j.is_array() || static_cast<Index>(j.size()) != rows)
    throw ParseError(what + ": expected " + std::to_string(rows) + " rows");
  CMatrix M(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    const json& row = j[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Index>(row.size()) != cols)
      throw ParseError(what + ": row " + std::to_string(i) + " needs " +
                       std::to_string(cols) + " entries");
    for (Index k = 0; k < cols; ++k) {
      const json& cell = row[static_cast<std::size_t>(k)];
      if (!cell.is_array() || cell.size() != 2 || !cell[0].is_number() ||
          !cell[1].is_number())
        throw ParseError(what + ": entries must be [re, im] pairs");
      M(i, k) = Complex(cell[0].get<double>(), cell[1].get<double>());
    }
  }
  return M;
}

RequestChannel parse_channel(const json& j, const ToleranceConfig& tol) {
  if (!j.is_object()) throw ParseError("channel descriptor must be an object");
  if (j.contains("fixture")) {
    const std::string name = j.at("fixture").get<std::string>();
    return {"fixture:" + name, fixture(name, tol)};
  }
  if (j.contains("random")) {
    const json& r = j.at("random");
    const RandomKind kind =
        random_kind_from_string(r.at("kind").get<std::string>());
    const Index d = r.at("d").get<Index>();
    const Index env = r.value("env_rank", Index{1});
    const std::uint64_t seed = r.value("seed", std::uint64_t{0});
    return {"random:" + to_string(kind) + ":d=" + std::to_string(d) +
                ":env=" + std::to_string(env) + ":seed=" + std::to_string(seed),
            random_channel(kind, d, env, seed, tol)};
  }
  if (!j.contains("dim"))
    throw ParseError("channel descriptor needs 'fixture', 'random', or 'dim'");
  const Index d = j.at("dim").get<Index>();
  if (d < 1) throw BadParams("channel dim must be >= 1");
  if (j.contains("kraus")) {
    const json& ks = j.at("kraus");
    if (!ks.is_array() || ks.empty())
      throw ParseError("'kraus' must be a non-empty matrix list");
    std::vector<CMatrix> kraus;
    for (const auto& m : ks) kraus.push_back(parse_matrix(m, d, d, "kraus"));
    return {"kraus:d=" + std::to_string(d) +
                ":r=" + std::to_string(kraus.size()),
            Channel::from_kraus(std::move(kraus), tol)};
  }
  if (j.contains("choi")) {
    const CMatrix C = parse_matrix(j.at("choi"), d * d, d * d, "choi");
    return {"choi:d=" + std::to_string(d), Channel::from_choi(C, tol)};
  }
  throw ParseError("channel descriptor needs 'kraus' or 'choi'");
}

}  // namespace

AnalysisRequest parse_request(const std::string& text,
                              const CliOverrides& overrides) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(e.what());
  }
  if (!j.is_object()) throw ParseError("request must be a JSON object");

  AnalysisRequest req;
  if (j.contains("tolerances")) {
    const json& t = j.at("tolerances");
    req.tolerances.eq_tol = t.value("eq_tol", req.tolerances.eq_tol);
    req.tolerances.rank_tol_factor =
        t.value("rank_tol_factor", req.tolerances.rank_tol_factor);
    req.tolerances.peripheral_tol =
        t.value("peripheral_tol", req.tolerances.peripheral_tol);
    req.tolerances.cluster_tol =
        t.value("cluster_tol", req.tolerances.cluster_tol);
  }
  if (overrides.eq_tol) req.tolerances.eq_tol = *overrides.eq_tol;
  if (overrides.peripheral_tol)
    req.tolerances.peripheral_tol = *overrides.peripheral_tol;
  req.tolerances.check();

  req.seed = j.value("seed", std::uint64_t{0});
  if (overrides.seed) req.seed = *overrides.seed;

  if (j.contains("commands")) {
    if (!j.at("commands").is_array())
      throw ParseError("'commands' must be an array");
    for (const auto& c : j.at("commands"))
      req.commands.enable(c.get<std::string>());
  }
  for (const auto& c : overrides.commands) req.commands.enable(c);

  if (!j.contains("channels") || !j.at("channels").is_array() ||
      j.at("channels").empty())
    throw ParseError("request needs a non-empty 'channels' array");
  for (const auto& c : j.at("channels"))
    req.channels.push_back(parse_channel(c, req.tolerances));

  if (!req.commands.any())
    throw BadParams("request needs at least one command");
  return req;
}

bool AnalysisReport::any_error() const {
  return std::any_of(channels.begin(), channels.end(),
                     [](const ChannelEntry& c) { return c.error.has_value(); });
}

namespace {

std::uint64_t channel_seed(std::uint64_t base, std::size_t index) {
  std::uint64_t h = base ^ (0x9e3779b97f4a7c15ull + (index << 16));
  h ^= h >> 33;
  h *= 0xff51afd7ed558ccdull;
  h ^= h >> 33;
  return h;
}

void run_channel(const RequestChannel& rc, const CommandSet& commands,
                 std::uint64_t seed, ChannelEntry& entry) {
  const Channel& ch = rc.channel;
  entry.label = rc.label;
  entry.dim = ch.dim();
  entry.kraus_rank = static_cast<Index>(ch.kraus().size());
  entry.ucp = ch.is_ucp();

  try {
    if (commands.validate) entry.validation = validate(ch);
    if (commands.spectrum) entry.spectral = spectrum(ch);
    if (commands.decompose) {
      DecomposeSummary ds;
      const PeripheralDecomposition pd = peripheral_decomposition(ch);
      ds.dim_p = pd.dim_p();
      ds.dim_n = pd.dim_n();
      for (const auto& c : pd.spectral.clusters)
        if (c.peripheral) ds.peripheral_eigenvalues.push_back(c.value);
      ds.jordan_ok = check_peripheral_diagonalizable(ch).ok;
      try {
        const CMatrix contour =
            peripheral_projector(ch, ProjectorMethod::contour);
        ds.projector_agreement = (contour - pd.projector).norm();
      } catch (const NoSpectralGap&) {
        entry.warnings.push_back(
            "NoSpectralGap: contour projector skipped, no gap below the "
            "peripheral band");
      }
      ds.power2 = power_space_equality(ch, 2);
      entry.decompose = std::move(ds);
    }
    if (commands.boundary) {
      BoundarySummary bs;
      const BoundaryAlgebra alg = boundary_algebra(ch);
      bs.algebra_dim = alg.dim();
      bs.structure_checksum = alg.checksum();
      bs.closure_residual = alg.closure_residual;
      for (Index i = 0; i < alg.unit_coords.size(); ++i)
        bs.unit_coords.push_back(alg.unit_coords(i));
      bs.cstar = verify_cstar_axioms(ch, alg, /*sample_count=*/8, seed);
      bs.restricted = verify_restricted_automorphism(ch);
      entry.boundary = std::move(bs);
    }
    if (commands.classify) {
      ClassifySummary cs;
      cs.pa = is_peripherally_automorphic(ch);
      const MultDomainInf inf = multiplicative_domain_inf(ch);
      if (inf.not_stabilized)
        entry.warnings.push_back(
            "NotStabilized: multiplicative-domain intersection still "
            "shrinking at the iteration cap");
      cs.stationarity = is_stationary(ch);
      if (cs.stationarity.stationary) {
        const BlockDecomposition blocks = irreducible_blocks(ch, seed);
        BlockSummary summary;
        for (std::size_t i = 0; i < blocks.projections.size(); ++i) {
          summary.ranks.push_back(static_cast<Index>(std::llround(
              blocks.projections[i].trace().real())));
          summary.irreducible.push_back(blocks.irreducible_flags[i]);
        }
        cs.blocks = std::move(summary);
      }
      cs.automorphism = automorphism_check(ch);
      entry.classify = std::move(cs);
    }
  } catch (const BoundaryAmbiguity& e) {
    entry.warnings.push_back(std::string("BoundaryAmbiguity: ") + e.what());
  } catch (const Error& e) {
    entry.error = ErrorInfo{e.kind(), e.what()};
  }
}

}  // namespace

AnalysisReport run(const AnalysisRequest& request) {
  AnalysisReport report;
  report.seed = request.seed;
  report.tolerances = request.tolerances;
  report.channels.resize(request.channels.size());
  for (std::size_t i = 0; i < request.channels.size(); ++i)
    run_channel(request.channels[i], request.commands,
                channel_seed(request.seed, i), report.channels[i]);
  return report;
}

// --- serialization -----------------------------------------------------------

namespace {

std::string fmt_double(double v) {
  if (!std::isfinite(v)) return "null";
  if (v == 0.0) v = 0.0;  // normalize -0
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12e", v);
  return buf;
}

// Minimal ordered JSON emitter; keys are written in a fixed sequence by the
// callers, which is what makes the byte-determinism guarantee possible.
class JsonWriter {
 public:
  std::string str() && { return std::move(out_); }

  void begin_object() {
    pre();
    out_ += '{';
    first_.push_back(true);
  }
  void end_object() {
    out_ += '}';
    first_.pop_back();
  }
  void begin_array() {
    pre();
    out_ += '[';
    first_.push_back(true);
  }
  void end_array() {
    out_ += ']';
    first_.pop_back();
  }

  void key(const char* k) {
    pre();
    out_ += '"';
    out_ += k;
    out_ += "\":";
    after_key_ = true;
  }

  void value(const std::string& s) {
    pre();
    out_ += '"';
    for (char c : s) {
      switch (c) {
        case '"': out_ += "\\\""; break;
        case '\\': out_ += "\\\\"; break;
        case '\n': out_ += "\\n"; break;
        case '\t': out_ += "\\t"; break;
        default:
          if (static_cast<unsigned char>(c) < 0x20) {
            char buf[8];
            std::snprintf(buf, sizeof buf, "\\u%04x", c);
            out_ += buf;
          } else {
            out_ += c;
          }
      }
    }
    out_ += '"';
  }
  void value(double d) {
    pre();
    out_ += fmt_double(d);
  }
  void value(Index n) {
    pre();
    out_ += std::to_string(n);
  }
  void value(std::uint64_t n) {
    pre();
    out_ += std::to_string(n);
  }
  void value(int n) { value(static_cast<Index>(n)); }
  void value(bool b) {
    pre();
    out_ += b ? "true" : "false";
  }
  void value(Complex z) {
    begin_array();
    value(z.real());
    value(z.imag());
    end_array();
  }
  void value(const CMatrix& M) {
    begin_array();
    for (Index i = 0; i < M.rows(); ++i) {
      begin_array();
      for (Index j = 0; j < M.cols(); ++j) value(M(i, j));
      end_array();
    }
    end_array();
  }

 private:
  // A value right after a key never takes a comma; otherwise the first item
  // of the enclosing container skips it and the rest get one.
  void pre() {
    if (after_key_) {
      after_key_ = false;
      return;
    }
    if (!first_.back()) out_ += ',';
    first_.back() = false;
  }
  std::string out_;
  std::vector<bool> first_{true};
  bool after_key_ = false;
};

void emit_pa_condition(JsonWriter& w, const char* name,
                       const PACondition& c) {
  w.key(name);
  w.begin_object();
  w.key("ok");
  w.value(c.ok);
  w.key("gap");
  w.value(c.gap);
  w.end_object();
}

void emit_channel_json(JsonWriter& w, const ChannelEntry& e) {
  w.begin_object();
  w.key("label");
  w.value(e.label);
  w.key("dim");
  w.value(e.dim);
  w.key("kraus_rank");
  w.value(e.kraus_rank);
  w.key("ucp");
  w.value(e.ucp);
  if (e.error) {
    w.key("error");
    w.begin_object();
    w.key("kind");
    w.value(e.error->kind);
    w.key("message");
    w.value(e.error->message);
    w.end_object();
  }
  w.key("warnings");
  w.begin_array();
  for (const auto& s : e.warnings) w.value(s);
  w.end_array();

  if (e.validation) {
    const auto& v = *e.validation;
    w.key("validate");
    w.begin_object();
    w.key("cp");
    w.value(v.is_cp);
    w.key("choi_gap");
    w.value(v.choi_gap);
    w.key("unital");
    w.value(v.is_unital);
    w.key("unitality_gap");
    w.value(v.unitality_gap);
    w.key("trace_preserving");
    w.value(v.is_trace_preserving);
    w.key("tp_gap");
    w.value(v.tp_gap);
    w.key("faithful");
    w.value(v.is_faithful);
    w.key("joint_rank");
    w.value(v.joint_rank);
    w.end_object();
  }
  if (e.spectral) {
    w.key("spectrum");
    w.begin_object();
    w.key("eigenvalues");
    w.begin_array();
    for (const auto& c : e.spectral->clusters) {
      w.begin_object();
      w.key("value");
      w.value(c.value);
      w.key("multiplicity");
      w.value(c.multiplicity);
      w.key("peripheral");
      w.value(c.peripheral);
      w.end_object();
    }
    w.end_array();
    w.key("transient_radius");
    w.value(e.spectral->transient_radius);
    w.end_object();
  }
  if (e.decompose) {
    const auto& d = *e.decompose;
    w.key("decompose");
    w.begin_object();
    w.key("dim_p");
    w.value(d.dim_p);
    w.key("dim_n");
    w.value(d.dim_n);
    w.key("peripheral_eigenvalues");
    w.begin_array();
    for (const auto& z : d.peripheral_eigenvalues) w.value(z);
    w.end_array();
    w.key("jordan_ok");
    w.value(d.jordan_ok);
    if (d.projector_agreement) {
      w.key("projector_agreement");
      w.value(*d.projector_agreement);
    }
    w.key("power2_p_equal");
    w.value(d.power2.p_equal);
    w.key("power2_n_equal");
    w.value(d.power2.n_equal);
    w.end_object();
  }
  if (e.boundary) {
    const auto& b = *e.boundary;
    w.key("boundary");
    w.begin_object();
    w.key("algebra_dim");
    w.value(b.algebra_dim);
    w.key("structure_checksum");
    w.value(b.structure_checksum);
    w.key("closure_residual");
    w.value(b.closure_residual);
    w.key("unit_coords");
    w.begin_array();
    for (const auto& z : b.unit_coords) w.value(z);
    w.end_array();
    w.key("cstar");
    w.begin_object();
    w.key("associativity");
    w.value(b.cstar.associativity_gap);
    w.key("involution");
    w.value(b.cstar.involution_gap);
    w.key("unit");
    w.value(b.cstar.unit_gap);
    w.key("cstar_identity");
    w.value(b.cstar.cstar_identity_gap);
    w.end_object();
    w.key("restricted_automorphism");
    w.begin_object();
    w.key("hom_gap");
    w.value(b.restricted.hom_gap);
    w.key("adjoint_gap");
    w.value(b.restricted.adjoint_gap);
    w.key("bijective");
    w.value(b.restricted.bijective);
    w.end_object();
    w.end_object();
  }
  if (e.classify) {
    const auto& c = *e.classify;
    w.key("classify");
    w.begin_object();
    w.key("peripherally_automorphic");
    w.begin_object();
    emit_pa_condition(w, "c1", c.pa.c1);
    emit_pa_condition(w, "c2", c.pa.c2);
    emit_pa_condition(w, "c3", c.pa.c3);
    emit_pa_condition(w, "c4", c.pa.c4);
    emit_pa_condition(w, "c5", c.pa.c5);
    w.key("agree");
    w.value(c.pa.agree);
    w.key("overall");
    w.value(c.pa.overall);
    w.end_object();
    w.key("stationarity");
    w.begin_object();
    w.key("stationary");
    w.value(c.stationarity.stationary);
    w.key("star_closed");
    w.value(c.stationarity.star_closed);
    w.key("algebra_dim");
    w.value(c.stationarity.algebra_dim);
    w.key("faithful_gap");
    w.value(c.stationarity.faithful_gap);
    w.key("rho0");
    w.value(c.stationarity.rho0.rho);
    if (c.stationarity.witness) {
      w.key("witness");
      w.value(*c.stationarity.witness);
    }
    w.end_object();
    if (c.blocks) {
      w.key("blocks");
      w.begin_object();
      w.key("count");
      w.value(static_cast<Index>(c.blocks->ranks.size()));
      w.key("ranks");
      w.begin_array();
      for (Index r : c.blocks->ranks) w.value(r);
      w.end_array();
      w.key("irreducible");
      w.begin_array();
      for (bool f : c.blocks->irreducible) w.value(f);
      w.end_array();
      w.end_object();
    }
    w.key("automorphism");
    w.begin_object();
    w.key("unimodular");
    w.value(c.automorphism.unimodular);
    if (c.automorphism.multiplicative_gap) {
      w.key("multiplicative_gap");
      w.value(*c.automorphism.multiplicative_gap);
    }
    w.key("bijective");
    w.value(c.automorphism.bijective);
    w.key("is_automorphism");
    w.value(c.automorphism.is_automorphism);
    w.end_object();
    w.end_object();
  }
  w.end_object();
}

std::string emit_json(const AnalysisReport& r) {
  JsonWriter w;
  w.begin_object();
  w.key("tool");
  w.value(std::string("ppb"));
  w.key("version");
  w.value(std::string("0.1.0"));
  w.key("seed");
  w.value(r.seed);
  w.key("tolerances");
  w.begin_object();
  w.key("eq_tol");
  w.value(r.tolerances.eq_tol);
  w.key("rank_tol_factor");
  w.value(r.tolerances.rank_tol_factor);
  w.key("peripheral_tol");
  w.value(r.tolerances.peripheral_tol);
  w.key("cluster_tol");
  w.value(r.tolerances.cluster_tol);
  w.end_object();
  w.key("channels");
  w.begin_array();
  for (const auto& c : r.channels) emit_channel_json(w, c);
  w.end_array();
  w.end_object();
  std::string out = std::move(w).str();
  out += '\n';
  return out;
}

const char* yesno(bool b) { return b ? "yes" : "no"; }

double nz(double v) { return v == 0.0 ? 0.0 : v; }

std::string emit_text(const AnalysisReport& r) {
  std::string out;
  char line[256];
  for (std::size_t i = 0; i < r.channels.size(); ++i) {
    const auto& e = r.channels[i];
    std::snprintf(line, sizeof line, "channel %zu: %s (dim %lld, kraus %lld%s)\n",
                  i, e.label.c_str(), static_cast<long long>(e.dim),
                  static_cast<long long>(e.kraus_rank), e.ucp ? ", ucp" : "");
    out += line;
    if (e.error) {
      out += "  error: " + e.error->kind + " - " + e.error->message + "\n";
    }
    for (const auto& wmsg : e.warnings) out += "  warning: " + wmsg + "\n";
    if (e.validation) {
      std::snprintf(line, sizeof line,
                    "  validate: cp=%s unital=%s trace_preserving=%s "
                    "faithful=%s\n",
                    yesno(e.validation->is_cp), yesno(e.validation->is_unital),
                    yesno(e.validation->is_trace_preserving),
                    yesno(e.validation->is_faithful));
      out += line;
    }
    if (e.spectral) {
      out += "  spectrum:";
      for (const auto& c : e.spectral->clusters) {
        std::snprintf(line, sizeof line, " %.6f%+.6fi(x%d%s)",
                      nz(c.value.real()), nz(c.value.imag()), c.multiplicity,
                      c.peripheral ? ",P" : "");
        out += line;
      }
      std::snprintf(line, sizeof line, " transient_radius=%.6f\n",
                    e.spectral->transient_radius);
      out += line;
    }
    if (e.decompose) {
      std::snprintf(line, sizeof line,
                    "  decompose: dim_p=%lld dim_n=%lld jordan_ok=%s\n",
                    static_cast<long long>(e.decompose->dim_p),
                    static_cast<long long>(e.decompose->dim_n),
                    yesno(e.decompose->jordan_ok));
      out += line;
    }
    if (e.boundary) {
      std::snprintf(line, sizeof line,
                    "  boundary: algebra_dim=%lld closure_residual=%.3e "
                    "cstar_identity_gap=%.3e\n",
                    static_cast<long long>(e.boundary->algebra_dim),
                    e.boundary->closure_residual,
                    e.boundary->cstar.cstar_identity_gap);
      out += line;
    }
    if (e.classify) {
      std::snprintf(
          line, sizeof line,
          "  classify: PA=%s(agree=%s) stationary=%s star_closed=%s "
          "automorphism=%s\n",
          yesno(e.classify->pa.overall), yesno(e.classify->pa.agree),
          yesno(e.classify->stationarity.stationary),
          yesno(e.classify->stationarity.star_closed),
          yesno(e.classify->automorphism.is_automorphism));
      out += line;
      if (e.classify->blocks) {
        out += "  blocks:";
        for (std::size_t b = 0; b < e.classify->blocks->ranks.size(); ++b) {
          std::snprintf(line, sizeof line, " rank%lld(%s)",
                        static_cast<long long>(e.classify->blocks->ranks[b]),
                        e.classify->blocks->irreducible[b] ? "irr" : "red");
          out += line;
        }
        out += "\n";
      }
    }
  }
  return out;
}

}  // namespace

std::string emit(const AnalysisReport& report, EmitFormat format) {
  return format == EmitFormat::json ? emit_json(report) : emit_text(report);
}

int exit_code(const AnalysisReport& report) {
  return report.any_error() ? 1 : 0;
}

}  // namespace ppb
