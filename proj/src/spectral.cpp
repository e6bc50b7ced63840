#include "ppb/spectral.hpp"

#include <Eigen/LU>

#include <algorithm>
#include <cmath>

namespace ppb {

std::vector<Complex> SpectralData::peripheral_values() const {
  std::vector<Complex> out;
  for (const auto& c : clusters)
    if (c.peripheral) out.push_back(c.value);
  return out;
}

int SpectralData::total_multiplicity() const {
  int n = 0;
  for (const auto& c : clusters) n += c.multiplicity;
  return n;
}

int SpectralData::peripheral_multiplicity() const {
  int n = 0;
  for (const auto& c : clusters)
    if (c.peripheral) n += c.multiplicity;
  return n;
}

bool SpectralData::unimodular() const {
  for (const auto& c : clusters)
    if (!c.peripheral) return false;
  return true;
}

namespace {

std::vector<EigCluster> cluster_values(const CVector& raw,
                                       const ToleranceConfig& tol) {
  const Index n = raw.size();
  std::vector<Index> parent(n);
  for (Index i = 0; i < n; ++i) parent[i] = i;
  std::function<Index(Index)> find = [&](Index x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (Index i = 0; i < n; ++i)
    for (Index j = i + 1; j < n; ++j)
      if (std::abs(raw(i) - raw(j)) <= tol.cluster_tol) {
        const Index a = find(i), b = find(j);
        if (a != b) parent[a] = b;
      }
  std::vector<EigCluster> clusters;
  std::vector<Index> root_of;
  for (Index i = 0; i < n; ++i) {
    const Index r = find(i);
    auto it = std::find(root_of.begin(), root_of.end(), r);
    if (it == root_of.end()) {
      root_of.push_back(r);
      clusters.push_back({raw(i), 1, false});
    } else {
      auto& c = clusters[static_cast<std::size_t>(it - root_of.begin())];
      // running mean
      c.value += (raw(i) - c.value) / static_cast<double>(c.multiplicity + 1);
      c.multiplicity += 1;
    }
  }
  for (auto& c : clusters) {
    const double m = std::abs(std::abs(c.value) - 1.0);
    if (m <= tol.peripheral_tol) {
      c.peripheral = true;
      c.value /= std::abs(c.value);  // snap to the unit circle
    }
  }
  std::sort(clusters.begin(), clusters.end(),
            [](const EigCluster& a, const EigCluster& b) {
              const double ma = std::abs(a.value), mb = std::abs(b.value);
              if (std::abs(ma - mb) > 1e-15) return ma > mb;
              return std::arg(a.value) < std::arg(b.value);
            });
  return clusters;
}

}  // namespace

SpectralData spectrum(const Channel& ch) {
  ch.require_ucp("spectrum");
  const ToleranceConfig& tol = ch.tol();
  SpectralData sd;
  sd.clusters = cluster_values(eig_values(ch.superop()), tol);
  sd.transient_radius = 0.0;
  bool has_one = false;
  for (const auto& c : sd.clusters) {
    const double mod = std::abs(c.value);
    if (!c.peripheral) sd.transient_radius = std::max(sd.transient_radius, mod);
    if (mod > 1.0 + tol.peripheral_tol)
      throw InternalInconsistency("spectrum: eigenvalue of modulus " +
                                  std::to_string(mod) +
                                  " outside the closed unit disk");
    if (c.peripheral && std::abs(c.value - Complex(1.0, 0.0)) <= tol.cluster_tol)
      has_one = true;
  }
  if (!has_one)
    throw InternalInconsistency("spectrum: eigenvalue 1 missing from a unital map");
  return sd;
}

std::vector<CMatrix> eigenspace(const Channel& ch, Complex lambda) {
  const SpectralData sd = spectrum(ch);
  double best = 1e300;
  for (const auto& c : sd.clusters)
    best = std::min(best, std::abs(c.value - lambda));
  if (best > ch.tol().cluster_tol)
    throw NotAnEigenvalue("eigenspace: nearest eigenvalue is at distance " +
                          std::to_string(best));
  const Index d = ch.dim();
  const CMatrix shifted =
      ch.superop() - lambda * CMatrix::Identity(d * d, d * d);
  const CMatrix N = null_space_abs(shifted, ch.tol().eq_tol);
  std::vector<CMatrix> out;
  for (Index j = 0; j < N.cols(); ++j) out.push_back(unvec(N.col(j), d, d));
  return out;
}

CMatrix peripheral_projector(const Channel& ch, ProjectorMethod method,
                             int contour_nodes) {
  ch.require_ucp("peripheral_projector");
  const ToleranceConfig& tol = ch.tol();
  if (method == ProjectorMethod::schur)
    return spectral_projector(ch.superop(),
                              EigSelector::peripheral_band(tol), tol);
  const SpectralData sd = spectrum(ch);
  if (sd.transient_radius >= 1.0 - tol.peripheral_tol)
    throw NoSpectralGap("peripheral_projector: transient radius " +
                        std::to_string(sd.transient_radius));
  const double radius = 0.5 * (1.0 + sd.transient_radius);
  const Index n = ch.superop().rows();
  const CMatrix I = CMatrix::Identity(n, n);
  CMatrix Q = CMatrix::Zero(n, n);
  for (int j = 0; j < contour_nodes; ++j) {
    const double theta = 2.0 * M_PI * j / contour_nodes;
    const Complex z = radius * std::exp(Complex(0.0, theta));
    Q += z * (z * I - ch.superop()).partialPivLu().solve(I);
  }
  Q /= static_cast<double>(contour_nodes);
  return I - Q;
}

PeripheralDecomposition peripheral_decomposition(const Channel& ch) {
  ch.require_ucp("peripheral_decomposition");
  const ToleranceConfig& tol = ch.tol();
  const Index d = ch.dim();
  PeripheralDecomposition pd;
  pd.spectral = spectrum(ch);

  const SpectralProjection sp = spectral_projection(
      ch.superop(), EigSelector::peripheral_band(tol), tol);
  pd.projector = sp.projector;
  pd.p_range = sp.range_basis;
  pd.n_range = sp.kernel_basis;
  if (sp.rank != pd.spectral.peripheral_multiplicity())
    throw InternalInconsistency(
        "peripheral_decomposition: projector rank " + std::to_string(sp.rank) +
        " != peripheral multiplicity " +
        std::to_string(pd.spectral.peripheral_multiplicity()));

  // Restrict to the invariant subspace and split per eigenvalue there.
  const CMatrix M = sp.range_basis.adjoint() * ch.superop() * sp.range_basis;
  for (const auto& c : pd.spectral.clusters) {
    if (!c.peripheral) continue;
    const CMatrix shifted =
        M - c.value * CMatrix::Identity(sp.rank, sp.rank);
    CMatrix W = null_space_abs(shifted, tol.eq_tol);
    if (W.cols() != c.multiplicity)
      throw InternalInconsistency(
          "peripheral_decomposition: eigenvalue " +
          std::to_string(c.value.real()) + "+" +
          std::to_string(c.value.imag()) + "i has geometric dimension " +
          std::to_string(W.cols()) + ", algebraic " +
          std::to_string(c.multiplicity));
    CMatrix lifted = sp.range_basis * W;
    canonicalize_phases(lifted);
    for (Index j = 0; j < lifted.cols(); ++j)
      pd.p_basis.push_back({c.value, unvec(lifted.col(j), d, d)});
  }

  pd.n_basis.dim = d;
  for (Index j = 0; j < sp.kernel_basis.cols(); ++j)
    pd.n_basis.elements.push_back(unvec(sp.kernel_basis.col(j), d, d));

  if (pd.dim_p() + pd.dim_n() != d * d)
    throw InternalInconsistency("peripheral_decomposition: dims " +
                                std::to_string(pd.dim_p()) + " + " +
                                std::to_string(pd.dim_n()) + " != " +
                                std::to_string(d * d));
  return pd;
}

JordanCheck check_peripheral_diagonalizable(const Channel& ch) {
  const SpectralData sd = spectrum(ch);
  const Index d = ch.dim();
  JordanCheck jc;
  jc.ok = true;
  for (const auto& c : sd.clusters) {
    if (!c.peripheral) continue;
    const CMatrix shifted =
        ch.superop() - c.value * CMatrix::Identity(d * d, d * d);
    const Index geo = null_space_abs(shifted, ch.tol().eq_tol).cols();
    jc.entries.push_back({c.value, c.multiplicity, static_cast<int>(geo)});
    if (geo != c.multiplicity) jc.ok = false;
  }
  return jc;
}

DecayReport decay_verify(const Channel& ch, const CMatrix& X, int n_max,
                         double tol) {
  ch.require_ucp("decay_verify");
  const SpectralData sd = spectrum(ch);
  const double tr = sd.transient_radius;
  const bool gapless = tr >= 1.0 - ch.tol().peripheral_tol;
  if (n_max <= 0) {
    if (gapless || tr <= 0.0) {
      n_max = gapless ? 10000 : static_cast<int>(ch.dim() * ch.dim() + 1);
    } else {
      const double steps = 2.0 * std::ceil(std::log(tol) / std::log(tr));
      n_max = static_cast<int>(
          std::min(10000.0, std::max(steps, static_cast<double>(
                                                ch.dim() * ch.dim() + 1))));
    }
  }
  DecayReport rep;
  CMatrix Y = X;
  for (int n = 1; n <= n_max; ++n) {
    Y = ch.apply(Y);
    const double r = hs_norm(Y);
    rep.residuals.push_back(r);
    if (r <= tol) {
      rep.decayed = true;
      rep.first_n = n;
      return rep;
    }
  }
  rep.inconclusive = gapless;
  return rep;
}

PowerSpaceReport power_space_equality(const Channel& ch, int m) {
  if (m < 1) throw BadParams("power_space_equality: m must be >= 1");
  const PeripheralDecomposition base = peripheral_decomposition(ch);
  const PeripheralDecomposition powered =
      peripheral_decomposition(ch.power(m));
  constexpr double kTol = 1e-7;
  PowerSpaceReport rep;
  rep.p_equal = subspaces_equal(base.p_range, powered.p_range, kTol);
  rep.n_equal = subspaces_equal(base.n_range, powered.n_range, kTol);
  return rep;
}

}  // namespace ppb
