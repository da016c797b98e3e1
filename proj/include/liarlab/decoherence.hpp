#pragma once

// Environment coupling on S⊗A⊗E. The constraint fixes U_E on the coupled
// subspace with the environment in its "in" state:
// U_E(|o_i,a_{i+1},e_0⟩) = |o_i,a_{i+1},e_{i+1}⟩. Environment labels mirror
// the apparatus convention: 0 is E_in, j ∈ {1..n} are the "out" states E_j.

#include <cstddef>
#include <vector>

#include "liarlab/errors.hpp"
#include "liarlab/liar.hpp"
#include "liarlab/measurement.hpp"
#include "liarlab/tensor.hpp"

namespace liarlab {

/// Environment amplitudes over labels {0 = E_in, 1..n}.
class EnvironmentPreparation {
 public:
  explicit EnvironmentPreparation(std::vector<cplx> e) : e_(std::move(e)) {
    if (e_.size() < 3) throw ModelError("EnvironmentPreparation: n >= 2 required");
    double s = 0;
    for (const cplx& c : e_) s += std::norm(c);
    if (std::abs(std::sqrt(s) - 1.0) > kUnitaryTol)
      throw ValidationError("EnvironmentPreparation: not normalized");
  }

  static EnvironmentPreparation initial(std::size_t n) {
    std::vector<cplx> e(n + 1, cplx{0, 0});
    e[0] = cplx{1, 0};
    return EnvironmentPreparation(std::move(e));
  }
  /// √(1−η²) at E_in, η at label m ∈ {1..n}.
  static EnvironmentPreparation perturbed(std::size_t n, std::size_t m,
                                          double eta) {
    if (m < 1 || m > n) throw ArgumentError("perturbed: m out of range");
    if (eta < 0.0 || eta >= 1.0)
      throw ArgumentError("perturbed: eta outside [0,1)");
    std::vector<cplx> e(n + 1, cplx{0, 0});
    e[0] = cplx{std::sqrt(1.0 - eta * eta), 0};
    e[m] = cplx{eta, 0};
    return EnvironmentPreparation(std::move(e));
  }

  std::size_t n() const { return e_.size() - 1; }
  const std::vector<cplx>& e() const { return e_; }

  StateVector state() const {
    return StateVector(FactorDims{std::vector<std::size_t>{e_.size()}}, e_);
  }

 private:
  std::vector<cplx> e_;
};

/// Unitary on S⊗A⊗E satisfying the environment calibration constraint.
struct EnvironmentUnitary {
  std::size_t n;
  CompletionSpec completion;
  UnitaryOperator u;

  FactorDims dims() const { return FactorDims{n, n + 1, n + 1}; }
};

/// Flat S⊗A⊗E label of system i, apparatus j, environment m.
inline std::size_t sae_label(std::size_t n, std::size_t i, std::size_t j,
                             std::size_t m) {
  return (i * (n + 1) + j) * (n + 1) + m;
}

/// Environment monitors the record: (i, j, m) ↦ (i, j, (m+j) mod (n+1)).
/// A ready apparatus (j = 0) leaves the environment untouched.
inline EnvironmentUnitary build_env_pointer_shift(std::size_t n) {
  ModelDims md(n);
  LinearOperator u(md.dim_sae());
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j <= n; ++j)
      for (std::size_t m = 0; m <= n; ++m)
        u.at(sae_label(n, i, j, (m + j) % (n + 1)), sae_label(n, i, j, m)) =
            cplx{1, 0};
  return EnvironmentUnitary{n, CompletionSpec::pointer_shift(),
                            UnitaryOperator(std::move(u))};
}

/// Calibration columns fixed, Haar-distributed unitary between the two
/// complements (dimension n(n+1)² − n).
inline EnvironmentUnitary build_env_haar_completion(std::size_t n,
                                                    std::uint64_t seed) {
  ModelDims md(n);
  const std::size_t d = md.dim_sae();
  std::vector<bool> is_cal_domain(d, false), is_cal_image(d, false);
  for (std::size_t i = 0; i < n; ++i) {
    is_cal_domain[sae_label(n, i, i + 1, 0)] = true;
    is_cal_image[sae_label(n, i, i + 1, i + 1)] = true;
  }
  std::vector<std::size_t> domain, image;
  for (std::size_t l = 0; l < d; ++l) {
    if (!is_cal_domain[l]) domain.push_back(l);
    if (!is_cal_image[l]) image.push_back(l);
  }
  const std::size_t m = domain.size();
  detail::SplitMix64 rng(seed);
  std::vector<cplx> q = detail::haar_unitary(m, rng);

  LinearOperator u(d);
  for (std::size_t i = 0; i < n; ++i)
    u.at(sae_label(n, i, i + 1, i + 1), sae_label(n, i, i + 1, 0)) = cplx{1, 0};
  for (std::size_t a = 0; a < m; ++a)
    for (std::size_t b = 0; b < m; ++b)
      u.at(image[a], domain[b]) = q[a * m + b];
  return EnvironmentUnitary{n, CompletionSpec::haar(seed),
                            UnitaryOperator(std::move(u))};
}

inline EnvironmentUnitary build_environment(std::size_t n,
                                            const CompletionSpec& spec) {
  switch (spec.kind) {
    case CompletionSpec::Kind::PointerShift: return build_env_pointer_shift(n);
    case CompletionSpec::Kind::HaarRandom:
      return build_env_haar_completion(n, spec.seed);
    default:
      throw ArgumentError("build_environment: unsupported completion kind");
  }
}

/// Max over i of ‖U(|o_i,a_{i+1},e_0⟩) − |o_i,a_{i+1},e_{i+1}⟩‖.
inline double verify_env_calibration(const EnvironmentUnitary& env) {
  const std::size_t n = env.n;
  double worst = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t col = sae_label(n, i, i + 1, 0);
    const std::size_t want = sae_label(n, i, i + 1, i + 1);
    double dev = 0;
    for (std::size_t r = 0; r < env.u.dim(); ++r) {
      cplx e = env.u.at(r, col);
      if (r == want) e -= cplx{1, 0};
      dev += std::norm(e);
    }
    worst = std::max(worst, std::sqrt(dev));
  }
  return worst;
}

/// U_E (ψ_SA ⊗ environment preparation).
inline StateVector decohere(const StateVector& psi_sa,
                            const EnvironmentUnitary& env,
                            const EnvironmentPreparation& prep) {
  const std::size_t n = env.n;
  if (outcomes_of_sa_state(psi_sa) != n || prep.n() != n)
    throw DimensionError("decohere: dimension mismatch");
  return apply(env.u, tensor_state(psi_sa, prep.state()));
}

inline std::size_t outcomes_of_sae_state(const StateVector& psi) {
  if (psi.dims().factors() != 3 ||
      psi.dims().dim(1) != psi.dims().dim(0) + 1 ||
      psi.dims().dim(2) != psi.dims().dim(0) + 1)
    throw DimensionError("expected S⊗A⊗E state with dims (n, n+1, n+1)");
  return psi.dims().dim(0);
}

/// Squared norm of the projection onto span{|o_i,a_{i+1},e_j⟩ : j >= 1,
/// j != i+1} — the record is truthful but the environment lies.
inline double env_liar_weight(const StateVector& psi) {
  const std::size_t n = outcomes_of_sae_state(psi);
  double w = 0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 1; j <= n; ++j)
      if (j != i + 1) w += std::norm(psi[sae_label(n, i, i + 1, j)]);
  return std::clamp(w, 0.0, 1.0);
}

/// Σ_{r≠c} |ρ_rc| in the fixed product basis.
inline double coherence_norm(const DensityOperator& rho) {
  double s = 0;
  for (std::size_t r = 0; r < rho.dim(); ++r)
    for (std::size_t c = 0; c < rho.dim(); ++c)
      if (r != c) s += std::abs(rho.at(r, c));
  return s;
}

struct CoherenceReport {
  double off_diag_l1;
  double env_liar_weight;
  double purity;
};

struct EnvStabilitySample {
  double eta;
  double env_liar_weight;
  double coherence_l1;
  double purity;
};

struct EnvStabilityCurve {
  std::vector<EnvStabilitySample> samples;
  double susceptibility;  // c in env_liar_weight ≈ c·η²
  double fit_residual;
};

/// Sweeps the environment perturbation √(1−η²)|E_in⟩ + η|E_m⟩, recording the
/// environment liar weight and the coherence of the reduced S⊗A state.
inline EnvStabilityCurve env_stability_sweep(const EnvironmentUnitary& env,
                                             const StateVector& psi_sa,
                                             std::size_t m,
                                             const std::vector<double>& etas) {
  if (m < 1 || m > env.n)
    throw ArgumentError("env_stability_sweep: m out of range");
  detail::check_grid(etas);
  EnvStabilityCurve curve;
  std::vector<double> xs, ys;
  for (double eta : etas) {
    StateVector psi =
        decohere(psi_sa, env, EnvironmentPreparation::perturbed(env.n, m, eta));
    DensityOperator rho = partial_trace(psi, {0, 1});
    EnvStabilitySample s{eta, env_liar_weight(psi), coherence_norm(rho),
                         rho.purity()};
    xs.push_back(eta * eta);
    ys.push_back(s.env_liar_weight);
    curve.samples.push_back(s);
  }
  auto [c, res] = detail::fit_through_origin(xs, ys);
  curve.susceptibility = c;
  curve.fit_residual = res;
  return curve;
}

}  // namespace liarlab
