#pragma once

// Measurement unitaries on system ⊗ apparatus. The calibration constraint
// fixes U on the ready subspace only: U(|o_i⟩⊗|a_0⟩) = |o_i⟩⊗|a_i⟩. Off that
// subspace U is a completion, chosen per CompletionSpec.
//
// Label conventions (0-based): system labels i ∈ {0..n-1} stand in for
// outcomes o_1..o_n; apparatus label 0 is "ready" and label j ∈ {1..n} is a
// record of outcome o_j. Calibration pairs are (i, 0) ↦ (i, i+1).

#include <cstdint>
#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "liarlab/errors.hpp"
#include "liarlab/tensor.hpp"

namespace liarlab {

struct ModelDims {
  std::size_t n;

  explicit ModelDims(std::size_t outcomes) : n(outcomes) {
    if (n < 2) throw ModelError("ModelDims: n >= 2 required");
  }
  std::size_t dim_s() const { return n; }
  std::size_t dim_a() const { return n + 1; }
  std::size_t dim_e() const { return n + 1; }
  std::size_t dim_sa() const { return n * (n + 1); }
  std::size_t dim_sae() const { return n * (n + 1) * (n + 1); }
};

/// |ψ⟩ = Σ g_i |o_i⟩ with Σ|g_i|² = 1.
class SystemPreparation {
 public:
  explicit SystemPreparation(std::vector<cplx> g) : g_(std::move(g)) {
    if (g_.size() < 2) throw ModelError("SystemPreparation: n >= 2 required");
    double s = 0;
    for (const cplx& c : g_) s += std::norm(c);
    if (std::abs(std::sqrt(s) - 1.0) > kUnitaryTol)
      throw ValidationError("SystemPreparation: coefficients not normalized");
  }

  static SystemPreparation uniform(std::size_t n) {
    std::vector<cplx> g(n, cplx{1.0 / std::sqrt(double(n)), 0});
    return SystemPreparation(std::move(g));
  }
  static SystemPreparation basis(std::size_t n, std::size_t i) {
    std::vector<cplx> g(n, cplx{0, 0});
    g.at(i) = cplx{1, 0};
    return SystemPreparation(std::move(g));
  }

  std::size_t n() const { return g_.size(); }
  const std::vector<cplx>& g() const { return g_; }

  StateVector state() const {
    return StateVector(FactorDims{std::vector<std::size_t>{g_.size()}}, g_);
  }

 private:
  std::vector<cplx> g_;
};

/// α|ready⟩ + Σ_k β_k|o_k⟩_A with |α|² + Σ|β_k|² = 1.
class ApparatusPreparation {
 public:
  ApparatusPreparation(cplx alpha, std::vector<cplx> beta)
      : alpha_(alpha), beta_(std::move(beta)) {
    if (beta_.empty()) throw ModelError("ApparatusPreparation: empty beta");
    double s = std::norm(alpha_);
    for (const cplx& c : beta_) s += std::norm(c);
    if (std::abs(std::sqrt(s) - 1.0) > kUnitaryTol)
      throw ValidationError("ApparatusPreparation: coefficients not normalized");
  }

  static ApparatusPreparation ready(std::size_t n) {
    return ApparatusPreparation(cplx{1, 0}, std::vector<cplx>(n, cplx{0, 0}));
  }
  /// α = √(1−ε²), β_k = ε (single perturbed record label k ∈ {1..n}).
  static ApparatusPreparation perturbed(std::size_t n, std::size_t k,
                                        double epsilon) {
    if (k < 1 || k > n) throw ArgumentError("perturbed: k out of range");
    if (epsilon < 0.0 || epsilon >= 1.0)
      throw ArgumentError("perturbed: epsilon outside [0,1)");
    std::vector<cplx> beta(n, cplx{0, 0});
    beta[k - 1] = cplx{epsilon, 0};
    return ApparatusPreparation(cplx{std::sqrt(1.0 - epsilon * epsilon), 0},
                                std::move(beta));
  }

  std::size_t n() const { return beta_.size(); }
  cplx alpha() const { return alpha_; }
  const std::vector<cplx>& beta() const { return beta_; }

  StateVector state() const {
    std::vector<cplx> amps(beta_.size() + 1);
    amps[0] = alpha_;
    for (std::size_t k = 0; k < beta_.size(); ++k) amps[k + 1] = beta_[k];
    return StateVector(FactorDims{std::vector<std::size_t>{beta_.size() + 1}},
                       std::move(amps));
  }

 private:
  cplx alpha_;
  std::vector<cplx> beta_;
};

/// How a measurement unitary acts off the calibration subspace.
struct CompletionSpec {
  enum class Kind { PointerShift, Permutation, HaarRandom };

  Kind kind = Kind::PointerShift;
  std::vector<std::size_t> table;  // Permutation: flat S⊗A label -> label
  std::uint64_t seed = 0;          // HaarRandom

  static CompletionSpec pointer_shift() { return {}; }
  static CompletionSpec permutation(std::vector<std::size_t> table) {
    return {Kind::Permutation, std::move(table), 0};
  }
  static CompletionSpec haar(std::uint64_t seed) {
    return {Kind::HaarRandom, {}, seed};
  }

  std::string name() const {
    switch (kind) {
      case Kind::PointerShift: return "pointer_shift";
      case Kind::Permutation: return "permutation";
      case Kind::HaarRandom: return "haar";
    }
    return "?";
  }
};

/// Unitary on S⊗A satisfying the calibration constraint.
struct MeasurementUnitary {
  std::size_t n;
  CompletionSpec completion;
  UnitaryOperator u;

  FactorDims dims() const { return FactorDims{n, n + 1}; }
};

namespace detail {

// splitmix64: deterministic 64-bit stream independent of the standard
// library's distribution implementations.
struct SplitMix64 {
  std::uint64_t state;
  explicit SplitMix64(std::uint64_t seed) : state(seed) {}
  std::uint64_t next() {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }
  double uniform01() {
    // 53-bit mantissa in (0,1]
    return (double(next() >> 11) + 1.0) * 0x1.0p-53;
  }
  cplx gaussian() {
    const double u1 = uniform01();
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double t = 2.0 * M_PI * u2;
    return cplx{r * std::cos(t), r * std::sin(t)};
  }
};

// Haar-distributed m×m unitary: complex Ginibre matrix orthonormalized by
// modified Gram-Schmidt (QR with positive diagonal of R).
inline std::vector<cplx> haar_unitary(std::size_t m, SplitMix64& rng) {
  std::vector<std::vector<cplx>> cols(m, std::vector<cplx>(m));
  for (std::size_t c = 0; c < m; ++c)
    for (std::size_t r = 0; r < m; ++r) cols[c][r] = rng.gaussian();
  for (std::size_t c = 0; c < m; ++c) {
    for (std::size_t p = 0; p < c; ++p) {
      cplx proj{0, 0};
      for (std::size_t r = 0; r < m; ++r)
        proj += std::conj(cols[p][r]) * cols[c][r];
      for (std::size_t r = 0; r < m; ++r) cols[c][r] -= proj * cols[p][r];
    }
    // re-orthogonalize once; MGS alone drifts near 1e-10 at m ~ 300
    for (std::size_t p = 0; p < c; ++p) {
      cplx proj{0, 0};
      for (std::size_t r = 0; r < m; ++r)
        proj += std::conj(cols[p][r]) * cols[c][r];
      for (std::size_t r = 0; r < m; ++r) cols[c][r] -= proj * cols[p][r];
    }
    double nrm = 0;
    for (std::size_t r = 0; r < m; ++r) nrm += std::norm(cols[c][r]);
    nrm = std::sqrt(nrm);
    for (std::size_t r = 0; r < m; ++r) cols[c][r] /= nrm;
  }
  std::vector<cplx> out(m * m);
  for (std::size_t r = 0; r < m; ++r)
    for (std::size_t c = 0; c < m; ++c) out[r * m + c] = cols[c][r];
  return out;
}

}  // namespace detail

/// Flat S⊗A label of system i, apparatus k.
inline std::size_t sa_label(std::size_t n, std::size_t i, std::size_t k) {
  return i * (n + 1) + k;
}

/// Canonical completion: (i, k) ↦ (i, (k + i + 1) mod (n+1)).
inline MeasurementUnitary build_pointer_shift(std::size_t n) {
  ModelDims md(n);
  LinearOperator u(md.dim_sa());
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k <= n; ++k)
      u.at(sa_label(n, i, (k + i + 1) % (n + 1)), sa_label(n, i, k)) =
          cplx{1, 0};
  return MeasurementUnitary{n, CompletionSpec::pointer_shift(),
                            UnitaryOperator(std::move(u))};
}

/// Permutation completion from an explicit bijection on S⊗A labels. The table
/// must fix the calibration pairs (i, 0) ↦ (i, i+1).
inline MeasurementUnitary build_permutation(std::size_t n,
                                            std::vector<std::size_t> table) {
  ModelDims md(n);
  const std::size_t d = md.dim_sa();
  if (table.size() != d)
    throw CompletionError("build_permutation: table size != n(n+1)");
  std::vector<bool> hit(d, false);
  for (std::size_t t : table) {
    if (t >= d) throw CompletionError("build_permutation: target out of range");
    if (hit[t]) throw CompletionError("build_permutation: table not a bijection");
    hit[t] = true;
  }
  for (std::size_t i = 0; i < n; ++i)
    if (table[sa_label(n, i, 0)] != sa_label(n, i, i + 1))
      throw CalibrationError(
          "build_permutation: table violates calibration pair");
  LinearOperator u(d);
  for (std::size_t c = 0; c < d; ++c) u.at(table[c], c) = cplx{1, 0};
  return MeasurementUnitary{n, CompletionSpec::permutation(std::move(table)),
                            UnitaryOperator(std::move(u))};
}

/// Calibration on span{(i,0)}, Haar-distributed unitary from the complement of
/// the calibration domain onto the complement of the calibration image.
inline MeasurementUnitary build_haar_completion(std::size_t n,
                                                std::uint64_t seed) {
  ModelDims md(n);
  const std::size_t d = md.dim_sa();

  std::vector<std::size_t> domain;  // (i,k), k >= 1
  std::vector<std::size_t> image;   // everything except (i, i+1)
  std::vector<bool> is_cal_image(d, false);
  for (std::size_t i = 0; i < n; ++i) is_cal_image[sa_label(n, i, i + 1)] = true;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 1; k <= n; ++k) domain.push_back(sa_label(n, i, k));
  for (std::size_t l = 0; l < d; ++l)
    if (!is_cal_image[l]) image.push_back(l);

  const std::size_t m = domain.size();  // n^2 == image.size()
  detail::SplitMix64 rng(seed);
  std::vector<cplx> q = detail::haar_unitary(m, rng);

  LinearOperator u(d);
  for (std::size_t i = 0; i < n; ++i)
    u.at(sa_label(n, i, i + 1), sa_label(n, i, 0)) = cplx{1, 0};
  for (std::size_t a = 0; a < m; ++a)
    for (std::size_t b = 0; b < m; ++b)
      u.at(image[a], domain[b]) = q[a * m + b];
  return MeasurementUnitary{n, CompletionSpec::haar(seed),
                            UnitaryOperator(std::move(u))};
}

inline MeasurementUnitary build_measurement(std::size_t n,
                                            const CompletionSpec& spec) {
  switch (spec.kind) {
    case CompletionSpec::Kind::PointerShift: return build_pointer_shift(n);
    case CompletionSpec::Kind::Permutation: return build_permutation(n, spec.table);
    case CompletionSpec::Kind::HaarRandom: return build_haar_completion(n, spec.seed);
  }
  throw ArgumentError("build_measurement: bad completion kind");
}

/// Max over i of ‖U(|o_i,a_0⟩) − |o_i,a_{i+1}⟩‖.
inline double verify_calibration(const MeasurementUnitary& m) {
  const std::size_t n = m.n;
  double worst = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t col = sa_label(n, i, 0);
    const std::size_t want = sa_label(n, i, i + 1);
    double dev = 0;
    for (std::size_t r = 0; r < m.u.dim(); ++r) {
      cplx e = m.u.at(r, col);
      if (r == want) e -= cplx{1, 0};
      dev += std::norm(e);
    }
    worst = std::max(worst, std::sqrt(dev));
  }
  return worst;
}

/// U_M (ψ ⊗ apparatus preparation); the premeasurement step.
inline StateVector premeasure(const MeasurementUnitary& m,
                              const SystemPreparation& sys,
                              const ApparatusPreparation& app) {
  if (sys.n() != m.n || app.n() != m.n)
    throw DimensionError("premeasure: preparation size != n");
  return apply(m.u, tensor_state(sys.state(), app.state()));
}

/// Per off-calibration input weights on the coupling / liar / ready spans.
struct CaseInputWeights {
  std::size_t system_label;     // i, 0-based
  std::size_t apparatus_label;  // k >= 1
  double coupling_weight;
  double liar_weight;
  double ready_weight;
};

struct CaseReport {
  enum class Classification { LiarGenerating, CouplingPreserving };

  std::vector<CaseInputWeights> inputs;
  double total_coupling = 0;
  double total_liar = 0;
  double total_ready = 0;
  Classification classification = Classification::CouplingPreserving;

  static constexpr double kLiarThreshold = 1e-10;
};

/// Decomposes every off-calibration column of U into coupling / liar / ready
/// weights and classifies the completion.
inline CaseReport classify_completion(const MeasurementUnitary& m) {
  if (verify_calibration(m) > kUnitaryTol)
    throw CalibrationError("classify_completion: calibration violated");
  const std::size_t n = m.n;
  CaseReport report;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 1; k <= n; ++k) {
      const std::size_t col = sa_label(n, i, k);
      CaseInputWeights w{i, k, 0, 0, 0};
      for (std::size_t j = 0; j < n; ++j)
        for (std::size_t l = 0; l <= n; ++l) {
          const double p = std::norm(m.u.at(sa_label(n, j, l), col));
          if (l == 0)
            w.ready_weight += p;
          else if (l == j + 1)
            w.coupling_weight += p;
          else
            w.liar_weight += p;
        }
      report.total_coupling += w.coupling_weight;
      report.total_liar += w.liar_weight;
      report.total_ready += w.ready_weight;
      report.inputs.push_back(w);
    }
  report.classification = report.total_liar <= CaseReport::kLiarThreshold
                              ? CaseReport::Classification::CouplingPreserving
                              : CaseReport::Classification::LiarGenerating;
  return report;
}

}  // namespace liarlab
