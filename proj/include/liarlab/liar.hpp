#pragma once

// Liar projectors, record distributions, Born deviations, and perturbation
// sweeps with fitted quadratic susceptibility. A liar component of an S⊗A
// state is one on |o_i⟩⊗|o_j⟩_A with a record label j >= 1 differing from the
// system label; post-measurement amplitude on the "ready" label is tracked
// separately as a residual, not a lie.

#include <cstddef>
#include <utility>
#include <vector>

#include "liarlab/errors.hpp"
#include "liarlab/measurement.hpp"
#include "liarlab/tensor.hpp"

namespace liarlab {

/// Projector on S⊗A onto span{|o_i⟩⊗|o_j⟩_A : j >= 1, j != i}; rank n(n−1).
inline Projector liar_projector(std::size_t n) {
  ModelDims md(n);
  std::vector<std::size_t> span;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 1; k <= n; ++k)
      if (k != i + 1) span.push_back(sa_label(n, i, k));
  return Projector::onto_basis_span(md.dim_sa(), span);
}

inline std::size_t outcomes_of_sa_state(const StateVector& psi) {
  if (psi.dims().factors() != 2 ||
      psi.dims().dim(1) != psi.dims().dim(0) + 1)
    throw DimensionError("expected S⊗A state with dims (n, n+1)");
  return psi.dims().dim(0);
}

/// Squared norm of the liar-span component, clamped to [0,1].
inline double liar_weight(const StateVector& psi) {
  const std::size_t n = outcomes_of_sa_state(psi);
  double w = 0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 1; k <= n; ++k)
      if (k != i + 1) w += std::norm(psi[sa_label(n, i, k)]);
  return std::clamp(w, 0.0, 1.0);
}

/// Born weights of the apparatus record labels.
struct RecordDistribution {
  std::vector<double> per_record;  // record label j = 1..n
  double ready_residual;           // label 0
};

inline RecordDistribution record_distribution(const StateVector& psi) {
  const std::size_t n = outcomes_of_sa_state(psi);
  RecordDistribution d{std::vector<double>(n, 0.0), 0.0};
  for (std::size_t i = 0; i < n; ++i) {
    d.ready_residual += std::norm(psi[sa_label(n, i, 0)]);
    for (std::size_t k = 1; k <= n; ++k)
      d.per_record[k - 1] += std::norm(psi[sa_label(n, i, k)]);
  }
  return d;
}

/// Total-variation distance of the record distribution from {|g_i|²}, treating
/// "still ready" as an observable (n+1)-th outcome with target probability 0.
inline double born_deviation(const RecordDistribution& d,
                             const SystemPreparation& sys) {
  if (d.per_record.size() != sys.n())
    throw DimensionError("born_deviation: size mismatch");
  double tv = d.ready_residual;
  for (std::size_t j = 0; j < sys.n(); ++j)
    tv += std::abs(d.per_record[j] - std::norm(sys.g()[j]));
  return 0.5 * tv;
}

struct StabilitySample {
  double epsilon;
  double liar_weight;
  double ready_residual;
  double born_tv;
};

struct StabilityCurve {
  std::vector<StabilitySample> samples;
  double susceptibility;  // c in liar_weight ≈ c·ε²
  double fit_residual;    // L2 norm of (liar_weight − c·ε²) over the grid
};

namespace detail {

/// Least squares through the origin of y against x; returns (c, ‖y − cx‖₂).
inline std::pair<double, double> fit_through_origin(
    const std::vector<double>& x, const std::vector<double>& y) {
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  const double c = sxx > 0 ? sxy / sxx : 0.0;
  double r2 = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double e = y[i] - c * x[i];
    r2 += e * e;
  }
  return {c, std::sqrt(r2)};
}

inline void check_grid(const std::vector<double>& grid) {
  if (grid.empty()) throw ArgumentError("sweep: empty grid");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (grid[i] < 0.0 || grid[i] >= 1.0)
      throw ArgumentError("sweep: grid value outside [0,1)");
    if (i > 0 && grid[i] <= grid[i - 1])
      throw ArgumentError("sweep: grid not strictly increasing");
  }
}

}  // namespace detail

/// Sweeps the one-parameter apparatus perturbation α=√(1−ε²), β_k=ε and fits
/// liar_weight against ε² by least squares through the origin.
inline StabilityCurve stability_sweep(const MeasurementUnitary& m,
                                      const SystemPreparation& sys,
                                      std::size_t k,
                                      const std::vector<double>& epsilons) {
  if (k < 1 || k > m.n) throw ArgumentError("stability_sweep: k out of range");
  detail::check_grid(epsilons);
  StabilityCurve curve;
  std::vector<double> xs, ys;
  for (double eps : epsilons) {
    StateVector psi =
        premeasure(m, sys, ApparatusPreparation::perturbed(m.n, k, eps));
    RecordDistribution d = record_distribution(psi);
    StabilitySample s{eps, liar_weight(psi), d.ready_residual,
                      born_deviation(d, sys)};
    xs.push_back(eps * eps);
    ys.push_back(s.liar_weight);
    curve.samples.push_back(s);
  }
  auto [c, res] = detail::fit_through_origin(xs, ys);
  curve.susceptibility = c;
  curve.fit_residual = res;
  return curve;
}

/// Σ over off-calibration basis inputs of the liar weight of their images;
/// equals n(n−1) for every exact-calibration completion.
inline double liar_budget(const MeasurementUnitary& m) {
  if (verify_calibration(m) > kUnitaryTol)
    throw CalibrationError("liar_budget: calibration violated");
  const std::size_t n = m.n;
  double total = 0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 1; k <= n; ++k) {
      const std::size_t col = sa_label(n, i, k);
      for (std::size_t j = 0; j < n; ++j)
        for (std::size_t l = 1; l <= n; ++l)
          if (l != j + 1) total += std::norm(m.u.at(sa_label(n, j, l), col));
    }
  return total;
}

}  // namespace liarlab
