#pragma once

// Two sequential measurements with independent apparatus registers on the
// space S⊗A₁⊗A₂. No collapse between the stages; statistics are Born weights
// of the final joint state aggregated into agreement / disagreement /
// ready-involved classes.

#include <cstddef>
#include <utility>

#include "liarlab/errors.hpp"
#include "liarlab/liar.hpp"
#include "liarlab/measurement.hpp"
#include "liarlab/tensor.hpp"

namespace liarlab {

struct RepeatOutcome {
  double agreement;       // both registers show the same record j >= 1
  double disagreement;    // both show records, differing
  double ready_involved;  // either register shows label 0
};

/// Lifts a unitary on S⊗A to S⊗A₁⊗A₂, acting on the register at factor
/// position `target` (1 or 2) with the other register as spectator.
inline LinearOperator lift_to_registers(const MeasurementUnitary& m,
                                        std::size_t target) {
  if (target != 1 && target != 2)
    throw ArgumentError("lift_to_registers: target must be 1 or 2");
  const std::size_t n = m.n;
  const std::size_t da = n + 1;
  const std::size_t d = n * da * da;
  LinearOperator out(d);
  auto idx = [&](std::size_t i, std::size_t j1, std::size_t j2) {
    return (i * da + j1) * da + j2;
  };
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t spec = 0; spec < da; ++spec)
      for (std::size_t k = 0; k < da; ++k) {
        const std::size_t col =
            target == 1 ? idx(i, k, spec) : idx(i, spec, k);
        for (std::size_t ip = 0; ip < n; ++ip)
          for (std::size_t kp = 0; kp < da; ++kp) {
            const cplx v = m.u.at(sa_label(n, ip, kp), sa_label(n, i, k));
            if (v == cplx{0, 0}) continue;
            const std::size_t row =
                target == 1 ? idx(ip, kp, spec) : idx(ip, spec, kp);
            out.at(row, col) = v;
          }
      }
  return out;
}

/// Aggregates Born weights of an S⊗A₁⊗A₂ state into the three joint classes.
inline RepeatOutcome classify_joint_records(const StateVector& psi) {
  if (psi.dims().factors() != 3 ||
      psi.dims().dim(1) != psi.dims().dim(0) + 1 ||
      psi.dims().dim(2) != psi.dims().dim(0) + 1)
    throw DimensionError("expected S⊗A₁⊗A₂ state with dims (n, n+1, n+1)");
  const std::size_t n = psi.dims().dim(0);
  const std::size_t da = n + 1;
  RepeatOutcome out{0, 0, 0};
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j1 = 0; j1 < da; ++j1)
      for (std::size_t j2 = 0; j2 < da; ++j2) {
        const double p = std::norm(psi[(i * da + j1) * da + j2]);
        if (j1 == 0 || j2 == 0)
          out.ready_involved += p;
        else if (j1 == j2)
          out.agreement += p;
        else
          out.disagreement += p;
      }
  return out;
}

/// First measurement on S⊗A₁ (A₂ spectator), then a second measurement on
/// S⊗A₂ with A₂ prepared perfectly ready.
inline RepeatOutcome run_repeat(std::size_t n, const CompletionSpec& c1,
                                const CompletionSpec& c2,
                                const SystemPreparation& sys,
                                const ApparatusPreparation& app1) {
  if (sys.n() != n || app1.n() != n)
    throw DimensionError("run_repeat: preparation size != n");
  MeasurementUnitary m1 = build_measurement(n, c1);
  MeasurementUnitary m2 = build_measurement(n, c2);
  StateVector psi = tensor_state(
      tensor_state(sys.state(), app1.state()),
      ApparatusPreparation::ready(n).state());
  psi = apply(lift_to_registers(m1, 1), psi);
  psi = apply(lift_to_registers(m2, 2), psi);
  return classify_joint_records(psi);
}

/// Runs a second ideal pointer-shift measurement on a preset S⊗A₁
/// configuration (the hypothetical "first measurement already lied" state).
inline RepeatOutcome measure_preset(const StateVector& psi_sa1) {
  const std::size_t n = outcomes_of_sa_state(psi_sa1);
  StateVector psi =
      tensor_state(psi_sa1, ApparatusPreparation::ready(n).state());
  MeasurementUnitary m2 = build_pointer_shift(n);
  psi = apply(lift_to_registers(m2, 2), psi);
  return classify_joint_records(psi);
}

/// Disagreement probability of the repeat protocol next to the liar weight of
/// the first-stage S⊗A₁ state; for pointer-shift completions the ideal second
/// measurement converts liar weight into record disagreement one-to-one.
inline std::pair<double, double> detection_equivalence(
    std::size_t n, const SystemPreparation& sys,
    const ApparatusPreparation& app1) {
  RepeatOutcome out = run_repeat(n, CompletionSpec::pointer_shift(),
                                 CompletionSpec::pointer_shift(), sys, app1);
  MeasurementUnitary m1 = build_pointer_shift(n);
  const double lw = liar_weight(premeasure(m1, sys, app1));
  return {out.disagreement, lw};
}

}  // namespace liarlab
