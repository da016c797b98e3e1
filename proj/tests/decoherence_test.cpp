#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "liarlab/decoherence.hpp"
#include "oracle.hpp"

using namespace liarlab;

namespace {

std::vector<double> linspace(double a, double b, std::size_t count) {
  std::vector<double> g(count);
  for (std::size_t i = 0; i < count; ++i)
    g[i] = a + (b - a) * double(i) / double(count - 1);
  return g;
}

StateVector perfect_coupling(const SystemPreparation& sys) {
  const std::size_t n = sys.n();
  std::vector<cplx> amps(n * (n + 1), cplx{0, 0});
  for (std::size_t i = 0; i < n; ++i) amps[sa_label(n, i, i + 1)] = sys.g()[i];
  return StateVector(FactorDims{n, n + 1}, std::move(amps));
}

}  // namespace

TEST_CASE("environment pointer shift: calibration and j=0 branch") {
  EnvironmentUnitary env = build_env_pointer_shift(2);
  // |o1, a1, E_in⟩ -> |o1, a1, E1⟩
  CHECK(env.u.at(sae_label(2, 0, 1, 1), sae_label(2, 0, 1, 0)) == cplx{1, 0});
  // ready apparatus leaves the environment untouched
  CHECK(env.u.at(sae_label(2, 1, 0, 0), sae_label(2, 1, 0, 0)) == cplx{1, 0});
  CHECK(verify_env_calibration(env) == 0.0);
  CHECK(unitarity_defect(env.u.op()) == 0.0);

  const std::size_t n = 3;
  auto expected = oracle::env_pointer_shift_matrix(n);
  EnvironmentUnitary e3 = build_env_pointer_shift(n);
  for (std::size_t r = 0; r < e3.u.dim(); ++r)
    for (std::size_t c = 0; c < e3.u.dim(); ++c)
      CHECK(e3.u.at(r, c) == expected[r * e3.u.dim() + c]);
}

TEST_CASE("environment Haar completion satisfies calibration") {
  for (std::size_t n : {2, 3}) {
    EnvironmentUnitary env = build_env_haar_completion(n, 11 + n);
    CHECK(verify_env_calibration(env) <= 1e-12);
    CHECK(unitarity_defect(env.u.op()) <= 1e-10);
  }
}

TEST_CASE("decohere: perfect coupling input reproduces the decohered state") {
  std::mt19937 rng(47);
  for (std::size_t n : {2, 3}) {
    SystemPreparation sys(oracle::random_unit_vector(n, rng));
    StateVector psi = decohere(perfect_coupling(sys),
                               build_env_pointer_shift(n),
                               EnvironmentPreparation::initial(n));
    // Σ g_i |o_i, a_i, E_i⟩
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j <= n; ++j)
        for (std::size_t m = 0; m <= n; ++m) {
          const cplx want =
              (j == i + 1 && m == i + 1) ? sys.g()[i] : cplx{0, 0};
          CHECK(std::abs(psi[sae_label(n, i, j, m)] - want) <= 1e-15);
        }
    CHECK(std::abs(psi.norm() - 1.0) <= 1e-12);
  }
}

TEST_CASE("decohere: ready component leaves the environment in E_in") {
  const std::size_t n = 2;
  // ψ_SA with a ready component on o2
  std::vector<cplx> amps(n * (n + 1), cplx{0, 0});
  const double r = 1.0 / std::sqrt(2.0);
  amps[sa_label(n, 0, 1)] = cplx{r, 0};
  amps[sa_label(n, 1, 0)] = cplx{r, 0};
  StateVector psi = decohere(StateVector(FactorDims{n, n + 1}, amps),
                             build_env_pointer_shift(n),
                             EnvironmentPreparation::initial(n));
  CHECK(std::abs(psi[sae_label(n, 1, 0, 0)] - cplx{r, 0}) <= 1e-15);
  CHECK(std::abs(psi[sae_label(n, 0, 1, 1)] - cplx{r, 0}) <= 1e-15);
}

TEST_CASE("env_liar_weight on canonical states") {
  const std::size_t n = 2;
  SystemPreparation sys = SystemPreparation::uniform(n);
  EnvironmentUnitary env = build_env_pointer_shift(n);

  StateVector clean = decohere(perfect_coupling(sys), env,
                               EnvironmentPreparation::initial(n));
  CHECK(env_liar_weight(clean) == 0.0);

  StateVector liar =
      StateVector::basis(FactorDims{n, n + 1, n + 1}, {0, 1, 2});
  CHECK(env_liar_weight(liar) == 1.0);

  const double eta = 0.4;
  StateVector perturbed = decohere(perfect_coupling(sys), env,
                                   EnvironmentPreparation::perturbed(n, 1, eta));
  CHECK(env_liar_weight(perturbed) ==
        Catch::Approx(eta * eta / 2).margin(1e-14));
}

TEST_CASE("coherence_norm") {
  const std::size_t n = 2;
  LinearOperator diag(n * (n + 1));
  for (std::size_t i = 0; i < diag.dim(); ++i)
    diag.at(i, i) = cplx{1.0 / double(diag.dim()), 0};
  CHECK(coherence_norm(DensityOperator(std::move(diag))) == 0.0);

  SystemPreparation sys = SystemPreparation::uniform(n);
  DensityOperator pure = partial_trace(perfect_coupling(sys), {0, 1});
  CHECK(coherence_norm(pure) == Catch::Approx(1.0).margin(1e-12));

  StateVector decohered = decohere(perfect_coupling(sys),
                                   build_env_pointer_shift(n),
                                   EnvironmentPreparation::initial(n));
  DensityOperator reduced = partial_trace(decohered, {0, 1});
  CHECK(coherence_norm(reduced) <= 1e-12);
}

TEST_CASE("reduced state after decoherence is diagonal with Born weights") {
  std::mt19937 rng(53);
  for (std::size_t n : {2, 3}) {
    SystemPreparation sys(oracle::random_unit_vector(n, rng));
    StateVector psi = decohere(perfect_coupling(sys),
                               build_env_pointer_shift(n),
                               EnvironmentPreparation::initial(n));
    DensityOperator rho = partial_trace(psi, {0, 1});
    CHECK(coherence_norm(rho) <= 1e-12);
    double purity_expected = 0;
    for (std::size_t i = 0; i < n; ++i) {
      CHECK(std::abs(rho.at(sa_label(n, i, i + 1), sa_label(n, i, i + 1)) -
                     cplx{std::norm(sys.g()[i]), 0}) <= 1e-10);
      purity_expected += std::norm(sys.g()[i]) * std::norm(sys.g()[i]);
    }
    CHECK(rho.purity() == Catch::Approx(purity_expected).margin(1e-10));

    // cross-check against the leading-block reduction oracle
    auto rho_oracle = oracle::reduce_leading(psi.amplitudes(), n * (n + 1),
                                             n + 1);
    for (std::size_t r = 0; r < rho.dim(); ++r)
      for (std::size_t c = 0; c < rho.dim(); ++c)
        CHECK(std::abs(rho.at(r, c) - rho_oracle[r * rho.dim() + c]) <= 1e-13);
  }
}

TEST_CASE("env_stability_sweep: quadratic mirror law") {
  for (std::size_t n : {2, 3}) {
    EnvironmentUnitary env = build_env_pointer_shift(n);
    SystemPreparation sys = SystemPreparation::uniform(n);
    StateVector psi_sa = perfect_coupling(sys);
    for (std::size_t m = 1; m <= n; ++m) {
      EnvStabilityCurve curve =
          env_stability_sweep(env, psi_sa, m, linspace(0.0, 0.5, 11));
      CHECK(curve.samples.front().env_liar_weight <= 1e-12);
      CHECK(curve.samples.front().coherence_l1 <= 1e-12);
      double c = 0;
      for (std::size_t i = 1; i <= n; ++i)
        if ((m + i) % (n + 1) != 0) c += 1.0 / double(n);
      for (const EnvStabilitySample& s : curve.samples)
        CHECK(s.env_liar_weight ==
              Catch::Approx(c * s.eta * s.eta).margin(1e-12));
      CHECK(curve.susceptibility == Catch::Approx(c).margin(1e-8));
    }
  }
  CHECK_THROWS_AS(
      env_stability_sweep(build_env_pointer_shift(2),
                          perfect_coupling(SystemPreparation::uniform(2)), 3,
                          linspace(0.0, 0.5, 3)),
      ArgumentError);
}
