#include <cmath>
#include <vector>

#include <boost/numeric/odeint.hpp>
#include <gtest/gtest.h>

#include "mhsolve/presets.hpp"
#include "mhsolve/stepper.hpp"
#include "oracles.hpp"

using namespace mhsolve;

namespace {

SpectralForm linear_oscillator(int n) {
  Grid g(-8.0, 8.0, n);
  RVector v(n);
  for (int j = 0; j < n; ++j) v[j] = g.x(j) * g.x(j);
  return make_spectral_model(g, v, 0.0);
}

double error_at(const Preset& p, double T, int N, const StepConfig& cfg, const CVector& ref) {
  EvolveOptions opt;
  opt.record_observables = false;
  return model_norm(p.model, CVector(evolve(p.model, p.u0, T, N, cfg, opt).final_state - ref));
}

}  // namespace

TEST(StepConfig, Validation) {
  StepConfig c;
  c.h = 0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c.h = 0.1;
  c.K = 0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c.K = 1;
  c.delta = -1.0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
}

TEST(Stepper, LinearProblemIsExactWithDenseExponential) {
  // lambda = 0 and no drive: Theta2 = -i h L0 and one pass is exact
  const HamiltonianModel m = linear_oscillator(64);
  const auto& f = std::get<SpectralForm>(m);
  CVector u0(64);
  for (int j = 0; j < 64; ++j) u0[j] = std::exp(-std::pow(f.grid.x(j) - 1, 2));
  StepConfig cfg;
  cfg.backend = ExpBackend::dense();
  cfg.K = 2;
  StepDiagnostics diag;
  const CVector u1 = mh_step(m, u0, 0.0, cfg, &diag);
  CMatrix l0 = -oracle::laplacian_matrix(64, 16.0);
  l0.diagonal() += f.v0.cast<cplx>();
  EXPECT_LT((u1 - oracle::unitary_propagator(l0, cfg.h) * u0).norm(), 1e-12);
  ASSERT_EQ(diag.update_norms.size(), 2u);
  EXPECT_LT(diag.update_norms[1], 1e-13);  // fixed point after one pass
}

TEST(Stepper, LinearMatrixModelMatchesPropagator) {
  const CMatrix l0 = make_random_hermitian(40, 3);
  const HamiltonianModel m = make_matrix_model(l0, CMatrix(), {}, 0.0);
  const CVector u0 = oracle::random_state(40, 1);
  StepConfig cfg;
  cfg.backend = ExpBackend::lanczos(1e-12, 64);
  const Trajectory tr = evolve(m, u0, 0.5, 10, cfg);
  EXPECT_LT((tr.final_state - oracle::unitary_propagator(l0, 0.5) * u0).norm(), 1e-10);
  EXPECT_EQ(tr.times.size(), 11u);
  EXPECT_EQ(tr.observables.size(), 11u);
  EXPECT_TRUE(tr.states.empty());
}

TEST(Stepper, IterationContracts) {
  const Preset p = make_preset("gp-defocusing-driven", {256});
  StepConfig cfg;
  cfg.K = 5;
  cfg.h = 0.005;
  StepDiagnostics diag;
  mh_step(p.model, p.u0, 0.0, cfg, &diag);
  ASSERT_EQ(diag.update_norms.size(), 5u);
  for (std::size_t k = 1; k < 4; ++k) EXPECT_LT(diag.update_norms[k], 0.2 * diag.update_norms[k - 1]);
}

TEST(Stepper, EarlyExitOnDelta) {
  const Preset p = make_preset("nls-defocusing", {128});
  StepConfig cfg;
  cfg.K = 10;
  cfg.h = 0.005;
  cfg.delta = 1e-6;
  StepDiagnostics diag;
  mh_step(p.model, p.u0, 0.0, cfg, &diag);
  EXPECT_LT(diag.update_norms.size(), 10u);
  EXPECT_LE(diag.update_norms.back(), 1e-6);
}

TEST(Stepper, RejectsSplittingOnMatrixModel) {
  const Preset p = make_preset("matrix-static", {16});
  StepConfig cfg;  // Chin-Chen default
  EXPECT_THROW(mh_step(p.model, p.u0, 0.0, cfg), std::invalid_argument);
  cfg.scheme = Scheme::BlanesMoan;
  EXPECT_THROW(step(p.model, p.u0, 0.0, cfg), std::invalid_argument);
  EXPECT_THROW(evolve(p.model, p.u0, 1.0, 0, cfg), std::invalid_argument);
}

TEST(Stepper, WaveFieldOverloadAndStates) {
  const Preset p = make_preset("nls-defocusing", {64});
  const auto& f = std::get<SpectralForm>(p.model);
  StepConfig cfg;
  cfg.h = 0.01;
  const WaveField w = mh_step(f, WaveField(f.grid, p.u0), 0.0, cfg);
  EXPECT_LT((w.values - mh_step(p.model, p.u0, 0.0, cfg)).norm(), 1e-15);
  EvolveOptions opt;
  opt.store_states = true;
  const Trajectory tr = evolve(p.model, p.u0, 0.05, 5, cfg, opt);
  EXPECT_EQ(tr.states.size(), 6u);
  EXPECT_EQ((tr.states.back() - tr.final_state).norm(), 0.0);
}

// Literal iteration count with the Strang start, on a small grid. The start
// already has order 2, and each pass adds one order up to four.
TEST(Stepper, LiteralIterationCountOrders) {
  const Preset p = make_preset("nls-defocusing", {128});
  const double T = 0.5;
  const CVector ref = reference_solution(p.model, p.u0, T, T / 160);
  const std::vector<int> Ns = {20, 40, 80, 160};
  for (int K : {1, 2}) {
    StepConfig cfg;
    cfg.K = K;
    std::vector<double> hs, es;
    for (int N : Ns) {
      hs.push_back(T / N);
      es.push_back(error_at(p, T, N, cfg, ref));
    }
    EXPECT_NEAR(oracle::slope(hs, es), K + 2.0, 0.35) << "K = " << K;
  }
}

TEST(Reference, SelfConsistentUnderStepHalving) {
  const Preset p = make_preset("gp-defocusing-driven", {256});
  const double T = 0.1;
  // h_ref = 1e-4, the step used for the h >= 0.001 convergence sweeps
  const CVector a = reference_solution(p.model, p.u0, T, 0.001);
  const CVector b = reference_solution(p.model, p.u0, T, 0.0005);
  EXPECT_LE(model_norm(p.model, CVector(a - b)), 1e-11);
}

TEST(Reference, AgreesWithIndependentAdaptiveIntegrator) {
  // Full nonlinear ODE system i u' = H(u, t) u integrated by a controlled
  // Runge-Kutta-Fehlberg 7(8) method on real and imaginary parts.
  const int n = 256;
  const Preset p = make_preset("gp-defocusing-driven", {n});
  const double T = 0.25;
  using State = std::vector<double>;
  auto rhs = [&](const State& y, State& dy, double t) {
    CVector u(n);
    for (int j = 0; j < n; ++j) u[j] = cplx(y[j], y[n + j]);
    const CVector du = cplx(0, -1) * apply_hamiltonian(p.model, u, t);
    for (int j = 0; j < n; ++j) {
      dy[j] = du[j].real();
      dy[n + j] = du[j].imag();
    }
  };
  State y(2 * n);
  for (int j = 0; j < n; ++j) {
    y[j] = p.u0[j].real();
    y[n + j] = p.u0[j].imag();
  }
  namespace ode = boost::numeric::odeint;
  ode::integrate_adaptive(ode::make_controlled(1e-13, 1e-13, ode::runge_kutta_fehlberg78<State>()),
                          rhs, y, 0.0, T, 1e-4);
  CVector rk(n);
  for (int j = 0; j < n; ++j) rk[j] = cplx(y[j], y[n + j]);
  const CVector ref = reference_solution(p.model, p.u0, T, 0.01);
  EXPECT_LE(model_norm(p.model, CVector(ref - rk)), 1e-8);
}
