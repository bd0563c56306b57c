#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "mhsolve/expo.hpp"
#include "mhsolve/magnus.hpp"
#include "mhsolve/presets.hpp"
#include "oracles.hpp"

using namespace mhsolve;

namespace {

// Magnus terms for one step of the model from u0, with the right endpoint
// taken from a Strang step so the data vary smoothly with h.
MagnusTerms snapshot_terms(const HamiltonianModel& m, const CVector& u0, double t, double h) {
  const auto& f = std::get<SpectralForm>(m);
  const CVector u1 = strang_step(f, u0, t, h);
  EndpointData e{nonlinear_potential(u0, f.lambda), nonlinear_potential(u1, f.lambda),
                 nonlinear_potential_rate(m, u0, t), nonlinear_potential_rate(m, u1, t + h), h};
  MagnusTerms ext = gauss_terms([&](double s) { return f.external->sample(f.grid, s); }, t, h);
  return combine_terms(hermite_terms(e), ext);
}

// -i S0 + (S0 S1 - S1 S0) / h assembled from dense blocks.
CMatrix theta_oracle(const CMatrix& l0, const RVector& mu00, const RVector& mu11, double h,
                     const CMatrix& l1 = CMatrix(), double c00 = 0, double c11 = 0) {
  CMatrix s0 = h * l0;
  s0.diagonal() += mu00.cast<cplx>();
  CMatrix s1 = mu11.cast<cplx>().asDiagonal();
  if (l1.size() > 0) {
    s0 += c00 * l1;
    s1 += c11 * l1;
  }
  return cplx(0, -1) * s0 + (s0 * s1 - s1 * s0) / h;
}

}  // namespace

TEST(Magnus, DenseLaplacianMatchesDftOracle) {
  Grid g(-10.0, 10.0, 24);
  EXPECT_LT((dense_laplacian(g) - oracle::laplacian_matrix(24, 20.0)).norm(), 1e-11);
}

TEST(Magnus, SpectralThetaMatchesDenseOracle) {
  const Preset p = make_preset("gp-defocusing-driven", {64});
  const auto& f = std::get<SpectralForm>(p.model);
  const double h = 0.01;
  const MagnusTerms terms = snapshot_terms(p.model, p.u0, 0.05, h);
  const Theta2Operator op = assemble_theta2(p.model, terms, h);
  CMatrix l0 = -oracle::laplacian_matrix(64, 20.0);
  l0.diagonal() += f.v0.cast<cplx>();
  const CMatrix ref = theta_oracle(l0, terms.mu00, terms.mu11, h);
  const CVector v = oracle::random_state(64, 3);
  EXPECT_LT((op.apply(v) - ref * v).norm(), 1e-12 * (ref * v).norm());
  EXPECT_LT((op.dense() - ref).norm(), 1e-12 * ref.norm());
  // commutators of Hermitian matrices are skew-Hermitian, so Theta2 is too
  EXPECT_LT((ref + ref.adjoint()).norm(), 1e-12 * ref.norm());
}

TEST(Magnus, MatrixThetaKeepsFullCommutator) {
  const int n = 20;
  const CMatrix l0 = make_random_hermitian(n, 1), l1 = make_random_hermitian(n, 2);
  const HamiltonianModel m = make_matrix_model(l0, l1, [](double t) { return std::cos(t); }, 1.0);
  const double h = 0.05;
  MagnusTerms terms{RVector::LinSpaced(n, 0.0, 0.1), RVector::LinSpaced(n, -1e-3, 2e-3)};
  ScalarMagnusTerms c{0.04, 3e-4};
  const Theta2Operator op(m, terms, h, c);
  const CMatrix ref = theta_oracle(l0, terms.mu00, terms.mu11, h, l1, c.mu00, c.mu11);
  const CVector v = oracle::random_state(n, 8);
  EXPECT_LT((op(v) - ref * v).norm(), 1e-13 * (ref * v).norm());
  EXPECT_LT((op.dense() - ref).norm(), 1e-13 * ref.norm());
}

TEST(Magnus, ValidatesSizes) {
  const Preset p = make_preset("nls-defocusing", {16});
  MagnusTerms bad{RVector::Zero(15), RVector::Zero(16)};
  EXPECT_THROW(Theta2Operator(p.model, bad, 0.1), std::invalid_argument);
  MagnusTerms ok{RVector::Zero(16), RVector::Zero(16)};
  EXPECT_THROW(Theta2Operator(p.model, ok, 0.0), std::invalid_argument);
  const Theta2Operator op(p.model, ok, 0.1);
  EXPECT_THROW(op.apply(CVector::Zero(3)), std::invalid_argument);
}

TEST(Magnus, EliminationRejectsMatrixForm) {
  const int n = 4;
  const HamiltonianModel m = make_matrix_model(make_random_hermitian(n, 1), CMatrix(), {}, 1.0);
  const Theta2Operator op(m, {RVector::Zero(n), RVector::Zero(n)}, 0.1);
  EXPECT_THROW(eliminate_commutator(op), std::invalid_argument);
}

TEST(Magnus, SandwichFactors) {
  const Preset p = make_preset("gp-defocusing", {32});
  const auto& f = std::get<SpectralForm>(p.model);
  MagnusTerms t{RVector::Constant(32, 0.2), RVector::Constant(32, 0.004)};
  const SandwichFactors sf = eliminate_commutator(Theta2Operator(p.model, t, 0.1));
  EXPECT_LT((sf.phase - RVector::Constant(32, 0.04)).norm(), 1e-15);
  EXPECT_LT((sf.core_potential - (f.v0 + RVector::Constant(32, 2.0))).norm(), 1e-12);
  // phases are unitary and cancel around an identity centre
  const CVector v = oracle::random_state(32, 2);
  EXPECT_LT((apply_sandwich(sf, v, [](const CVector& w) { return w; }) - v).norm(), 1e-15);
}

TEST(Magnus, CommutatorEliminationIsFifthOrder) {
  const Preset p = make_preset("gp-defocusing-driven", {32});
  const auto& f = std::get<SpectralForm>(p.model);
  const CMatrix lap = oracle::laplacian_matrix(32, 20.0);
  const CVector v = p.u0;
  std::vector<double> hs, errs;
  for (double h : {0.04, 0.02, 0.01, 0.005}) {
    const MagnusTerms terms = snapshot_terms(p.model, p.u0, 0.2, h);
    const Theta2Operator op(p.model, terms, h);
    const CVector exact = oracle::taylor_exp(op.dense()) * v;
    const SandwichFactors sf = eliminate_commutator(op);
    CMatrix core = -lap;
    core.diagonal() += sf.core_potential.cast<cplx>();
    const CMatrix central = oracle::unitary_propagator(core, h);
    const CVector approx = apply_sandwich(sf, v, [&](const CVector& w) { return CVector(central * w); });
    hs.push_back(h);
    errs.push_back(l2_norm(f.grid, exact - approx));
  }
  EXPECT_NEAR(oracle::slope(hs, errs), 5.0, 0.3);
}
