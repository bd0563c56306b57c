#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "mhsolve/expo.hpp"
#include "mhsolve/hamiltonian.hpp"
#include "mhsolve/magnus.hpp"
#include "mhsolve/observables.hpp"
#include "mhsolve/quadrature.hpp"

namespace mhsolve {

/// Magnus-Hermite iteration, or one of the two splittings applied directly
/// to the nonlinear equation.
enum class Scheme { MagnusHermite, Strang, BlanesMoan };

struct StepConfig {
  double h = 0.01;
  int K = 3;
  std::optional<double> delta;
  ExpBackend backend = ExpBackend::chin_chen();
  bool strang_first = true;
  Scheme scheme = Scheme::MagnusHermite;

  void validate() const {
    if (!(h > 0) || !std::isfinite(h)) throw std::invalid_argument("StepConfig: h must be > 0");
    if (K < 1) throw std::invalid_argument("StepConfig: K must be >= 1");
    if (delta && !(*delta > 0)) throw std::invalid_argument("StepConfig: delta must be > 0");
  }
};

struct StepDiagnostics {
  std::vector<double> update_norms;  // |u^{[k+1]} - u^{[k]}| at t_{n+1}
};

class StepError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline CVector exponentiate(const Theta2Operator& op, const CVector& v, const ExpBackend& be) {
  using Kind = ExpBackend::Kind;
  switch (be.kind) {
    case Kind::DenseExact:
      return exp_dense(op.dense(), v);
    case Kind::Lanczos:
      return exp_lanczos(op, v, be.tol, be.m_max);
    case Kind::Strang:
    case Kind::BlanesMoan:
    case Kind::ChinChen: {
      const auto& f = std::get<SpectralForm>(op.model());
      const SandwichFactors sf = eliminate_commutator(op);
      const double h = op.h();
      if (be.kind == Kind::Strang)
        return apply_sandwich(sf, v, [&](const CVector& w) {
          return strang_step(f.grid, w, sf.core_potential, h);
        });
      if (be.kind == Kind::BlanesMoan)
        return apply_sandwich(sf, v, [&](const CVector& w) {
          return blanes_moan_step(f.grid, w, sf.core_potential, h);
        });
      const RVector grad = core_potential_gradient(f, op.terms(), h);
      return apply_sandwich(sf, v, [&](const CVector& w) {
        return chin_chen_step(f.grid, w, h, sf.core_potential, grad);
      });
    }
  }
  throw std::logic_error("unknown exponential backend");
}

// Strang step of the matrix model: linear half steps with c(t) frozen at the
// midpoint, exact nonlinear phase in between.
inline CVector matrix_strang_step(const MatrixForm& f, const CVector& u, double t, double h,
                                  const ExpBackend& be) {
  const double c = f.coefficient(t + 0.5 * h);
  auto half = [&](const CVector& v) {
    auto apply = [&](const CVector& x) -> CVector {
      CVector y = f.l0 * x;
      if (c != 0.0) y.noalias() += c * (f.l1 * x);
      return cplx(0, -0.5 * h) * y;
    };
    if (be.kind == ExpBackend::Kind::DenseExact) {
      CMatrix a = cplx(0, -0.5 * h) * (f.l0 + c * f.l1);
      return exp_dense(a, v);
    }
    return exp_lanczos(apply, v, std::min(be.tol, 1e-10), std::max(be.m_max, 64));
  };
  CVector v = half(u);
  v.array() *= (cplx(0, -h) * nonlinear_potential(v, f.lambda).array()).exp();
  return half(v);
}

inline bool uses_splitting(const ExpBackend& be) {
  return be.kind == ExpBackend::Kind::Strang || be.kind == ExpBackend::Kind::BlanesMoan ||
         be.kind == ExpBackend::Kind::ChinChen;
}

}  // namespace detail

/// Starting guess for u_{n+1}: one Strang step of the nonlinear problem.
inline CVector strang_guess(const HamiltonianModel& m, const CVector& u, double t, double h,
                            const ExpBackend& be) {
  if (const auto* s = std::get_if<SpectralForm>(&m)) return strang_step(*s, u, t, h);
  return detail::matrix_strang_step(std::get<MatrixForm>(m), u, t, h, be);
}

/// One step of the iterated-linearisation Magnus-Hermite scheme.
///
/// The nonlinear potential P = lambda |u|^2 and its rate are taken from u_n at
/// t_n once, and from the latest iterate at t_{n+1} on every pass; the
/// external field goes through two-point Gauss quadrature. Each pass
/// exponentiates the resulting Theta2 onto u_n.
inline CVector mh_step(const HamiltonianModel& model, const CVector& u_n, double t_n,
                       const StepConfig& cfg, StepDiagnostics* diag = nullptr) {
  cfg.validate();
  check_state(model, u_n);
  if (!u_n.allFinite()) throw StepError("mh_step: non-finite state at t = " + std::to_string(t_n));
  if (detail::uses_splitting(cfg.backend) && !is_spectral(model))
    throw std::invalid_argument("mh_step: splitting backends need a grid model");

  const double h = cfg.h;
  const double t_1 = t_n + h;
  const double lambda = model_lambda(model);
  const Eigen::Index n = u_n.size();

  const RVector p0 = nonlinear_potential(u_n, lambda);
  const RVector d0 = nonlinear_potential_rate(model, u_n, t_n);

  MagnusTerms ext{RVector::Zero(n), RVector::Zero(n)};
  ScalarMagnusTerms l1_terms;
  if (const auto* s = std::get_if<SpectralForm>(&model)) {
    if (s->external)
      ext = gauss_terms([&](double t) { return s->external->sample(s->grid, t); }, t_n, h);
  } else if (const auto& f = std::get<MatrixForm>(model); f.coeff) {
    l1_terms.mu00 = gauss_mu(f.coeff, t_n, h, MuKind::mu00);
    l1_terms.mu11 = gauss_mu(f.coeff, t_n, h, MuKind::mu11);
  }

  CVector u_1 = cfg.strang_first ? strang_guess(model, u_n, t_n, h, cfg.backend) : u_n;
  if (diag) diag->update_norms.clear();

  for (int k = 0; k < cfg.K; ++k) {
    EndpointData e{p0, nonlinear_potential(u_1, lambda), d0,
                   nonlinear_potential_rate(model, u_1, t_1), h};
    const MagnusTerms terms = combine_terms(hermite_terms(e), ext);
    const Theta2Operator theta = assemble_theta2(model, terms, h, l1_terms);
    CVector next;
    try {
      next = detail::exponentiate(theta, u_n, cfg.backend);
    } catch (const std::exception& ex) {
      throw StepError("mh_step at t = " + std::to_string(t_n) + ", iteration " +
                      std::to_string(k) + ": " + ex.what());
    }
    const double update = model_norm(model, CVector(next - u_1));
    if (diag) diag->update_norms.push_back(update);
    u_1 = std::move(next);
    if (cfg.delta && update <= *cfg.delta) break;
  }
  return u_1;
}

inline WaveField mh_step(const SpectralForm& f, const WaveField& u_n, double t_n,
                         const StepConfig& cfg, StepDiagnostics* diag = nullptr) {
  HamiltonianModel m = f;
  return WaveField(u_n.grid, mh_step(m, u_n.values, t_n, cfg, diag));
}

/// One step of whichever scheme the configuration selects.
inline CVector step(const HamiltonianModel& model, const CVector& u, double t,
                    const StepConfig& cfg, StepDiagnostics* diag = nullptr) {
  switch (cfg.scheme) {
    case Scheme::MagnusHermite:
      return mh_step(model, u, t, cfg, diag);
    case Scheme::Strang:
      return strang_guess(model, u, t, cfg.h, cfg.backend);
    case Scheme::BlanesMoan: {
      const auto* s = std::get_if<SpectralForm>(&model);
      if (s == nullptr) throw std::invalid_argument("Blanes-Moan baseline needs a grid model");
      return blanes_moan_step(*s, u, t, cfg.h);
    }
  }
  throw std::logic_error("unknown scheme");
}

struct Trajectory {
  std::vector<double> times;
  std::vector<CVector> states;  // filled only when requested
  std::vector<ObservableRecord> observables;
  CVector final_state;
};

struct EvolveOptions {
  bool store_states = false;
  bool record_observables = true;
  double t0 = 0;
};

/// N uniform steps of size T/N from t0.
inline Trajectory evolve(const HamiltonianModel& model, const CVector& u0, double T, int N,
                         StepConfig cfg, EvolveOptions opt = {}) {
  if (N < 1) throw std::invalid_argument("evolve: N must be >= 1");
  if (!(T > 0)) throw std::invalid_argument("evolve: T must be > 0");
  cfg.h = T / N;
  Trajectory tr;
  tr.times.reserve(static_cast<std::size_t>(N) + 1);
  CVector u = u0;
  auto record = [&](double t) {
    tr.times.push_back(t);
    if (opt.store_states) tr.states.push_back(u);
    if (opt.record_observables) tr.observables.push_back(observe(model, u, t));
  };
  record(opt.t0);
  for (int i = 0; i < N; ++i) {
    const double t = opt.t0 + i * cfg.h;
    u = step(model, u, t, cfg);
    if (!u.allFinite()) throw StepError("evolve: state became non-finite at step " + std::to_string(i));
    record(opt.t0 + (i + 1) * cfg.h);
  }
  tr.final_state = std::move(u);
  return tr;
}

// The Lanczos tolerance is per step; over ~1e4 steps a 1e-12 tolerance
// accumulates to ~4e-10 globally, which would mask fourth-order errors near
// 1e-11. 1e-14 keeps the reference at the roundoff floor (~2e-11).
struct ReferenceQuality {
  int K = 5;
  double lanczos_tol = 1e-14;
  int m_max = 128;
};

inline StepConfig reference_config(ReferenceQuality q = {}) {
  StepConfig cfg;
  cfg.K = q.K;
  cfg.backend = ExpBackend::lanczos(q.lanczos_tol, q.m_max);
  cfg.strang_first = true;
  cfg.scheme = Scheme::MagnusHermite;
  return cfg;
}

/// Tight solution at T used as "exact" in error measurements: the
/// Magnus-Hermite scheme with K = 5 and a Lanczos exponential at tolerance
/// 1e-14, with a step no larger than h_min / 10.
inline CVector reference_solution(const HamiltonianModel& model, const CVector& u0, double T,
                                  double h_min, ReferenceQuality q = {}) {
  const int n_steps = static_cast<int>(std::ceil(T / (h_min / 10.0) - 1e-9));
  EvolveOptions opt;
  opt.record_observables = false;
  return evolve(model, u0, T, n_steps, reference_config(q), opt).final_state;
}

}  // namespace mhsolve
