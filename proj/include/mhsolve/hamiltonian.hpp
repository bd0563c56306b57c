#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <variant>

#include <Eigen/Eigenvalues>

#include "mhsolve/grid.hpp"
#include "mhsolve/spectral.hpp"

namespace mhsolve {

/// Real time-dependent potential V^e(x, t).
struct ExternalField {
  std::function<double(double x, double t)> eval;
  std::function<double(double x, double t)> dt_eval;  // optional

  RVector sample(const Grid& g, double t) const {
    RVector v(g.n());
    for (int j = 0; j < g.n(); ++j) v[j] = eval(g.x(j), t);
    return v;
  }
};

/// -Delta + V0(x) + V^e(x, t) + lambda |u|^2 on a periodic grid.
struct SpectralForm {
  Grid grid;
  RVector v0;
  // Analytic dV0/dx when available. V0 need not be smooth across the
  // periodic seam, so spectral differentiation of it can ring.
  std::optional<RVector> v0_gradient;
  std::optional<ExternalField> external;
  double lambda = 0;
};

/// L0 + c(t) L1 + diag(lambda |u|^2) for dense Hermitian L0 and L1.
struct MatrixForm {
  CMatrix l0;
  CMatrix l1;
  std::function<double(double t)> coeff;  // empty means c(t) == 0
  double lambda = 0;

  double coefficient(double t) const { return coeff ? coeff(t) : 0.0; }
};

using HamiltonianModel = std::variant<SpectralForm, MatrixForm>;

inline bool is_spectral(const HamiltonianModel& m) {
  return std::holds_alternative<SpectralForm>(m);
}

inline Eigen::Index model_size(const HamiltonianModel& m) {
  return std::visit(
      [](const auto& f) -> Eigen::Index {
        if constexpr (std::is_same_v<std::decay_t<decltype(f)>, SpectralForm>)
          return f.grid.n();
        else
          return f.l0.rows();
      },
      m);
}

inline double model_lambda(const HamiltonianModel& m) {
  return std::visit([](const auto& f) { return f.lambda; }, m);
}

inline bool is_hermitian(const CMatrix& a, double rel_tol = 1e-12) {
  if (a.rows() != a.cols()) return false;
  const double scale = std::max(a.norm(), 1.0);
  return (a - a.adjoint()).norm() <= rel_tol * scale;
}

inline SpectralForm make_spectral_model(Grid grid, RVector v0, double lambda,
                                        std::optional<ExternalField> external = std::nullopt,
                                        std::optional<RVector> v0_gradient = std::nullopt) {
  if (v0.size() == 0) v0 = RVector::Zero(grid.n());
  if (v0.size() != grid.n()) throw std::invalid_argument("static potential length mismatch");
  if (!v0.allFinite()) throw std::invalid_argument("static potential must be finite");
  if (v0_gradient && v0_gradient->size() != grid.n())
    throw std::invalid_argument("static potential gradient length mismatch");
  if (external && !external->eval) external.reset();
  return SpectralForm{std::move(grid), std::move(v0), std::move(v0_gradient),
                      std::move(external), lambda};
}

inline MatrixForm make_matrix_model(CMatrix l0, CMatrix l1, std::function<double(double)> coeff,
                                    double lambda) {
  if (l1.size() == 0) l1 = CMatrix::Zero(l0.rows(), l0.cols());
  if (!is_hermitian(l0) || !is_hermitian(l1))
    throw std::invalid_argument("matrix model: L0 and L1 must be square Hermitian");
  if (l0.rows() != l1.rows()) throw std::invalid_argument("matrix model: L0/L1 shape mismatch");
  return MatrixForm{std::move(l0), std::move(l1), std::move(coeff), lambda};
}

/// Inner product of the model's state space: dx-weighted on a grid, plain
/// l2 in matrix form.
inline cplx model_inner(const HamiltonianModel& m, const CVector& u, const CVector& v) {
  if (const auto* s = std::get_if<SpectralForm>(&m)) return inner_product(s->grid, u, v);
  return u.dot(v);
}

inline double model_norm(const HamiltonianModel& m, const CVector& u) {
  return std::sqrt(std::max(0.0, model_inner(m, u, u).real()));
}

inline RVector nonlinear_potential(const CVector& u, double lambda) {
  return lambda * u.array().abs2().matrix();
}

inline RVector nonlinear_potential(const WaveField& u, double lambda) {
  return nonlinear_potential(u.values, lambda);
}

/// V0 + V^e(., t), the linear multiplicative part of the spectral model.
inline RVector linear_potential(const SpectralForm& f, double t) {
  if (!f.external) return f.v0;
  return f.v0 + f.external->sample(f.grid, t);
}

inline void check_state(const HamiltonianModel& m, const CVector& u) {
  if (u.size() != model_size(m))
    throw std::invalid_argument("state length " + std::to_string(u.size()) +
                                " does not match model size " + std::to_string(model_size(m)));
}

inline CVector apply_hamiltonian(const HamiltonianModel& m, const CVector& u, double t) {
  check_state(m, u);
  if (const auto* s = std::get_if<SpectralForm>(&m)) {
    CVector out = -laplacian(s->grid, u);
    RVector pot = linear_potential(*s, t) + nonlinear_potential(u, s->lambda);
    out.array() += pot.array() * u.array();
    return out;
  }
  const auto& f = std::get<MatrixForm>(m);
  CVector out = f.l0 * u;
  if (const double c = f.coefficient(t); c != 0.0) out.noalias() += c * (f.l1 * u);
  out.array() += nonlinear_potential(u, f.lambda).array() * u.array();
  return out;
}

inline WaveField apply_hamiltonian(const SpectralForm& f, const WaveField& u, double t) {
  if (!(u.grid == f.grid)) throw std::invalid_argument("apply_hamiltonian: grid mismatch");
  return WaveField(u.grid, apply_hamiltonian(HamiltonianModel(f), u.values, t));
}

/// d/dt (lambda |u|^2) along i u_t = H(u, t) u:  2 lambda Im(conj(u) (H u)).
inline RVector nonlinear_potential_rate(const HamiltonianModel& m, const CVector& u, double t) {
  const double lambda = model_lambda(m);
  if (lambda == 0.0) return RVector::Zero(u.size());
  const CVector hu = apply_hamiltonian(m, u, t);
  return 2.0 * lambda * (u.array().conjugate() * hu.array()).imag().matrix();
}

/// (A + A^H)/2 with A having i.i.d. complex Gaussian entries, rescaled to
/// spectral radius 10.
inline CMatrix make_random_hermitian(int n, std::uint64_t seed, double spectral_radius = 10.0) {
  if (n < 1) throw std::invalid_argument("make_random_hermitian: n must be >= 1");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, std::sqrt(0.5));
  CMatrix a(n, n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) a(i, j) = cplx(normal(rng), normal(rng));
  CMatrix h = 0.5 * (a + a.adjoint());
  Eigen::SelfAdjointEigenSolver<CMatrix> es(h, Eigen::EigenvaluesOnly);
  const double rho = es.eigenvalues().cwiseAbs().maxCoeff();
  if (rho > 0) h *= spectral_radius / rho;
  // symmetrise again so the result is Hermitian to the last bit
  return 0.5 * (h + h.adjoint());
}

}  // namespace mhsolve
