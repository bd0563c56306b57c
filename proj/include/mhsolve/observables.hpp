#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>

#include "mhsolve/hamiltonian.hpp"
#include "mhsolve/spectral.hpp"

namespace mhsolve {

struct ObservableRecord {
  double t = 0;
  double norm = 0;
  double momentum = 0;
  double energy = 0;
  std::optional<double> energy_linear;  // <u, L0 u>
};

/// I(u) = i * int (conj(u_x) u - conj(u) u_x) dx = 2 Im <u, u_x>.
inline double momentum(const Grid& g, const CVector& u) {
  const CVector ux = derivative(g, u);
  const cplx val = cplx(0, 1) * (inner_product(g, ux, u) - inner_product(g, u, ux));
  const double mag = std::max(1.0, std::abs(val));
  if (std::abs(val.imag()) > 1e-12 * mag)
    throw std::logic_error("momentum: integral is not real");
  return val.real();
}

inline double momentum(const WaveField& u) { return momentum(u.grid, u.values); }

/// <-Delta u, u> + (lambda/2) <|u|^2 u, u> + int (V0 + V^e(., t)) |u|^2 dx.
inline double hamiltonian_energy(const SpectralForm& f, const CVector& u, double t = 0) {
  const auto& g = f.grid;
  const double kinetic = inner_product(g, CVector(-laplacian(g, u)), u).real();
  const RVector dens = u.array().abs2();
  const double quartic = 0.5 * f.lambda * g.dx() * dens.squaredNorm();
  const double potential = g.dx() * linear_potential(f, t).dot(dens);
  return kinetic + quartic + potential;
}

/// Real part of <u, L0 u>.
inline double matrix_energy(const CVector& u, const CMatrix& l0) {
  if (l0.cols() != u.size()) throw std::invalid_argument("matrix_energy: dimension mismatch");
  const cplx e = u.dot(l0 * u);
  if (std::abs(e.imag()) > 1e-10 * std::max(1.0, std::abs(e)))
    throw std::logic_error("matrix_energy: <u, L0 u> is not real");
  return e.real();
}

/// Energy of the matrix model: <u, (L0 + c(t) L1) u> + (lambda/2) sum |u|^4.
inline double hamiltonian_energy(const MatrixForm& f, const CVector& u, double t = 0) {
  double e = matrix_energy(u, f.l0);
  if (const double c = f.coefficient(t); c != 0.0) e += c * u.dot(f.l1 * u).real();
  return e + 0.5 * f.lambda * u.array().abs2().square().sum();
}

inline double hamiltonian_energy(const HamiltonianModel& m, const CVector& u, double t = 0) {
  return std::visit([&](const auto& f) { return hamiltonian_energy(f, u, t); }, m);
}

inline ObservableRecord observe(const HamiltonianModel& m, const CVector& u, double t) {
  ObservableRecord r;
  r.t = t;
  r.norm = model_norm(m, u);
  r.energy = hamiltonian_energy(m, u, t);
  if (const auto* s = std::get_if<SpectralForm>(&m)) {
    r.momentum = momentum(s->grid, u);
    const CVector l0u = -laplacian(s->grid, u) + CVector(s->v0.cwiseProduct(u));
    r.energy_linear = inner_product(s->grid, u, l0u).real();
  } else {
    const auto& f = std::get<MatrixForm>(m);
    r.momentum = 0;  // no spatial structure in the matrix models
    r.energy_linear = matrix_energy(u, f.l0);
  }
  return r;
}

}  // namespace mhsolve
