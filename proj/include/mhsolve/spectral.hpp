#pragma once

#include <stdexcept>

#include "mhsolve/grid.hpp"

namespace mhsolve {

/// Spectral second derivative: ifft(-kappa^2 * fft(u)).
inline CVector laplacian(const Grid& g, const CVector& u) {
  CVector uh = g.fft(u);
  uh.array() *= -g.kappa_squared().array();
  return g.ifft(uh);
}

/// Spectral first derivative. The Nyquist coefficient is dropped so that the
/// derivative of a real field stays real.
inline CVector derivative(const Grid& g, const CVector& u) {
  CVector uh = g.fft(u);
  uh.array() *= cplx(0, 1) * g.kappa().array();
  if (g.n() % 2 == 0) uh[g.n() / 2] = 0;
  return g.ifft(uh);
}

inline RVector derivative(const Grid& g, const RVector& w) {
  return derivative(g, CVector(w.cast<cplx>())).real();
}

/// Free Schroedinger flow e^{i s Delta} u, i.e. the solution of i u_t = -Delta u
/// after time s.
inline CVector free_propagate(const Grid& g, const CVector& u, double s) {
  CVector uh = g.fft(u);
  uh.array() *= (cplx(0, -s) * g.kappa_squared().array()).exp();
  return g.ifft(uh);
}

/// dx * sum conj(u_j) v_j, the rectangle rule on the periodic mesh.
inline cplx inner_product(const Grid& g, const CVector& u, const CVector& v) {
  if (u.size() != g.n() || v.size() != g.n())
    throw std::invalid_argument("inner_product: vector length does not match grid");
  return g.dx() * u.dot(v);  // Eigen's dot conjugates the left operand
}

inline double l2_norm(const Grid& g, const CVector& u) {
  return std::sqrt(std::max(0.0, inner_product(g, u, u).real()));
}

inline WaveField apply_laplacian(const WaveField& u) {
  return WaveField(u.grid, laplacian(u.grid, u.values));
}

inline WaveField spectral_derivative(const WaveField& u) {
  return WaveField(u.grid, derivative(u.grid, u.values));
}

inline cplx inner_product(const WaveField& u, const WaveField& v) {
  if (!(u.grid == v.grid)) throw std::invalid_argument("inner_product: grid mismatch");
  return inner_product(u.grid, u.values, v.values);
}

inline double l2_norm(const WaveField& u) { return l2_norm(u.grid, u.values); }

}  // namespace mhsolve
