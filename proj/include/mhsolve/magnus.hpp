#pragma once

#include <stdexcept>
#include <utility>

#include "mhsolve/hamiltonian.hpp"
#include "mhsolve/quadrature.hpp"
#include "mhsolve/spectral.hpp"

namespace mhsolve {

/// Dense matrix of the spectral Laplacian on g (columns are Delta e_j).
inline CMatrix dense_laplacian(const Grid& g) {
  const int n = g.n();
  CMatrix d(n, n);
  CVector e = CVector::Zero(n);
  for (int j = 0; j < n; ++j) {
    e.setZero();
    e[j] = 1.0;
    d.col(j) = laplacian(g, e);
  }
  return d;
}

/// Fourth-order Magnus exponent of the linearised step,
///
///   Theta2 = -i S0 + (1/h) [S0, S1],
///   S0 = h L0 + mu00 (all multiplicative and L1 parts),  S1 = mu11.
///
/// On a grid L0 = -Delta + V0 and every mu term is a multiplication, so this is
///   i h Delta - i h V0 - i mu00 - [Delta, mu11].
/// In matrix form the (1/h)[mu00, mu11] part survives whenever L1 and the
/// nonlinear diagonal do not commute; it is O(h^3) and kept.
class Theta2Operator {
 public:
  Theta2Operator(const HamiltonianModel& model, MagnusTerms terms, double h,
                 ScalarMagnusTerms l1_terms = {})
      : model_(&model), terms_(std::move(terms)), l1_terms_(l1_terms), h_(h) {
    if (!(h > 0)) throw std::invalid_argument("Theta2Operator: step must be positive");
    const auto n = model_size(model);
    if (terms_.mu00.size() != n || terms_.mu11.size() != n)
      throw std::invalid_argument("Theta2Operator: Magnus terms do not match the model size");
  }

  const HamiltonianModel& model() const { return *model_; }
  const MagnusTerms& terms() const { return terms_; }
  const ScalarMagnusTerms& l1_terms() const { return l1_terms_; }
  double h() const { return h_; }

  CVector apply(const CVector& v) const {
    check_state(*model_, v);
    if (const auto* s = std::get_if<SpectralForm>(model_)) {
      const cplx I(0, 1);
      const CVector lap_v = laplacian(s->grid, v);
      const CVector m11v = terms_.mu11.cwiseProduct(v);
      CVector out = (I * h_) * lap_v;
      out.array() -= I * (h_ * s->v0 + terms_.mu00).array() * v.array();
      out -= laplacian(s->grid, m11v);
      out.array() += terms_.mu11.array() * lap_v.array();
      return out;
    }
    const auto& f = std::get<MatrixForm>(*model_);
    const CVector s0v = apply_s0(f, v);
    const CVector s1v = apply_s1(f, v);
    return cplx(0, -1) * s0v + (apply_s0(f, s1v) - apply_s1(f, s0v)) / h_;
  }

  CVector operator()(const CVector& v) const { return apply(v); }

  /// Explicit matrix (small problems only).
  CMatrix dense() const {
    const auto n = model_size(*model_);
    if (n > 1024) throw std::invalid_argument("Theta2Operator::dense: problem too large");
    const cplx I(0, 1);
    if (const auto* s = std::get_if<SpectralForm>(model_)) {
      const CMatrix lap = dense_laplacian(s->grid);
      const RVector m11 = terms_.mu11;
      CMatrix theta = (I * h_) * lap;
      theta.diagonal() -= I * (h_ * s->v0 + terms_.mu00).cast<cplx>();
      theta -= lap * m11.cast<cplx>().asDiagonal();
      theta += m11.cast<cplx>().asDiagonal() * lap;
      return theta;
    }
    const auto& f = std::get<MatrixForm>(*model_);
    CMatrix s0 = h_ * f.l0 + l1_terms_.mu00 * f.l1;
    s0.diagonal() += terms_.mu00.cast<cplx>();
    CMatrix s1 = l1_terms_.mu11 * f.l1;
    s1.diagonal() += terms_.mu11.cast<cplx>();
    return -I * s0 + (s0 * s1 - s1 * s0) / h_;
  }

 private:
  CVector apply_s0(const MatrixForm& f, const CVector& v) const {
    CVector out = h_ * (f.l0 * v);
    if (l1_terms_.mu00 != 0.0) out.noalias() += l1_terms_.mu00 * (f.l1 * v);
    out.array() += terms_.mu00.array() * v.array();
    return out;
  }
  CVector apply_s1(const MatrixForm& f, const CVector& v) const {
    CVector out = terms_.mu11.cwiseProduct(v);
    if (l1_terms_.mu11 != 0.0) out.noalias() += l1_terms_.mu11 * (f.l1 * v);
    return out;
  }

  const HamiltonianModel* model_;
  MagnusTerms terms_;
  ScalarMagnusTerms l1_terms_;
  double h_;
};

inline Theta2Operator assemble_theta2(const HamiltonianModel& model, MagnusTerms terms, double h,
                                      ScalarMagnusTerms l1_terms = {}) {
  return Theta2Operator(model, std::move(terms), h, l1_terms);
}

/// e^{Theta2} ~ e^{-sigma} e^{-i h (T + W)} e^{sigma} with multiplicative
/// sigma = i * phase.
struct SandwichFactors {
  RVector phase;           // sigma / i = mu11 / h
  RVector core_potential;  // W = V0 + mu00 / h
};

/// Conjugation that trades the [Delta, mu11] term for two unitary phase
/// factors. Matching the first BCH term [-i h L0, sigma] = [L0, mu11] fixes
/// sigma = (i/h) mu11; the leftover is O(h^5).
inline SandwichFactors eliminate_commutator(const Theta2Operator& op) {
  const auto* s = std::get_if<SpectralForm>(&op.model());
  if (s == nullptr)
    throw std::invalid_argument(
        "eliminate_commutator: matrix-form exponents have non-commuting Magnus terms");
  return {op.terms().mu11 / op.h(), s->v0 + op.terms().mu00 / op.h()};
}

/// Gradient of the core potential, preferring the analytic dV0/dx.
inline RVector core_potential_gradient(const SpectralForm& f, const MagnusTerms& terms, double h) {
  RVector grad = f.v0_gradient ? *f.v0_gradient : derivative(f.grid, f.v0);
  grad += derivative(f.grid, RVector(terms.mu00)) / h;
  return grad;
}

/// e^{-sigma} C e^{sigma} v for a central propagator C.
template <class Central>
CVector apply_sandwich(const SandwichFactors& sf, const CVector& v, Central&& central) {
  const cplx I(0, 1);
  CVector w = ((I * sf.phase.array()).exp() * v.array()).matrix();
  w = central(w);
  w.array() *= (-I * sf.phase.array()).exp();
  return w;
}

}  // namespace mhsolve
