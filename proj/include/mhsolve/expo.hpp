#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/MatrixFunctions>

#include "mhsolve/hamiltonian.hpp"
#include "mhsolve/splitting_coefficients.hpp"
#include "mhsolve/spectral.hpp"

namespace mhsolve {

/// Which approximation of exp(Theta2) v a Magnus-Hermite step uses.
struct ExpBackend {
  enum class Kind { DenseExact, Lanczos, Strang, BlanesMoan, ChinChen };
  Kind kind = Kind::ChinChen;
  double tol = 1e-8;  // Lanczos only
  int m_max = 64;     // Lanczos only

  static ExpBackend dense() { return {Kind::DenseExact}; }
  static ExpBackend lanczos(double tol = 1e-8, int m_max = 64) {
    if (!(tol > 0)) throw std::invalid_argument("Lanczos tolerance must be positive");
    if (m_max < 2) throw std::invalid_argument("Lanczos m_max must be >= 2");
    return {Kind::Lanczos, tol, m_max};
  }
  static ExpBackend strang() { return {Kind::Strang}; }
  static ExpBackend blanes_moan() { return {Kind::BlanesMoan}; }
  static ExpBackend chin_chen() { return {Kind::ChinChen}; }
};

inline constexpr Eigen::Index kDenseExpLimit = 256;

/// Full matrix exponential. Skew-Hermitian generators go through a Hermitian
/// eigendecomposition so the result is unitary to roundoff; anything else
/// falls back to scaling and squaring.
inline CMatrix exp_dense_matrix(const CMatrix& a, Eigen::Index limit = kDenseExpLimit) {
  if (a.rows() != a.cols()) throw std::invalid_argument("exp_dense: matrix must be square");
  if (a.rows() > limit)
    throw std::invalid_argument("exp_dense: dimension " + std::to_string(a.rows()) +
                                " exceeds the dense limit " + std::to_string(limit));
  const double scale = std::max(a.norm(), 1.0);
  if ((a + a.adjoint()).norm() <= 1e-12 * scale) {
    CMatrix herm = cplx(0, 1) * a;
    herm = 0.5 * (herm + herm.adjoint());
    Eigen::SelfAdjointEigenSolver<CMatrix> es(herm);
    const CVector phases = (cplx(0, -1) * es.eigenvalues().cast<cplx>()).array().exp();
    return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
  }
  return a.exp();
}

inline CVector exp_dense(const CMatrix& a, const CVector& v, Eigen::Index limit = kDenseExpLimit) {
  if (a.cols() != v.size()) throw std::invalid_argument("exp_dense: dimension mismatch");
  return exp_dense_matrix(a, limit) * v;
}

struct LanczosInfo {
  int dimension = 0;
  double error_estimate = 0;
  bool breakdown = false;
  int reorthogonalizations = 0;
};

class LanczosError : public std::runtime_error {
 public:
  LanczosError(const std::string& what, double residual)
      : std::runtime_error(what), residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

/// Krylov approximation of e^{A} v for skew-Hermitian A = -i M.
///
/// Runs the Hermitian Lanczos recurrence on M = i A and stops once two
/// successive Krylov approximations differ by at most tol * |v|. One pass of
/// full reorthogonalisation is applied to a new basis vector whenever its
/// overlap with any earlier one exceeds sqrt(eps).
template <class ApplyA>
CVector exp_lanczos(ApplyA&& apply_a, const CVector& v, double tol, int m_max,
                    LanczosInfo* info = nullptr) {
  if (!(tol > 0)) throw std::invalid_argument("exp_lanczos: tol must be positive");
  if (m_max < 2) throw std::invalid_argument("exp_lanczos: m_max must be >= 2");
  const Eigen::Index n = v.size();
  const double beta0 = v.norm();
  LanczosInfo local;
  LanczosInfo& inf = info ? *info : local;
  inf = {};
  if (beta0 == 0.0) return CVector::Zero(n);

  const int m_cap = static_cast<int>(std::min<Eigen::Index>(m_max, n));
  CMatrix q(n, m_cap + 1);
  RVector alpha(m_cap), beta(m_cap);
  q.col(0) = v / beta0;

  const double orth_tol = std::sqrt(std::numeric_limits<double>::epsilon());
  CVector y_prev;
  CVector y;
  double scale = 0;

  auto krylov_solution = [&](int m) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
    RVector sub = beta.head(std::max(m - 1, 0));
    es.computeFromTridiagonal(alpha.head(m), sub, Eigen::ComputeEigenvectors);
    const Eigen::MatrixXd& z = es.eigenvectors();
    const CVector ph = (cplx(0, -1) * es.eigenvalues().cast<cplx>()).array().exp();
    return CVector(z.cast<cplx>() * ph.cwiseProduct(z.row(0).transpose().cast<cplx>()));
  };

  for (int j = 0; j < m_cap; ++j) {
    CVector w = cplx(0, 1) * apply_a(CVector(q.col(j)));
    const double a = q.col(j).dot(w).real();
    alpha[j] = a;
    w -= a * q.col(j);
    if (j > 0) w -= beta[j - 1] * q.col(j - 1);
    double b = w.norm();
    scale = std::max({scale, std::abs(a), b});
    if (b > 0) {
      const CVector overlap = q.leftCols(j + 1).adjoint() * w;
      if (overlap.cwiseAbs().maxCoeff() > orth_tol * b) {
        w -= q.leftCols(j + 1) * overlap;
        b = w.norm();
        ++inf.reorthogonalizations;
      }
    }
    beta[j] = b;

    y = krylov_solution(j + 1);
    inf.dimension = j + 1;
    if (b <= 1e-13 * std::max(scale, 1.0)) {
      inf.breakdown = true;
      inf.error_estimate = 0;
      return beta0 * (q.leftCols(j + 1) * y);
    }
    if (j > 0) {
      CVector diff = y;
      diff.head(j) -= y_prev;
      inf.error_estimate = beta0 * diff.norm();
      if (inf.error_estimate <= tol * beta0) return beta0 * (q.leftCols(j + 1) * y);
    }
    y_prev = y;
    if (j + 1 < q.cols()) q.col(j + 1) = w / b;
  }
  if (m_cap == n) return beta0 * (q.leftCols(m_cap) * y);  // full space: exact
  throw LanczosError("exp_lanczos: no convergence within m_max = " + std::to_string(m_max) +
                         " (estimate " + std::to_string(inf.error_estimate) + ")",
                     inf.error_estimate);
}

// ---------------------------------------------------------------------------
// Kinetic/potential splittings on a periodic grid. Kinetic sub-flows carry the
// clock; potential sub-flows see the time reached so far.

template <std::size_t NK, std::size_t NP, class PotentialFlow>
CVector compose_splitting(const Grid& g, CVector u, double h, const std::array<double, NK>& kin,
                          const std::array<double, NP>& pot, PotentialFlow&& potential_flow) {
  static_assert(NK == NP + 1, "kinetic and potential stages must interleave");
  double offset = 0;
  for (std::size_t i = 0; i < NP; ++i) {
    u = free_propagate(g, u, kin[i] * h);
    offset += kin[i] * h;
    potential_flow(u, offset, pot[i] * h);
  }
  return free_propagate(g, u, kin[NK - 1] * h);
}

namespace detail {

inline void apply_phase(CVector& u, const RVector& w, double dt) {
  u.array() *= (cplx(0, -dt) * w.array()).exp();
}

// Exact flow of i u_t = (V0 + V^e(t_frozen) + lambda |u|^2) u; |u| is invariant.
inline auto nonlinear_potential_flow(const SpectralForm& f, double t) {
  return [&f, t](CVector& u, double offset, double dt) {
    RVector w = linear_potential(f, t + offset) + nonlinear_potential(u, f.lambda);
    apply_phase(u, w, dt);
  };
}

inline auto frozen_potential_flow(const RVector& w) {
  return [&w](CVector& u, double, double dt) { apply_phase(u, w, dt); };
}

}  // namespace detail

/// Strang splitting for the full nonlinear problem from time t.
inline CVector strang_step(const SpectralForm& f, const CVector& u, double t, double h) {
  return compose_splitting(f.grid, u, h, coefficients::kStrangKinetic,
                           coefficients::kStrangPotential,
                           detail::nonlinear_potential_flow(f, t));
}

/// Strang splitting for e^{-i h (-Delta + W)} with a frozen potential W.
inline CVector strang_step(const Grid& g, const CVector& u, const RVector& w, double h) {
  return compose_splitting(g, u, h, coefficients::kStrangKinetic, coefficients::kStrangPotential,
                           detail::frozen_potential_flow(w));
}

inline CVector blanes_moan_step(const SpectralForm& f, const CVector& u, double t, double h) {
  return compose_splitting(f.grid, u, h, coefficients::kBlanesMoanKinetic,
                           coefficients::kBlanesMoanPotential,
                           detail::nonlinear_potential_flow(f, t));
}

inline CVector blanes_moan_step(const Grid& g, const CVector& u, const RVector& w, double h) {
  return compose_splitting(g, u, h, coefficients::kBlanesMoanKinetic,
                           coefficients::kBlanesMoanPotential, detail::frozen_potential_flow(w));
}

/// Compact fourth-order splitting of e^{-i h (-Delta + W)}. The middle
/// potential carries the gradient correction (h^2/48)[W, [T, W]], which for
/// T = -Delta and real time equals -(h^2/24) |W'|^2.
inline CVector chin_chen_step(const Grid& g, const CVector& u, double h, const RVector& w,
                              const RVector& w_grad) {
  using namespace coefficients;
  if (w.size() != g.n() || w_grad.size() != g.n())
    throw std::invalid_argument("chin_chen_step: potential length mismatch");
  const RVector w_mid = w - (2.0 * kChinChenGradientWeight * h * h) * w_grad.cwiseAbs2();
  CVector v = u;
  detail::apply_phase(v, w, kChinChenOuterPotential * h);
  v = free_propagate(g, v, kChinChenKinetic * h);
  detail::apply_phase(v, w_mid, kChinChenMiddlePotential * h);
  v = free_propagate(g, v, kChinChenKinetic * h);
  detail::apply_phase(v, w, kChinChenOuterPotential * h);
  return v;
}

inline CVector chin_chen_step(const Grid& g, const CVector& u, double h, const RVector& w) {
  return chin_chen_step(g, u, h, w, derivative(g, w));
}

}  // namespace mhsolve
