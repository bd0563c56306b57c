#pragma once

#include <cmath>
#include <stdexcept>

#include "mhsolve/grid.hpp"

namespace mhsolve {

/// Values and time derivatives of an integrand P at both ends of [t_n, t_n + h].
struct EndpointData {
  RVector p0, p1;
  RVector d0, d1;
  double h = 0;
};

/// Bernoulli-weighted line integrals of a multiplicative potential over one step:
///   mu00 = int_0^h P(t_n + s) ds,   mu11 = int_0^h (s - h/2) P(t_n + s) ds.
struct MagnusTerms {
  RVector mu00;
  RVector mu11;
};

/// Same integrals for a scalar coefficient c(t) multiplying a fixed operator.
struct ScalarMagnusTerms {
  double mu00 = 0;
  double mu11 = 0;
};

enum class MuKind { mu00, mu11 };

namespace detail {
inline void check_endpoint(const EndpointData& e) {
  if (!(e.h > 0)) throw std::invalid_argument("Hermite quadrature: step must be positive");
  const auto n = e.p0.size();
  if (e.p1.size() != n || e.d0.size() != n || e.d1.size() != n)
    throw std::invalid_argument("Hermite quadrature: endpoint arrays differ in length");
}
}  // namespace detail

/// Integral of the cubic Hermite interpolant:
///   (h/2)(P0 + P1) + (h^2/12)(P0' - P1').
inline RVector hermite_mu00(const EndpointData& e) {
  detail::check_endpoint(e);
  const double h = e.h;
  return (h / 2.0) * (e.p0 + e.p1) + (h * h / 12.0) * (e.d0 - e.d1);
}

/// Integral of the cubic Hermite interpolant against (s - h/2):
///   (h^2/10)(P1 - P0) - (h^3/120)(P0' + P1').
/// The leading factor is h^2/10, not h^2/2: only the former integrates P(s) = s
/// exactly (h^3/12).
inline RVector hermite_mu11(const EndpointData& e) {
  detail::check_endpoint(e);
  const double h = e.h;
  return (h * h / 10.0) * (e.p1 - e.p0) - (h * h * h / 120.0) * (e.d0 + e.d1);
}

inline MagnusTerms hermite_terms(const EndpointData& e) { return {hermite_mu00(e), hermite_mu11(e)}; }

/// Two-point Gauss-Legendre rule for mu00 or mu11 of a field known at any
/// time. `field(t)` may return a scalar or an Eigen vector.
template <class Field>
auto gauss_mu(Field&& field, double t_n, double h, MuKind which) {
  const double off = h * std::sqrt(3.0) / 6.0;
  const double sm = h / 2.0 - off;
  const double sp = h / 2.0 + off;
  auto fm = field(t_n + sm);
  auto fp = field(t_n + sp);
  using R = std::decay_t<decltype(fm)>;
  if (which == MuKind::mu00) return R((h / 2.0) * (fm + fp));
  // weights (s - h/2) at the nodes are -off and +off
  return R((h / 2.0) * off * (fp - fm));
}

template <class Field>
MagnusTerms gauss_terms(Field&& field, double t_n, double h) {
  return {gauss_mu(field, t_n, h, MuKind::mu00), gauss_mu(field, t_n, h, MuKind::mu11)};
}

inline MagnusTerms combine_terms(const MagnusTerms& nl, const MagnusTerms& ext) {
  if (nl.mu00.size() != ext.mu00.size() || nl.mu11.size() != ext.mu11.size())
    throw std::invalid_argument("combine_terms: size mismatch");
  return {nl.mu00 + ext.mu00, nl.mu11 + ext.mu11};
}

}  // namespace mhsolve
