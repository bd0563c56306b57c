#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "mhsolve/quadrature.hpp"
#include "oracles.hpp"

using namespace mhsolve;

namespace {

RVector scalar(double v) { return RVector::Constant(1, v); }

EndpointData endpoints(auto&& p, auto&& dp, double t0, double h) {
  return {scalar(p(t0)), scalar(p(t0 + h)), scalar(dp(t0)), scalar(dp(t0 + h)), h};
}

double exact_mu00(auto&& p, double t0, double h) {
  return oracle::integrate([&](double s) { return p(t0 + s); }, 0.0, h);
}

double exact_mu11(auto&& p, double t0, double h) {
  return oracle::integrate([&](double s) { return (s - h / 2) * p(t0 + s); }, 0.0, h);
}

}  // namespace

TEST(Quadrature, HermiteExactOnCubicMonomials) {
  for (double h : {0.1, 0.7, 2.0}) {
    for (int k = 0; k <= 3; ++k) {
      // P(s) = (s/h)^k on [0, h]; closed forms of both integrals
      auto p = [&](double s) { return std::pow(s / h, k); };
      auto dp = [&](double s) { return k == 0 ? 0.0 : k * std::pow(s / h, k - 1) / h; };
      const EndpointData e = endpoints(p, dp, 0.0, h);
      const double m00 = h / (k + 1);
      const double m11 = h * h * (1.0 / (k + 2) - 0.5 / (k + 1));
      EXPECT_LE(std::abs(hermite_mu00(e)[0] - m00), 1e-13 * std::abs(m00)) << "k=" << k;
      const double scale = std::max(std::abs(m11), h * h);
      EXPECT_LE(std::abs(hermite_mu11(e)[0] - m11), 1e-13 * scale) << "k=" << k << " h=" << h;
    }
  }
}

TEST(Quadrature, HermiteNotExactOnQuartic) {
  const double h = 1.0;
  auto p = [](double s) { return s * s * s * s; };
  auto dp = [](double s) { return 4 * s * s * s; };
  EXPECT_GT(std::abs(hermite_mu00(endpoints(p, dp, 0.0, h))[0] - 0.2), 1e-3);
}

TEST(Quadrature, HermiteMu00FifthOrder) {
  auto p = [](double t) { return std::exp(std::sin(2 * t)) + std::cos(3 * t); };
  auto dp = [](double t) { return 2 * std::cos(2 * t) * std::exp(std::sin(2 * t)) - 3 * std::sin(3 * t); };
  std::vector<double> hs, e00, e11;
  for (double h : {0.1, 0.05, 0.025, 0.0125}) {
    const EndpointData e = endpoints(p, dp, 0.3, h);
    hs.push_back(h);
    e00.push_back(std::abs(hermite_mu00(e)[0] - exact_mu00(p, 0.3, h)));
    e11.push_back(std::abs(hermite_mu11(e)[0] - exact_mu11(p, 0.3, h)));
  }
  EXPECT_NEAR(oracle::slope(hs, e00), 5.0, 0.2);
  EXPECT_GE(oracle::slope(hs, e11), 4.8);
}

TEST(Quadrature, HermiteRejectsBadInput) {
  EndpointData e{scalar(1), scalar(1), scalar(0), scalar(0), 0.0};
  EXPECT_THROW(hermite_mu00(e), std::invalid_argument);
  e.h = 0.1;
  e.d1 = RVector::Zero(2);
  EXPECT_THROW(hermite_mu11(e), std::invalid_argument);
}

TEST(Quadrature, HermiteVectorised) {
  EndpointData e{RVector::LinSpaced(5, 0, 4), RVector::LinSpaced(5, 1, 5), RVector::Ones(5),
                 RVector::Ones(5), 1.0};
  // P_j(s) = j + s: mu00 = j + 1/2, mu11 = 1/12
  const MagnusTerms t = hermite_terms(e);
  for (int j = 0; j < 5; ++j) {
    EXPECT_NEAR(t.mu00[j], j + 0.5, 1e-15);
    EXPECT_NEAR(t.mu11[j], 1.0 / 12.0, 1e-15);
  }
}

TEST(Quadrature, GaussExactToPolynomialDegree) {
  // two nodes integrate degree <= 3 exactly: cubic P for mu00, quadratic P
  // for mu11 (whose integrand carries the extra factor s - h/2)
  auto cubic = [](double t) { return 1.0 - 2.0 * t + 0.5 * t * t + 3.0 * t * t * t; };
  auto quad = [](double t) { return 1.0 - 2.0 * t + 4.5 * t * t; };
  const double t0 = 0.4, h = 0.3;
  EXPECT_NEAR(gauss_mu(cubic, t0, h, MuKind::mu00), exact_mu00(cubic, t0, h), 1e-14);
  EXPECT_NEAR(gauss_mu(quad, t0, h, MuKind::mu11), exact_mu11(quad, t0, h), 1e-15);
  EXPECT_GT(std::abs(gauss_mu(cubic, t0, h, MuKind::mu11) - exact_mu11(cubic, t0, h)), 1e-6);
}

TEST(Quadrature, GaussMatchesAdaptiveQuadrature) {
  auto f = [](double t) { return 5.0 * std::sin(5.0 * std::numbers::pi * t); };
  std::vector<double> hs, e00, e11;
  for (double h : {0.02, 0.01, 0.005, 0.0025}) {
    hs.push_back(h);
    e00.push_back(std::abs(gauss_mu(f, 0.1, h, MuKind::mu00) - exact_mu00(f, 0.1, h)));
    e11.push_back(std::abs(gauss_mu(f, 0.1, h, MuKind::mu11) - exact_mu11(f, 0.1, h)));
  }
  EXPECT_NEAR(oracle::slope(hs, e00), 5.0, 0.2);
  EXPECT_NEAR(oracle::slope(hs, e11), 6.0, 0.2);
}

TEST(Quadrature, GaussOnVectorFieldAndCombine) {
  auto field = [](double t) { return RVector(RVector::LinSpaced(3, 1, 3) * t); };
  const MagnusTerms g = gauss_terms(field, 0.0, 1.0);
  for (int j = 0; j < 3; ++j) {
    EXPECT_NEAR(g.mu00[j], 0.5 * (j + 1), 1e-15);
    EXPECT_NEAR(g.mu11[j], (j + 1) / 12.0, 1e-15);
  }
  const MagnusTerms c = combine_terms(g, g);
  EXPECT_NEAR(c.mu00[2], 3.0, 1e-15);
  EXPECT_NEAR(c.mu11[2], 0.5, 1e-15);
}
