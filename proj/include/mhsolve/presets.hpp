#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>

#include "mhsolve/hamiltonian.hpp"

namespace mhsolve {

inline double preset_static_potential(double x) {
  const double x2 = x * x;
  return x2 * x2 - 10.0 * x2;
}

inline double preset_static_potential_gradient(double x) { return 4.0 * x * x * x - 20.0 * x; }

inline double preset_external_field(double x, double t) {
  using std::numbers::pi;
  return 5.0 * std::sin(5.0 * pi * t) * std::sin(pi * x);
}

inline double preset_external_field_rate(double x, double t) {
  using std::numbers::pi;
  return 25.0 * pi * std::cos(5.0 * pi * t) * std::sin(pi * x);
}

/// Gaussian packet centred at x0 = -2 with variance 0.25, normalised to unit
/// L2 norm on the grid.
inline WaveField preset_initial_condition(const Grid& g, double x0 = -2.0, double sigma2 = 0.25) {
  CVector u(g.n());
  for (int j = 0; j < g.n(); ++j) {
    const double d = g.x(j) - x0;
    u[j] = std::exp(-d * d / (2.0 * sigma2));
  }
  u /= l2_norm(g, u);
  return WaveField(g, std::move(u));
}

inline constexpr std::array<std::string_view, 6> kPresetNames = {
    "gp-defocusing-driven", "gp-defocusing", "gp-focusing",
    "nls-defocusing",       "matrix-driven", "matrix-static"};

inline bool is_preset_name(std::string_view id) {
  for (auto p : kPresetNames)
    if (p == id) return true;
  return false;
}

inline std::string preset_name_list() {
  std::string s;
  for (auto p : kPresetNames) {
    if (!s.empty()) s += ", ";
    s += p;
  }
  return s;
}

struct PresetOptions {
  int n = 0;               // grid points or matrix dimension; 0 picks the default
  std::uint64_t seed = 7;  // matrix presets only
};

struct Preset {
  std::string id;
  HamiltonianModel model;
  CVector u0;
};

namespace detail {

inline SpectralForm spectral_preset(int n, double lambda, bool with_static, bool driven) {
  Grid g(-10.0, 10.0, n);
  RVector v0 = RVector::Zero(n);
  std::optional<RVector> grad;
  if (with_static) {
    RVector dv(n);
    for (int j = 0; j < n; ++j) {
      v0[j] = preset_static_potential(g.x(j));
      dv[j] = preset_static_potential_gradient(g.x(j));
    }
    grad = std::move(dv);
  }
  std::optional<ExternalField> ext;
  if (driven) ext = ExternalField{preset_external_field, preset_external_field_rate};
  return make_spectral_model(std::move(g), std::move(v0), lambda, std::move(ext), std::move(grad));
}

}  // namespace detail

/// Builds one of the named experiment set-ups: the four grid problems on
/// [-10, 10] (default 1000 points) and the two random-matrix problems
/// (default n = 128, lambda = 1).
inline Preset make_preset(std::string_view id, PresetOptions opt = {}) {
  if (!is_preset_name(id))
    throw std::invalid_argument("unknown preset '" + std::string(id) +
                                "'; expected one of: " + preset_name_list());
  if (id.starts_with("matrix")) {
    const int n = opt.n > 0 ? opt.n : 128;
    CMatrix l0 = make_random_hermitian(n, opt.seed);
    CMatrix l1 = make_random_hermitian(n, opt.seed + 1);
    std::function<double(double)> coeff;
    if (id == "matrix-driven") coeff = [](double t) { return std::sin(5.0 * std::numbers::pi * t); };
    std::mt19937_64 rng(opt.seed + 2);
    std::normal_distribution<double> normal(0.0, 1.0);
    CVector u(n);
    for (int j = 0; j < n; ++j) u[j] = cplx(normal(rng), normal(rng));
    return Preset{std::string(id),
                  make_matrix_model(std::move(l0), std::move(l1), std::move(coeff), 1.0),
                  u / u.norm()};
  }
  const int n = opt.n > 0 ? opt.n : 1000;
  const bool driven = id == "gp-defocusing-driven";
  const bool with_static = id != "nls-defocusing";
  const double lambda = id == "gp-focusing" ? -10.0 : 10.0;
  SpectralForm f = detail::spectral_preset(n, lambda, with_static, driven);
  CVector u0 = preset_initial_condition(f.grid).values;
  return Preset{std::string(id), std::move(f), std::move(u0)};
}

}  // namespace mhsolve
