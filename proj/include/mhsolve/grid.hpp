#pragma once

#include <cmath>
#include <complex>
#include <memory>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>
#include <fftw3.h>

namespace mhsolve {

using cplx = std::complex<double>;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;
using CMatrix = Eigen::MatrixXcd;

namespace detail {

// The FFTW planner is not thread-safe; plan execution on fresh arrays is.
inline std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

class FftPlan {
 public:
  explicit FftPlan(int n) : n_(n) {
    std::lock_guard lock(fftw_planner_mutex());
    auto* in = fftw_alloc_complex(static_cast<std::size_t>(n));
    auto* out = fftw_alloc_complex(static_cast<std::size_t>(n));
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    forward_ = fftw_plan_dft_1d(n, in, out, FFTW_FORWARD, flags);
    backward_ = fftw_plan_dft_1d(n, in, out, FFTW_BACKWARD, flags);
    fftw_free(in);
    fftw_free(out);
    if (forward_ == nullptr || backward_ == nullptr)
      throw std::runtime_error("FFTW plan creation failed for n=" + std::to_string(n));
  }
  FftPlan(const FftPlan&) = delete;
  FftPlan& operator=(const FftPlan&) = delete;
  ~FftPlan() {
    std::lock_guard lock(fftw_planner_mutex());
    fftw_destroy_plan(forward_);
    fftw_destroy_plan(backward_);
  }

  // Out-of-place only: the plans were created with distinct buffers.
  void forward(const cplx* in, cplx* out) const { run(forward_, in, out); }
  void backward(const cplx* in, cplx* out) const { run(backward_, in, out); }
  int size() const { return n_; }

 private:
  static void run(fftw_plan p, const cplx* in, cplx* out) {
    // c2c out-of-place transforms leave the input untouched
    fftw_execute_dft(p, reinterpret_cast<fftw_complex*>(const_cast<cplx*>(in)),
                     reinterpret_cast<fftw_complex*>(out));
  }

  int n_;
  fftw_plan forward_ = nullptr;
  fftw_plan backward_ = nullptr;
};

}  // namespace detail

/// Uniform periodic mesh on [a, b) with n points and its angular wavenumbers
/// 2*pi*m/(b - a) in FFT ordering (m = 0, 1, ..., n/2, -(n/2 - 1), ..., -1).
///
/// Copies are cheap and share the wavenumber tables and FFT plans.
class Grid {
 public:
  Grid(double a, double b, int n) {
    if (!(n >= 2)) throw std::invalid_argument("Grid: need n >= 2, got " + std::to_string(n));
    if (!(b > a) || !std::isfinite(a) || !std::isfinite(b))
      throw std::invalid_argument("Grid: need finite endpoints with b > a");
    auto d = std::make_shared<Data>(n);
    d->a = a;
    d->b = b;
    d->n = n;
    d->dx = (b - a) / n;
    d->kappa.resize(n);
    const double base = 2.0 * std::numbers::pi / (b - a);
    for (int j = 0; j < n; ++j) {
      const int m = (j <= n / 2) ? j : j - n;
      d->kappa[j] = base * m;
    }
    d->kappa2 = d->kappa.array().square();
    data_ = std::move(d);
  }

  double a() const { return data_->a; }
  double b() const { return data_->b; }
  int n() const { return data_->n; }
  double dx() const { return data_->dx; }
  double length() const { return data_->b - data_->a; }
  const RVector& kappa() const { return data_->kappa; }
  const RVector& kappa_squared() const { return data_->kappa2; }

  double x(int j) const { return data_->a + j * data_->dx; }
  RVector points() const {
    RVector xs(n());
    for (int j = 0; j < n(); ++j) xs[j] = x(j);
    return xs;
  }

  /// Unnormalised forward transform.
  CVector fft(const CVector& u) const {
    check_size(u.size());
    CVector out(u.size());
    data_->plan.forward(u.data(), out.data());
    return out;
  }

  /// Inverse transform, divided by n.
  CVector ifft(const CVector& uh) const {
    check_size(uh.size());
    CVector out(uh.size());
    data_->plan.backward(uh.data(), out.data());
    out /= static_cast<double>(n());
    return out;
  }

  friend bool operator==(const Grid& l, const Grid& r) {
    return l.data_ == r.data_ || (l.a() == r.a() && l.b() == r.b() && l.n() == r.n());
  }

 private:
  struct Data {
    explicit Data(int n) : plan(n) {}
    double a = 0, b = 0, dx = 0;
    int n = 0;
    RVector kappa, kappa2;
    detail::FftPlan plan;
  };

  void check_size(Eigen::Index m) const {
    if (m != n())
      throw std::invalid_argument("Grid: vector of length " + std::to_string(m) +
                                  " on a grid of " + std::to_string(n()) + " points");
  }

  std::shared_ptr<const Data> data_;
};

inline Grid make_grid(double a, double b, int n) { return Grid(a, b, n); }

/// Complex samples of a state on a Grid.
struct WaveField {
  WaveField(Grid g, CVector v) : grid(std::move(g)), values(std::move(v)) {
    if (values.size() != grid.n())
      throw std::invalid_argument("WaveField: length does not match grid");
    if (!values.allFinite()) throw std::invalid_argument("WaveField: non-finite entries");
  }

  Grid grid;
  CVector values;
};

}  // namespace mhsolve
