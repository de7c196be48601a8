#pragma once

#include <array>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include <fftw3.h>

#include "vplk/grid.hpp"

namespace vplk {

// Thrown by the Poisson solve when the source has a nonzero spatial mean.
class NeutralityError : public std::runtime_error {
 public:
  explicit NeutralityError(const std::string& what) : std::runtime_error(what) {}
};

// Fourier workspace for one spatial grid: exact periodic derivatives, the
// Poisson solve, and DFT-based norms. All plans use FFTW_ESTIMATE so planning
// is deterministic; transforms are unnormalized c2c with explicit 1/N^d.
class SpectralWorkspace {
 public:
  explicit SpectralWorkspace(const SpatialGrid& g);
  ~SpectralWorkspace();
  SpectralWorkspace(const SpectralWorkspace&) = delete;
  SpectralWorkspace& operator=(const SpectralWorkspace&) = delete;

  int dim() const { return dim_; }
  int n() const { return n_; }
  std::size_t size() const { return size_; }

  // d^|alpha| u along spatial axes; Fourier multiplier, exact on resolved
  // modes. Nyquist column is zeroed for odd per-axis orders so real input
  // stays real.
  std::vector<double> x_derivative(const std::vector<double>& u,
                                   const std::array<int, 3>& alpha);
  std::vector<double> x_derivative_axis(const std::vector<double>& u, int axis);

  // -lap(phi) = rho with zero-mean rho; zero mode of phi set to 0.
  // Mean |c_0| beyond 1e-10 raises NeutralityError.
  std::vector<double> poisson_solve(const std::vector<double>& rho);

  std::array<std::vector<double>, 3> gradient(const std::vector<double>& phi);

  // d_t phi = inverse-lap of div J, zero mode 0. J has dim() components.
  std::vector<double> dt_potential(const std::array<std::vector<double>, 3>& J);

  // || grad phi ||_2 via Parseval (matches the trapezoid-free grid quadrature
  // exactly on the periodic grid).
  double grad_l2(const std::vector<double>& phi);

  // || Lambda^{-s} u ||_2, s in (0, 3/2): zero mode excluded,
  // squared norm = L^d * sum_{m != 0} |2 pi m / L|^{-2s} |c_m|^2.
  double neg_sobolev_norm(const std::vector<double>& u, double s);

  // Derivative along one spatial axis of a phase-space field laid out
  // x-major with nv velocity values per node; all velocity columns at once.
  void x_derivative_batched(const double* in, double* out, std::size_t nv, int axis);

  static constexpr double kNeutralityTol = 1e-10;

 private:
  int dim_, n_;
  double lx_;
  std::size_t size_;
  fftw_complex* buf_;
  fftw_plan fwd_, bwd_;

  std::size_t batch_nv_ = 0;
  fftw_complex* batch_buf_ = nullptr;
  fftw_plan batch_fwd_ = nullptr, batch_bwd_ = nullptr;

  void ensure_batch(std::size_t nv);
  void load(const std::vector<double>& u);
  std::vector<double> unload() const;
  int mode_of(int i) const { return i <= n_ / 2 ? i : i - n_; }
  double wavenumber(int i) const {
    return 2.0 * SpatialGrid::kPi * mode_of(i) / lx_;
  }
  // per-axis indices of a flattened x node (row-major, axis 0 slowest)
  std::array<int, 3> decompose(std::size_t flat) const;
};

}  // namespace vplk
