#include "vplk/spectral.hpp"

#include <cmath>
#include <complex>
#include <cstring>

namespace vplk {

namespace {
// (i k)^p with the convention that odd powers at the Nyquist frequency are
// dropped; returns the multiplier as a complex number.
std::complex<double> ik_power(double k, int p, bool nyquist) {
  if (p == 0) return {1.0, 0.0};
  if (nyquist && (p % 2 != 0)) return {0.0, 0.0};
  std::complex<double> ik(0.0, k);
  std::complex<double> r(1.0, 0.0);
  for (int q = 0; q < p; ++q) r *= ik;
  return r;
}
}  // namespace

SpectralWorkspace::SpectralWorkspace(const SpatialGrid& g)
    : dim_(g.dim()), n_(g.n()), lx_(g.lx()), size_(g.size()) {
  buf_ = fftw_alloc_complex(size_);
  int dims[3] = {n_, n_, n_};
  fwd_ = fftw_plan_dft(dim_, dims, buf_, buf_, FFTW_FORWARD, FFTW_ESTIMATE);
  bwd_ = fftw_plan_dft(dim_, dims, buf_, buf_, FFTW_BACKWARD, FFTW_ESTIMATE);
}

SpectralWorkspace::~SpectralWorkspace() {
  fftw_destroy_plan(fwd_);
  fftw_destroy_plan(bwd_);
  fftw_free(buf_);
  if (batch_buf_) {
    fftw_destroy_plan(batch_fwd_);
    fftw_destroy_plan(batch_bwd_);
    fftw_free(batch_buf_);
  }
}

void SpectralWorkspace::load(const std::vector<double>& u) {
  if (u.size() != size_)
    throw std::invalid_argument("spectral: field size does not match grid");
  for (std::size_t m = 0; m < size_; ++m) {
    buf_[m][0] = u[m];
    buf_[m][1] = 0.0;
  }
}

std::vector<double> SpectralWorkspace::unload() const {
  std::vector<double> out(size_);
  const double scale = 1.0 / static_cast<double>(size_);
  for (std::size_t m = 0; m < size_; ++m) out[m] = buf_[m][0] * scale;
  return out;
}

std::array<int, 3> SpectralWorkspace::decompose(std::size_t flat) const {
  std::array<int, 3> ix{0, 0, 0};
  for (int d = dim_ - 1; d >= 0; --d) {
    ix[d] = static_cast<int>(flat % n_);
    flat /= n_;
  }
  return ix;
}

std::vector<double> SpectralWorkspace::x_derivative(const std::vector<double>& u,
                                                    const std::array<int, 3>& alpha) {
  for (int d = dim_; d < 3; ++d)
    if (alpha[d] != 0)
      throw std::invalid_argument("x_derivative: derivative along axis beyond grid dim");
  load(u);
  fftw_execute(fwd_);
  for (std::size_t m = 0; m < size_; ++m) {
    auto ix = decompose(m);
    std::complex<double> mult(1.0, 0.0);
    for (int d = 0; d < dim_; ++d) {
      const bool nyq = (n_ % 2 == 0) && (ix[d] == n_ / 2);
      mult *= ik_power(wavenumber(ix[d]), alpha[d], nyq);
    }
    std::complex<double> c(buf_[m][0], buf_[m][1]);
    c *= mult;
    buf_[m][0] = c.real();
    buf_[m][1] = c.imag();
  }
  fftw_execute(bwd_);
  return unload();
}

std::vector<double> SpectralWorkspace::x_derivative_axis(const std::vector<double>& u,
                                                         int axis) {
  std::array<int, 3> alpha{0, 0, 0};
  if (axis < 0 || axis >= dim_)
    throw std::invalid_argument("x_derivative: axis beyond grid dim");
  alpha[axis] = 1;
  return x_derivative(u, alpha);
}

std::vector<double> SpectralWorkspace::poisson_solve(const std::vector<double>& rho) {
  load(rho);
  fftw_execute(fwd_);
  const double mean = std::hypot(buf_[0][0], buf_[0][1]) / static_cast<double>(size_);
  if (mean > kNeutralityTol)
    throw NeutralityError("poisson_solve: source mean " + std::to_string(mean) +
                          " exceeds neutrality tolerance");
  buf_[0][0] = 0.0;
  buf_[0][1] = 0.0;
  for (std::size_t m = 1; m < size_; ++m) {
    auto ix = decompose(m);
    double k2 = 0.0;
    for (int d = 0; d < dim_; ++d) {
      const double k = wavenumber(ix[d]);
      k2 += k * k;
    }
    buf_[m][0] /= k2;
    buf_[m][1] /= k2;
  }
  fftw_execute(bwd_);
  return unload();
}

std::array<std::vector<double>, 3> SpectralWorkspace::gradient(
    const std::vector<double>& phi) {
  std::array<std::vector<double>, 3> g;
  for (int d = 0; d < dim_; ++d) g[d] = x_derivative_axis(phi, d);
  for (int d = dim_; d < 3; ++d) g[d].assign(size_, 0.0);
  return g;
}

std::vector<double> SpectralWorkspace::dt_potential(
    const std::array<std::vector<double>, 3>& J) {
  // div J in physical space, then inverse Laplacian with flipped sign:
  // d_t phi_hat = -i k . J_hat / |k|^2, zero mode 0.
  std::vector<double> acc(size_, 0.0);
  for (int d = 0; d < dim_; ++d) {
    auto dj = x_derivative_axis(J[d], d);
    for (std::size_t m = 0; m < size_; ++m) acc[m] += dj[m];
  }
  load(acc);
  fftw_execute(fwd_);
  buf_[0][0] = 0.0;
  buf_[0][1] = 0.0;
  for (std::size_t m = 1; m < size_; ++m) {
    auto ix = decompose(m);
    double k2 = 0.0;
    for (int d = 0; d < dim_; ++d) {
      const double k = wavenumber(ix[d]);
      k2 += k * k;
    }
    buf_[m][0] /= -k2;
    buf_[m][1] /= -k2;
  }
  fftw_execute(bwd_);
  return unload();
}

double SpectralWorkspace::grad_l2(const std::vector<double>& phi) {
  load(phi);
  fftw_execute(fwd_);
  const double inv_nd = 1.0 / static_cast<double>(size_);
  double ld = 1.0;
  for (int d = 0; d < dim_; ++d) ld *= lx_;
  double s = 0.0;
  for (std::size_t m = 0; m < size_; ++m) {
    auto ix = decompose(m);
    double k2 = 0.0;
    for (int d = 0; d < dim_; ++d) {
      const double k = wavenumber(ix[d]);
      k2 += k * k;
    }
    const double cr = buf_[m][0] * inv_nd;
    const double ci = buf_[m][1] * inv_nd;
    s += k2 * (cr * cr + ci * ci);
  }
  return std::sqrt(ld * s);
}

double SpectralWorkspace::neg_sobolev_norm(const std::vector<double>& u, double s) {
  if (!(s > 0.0) || !(s < 1.5))
    throw std::invalid_argument("neg_sobolev_norm: s must lie in (0, 3/2)");
  load(u);
  fftw_execute(fwd_);
  const double inv_nd = 1.0 / static_cast<double>(size_);
  double ld = 1.0;
  for (int d = 0; d < dim_; ++d) ld *= lx_;
  double acc = 0.0;
  for (std::size_t m = 1; m < size_; ++m) {
    auto ix = decompose(m);
    double k2 = 0.0;
    for (int d = 0; d < dim_; ++d) {
      const double k = wavenumber(ix[d]);
      k2 += k * k;
    }
    const double cr = buf_[m][0] * inv_nd;
    const double ci = buf_[m][1] * inv_nd;
    acc += std::pow(k2, -s) * (cr * cr + ci * ci);
  }
  return std::sqrt(ld * acc);
}

void SpectralWorkspace::ensure_batch(std::size_t nv) {
  if (batch_nv_ == nv) return;
  if (batch_buf_) {
    fftw_destroy_plan(batch_fwd_);
    fftw_destroy_plan(batch_bwd_);
    fftw_free(batch_buf_);
  }
  batch_nv_ = nv;
  batch_buf_ = fftw_alloc_complex(size_ * nv);
  int dims[3] = {n_, n_, n_};
  // one transform per velocity column: elements of column iv sit at
  // iv + ix*nv, so istride = nv and consecutive transforms are dist 1.
  batch_fwd_ = fftw_plan_many_dft(dim_, dims, static_cast<int>(nv), batch_buf_,
                                  nullptr, static_cast<int>(nv), 1, batch_buf_,
                                  nullptr, static_cast<int>(nv), 1, FFTW_FORWARD,
                                  FFTW_ESTIMATE);
  batch_bwd_ = fftw_plan_many_dft(dim_, dims, static_cast<int>(nv), batch_buf_,
                                  nullptr, static_cast<int>(nv), 1, batch_buf_,
                                  nullptr, static_cast<int>(nv), 1, FFTW_BACKWARD,
                                  FFTW_ESTIMATE);
}

void SpectralWorkspace::x_derivative_batched(const double* in, double* out,
                                             std::size_t nv, int axis) {
  if (axis < 0 || axis >= dim_)
    throw std::invalid_argument("x_derivative_batched: axis beyond grid dim");
  ensure_batch(nv);
  const std::size_t total = size_ * nv;
  for (std::size_t m = 0; m < total; ++m) {
    batch_buf_[m][0] = in[m];
    batch_buf_[m][1] = 0.0;
  }
  fftw_execute(batch_fwd_);
  for (std::size_t xm = 0; xm < size_; ++xm) {
    auto ix = decompose(xm);
    const bool nyq = (n_ % 2 == 0) && (ix[axis] == n_ / 2);
    const double k = nyq ? 0.0 : wavenumber(ix[axis]);
    fftw_complex* row = batch_buf_ + xm * nv;
    for (std::size_t iv = 0; iv < nv; ++iv) {
      const double re = row[iv][0];
      const double im = row[iv][1];
      row[iv][0] = -k * im;
      row[iv][1] = k * re;
    }
  }
  fftw_execute(batch_bwd_);
  const double scale = 1.0 / static_cast<double>(size_);
  for (std::size_t m = 0; m < total; ++m) out[m] = batch_buf_[m][0] * scale;
}

}  // namespace vplk
