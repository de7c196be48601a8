#include "vplk/convolution.hpp"

#include <cmath>
#include <cstring>
#include <stdexcept>

namespace vplk {

Sym3 phi_kernel(const Vec3& z, const KernelSpec& spec) {
  const double r2 = z[0] * z[0] + z[1] * z[1] + z[2] * z[2];
  if (r2 == 0.0) return {0, 0, 0, 0, 0, 0};
  const double r = std::sqrt(r2);
  const double rp = std::pow(r, spec.p);
  Sym3 out;
  for (int i = 0; i < 3; ++i)
    for (int j = i; j < 3; ++j) {
      const double proj = (i == j ? 1.0 : 0.0) - z[i] * z[j] / r2;
      out[sym_index(i, j)] = rp * proj;
    }
  return out;
}

KernelTables::KernelTables(const VelocityGrid& g, const KernelSpec& spec, ConvMode mode)
    : n_(g.n()), pad_(2 * g.n()), h_(g.h()), mode_(mode), spec_(spec) {
  const int w = 2 * n_ - 1;
  const std::size_t tsize = static_cast<std::size_t>(w) * w * w;
  for (auto& t : table_) t.assign(tsize, 0.0);
  for (int d0 = -(n_ - 1); d0 <= n_ - 1; ++d0)
    for (int d1 = -(n_ - 1); d1 <= n_ - 1; ++d1)
      for (int d2 = -(n_ - 1); d2 <= n_ - 1; ++d2) {
        const Vec3 z{h_ * d0, h_ * d1, h_ * d2};
        const Sym3 k = phi_kernel(z, spec_);
        const std::size_t idx =
            (static_cast<std::size_t>(d0 + n_ - 1) * w + (d1 + n_ - 1)) * w +
            (d2 + n_ - 1);
        for (int c = 0; c < 6; ++c) table_[c][idx] = k[c];
      }

  if (mode_ != ConvMode::fft) return;

  const int P = pad_;
  real_size_ = static_cast<std::size_t>(P) * P * P;
  cplx_size_ = static_cast<std::size_t>(P) * P * (P / 2 + 1);
  double* tmp_r = fftw_alloc_real(real_size_);
  fftw_complex* tmp_c = fftw_alloc_complex(cplx_size_);
  fftw_plan plan = fftw_plan_dft_r2c_3d(P, P, P, tmp_r, tmp_c, FFTW_ESTIMATE);
  for (int c = 0; c < 6; ++c) {
    std::memset(tmp_r, 0, real_size_ * sizeof(double));
    for (int d0 = -(n_ - 1); d0 <= n_ - 1; ++d0)
      for (int d1 = -(n_ - 1); d1 <= n_ - 1; ++d1)
        for (int d2 = -(n_ - 1); d2 <= n_ - 1; ++d2) {
          const int p0 = d0 >= 0 ? d0 : P + d0;
          const int p1 = d1 >= 0 ? d1 : P + d1;
          const int p2 = d2 >= 0 ? d2 : P + d2;
          tmp_r[(static_cast<std::size_t>(p0) * P + p1) * P + p2] =
              table(c, d0, d1, d2);
        }
    fftw_execute(plan);
    hat_[c].resize(cplx_size_);
    for (std::size_t m = 0; m < cplx_size_; ++m)
      hat_[c][m] = {tmp_c[m][0], tmp_c[m][1]};
  }
  fftw_destroy_plan(plan);
  fftw_free(tmp_r);
  fftw_free(tmp_c);
}

VelocityConvolver::VelocityConvolver(std::shared_ptr<const KernelTables> tables)
    : tables_(std::move(tables)) {
  const int n = tables_->n();
  nvol_ = static_cast<std::size_t>(n) * n * n;
  if (tables_->mode() != ConvMode::fft) return;
  const int P = tables_->padded();
  real_ = fftw_alloc_real(tables_->real_size());
  acc_ = fftw_alloc_complex(tables_->cplx_size());
  for (auto& s : spec_) s = fftw_alloc_complex(tables_->cplx_size());
  r2c_ = fftw_plan_dft_r2c_3d(P, P, P, real_, acc_, FFTW_ESTIMATE);
  c2r_ = fftw_plan_dft_c2r_3d(P, P, P, acc_, real_, FFTW_ESTIMATE);
}

VelocityConvolver::~VelocityConvolver() {
  if (r2c_) fftw_destroy_plan(r2c_);
  if (c2r_) fftw_destroy_plan(c2r_);
  if (real_) fftw_free(real_);
  if (acc_) fftw_free(acc_);
  for (auto s : spec_)
    if (s) fftw_free(s);
}

void VelocityConvolver::scatter(const double* u) {
  const int n = tables_->n();
  const int P = tables_->padded();
  std::memset(real_, 0, tables_->real_size() * sizeof(double));
  for (int a0 = 0; a0 < n; ++a0)
    for (int a1 = 0; a1 < n; ++a1) {
      const double* src = u + (static_cast<std::size_t>(a0) * n + a1) * n;
      double* dst = real_ + (static_cast<std::size_t>(a0) * P + a1) * P;
      std::memcpy(dst, src, n * sizeof(double));
    }
}

void VelocityConvolver::gather(double* out) const {
  const int n = tables_->n();
  const int P = tables_->padded();
  const double scale =
      tables_->h() * tables_->h() * tables_->h() / static_cast<double>(tables_->real_size());
  for (int a0 = 0; a0 < n; ++a0)
    for (int a1 = 0; a1 < n; ++a1) {
      const double* src = real_ + (static_cast<std::size_t>(a0) * P + a1) * P;
      double* dst = out + (static_cast<std::size_t>(a0) * n + a1) * n;
      for (int a2 = 0; a2 < n; ++a2) dst[a2] = src[a2] * scale;
    }
}

void VelocityConvolver::conv6(const double* u, std::array<std::vector<double>, 6>& out) {
  for (auto& o : out)
    if (o.size() != nvol_) o.assign(nvol_, 0.0);
  if (tables_->mode() == ConvMode::direct) {
    conv6_direct(u, out);
    return;
  }
  scatter(u);
  fftw_execute(r2c_);
  const std::size_t cs = tables_->cplx_size();
  std::memcpy(spec_[0], acc_, cs * sizeof(fftw_complex));
  for (int c = 0; c < 6; ++c) {
    const auto& kh = tables_->hat(c);
    for (std::size_t m = 0; m < cs; ++m) {
      const double ur = spec_[0][m][0], ui = spec_[0][m][1];
      const double kr = kh[m].real(), ki = kh[m].imag();
      acc_[m][0] = ur * kr - ui * ki;
      acc_[m][1] = ur * ki + ui * kr;
    }
    fftw_execute(c2r_);
    gather(out[c].data());
  }
}

void VelocityConvolver::contract(const std::array<const double*, 3>& u,
                                 std::array<std::vector<double>, 3>& w) {
  for (auto& o : w)
    if (o.size() != nvol_) o.assign(nvol_, 0.0);
  if (tables_->mode() == ConvMode::direct) {
    contract_direct(u, w);
    return;
  }
  const std::size_t cs = tables_->cplx_size();
  for (int j = 0; j < 3; ++j) {
    scatter(u[j]);
    fftw_execute(r2c_);
    std::memcpy(spec_[j], acc_, cs * sizeof(fftw_complex));
  }
  for (int i = 0; i < 3; ++i) {
    const std::complex<double>* k0 = tables_->hat(sym_index(i, 0)).data();
    const std::complex<double>* k1 = tables_->hat(sym_index(i, 1)).data();
    const std::complex<double>* k2 = tables_->hat(sym_index(i, 2)).data();
    const fftw_complex* s0 = spec_[0];
    const fftw_complex* s1 = spec_[1];
    const fftw_complex* s2 = spec_[2];
    for (std::size_t m = 0; m < cs; ++m) {
      double ar = s0[m][0] * k0[m].real() - s0[m][1] * k0[m].imag();
      double ai = s0[m][0] * k0[m].imag() + s0[m][1] * k0[m].real();
      ar += s1[m][0] * k1[m].real() - s1[m][1] * k1[m].imag();
      ai += s1[m][0] * k1[m].imag() + s1[m][1] * k1[m].real();
      ar += s2[m][0] * k2[m].real() - s2[m][1] * k2[m].imag();
      ai += s2[m][0] * k2[m].imag() + s2[m][1] * k2[m].real();
      acc_[m][0] = ar;
      acc_[m][1] = ai;
    }
    fftw_execute(c2r_);
    gather(w[i].data());
  }
}

void VelocityConvolver::conv6_direct(const double* u,
                                     std::array<std::vector<double>, 6>& out) {
  const int n = tables_->n();
  const double h3 = tables_->h() * tables_->h() * tables_->h();
  std::size_t a = 0;
  for (int a0 = 0; a0 < n; ++a0)
    for (int a1 = 0; a1 < n; ++a1)
      for (int a2 = 0; a2 < n; ++a2, ++a) {
        double acc[6] = {0, 0, 0, 0, 0, 0};
        std::size_t b = 0;
        for (int b0 = 0; b0 < n; ++b0)
          for (int b1 = 0; b1 < n; ++b1)
            for (int b2 = 0; b2 < n; ++b2, ++b) {
              const double ub = u[b];
              if (ub == 0.0) continue;
              for (int c = 0; c < 6; ++c)
                acc[c] += tables_->table(c, a0 - b0, a1 - b1, a2 - b2) * ub;
            }
        for (int c = 0; c < 6; ++c) out[c][a] = acc[c] * h3;
      }
}

void VelocityConvolver::contract_direct(const std::array<const double*, 3>& u,
                                        std::array<std::vector<double>, 3>& w) {
  const int n = tables_->n();
  const double h3 = tables_->h() * tables_->h() * tables_->h();
  std::size_t a = 0;
  for (int a0 = 0; a0 < n; ++a0)
    for (int a1 = 0; a1 < n; ++a1)
      for (int a2 = 0; a2 < n; ++a2, ++a) {
        double acc[3] = {0, 0, 0};
        std::size_t b = 0;
        for (int b0 = 0; b0 < n; ++b0)
          for (int b1 = 0; b1 < n; ++b1)
            for (int b2 = 0; b2 < n; ++b2, ++b) {
              for (int i = 0; i < 3; ++i) {
                double s = 0.0;
                for (int j = 0; j < 3; ++j)
                  s += tables_->table(sym_index(i, j), a0 - b0, a1 - b1, a2 - b2) *
                       u[j][b];
                acc[i] += s;
              }
            }
        for (int i = 0; i < 3; ++i) w[i][a] = acc[i] * h3;
      }
}

}  // namespace vplk
