#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <memory>
#include <vector>

#include <fftw3.h>

#include "vplk/grid.hpp"

namespace vplk {

// Collision kernel family phi_p(z) = |z|^p (I - zhat zhat^T); p = -1 is the
// Coulomb case. The z = 0 entry of any lattice table is defined as 0, which
// is harmless because phi(z) z = 0 makes the diagonal term drop out of every
// quadratic form the tables enter.
struct KernelSpec {
  double p = -1.0;
};

// Symmetric 3x3 packed as 00, 01, 02, 11, 12, 22.
using Sym3 = std::array<double, 6>;

inline int sym_index(int i, int j) {
  static constexpr int map[3][3] = {{0, 1, 2}, {1, 3, 4}, {2, 4, 5}};
  return map[i][j];
}

inline Vec3 sym_apply(const Sym3& s, const Vec3& u) {
  return {s[0] * u[0] + s[1] * u[1] + s[2] * u[2],
          s[1] * u[0] + s[3] * u[1] + s[4] * u[2],
          s[2] * u[0] + s[4] * u[1] + s[5] * u[2]};
}

Sym3 phi_kernel(const Vec3& z, const KernelSpec& spec);

enum class ConvMode : std::uint8_t { fft = 0, direct = 1 };

// Lattice kernel data shared by all convolver instances for one grid:
// the signed-difference tables K^{ij}(d) = phi(h d) and, in fft mode, their
// forward transforms on the zero-padded 2n lattice.
class KernelTables {
 public:
  KernelTables(const VelocityGrid& g, const KernelSpec& spec, ConvMode mode);

  int n() const { return n_; }
  int padded() const { return pad_; }
  double h() const { return h_; }
  ConvMode mode() const { return mode_; }
  const KernelSpec& spec() const { return spec_; }

  // direct-mode table lookup, d components in [-(n-1), n-1]
  double table(int comp, int d0, int d1, int d2) const {
    const int w = 2 * n_ - 1;
    const std::size_t idx =
        (static_cast<std::size_t>(d0 + n_ - 1) * w + (d1 + n_ - 1)) * w + (d2 + n_ - 1);
    return table_[comp][idx];
  }

  std::size_t real_size() const { return real_size_; }
  std::size_t cplx_size() const { return cplx_size_; }
  const std::vector<std::complex<double>>& hat(int comp) const { return hat_[comp]; }

 private:
  int n_, pad_;
  double h_;
  ConvMode mode_;
  KernelSpec spec_;
  std::size_t real_size_ = 0, cplx_size_ = 0;
  std::array<std::vector<double>, 6> table_;
  std::array<std::vector<std::complex<double>>, 6> hat_;
};

// Per-thread convolution workspace. Computes lattice convolutions
//   (K^{ij} conv u)(a) = h^3 sum_b K^{ij}(a - b) u(b)
// either via padded FFTs (plans are created serially at construction and the
// instance is not shareable across threads) or by direct summation.
class VelocityConvolver {
 public:
  VelocityConvolver(std::shared_ptr<const KernelTables> tables);
  ~VelocityConvolver();
  VelocityConvolver(const VelocityConvolver&) = delete;
  VelocityConvolver& operator=(const VelocityConvolver&) = delete;

  ConvMode mode() const { return tables_->mode(); }

  // all six component convolutions of one scalar field
  void conv6(const double* u, std::array<std::vector<double>, 6>& out);

  // w_i = sum_j (K^{ij} conv u_j)
  void contract(const std::array<const double*, 3>& u,
                std::array<std::vector<double>, 3>& w);

 private:
  std::shared_ptr<const KernelTables> tables_;
  std::size_t nvol_;

  double* real_ = nullptr;
  fftw_complex* acc_ = nullptr;
  std::array<fftw_complex*, 3> spec_{nullptr, nullptr, nullptr};
  fftw_plan r2c_ = nullptr, c2r_ = nullptr;

  void scatter(const double* u);
  void gather(double* out) const;
  void conv6_direct(const double* u, std::array<std::vector<double>, 6>& out);
  void contract_direct(const std::array<const double*, 3>& u,
                       std::array<std::vector<double>, 3>& w);
};

}  // namespace vplk
