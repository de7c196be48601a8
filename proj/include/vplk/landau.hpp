#pragma once

#include <array>
#include <cstddef>
#include <memory>
#include <vector>

#include "vplk/convolution.hpp"
#include "vplk/grid.hpp"
#include "vplk/rng.hpp"

namespace vplk {

// sigma^{ij}(v) = (phi^{ij} conv mu)(v) on the velocity lattice. The node
// tables use the lattice convolution with the zeroed coincident entry so that
// they share exact algebraic identities with the collision operators built
// from the same kernel tables. `origin` holds a separately computed
// singularity-resolved cell quadrature of sigma at v = 0 (the lattice has no
// node there); it is diagnostic data, not an operator ingredient.
struct SigmaField {
  std::array<std::vector<double>, 6> comp;
  Sym3 origin{0, 0, 0, 0, 0, 0};

  Sym3 at(std::size_t flat) const {
    return {comp[0][flat], comp[1][flat], comp[2][flat],
            comp[3][flat], comp[4][flat], comp[5][flat]};
  }
};

// Integral of phi(-z) mu(z) over the cube [-V, V]^3 by per-cell tensor
// Gauss-Legendre quadrature; the eight cells cornered at the origin are
// subdivided dyadically toward the integrable |z|^p singularity.
Sym3 sigma_origin_quadrature(const VelocityGrid& g, const KernelSpec& spec);

SigmaField build_sigma(const VelocityGrid& g, VelocityConvolver& conv);

// Immutable per-grid collision data: kernel tables, sigma, and the
// Maxwellian-ratio coefficient tables for the difference operators below.
class LandauContext {
 public:
  LandauContext(const VelocityGrid& g, const KernelSpec& spec, ConvMode mode);

  const VelocityGrid& grid() const { return *grid_; }
  const KernelSpec& spec() const { return spec_; }
  ConvMode mode() const { return mode_; }
  std::shared_ptr<const KernelTables> tables() const { return tables_; }
  const SigmaField& sigma() const { return sigma_; }

  // 1 / cp, 1 / cm: ratios sqrt(mu(v + h e)) / sqrt(mu(v)) and its mirror
  double tp(int a) const { return tp_[a]; }
  double tm(int a) const { return tm_[a]; }

 private:
  const VelocityGrid* grid_;
  KernelSpec spec_;
  ConvMode mode_;
  std::shared_ptr<const KernelTables> tables_;
  SigmaField sigma_;
  std::vector<double> tp_, tm_;
};

// Collision operator applier for one thread: owns scratch buffers and an FFT
// workspace, shares the immutable context. All operators act on a single
// velocity field of grid().size() values unless noted.
//
// The building block is the pair of one-sided Maxwellian-ratio differences
//   Eplus g  = (cp(v) g(v + h e_j) - g(v)) / h     (zero at the top layer)
//   Eminus g = (g(v) - cm(v) g(v - h e_j)) / h     (zero at the bottom layer)
// which are the one-sided discretizations of (d/dv_j + v_j) annihilating
// sqrt(mu) to round-off, and the centered zero-extension operator
//   Tc f = (tp(v) f(v + h e_j) - tm(v) f(v - h e_j)) / 2h
// discretizing (d/dv_j - v_j).
//
//   L2 g = sum_{s,i,j} (E^s_i)^T [sigma^{ij} E^s_j g]          A* = -L2/2
//   K* g = 1/2 sum_{s,i} (E^s_i)^T [sqrt(mu) sum_j phi^{ij} conv (sqrt(mu) E^s_j g)]
//   L1 g = L2 g - 2 K* g
//   L(g+, g-) = L2 g(+/-) - K*(g+ + g-)
//   Gamma*(g, h) = -sum_i (Ec_i)^T [A_{ij} Tc_j h - h B_i],  Ec = (E^+ + E^-)/2
//     with A_{ij} = phi^{ij} conv (sqrt(mu) g), B_i = sum_j phi^{ij} conv
//     (sqrt(mu) Tc_j g).
//
// These are symmetric (L2, K*, and hence L1, L pairwise) by construction, the
// quadratic forms of L2 and L1 are nonnegative (sum of squares and an exact
// discrete pair form), and Gamma* annihilates the mass invariant exactly up
// to round-off; momentum and energy invariants cancel for the symmetrized
// combination Gamma*(g,h) + Gamma*(h,g).
class LandauWorker {
 public:
  explicit LandauWorker(const LandauContext& ctx);

  const LandauContext& context() const { return *ctx_; }

  // side = +1 or -1
  void e_apply(const double* g, double* out, int axis, int side) const;
  void e_transpose_add(const double* w, double* out, int axis, int side,
                       double coef) const;
  void t_centered(const double* f, double* out, int axis) const;

  void apply_L2(const double* g, double* out);
  void apply_A_star(const double* g, double* out);
  void apply_K_star(const double* g, double* out);
  void apply_L1(const double* g, double* out);
  void apply_L_pair(const double* gp, const double* gm, double* outp, double* outm);

  // first-argument data of Gamma*, reusable across second arguments
  struct GammaGSide {
    std::array<std::vector<double>, 6> A;
    std::array<std::vector<double>, 3> B;
  };
  void gamma_gside(const double* g, GammaGSide& gs);
  void gamma_apply(const GammaGSide& gs, const double* h, double* out);
  void apply_Gamma_star(const double* g, const double* h, double* out);

 private:
  const LandauContext* ctx_;
  VelocityConvolver conv_;
  std::size_t nv_;
  std::vector<double> s1_, s2_;
  std::array<std::vector<double>, 3> u_, w_;
  std::array<std::vector<double>, 6> c6_;
  std::array<std::vector<double>, 3> c3_;
};

// Orthonormal null-space bases under the discrete velocity inner product:
// 6 two-component vectors spanning N(L), 5 single-species vectors for N(L1),
// 1 for N(L2). Built by modified Gram-Schmidt; gram_defect records the
// largest deviation of the Gram matrix from the identity.
struct NullBasis {
  std::vector<std::vector<double>> pair;     // each of size 2 N, plus then minus
  std::vector<std::vector<double>> single1;  // each of size N
  std::vector<std::vector<double>> single2;
  double gram_defect = 0.0;
};

NullBasis build_null_basis(const VelocityGrid& g);

std::vector<double> project_P1(const NullBasis& b, const VelocityGrid& g,
                               const std::vector<double>& f);
std::vector<double> project_P2(const NullBasis& b, const VelocityGrid& g,
                               const std::vector<double>& f);
void project_P_pair(const NullBasis& b, const VelocityGrid& g, const double* fp,
                    const double* fm, double* hp, double* hm);

// || g ||_sigma^2 = h^3 sum w^2 [ sigma^{ij} d_i g d_j g + sigma^{ij} v_i v_j g^2 ]
// with centered zero-extension derivatives.
double sigma_norm_sq(const VelocityGrid& g, const SigmaField& sigma,
                     const WeightSpec& w, const std::vector<double>& f);
double sigma_norm(const VelocityGrid& g, const SigmaField& sigma,
                  const WeightSpec& w, const std::vector<double>& f);

struct CoercivityReport {
  double c_pair = 0.0;   // min <Lg,g> / ||(I-P)g||_sigma^2
  double c_L1 = 0.0;
  double c_L2 = 0.0;
  int skipped = 0;       // samples with near-null microscopic part
};

CoercivityReport coercivity_constant(LandauWorker& w, const NullBasis& basis,
                                     int n_samples, Rng& rng);

// sup over sampled triples of |<Gamma*(g,h), k>| / (||mu^{1/4} g|| ||h||_sigma ||k||_sigma)
double gamma_ratio_estimate(LandauWorker& w, int n_samples, Rng& rng);

}  // namespace vplk
