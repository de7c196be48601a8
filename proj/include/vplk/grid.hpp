#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <vector>

// Lattices, quadrature, weights, and norm primitives for the two-species
// Vlasov-Poisson-Landau perturbation solver. Velocity space is a cell-centered
// cube (-V,V)^3 with uniform spacing; position space is a periodic box in 1-3
// dimensions. All velocity quadrature is midpoint rule with weight h^3.

namespace vplk {

using Vec3 = std::array<double, 3>;

double maxwellian(const Vec3& v);  // e^{-|v|^2}

// Cell-centered symmetric velocity lattice: per-axis nodes -V + (j+1/2)h,
// h = 2V/n. The node set is closed under v -> -v and never contains 0, so the
// kernel singularity z = v - v' = 0 occurs only at coincident nodes.
class VelocityGrid {
 public:
  // Throws std::invalid_argument for odd n or V <= 0.
  VelocityGrid(int n_per_axis, double vcut);

  int n() const { return n_; }
  double vcut() const { return vcut_; }
  double h() const { return h_; }
  std::size_t size() const { return static_cast<std::size_t>(n_) * n_ * n_; }
  double cell_weight() const { return h_ * h_ * h_; }

  double axis(int j) const { return axis_[j]; }
  std::size_t index(int i, int j, int k) const {
    return (static_cast<std::size_t>(i) * n_ + j) * n_ + k;
  }
  Vec3 node(std::size_t flat) const {
    int k = static_cast<int>(flat % n_);
    int j = static_cast<int>((flat / n_) % n_);
    int i = static_cast<int>(flat / (static_cast<std::size_t>(n_) * n_));
    return {axis_[i], axis_[j], axis_[k]};
  }
  // Index of -v; the lattice is symmetric so this is an involution.
  std::size_t negate(std::size_t flat) const;

  const std::vector<double>& mu() const { return mu_; }
  const std::vector<double>& sqrt_mu() const { return sqrt_mu_; }

  // Exponential Maxwellian ratios along one axis, used by the conservative
  // one-sided difference operators:
  //   cp[a] = sqrt(mu(v)/mu(v + h e_j)) = exp(+h*axis(a) + h^2/2)
  //   cm[a] = sqrt(mu(v)/mu(v - h e_j)) = exp(-h*axis(a) + h^2/2)
  double cp(int a) const { return cp_[a]; }
  double cm(int a) const { return cm_[a]; }

 private:
  int n_;
  double vcut_, h_;
  std::vector<double> axis_, cp_, cm_;
  std::vector<double> mu_, sqrt_mu_;
};

// Periodic spatial lattice, dim in {1,2,3}, cubic box of side lx, nodes at
// i*lx/n. Fourier wavenumbers are 2*pi*m/lx with m the signed mode index.
class SpatialGrid {
 public:
  SpatialGrid(int dim, int n_per_axis, double lx);

  int dim() const { return dim_; }
  int n() const { return n_; }
  double lx() const { return lx_; }
  double dx() const { return lx_ / n_; }
  std::size_t size() const { return size_; }

  double coord(int i) const { return (lx_ / n_) * i; }
  // Signed mode index for FFT bin i (0..n-1).
  int mode(int i) const { return (i <= n_ / 2) ? i : i - n_; }
  double wavenumber(int i) const { return 2.0 * kPi * mode(i) / lx_; }

  static constexpr double kPi = 3.14159265358979323846;

 private:
  int dim_, n_;
  double lx_;
  std::size_t size_;
};

// Multi-indices for mixed derivatives d^alpha_x d^beta_v.
struct MultiIndex {
  std::array<int, 3> alpha{0, 0, 0};
  std::array<int, 3> beta{0, 0, 0};
  int alpha_order() const { return alpha[0] + alpha[1] + alpha[2]; }
  int beta_order() const { return beta[0] + beta[1] + beta[2]; }
  int order() const { return alpha_order() + beta_order(); }
};

// Velocity weight w(a,b)(v) = e^{q|v|^2/2} <v>^{2(l-a-b)}, <v> = sqrt(1+|v|^2).
// Requires l >= a+b (so w >= 1 for q >= 0).
struct WeightSpec {
  double l = 0.0;
  double q = 0.0;
  int a = 0;
  int b = 0;
};

// Throws std::invalid_argument if spec.l < spec.a + spec.b.
double weight(const WeightSpec& spec, const Vec3& v);
// Tabulates weight^2 at every velocity node.
std::vector<double> weight_sq_table(const WeightSpec& spec, const VelocityGrid& g);

enum class Formulation : std::uint8_t { pm = 0, sd = 1 };

// Two-component phase-space field sampled on (spatial node) x (velocity node),
// velocity index fastest. Component meaning depends on the formulation tag:
// pm = (f_plus, f_minus), sd = (f_1, f_2) with f_1 = f_+ + f_-, f_2 = f_+ - f_-.
struct PhaseField {
  Formulation form = Formulation::sd;
  std::size_t nx = 0;  // total spatial nodes
  std::size_t nv = 0;  // velocity nodes
  std::array<std::vector<double>, 2> comp;

  void resize(Formulation f, std::size_t nx_total, std::size_t nv_total);
  double* slice(int c, std::size_t ix) { return comp[c].data() + ix * nv; }
  const double* slice(int c, std::size_t ix) const { return comp[c].data() + ix * nv; }
  void fill_zero();
};

// Converts between the species and sum/difference representations.
PhaseField to_formulation(const PhaseField& f, Formulation target);

// --- velocity-space primitives (single spatial slice, length grid.size()) ---

// h^3 sum u*g. Throws on length mismatch.
double vel_inner(const VelocityGrid& g, const std::vector<double>& u,
                 const std::vector<double>& w);
double vel_norm(const VelocityGrid& g, const std::vector<double>& u);
// Weighted L^2_v norm with w(spec); w2 must come from weight_sq_table.
double vel_norm_weighted(const VelocityGrid& g, const std::vector<double>& u,
                         const std::vector<double>& w2);

// Centered second-order velocity derivative along axis (0,1,2) with zero
// extension outside the box. Exact for linear functions at interior nodes.
void v_derivative_axis(const VelocityGrid& g, const double* in, double* out, int axis);
// Mixed derivative d^beta; applies centered differences per axis in sequence.
std::vector<double> v_derivative(const VelocityGrid& g, const std::vector<double>& in,
                                 const std::array<int, 3>& beta);

// --- norms over full phase fields ---

// sqrt( dx^d * h^3 * sum f^2 ), optionally with velocity weight table w2.
double phase_l2(const SpatialGrid& sg, const VelocityGrid& vg, const std::vector<double>& f);
double phase_l2_weighted(const SpatialGrid& sg, const VelocityGrid& vg,
                         const std::vector<double>& f, const std::vector<double>& w2);

// L^p norm of a spatial scalar field, p in {2, inf}: 2 uses dx^d quadrature,
// inf is the grid max. Throws for other p.
double lp_x_norm(const SpatialGrid& sg, const std::vector<double>& u, double p);

}  // namespace vplk
