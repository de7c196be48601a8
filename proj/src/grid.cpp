#include "vplk/grid.hpp"

#include <cmath>
#include <stdexcept>

namespace vplk {

double maxwellian(const Vec3& v) {
  return std::exp(-(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]));
}

VelocityGrid::VelocityGrid(int n_per_axis, double vcut)
    : n_(n_per_axis), vcut_(vcut) {
  if (n_per_axis < 2 || n_per_axis % 2 != 0)
    throw std::invalid_argument("velocity grid: n_per_axis must be even and >= 2");
  if (!(vcut > 0.0))
    throw std::invalid_argument("velocity grid: vcut must be positive");
  h_ = 2.0 * vcut_ / n_;
  axis_.resize(n_);
  cp_.resize(n_);
  cm_.resize(n_);
  for (int j = 0; j < n_; ++j) {
    axis_[j] = -vcut_ + (j + 0.5) * h_;
    cp_[j] = std::exp(h_ * axis_[j] + 0.5 * h_ * h_);
    cm_[j] = std::exp(-h_ * axis_[j] + 0.5 * h_ * h_);
  }
  mu_.resize(size());
  sqrt_mu_.resize(size());
  std::size_t idx = 0;
  for (int i = 0; i < n_; ++i)
    for (int j = 0; j < n_; ++j)
      for (int k = 0; k < n_; ++k, ++idx) {
        double r2 = axis_[i] * axis_[i] + axis_[j] * axis_[j] + axis_[k] * axis_[k];
        mu_[idx] = std::exp(-r2);
        sqrt_mu_[idx] = std::exp(-0.5 * r2);
      }
}

std::size_t VelocityGrid::negate(std::size_t flat) const {
  int k = static_cast<int>(flat % n_);
  int j = static_cast<int>((flat / n_) % n_);
  int i = static_cast<int>(flat / (static_cast<std::size_t>(n_) * n_));
  return index(n_ - 1 - i, n_ - 1 - j, n_ - 1 - k);
}

SpatialGrid::SpatialGrid(int dim, int n_per_axis, double lx)
    : dim_(dim), n_(n_per_axis), lx_(lx) {
  if (dim < 1 || dim > 3)
    throw std::invalid_argument("spatial grid: dim must be 1, 2 or 3");
  if (n_per_axis < 2)
    throw std::invalid_argument("spatial grid: n_per_axis must be >= 2");
  if (!(lx > 0.0))
    throw std::invalid_argument("spatial grid: box length must be positive");
  size_ = 1;
  for (int d = 0; d < dim_; ++d) size_ *= static_cast<std::size_t>(n_);
}

double weight(const WeightSpec& spec, const Vec3& v) {
  if (spec.l < spec.a + spec.b)
    throw std::invalid_argument("weight: l must be >= |alpha| + |beta|");
  double r2 = v[0] * v[0] + v[1] * v[1] + v[2] * v[2];
  double bracket = 1.0 + r2;
  return std::exp(0.5 * spec.q * r2) * std::pow(bracket, spec.l - spec.a - spec.b);
}

std::vector<double> weight_sq_table(const WeightSpec& spec, const VelocityGrid& g) {
  if (spec.l < spec.a + spec.b)
    throw std::invalid_argument("weight: l must be >= |alpha| + |beta|");
  std::vector<double> w2(g.size());
  for (std::size_t m = 0; m < g.size(); ++m) {
    double w = weight(spec, g.node(m));
    w2[m] = w * w;
  }
  return w2;
}

void PhaseField::resize(Formulation f, std::size_t nx_total, std::size_t nv_total) {
  form = f;
  nx = nx_total;
  nv = nv_total;
  comp[0].assign(nx * nv, 0.0);
  comp[1].assign(nx * nv, 0.0);
}

void PhaseField::fill_zero() {
  std::fill(comp[0].begin(), comp[0].end(), 0.0);
  std::fill(comp[1].begin(), comp[1].end(), 0.0);
}

PhaseField to_formulation(const PhaseField& f, Formulation target) {
  if (f.form == target) return f;
  PhaseField out;
  out.resize(target, f.nx, f.nv);
  const std::size_t total = f.nx * f.nv;
  if (target == Formulation::sd) {
    // (f+, f-) -> (f+ + f-, f+ - f-)
    for (std::size_t m = 0; m < total; ++m) {
      out.comp[0][m] = f.comp[0][m] + f.comp[1][m];
      out.comp[1][m] = f.comp[0][m] - f.comp[1][m];
    }
  } else {
    // (f1, f2) -> ((f1+f2)/2, (f1-f2)/2)
    for (std::size_t m = 0; m < total; ++m) {
      out.comp[0][m] = 0.5 * (f.comp[0][m] + f.comp[1][m]);
      out.comp[1][m] = 0.5 * (f.comp[0][m] - f.comp[1][m]);
    }
  }
  return out;
}

double vel_inner(const VelocityGrid& g, const std::vector<double>& u,
                 const std::vector<double>& w) {
  if (u.size() != g.size() || w.size() != g.size())
    throw std::invalid_argument("vel_inner: field size does not match grid");
  double s = 0.0;
  for (std::size_t m = 0; m < u.size(); ++m) s += u[m] * w[m];
  return s * g.cell_weight();
}

double vel_norm(const VelocityGrid& g, const std::vector<double>& u) {
  return std::sqrt(vel_inner(g, u, u));
}

double vel_norm_weighted(const VelocityGrid& g, const std::vector<double>& u,
                         const std::vector<double>& w2) {
  if (u.size() != g.size() || w2.size() != g.size())
    throw std::invalid_argument("vel_norm_weighted: field size does not match grid");
  double s = 0.0;
  for (std::size_t m = 0; m < u.size(); ++m) s += w2[m] * u[m] * u[m];
  return std::sqrt(s * g.cell_weight());
}

void v_derivative_axis(const VelocityGrid& g, const double* in, double* out, int axis) {
  const int n = g.n();
  const double inv2h = 1.0 / (2.0 * g.h());
  // strides for (i,j,k) -> (i*n + j)*n + k
  const std::size_t stride[3] = {static_cast<std::size_t>(n) * n,
                                 static_cast<std::size_t>(n), 1};
  const std::size_t st = stride[axis];
  std::size_t idx = 0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k, ++idx) {
        const int a = (axis == 0) ? i : (axis == 1) ? j : k;
        const double up = (a + 1 < n) ? in[idx + st] : 0.0;
        const double dn = (a > 0) ? in[idx - st] : 0.0;
        out[idx] = (up - dn) * inv2h;
      }
}

std::vector<double> v_derivative(const VelocityGrid& g, const std::vector<double>& in,
                                 const std::array<int, 3>& beta) {
  std::vector<double> cur = in;
  std::vector<double> tmp(g.size());
  for (int axis = 0; axis < 3; ++axis)
    for (int rep = 0; rep < beta[axis]; ++rep) {
      v_derivative_axis(g, cur.data(), tmp.data(), axis);
      cur.swap(tmp);
    }
  return cur;
}

double phase_l2(const SpatialGrid& sg, const VelocityGrid& vg, const std::vector<double>& f) {
  double s = 0.0;
  for (double x : f) s += x * x;
  double dxd = 1.0;
  for (int d = 0; d < sg.dim(); ++d) dxd *= sg.dx();
  return std::sqrt(s * dxd * vg.cell_weight());
}

double phase_l2_weighted(const SpatialGrid& sg, const VelocityGrid& vg,
                         const std::vector<double>& f, const std::vector<double>& w2) {
  const std::size_t nv = vg.size();
  const std::size_t nx = f.size() / nv;
  double s = 0.0;
  for (std::size_t ix = 0; ix < nx; ++ix) {
    const double* p = f.data() + ix * nv;
    double part = 0.0;
    for (std::size_t m = 0; m < nv; ++m) part += w2[m] * p[m] * p[m];
    s += part;
  }
  double dxd = 1.0;
  for (int d = 0; d < sg.dim(); ++d) dxd *= sg.dx();
  return std::sqrt(s * dxd * vg.cell_weight());
}

double lp_x_norm(const SpatialGrid& sg, const std::vector<double>& u, double p) {
  if (p == 2.0) {
    double s = 0.0;
    for (double x : u) s += x * x;
    double dxd = 1.0;
    for (int d = 0; d < sg.dim(); ++d) dxd *= sg.dx();
    return std::sqrt(s * dxd);
  }
  if (std::isinf(p)) {
    double m = 0.0;
    for (double x : u) m = std::max(m, std::abs(x));
    return m;
  }
  throw std::invalid_argument("lp_x_norm: only p = 2 and p = inf are supported");
}

}  // namespace vplk
