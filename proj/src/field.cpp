#include "vplk/field.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace vplk {

FieldSolver::FieldSolver(const SpatialGrid& sg, const VelocityGrid& vg,
                         SpectralWorkspace& ws)
    : sg_(sg), vg_(vg), ws_(ws) {
  const auto& smu = vg_.sqrt_mu();
  for (int k = 0; k < 3; ++k) v_sqrt_mu_[k].resize(vg_.size());
  for (std::size_t a = 0; a < vg_.size(); ++a) {
    Vec3 v = vg_.node(a);
    for (int k = 0; k < 3; ++k) v_sqrt_mu_[k][a] = v[k] * smu[a];
  }
}

void FieldSolver::moments(const std::vector<double>& f2, std::vector<double>& rho,
                          std::array<std::vector<double>, 3>& J) const {
  const std::size_t nv = vg_.size();
  const std::size_t nx = sg_.size();
  if (f2.size() != nx * nv) throw std::invalid_argument("moments: f2 length mismatch");
  rho.assign(nx, 0.0);
  for (int k = 0; k < 3; ++k) J[k].assign(nx, 0.0);
  const double w = vg_.cell_weight();
  const auto& smu = vg_.sqrt_mu();
  const double* t0 = v_sqrt_mu_[0].data();
  const double* t1 = v_sqrt_mu_[1].data();
  const double* t2 = v_sqrt_mu_[2].data();
#pragma omp parallel for schedule(static)
  for (long ix = 0; ix < static_cast<long>(nx); ++ix) {
    const double* s = f2.data() + static_cast<std::size_t>(ix) * nv;
    double r = 0.0, j0 = 0.0, j1 = 0.0, j2 = 0.0;
    for (std::size_t a = 0; a < nv; ++a) {
      r += smu[a] * s[a];
      j0 += t0[a] * s[a];
      j1 += t1[a] * s[a];
      j2 += t2[a] * s[a];
    }
    rho[ix] = w * r;
    J[0][ix] = w * j0;
    J[1][ix] = w * j1;
    J[2][ix] = w * j2;
  }
}

std::vector<double> FieldSolver::poisson(const std::vector<double>& rho) const {
  std::vector<double> phi = ws_.poisson_solve(rho);

  double mean = 0.0;
  for (double r : rho) mean += r;
  mean /= static_cast<double>(rho.size());

  std::vector<double> minus_lap(rho.size(), 0.0);
  for (int d = 0; d < sg_.dim(); ++d) {
    std::array<int, 3> alpha{0, 0, 0};
    alpha[d] = 2;
    auto dd = ws_.x_derivative(phi, alpha);
    for (std::size_t i = 0; i < minus_lap.size(); ++i) minus_lap[i] -= dd[i];
  }
  std::vector<double> res(rho.size());
  for (std::size_t i = 0; i < res.size(); ++i) res[i] = minus_lap[i] - (rho[i] - mean);
  const double rnorm = lp_x_norm(sg_, res, 2.0);
  const double scale = std::max(1.0, lp_x_norm(sg_, rho, 2.0));
  if (rnorm > kResidualTol * scale) {
    char msg[128];
    std::snprintf(msg, sizeof msg, "poisson residual %.3e exceeds %.3e", rnorm,
                  kResidualTol * scale);
    throw std::runtime_error(msg);
  }
  return phi;
}

void FieldSolver::update(FieldState& fs, const std::vector<double>& f2) const {
  moments(f2, fs.rho, fs.J);
  fs.phi = poisson(fs.rho);
}

std::vector<double> FieldSolver::dt_phi(const std::array<std::vector<double>, 3>& J) const {
  return ws_.dt_potential(J);
}

double FieldSolver::continuity_residual(const FieldState& a, const FieldState& b,
                                        double dt) const {
  if (dt <= 0.0) throw std::invalid_argument("continuity_residual: dt must be positive");
  const std::size_t nx = sg_.size();
  std::vector<double> res(nx);
  for (std::size_t i = 0; i < nx; ++i) res[i] = (b.rho[i] - a.rho[i]) / dt;
  std::vector<double> jmid(nx);
  for (int d = 0; d < sg_.dim(); ++d) {
    for (std::size_t i = 0; i < nx; ++i) jmid[i] = 0.5 * (a.J[d][i] + b.J[d][i]);
    auto dj = ws_.x_derivative_axis(jmid, d);
    for (std::size_t i = 0; i < nx; ++i) res[i] += dj[i];
  }
  return lp_x_norm(sg_, res, 2.0);
}

FieldNorms FieldSolver::norms(const FieldState& fs, const std::vector<double>& f2) const {
  FieldNorms out;
  out.grad_phi_l2 = ws_.grad_l2(fs.phi);

  auto g = ws_.gradient(fs.phi);
  for (std::size_t i = 0; i < sg_.size(); ++i) {
    double m2 = 0.0;
    for (int d = 0; d < sg_.dim(); ++d) m2 += g[d][i] * g[d][i];
    out.grad_phi_linf = std::max(out.grad_phi_linf, std::sqrt(m2));
  }

  auto dphi = ws_.dt_potential(fs.J);
  for (double x : dphi) out.dt_phi_linf = std::max(out.dt_phi_linf, std::abs(x));

  const double l2f2 = phase_l2(sg_, vg_, f2);
  double grad_sq = 0.0;
  std::vector<double> buf(f2.size());
  for (int d = 0; d < sg_.dim(); ++d) {
    ws_.x_derivative_batched(f2.data(), buf.data(), vg_.size(), d);
    const double nd = phase_l2(sg_, vg_, buf);
    grad_sq += nd * nd;
  }
  const double den = l2f2 + std::sqrt(grad_sq);
  out.elliptic_ratio = den > 0.0 ? out.grad_phi_linf / den : 0.0;
  return out;
}

}  // namespace vplk
