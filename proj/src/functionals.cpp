#include "vplk/functionals.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>

namespace vplk {

namespace {

void enum_rec(int axes, int remaining, int pos, std::array<int, 3>& cur,
              std::vector<std::array<int, 3>>& out) {
  if (pos == axes - 1) {
    cur[pos] = remaining;
    out.push_back(cur);
    return;
  }
  for (int v = remaining; v >= 0; --v) {
    cur[pos] = v;
    enum_rec(axes, remaining - v, pos + 1, cur, out);
  }
}

// all multi-indices with |alpha| = k over the first `axes` slots
std::vector<std::array<int, 3>> multi_indices(int axes, int k) {
  std::vector<std::array<int, 3>> out;
  std::array<int, 3> cur{0, 0, 0};
  enum_rec(axes, k, 0, cur, out);
  return out;
}

const std::array<int, 3> kNoBeta{0, 0, 0};

}  // namespace

Functionals::Functionals(const SpatialGrid& sg, const VelocityGrid& vg,
                         SpectralWorkspace& ws, const SigmaField& sigma,
                         const NullBasis& basis)
    : sg_(sg), vg_(vg), ws_(ws), sigma_(sigma), basis_(basis) {}

std::vector<double> Functionals::derivative(const std::vector<double>& u,
                                            const std::array<int, 3>& alpha,
                                            const std::array<int, 3>& beta) {
  const std::size_t nv = vg_.size();
  std::vector<double> cur = u, tmp(u.size());
  for (int ax = 0; ax < sg_.dim(); ++ax)
    for (int r = 0; r < alpha[ax]; ++r) {
      ws_.x_derivative_batched(cur.data(), tmp.data(), nv, ax);
      cur.swap(tmp);
    }
  if (beta[0] > 0 || beta[1] > 0 || beta[2] > 0) {
    std::vector<double> a(nv), b(nv);
    for (std::size_t ix = 0; ix < sg_.size(); ++ix) {
      double* slice = cur.data() + ix * nv;
      std::copy(slice, slice + nv, a.begin());
      for (int ax = 0; ax < 3; ++ax)
        for (int r = 0; r < beta[ax]; ++r) {
          v_derivative_axis(vg_, a.data(), b.data(), ax);
          a.swap(b);
        }
      std::copy(a.begin(), a.end(), slice);
    }
  }
  return cur;
}

double Functionals::phase_sigma_sq(const std::vector<double>& u, const WeightSpec& w) {
  const std::size_t nv = vg_.size();
  std::vector<double> slice(nv);
  double acc = 0.0;
  for (std::size_t ix = 0; ix < sg_.size(); ++ix) {
    std::copy(u.data() + ix * nv, u.data() + (ix + 1) * nv, slice.begin());
    acc += sigma_norm_sq(vg_, sigma_, w, slice);
  }
  return std::pow(sg_.dx(), sg_.dim()) * acc;
}

void Functionals::split_pair(const PhaseField& pm, PhaseField& macro,
                             PhaseField& micro) const {
  const std::size_t nv = vg_.size();
  macro.resize(Formulation::pm, pm.nx, nv);
  micro.resize(Formulation::pm, pm.nx, nv);
  for (std::size_t ix = 0; ix < pm.nx; ++ix) {
    project_P_pair(basis_, vg_, pm.slice(0, ix), pm.slice(1, ix),
                   macro.slice(0, ix), macro.slice(1, ix));
    for (int c = 0; c < 2; ++c) {
      const double* f = pm.slice(c, ix);
      const double* p = macro.slice(c, ix);
      double* r = micro.slice(c, ix);
      for (std::size_t a = 0; a < nv; ++a) r[a] = f[a] - p[a];
    }
  }
}

double Functionals::energy(int m, double l, double q, const PhaseField& f,
                           const std::vector<double>& phi) {
  if (m < 0 || l < m) throw std::invalid_argument("energy: requires l >= m >= 0");
  PhaseField conv;
  const PhaseField* g = &f;
  if (f.form != Formulation::pm) {
    conv = to_formulation(f, Formulation::pm);
    g = &conv;
  }
  double acc = 0.0;
  for (int k = 0; k <= m; ++k) {
    auto w2 = weight_sq_table(WeightSpec{l, q, k, 0}, vg_);
    for (int ka = 0; ka <= k; ++ka) {
      for (const auto& alpha : multi_indices(sg_.dim(), ka))
        for (const auto& beta : multi_indices(3, k - ka))
          for (int c = 0; c < 2; ++c) {
            auto du = derivative(g->comp[c], alpha, beta);
            const double nn = phase_l2_weighted(sg_, vg_, du, w2);
            acc += nn * nn;
          }
    }
  }
  const double gp = ws_.grad_l2(phi);
  return acc + gp * gp;
}

double Functionals::dissipation(int m, double l, double q, const PhaseField& f,
                                const std::vector<double>& phi,
                                DissipationVariant variant) {
  if (m < 0 || l < m) throw std::invalid_argument("dissipation: requires l >= m >= 0");
  PhaseField conv;
  const PhaseField* g = &f;
  if (f.form != Formulation::pm) {
    conv = to_formulation(f, Formulation::pm);
    g = &conv;
  }
  PhaseField macro, micro;
  split_pair(*g, macro, micro);

  double base = 0.0;
  for (int k = 0; k <= m; ++k) {
    const WeightSpec spec{l, q, k, 0};
    for (int ka = 0; ka <= k; ++ka) {
      for (const auto& alpha : multi_indices(sg_.dim(), ka))
        for (const auto& beta : multi_indices(3, k - ka))
          for (int c = 0; c < 2; ++c)
            base += phase_sigma_sq(derivative(micro.comp[c], alpha, beta), spec);
    }
  }
  for (int k = 1; k <= m; ++k)
    for (const auto& alpha : multi_indices(sg_.dim(), k))
      for (int c = 0; c < 2; ++c) {
        const double nn = phase_l2(sg_, vg_, derivative(macro.comp[c], alpha, kNoBeta));
        base += nn * nn;
      }
  const double gp = ws_.grad_l2(phi);
  base += gp * gp;

  std::vector<double> f2(g->comp[0].size());
  for (std::size_t i = 0; i < f2.size(); ++i) f2[i] = g->comp[0][i] - g->comp[1][i];
  const double df = phase_l2(sg_, vg_, f2);

  switch (variant) {
    case DissipationVariant::full:
      return base + df * df;
    case DissipationVariant::tilde:
      return base;
    case DissipationVariant::overline: {
      double pn = 0.0;
      for (int c = 0; c < 2; ++c) {
        const double nn = phase_l2(sg_, vg_, macro.comp[c]);
        pn += nn * nn;
      }
      return base + pn;
    }
  }
  return base;
}

double Functionals::e0l_f2(int ell, const std::vector<double>& f2,
                           const std::vector<double>& phi) {
  if (ell < 0) throw std::invalid_argument("e0l_f2: ell must be nonnegative");
  double acc = 0.0;
  for (int k = 0; k <= ell; ++k) acc += grad_k_sq(k, f2);
  const double gp = ws_.grad_l2(phi);
  return acc + gp * gp;
}

double Functionals::elm_f1(int ell, int m, const std::vector<double>& f1) {
  if (ell < 0 || m < ell) throw std::invalid_argument("elm_f1: requires 0 <= ell <= m");
  double acc = 0.0;
  for (int k = ell; k <= m; ++k) acc += grad_k_sq(k, f1);
  return acc;
}

double Functionals::ledger_dissipation(int ell, const std::vector<double>& f2,
                                       const std::vector<double>& phi) {
  if (ell < 0) throw std::invalid_argument("ledger_dissipation: ell must be nonnegative");
  const WeightSpec unit{0.0, 0.0, 0, 0};
  double acc = 0.0;
  for (int k = 0; k <= ell; ++k)
    for (const auto& alpha : multi_indices(sg_.dim(), k))
      acc += phase_sigma_sq(derivative(f2, alpha, kNoBeta), unit);
  const double gp = ws_.grad_l2(phi);
  return acc + gp * gp;
}

MacroMicroRecord Functionals::macro_micro(int m, const PhaseField& f) {
  if (m < 0) throw std::invalid_argument("macro_micro: m must be nonnegative");
  PhaseField conv;
  const PhaseField* g = &f;
  if (f.form != Formulation::pm) {
    conv = to_formulation(f, Formulation::pm);
    g = &conv;
  }
  PhaseField macro, micro;
  split_pair(*g, macro, micro);

  MacroMicroRecord rec;
  rec.hydro.assign(m + 1, 0.0);
  rec.micro.assign(m + 1, 0.0);
  const WeightSpec unit{0.0, 0.0, 0, 0};
  for (int k = 0; k <= m; ++k) {
    double h = 0.0, s = 0.0;
    for (const auto& alpha : multi_indices(sg_.dim(), k))
      for (int c = 0; c < 2; ++c) {
        const double nn = phase_l2(sg_, vg_, derivative(macro.comp[c], alpha, kNoBeta));
        h += nn * nn;
        s += phase_sigma_sq(derivative(micro.comp[c], alpha, kNoBeta), unit);
      }
    rec.hydro[k] = std::sqrt(h);
    rec.micro[k] = std::sqrt(s);
  }

  double nf = 0.0, nmac = 0.0, nmic = 0.0;
  for (int c = 0; c < 2; ++c) {
    double a = phase_l2(sg_, vg_, g->comp[c]);
    double b = phase_l2(sg_, vg_, macro.comp[c]);
    double d = phase_l2(sg_, vg_, micro.comp[c]);
    nf += a * a;
    nmac += b * b;
    nmic += d * d;
  }
  rec.pyth_defect = std::abs(nf - nmac - nmic);
  return rec;
}

double Functionals::grad_k_sq(int k, const std::vector<double>& u) {
  double acc = 0.0;
  for (const auto& alpha : multi_indices(sg_.dim(), k)) {
    const double nn = phase_l2(sg_, vg_, derivative(u, alpha, kNoBeta));
    acc += nn * nn;
  }
  return acc;
}

double Functionals::micro_f1_l2(const std::vector<double>& f1) {
  const std::size_t nv = vg_.size();
  std::vector<double> slice(nv);
  double acc = 0.0;
  for (std::size_t ix = 0; ix < sg_.size(); ++ix) {
    std::copy(f1.data() + ix * nv, f1.data() + (ix + 1) * nv, slice.begin());
    auto p = project_P1(basis_, vg_, slice);
    for (std::size_t a = 0; a < nv; ++a) {
      const double r = slice[a] - p[a];
      acc += r * r;
    }
  }
  return std::sqrt(std::pow(sg_.dx(), sg_.dim()) * vg_.cell_weight() * acc);
}

std::vector<LedgerRecord> monotone_ledger(const std::vector<double>& times,
                                          const std::vector<double>& e0l,
                                          const std::vector<double>& diss,
                                          double violation_tol) {
  if (times.size() != e0l.size() || times.size() != diss.size())
    throw std::invalid_argument("monotone_ledger: series lengths differ");
  if (times.size() < 2)
    throw std::invalid_argument("monotone_ledger: need at least two samples");
  const double dt = times[1] - times[0];
  if (dt <= 0.0) throw std::invalid_argument("monotone_ledger: times not increasing");
  for (std::size_t i = 1; i + 1 < times.size(); ++i)
    if (std::abs(times[i + 1] - times[i] - dt) > 1e-9 * dt)
      throw std::invalid_argument("monotone_ledger: nonuniform sample spacing");

  std::vector<LedgerRecord> out;
  out.reserve(times.size() - 1);
  for (std::size_t i = 0; i + 1 < times.size(); ++i) {
    LedgerRecord r;
    r.t = times[i + 1];
    r.value = (e0l[i + 1] - e0l[i]) / dt + 0.5 * (diss[i] + diss[i + 1]);
    r.scale = e0l[i];
    r.flag = r.value > violation_tol * r.scale;
    out.push_back(r);
  }
  return out;
}

DecayFit fit_decay(const std::vector<double>& t, const std::vector<double>& y,
                   DecayModel model, double t0_frac, double stretch_power) {
  if (t.size() != y.size()) throw std::invalid_argument("fit_decay: length mismatch");
  if (t.size() < 2) throw std::invalid_argument("fit_decay: series too short");
  const double t_lo = t.front() + t0_frac * (t.back() - t.front());

  std::vector<double> xs, zs;
  double t_first = 0.0, t_last = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i] < t_lo) continue;
    if (y[i] <= 0.0)
      throw std::domain_error("fit_decay: non-positive value inside the fit window");
    xs.push_back(model == DecayModel::power ? std::log1p(t[i])
                                            : std::pow(t[i], stretch_power));
    zs.push_back(std::log(y[i]));
    if (xs.size() == 1) t_first = t[i];
    t_last = t[i];
  }
  if (xs.size() < 10)
    throw std::invalid_argument("fit_decay: fewer than 10 samples in the fit window");

  const double n = static_cast<double>(xs.size());
  double sx = 0.0, sz = 0.0, sxx = 0.0, sxz = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sz += zs[i];
    sxx += xs[i] * xs[i];
    sxz += xs[i] * zs[i];
  }
  const double den = n * sxx - sx * sx;
  if (den <= 0.0) throw std::invalid_argument("fit_decay: degenerate abscissae");
  const double slope = (n * sxz - sx * sz) / den;
  const double inter = (sz - slope * sx) / n;

  double rss = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double r = zs[i] - (inter + slope * xs[i]);
    rss += r * r;
  }

  DecayFit fit;
  fit.model = model;
  fit.amplitude = std::exp(inter);
  fit.stretch_power = stretch_power;
  if (model == DecayModel::power)
    fit.exponent = slope;
  else
    fit.rate = -slope;
  fit.residual = std::sqrt(rss / n);
  fit.t_lo = t_first;
  fit.t_hi = t_last;
  fit.n_used = static_cast<int>(xs.size());
  return fit;
}

std::vector<InterpLevelReport> moment_interp_check(const VelocityGrid& vg,
                                                   const SigmaField& sigma, double l,
                                                   const std::vector<int>& ell_levels,
                                                   int n_samples, Rng& rng) {
  const std::size_t nv = vg.size();
  std::vector<std::vector<double>> samples;
  samples.reserve(n_samples + 1);
  for (int s = 0; s < n_samples; ++s) samples.push_back(rng.gaussian_vector(nv));
  {
    // concentrated near v = 0, where every <v> weight is close to 1 and the
    // interpolation approaches equality
    std::vector<double> probe(nv);
    for (std::size_t a = 0; a < nv; ++a) {
      Vec3 v = vg.node(a);
      probe[a] = std::exp(-4.0 * (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]));
    }
    samples.push_back(std::move(probe));
  }

  const WeightSpec unit{0.0, 0.0, 0, 0};
  std::vector<InterpLevelReport> out;
  for (int ell : ell_levels) {
    const double d = l - ell;
    if (d <= 0.0)
      throw std::invalid_argument("moment_interp_check: levels must satisfy ell < l");
    InterpLevelReport rep;
    rep.ell = ell;
    rep.theta = 4.0 * d / (4.0 * d + 1.0);

    std::vector<double> w_inv(nv), w_8d(nv), w_4d(nv);
    for (std::size_t a = 0; a < nv; ++a) {
      Vec3 v = vg.node(a);
      const double b = 1.0 + v[0] * v[0] + v[1] * v[1] + v[2] * v[2];
      w_inv[a] = std::pow(b, -0.5);
      w_8d[a] = std::pow(b, 4.0 * d);
      w_4d[a] = std::pow(b, 2.0 * d);
    }

    for (const auto& g : samples) {
      const double n2 = vel_norm(vg, g);
      if (n2 == 0.0) continue;
      const double a_half = vel_norm_weighted(vg, g, w_inv);
      const double b_wide = vel_norm_weighted(vg, g, w_8d);
      const double b_sharp = vel_norm_weighted(vg, g, w_4d);
      const double a_sigma = sigma_norm(vg, sigma, unit, g);
      const double th = rep.theta;
      rep.max_hoelder = std::max(
          rep.max_hoelder, n2 / (std::pow(a_half, th) * std::pow(b_wide, 1.0 - th)));
      rep.max_tight = std::max(
          rep.max_tight, n2 / (std::pow(a_half, th) * std::pow(b_sharp, 1.0 - th)));
      rep.max_sigma = std::max(
          rep.max_sigma, n2 / (std::pow(a_sigma, th) * std::pow(b_wide, 1.0 - th)));
    }
    out.push_back(rep);
  }
  return out;
}

double agmon_constant(int n, double lx, int max_mode, int n_samples,
                      std::uint64_t seed) {
  if (n < 2 || lx <= 0.0 || max_mode < 1 || n_samples < 1)
    throw std::invalid_argument("agmon_constant: bad parameters");
  Rng rng(seed);
  const double two_pi = 2.0 * SpatialGrid::kPi;
  double sup_c = 0.0;
  for (int s = 0; s < n_samples; ++s) {
    std::vector<double> a(max_mode), b(max_mode);
    for (int m = 0; m < max_mode; ++m) {
      a[m] = rng.gaussian();
      b[m] = rng.gaussian();
    }
    double linf = 0.0;
    for (int i = 0; i < n; ++i) {
      const double x = lx * i / n;
      double g = 0.0;
      for (int m = 0; m < max_mode; ++m) {
        const double k = two_pi * (m + 1) / lx;
        g += a[m] * std::cos(k * x) + b[m] * std::sin(k * x);
      }
      linf = std::max(linf, std::abs(g));
    }
    double l2_sq = 0.0, dl2_sq = 0.0;
    for (int m = 0; m < max_mode; ++m) {
      const double k = two_pi * (m + 1) / lx;
      const double p = a[m] * a[m] + b[m] * b[m];
      l2_sq += 0.5 * lx * p;
      dl2_sq += 0.5 * lx * k * k * p;
    }
    if (l2_sq == 0.0 || dl2_sq == 0.0) continue;
    sup_c = std::max(sup_c, linf / std::sqrt(std::sqrt(dl2_sq * l2_sq)));
  }
  return sup_c;
}

}  // namespace vplk
