#include "vplk/landau.hpp"

#include <cmath>
#include <cstring>
#include <limits>
#include <stdexcept>

namespace vplk {

namespace {

constexpr int kGL = 8;
constexpr double kGLNode[kGL] = {
    -0.9602898564975363, -0.7966664774136267, -0.5255324099163290,
    -0.1834346424956498, 0.1834346424956498,  0.5255324099163290,
    0.7966664774136267,  0.9602898564975363};
constexpr double kGLWeight[kGL] = {
    0.1012285362903763, 0.2223810344533745, 0.3137066458778873,
    0.3626837833783620, 0.3626837833783620, 0.3137066458778873,
    0.2223810344533745, 0.1012285362903763};

void add_box_quadrature(const std::array<double, 3>& lo,
                        const std::array<double, 3>& hi, const KernelSpec& spec,
                        Sym3& acc) {
  const double mx = 0.5 * (lo[0] + hi[0]), ex = 0.5 * (hi[0] - lo[0]);
  const double my = 0.5 * (lo[1] + hi[1]), ey = 0.5 * (hi[1] - lo[1]);
  const double mz = 0.5 * (lo[2] + hi[2]), ez = 0.5 * (hi[2] - lo[2]);
  const double jac = ex * ey * ez;
  for (int a = 0; a < kGL; ++a)
    for (int b = 0; b < kGL; ++b)
      for (int c = 0; c < kGL; ++c) {
        const Vec3 z{mx + ex * kGLNode[a], my + ey * kGLNode[b],
                     mz + ez * kGLNode[c]};
        const double w =
            jac * kGLWeight[a] * kGLWeight[b] * kGLWeight[c] * maxwellian(z);
        const Sym3 k = phi_kernel(z, spec);
        for (int q = 0; q < 6; ++q) acc[q] += w * k[q];
      }
}

// Integrate over a box with one corner at the origin by splitting off the
// origin octant dyadically; the |z|^p singularity is integrable, so the
// truncated innermost box contributes O(side^2).
void add_corner_box(std::array<double, 3> lo, std::array<double, 3> hi,
                    const KernelSpec& spec, int depth, Sym3& acc) {
  if (depth == 0) return;
  std::array<double, 3> mid;
  for (int d = 0; d < 3; ++d) mid[d] = 0.5 * (lo[d] + hi[d]);
  // the octant adjacent to the origin corner keeps that corner; which corner
  // it is depends on the sign of the box
  std::array<double, 3> corner;
  for (int d = 0; d < 3; ++d)
    corner[d] = (std::abs(lo[d]) < std::abs(hi[d])) ? lo[d] : hi[d];
  for (int o = 0; o < 8; ++o) {
    std::array<double, 3> olo, ohi;
    bool at_corner = true;
    for (int d = 0; d < 3; ++d) {
      const bool low_half = (o >> d) & 1;
      olo[d] = low_half ? lo[d] : mid[d];
      ohi[d] = low_half ? mid[d] : hi[d];
      const bool touches = (olo[d] == corner[d]) || (ohi[d] == corner[d]);
      at_corner = at_corner && touches;
    }
    if (at_corner)
      add_corner_box(olo, ohi, spec, depth - 1, acc);
    else
      add_box_quadrature(olo, ohi, spec, acc);
  }
}

}  // namespace

Sym3 sigma_origin_quadrature(const VelocityGrid& g, const KernelSpec& spec) {
  Sym3 acc{0, 0, 0, 0, 0, 0};
  const int n = g.n();
  const double h = g.h();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        const std::array<double, 3> lo{g.axis(i) - 0.5 * h, g.axis(j) - 0.5 * h,
                                       g.axis(k) - 0.5 * h};
        const std::array<double, 3> hi{lo[0] + h, lo[1] + h, lo[2] + h};
        const bool corner_cell = (std::abs(lo[0]) < 1e-14 || std::abs(hi[0]) < 1e-14) &&
                                 (std::abs(lo[1]) < 1e-14 || std::abs(hi[1]) < 1e-14) &&
                                 (std::abs(lo[2]) < 1e-14 || std::abs(hi[2]) < 1e-14);
        if (corner_cell)
          add_corner_box(lo, hi, spec, 16, acc);
        else
          add_box_quadrature(lo, hi, spec, acc);
      }
  return acc;
}

SigmaField build_sigma(const VelocityGrid& g, VelocityConvolver& conv) {
  SigmaField s;
  conv.conv6(g.mu().data(), s.comp);
  return s;
}

LandauContext::LandauContext(const VelocityGrid& g, const KernelSpec& spec,
                             ConvMode mode)
    : grid_(&g), spec_(spec), mode_(mode) {
  tables_ = std::make_shared<const KernelTables>(g, spec, mode);
  VelocityConvolver conv(tables_);
  sigma_ = build_sigma(g, conv);
  sigma_.origin = sigma_origin_quadrature(g, spec);
  tp_.resize(g.n());
  tm_.resize(g.n());
  for (int a = 0; a < g.n(); ++a) {
    tp_[a] = 1.0 / g.cp(a);
    tm_[a] = 1.0 / g.cm(a);
  }
}

LandauWorker::LandauWorker(const LandauContext& ctx)
    : ctx_(&ctx), conv_(ctx.tables()), nv_(ctx.grid().size()) {
  s1_.resize(nv_);
  s2_.resize(nv_);
  for (auto& u : u_) u.resize(nv_);
  for (auto& w : w_) w.resize(nv_);
  for (auto& c : c6_) c.resize(nv_);
  for (auto& c : c3_) c.resize(nv_);
}

void LandauWorker::e_apply(const double* g, double* out, int axis, int side) const {
  const VelocityGrid& vg = ctx_->grid();
  const int n = vg.n();
  const double invh = 1.0 / vg.h();
  const std::size_t stride[3] = {static_cast<std::size_t>(n) * n,
                                 static_cast<std::size_t>(n), 1};
  const std::size_t st = stride[axis];
  std::size_t idx = 0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k, ++idx) {
        const int a = (axis == 0) ? i : (axis == 1) ? j : k;
        if (side > 0)
          out[idx] = (a <= n - 2) ? (vg.cp(a) * g[idx + st] - g[idx]) * invh : 0.0;
        else
          out[idx] = (a >= 1) ? (g[idx] - vg.cm(a) * g[idx - st]) * invh : 0.0;
      }
}

void LandauWorker::e_transpose_add(const double* w, double* out, int axis, int side,
                                   double coef) const {
  const VelocityGrid& vg = ctx_->grid();
  const int n = vg.n();
  const double q = coef / vg.h();
  const std::size_t stride[3] = {static_cast<std::size_t>(n) * n,
                                 static_cast<std::size_t>(n), 1};
  const std::size_t st = stride[axis];
  std::size_t idx = 0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k, ++idx) {
        const int a = (axis == 0) ? i : (axis == 1) ? j : k;
        double acc = 0.0;
        if (side > 0) {
          if (a >= 1) acc += vg.cp(a - 1) * w[idx - st];
          if (a <= n - 2) acc -= w[idx];
        } else {
          if (a >= 1) acc += w[idx];
          if (a <= n - 2) acc -= vg.cm(a + 1) * w[idx + st];
        }
        out[idx] += q * acc;
      }
}

void LandauWorker::t_centered(const double* f, double* out, int axis) const {
  const VelocityGrid& vg = ctx_->grid();
  const int n = vg.n();
  const double inv2h = 1.0 / (2.0 * vg.h());
  const std::size_t stride[3] = {static_cast<std::size_t>(n) * n,
                                 static_cast<std::size_t>(n), 1};
  const std::size_t st = stride[axis];
  std::size_t idx = 0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k, ++idx) {
        const int a = (axis == 0) ? i : (axis == 1) ? j : k;
        const double up = (a <= n - 2) ? ctx_->tp(a) * f[idx + st] : 0.0;
        const double dn = (a >= 1) ? ctx_->tm(a) * f[idx - st] : 0.0;
        out[idx] = (up - dn) * inv2h;
      }
}

void LandauWorker::apply_L2(const double* g, double* out) {
  const SigmaField& sg = ctx_->sigma();
  std::memset(out, 0, nv_ * sizeof(double));
  for (int side : {+1, -1}) {
    for (int j = 0; j < 3; ++j) e_apply(g, u_[j].data(), j, side);
    for (int i = 0; i < 3; ++i) {
      double* wi = w_[i].data();
      for (std::size_t m = 0; m < nv_; ++m) {
        wi[m] = sg.comp[sym_index(i, 0)][m] * u_[0][m] +
                sg.comp[sym_index(i, 1)][m] * u_[1][m] +
                sg.comp[sym_index(i, 2)][m] * u_[2][m];
      }
      e_transpose_add(wi, out, i, side, 1.0);
    }
  }
}

void LandauWorker::apply_A_star(const double* g, double* out) {
  apply_L2(g, out);
  for (std::size_t m = 0; m < nv_; ++m) out[m] *= -0.5;
}

void LandauWorker::apply_K_star(const double* g, double* out) {
  const std::vector<double>& smu = ctx_->grid().sqrt_mu();
  std::memset(out, 0, nv_ * sizeof(double));
  for (int side : {+1, -1}) {
    for (int j = 0; j < 3; ++j) {
      e_apply(g, u_[j].data(), j, side);
      for (std::size_t m = 0; m < nv_; ++m) u_[j][m] *= smu[m];
    }
    conv_.contract({u_[0].data(), u_[1].data(), u_[2].data()}, c3_);
    for (int i = 0; i < 3; ++i) {
      for (std::size_t m = 0; m < nv_; ++m) c3_[i][m] *= smu[m];
      e_transpose_add(c3_[i].data(), out, i, side, 0.5);
    }
  }
}

void LandauWorker::apply_L1(const double* g, double* out) {
  apply_K_star(g, s1_.data());
  apply_L2(g, out);
  for (std::size_t m = 0; m < nv_; ++m) out[m] -= 2.0 * s1_[m];
}

void LandauWorker::apply_L_pair(const double* gp, const double* gm, double* outp,
                                double* outm) {
  for (std::size_t m = 0; m < nv_; ++m) s2_[m] = gp[m] + gm[m];
  apply_K_star(s2_.data(), s1_.data());
  apply_L2(gp, outp);
  for (std::size_t m = 0; m < nv_; ++m) outp[m] -= s1_[m];
  apply_L2(gm, outm);
  for (std::size_t m = 0; m < nv_; ++m) outm[m] -= s1_[m];
}

void LandauWorker::gamma_gside(const double* g, GammaGSide& gs) {
  const std::vector<double>& smu = ctx_->grid().sqrt_mu();
  for (std::size_t m = 0; m < nv_; ++m) s1_[m] = smu[m] * g[m];
  conv_.conv6(s1_.data(), gs.A);
  for (int j = 0; j < 3; ++j) {
    t_centered(g, u_[j].data(), j);
    for (std::size_t m = 0; m < nv_; ++m) u_[j][m] *= smu[m];
  }
  conv_.contract({u_[0].data(), u_[1].data(), u_[2].data()}, gs.B);
}

void LandauWorker::gamma_apply(const GammaGSide& gs, const double* h, double* out) {
  for (int j = 0; j < 3; ++j) t_centered(h, u_[j].data(), j);
  for (int i = 0; i < 3; ++i) {
    double* wi = w_[i].data();
    for (std::size_t m = 0; m < nv_; ++m) {
      wi[m] = gs.A[sym_index(i, 0)][m] * u_[0][m] +
              gs.A[sym_index(i, 1)][m] * u_[1][m] +
              gs.A[sym_index(i, 2)][m] * u_[2][m] - h[m] * gs.B[i][m];
    }
  }
  std::memset(out, 0, nv_ * sizeof(double));
  for (int i = 0; i < 3; ++i) {
    e_transpose_add(w_[i].data(), out, i, +1, -0.5);
    e_transpose_add(w_[i].data(), out, i, -1, -0.5);
  }
}

void LandauWorker::apply_Gamma_star(const double* g, const double* h, double* out) {
  GammaGSide gs;
  gamma_gside(g, gs);
  gamma_apply(gs, h, out);
}

namespace {

double pair_inner(const VelocityGrid& g, const std::vector<double>& a,
                  const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t m = 0; m < a.size(); ++m) s += a[m] * b[m];
  return s * g.cell_weight();
}

}  // namespace

NullBasis build_null_basis(const VelocityGrid& g) {
  const std::size_t N = g.size();
  const std::vector<double>& smu = g.sqrt_mu();

  std::vector<std::vector<double>> raw_pair;
  // (sqrt mu, 0), (0, sqrt mu), (v_k sqrt mu)(1,1), (|v|^2 sqrt mu)(1,1)
  {
    std::vector<double> b(2 * N, 0.0);
    for (std::size_t m = 0; m < N; ++m) b[m] = smu[m];
    raw_pair.push_back(b);
  }
  {
    std::vector<double> b(2 * N, 0.0);
    for (std::size_t m = 0; m < N; ++m) b[N + m] = smu[m];
    raw_pair.push_back(b);
  }
  for (int k = 0; k < 3; ++k) {
    std::vector<double> b(2 * N);
    for (std::size_t m = 0; m < N; ++m) {
      const double x = g.node(m)[k] * smu[m];
      b[m] = x;
      b[N + m] = x;
    }
    raw_pair.push_back(b);
  }
  {
    std::vector<double> b(2 * N);
    for (std::size_t m = 0; m < N; ++m) {
      const Vec3 v = g.node(m);
      const double x = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]) * smu[m];
      b[m] = x;
      b[N + m] = x;
    }
    raw_pair.push_back(b);
  }

  std::vector<std::vector<double>> raw1;
  raw1.push_back(std::vector<double>(smu));
  for (int k = 0; k < 3; ++k) {
    std::vector<double> b(N);
    for (std::size_t m = 0; m < N; ++m) b[m] = g.node(m)[k] * smu[m];
    raw1.push_back(b);
  }
  {
    std::vector<double> b(N);
    for (std::size_t m = 0; m < N; ++m) {
      const Vec3 v = g.node(m);
      b[m] = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]) * smu[m];
    }
    raw1.push_back(b);
  }

  NullBasis out;

  auto mgs = [&](std::vector<std::vector<double>>& vecs) {
    for (std::size_t i = 0; i < vecs.size(); ++i) {
      for (std::size_t j = 0; j < i; ++j) {
        const double c = pair_inner(g, vecs[j], vecs[i]);
        for (std::size_t m = 0; m < vecs[i].size(); ++m)
          vecs[i][m] -= c * vecs[j][m];
      }
      const double nrm = std::sqrt(pair_inner(g, vecs[i], vecs[i]));
      for (auto& x : vecs[i]) x /= nrm;
    }
  };

  mgs(raw_pair);
  out.pair = std::move(raw_pair);
  mgs(raw1);
  out.single1 = std::move(raw1);
  {
    std::vector<std::vector<double>> raw2;
    raw2.push_back(std::vector<double>(smu));
    mgs(raw2);
    out.single2 = std::move(raw2);
  }

  double defect = 0.0;
  auto gram = [&](const std::vector<std::vector<double>>& vecs) {
    for (std::size_t i = 0; i < vecs.size(); ++i)
      for (std::size_t j = 0; j <= i; ++j) {
        const double gij = pair_inner(g, vecs[i], vecs[j]);
        defect = std::max(defect, std::abs(gij - (i == j ? 1.0 : 0.0)));
      }
  };
  gram(out.pair);
  gram(out.single1);
  gram(out.single2);
  out.gram_defect = defect;
  return out;
}

namespace {

std::vector<double> project_span(const std::vector<std::vector<double>>& basis,
                                 const VelocityGrid& g,
                                 const std::vector<double>& f) {
  std::vector<double> hydro(f.size(), 0.0);
  for (const auto& b : basis) {
    const double c = pair_inner(g, b, f);
    for (std::size_t m = 0; m < f.size(); ++m) hydro[m] += c * b[m];
  }
  return hydro;
}

}  // namespace

std::vector<double> project_P1(const NullBasis& b, const VelocityGrid& g,
                               const std::vector<double>& f) {
  return project_span(b.single1, g, f);
}

std::vector<double> project_P2(const NullBasis& b, const VelocityGrid& g,
                               const std::vector<double>& f) {
  return project_span(b.single2, g, f);
}

void project_P_pair(const NullBasis& b, const VelocityGrid& g, const double* fp,
                    const double* fm, double* hp, double* hm) {
  const std::size_t N = g.size();
  std::vector<double> f(2 * N);
  std::memcpy(f.data(), fp, N * sizeof(double));
  std::memcpy(f.data() + N, fm, N * sizeof(double));
  std::vector<double> h = project_span(b.pair, g, f);
  std::memcpy(hp, h.data(), N * sizeof(double));
  std::memcpy(hm, h.data() + N, N * sizeof(double));
}

double sigma_norm_sq(const VelocityGrid& g, const SigmaField& sigma,
                     const WeightSpec& w, const std::vector<double>& f) {
  const std::size_t N = g.size();
  std::array<std::vector<double>, 3> df;
  for (int a = 0; a < 3; ++a) {
    df[a].resize(N);
    v_derivative_axis(g, f.data(), df[a].data(), a);
  }
  double acc = 0.0;
  for (std::size_t m = 0; m < N; ++m) {
    const Vec3 v = g.node(m);
    const double ww = weight(w, v);
    const Sym3 s = sigma.at(m);
    const Vec3 d{df[0][m], df[1][m], df[2][m]};
    const Vec3 sd = sym_apply(s, d);
    const Vec3 sv = sym_apply(s, v);
    const double quad = d[0] * sd[0] + d[1] * sd[1] + d[2] * sd[2];
    const double vterm = (v[0] * sv[0] + v[1] * sv[1] + v[2] * sv[2]) * f[m] * f[m];
    acc += ww * ww * (quad + vterm);
  }
  return acc * g.cell_weight();
}

double sigma_norm(const VelocityGrid& g, const SigmaField& sigma,
                  const WeightSpec& w, const std::vector<double>& f) {
  return std::sqrt(sigma_norm_sq(g, sigma, w, f));
}

namespace {

// Random element of a fixed smooth family: polynomials of total degree at
// most four times sqrt(mu), 35 coefficients drawn in a fixed order. Draws
// with a common seed evaluate the same test functions on every grid, so a
// refinement study of the sampled minimum moves only the quadrature.
void coercivity_sample(const VelocityGrid& g, Rng& rng, std::vector<double>& out) {
  std::array<double, 35> c;
  for (auto& x : c) x = rng.gaussian();
  const std::vector<double>& smu = g.sqrt_mu();
  const std::size_t N = g.size();
  for (std::size_t m = 0; m < N; ++m) {
    const Vec3 v = g.node(m);
    double px[5], py[5], pz[5];
    px[0] = py[0] = pz[0] = 1.0;
    for (int t = 1; t <= 4; ++t) {
      px[t] = px[t - 1] * v[0];
      py[t] = py[t - 1] * v[1];
      pz[t] = pz[t - 1] * v[2];
    }
    double acc = 0.0;
    std::size_t idx = 0;
    for (int d = 0; d <= 4; ++d)
      for (int i = 0; i <= d; ++i)
        for (int j = 0; i + j <= d; ++j) acc += c[idx++] * px[i] * py[j] * pz[d - i - j];
    out[m] = acc * smu[m];
  }
}

}  // namespace

CoercivityReport coercivity_constant(LandauWorker& w, const NullBasis& basis,
                                     int n_samples, Rng& rng) {
  const VelocityGrid& g = w.context().grid();
  const SigmaField& sigma = w.context().sigma();
  const std::size_t N = g.size();
  const WeightSpec unw{};
  CoercivityReport rep;
  rep.c_pair = rep.c_L1 = rep.c_L2 = std::numeric_limits<double>::infinity();

  std::vector<double> gp(N), gm(N), op(N), om(N), hp(N), hm(N), mic(N);
  for (int s = 0; s < n_samples; ++s) {
    // pair operator
    coercivity_sample(g, rng, gp);
    coercivity_sample(g, rng, gm);
    w.apply_L_pair(gp.data(), gm.data(), op.data(), om.data());
    double q = 0.0;
    for (std::size_t m = 0; m < N; ++m) q += op[m] * gp[m] + om[m] * gm[m];
    q *= g.cell_weight();
    project_P_pair(basis, g, gp.data(), gm.data(), hp.data(), hm.data());
    double d = 0.0;
    for (std::size_t m = 0; m < N; ++m) mic[m] = gp[m] - hp[m];
    d += sigma_norm_sq(g, sigma, unw, mic);
    for (std::size_t m = 0; m < N; ++m) mic[m] = gm[m] - hm[m];
    d += sigma_norm_sq(g, sigma, unw, mic);
    if (std::sqrt(d) < 1e-12)
      ++rep.skipped;
    else
      rep.c_pair = std::min(rep.c_pair, q / d);

    // L1
    coercivity_sample(g, rng, gp);
    w.apply_L1(gp.data(), op.data());
    q = 0.0;
    for (std::size_t m = 0; m < N; ++m) q += op[m] * gp[m];
    q *= g.cell_weight();
    std::vector<double> h1 = project_P1(basis, g, gp);
    for (std::size_t m = 0; m < N; ++m) mic[m] = gp[m] - h1[m];
    d = sigma_norm_sq(g, sigma, unw, mic);
    if (std::sqrt(d) < 1e-12)
      ++rep.skipped;
    else
      rep.c_L1 = std::min(rep.c_L1, q / d);

    // L2
    coercivity_sample(g, rng, gp);
    w.apply_L2(gp.data(), op.data());
    q = 0.0;
    for (std::size_t m = 0; m < N; ++m) q += op[m] * gp[m];
    q *= g.cell_weight();
    std::vector<double> h2 = project_P2(basis, g, gp);
    for (std::size_t m = 0; m < N; ++m) mic[m] = gp[m] - h2[m];
    d = sigma_norm_sq(g, sigma, unw, mic);
    if (std::sqrt(d) < 1e-12)
      ++rep.skipped;
    else
      rep.c_L2 = std::min(rep.c_L2, q / d);
  }
  return rep;
}

double gamma_ratio_estimate(LandauWorker& w, int n_samples, Rng& rng) {
  const VelocityGrid& g = w.context().grid();
  const SigmaField& sigma = w.context().sigma();
  const std::size_t N = g.size();
  const WeightSpec unw{};
  std::vector<double> ga(N), hb(N), kc(N), out(N);
  double sup = 0.0;
  for (int s = 0; s < n_samples; ++s) {
    for (auto& x : ga) x = rng.gaussian();
    for (auto& x : hb) x = rng.gaussian();
    for (auto& x : kc) x = rng.gaussian();
    w.apply_Gamma_star(ga.data(), hb.data(), out.data());
    double num = 0.0;
    for (std::size_t m = 0; m < N; ++m) num += out[m] * kc[m];
    num = std::abs(num) * g.cell_weight();
    double gq = 0.0;
    for (std::size_t m = 0; m < N; ++m) {
      const double mq = std::sqrt(g.sqrt_mu()[m]);
      gq += mq * mq * ga[m] * ga[m];
    }
    gq = std::sqrt(gq * g.cell_weight());
    const double den =
        gq * sigma_norm(g, sigma, unw, hb) * sigma_norm(g, sigma, unw, kc);
    if (den > 0.0) sup = std::max(sup, num / den);
  }
  return sup;
}

}  // namespace vplk
