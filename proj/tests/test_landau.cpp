#include "doctest.h"

#include "vplk/grid.hpp"
#include "vplk/landau.hpp"
#include "vplk/rng.hpp"

#include <cmath>
#include <random>
#include <vector>

using namespace vplk;

namespace {

struct Fixture {
  VelocityGrid grid;
  LandauContext ctx;
  Fixture(int n, double vcut, ConvMode mode) : grid(n, vcut), ctx(grid, KernelSpec{}, mode) {}
};

// Shared contexts; building sigma and the origin quadrature is the slow part.
Fixture& fix8() {
  static Fixture f(8, 4.0, ConvMode::fft);
  return f;
}
Fixture& fix8d() {
  static Fixture f(8, 4.0, ConvMode::direct);
  return f;
}
Fixture& fix16() {
  static Fixture f(16, 6.0, ConvMode::fft);
  return f;
}

std::vector<double> random_field(const VelocityGrid& g, std::uint64_t seed) {
  std::vector<double> u(g.size());
  std::mt19937_64 eng(seed);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  for (auto& y : u) y = uni(eng);
  return u;
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm2(const std::vector<double>& a) { return std::sqrt(dot(a, a)); }

}  // namespace

TEST_CASE("origin quadrature of sigma matches the radial integral") {
  VelocityGrid g(24, 6.0);
  Sym3 s0 = sigma_origin_quadrature(g, KernelSpec{});
  double oracle = 4.1887902047863905 * (1.0 - std::exp(-36.0));  // (4 pi / 3)(1 - e^{-V^2})
  for (int d : {0, 3, 5}) {
    CHECK(s0[d] == doctest::Approx(oracle).epsilon(0.02));
    CHECK(s0[d] == doctest::Approx(oracle).epsilon(1e-4));
  }
  CHECK(std::abs(s0[0] - s0[3]) <= 1e-10);
  CHECK(std::abs(s0[0] - s0[5]) <= 1e-10);
  for (int o : {1, 2, 4}) CHECK(std::abs(s0[o]) <= 1e-10);
}

TEST_CASE("maxwellian ratio tables invert each other") {
  auto& f = fix8();
  for (int a = 0; a < f.grid.n(); ++a) {
    CHECK(f.ctx.tp(a) * f.grid.cp(a) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(f.ctx.tm(a) * f.grid.cm(a) == doctest::Approx(1.0).epsilon(1e-15));
  }
}

TEST_CASE("one-sided derivative operators annihilate the maxwellian root") {
  auto& f = fix8();
  LandauWorker w(f.ctx);
  std::vector<double> out(f.grid.size());
  for (int axis = 0; axis < 3; ++axis)
    for (int side : {+1, -1}) {
      w.e_apply(f.grid.sqrt_mu().data(), out.data(), axis, side);
      double emax = 0.0;
      for (double y : out) emax = std::max(emax, std::abs(y));
      CHECK(emax <= 1e-14);
    }
}

TEST_CASE("one-sided derivative operators mask the outflow layer") {
  auto& f = fix8();
  LandauWorker w(f.ctx);
  std::vector<double> u = random_field(f.grid, 7), out(f.grid.size());
  int n = f.grid.n();
  w.e_apply(u.data(), out.data(), 0, +1);
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k) CHECK(out[f.grid.index(n - 1, j, k)] == 0.0);
  w.e_apply(u.data(), out.data(), 0, -1);
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k) CHECK(out[f.grid.index(0, j, k)] == 0.0);
}

TEST_CASE("transpose of the one-sided operator is the adjoint") {
  auto& f = fix8();
  LandauWorker w(f.ctx);
  std::vector<double> g = random_field(f.grid, 11), u = random_field(f.grid, 12);
  std::vector<double> eg(f.grid.size()), etu(f.grid.size(), 0.0);
  for (int axis = 0; axis < 3; ++axis)
    for (int side : {+1, -1}) {
      w.e_apply(g.data(), eg.data(), axis, side);
      std::fill(etu.begin(), etu.end(), 0.0);
      w.e_transpose_add(u.data(), etu.data(), axis, side, 1.0);
      double lhs = dot(eg, u), rhs = dot(g, etu);
      CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
    }
}

TEST_CASE("collision operators are symmetric") {
  auto& f = fix8();
  LandauWorker w(f.ctx);
  for (int trial = 0; trial < 5; ++trial) {
    std::vector<double> g = random_field(f.grid, 100 + trial);
    std::vector<double> h = random_field(f.grid, 200 + trial);
    std::vector<double> Lg(f.grid.size()), Lh(f.grid.size());

    w.apply_L2(g.data(), Lg.data());
    w.apply_L2(h.data(), Lh.data());
    double sym_scale = norm2(Lg) * norm2(h) + norm2(g) * norm2(Lh);
    CHECK(std::abs(dot(Lg, h) - dot(g, Lh)) <= 1e-12 * sym_scale);

    w.apply_K_star(g.data(), Lg.data());
    w.apply_K_star(h.data(), Lh.data());
    sym_scale = norm2(Lg) * norm2(h) + norm2(g) * norm2(Lh) + 1e-300;
    CHECK(std::abs(dot(Lg, h) - dot(g, Lh)) <= 1e-12 * sym_scale);

    w.apply_L1(g.data(), Lg.data());
    w.apply_L1(h.data(), Lh.data());
    sym_scale = norm2(Lg) * norm2(h) + norm2(g) * norm2(Lh);
    CHECK(std::abs(dot(Lg, h) - dot(g, Lh)) <= 1e-12 * sym_scale);
  }
}

TEST_CASE("single-species operator is A* doubled and negated") {
  auto& f = fix8();
  LandauWorker w(f.ctx);
  std::vector<double> g = random_field(f.grid, 31);
  std::vector<double> l2(f.grid.size()), as(f.grid.size());
  w.apply_L2(g.data(), l2.data());
  w.apply_A_star(g.data(), as.data());
  for (std::size_t m = 0; m < f.grid.size(); ++m)
    CHECK(as[m] == doctest::Approx(-0.5 * l2[m]).epsilon(1e-15));
}

TEST_CASE("linearized operators are positive semidefinite") {
  auto& f = fix8();
  LandauWorker w(f.ctx);
  for (int trial = 0; trial < 8; ++trial) {
    std::vector<double> g = random_field(f.grid, 300 + trial);
    std::vector<double> Lg(f.grid.size());
    double gg = dot(g, g);
    w.apply_L2(g.data(), Lg.data());
    CHECK(dot(Lg, g) >= -1e-12 * gg);
    w.apply_L1(g.data(), Lg.data());
    CHECK(dot(Lg, g) >= -1e-10 * gg);
  }
}

TEST_CASE("pairwise operator reduces to L1 on equal arguments") {
  auto& f = fix8();
  LandauWorker w(f.ctx);
  std::vector<double> g = random_field(f.grid, 44);
  std::vector<double> l1(f.grid.size()), op(f.grid.size()), om(f.grid.size());
  w.apply_L1(g.data(), l1.data());
  w.apply_L_pair(g.data(), g.data(), op.data(), om.data());
  double scale = norm2(l1) + 1e-300;
  for (std::size_t m = 0; m < f.grid.size(); ++m) {
    CHECK(std::abs(op[m] - l1[m]) <= 1e-12 * scale);
    CHECK(std::abs(om[m] - l1[m]) <= 1e-12 * scale);
  }
}

TEST_CASE("pairwise operator is symmetric and positive semidefinite") {
  auto& f = fix8();
  LandauWorker w(f.ctx);
  std::size_t N = f.grid.size();
  for (int trial = 0; trial < 5; ++trial) {
    std::vector<double> gp = random_field(f.grid, 400 + trial), gm = random_field(f.grid, 450 + trial);
    std::vector<double> hp = random_field(f.grid, 500 + trial), hm = random_field(f.grid, 550 + trial);
    std::vector<double> Lgp(N), Lgm(N), Lhp(N), Lhm(N);
    w.apply_L_pair(gp.data(), gm.data(), Lgp.data(), Lgm.data());
    w.apply_L_pair(hp.data(), hm.data(), Lhp.data(), Lhm.data());
    double lhs = dot(Lgp, hp) + dot(Lgm, hm);
    double rhs = dot(gp, Lhp) + dot(gm, Lhm);
    double scale = (norm2(Lgp) + norm2(Lgm)) * (norm2(hp) + norm2(hm)) +
                   (norm2(gp) + norm2(gm)) * (norm2(Lhp) + norm2(Lhm));
    CHECK(std::abs(lhs - rhs) <= 1e-12 * scale);
    double quad = dot(Lgp, gp) + dot(Lgm, gm);
    CHECK(quad >= -1e-10 * (dot(gp, gp) + dot(gm, gm)));
  }
}

TEST_CASE("collision invariants are annihilated on the production grid") {
  auto& f = fix16();
  LandauWorker w(f.ctx);
  std::size_t N = f.grid.size();
  NullBasis basis = build_null_basis(f.grid);

  // Single-species operator: sqrt(mu), v_k sqrt(mu), |v|^2 sqrt(mu).
  for (const auto& b : basis.single1) {
    std::vector<double> Lb(N);
    w.apply_L1(b.data(), Lb.data());
    double res = norm2(Lb) / norm2(b);
    CHECK(res <= 5e-2);
    WARN(res <= 1e-9);
  }
  // Pairwise operator: all six invariant pairs.
  for (const auto& b : basis.pair) {
    std::vector<double> op(N), om(N);
    w.apply_L_pair(b.data(), b.data() + N, op.data(), om.data());
    double res = std::sqrt(dot(op, op) + dot(om, om)) / norm2(b);
    CHECK(res <= 5e-2);
    WARN(res <= 1e-9);
  }
}

TEST_CASE("null residuals shrink under refinement") {
  // Residual on the invariants is a boundary effect; it must not grow as the
  // grid refines at fixed cutoff.
  auto res_at = [](Fixture& f) {
    LandauWorker w(f.ctx);
    NullBasis basis = build_null_basis(f.grid);
    double worst = 0.0;
    for (const auto& b : basis.single1) {
      std::vector<double> Lb(f.grid.size());
      w.apply_L1(b.data(), Lb.data());
      worst = std::max(worst, norm2(Lb) / norm2(b));
    }
    return worst;
  };
  static Fixture f12(12, 6.0, ConvMode::fft);
  double r12 = res_at(f12);
  double r16 = res_at(fix16());
  CHECK(r16 <= std::max(r12, 1e-12));
}

TEST_CASE("bilinear collision term vanishes on zero arguments") {
  auto& f = fix8();
  LandauWorker w(f.ctx);
  std::size_t N = f.grid.size();
  std::vector<double> g = random_field(f.grid, 61), zero(N, 0.0), out(N);
  w.apply_Gamma_star(zero.data(), g.data(), out.data());
  for (double y : out) CHECK(y == 0.0);
  w.apply_Gamma_star(g.data(), zero.data(), out.data());
  for (double y : out) CHECK(y == 0.0);
}

TEST_CASE("bilinear collision term is linear in each argument") {
  auto& f = fix8();
  LandauWorker w(f.ctx);
  std::size_t N = f.grid.size();
  std::vector<double> g = random_field(f.grid, 62), h1 = random_field(f.grid, 63),
                      h2 = random_field(f.grid, 64);
  std::vector<double> combo(N), a(N), b(N), direct(N);
  const double c = 0.7;
  for (std::size_t m = 0; m < N; ++m) combo[m] = c * h1[m] + h2[m];
  LandauWorker::GammaGSide gs;
  w.gamma_gside(g.data(), gs);
  w.gamma_apply(gs, combo.data(), direct.data());
  w.gamma_apply(gs, h1.data(), a.data());
  w.gamma_apply(gs, h2.data(), b.data());
  double scale = norm2(direct) + 1e-300;
  for (std::size_t m = 0; m < N; ++m)
    CHECK(std::abs(direct[m] - (c * a[m] + b[m])) <= 1e-12 * scale);
}

TEST_CASE("bilinear collision term conserves mass momentum and energy") {
  auto& f = fix16();
  LandauWorker w(f.ctx);
  std::size_t N = f.grid.size();
  std::vector<double> mass(N), mom[3], energy(N);
  for (int k = 0; k < 3; ++k) mom[k].resize(N);
  for (std::size_t m = 0; m < N; ++m) {
    Vec3 v = f.grid.node(m);
    double s = f.grid.sqrt_mu()[m];
    mass[m] = s;
    for (int k = 0; k < 3; ++k) mom[k][m] = v[k] * s;
    energy[m] = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]) * s;
  }

  for (int trial = 0; trial < 3; ++trial) {
    std::vector<double> g = random_field(f.grid, 700 + trial);
    std::vector<double> h = random_field(f.grid, 750 + trial);
    std::vector<double> gh(N), hg(N), sum(N);
    w.apply_Gamma_star(g.data(), h.data(), gh.data());
    w.apply_Gamma_star(h.data(), g.data(), hg.data());
    for (std::size_t m = 0; m < N; ++m) sum[m] = gh[m] + hg[m];
    double nG = norm2(gh) + norm2(hg);

    // Mass is conserved term by term.
    double dm = std::abs(dot(gh, mass)) / (norm2(gh) * norm2(mass));
    CHECK(dm <= 1e-6);
    WARN(dm <= 1e-10);

    // Momentum and energy cancel between the two orderings.
    for (int k = 0; k < 3; ++k) {
      double dp = std::abs(dot(sum, mom[k])) / (nG * norm2(mom[k]));
      CHECK(dp <= 1e-6);
      WARN(dp <= 1e-9);
    }
    double de = std::abs(dot(sum, energy)) / (nG * norm2(energy));
    CHECK(de <= 1e-6);
    WARN(de <= 1e-9);
  }
}

TEST_CASE("bilinear collision term preserves velocity parity") {
  auto& f = fix8();
  LandauWorker w(f.ctx);
  std::size_t N = f.grid.size();
  std::vector<double> g = random_field(f.grid, 81), h = random_field(f.grid, 82);
  // Symmetrize both arguments under v -> -v.
  std::vector<double> ge(N), he(N), out(N);
  for (std::size_t m = 0; m < N; ++m) {
    std::size_t mm = f.grid.negate(m);
    ge[m] = g[m] + g[mm];
    he[m] = h[m] + h[mm];
  }
  w.apply_Gamma_star(ge.data(), he.data(), out.data());
  double scale = norm2(out) + 1e-300;
  for (std::size_t m = 0; m < N; ++m)
    CHECK(std::abs(out[m] - out[f.grid.negate(m)]) <= 1e-11 * scale);
}

TEST_CASE("fft and direct collision paths agree") {
  auto& ff = fix8();
  auto& fd = fix8d();
  LandauWorker wf(ff.ctx), wd(fd.ctx);
  std::size_t N = ff.grid.size();
  std::vector<double> g = random_field(ff.grid, 91), h = random_field(ff.grid, 92);
  std::vector<double> af(N), ad(N);

  wf.apply_L1(g.data(), af.data());
  wd.apply_L1(g.data(), ad.data());
  for (std::size_t m = 0; m < N; ++m) CHECK(std::abs(af[m] - ad[m]) <= 1e-10);

  wf.apply_Gamma_star(g.data(), h.data(), af.data());
  wd.apply_Gamma_star(g.data(), h.data(), ad.data());
  for (std::size_t m = 0; m < N; ++m) CHECK(std::abs(af[m] - ad[m]) <= 1e-10);
}

TEST_CASE("null basis is orthonormal and spans the fixed points") {
  auto& f = fix16();
  NullBasis basis = build_null_basis(f.grid);
  CHECK(basis.pair.size() == 6);
  CHECK(basis.single1.size() == 5);
  CHECK(basis.single2.size() == 1);
  CHECK(basis.gram_defect <= 1e-12);

  // sqrt(mu) lies in every span.
  std::vector<double> smu(f.grid.sqrt_mu());
  std::vector<double> p2 = project_P2(basis, f.grid, smu);
  double scale = norm2(smu);
  for (std::size_t m = 0; m < smu.size(); ++m)
    CHECK(std::abs(p2[m] - smu[m]) <= 1e-12 * scale);

  std::vector<double> g = random_field(f.grid, 101);
  std::vector<double> p1 = project_P1(basis, f.grid, g);
  std::vector<double> p1p1 = project_P1(basis, f.grid, p1);
  for (std::size_t m = 0; m < g.size(); ++m)
    CHECK(std::abs(p1p1[m] - p1[m]) <= 1e-12 * (norm2(p1) + 1.0));

  // The microscopic remainder is orthogonal to the basis.
  for (const auto& b : basis.single1) {
    double ip = 0.0;
    for (std::size_t m = 0; m < g.size(); ++m) ip += (g[m] - p1[m]) * b[m];
    ip *= f.grid.cell_weight();
    CHECK(std::abs(ip) <= 1e-12 * norm2(g));
  }
}

TEST_CASE("pair projection fixes invariant pairs") {
  auto& f = fix8();
  NullBasis basis = build_null_basis(f.grid);
  std::size_t N = f.grid.size();
  for (const auto& b : basis.pair) {
    std::vector<double> hp(N), hm(N);
    project_P_pair(basis, f.grid, b.data(), b.data() + N, hp.data(), hm.data());
    double scale = norm2(b);
    for (std::size_t m = 0; m < N; ++m) {
      CHECK(std::abs(hp[m] - b[m]) <= 1e-12 * scale);
      CHECK(std::abs(hm[m] - b[m + N]) <= 1e-12 * scale);
    }
  }
}

TEST_CASE("sigma norm is a weighted norm") {
  auto& f = fix8();
  std::vector<double> g = random_field(f.grid, 111);
  WeightSpec w0{0, 0, 0, 0};
  double n0 = sigma_norm(f.grid, f.ctx.sigma(), w0, g);
  CHECK(n0 > 0.0);

  std::vector<double> g2(g);
  for (auto& y : g2) y *= 2.0;
  CHECK(sigma_norm(f.grid, f.ctx.sigma(), w0, g2) == doctest::Approx(2.0 * n0).epsilon(1e-13));

  WeightSpec w1{1, 0, 0, 0};
  CHECK(sigma_norm(f.grid, f.ctx.sigma(), w1, g) >= n0);

  std::vector<double> zero(f.grid.size(), 0.0);
  CHECK(sigma_norm(f.grid, f.ctx.sigma(), w0, zero) == 0.0);
}

TEST_CASE("coercivity constants are positive") {
  auto& f = fix8();
  LandauWorker w(f.ctx);
  NullBasis basis = build_null_basis(f.grid);
  Rng rng(7);
  CoercivityReport rep = coercivity_constant(w, basis, 10, rng);
  CHECK(rep.c_pair > 0.0);
  CHECK(rep.c_L1 > 0.0);
  CHECK(rep.c_L2 > 0.0);
  CHECK(rep.skipped < 10);
}

TEST_CASE("trilinear estimate ratio is finite") {
  auto& f = fix8();
  LandauWorker w(f.ctx);
  Rng rng(19);
  double ratio = gamma_ratio_estimate(w, 10, rng);
  CHECK(ratio > 0.0);
  CHECK(ratio < 1e3);
}
