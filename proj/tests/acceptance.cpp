// Acceptance harness for the Vlasov-Poisson-Landau laboratory. Twelve
// numbered criteria, one PASS/FAIL line each with key measured numbers and
// runtime; the exit status is the number of failed criteria.
//
// An optional argument names the command-line binary; criterion 12 then
// exercises the determinism contract at process level (check all --seed 7
// twice, byte-compared). Without it the same contract runs in-process.

#include <array>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "vplk/checks.hpp"
#include "vplk/dynamics.hpp"
#include "vplk/field.hpp"
#include "vplk/functionals.hpp"
#include "vplk/grid.hpp"
#include "vplk/landau.hpp"
#include "vplk/rng.hpp"
#include "vplk/spectral.hpp"

using namespace vplk;

namespace {

int g_failures = 0;
using clk = std::chrono::steady_clock;

struct Timer {
  clk::time_point t0 = clk::now();
  double s() const { return std::chrono::duration<double>(clk::now() - t0).count(); }
};

void report(int id, const char* label, bool pass, double secs, const std::string& detail) {
  std::printf("%s  criterion %2d  %-32s %8.1f s  %s\n", pass ? "PASS" : "FAIL",
              id, label, secs, detail.c_str());
  std::fflush(stdout);
  if (!pass) ++g_failures;
}

std::string num(double x) {
  char b[32];
  std::snprintf(b, sizeof b, "%.3g", x);
  return b;
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm2(const std::vector<double>& a) { return std::sqrt(dot(a, a)); }

// ---- baseline scenario ------------------------------------------------------
// 1-D in x, Nx = 32 on a 2 pi box, 16^3 velocity nodes with cutoff 6,
// amplitude 1e-3, 1000 steps at the CFL-derived dt, sampled every 5 steps.

constexpr int kNx = 32, kNv = 16, kSteps = 1000, kEvery = 5;
constexpr double kVcut = 6.0, kEps = 1e-3;
constexpr int kM = 2;
constexpr double kL = 2.0, kQ = 0.0;

std::uint64_t fnv1a(const void* p, std::size_t n, std::uint64_t h) {
  const unsigned char* c = static_cast<const unsigned char*>(p);
  for (std::size_t i = 0; i < n; ++i) {
    h ^= c[i];
    h *= 0x100000001b3ull;
  }
  return h;
}

struct BaselineData {
  std::vector<double> t, e0l1, diss1, e0lm, dissm;
  std::vector<double> l2f1, l2f2, gphi, micro;
  std::vector<double> mass_p, mass_m, energy;  // relative drifts
  std::vector<std::uint64_t> digest;
  double max_diff_comp = 0.0;  // largest |f2| seen (sum/difference form)
  double runtime = 0.0;
  double final_t = 0.0;
  PhaseField final_state;
  bool ok = false;
  std::string error;
};

BaselineData run_baseline(char family) {
  BaselineData d;
  Timer tm;
  try {
    SpatialGrid sg(1, kNx, 2.0 * SpatialGrid::kPi);
    VelocityGrid vg(kNv, kVcut);
    SpectralWorkspace ws(sg);
    LandauContext ctx(vg, KernelSpec{}, ConvMode::fft);
    FieldSolver fs(sg, vg, ws);
    NullBasis basis = build_null_basis(vg);
    Functionals fn(sg, vg, ws, ctx.sigma(), basis);
    SchemeConfig sc;
    sc.dt = 0.25 * sg.dx() / kVcut;
    sc.t_end = kSteps * sc.dt;
    Stepper st(sg, vg, ws, ctx, fs, sc);
    SimState s;
    st.initialize(s, initial_data(family, kEps, sg, vg));
    const ConservationBaseline base = conservation_baseline(sg, vg, ws, s);

    st.run(s, kEvery, [&](const SimState& cur, int, const StepReport&) {
      const PhaseField* sd = &cur.fields;
      PhaseField conv;
      if (cur.fields.form != Formulation::sd) {
        conv = to_formulation(cur.fields, Formulation::sd);
        sd = &conv;
      }
      const std::vector<double>& f1 = sd->comp[0];
      const std::vector<double>& f2 = sd->comp[1];
      const std::vector<double>& phi = cur.field_state.phi;

      d.t.push_back(cur.t);
      d.e0l1.push_back(fn.e0l_f2(1, f2, phi));
      d.diss1.push_back(fn.ledger_dissipation(1, f2, phi));
      d.e0lm.push_back(fn.e0l_f2(kM, f2, phi));
      d.dissm.push_back(fn.ledger_dissipation(kM, f2, phi));
      d.l2f1.push_back(phase_l2(sg, vg, f1));
      d.l2f2.push_back(phase_l2(sg, vg, f2));
      d.gphi.push_back(ws.grad_l2(phi));
      d.micro.push_back(fn.micro_f1_l2(f1));

      const std::array<double, 2> m = species_masses(sg, vg, cur.fields);
      d.mass_p.push_back((m[0] - base.mass[0]) / base.mass_scale[0]);
      d.mass_m.push_back((m[1] - base.mass[1]) / base.mass_scale[1]);
      d.energy.push_back(
          (total_energy(sg, vg, ws, cur.fields, phi) - base.energy) /
          base.energy_scale);

      for (double x : f2) d.max_diff_comp = std::max(d.max_diff_comp, std::abs(x));

      std::uint64_t h = 1469598103934665603ull;
      h = fnv1a(cur.fields.comp[0].data(), cur.fields.comp[0].size() * 8, h);
      h = fnv1a(cur.fields.comp[1].data(), cur.fields.comp[1].size() * 8, h);
      h = fnv1a(phi.data(), phi.size() * 8, h);
      h = fnv1a(&cur.t, sizeof cur.t, h);
      d.digest.push_back(h);
    });

    d.final_t = s.t;
    d.final_state = s.fields;
    d.ok = true;
  } catch (const std::exception& e) {
    d.error = e.what();
  }
  d.runtime = tm.s();
  return d;
}

// ---- criteria ---------------------------------------------------------------

void criterion_1() {
  Timer tm;
  Rng rng(1);
  const KernelSpec spec{};
  double worst_pv = 0.0, worst_eig = 0.0;
  for (int t = 0; t < 100; ++t) {
    Vec3 dvec{rng.gaussian(), rng.gaussian(), rng.gaussian()};
    const double nd = std::max(
        1e-12, std::sqrt(dvec[0] * dvec[0] + dvec[1] * dvec[1] + dvec[2] * dvec[2]));
    const double r = 0.1 + 4.9 * rng.uniform();
    const Vec3 v{dvec[0] / nd * r, dvec[1] / nd * r, dvec[2] / nd * r};
    const Sym3 P = phi_kernel(v, spec);
    const Vec3 Pv = sym_apply(P, v);
    for (int k = 0; k < 3; ++k) worst_pv = std::max(worst_pv, std::abs(Pv[k]));

    const Vec3 vhat{v[0] / r, v[1] / r, v[2] / r};
    int least = 0;
    for (int k = 1; k < 3; ++k)
      if (std::abs(vhat[k]) < std::abs(vhat[least])) least = k;
    Vec3 u1{0, 0, 0};
    u1[least] = 1.0;
    const double c = u1[0] * vhat[0] + u1[1] * vhat[1] + u1[2] * vhat[2];
    for (int k = 0; k < 3; ++k) u1[k] -= c * vhat[k];
    const double n1 = std::sqrt(u1[0] * u1[0] + u1[1] * u1[1] + u1[2] * u1[2]);
    for (int k = 0; k < 3; ++k) u1[k] /= n1;
    const Vec3 u2{vhat[1] * u1[2] - vhat[2] * u1[1],
                  vhat[2] * u1[0] - vhat[0] * u1[2],
                  vhat[0] * u1[1] - vhat[1] * u1[0]};
    const double lam = std::pow(r, spec.p);
    for (const Vec3& u : {u1, u2}) {
      const Vec3 Pu = sym_apply(P, u);
      for (int k = 0; k < 3; ++k)
        worst_eig = std::max(worst_eig, std::abs(Pu[k] - lam * u[k]) / lam);
    }
  }
  const double secs = tm.s();
  report(1, "kernel algebra", worst_pv <= 1e-12 && worst_eig <= 1e-10 && secs < 1.0,
         secs, "kernel*v " + num(worst_pv) + ", eigen defect " + num(worst_eig));
}

void criterion_2() {
  Timer tm;
  VelocityGrid vg(24, 6.0);
  const Sym3 s0 = sigma_origin_quadrature(vg, KernelSpec{});
  const double oracle = 4.1887902047863905 * (1.0 - std::exp(-36.0));
  double worst_diag = 0.0, worst_off = 0.0;
  for (int d : {0, 3, 5}) worst_diag = std::max(worst_diag, std::abs(s0[d] - oracle) / oracle);
  for (int d : {1, 2, 4}) worst_off = std::max(worst_off, std::abs(s0[d]) / oracle);
  const double secs = tm.s();
  report(2, "collision frequency at origin",
         worst_diag <= 0.02 && worst_off <= 0.02 && secs < 30.0, secs,
         "diagonal defect " + num(worst_diag) + ", off-diagonal " + num(worst_off));
}

double null_residual(const VelocityGrid& vg, LandauWorker& w) {
  const std::size_t N = vg.size();
  NullBasis basis = build_null_basis(vg);
  double worst = 0.0;
  std::vector<double> Lb(N), op(N), om(N);
  for (const auto& b : basis.single1) {
    w.apply_L1(b.data(), Lb.data());
    worst = std::max(worst, norm2(Lb) / norm2(b));
  }
  for (const auto& b : basis.single2) {
    w.apply_L2(b.data(), Lb.data());
    worst = std::max(worst, norm2(Lb) / norm2(b));
  }
  for (const auto& b : basis.pair) {
    w.apply_L_pair(b.data(), b.data() + N, op.data(), om.data());
    worst = std::max(worst, std::sqrt(dot(op, op) + dot(om, om)) / norm2(b));
  }
  return worst;
}

void criterion_3() {
  Timer tm;
  Rng rng(1);
  VelocityGrid vg(16, 6.0);
  LandauContext ctx(vg, KernelSpec{}, ConvMode::fft);
  LandauWorker w(ctx);
  const std::size_t N = vg.size();

  double worst_sym = 0.0;
  std::vector<double> Ag(N), Ah(N);
  for (int t = 0; t < 20; ++t) {
    std::vector<double> g = rng.gaussian_vector(N), h = rng.gaussian_vector(N);
    w.apply_L2(g.data(), Ag.data());
    w.apply_L2(h.data(), Ah.data());
    double scale = norm2(Ag) * norm2(h) + norm2(g) * norm2(Ah) + 1e-300;
    worst_sym = std::max(worst_sym, std::abs(dot(Ag, h) - dot(g, Ah)) / scale);

    w.apply_L1(g.data(), Ag.data());
    w.apply_L1(h.data(), Ah.data());
    scale = norm2(Ag) * norm2(h) + norm2(g) * norm2(Ah) + 1e-300;
    worst_sym = std::max(worst_sym, std::abs(dot(Ag, h) - dot(g, Ah)) / scale);

    std::vector<double> gp = rng.gaussian_vector(N), gm = rng.gaussian_vector(N);
    std::vector<double> hp = rng.gaussian_vector(N), hm = rng.gaussian_vector(N);
    std::vector<double> Lgp(N), Lgm(N), Lhp(N), Lhm(N);
    w.apply_L_pair(gp.data(), gm.data(), Lgp.data(), Lgm.data());
    w.apply_L_pair(hp.data(), hm.data(), Lhp.data(), Lhm.data());
    const double lhs = dot(Lgp, hp) + dot(Lgm, hm);
    const double rhs = dot(gp, Lhp) + dot(gm, Lhm);
    scale = (norm2(Lgp) + norm2(Lgm)) * (norm2(hp) + norm2(hm)) +
            (norm2(gp) + norm2(gm)) * (norm2(Lhp) + norm2(Lhm)) + 1e-300;
    worst_sym = std::max(worst_sym, std::abs(lhs - rhs) / scale);
  }

  double worst_neg = 0.0;
  for (int t = 0; t < 20; ++t) {
    std::vector<double> g = rng.gaussian_vector(N);
    const double gg = dot(g, g);
    w.apply_L2(g.data(), Ag.data());
    worst_neg = std::min(worst_neg, dot(Ag, g) / gg);
    w.apply_L1(g.data(), Ag.data());
    worst_neg = std::min(worst_neg, dot(Ag, g) / gg);
  }

  const double r16 = null_residual(vg, w);
  VelocityGrid vg32(32, 6.0);
  LandauContext ctx32(vg32, KernelSpec{}, ConvMode::fft);
  LandauWorker w32(ctx32);
  const double r32 = null_residual(vg32, w32);
  const double order = std::log2(r16 / r32);

  const double secs = tm.s();
  const bool pass = worst_sym <= 1e-9 && worst_neg >= -1e-9 && r16 <= 5e-2 &&
                    order >= 1.8 && secs < 300.0;
  report(3, "linearized operator suite", pass, secs,
         "symmetry " + num(worst_sym) + ", min form " + num(worst_neg) +
             ", null res " + num(r16) + " -> " + num(r32) + " (order " +
             num(order) + ")");
}

void criterion_4() {
  Timer tm;
  auto measure = [](int nv, std::uint64_t seed) {
    Rng rng(seed);
    VelocityGrid vg(nv, 6.0);
    LandauContext ctx(vg, KernelSpec{}, ConvMode::fft);
    LandauWorker w(ctx);
    NullBasis basis = build_null_basis(vg);
    return coercivity_constant(w, basis, 50, rng);
  };
  const CoercivityReport a = measure(16, 1);
  const CoercivityReport b = measure(24, 1);
  const bool positive = a.c_pair > 0.0 && a.c_L1 > 0.0 && a.c_L2 > 0.0 &&
                        b.c_pair > 0.0 && b.c_L1 > 0.0 && b.c_L2 > 0.0;
  auto rel = [](double x, double y) { return std::abs(x - y) / std::abs(y); };
  const double drift = std::max({rel(a.c_pair, b.c_pair), rel(a.c_L1, b.c_L1),
                                 rel(a.c_L2, b.c_L2)});
  const double secs = tm.s();
  report(4, "microscopic coercivity", positive && drift <= 0.20 && secs < 300.0,
         secs,
         "constants " + num(b.c_pair) + "/" + num(b.c_L1) + "/" + num(b.c_L2) +
             ", refinement drift " + num(drift));
}

void criterion_5() {
  Timer tm;
  Rng rng(1);
  VelocityGrid vg(16, 6.0);
  LandauContext ctx(vg, KernelSpec{}, ConvMode::fft);
  LandauWorker w(ctx);
  const std::size_t N = vg.size();

  std::vector<double> mass(N), energy(N);
  std::array<std::vector<double>, 3> mom;
  for (auto& m : mom) m.resize(N);
  for (std::size_t i = 0; i < N; ++i) {
    const Vec3 v = vg.node(i);
    const double s = vg.sqrt_mu()[i];
    mass[i] = s;
    for (int k = 0; k < 3; ++k) mom[k][i] = v[k] * s;
    energy[i] = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]) * s;
  }
  double worst_proj = 0.0;
  std::vector<double> gh(N), hg(N), sum(N);
  for (int t = 0; t < 20; ++t) {
    std::vector<double> g = rng.gaussian_vector(N), h = rng.gaussian_vector(N);
    w.apply_Gamma_star(g.data(), h.data(), gh.data());
    w.apply_Gamma_star(h.data(), g.data(), hg.data());
    for (std::size_t i = 0; i < N; ++i) sum[i] = gh[i] + hg[i];
    const double nG = norm2(gh) + norm2(hg) + 1e-300;
    worst_proj =
        std::max(worst_proj, std::abs(dot(gh, mass)) / (norm2(gh) * norm2(mass)));
    worst_proj =
        std::max(worst_proj, std::abs(dot(hg, mass)) / (norm2(hg) * norm2(mass)));
    for (int k = 0; k < 3; ++k)
      worst_proj =
          std::max(worst_proj, std::abs(dot(sum, mom[k])) / (nG * norm2(mom[k])));
    worst_proj =
        std::max(worst_proj, std::abs(dot(sum, energy)) / (nG * norm2(energy)));
  }

  VelocityGrid v8(8, 4.0);
  LandauContext cf(v8, KernelSpec{}, ConvMode::fft);
  LandauContext cd(v8, KernelSpec{}, ConvMode::direct);
  LandauWorker wf(cf), wd(cd);
  const std::size_t M = v8.size();
  double worst_path = 0.0;
  std::vector<double> af(M), ad(M);
  for (int t = 0; t < 5; ++t) {
    std::vector<double> g(M), h(M);
    for (auto& x : g) x = 2.0 * rng.uniform() - 1.0;
    for (auto& x : h) x = 2.0 * rng.uniform() - 1.0;
    wf.apply_Gamma_star(g.data(), h.data(), af.data());
    wd.apply_Gamma_star(g.data(), h.data(), ad.data());
    for (std::size_t i = 0; i < M; ++i)
      worst_path = std::max(worst_path, std::abs(af[i] - ad[i]));
  }

  const double secs = tm.s();
  report(5, "bilinear collision invariance",
         worst_proj <= 1e-6 && worst_path <= 1e-10 && secs < 120.0, secs,
         "projection " + num(worst_proj) + ", path difference " + num(worst_path));
}

void criterion_6(const BaselineData& diff_free) {
  Timer tm;
  double zero_worst = -1.0;
  int zero_iters = -1;
  std::string err;
  try {
    SpatialGrid sg(1, kNx, 2.0 * SpatialGrid::kPi);
    VelocityGrid vg(kNv, kVcut);
    SpectralWorkspace ws(sg);
    LandauContext ctx(vg, KernelSpec{}, ConvMode::fft);
    FieldSolver fs(sg, vg, ws);
    SchemeConfig sc;
    sc.dt = 0.25 * sg.dx() / kVcut;
    sc.t_end = 101 * sc.dt;
    Stepper st(sg, vg, ws, ctx, fs, sc);
    SimState s;
    PhaseField z;
    z.resize(Formulation::pm, sg.size(), vg.size());
    st.initialize(s, z);
    zero_worst = 0.0;
    zero_iters = 0;
    for (int k = 0; k < 100; ++k) {
      const StepReport r = st.step(s);
      zero_iters += r.cg_iters_total;
      for (int c = 0; c < 2; ++c)
        for (double x : s.fields.comp[c])
          zero_worst = std::max(zero_worst, std::abs(x));
    }
  } catch (const std::exception& e) {
    err = e.what();
  }
  const double secs = tm.s();
  const bool pass = err.empty() && zero_worst <= 1e-12 && diff_free.ok &&
                    diff_free.max_diff_comp <= 1e-10;
  std::string detail;
  if (!err.empty())
    detail = "zero run failed: " + err;
  else if (!diff_free.ok)
    detail = "difference-free run failed: " + diff_free.error;
  else
    detail = "zero-state max " + num(zero_worst) + " (solver iters " +
             std::to_string(zero_iters) + "), difference leak " +
             num(diff_free.max_diff_comp);
  report(6, "fixed point and invariant manifold", pass, secs, detail);
}

void criterion_7(const BaselineData& d) {
  double mass_d = 0.0, energy_d = 0.0;
  for (std::size_t i = 0; i < d.t.size(); ++i) {
    mass_d = std::max({mass_d, std::abs(d.mass_p[i]), std::abs(d.mass_m[i])});
    energy_d = std::max(energy_d, std::abs(d.energy[i]));
  }
  const bool pass =
      d.ok && mass_d <= 1e-8 && energy_d <= 1e-5 && d.runtime < 600.0;
  report(7, "baseline conservation", pass, d.runtime,
         d.ok ? "mass drift " + num(mass_d) + ", energy drift " + num(energy_d)
              : "run failed: " + d.error);
}

void criterion_8(const BaselineData& d) {
  Timer tm;
  if (!d.ok) {
    report(8, "monotone ledger", false, tm.s(), "run failed: " + d.error);
    return;
  }
  const auto led1 = monotone_ledger(d.t, d.e0l1, d.diss1, 1e-8);
  int flags1 = 0;
  double worst1 = 0.0;
  for (const auto& r : led1) {
    flags1 += r.flag ? 1 : 0;
    if (r.scale > 0.0) worst1 = std::max(worst1, r.value / r.scale);
  }
  const auto ledm = monotone_ledger(d.t, d.e0lm, d.dissm, 1e-8);
  int flagsm = 0;
  double worstm = 0.0;
  for (const auto& r : ledm) {
    flagsm += r.flag ? 1 : 0;
    if (r.scale > 0.0) worstm = std::max(worstm, r.value / r.scale);
  }
  report(8, "monotone ledger", flags1 == 0, tm.s(),
         "order-1 flags " + std::to_string(flags1) + " (worst " + num(worst1) +
             "); order-" + std::to_string(kM) + " reported: " +
             std::to_string(flagsm) + " flags (worst " + num(worstm) + ")");
}

void criterion_9(const BaselineData& d) {
  Timer tm;
  if (!d.ok) {
    report(9, "decay ordering", false, tm.s(), "run failed: " + d.error);
    return;
  }
  std::vector<double> fast(d.t.size());
  for (std::size_t i = 0; i < d.t.size(); ++i) fast[i] = d.l2f2[i] + d.gphi[i];
  bool fit_ok = true;
  double r_f1 = 0.0, r_fast = 0.0, r_micro = 0.0;
  std::string err;
  try {
    r_f1 = std::abs(fit_decay(d.t, d.l2f1, DecayModel::stretched_exp).rate);
    r_fast = std::abs(fit_decay(d.t, fast, DecayModel::stretched_exp).rate);
    r_micro = std::abs(fit_decay(d.t, d.micro, DecayModel::stretched_exp).rate);
  } catch (const std::exception& e) {
    fit_ok = false;
    err = e.what();
  }
  const bool pass = fit_ok && std::isfinite(r_f1) && r_fast > r_f1 && r_micro > r_f1;
  report(9, "decay ordering", pass, tm.s(),
         fit_ok ? "rates: difference+field " + num(r_fast) + ", micro " +
                      num(r_micro) + " vs density " + num(r_f1)
                : "fit failed: " + err);
}

void criterion_10() {
  Timer tm;
  std::vector<double> t, yp, ys;
  for (int i = 0; i <= 200; ++i) {
    const double x = 0.05 * i;
    t.push_back(x);
    yp.push_back(2.0 * std::pow(1.0 + x, -3.0));
    ys.push_back(1.5 * std::exp(-2.0 * std::pow(x, 2.0 / 3.0)));
  }
  const DecayFit fp = fit_decay(t, yp, DecayModel::power);
  const DecayFit fs = fit_decay(t, ys, DecayModel::stretched_exp);
  const double ep = std::abs(fp.exponent - (-3.0));
  const double es = std::abs(fs.rate - 2.0);
  const double secs = tm.s();
  report(10, "regression engine", ep <= 0.01 && es <= 0.01 && secs < 1.0, secs,
         "power defect " + num(ep) + ", stretched defect " + num(es));
}

void criterion_11() {
  Timer tm;
  Rng rng(1);
  VelocityGrid vg(16, 6.0);
  LandauContext ctx(vg, KernelSpec{}, ConvMode::fft);
  const auto reports = moment_interp_check(vg, ctx.sigma(), 2.0, {0, 1}, 50, rng);
  double worst = 0.0;
  for (const auto& r : reports)
    worst = std::max(worst, std::max(r.max_hoelder, r.max_tight));
  const double a64 = agmon_constant(64, 2.0 * SpatialGrid::kPi, 20, 50, 1);
  const double a128 = agmon_constant(128, 2.0 * SpatialGrid::kPi, 20, 50, 1);
  const double ratio = a128 / a64;
  const double secs = tm.s();
  const bool pass = worst <= 1.0 + 1e-10 && std::isfinite(a64) &&
                    std::isfinite(a128) && a64 > 0.0 && ratio >= 0.6 &&
                    ratio <= 1.6 && secs < 120.0;
  report(11, "interpolation suites", pass, secs,
         "max ratio " + num(worst) + ", uniform-bound constant " + num(a64) +
             " -> " + num(a128));
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void criterion_12(const BaselineData& a, const char* cli) {
  Timer tm;

  bool check_same = false;
  std::string check_how;
  if (cli) {
    namespace fs = std::filesystem;
    const fs::path base = fs::temp_directory_path() / "vplk-acceptance-12";
    std::error_code ec;
    fs::remove_all(base, ec);
    fs::create_directories(base / "a");
    fs::create_directories(base / "b");
    const std::string q = std::string("\"") + cli + "\"";
    const std::string cmd_a = q + " check --suite all --seed 7 --out \"" +
                              (base / "a").string() + "\" > /dev/null 2>&1";
    const std::string cmd_b = q + " check --suite all --seed 7 --out \"" +
                              (base / "b").string() + "\" > /dev/null 2>&1";
    const int ra = std::system(cmd_a.c_str());
    const int rb = std::system(cmd_b.c_str());
    const std::string ja = slurp(base / "a" / "report.json");
    const std::string jb = slurp(base / "b" / "report.json");
    check_same = ra == 0 && rb == 0 && !ja.empty() && ja == jb;
    check_how = "process-level reports " +
                std::string(check_same ? "identical" : "differ");
    fs::remove_all(base, ec);
  } else {
    CheckOptions opt;
    opt.seed = 7;
    const std::string ja = report_json(run_check_suite("all", opt));
    const std::string jb = report_json(run_check_suite("all", opt));
    check_same = !ja.empty() && ja == jb;
    check_how =
        "in-process reports " + std::string(check_same ? "identical" : "differ");
  }

  const BaselineData b = run_baseline('a');
  bool run_same = a.ok && b.ok && a.digest == b.digest &&
                  a.final_t == b.final_t &&
                  a.final_state.comp[0] == b.final_state.comp[0] &&
                  a.final_state.comp[1] == b.final_state.comp[1];

  report(12, "determinism", check_same && run_same, tm.s(),
         check_how + "; baseline replay " +
             (run_same ? "bit-identical over " + std::to_string(a.digest.size()) +
                             " samples"
                       : "DIVERGED"));
}

}  // namespace

int main(int argc, char** argv) {
  const char* cli = argc > 1 ? argv[1] : nullptr;
  std::printf("acceptance: twelve criteria, sequential, single process\n");
  std::fflush(stdout);

  criterion_1();
  criterion_2();
  criterion_3();
  criterion_4();
  criterion_5();

  const BaselineData diff_free = run_baseline('c');
  criterion_6(diff_free);

  const BaselineData base = run_baseline('a');
  criterion_7(base);
  criterion_8(base);
  criterion_9(base);
  criterion_10();
  criterion_11();
  criterion_12(base, cli);

  std::printf("acceptance: %d/12 criteria passed\n", 12 - g_failures);
  return g_failures;
}
