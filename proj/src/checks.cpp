#include "vplk/checks.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "json.hpp"
#include "vplk/convolution.hpp"
#include "vplk/dynamics.hpp"
#include "vplk/field.hpp"
#include "vplk/functionals.hpp"
#include "vplk/grid.hpp"
#include "vplk/landau.hpp"
#include "vplk/rng.hpp"
#include "vplk/spectral.hpp"

namespace vplk {

namespace {

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm2(const std::vector<double>& a) { return std::sqrt(dot(a, a)); }

CheckCase make_case(const std::string& name, bool pass,
                    std::vector<CheckMeasure> measured) {
  CheckCase c;
  c.name = name;
  c.pass = pass;
  c.measured = std::move(measured);
  return c;
}

// ---- operators ------------------------------------------------------------

void suite_operators(CheckReport& rep, const CheckOptions& opt) {
  Rng rng(opt.seed);
  VelocityGrid vg(16, 6.0);
  LandauContext ctx(vg, KernelSpec{}, ConvMode::fft);
  LandauWorker w(ctx);
  const std::size_t N = vg.size();

  {
    // kernel algebra: phi(v) annihilates v and acts as |v|^p on v-perp
    double worst_pv = 0.0, worst_eig = 0.0;
    for (int t = 0; t < 100; ++t) {
      Vec3 d{rng.gaussian(), rng.gaussian(), rng.gaussian()};
      const double nd =
          std::max(1e-12, std::sqrt(d[0] * d[0] + d[1] * d[1] + d[2] * d[2]));
      const double r = 0.1 + 4.9 * rng.uniform();
      const Vec3 v{d[0] / nd * r, d[1] / nd * r, d[2] / nd * r};
      const Sym3 P = phi_kernel(v, ctx.spec());
      const Vec3 Pv = sym_apply(P, v);
      for (int k = 0; k < 3; ++k) worst_pv = std::max(worst_pv, std::abs(Pv[k]));

      // orthonormal pair spanning the perpendicular eigenspace
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
      const double lam = std::pow(r, ctx.spec().p);
      for (const Vec3& u : {u1, u2}) {
        const Vec3 Pu = sym_apply(P, u);
        for (int k = 0; k < 3; ++k)
          worst_eig = std::max(worst_eig, std::abs(Pu[k] - lam * u[k]) / lam);
      }
    }
    rep.cases.push_back(make_case(
        "kernel_projection_and_eigenvalues", worst_pv <= 1e-12 && worst_eig <= 1e-10,
        {{"max_kernel_times_v", worst_pv}, {"max_eigenvalue_defect", worst_eig}}));
  }

  {
    // symmetry of the linearized operators; the single-species case applies
    // the cross-species coupling through the k_sign hook
    double worst_l2 = 0.0, worst_l1 = 0.0, worst_pair = 0.0;
    std::vector<double> Ag(N), Ah(N), Kg(N);
    for (int t = 0; t < 20; ++t) {
      std::vector<double> g = rng.gaussian_vector(N), h = rng.gaussian_vector(N);

      w.apply_L2(g.data(), Ag.data());
      w.apply_L2(h.data(), Ah.data());
      double scale = norm2(Ag) * norm2(h) + norm2(g) * norm2(Ah) + 1e-300;
      worst_l2 = std::max(worst_l2, std::abs(dot(Ag, h) - dot(g, Ah)) / scale);

      w.apply_L2(g.data(), Ag.data());
      w.apply_K_star(g.data(), Kg.data());
      for (std::size_t i = 0; i < N; ++i) Ag[i] -= 2.0 * opt.k_sign * Kg[i];
      w.apply_L1(h.data(), Ah.data());
      scale = norm2(Ag) * norm2(h) + norm2(g) * norm2(Ah) + 1e-300;
      worst_l1 = std::max(worst_l1, std::abs(dot(Ag, h) - dot(g, Ah)) / scale);

      std::vector<double> gp = rng.gaussian_vector(N), gm = rng.gaussian_vector(N);
      std::vector<double> hp = rng.gaussian_vector(N), hm = rng.gaussian_vector(N);
      std::vector<double> Lgp(N), Lgm(N), Lhp(N), Lhm(N);
      w.apply_L_pair(gp.data(), gm.data(), Lgp.data(), Lgm.data());
      w.apply_L_pair(hp.data(), hm.data(), Lhp.data(), Lhm.data());
      const double lhs = dot(Lgp, hp) + dot(Lgm, hm);
      const double rhs = dot(gp, Lhp) + dot(gm, Lhm);
      scale = (norm2(Lgp) + norm2(Lgm)) * (norm2(hp) + norm2(hm)) +
              (norm2(gp) + norm2(gm)) * (norm2(Lhp) + norm2(Lhm)) + 1e-300;
      worst_pair = std::max(worst_pair, std::abs(lhs - rhs) / scale);
    }
    const bool pass = worst_l2 <= 1e-9 && worst_l1 <= 1e-9 && worst_pair <= 1e-9;
    rep.cases.push_back(make_case("operator_symmetry", pass,
                                  {{"max_defect_difference_channel", worst_l2},
                                   {"max_defect_single_species", worst_l1},
                                   {"max_defect_pair", worst_pair}}));
  }

  {
    // quadratic-form nonnegativity
    double worst = 0.0;  // most negative normalized quadratic form
    std::vector<double> Ag(N);
    for (int t = 0; t < 20; ++t) {
      std::vector<double> g = rng.gaussian_vector(N);
      const double gg = dot(g, g);
      w.apply_L2(g.data(), Ag.data());
      worst = std::min(worst, dot(Ag, g) / gg);
      w.apply_L1(g.data(), Ag.data());
      worst = std::min(worst, dot(Ag, g) / gg);
    }
    rep.cases.push_back(make_case("quadratic_form_nonnegativity", worst >= -1e-9,
                                  {{"min_normalized_quadratic_form", worst}}));
  }

  {
    // null-space residuals of the collision invariants
    NullBasis basis = build_null_basis(vg);
    double worst = 0.0;
    std::vector<double> Lb(N);
    for (const auto& b : basis.single1) {
      w.apply_L1(b.data(), Lb.data());
      worst = std::max(worst, norm2(Lb) / norm2(b));
    }
    for (const auto& b : basis.single2) {
      w.apply_L2(b.data(), Lb.data());
      worst = std::max(worst, norm2(Lb) / norm2(b));
    }
    std::vector<double> op(N), om(N);
    for (const auto& b : basis.pair) {
      w.apply_L_pair(b.data(), b.data() + N, op.data(), om.data());
      worst = std::max(worst, std::sqrt(dot(op, op) + dot(om, om)) / norm2(b));
    }
    rep.cases.push_back(make_case("null_space_residual", worst <= 5e-2,
                                  {{"max_relative_residual", worst},
                                   {"basis_gram_defect", basis.gram_defect}}));
  }

  {
    // collision invariants of the bilinear term: mass per ordering, momentum
    // and energy for the symmetrized combination
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
    double worst_mass = 0.0, worst_sym = 0.0;
    std::vector<double> gh(N), hg(N), sum(N);
    for (int t = 0; t < 5; ++t) {
      std::vector<double> g = rng.gaussian_vector(N), h = rng.gaussian_vector(N);
      w.apply_Gamma_star(g.data(), h.data(), gh.data());
      w.apply_Gamma_star(h.data(), g.data(), hg.data());
      for (std::size_t i = 0; i < N; ++i) sum[i] = gh[i] + hg[i];
      const double nG = norm2(gh) + norm2(hg) + 1e-300;
      worst_mass =
          std::max(worst_mass, std::abs(dot(gh, mass)) / (norm2(gh) * norm2(mass)));
      for (int k = 0; k < 3; ++k)
        worst_sym =
            std::max(worst_sym, std::abs(dot(sum, mom[k])) / (nG * norm2(mom[k])));
      worst_sym =
          std::max(worst_sym, std::abs(dot(sum, energy)) / (nG * norm2(energy)));
    }
    rep.cases.push_back(
        make_case("bilinear_collision_invariants", worst_mass <= 1e-6 && worst_sym <= 1e-6,
                  {{"max_mass_projection", worst_mass},
                   {"max_symmetrized_projection", worst_sym}}));
  }

  {
    // spectral and direct-sum convolution paths agree; bounded test fields
    // keep the comparison absolute
    VelocityGrid v8(8, 4.0);
    LandauContext cf(v8, KernelSpec{}, ConvMode::fft);
    LandauContext cd(v8, KernelSpec{}, ConvMode::direct);
    LandauWorker wf(cf), wd(cd);
    const std::size_t M = v8.size();
    double worst = 0.0;
    std::vector<double> af(M), ad(M);
    auto uniform_field = [&rng, M]() {
      std::vector<double> u(M);
      for (auto& x : u) x = 2.0 * rng.uniform() - 1.0;
      return u;
    };
    for (int t = 0; t < 3; ++t) {
      std::vector<double> g = uniform_field(), h = uniform_field();
      wf.apply_L1(g.data(), af.data());
      wd.apply_L1(g.data(), ad.data());
      for (std::size_t i = 0; i < M; ++i)
        worst = std::max(worst, std::abs(af[i] - ad[i]));
      wf.apply_Gamma_star(g.data(), h.data(), af.data());
      wd.apply_Gamma_star(g.data(), h.data(), ad.data());
      for (std::size_t i = 0; i < M; ++i)
        worst = std::max(worst, std::abs(af[i] - ad[i]));
    }
    rep.cases.push_back(make_case("convolution_path_agreement", worst <= 1e-10,
                                  {{"max_pointwise_difference", worst}}));
  }
}

// ---- conservation ---------------------------------------------------------

void suite_conservation(CheckReport& rep, const CheckOptions&) {
  const double kPi = SpatialGrid::kPi;
  SpatialGrid sg(1, 8, 2.0 * kPi);
  VelocityGrid vg(8, 4.0);
  SpectralWorkspace ws(sg);
  LandauContext ctx(vg, KernelSpec{}, ConvMode::fft);
  FieldSolver fs(sg, vg, ws);
  const double dt = kPi / 64.0;

  auto comp_linf = [](const PhaseField& f, int c) {
    double m = 0.0;
    for (double x : f.comp[c]) m = std::max(m, std::abs(x));
    return m;
  };

  {
    SchemeConfig cfg;
    cfg.dt = dt;
    cfg.t_end = 5 * dt;
    Stepper st(sg, vg, ws, ctx, fs, cfg);
    SimState s;
    PhaseField z;
    z.resize(Formulation::pm, sg.size(), vg.size());
    st.initialize(s, z);
    double worst = 0.0;
    int iters = 0;
    for (int k = 0; k < 5; ++k) {
      StepReport r = st.step(s);
      iters += r.cg_iters_total;
      worst = std::max(worst, std::max(comp_linf(s.fields, 0), comp_linf(s.fields, 1)));
    }
    rep.cases.push_back(make_case("zero_state_fixed_point", worst == 0.0 && iters == 0,
                                  {{"max_abs_state", worst},
                                   {"solver_iterations", static_cast<double>(iters)}}));
  }

  {
    SchemeConfig cfg;
    cfg.dt = dt;
    cfg.t_end = 4 * dt;
    Stepper st(sg, vg, ws, ctx, fs, cfg);
    SimState s;
    st.initialize(s, initial_data('c', 1e-3, sg, vg));
    double worst = 0.0;
    for (int k = 0; k < 4; ++k) {
      st.step(s);
      worst = std::max(worst, comp_linf(s.fields, 1));
    }
    rep.cases.push_back(make_case("difference_channel_invariance", worst <= 1e-12,
                                  {{"max_difference_component", worst}}));
  }

  {
    SchemeConfig cfg;
    cfg.dt = dt;
    cfg.t_end = 6 * dt;
    cfg.collision_only = true;
    Stepper st(sg, vg, ws, ctx, fs, cfg);
    SimState s;
    st.initialize(s, initial_data('a', 1e-2, sg, vg));
    const std::array<double, 2> m0 = species_masses(sg, vg, s.fields);
    auto l2 = [](const PhaseField& f) {
      double t = 0.0;
      for (int c = 0; c < 2; ++c)
        for (double x : f.comp[c]) t += x * x;
      return std::sqrt(t);
    };
    double prev = l2(s.fields), worst_growth = 0.0;
    for (int k = 0; k < 6; ++k) {
      st.step(s);
      const double cur = l2(s.fields);
      worst_growth = std::max(worst_growth, cur / prev - 1.0);
      prev = cur;
    }
    const std::array<double, 2> m1 = species_masses(sg, vg, s.fields);
    const double drift =
        std::max(std::abs(m1[0] - m0[0]), std::abs(m1[1] - m0[1]));
    rep.cases.push_back(
        make_case("collision_contraction_and_mass", worst_growth <= 1e-8 && drift <= 1e-12,
                  {{"max_norm_growth", worst_growth}, {"max_mass_drift", drift}}));
  }

  {
    SchemeConfig cfg;
    cfg.dt = dt;
    cfg.t_end = 20 * dt;
    Stepper st(sg, vg, ws, ctx, fs, cfg);
    SimState s;
    st.initialize(s, initial_data('a', 1e-3, sg, vg));
    const ConservationBaseline b = conservation_baseline(sg, vg, ws, s);
    for (int k = 0; k < 20; ++k) st.step(s);
    const std::array<double, 2> m = species_masses(sg, vg, s.fields);
    st.refresh_field(s);
    const double E = total_energy(sg, vg, ws, s.fields, s.field_state.phi);
    const double md = std::max(std::abs(m[0] - b.mass[0]) / b.mass_scale[0],
                               std::abs(m[1] - b.mass[1]) / b.mass_scale[1]);
    const double ed = std::abs(E - b.energy) / b.energy_scale;
    rep.cases.push_back(make_case("short_run_conservation", md <= 1e-9 && ed <= 1e-4,
                                  {{"relative_mass_drift", md},
                                   {"relative_energy_drift", ed}}));
  }
}

// ---- coercivity -----------------------------------------------------------

void suite_coercivity(CheckReport& rep, const CheckOptions& opt) {
  Rng rng(opt.seed);
  VelocityGrid vg(16, 6.0);
  LandauContext ctx(vg, KernelSpec{}, ConvMode::fft);
  LandauWorker w(ctx);
  NullBasis basis = build_null_basis(vg);
  CoercivityReport c = coercivity_constant(w, basis, 20, rng);
  const bool pass = c.c_pair > 0.0 && c.c_L1 > 0.0 && c.c_L2 > 0.0;
  rep.cases.push_back(make_case("microscopic_coercivity", pass,
                                {{"constant_pair", c.c_pair},
                                 {"constant_single_species", c.c_L1},
                                 {"constant_difference_channel", c.c_L2},
                                 {"skipped_samples", static_cast<double>(c.skipped)}}));
}

// ---- interpolation --------------------------------------------------------

void suite_interpolation(CheckReport& rep, const CheckOptions& opt) {
  Rng rng(opt.seed);
  VelocityGrid vg(16, 6.0);
  LandauContext ctx(vg, KernelSpec{}, ConvMode::fft);

  auto reports = moment_interp_check(vg, ctx.sigma(), 2.0, {0, 1}, 50, rng);
  double worst = 0.0;
  std::vector<CheckMeasure> measured;
  for (const auto& r : reports) {
    worst = std::max(worst, std::max(r.max_hoelder, r.max_tight));
    const std::string tag = "_level_" + std::to_string(r.ell);
    measured.push_back({"max_hoelder" + tag, r.max_hoelder});
    measured.push_back({"max_tight" + tag, r.max_tight});
    measured.push_back({"max_sigma" + tag, r.max_sigma});
  }
  rep.cases.push_back(
      make_case("velocity_moment_interpolation", worst <= 1.0 + 1e-10, measured));

  const double a64 = agmon_constant(64, 2.0 * SpatialGrid::kPi, 20, 50, opt.seed);
  const double a128 = agmon_constant(128, 2.0 * SpatialGrid::kPi, 20, 50, opt.seed);
  const double ratio = a128 / a64;
  const bool pass = std::isfinite(a64) && std::isfinite(a128) && a64 > 0.0 &&
                    ratio >= 0.6 && ratio <= 1.6;
  rep.cases.push_back(make_case("uniform_bound_interpolation", pass,
                                {{"constant_coarse", a64},
                                 {"constant_fine", a128},
                                 {"refinement_ratio", ratio}}));
}

}  // namespace

CheckReport run_check_suite(const std::string& suite, const CheckOptions& opt) {
  CheckReport rep;
  rep.suite = suite;
  rep.seed = opt.seed;
  if (suite == "operators")
    suite_operators(rep, opt);
  else if (suite == "conservation")
    suite_conservation(rep, opt);
  else if (suite == "coercivity")
    suite_coercivity(rep, opt);
  else if (suite == "interpolation")
    suite_interpolation(rep, opt);
  else if (suite == "all") {
    suite_operators(rep, opt);
    suite_conservation(rep, opt);
    suite_coercivity(rep, opt);
    suite_interpolation(rep, opt);
  } else {
    throw std::invalid_argument(
        "unknown check suite '" + suite +
        "'; valid: operators, conservation, coercivity, interpolation, all");
  }
  rep.pass = true;
  for (const auto& c : rep.cases) rep.pass = rep.pass && c.pass;
  return rep;
}

std::string report_json(const CheckReport& r) {
  nlohmann::ordered_json j;
  j["suite"] = r.suite;
  j["seed"] = r.seed;
  j["pass"] = r.pass;
  j["cases"] = nlohmann::ordered_json::array();
  for (const auto& c : r.cases) {
    nlohmann::ordered_json jc;
    jc["name"] = c.name;
    jc["pass"] = c.pass;
    jc["measured"] = nlohmann::ordered_json::object();
    for (const auto& m : c.measured) jc["measured"][m.name] = m.value;
    j["cases"].push_back(std::move(jc));
  }
  return j.dump(2) + "\n";
}

}  // namespace vplk
