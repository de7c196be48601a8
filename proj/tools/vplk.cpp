// vplk: deterministic desk-scale laboratory for the two-species
// Vlasov-Poisson-Landau system linearized about the global Maxwellian.
// Subcommands: run (integrate a configured scenario to CSV), check (property
// suites to report.json), fit (decay-law regression on a run CSV), norms
// (functional evaluation over stored snapshots).

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "CLI11.hpp"
#include "json.hpp"

#include "vplk/checks.hpp"
#include "vplk/config.hpp"
#include "vplk/dynamics.hpp"
#include "vplk/field.hpp"
#include "vplk/functionals.hpp"
#include "vplk/grid.hpp"
#include "vplk/landau.hpp"
#include "vplk/snapshot.hpp"
#include "vplk/spectral.hpp"

namespace {

using namespace vplk;

std::string g17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void apply_thread_cap() {
  const char* env = std::getenv("VPLK_THREADS");
  if (!env || !*env) return;
  char* end = nullptr;
  const long n = std::strtol(env, &end, 10);
  if (end && *end == '\0' && n > 0) {
#ifdef _OPENMP
    omp_set_num_threads(static_cast<int>(n));
#endif
  } else {
    std::cerr << "warning: ignoring invalid VPLK_THREADS value '" << env << "'\n";
  }
}

std::string join_path(const std::string& dir, const std::string& name) {
  return (std::filesystem::path(dir) / name).string();
}

double min_perturbed_density(const VelocityGrid& vg, const PhaseField& f) {
  const PhaseField* g = &f;
  PhaseField conv;
  if (f.form != Formulation::pm) {
    conv = to_formulation(f, Formulation::pm);
    g = &conv;
  }
  const std::vector<double>& mu = vg.mu();
  const std::vector<double>& smu = vg.sqrt_mu();
  double m = 1e300;
  for (int c = 0; c < 2; ++c)
    for (std::size_t ix = 0; ix < g->nx; ++ix) {
      const double* s = g->slice(c, ix);
      for (std::size_t a = 0; a < g->nv; ++a)
        m = std::min(m, mu[a] + smu[a] * s[a]);
    }
  return m;
}

// Everything the run command derives from a validated configuration. Building
// this performs no output-file side effects, so a throw here leaves no
// partial files behind.
struct Lab {
  RunConfig cfg;
  SpatialGrid sg;
  VelocityGrid vg;
  SpectralWorkspace ws;
  LandauContext ctx;
  FieldSolver fs;
  NullBasis basis;
  Functionals fn;

  explicit Lab(const RunConfig& c)
      : cfg(c), sg(c.dimx, c.nx, c.lx), vg(c.nv, c.vcut), ws(sg),
        ctx(vg, KernelSpec{c.kernel_p}, c.conv_mode), fs(sg, vg, ws),
        basis(build_null_basis(vg)), fn(sg, vg, ws, ctx.sigma(), basis) {}
};

constexpr const char* kCsvHeader =
    "t,energy,dissipation_full,dissipation_tilde,dissipation_overline,"
    "partial_energy_f2,partial_energy_f1,l2_f1,l2_f2,l2_grad_phi,"
    "decay_channel_f2,l2_micro_f1,linf_grad_phi,linf_dt_phi,"
    "continuity_residual,mass_plus_drift,mass_minus_drift,energy_drift,"
    "ledger_value,ledger_flag,min_F,cg_iters";

int cmd_run(const std::string& config_path, std::optional<std::uint64_t> seed,
            const std::string& out_dir) {
  RunConfig cfg;
  std::optional<Lab> lab;
  SchemeConfig sc;
  PhaseField f0;
  int nsteps = 0;
  try {
    cfg = load_config(config_path);
    if (seed) cfg.seed = *seed;
    nsteps = cfg.step_count();
    lab.emplace(cfg);
    sc.dt = cfg.resolved_dt();
    sc.t_end = cfg.t_end;
    sc.implicit_tol = cfg.implicit_tol;
    sc.formulation = cfg.formulation;
    sc.collision_only = cfg.collision_only;
    sc.validate();
    f0 = initial_data(cfg.family, cfg.epsilon, lab->sg, lab->vg);
    std::filesystem::create_directories(out_dir);
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  }

  Stepper st(lab->sg, lab->vg, lab->ws, lab->ctx, lab->fs, sc);
  SimState s;
  st.initialize(s, f0);
  const ConservationBaseline base =
      conservation_baseline(lab->sg, lab->vg, lab->ws, s);

  const std::string csv_path = join_path(out_dir, cfg.run_csv);
  std::ofstream csv(csv_path, std::ios::trunc);
  if (!csv) {
    std::cerr << "config error: cannot open " << csv_path << " for writing\n";
    return 2;
  }
  csv << kCsvHeader << "\n" << std::flush;

  const int ell = 1;  // partial-energy and ledger derivative order
  bool have_prev = false;
  double prev_t = 0.0, prev_e0l = 0.0, prev_diss = 0.0;
  int sample_ordinal = 0;

  auto emit = [&](const SimState& cur, int k, const StepReport& rep) {
    const PhaseField* sd = &cur.fields;
    PhaseField conv;
    if (cur.fields.form != Formulation::sd) {
      conv = to_formulation(cur.fields, Formulation::sd);
      sd = &conv;
    }
    const std::vector<double>& f1 = sd->comp[0];
    const std::vector<double>& f2 = sd->comp[1];
    const std::vector<double>& phi = cur.field_state.phi;

    const double E = lab->fn.energy(cfg.m, cfg.l, cfg.q, cur.fields, phi);
    const double d_full = lab->fn.dissipation(cfg.m, cfg.l, cfg.q, cur.fields, phi,
                                              DissipationVariant::full);
    const double d_tilde = lab->fn.dissipation(cfg.m, cfg.l, cfg.q, cur.fields, phi,
                                               DissipationVariant::tilde);
    const double d_over = lab->fn.dissipation(cfg.m, cfg.l, cfg.q, cur.fields, phi,
                                              DissipationVariant::overline);
    const double e0l = lab->fn.e0l_f2(ell, f2, phi);
    const double elm = lab->fn.elm_f1(ell, cfg.m, f1);
    const double l2f1 = phase_l2(lab->sg, lab->vg, f1);
    const double l2f2 = phase_l2(lab->sg, lab->vg, f2);
    const FieldNorms fno = lab->fs.norms(cur.field_state, f2);
    const double micro = lab->fn.micro_f1_l2(f1);
    const std::array<double, 2> m = species_masses(lab->sg, lab->vg, cur.fields);
    const double energy_now =
        total_energy(lab->sg, lab->vg, lab->ws, cur.fields, phi);
    const double diss_ledger = lab->fn.ledger_dissipation(ell, f2, phi);

    double ledger_value = 0.0;
    int ledger_flag = 0;
    if (have_prev) {
      ledger_value = (e0l - prev_e0l) / (cur.t - prev_t) +
                     0.5 * (diss_ledger + prev_diss);
      if (ledger_value > cfg.violation_tol * prev_e0l) ledger_flag = 1;
    }
    prev_t = cur.t;
    prev_e0l = e0l;
    prev_diss = diss_ledger;
    have_prev = true;

    csv << g17(cur.t) << ',' << g17(E) << ',' << g17(d_full) << ','
        << g17(d_tilde) << ',' << g17(d_over) << ',' << g17(e0l) << ','
        << g17(elm) << ',' << g17(l2f1) << ',' << g17(l2f2) << ','
        << g17(fno.grad_phi_l2) << ',' << g17(l2f2 + fno.grad_phi_l2) << ','
        << g17(micro) << ',' << g17(fno.grad_phi_linf) << ','
        << g17(fno.dt_phi_linf) << ',' << g17(rep.continuity_residual) << ','
        << g17((m[0] - base.mass[0]) / base.mass_scale[0]) << ','
        << g17((m[1] - base.mass[1]) / base.mass_scale[1]) << ','
        << g17((energy_now - base.energy) / base.energy_scale) << ','
        << g17(ledger_value) << ',' << ledger_flag << ',' << g17(rep.min_F)
        << ',' << rep.cg_iters_total << "\n"
        << std::flush;

    if (cfg.snapshot_every > 0 && !cfg.snapshot_prefix.empty() &&
        sample_ordinal % cfg.snapshot_every == 0) {
      char name[64];
      std::snprintf(name, sizeof name, "%s_%06d.vplk", cfg.snapshot_prefix.c_str(), k);
      SnapshotMeta meta;
      meta.form = cur.fields.form;
      meta.dimx = cfg.dimx;
      meta.nx = cfg.nx;
      meta.nv = cfg.nv;
      meta.lx = cfg.lx;
      meta.vcut = cfg.vcut;
      meta.time = cur.t;
      write_snapshot(join_path(out_dir, name), meta, cur.fields);
    }
    ++sample_ordinal;
  };

  try {
    st.run(s, cfg.sample_every, emit);
  } catch (const StepFailure& e) {
    std::cerr << "step failure after t = " << g17(s.t) << ": " << e.what()
              << "\npartial outputs flushed to " << csv_path << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "run aborted after t = " << g17(s.t) << ": " << e.what()
              << "\npartial outputs flushed to " << csv_path << "\n";
    return 1;
  }
  std::cout << "run complete: " << nsteps << " steps, t_end = " << g17(s.t)
            << ", wrote " << csv_path << "\n";
  return 0;
}

int cmd_check(const std::string& suite, std::uint64_t seed,
              const std::string& out_dir) {
  CheckOptions opt;
  opt.seed = seed;
  CheckReport rep;
  try {
    rep = run_check_suite(suite, opt);
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  }
  try {
    std::filesystem::create_directories(out_dir);
    std::ofstream out(join_path(out_dir, "report.json"), std::ios::trunc);
    out << report_json(rep);
  } catch (const std::exception& e) {
    std::cerr << "cannot write report: " << e.what() << "\n";
    return 2;
  }
  for (const auto& c : rep.cases)
    std::cout << (c.pass ? "PASS " : "FAIL ") << c.name << "\n";
  std::cout << "suite " << rep.suite << " (seed " << rep.seed
            << "): " << (rep.pass ? "PASS" : "FAIL") << "\n";
  return rep.pass ? 0 : 1;
}

int cmd_fit(const std::string& csv_path, const std::string& channel,
            const std::string& model_name, double t0_frac,
            const std::string& out_dir) {
  std::ifstream in(csv_path);
  if (!in) {
    std::cerr << "usage error: cannot open " << csv_path << "\n";
    return 2;
  }
  std::string header;
  if (!std::getline(in, header)) {
    std::cerr << "usage error: " << csv_path << " is empty\n";
    return 2;
  }
  std::vector<std::string> names;
  {
    std::stringstream hs(header);
    std::string tok;
    while (std::getline(hs, tok, ',')) names.push_back(tok);
  }
  int t_col = -1, y_col = -1;
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i] == "t") t_col = static_cast<int>(i);
    if (names[i] == channel) y_col = static_cast<int>(i);
  }
  if (t_col < 0 || y_col < 0) {
    std::cerr << "usage error: channel '" << (y_col < 0 ? channel : "t")
              << "' not found; available channels:";
    for (const auto& n : names) std::cerr << ' ' << n;
    std::cerr << "\n";
    return 2;
  }

  std::vector<double> ts, ys;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ls(line);
    std::string tok;
    int col = 0;
    double tv = 0.0, yv = 0.0;
    bool ok = true;
    while (std::getline(ls, tok, ',')) {
      if (col == t_col || col == y_col) {
        try {
          const double x = std::stod(tok);
          (col == t_col ? tv : yv) = x;
        } catch (const std::exception&) {
          ok = false;
        }
      }
      ++col;
    }
    if (!ok || col <= std::max(t_col, y_col)) {
      std::cerr << "usage error: malformed CSV row: " << line << "\n";
      return 2;
    }
    ts.push_back(tv);
    ys.push_back(yv);
  }

  const DecayModel model =
      model_name == "power" ? DecayModel::power : DecayModel::stretched_exp;
  DecayFit fit;
  try {
    fit = fit_decay(ts, ys, model, t0_frac);
  } catch (const std::exception& e) {
    std::cerr << "fit error: " << e.what() << "\n";
    return 1;
  }

  nlohmann::ordered_json j;
  j["model"] = model == DecayModel::power ? "power" : "stretched_exp";
  j["channel"] = channel;
  j["amplitude"] = fit.amplitude;
  if (model == DecayModel::power) {
    j["exponent"] = fit.exponent;
  } else {
    j["rate"] = fit.rate;
    j["stretch_power"] = fit.stretch_power;
  }
  j["residual"] = fit.residual;
  j["window"] = {{"t_lo", fit.t_lo}, {"t_hi", fit.t_hi}, {"n_used", fit.n_used}};
  try {
    std::filesystem::create_directories(out_dir);
    std::ofstream out(join_path(out_dir, "fit.json"), std::ios::trunc);
    out << j.dump(2) << "\n";
  } catch (const std::exception& e) {
    std::cerr << "cannot write fit.json: " << e.what() << "\n";
    return 2;
  }
  if (model == DecayModel::power)
    std::cout << "power fit of " << channel << ": exponent " << g17(fit.exponent)
              << ", residual " << g17(fit.residual) << "\n";
  else
    std::cout << "stretched-exponential fit of " << channel << ": rate "
              << g17(fit.rate) << ", residual " << g17(fit.residual) << "\n";
  return 0;
}

int cmd_norms(const std::string& config_path,
              const std::vector<std::string>& snapshots,
              const std::string& out_dir) {
  RunConfig cfg;
  std::optional<Lab> lab;
  try {
    cfg = load_config(config_path);
    lab.emplace(cfg);
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  }

  struct Row {
    std::string file;
    double time;
    std::vector<double> vals;
    double min_F;
  };
  std::vector<Row> rows;
  for (const auto& path : snapshots) {
    SnapshotMeta meta;
    PhaseField f;
    try {
      f = read_snapshot(path, meta);
    } catch (const SnapshotError& e) {
      std::cerr << "snapshot error: " << e.what() << "\n";
      return 2;
    }
    if (meta.dimx != cfg.dimx || meta.nx != cfg.nx || meta.nv != cfg.nv ||
        std::abs(meta.lx - cfg.lx) > 1e-12 * cfg.lx ||
        std::abs(meta.vcut - cfg.vcut) > 1e-12 * cfg.vcut) {
      std::cerr << "config error: snapshot " << path
                << " was written for a different grid than the configuration\n";
      return 2;
    }

    const PhaseField* sd = &f;
    PhaseField conv;
    if (f.form != Formulation::sd) {
      conv = to_formulation(f, Formulation::sd);
      sd = &conv;
    }
    FieldState fst;
    lab->fs.update(fst, sd->comp[1]);
    const std::vector<double>& phi = fst.phi;
    const int ell = 1;

    Row r;
    r.file = path;
    r.time = meta.time;
    r.vals = {
        lab->fn.energy(cfg.m, cfg.l, cfg.q, f, phi),
        lab->fn.dissipation(cfg.m, cfg.l, cfg.q, f, phi, DissipationVariant::full),
        lab->fn.dissipation(cfg.m, cfg.l, cfg.q, f, phi, DissipationVariant::tilde),
        lab->fn.dissipation(cfg.m, cfg.l, cfg.q, f, phi, DissipationVariant::overline),
        lab->fn.e0l_f2(ell, sd->comp[1], phi),
        lab->fn.elm_f1(ell, cfg.m, sd->comp[0]),
        phase_l2(lab->sg, lab->vg, sd->comp[0]),
        phase_l2(lab->sg, lab->vg, sd->comp[1]),
        lab->ws.grad_l2(phi),
        lab->fn.micro_f1_l2(sd->comp[0]),
        lab->ws.neg_sobolev_norm(fst.rho, cfg.s),
    };
    r.min_F = min_perturbed_density(lab->vg, f);
    rows.push_back(std::move(r));
  }

  const std::string out_path = join_path(out_dir, "norms.csv");
  try {
    std::filesystem::create_directories(out_dir);
  } catch (const std::exception& e) {
    std::cerr << "cannot create " << out_dir << ": " << e.what() << "\n";
    return 2;
  }
  std::ofstream out(out_path, std::ios::trunc);
  if (!out) {
    std::cerr << "cannot open " << out_path << " for writing\n";
    return 2;
  }
  out << "file,t,energy,dissipation_full,dissipation_tilde,dissipation_overline,"
         "partial_energy_f2,partial_energy_f1,l2_f1,l2_f2,l2_grad_phi,"
         "l2_micro_f1,neg_sobolev_rho,min_F\n";
  for (const auto& r : rows) {
    out << r.file << ',' << g17(r.time);
    for (double v : r.vals) out << ',' << g17(v);
    out << ',' << g17(r.min_F) << "\n";
  }
  std::cout << "wrote " << out_path << " (" << rows.size() << " snapshot"
            << (rows.size() == 1 ? "" : "s") << ")\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  apply_thread_cap();

  CLI::App app{
      "vplk: deterministic spectral laboratory for the two-species "
      "Vlasov-Poisson-Landau system near the global Maxwellian"};
  app.require_subcommand(1);

  std::string config_path, out_dir = ".";
  std::optional<std::uint64_t> seed_override;
  std::uint64_t check_seed = 1;
  std::string suite = "all";
  std::string csv_path, channel, model = "power";
  double t0_frac = 0.1;
  std::vector<std::string> snapshots;

  CLI::App* run = app.add_subcommand("run", "integrate a configured scenario");
  run->add_option("--config", config_path, "configuration file")->required();
  std::uint64_t seed_val = 0;
  CLI::Option* seed_opt =
      run->add_option("--seed", seed_val, "override the configured rng seed");
  run->add_option("--out", out_dir, "output directory (default .)");

  CLI::App* check = app.add_subcommand("check", "run a property suite");
  check->add_option(
      "--suite", suite,
      "operators | conservation | coercivity | interpolation | all");
  check->add_option("--seed", check_seed, "seed for the randomized probes");
  check->add_option("--out", out_dir, "output directory for report.json");

  CLI::App* fit = app.add_subcommand("fit", "fit a decay law to a run CSV");
  fit->add_option("--csv", csv_path, "run CSV produced by the run command")->required();
  fit->add_option("--channel", channel, "CSV column to fit")->required();
  fit->add_option("--model", model, "power | stretched")
      ->check(CLI::IsMember({"power", "stretched"}));
  fit->add_option("--t0-frac", t0_frac, "initial transient fraction to skip");
  fit->add_option("--out", out_dir, "output directory for fit.json");

  CLI::App* norms = app.add_subcommand("norms", "evaluate functionals on snapshots");
  norms->add_option("--config", config_path, "configuration file")->required();
  norms->add_option("snapshots", snapshots, "snapshot files (.vplk)")->required();
  norms->add_option("--out", out_dir, "output directory for norms.csv");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (run->parsed()) {
    if (seed_opt->count() > 0) seed_override = seed_val;
    return cmd_run(config_path, seed_override, out_dir);
  }
  if (check->parsed()) return cmd_check(suite, check_seed, out_dir);
  if (fit->parsed()) return cmd_fit(csv_path, channel, model, t0_frac, out_dir);
  return cmd_norms(config_path, snapshots, out_dir);
}
