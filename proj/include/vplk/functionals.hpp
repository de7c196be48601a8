#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "vplk/grid.hpp"
#include "vplk/landau.hpp"
#include "vplk/rng.hpp"
#include "vplk/spectral.hpp"

namespace vplk {

enum class DissipationVariant : std::uint8_t { full, tilde, overline };

// Per spatial-derivative order k: hydro[k] collects || d^alpha P f ||_2 and
// micro[k] the sigma norms of d^alpha (I - P) f over |alpha| = k, summed in
// quadrature over the pair components.
struct MacroMicroRecord {
  std::vector<double> hydro;
  std::vector<double> micro;
  double pyth_defect = 0.0;  // | ||f||^2 - ||Pf||^2 - ||(I-P)f||^2 |
};

struct LedgerRecord {
  double t = 0.0;
  double value = 0.0;  // dE/dt + trapezoid dissipation for one step
  double scale = 0.0;  // energy scale the tolerance is relative to
  bool flag = false;
};

enum class DecayModel : std::uint8_t { power, stretched_exp };

struct DecayFit {
  DecayModel model = DecayModel::power;
  double amplitude = 0.0;
  double exponent = 0.0;  // slope of log y against log(1+t) (power model)
  double rate = 0.0;      // c in exp(-c t^p) (stretched model)
  double stretch_power = 2.0 / 3.0;
  double residual = 0.0;  // rms misfit of log y over the window
  double t_lo = 0.0, t_hi = 0.0;
  int n_used = 0;
};

struct InterpLevelReport {
  int ell = 0;
  double theta = 0.0;
  // ||g||_2 <= ||<v>^{-1/2} g||_2^theta ||<v>^{4(l-ell)} g||_2^{1-theta}:
  // exact weighted-Hoelder inequality on the lattice, ratio asserted <= 1.
  double max_hoelder = 0.0;
  // sharp variant with second factor ||<v>^{2(l-ell)} g||_2 (equality case of
  // the same Hoelder split); also <= 1.
  double max_tight = 0.0;
  // first factor replaced by the sigma norm; holds only up to the coercive
  // equivalence constant, so it is reported, not asserted.
  double max_sigma = 0.0;
};

// Weighted Sobolev energy and dissipation functionals, partial energies,
// macro-micro channel norms, monotone-ledger assembly, and decay regression.
// Holds references; all referenced objects must outlive the instance.
class Functionals {
 public:
  Functionals(const SpatialGrid& sg, const VelocityGrid& vg, SpectralWorkspace& ws,
              const SigmaField& sigma, const NullBasis& basis);

  // sum_{|alpha|+|beta| <= m} || d^alpha_beta f ||^2_{2,w} + || grad phi ||_2^2
  // with w = e^{q|v|^2/2} <v>^{2(l-|alpha|-|beta|)}; requires l >= m.
  double energy(int m, double l, double q, const PhaseField& f,
                const std::vector<double>& phi);

  // full:     sum || d^alpha_beta (I-P) f ||^2_{sigma,w}
  //         + sum_{1<=|alpha|<=m} || d^alpha P f ||_2^2
  //         + || grad phi ||_2^2 + || f_+ - f_- ||_2^2
  // tilde:    full minus the last term; overline: tilde + || P f ||_2^2.
  double dissipation(int m, double l, double q, const PhaseField& f,
                     const std::vector<double>& phi, DissipationVariant variant);

  // sum_{k <= ell} || grad^k f2 ||_2^2 + || grad phi ||_2^2
  double e0l_f2(int ell, const std::vector<double>& f2, const std::vector<double>& phi);

  // sum_{ell <= k <= m} || grad^k f1 ||_2^2
  double elm_f1(int ell, int m, const std::vector<double>& f1);

  // sum_{k <= ell} || grad^k f2 ||_sigma^2 + || grad phi ||_2^2, the
  // dissipation side of the f2 partial-energy inequality.
  double ledger_dissipation(int ell, const std::vector<double>& f2,
                            const std::vector<double>& phi);

  MacroMicroRecord macro_micro(int m, const PhaseField& f);

  // || grad^k u ||_2^2 = sum_{|alpha| = k} || d^alpha u ||_2^2 over the
  // spatial axes of one phase-field component (no multinomial factors).
  double grad_k_sq(int k, const std::vector<double>& u);

  // || (I - P1) f1 ||_2 over the phase field
  double micro_f1_l2(const std::vector<double>& f1);

 private:
  const SpatialGrid& sg_;
  const VelocityGrid& vg_;
  SpectralWorkspace& ws_;
  const SigmaField& sigma_;
  const NullBasis& basis_;

  std::vector<double> derivative(const std::vector<double>& u,
                                 const std::array<int, 3>& alpha,
                                 const std::array<int, 3>& beta);
  double phase_sigma_sq(const std::vector<double>& u, const WeightSpec& w);
  void split_pair(const PhaseField& pm, PhaseField& macro, PhaseField& micro) const;
};

// One record per consecutive snapshot pair: value = (e0l[i+1]-e0l[i])/dt +
// (diss[i]+diss[i+1])/2, flagged when it exceeds violation_tol * e0l[i].
// Requires strictly increasing, uniformly spaced times.
std::vector<LedgerRecord> monotone_ledger(const std::vector<double>& times,
                                          const std::vector<double>& e0l,
                                          const std::vector<double>& diss,
                                          double violation_tol);

// Linear least squares of log y against log(1+t) (power) or t^p (stretched),
// over the window [t_front + t0_frac*(span), t_back]. Throws domain_error on
// non-positive values inside the window, invalid_argument on short series.
DecayFit fit_decay(const std::vector<double>& t, const std::vector<double>& y,
                   DecayModel model, double t0_frac = 0.1,
                   double stretch_power = 2.0 / 3.0);

// Velocity-moment interpolation ratios at each level ell < l over n_samples
// random fields plus a small-|v| concentrated probe.
std::vector<InterpLevelReport> moment_interp_check(const VelocityGrid& vg,
                                                   const SigmaField& sigma, double l,
                                                   const std::vector<int>& ell_levels,
                                                   int n_samples, Rng& rng);

// sup over sampled zero-mean band-limited fields (modes 1..max_mode, Gaussian
// coefficients from `seed`) of ||g||_inf / (||g'||_2^{1/2} ||g||_2^{1/2}) on a
// periodic grid of n nodes. The coefficient draw is independent of n, so runs
// at two resolutions sample the same field family.
double agmon_constant(int n, double lx, int max_mode, int n_samples,
                      std::uint64_t seed);

}  // namespace vplk
