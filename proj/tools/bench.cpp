// Microbenchmark for the two execution strategies in the library: the
// OpenMP-parallel time stepper (parallel over spatial nodes) against a
// single-thread run of the same code, and the FFT convolution path against
// the direct-sum reference. On a single-core host the thread comparison
// degenerates to overhead measurement; the target exists to demonstrate and
// exercise both paths, not to promise speedups.

#include <chrono>
#include <cstdio>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "CLI11.hpp"

#include "vplk/dynamics.hpp"
#include "vplk/field.hpp"
#include "vplk/grid.hpp"
#include "vplk/landau.hpp"
#include "vplk/spectral.hpp"

namespace {

using namespace vplk;
using clk = std::chrono::steady_clock;

double ms_since(clk::time_point t0) {
  return std::chrono::duration<double, std::milli>(clk::now() - t0).count();
}

void set_threads(int n) {
#ifdef _OPENMP
  omp_set_num_threads(n);
#else
  (void)n;
#endif
}

int hw_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

double time_steps(int threads, int nx, int nv, double vcut, int reps) {
  set_threads(threads);
  SpatialGrid sg(1, nx, 2.0 * 3.14159265358979324);
  VelocityGrid vg(nv, vcut);
  SpectralWorkspace ws(sg);
  LandauContext ctx(vg, KernelSpec{}, ConvMode::fft);
  FieldSolver fs(sg, vg, ws);
  SchemeConfig sc;
  sc.dt = 0.25 * sg.dx() / vcut;
  sc.t_end = sc.dt * (reps + 1);
  Stepper st(sg, vg, ws, ctx, fs, sc);
  SimState s;
  st.initialize(s, initial_data('a', 1e-3, sg, vg));
  st.step(s);  // warm-up: builds the collision preconditioner
  const auto t0 = clk::now();
  for (int r = 0; r < reps; ++r) st.step(s);
  return ms_since(t0) / reps;
}

double time_collision(ConvMode mode, int nv, double vcut, int reps) {
  VelocityGrid vg(nv, vcut);
  LandauContext ctx(vg, KernelSpec{}, mode);
  LandauWorker w(ctx);
  Rng rng(5);
  std::vector<double> g(vg.size()), h(vg.size()), out(vg.size());
  for (auto& x : g) x = 2.0 * rng.uniform() - 1.0;
  for (auto& x : h) x = 2.0 * rng.uniform() - 1.0;
  w.apply_Gamma_star(g.data(), h.data(), out.data());  // warm-up: plans and scratch
  const auto t0 = clk::now();
  for (int r = 0; r < reps; ++r) w.apply_Gamma_star(g.data(), h.data(), out.data());
  return ms_since(t0) / reps;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"timing harness for the parallel stepper and convolution paths"};
  int nx = 16, nv = 8, reps = 3;
  double vcut = 4.0;
  bool skip_direct = false;
  app.add_option("--nx", nx, "spatial nodes per run (default 16)");
  app.add_option("--nv", nv, "velocity nodes per axis (default 8)");
  app.add_option("--vcut", vcut, "velocity cutoff (default 4)");
  app.add_option("--reps", reps, "timed repetitions (default 3)");
  app.add_flag("--skip-direct", skip_direct, "skip the direct-sum comparison");
  CLI11_PARSE(app, argc, argv);

  const int hw = hw_threads();
#ifdef _OPENMP
  std::printf("OpenMP enabled, %d thread%s available\n", hw, hw == 1 ? "" : "s");
#else
  std::printf("OpenMP disabled at compile time, serial only\n");
#endif
  std::printf("grid: nx = %d, nv = %d^3, vcut = %g, reps = %d\n\n", nx, nv, vcut, reps);

  const double serial = time_steps(1, nx, nv, vcut, reps);
  std::printf("full step, 1 thread:   %10.2f ms\n", serial);
  if (hw > 1) {
    const double par = time_steps(hw, nx, nv, vcut, reps);
    std::printf("full step, %d threads: %10.2f ms  (speedup %.2fx)\n", hw, par,
                serial / par);
  } else {
    std::printf("full step, parallel:   skipped (single hardware thread)\n");
  }

  std::printf("\n");
  const double fft = time_collision(ConvMode::fft, nv, vcut, reps);
  std::printf("bilinear collision apply, fft:    %10.3f ms\n", fft);
  if (!skip_direct) {
    const double direct = time_collision(ConvMode::direct, nv, vcut, reps);
    std::printf("bilinear collision apply, direct: %10.3f ms  (fft %.1fx faster)\n",
                direct, direct / fft);
  }
  return 0;
}
