#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "vplk/grid.hpp"
#include "vplk/spectral.hpp"

namespace vplk {

// Charge density, current, and electrostatic potential derived from the
// difference component f_2 = f_+ - f_-. rho and phi are spatial scalars with
// zero mean; J carries all three velocity moments even when the spatial
// dimension is below 3 (only the first dim components enter divergences).
struct FieldState {
  std::vector<double> rho;
  std::array<std::vector<double>, 3> J;
  std::vector<double> phi;
};

struct FieldNorms {
  double grad_phi_l2 = 0.0;
  double grad_phi_linf = 0.0;
  double dt_phi_linf = 0.0;
  // ||grad phi||_inf / (||f2||_2 + ||grad_x f2||_2), 0 for an all-zero state.
  double elliptic_ratio = 0.0;
};

// Moments, the Poisson solve, and continuity diagnostics for one grid pair.
// Holds references; grids and workspace must outlive the solver.
class FieldSolver {
 public:
  FieldSolver(const SpatialGrid& sg, const VelocityGrid& vg, SpectralWorkspace& ws);

  // rho = h^3 sum sqrt(mu) f2, J_k = h^3 sum v_k sqrt(mu) f2 per spatial node.
  // f2 is one phase-field component, velocity index fastest.
  void moments(const std::vector<double>& f2, std::vector<double>& rho,
               std::array<std::vector<double>, 3>& J) const;

  // Spectral inversion of -lap(phi) = rho, zero mode of phi set to 0. Raises
  // NeutralityError for rho with nonzero mean; after every solve verifies
  // -lap(phi) against the zero-mean part of rho to kResidualTol in l2 (the
  // zero mode itself is gated by the workspace neutrality check).
  std::vector<double> poisson(const std::vector<double>& rho) const;

  // Recomputes rho, J, phi from f2.
  void update(FieldState& fs, const std::vector<double>& f2) const;

  // d_t phi = inverse Laplacian of div J, zero mode 0. Zero for constant J;
  // J = (cos(kx), 0, 0) gives sin(kx)/k.
  std::vector<double> dt_phi(const std::array<std::vector<double>, 3>& J) const;

  // || (rho_b - rho_a)/dt + div (J_a + J_b)/2 ||_2. The midpoint current
  // keeps the residual second order in dt along a smooth trajectory.
  double continuity_residual(const FieldState& a, const FieldState& b, double dt) const;

  FieldNorms norms(const FieldState& fs, const std::vector<double>& f2) const;

  static constexpr double kResidualTol = 1e-12;

 private:
  const SpatialGrid& sg_;
  const VelocityGrid& vg_;
  SpectralWorkspace& ws_;
  std::array<std::vector<double>, 3> v_sqrt_mu_;
};

}  // namespace vplk
