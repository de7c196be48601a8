#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include "vplk/convolution.hpp"
#include "vplk/grid.hpp"

namespace vplk {

// Raised by parse/validate with one consolidated message listing every
// problem found, one per line.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Plain-text key=value run configuration with [section] headers. Sections and
// keys:
//   [grid]        dimx, nx, lx, nv, vcut
//   [kernel]      kernel_p, conv_mode (fft | direct)
//   [scheme]      dt (<= 0 derives the transport-CFL default), t_end,
//                 implicit_tol, formulation (pm | sd), collision_only
//   [init]        family (a | b | c), epsilon
//   [functionals] m, l, q, s, sample_every, violation_tol
//   [output]      run_csv, snapshot_prefix, snapshot_every
//   seed          (top level, before any section)
// Lines starting with # and blank lines are ignored.
struct RunConfig {
  int dimx = 1;
  int nx = 32;
  double lx = 2.0 * SpatialGrid::kPi;
  int nv = 16;
  double vcut = 6.0;

  double kernel_p = -1.0;
  ConvMode conv_mode = ConvMode::fft;

  double dt = 0.0;
  double t_end = 0.0;
  double implicit_tol = 1e-10;
  Formulation formulation = Formulation::sd;
  bool collision_only = false;

  char family = 'a';
  double epsilon = 1e-3;

  int m = 2;
  double l = 2.0;
  double q = 0.0;
  double s = 0.5;
  int sample_every = 5;
  double violation_tol = 1e-8;

  std::string run_csv = "run.csv";
  std::string snapshot_prefix;
  int snapshot_every = 0;

  std::uint64_t seed = 1;

  // dt, or the transport CFL default 0.25 * (lx/nx) / vcut when dt <= 0
  double resolved_dt() const;
  int step_count() const;  // t_end / resolved_dt, validated integral

  bool operator==(const RunConfig&) const = default;
};

// Throws ConfigError listing every unknown section/key, malformed value, and
// precondition violation at once. The empty string parses to the defaults.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);  // reads the file, then parses

// Emits a file that parses back to exactly the same configuration.
std::string serialize_config(const RunConfig& c);

}  // namespace vplk
