#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace vplk {

struct CheckMeasure {
  std::string name;
  double value = 0.0;
};

struct CheckCase {
  std::string name;
  bool pass = false;
  std::vector<CheckMeasure> measured;
};

// One suite run: pass = conjunction over cases. Suites build their own small
// grids, so a report depends only on the suite name and the options.
struct CheckReport {
  std::string suite;
  std::uint64_t seed = 0;
  bool pass = false;
  std::vector<CheckCase> cases;
};

struct CheckOptions {
  std::uint64_t seed = 1;
  // Detector-sanity hook: -1 applies the cross-species coupling K* with the
  // wrong sign inside the operator suite, which must trip the symmetry case.
  int k_sign = +1;
};

// suite in {operators, conservation, coercivity, interpolation, all};
// anything else throws std::invalid_argument naming the valid suites.
CheckReport run_check_suite(const std::string& suite, const CheckOptions& opt);

// Stable serialization (2-space indent, fixed key order): byte-identical for
// equal reports, so repeated same-seed runs can be compared directly.
std::string report_json(const CheckReport& r);

}  // namespace vplk
