#include "vplk/config.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

namespace vplk {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

struct Parser {
  std::vector<std::string> errors;

  void fail(int line, const std::string& what) {
    errors.push_back("line " + std::to_string(line) + ": " + what);
  }

  bool to_double(int line, const std::string& key, const std::string& v, double& out) {
    try {
      std::size_t used = 0;
      out = std::stod(v, &used);
      if (used == v.size() && std::isfinite(out)) return true;
    } catch (const std::exception&) {
    }
    fail(line, key + ": not a number: '" + v + "'");
    return false;
  }

  bool to_int(int line, const std::string& key, const std::string& v, int& out) {
    try {
      std::size_t used = 0;
      long long x = std::stoll(v, &used);
      if (used == v.size() && x >= -2147483648LL && x <= 2147483647LL) {
        out = static_cast<int>(x);
        return true;
      }
    } catch (const std::exception&) {
    }
    fail(line, key + ": not an integer: '" + v + "'");
    return false;
  }

  bool to_u64(int line, const std::string& key, const std::string& v, std::uint64_t& out) {
    try {
      std::size_t used = 0;
      unsigned long long x = std::stoull(v, &used);
      if (used == v.size() && v[0] != '-') {
        out = x;
        return true;
      }
    } catch (const std::exception&) {
    }
    fail(line, key + ": not an unsigned integer: '" + v + "'");
    return false;
  }

  bool to_bool(int line, const std::string& key, const std::string& v, bool& out) {
    if (v == "true" || v == "1") {
      out = true;
      return true;
    }
    if (v == "false" || v == "0") {
      out = false;
      return true;
    }
    fail(line, key + ": expected true/false: '" + v + "'");
    return false;
  }
};

}  // namespace

double RunConfig::resolved_dt() const {
  if (dt > 0.0) return dt;
  return 0.25 * (lx / nx) / vcut;
}

int RunConfig::step_count() const {
  const double d = resolved_dt();
  const long long n = std::llround(t_end / d);
  if (std::abs(t_end - static_cast<double>(n) * d) > 1e-6 * d)
    throw ConfigError("t_end is not an integer multiple of dt");
  return static_cast<int>(n);
}

RunConfig parse_config(const std::string& text) {
  RunConfig c;
  Parser p;
  std::istringstream in(text);
  std::string raw, section;
  int line = 0;

  while (std::getline(in, raw)) {
    ++line;
    std::string s = trim(raw);
    if (s.empty() || s[0] == '#') continue;
    if (s.front() == '[') {
      if (s.back() != ']') {
        p.fail(line, "malformed section header: '" + s + "'");
        continue;
      }
      section = trim(s.substr(1, s.size() - 2));
      if (section != "grid" && section != "kernel" && section != "scheme" &&
          section != "init" && section != "functionals" && section != "output")
        p.fail(line, "unknown section: '" + section + "'");
      continue;
    }
    auto eq = s.find('=');
    if (eq == std::string::npos) {
      p.fail(line, "expected key = value: '" + s + "'");
      continue;
    }
    const std::string key = trim(s.substr(0, eq));
    const std::string val = trim(s.substr(eq + 1));

    if (section.empty()) {
      if (key == "seed")
        p.to_u64(line, key, val, c.seed);
      else
        p.fail(line, "unknown top-level key: '" + key + "' (only 'seed' precedes sections)");
    } else if (section == "grid") {
      if (key == "dimx")
        p.to_int(line, key, val, c.dimx);
      else if (key == "nx")
        p.to_int(line, key, val, c.nx);
      else if (key == "lx")
        p.to_double(line, key, val, c.lx);
      else if (key == "nv")
        p.to_int(line, key, val, c.nv);
      else if (key == "vcut")
        p.to_double(line, key, val, c.vcut);
      else
        p.fail(line, "unknown [grid] key: '" + key + "'");
    } else if (section == "kernel") {
      if (key == "kernel_p")
        p.to_double(line, key, val, c.kernel_p);
      else if (key == "conv_mode") {
        if (val == "fft")
          c.conv_mode = ConvMode::fft;
        else if (val == "direct")
          c.conv_mode = ConvMode::direct;
        else
          p.fail(line, "conv_mode: expected fft or direct: '" + val + "'");
      } else
        p.fail(line, "unknown [kernel] key: '" + key + "'");
    } else if (section == "scheme") {
      if (key == "dt")
        p.to_double(line, key, val, c.dt);
      else if (key == "t_end")
        p.to_double(line, key, val, c.t_end);
      else if (key == "implicit_tol")
        p.to_double(line, key, val, c.implicit_tol);
      else if (key == "formulation") {
        if (val == "pm")
          c.formulation = Formulation::pm;
        else if (val == "sd")
          c.formulation = Formulation::sd;
        else
          p.fail(line, "formulation: expected pm or sd: '" + val + "'");
      } else if (key == "collision_only")
        p.to_bool(line, key, val, c.collision_only);
      else
        p.fail(line, "unknown [scheme] key: '" + key + "'");
    } else if (section == "init") {
      if (key == "family") {
        if (val.size() == 1 && (val[0] == 'a' || val[0] == 'b' || val[0] == 'c'))
          c.family = val[0];
        else
          p.fail(line, "family: expected a, b, or c: '" + val + "'");
      } else if (key == "epsilon")
        p.to_double(line, key, val, c.epsilon);
      else
        p.fail(line, "unknown [init] key: '" + key + "'");
    } else if (section == "functionals") {
      if (key == "m")
        p.to_int(line, key, val, c.m);
      else if (key == "l")
        p.to_double(line, key, val, c.l);
      else if (key == "q")
        p.to_double(line, key, val, c.q);
      else if (key == "s")
        p.to_double(line, key, val, c.s);
      else if (key == "sample_every")
        p.to_int(line, key, val, c.sample_every);
      else if (key == "violation_tol")
        p.to_double(line, key, val, c.violation_tol);
      else
        p.fail(line, "unknown [functionals] key: '" + key + "'");
    } else {  // output
      if (key == "run_csv")
        c.run_csv = val;
      else if (key == "snapshot_prefix")
        c.snapshot_prefix = val;
      else if (key == "snapshot_every")
        p.to_int(line, key, val, c.snapshot_every);
      else
        p.fail(line, "unknown [output] key: '" + key + "'");
    }
  }

  // cross-field validation; collected so one report covers everything
  auto bad = [&](const std::string& what) { p.errors.push_back(what); };
  if (c.dimx < 1 || c.dimx > 3) bad("grid.dimx must be 1, 2, or 3");
  if (c.nx < 2) bad("grid.nx must be at least 2");
  if (!(c.lx > 0.0)) bad("grid.lx must be positive");
  if (c.nv < 2 || c.nv % 2 != 0) bad("grid.nv must be even and at least 2");
  if (!(c.vcut > 0.0)) bad("grid.vcut must be positive");
  if (!(c.kernel_p > -3.0 && c.kernel_p <= 1.0))
    bad("kernel.kernel_p must lie in (-3, 1]");
  if (!(c.t_end >= 0.0)) bad("scheme.t_end must be nonnegative");
  if (!(c.implicit_tol > 0.0 && c.implicit_tol <= 1e-6))
    bad("scheme.implicit_tol must lie in (0, 1e-6]");
  if (!(c.epsilon >= 0.0)) bad("init.epsilon must be nonnegative");
  if (c.m < 0) bad("functionals.m must be nonnegative");
  if (c.l < c.m) bad("functionals.l must be at least m");
  if (!(c.q >= 0.0 && c.q <= 1.0)) bad("functionals.q must lie in [0, 1]");
  if (!(c.s > 0.0 && c.s < 1.5)) bad("functionals.s must lie in (0, 1.5)");
  if (c.sample_every < 1) bad("functionals.sample_every must be at least 1");
  if (!(c.violation_tol > 0.0)) bad("functionals.violation_tol must be positive");
  if (c.run_csv.empty()) bad("output.run_csv must not be empty");
  if (c.snapshot_every < 0) bad("output.snapshot_every must be nonnegative");
  if (p.errors.empty() && c.t_end > 0.0) {
    const double d = c.resolved_dt();
    const long long n = std::llround(c.t_end / d);
    if (std::abs(c.t_end - static_cast<double>(n) * d) > 1e-6 * d)
      bad("scheme.t_end must be an integer multiple of the (derived) dt");
  }

  if (!p.errors.empty()) {
    std::string msg = "invalid configuration:";
    for (const auto& e : p.errors) msg += "\n  " + e;
    throw ConfigError(msg);
  }
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string serialize_config(const RunConfig& c) {
  std::ostringstream o;
  o << "seed = " << c.seed << "\n\n";
  o << "[grid]\n";
  o << "dimx = " << c.dimx << "\n";
  o << "nx = " << c.nx << "\n";
  o << "lx = " << fmt(c.lx) << "\n";
  o << "nv = " << c.nv << "\n";
  o << "vcut = " << fmt(c.vcut) << "\n\n";
  o << "[kernel]\n";
  o << "kernel_p = " << fmt(c.kernel_p) << "\n";
  o << "conv_mode = " << (c.conv_mode == ConvMode::fft ? "fft" : "direct") << "\n\n";
  o << "[scheme]\n";
  o << "dt = " << fmt(c.dt) << "\n";
  o << "t_end = " << fmt(c.t_end) << "\n";
  o << "implicit_tol = " << fmt(c.implicit_tol) << "\n";
  o << "formulation = " << (c.formulation == Formulation::pm ? "pm" : "sd") << "\n";
  o << "collision_only = " << (c.collision_only ? "true" : "false") << "\n\n";
  o << "[init]\n";
  o << "family = " << c.family << "\n";
  o << "epsilon = " << fmt(c.epsilon) << "\n\n";
  o << "[functionals]\n";
  o << "m = " << c.m << "\n";
  o << "l = " << fmt(c.l) << "\n";
  o << "q = " << fmt(c.q) << "\n";
  o << "s = " << fmt(c.s) << "\n";
  o << "sample_every = " << c.sample_every << "\n";
  o << "violation_tol = " << fmt(c.violation_tol) << "\n\n";
  o << "[output]\n";
  o << "run_csv = " << c.run_csv << "\n";
  o << "snapshot_prefix = " << c.snapshot_prefix << "\n";
  o << "snapshot_every = " << c.snapshot_every << "\n";
  return o.str();
}

}  // namespace vplk
