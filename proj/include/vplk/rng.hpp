#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace vplk {

// Deterministic Gaussian source. Box-Muller on top of mt19937_64 so that
// streams are reproducible across standard library implementations; the
// distribution classes in <random> do not guarantee identical sequences.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  double uniform() {
    // strictly inside (0, 1); never returns 0, safe for log()
    return (static_cast<double>(eng_() >> 11) + 0.5) * 0x1p-53;
  }

  double gaussian() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 2.0 * 3.14159265358979323846 * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

  std::vector<double> gaussian_vector(std::size_t n) {
    std::vector<double> out(n);
    for (auto& x : out) x = gaussian();
    return out;
  }

  std::uint64_t raw() { return eng_(); }

 private:
  std::mt19937_64 eng_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace vplk
