#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace hycon {

// Deterministic random source. All draws go through explicit mappings of the
// mt19937_64 stream so that a given seed reproduces the same values on every
// platform and compiler (std::*_distribution is not portable).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  std::uint64_t next_u64() { return eng_(); }

  // uniform in [0, 1)
  double uniform01() { return (next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // uniform in [0, n)
  int uniform_int(int n) {
    int k = static_cast<int>(uniform01() * n);
    return k < n ? k : n - 1;
  }

  // standard normal via Box-Muller, second draw cached
  double gaussian() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = 1.0 - uniform01();  // (0, 1], keeps log finite
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * 3.14159265358979323846 * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
  }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (int i = static_cast<int>(v.size()) - 1; i > 0; --i) {
      int j = uniform_int(i + 1);
      std::swap(v[i], v[j]);
    }
  }

 private:
  std::mt19937_64 eng_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace hycon
