#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace dmca {

// Deterministic RNG. The mt19937_64 sequence is fixed by the standard, but
// std:: distributions are not, so the distributions here are hand-rolled:
// the same seed produces the same corpus / checkpoint bytes on any stdlib.
class Rng {
 public:
  explicit Rng(uint64_t seed) : engine_(seed) {}

  uint64_t next_u64() { return engine_(); }

  // uniform in [0, 1)
  double next_double() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  // uniform integer in [lo, hi] inclusive
  int next_int(int lo, int hi);

  // standard normal via Box-Muller (no cached second sample, keeps the
  // draw count predictable)
  double next_normal(double mean = 0.0, double stddev = 1.0);

  // Fisher-Yates
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (size_t i = v.size(); i > 1; --i) {
      size_t j = static_cast<size_t>(next_int(0, static_cast<int>(i) - 1));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace dmca
