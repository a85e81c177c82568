#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace crossim {

// All randomness in a run flows from one 64-bit master seed. Each consumer
// derives its own named stream so that toggling one feature (e.g. the AV
// share) never shifts the draws seen by an unrelated consumer.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t master, std::string_view name) {
  std::uint64_t h = 1469598103934665603ULL;  // FNV-1a over the stream name
  for (char c : name) {
    h ^= static_cast<std::uint8_t>(c);
    h *= 1099511628211ULL;
  }
  return splitmix64(master ^ h);
}

class RngStream {
 public:
  RngStream() : gen_(0) {}
  RngStream(std::uint64_t master, std::string_view name)
      : gen_(derive_seed(master, name)) {}

  // Uniform on [0, 1).
  double uniform() {
    return (gen_() >> 11) * (1.0 / 9007199254740992.0);  // 53-bit mantissa
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, n).
  int uniform_int(int n) {
    return static_cast<int>(uniform() * n) % n;
  }

  bool bernoulli(double p) { return uniform() < p; }

  // Knuth's product method; per-step arrival means here are far below 1.
  int poisson(double mean) {
    const double limit = std::exp(-mean);
    double prod = 1.0;
    int k = -1;
    do {
      ++k;
      prod *= uniform();
    } while (prod > limit);
    return k;
  }

 private:
  std::mt19937_64 gen_;
};

}  // namespace crossim
