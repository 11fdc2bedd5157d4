#ifndef PANELBREAK_RNG_HPP
#define PANELBREAK_RNG_HPP

#include <cstdint>
#include <random>

namespace panelbreak {

// splitmix64 finalizer, used to derive substream seeds from (master, id).
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Seeded stream wrapping mt19937_64. Substreams are derived by hashing the
// parent seed with a stream index, so per-series / per-replicate streams are
// independent of worker scheduling: stream(seed, i) is a pure function.
class RngStream {
public:
  explicit RngStream(std::uint64_t seed) : seed_(seed), engine_(mix64(seed)) {}

  // Child stream for series / replicate / component `id`.
  RngStream substream(std::uint64_t id) const {
    return RngStream(mix64(seed_ ^ mix64(id + 0x51ed2701a8f6ca33ULL)));
  }

  std::uint64_t seed() const { return seed_; }
  std::mt19937_64& engine() { return engine_; }

  double uniform() { return unif_(engine_); }
  double normal() { return norm_(engine_); }
  double normal(double mean, double sd) { return mean + sd * norm_(engine_); }

  int poisson(double lambda) {
    std::poisson_distribution<int> d(lambda);
    return d(engine_);
  }

  int bernoulli(double p) { return unif_(engine_) < p ? 1 : 0; }

  double exponential() {
    std::exponential_distribution<double> d(1.0);
    return d(engine_);
  }

private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
  std::uniform_real_distribution<double> unif_{0.0, 1.0};
  std::normal_distribution<double> norm_{0.0, 1.0};
};

}  // namespace panelbreak

#endif
