#pragma once

#include <cstdint>
#include <initializer_list>
#include <vector>

namespace catemiss {

// Deterministic xoshiro256++ stream. All sampling in the project goes through
// this class so that results do not depend on the standard library's
// distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t next_u64();

  // Uniform on [0, 1).
  double uniform01();
  double uniform(double lo, double hi);
  // Uniform integer on [0, n). Requires n >= 1.
  std::size_t uniform_index(std::size_t n);
  // Standard normal via the Marsaglia polar method.
  double normal();
  bool bernoulli(double p);

  template <typename T>
  void shuffle(std::vector<T>& values) {
    for (std::size_t i = values.size(); i > 1; --i) {
      std::size_t j = uniform_index(i);
      std::swap(values[i - 1], values[j]);
    }
  }

  // Independent child stream identified by `stream`.
  Rng fork(std::uint64_t stream) const;

 private:
  std::uint64_t state_[4];
  double spare_normal_ = 0.0;
  bool has_spare_normal_ = false;
};

// Stable seed derivation for named sub-streams: replicates, folds, trees.
std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> path);
std::uint64_t hash_label(const char* label);

}  // namespace catemiss
