#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace finsler {

// Stateless 64-bit mixer; used to derive independent sub-seeds so that the
// order in which check suites run never shifts another suite's samples.
std::uint64_t mix_seed(std::uint64_t seed, std::string_view label);

// Low-discrepancy point source: Halton sequence with a seed-derived
// Cranley-Patterson rotation. Deterministic across platforms.
class HaltonSource {
 public:
  HaltonSource(int dim, std::uint64_t seed);
  std::vector<double> next();  // in [0,1)^dim

 private:
  int dim_;
  std::uint64_t index_;
  std::vector<double> rotation_;
};

// Seeded pseudo-random scalars/vectors on top of std::mt19937_64. The
// mapping from raw engine output to doubles is written out here instead of
// using std::uniform_real_distribution, whose exact output sequence the
// standard leaves implementation-defined.
class Sampler {
 public:
  explicit Sampler(std::uint64_t seed);

  std::uint64_t seed() const { return seed_; }

  double unit();                            // [0, 1)
  double uniform(double lo, double hi);     // [lo, hi)
  // Components in [-1, 1], Euclidean norm >= 0.1 (resampled otherwise).
  std::vector<double> direction(int n);

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

}  // namespace finsler
