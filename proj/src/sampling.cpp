#include "finsler/sampling.hpp"

#include <cmath>

#include "finsler/error.hpp"

namespace finsler {

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ull;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

constexpr int kPrimes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43,
                           47, 53};

double halton_value(std::uint64_t index, int base) {
  double result = 0.0;
  double f = 1.0;
  while (index > 0) {
    f /= base;
    result += f * static_cast<double>(index % base);
    index /= base;
  }
  return result;
}

}  // namespace

std::uint64_t mix_seed(std::uint64_t seed, std::string_view label) {
  std::uint64_t h = 0xcbf29ce484222325ull ^ seed;
  for (const char c : label) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ull;
  }
  std::uint64_t state = h;
  return splitmix64(state);
}

HaltonSource::HaltonSource(int dim, std::uint64_t seed) : dim_(dim) {
  if (dim < 1 || dim > static_cast<int>(std::size(kPrimes))) {
    throw PreconditionError("halton dimension out of range");
  }
  std::uint64_t state = seed;
  rotation_.resize(dim);
  for (int d = 0; d < dim; ++d) {
    rotation_[d] =
        static_cast<double>(splitmix64(state) >> 11) * 0x1.0p-53;
  }
  // Skip the first entries; early Halton points are strongly patterned.
  index_ = 64 + (splitmix64(state) % 512);
}

std::vector<double> HaltonSource::next() {
  std::vector<double> p(dim_);
  for (int d = 0; d < dim_; ++d) {
    double v = halton_value(index_, kPrimes[d]) + rotation_[d];
    v -= std::floor(v);
    p[d] = v;
  }
  ++index_;
  return p;
}

Sampler::Sampler(std::uint64_t seed) : seed_(seed), engine_(seed) {}

double Sampler::unit() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double Sampler::uniform(double lo, double hi) {
  return lo + (hi - lo) * unit();
}

std::vector<double> Sampler::direction(int n) {
  for (int attempt = 0; attempt < 256; ++attempt) {
    std::vector<double> v(n);
    double norm2 = 0.0;
    for (int i = 0; i < n; ++i) {
      v[i] = uniform(-1.0, 1.0);
      norm2 += v[i] * v[i];
    }
    if (norm2 >= 0.01) return v;
  }
  throw Error("direction sampling failed to produce a usable vector");
}

}  // namespace finsler
