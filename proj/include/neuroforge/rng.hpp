#ifndef NEUROFORGE_RNG_HPP
#define NEUROFORGE_RNG_HPP

#include <cstdint>
#include <random>

#include <Eigen/Core>

namespace neuroforge {

using Rng = std::mt19937_64;

// splitmix64 finalizer; used to derive independent substream seeds so that
// evaluations stay deterministic regardless of thread count.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline Rng make_stream(std::uint64_t seed, std::uint64_t a = 0,
                       std::uint64_t b = 0, std::uint64_t c = 0) {
  std::uint64_t s = mix64(seed);
  s = mix64(s ^ mix64(a + 0x100000001b3ULL));
  s = mix64(s ^ mix64(b + 0xcbf29ce484222325ULL));
  s = mix64(s ^ mix64(c + 0x9ddfea08eb382d69ULL));
  return Rng(s);
}

inline double uniform_real(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

// Inclusive bounds.
inline int uniform_int(Rng& rng, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

inline bool bernoulli(Rng& rng, double p) {
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng) < p;
}

inline double normal(Rng& rng, double mean, double stddev) {
  return std::normal_distribution<double>(mean, stddev)(rng);
}

inline Eigen::VectorXd normal_vector(Rng& rng, Eigen::Index n) {
  Eigen::VectorXd z(n);
  std::normal_distribution<double> d(0.0, 1.0);
  for (Eigen::Index i = 0; i < n; ++i) z[i] = d(rng);
  return z;
}

}  // namespace neuroforge

#endif
