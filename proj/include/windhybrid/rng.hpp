#ifndef WINDHYBRID_RNG_HPP
#define WINDHYBRID_RNG_HPP

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace windhybrid {

// All randomness in the project flows through these helpers so that results
// are reproducible bit-for-bit for a given seed, independent of the standard
// library's distribution implementations.

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  return splitmix64(seed ^ splitmix64(stream));
}

// Uniform in [0, 1) with 53 random bits.
inline double uniform01(std::mt19937_64& gen) {
  return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

inline double uniform(std::mt19937_64& gen, double lo, double hi) {
  return lo + (hi - lo) * uniform01(gen);
}

// Standard normal via Box-Muller; one draw per call, second value discarded
// to keep the stream layout independent of call parity.
inline double normal01(std::mt19937_64& gen) {
  double u1 = uniform01(gen);
  double u2 = uniform01(gen);
  if (u1 <= 0)
    u1 = 0x1.0p-53;
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
}

// Weibull via inverse CDF.
inline double weibull(std::mt19937_64& gen, double shape, double scale) {
  double u = uniform01(gen);
  if (u >= 1.0)
    u = 1.0 - 0x1.0p-53;
  return scale * std::pow(-std::log(1.0 - u), 1.0 / shape);
}

// In-place Fisher-Yates. Modulo draw keeps the permutation identical across
// platforms; the bias is irrelevant at these sizes.
template <typename T>
void shuffle_inplace(std::vector<T>& items, std::mt19937_64& gen) {
  for (std::size_t i = items.size(); i > 1; --i) {
    std::size_t j = static_cast<std::size_t>(gen() % i);
    std::swap(items[i - 1], items[j]);
  }
}

inline std::vector<std::size_t> random_permutation(std::size_t n, std::mt19937_64& gen) {
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i)
    idx[i] = i;
  shuffle_inplace(idx, gen);
  return idx;
}

} // namespace windhybrid

#endif
