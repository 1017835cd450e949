#ifndef STEREOBENCH_SRC_HASH_HPP
#define STEREOBENCH_SRC_HASH_HPP

#include <cmath>
#include <cstdint>
#include <numbers>

namespace stereobench::detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t hash3(std::uint64_t a, std::uint64_t b, std::uint64_t c) {
  return splitmix64(splitmix64(splitmix64(a) ^ b) ^ c);
}

/// Uniform in [0, 1) from the top 53 bits.
inline double to_unit(std::uint64_t h) {
  return static_cast<double>(h >> 11) * (1.0 / 9007199254740992.0);
}

/// Standard normal from two hashed uniforms (Box-Muller).
inline double hashed_normal(std::uint64_t h) {
  const double u1 = 1.0 - to_unit(h);
  const double u2 = to_unit(splitmix64(h));
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

/// Small counter-based generator.
class SplitMix {
 public:
  explicit SplitMix(std::uint64_t seed) : state_(seed) {}
  std::uint64_t next() { return splitmix64(state_++); }
  double uniform(double lo, double hi) { return lo + (hi - lo) * to_unit(next()); }

 private:
  std::uint64_t state_;
};

}  // namespace stereobench::detail

#endif  // STEREOBENCH_SRC_HASH_HPP
