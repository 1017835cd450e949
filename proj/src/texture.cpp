#include <algorithm>
#include <cmath>

#include "hash.hpp"
#include "stereobench/synth.hpp"

namespace stereobench {

namespace {

double lattice(std::int64_t ix, std::int64_t iy, std::uint64_t seed) {
  return detail::to_unit(detail::hash3(static_cast<std::uint64_t>(ix),
                                       static_cast<std::uint64_t>(iy), seed));
}

double smooth(double t) { return t * t * (3.0 - 2.0 * t); }

double value_noise(double s, double t, std::uint64_t seed) {
  const double fs = std::floor(s), ft = std::floor(t);
  const auto ix = static_cast<std::int64_t>(fs);
  const auto iy = static_cast<std::int64_t>(ft);
  const double a = smooth(s - fs), b = smooth(t - ft);
  const double v00 = lattice(ix, iy, seed), v10 = lattice(ix + 1, iy, seed);
  const double v01 = lattice(ix, iy + 1, seed), v11 = lattice(ix + 1, iy + 1, seed);
  return (v00 * (1 - a) + v10 * a) * (1 - b) + (v01 * (1 - a) + v11 * a) * b;
}

}  // namespace

double texture_value(const TextureSpec& tex, double s, double t) {
  double sum = 0.0, amp = 1.0, freq = 1.0, norm = 0.0;
  for (int octave = 0; octave < 3; ++octave) {
    sum += amp * value_noise(s * freq, t * freq, detail::hash3(tex.seed, octave, 0x7e47));
    norm += amp;
    amp *= 0.5;
    freq *= 2.0;
  }
  const double n = sum / norm;
  return std::clamp(0.5 + tex.contrast * (n - 0.5), 0.1, 0.9);
}

}  // namespace stereobench
