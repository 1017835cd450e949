#ifndef STEREOBENCH_TESTS_SUPPORT_HPP
#define STEREOBENCH_TESTS_SUPPORT_HPP

#include <cstdint>
#include <random>
#include <vector>

#include "stereobench/geometry.hpp"
#include "stereobench/image.hpp"

namespace stereobench::testing {

inline StereoRig make_rig(double f, double baseline, int w = 2560, int h = 1984) {
  StereoRig rig;
  rig.intrinsics.focal_length_px = f;
  rig.intrinsics.width = w;
  rig.intrinsics.height = h;
  rig.intrinsics.cx = (w - 1) / 2.0;
  rig.intrinsics.cy = (h - 1) / 2.0;
  rig.baseline_m = baseline;
  return rig;
}

/// Uniform samples on the 8-bit grid, so PNG/PGM round trips are exact.
inline ImageBuffer random_image(int w, int h, int channels, std::uint32_t seed) {
  std::mt19937 rng(seed);
  std::uniform_int_distribution<int> code(0, 255);
  std::vector<float> s(static_cast<std::size_t>(w) * h * channels);
  for (auto& v : s) v = static_cast<float>(code(rng)) / 255.0f;
  return ImageBuffer(w, h, channels, std::move(s));
}

/// Continuous random texture in [0.1, 0.9].
inline ImageBuffer noise_image(int w, int h, std::uint32_t seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<float> u(0.1f, 0.9f);
  std::vector<float> s(static_cast<std::size_t>(w) * h);
  for (auto& v : s) v = u(rng);
  return ImageBuffer(w, h, 1, std::move(s));
}

}  // namespace stereobench::testing

#endif  // STEREOBENCH_TESTS_SUPPORT_HPP
