#include "stereobench/resample.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <vector>

#include "stereobench/error.hpp"
#include "stereobench/parallel.hpp"

namespace stereobench {

namespace {

double sinc(double x) {
  const double px = std::numbers::pi * x;
  return std::sin(px) / px;
}

// Downsampling taps for output center 2i + 0.5: input k = 2i - 5 .. 2i + 6.
constexpr int kHalfTaps = 12;
constexpr int kHalfFirst = -5;

std::array<double, kHalfTaps> half_weights() {
  std::array<double, kHalfTaps> w{};
  double sum = 0.0;
  for (int t = 0; t < kHalfTaps; ++t) {
    const double offset = (kHalfFirst + t) - 0.5;
    w[t] = lanczos_kernel(offset / 2.0, 3);
    sum += w[t];
  }
  for (auto& v : w) v /= sum;
  return w;
}

}  // namespace

double lanczos_kernel(double x, int a) {
  if (a != 2 && a != 3) throw InvalidInput("lanczos_kernel: a must be 2 or 3");
  if (x == 0.0) return 1.0;
  const double ax = std::abs(x);
  if (ax >= a) return 0.0;
  if (ax == std::floor(ax)) return 0.0;
  return sinc(x) * sinc(x / a);
}

void lanczos3_weights(double t, double (&w)[6]) {
  if (t == 0.0) {
    for (int q = 0; q < 6; ++q) w[q] = q == 2 ? 1.0 : 0.0;
    return;
  }
  // Tap q sits at offset o = t + 2 - q; sin(pi o) = (-1)^q sin(pi t) and
  // sin(pi o / 3) expands around a = pi t / 3.
  constexpr double pi = std::numbers::pi;
  const double spt = std::sin(pi * t);
  const double sa = std::sin(pi * t / 3.0);
  const double ca = std::cos(pi * t / 3.0);
  const double h = std::sqrt(3.0) / 2.0;
  // sin(a + m pi / 3) for m = 2 - q.
  const double s3[6] = {-0.5 * sa + h * ca, 0.5 * sa + h * ca, sa,
                        0.5 * sa - h * ca, -0.5 * sa - h * ca, -sa};
  for (int q = 0; q < 6; ++q) {
    const double o = t + 2 - q;
    const double sign = q % 2 ? -1.0 : 1.0;
    w[q] = 3.0 * sign * spt * s3[q] / (pi * pi * o * o);
  }
}

ImageBuffer resize_half(const ImageBuffer& img) {
  if (img.width() % 2 != 0 || img.height() % 2 != 0 || img.width() == 0 || img.height() == 0) {
    throw InvalidInput("resize_half: width and height must be even and non-zero");
  }
  const int w = img.width(), h = img.height(), ch = img.channels();
  const int ow = w / 2, oh = h / 2;
  static const auto weights = half_weights();

  // Horizontal pass: h rows x ow columns, unclamped intermediate.
  std::vector<float> tmp(static_cast<std::size_t>(h) * ow * ch);
  parallel_for(0, h, [&](int y) {
    const auto row = img.row(y);
    for (int i = 0; i < ow; ++i) {
      for (int c = 0; c < ch; ++c) {
        double acc = 0.0;
        for (int t = 0; t < kHalfTaps; ++t) {
          const int k = std::clamp(2 * i + kHalfFirst + t, 0, w - 1);
          acc += weights[t] * row[static_cast<std::size_t>(k) * ch + c];
        }
        tmp[(static_cast<std::size_t>(y) * ow + i) * ch + c] = static_cast<float>(acc);
      }
    }
  });

  ImageBuffer out(ow, oh, ch);
  auto dst = out.samples();
  parallel_for(0, oh, [&](int j) {
    for (int i = 0; i < ow; ++i) {
      for (int c = 0; c < ch; ++c) {
        double acc = 0.0;
        for (int t = 0; t < kHalfTaps; ++t) {
          const int k = std::clamp(2 * j + kHalfFirst + t, 0, h - 1);
          acc += weights[t] * tmp[(static_cast<std::size_t>(k) * ow + i) * ch + c];
        }
        dst[(static_cast<std::size_t>(j) * ow + i) * ch + c] =
            std::clamp(static_cast<float>(acc), 0.0f, 1.0f);
      }
    }
  });
  return out;
}

float interpolate_lanczos3(const ImageBuffer& img, double x, double y, int channel) {
  const int x0 = static_cast<int>(std::floor(x));
  const int y0 = static_cast<int>(std::floor(y));
  double wx[6], wy[6];
  lanczos3_weights(x - x0, wx);
  lanczos3_weights(y - y0, wy);
  double sx = 0.0, sy = 0.0;
  for (int t = 0; t < 6; ++t) {
    sx += wx[t];
    sy += wy[t];
  }
  double acc = 0.0;
  for (int j = 0; j < 6; ++j) {
    const int yy = std::clamp(y0 - 2 + j, 0, img.height() - 1);
    double racc = 0.0;
    for (int i = 0; i < 6; ++i) {
      const int xx = std::clamp(x0 - 2 + i, 0, img.width() - 1);
      racc += wx[i] * img.at(xx, yy, channel);
    }
    acc += wy[j] * racc;
  }
  return std::clamp(static_cast<float>(acc / (sx * sy)), 0.0f, 1.0f);
}

DisparityMap downsample_disparity(const DisparityMap& disp, DisparityScaling scaling) {
  if (disp.width() % 2 != 0 || disp.height() % 2 != 0) {
    throw InvalidInput("downsample_disparity: width and height must be even");
  }
  const int ow = disp.width() / 2, oh = disp.height() / 2;
  const float scale = scaling == DisparityScaling::halve ? 0.5f : 1.0f;
  DisparityMap out(ow, oh);
  for (int j = 0; j < oh; ++j) {
    for (int i = 0; i < ow; ++i) {
      std::array<float, 4> v{};
      int n = 0;
      for (int dy = 0; dy < 2; ++dy) {
        for (int dx = 0; dx < 2; ++dx) {
          if (disp.valid(2 * i + dx, 2 * j + dy)) v[n++] = disp.at(2 * i + dx, 2 * j + dy);
        }
      }
      if (n == 0) continue;
      std::sort(v.begin(), v.begin() + n);
      const float med = (n % 2 == 1) ? v[n / 2] : 0.5f * (v[n / 2 - 1] + v[n / 2]);
      out.set(i, j, med * scale);
    }
  }
  return out;
}

}  // namespace stereobench
