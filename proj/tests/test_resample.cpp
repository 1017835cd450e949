#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "stereobench/error.hpp"
#include "stereobench/parallel.hpp"
#include "stereobench/resample.hpp"
#include "support.hpp"

using namespace stereobench;

TEST(LanczosKernel, HandValues) {
  EXPECT_NEAR(lanczos_kernel(0.5, 3), 0.6079, 1e-4);
  EXPECT_EQ(lanczos_kernel(0.0, 3), 1.0);
  EXPECT_EQ(lanczos_kernel(3.0, 3), 0.0);
  EXPECT_EQ(lanczos_kernel(-3.5, 3), 0.0);
  // sinc(x) sinc(x/a) evaluated directly
  const double x = 1.3;
  const double px = std::numbers::pi * x;
  EXPECT_NEAR(lanczos_kernel(x, 2), std::sin(px) / px * std::sin(px / 2) / (px / 2), 1e-12);
}

TEST(LanczosKernel, ExactZerosAtIntegers) {
  for (int a : {2, 3}) {
    for (int k = -a; k <= a; ++k) {
      EXPECT_EQ(lanczos_kernel(k, a), k == 0 ? 1.0 : 0.0) << "a=" << a << " k=" << k;
    }
  }
}

TEST(LanczosKernel, Symmetric) {
  for (double x = 0.0; x < 3.0; x += 0.0625) {
    EXPECT_EQ(lanczos_kernel(x, 3), lanczos_kernel(-x, 3));
  }
  EXPECT_THROW(lanczos_kernel(0.5, 4), InvalidInput);
}

TEST(LanczosWeights, MatchKernel) {
  double w[6];
  lanczos3_weights(0.0, w);
  for (int i = 0; i < 6; ++i) EXPECT_EQ(w[i], i == 2 ? 1.0 : 0.0);
  for (double t = 0.01; t < 1.0; t += 0.037) {
    lanczos3_weights(t, w);
    for (int i = 0; i < 6; ++i) {
      EXPECT_NEAR(w[i], lanczos_kernel(t - (i - 2), 3), 1e-9) << "t=" << t << " tap " << i;
    }
  }
}

TEST(ResizeHalf, Dimensions) {
  const ImageBuffer full(2560, 1984, 1);
  const ImageBuffer half = resize_half(full);
  EXPECT_EQ(half.width(), 1280);
  EXPECT_EQ(half.height(), 992);
  EXPECT_EQ(resize_half(ImageBuffer(8, 6, 3)).channels(), 3);
  EXPECT_THROW(resize_half(ImageBuffer(7, 6, 1)), InvalidInput);
}

TEST(ResizeHalf, PreservesConstantImage) {
  for (float level : {0.0f, 0.37f, 1.0f}) {
    ImageBuffer img(40, 30, 1);
    for (auto& s : img.samples()) s = level;
    const ImageBuffer half = resize_half(img);
    for (float s : half.samples()) EXPECT_NEAR(s, level, 1e-4);
  }
}

TEST(ResizeHalf, LinearRampSampledAtBlockCenters) {
  ImageBuffer img(64, 16, 1);
  for (int y = 0; y < 16; ++y)
    for (int x = 0; x < 64; ++x) img.at(x, y) = 0.1f + 0.01f * x;
  const ImageBuffer half = resize_half(img);
  // Away from the clamped border the symmetric filter reproduces the ramp.
  for (int i = 4; i < 28; ++i) EXPECT_NEAR(half.at(i, 4), 0.1 + 0.01 * (2 * i + 0.5), 1e-5);
  EXPECT_LT(half.at(0, 4), half.at(31, 4));
}

TEST(ResizeHalf, MeanApproximatelyPreserved) {
  const ImageBuffer img = stereobench::testing::noise_image(128, 96, 3);
  double a = 0, b = 0;
  for (float s : img.samples()) a += s;
  const ImageBuffer half = resize_half(img);
  for (float s : half.samples()) b += s;
  EXPECT_NEAR(a / img.samples().size(), b / half.samples().size(), 2e-3);
}

TEST(ResizeHalf, ThreadCountInvariant) {
  const ImageBuffer img = stereobench::testing::noise_image(200, 120, 9);
  set_thread_count(1);
  const ImageBuffer one = resize_half(img);
  set_thread_count(4);
  const ImageBuffer four = resize_half(img);
  set_thread_count(0);
  EXPECT_EQ(one, four);
}

TEST(Interpolate, IntegerPositionsAreExact) {
  const ImageBuffer img = stereobench::testing::noise_image(20, 15, 11);
  for (int y = 0; y < 15; ++y)
    for (int x = 0; x < 20; ++x) EXPECT_EQ(interpolate_lanczos3(img, x, y), img.at(x, y));
}

TEST(Interpolate, ReproducesSmoothSignal) {
  ImageBuffer img(64, 64, 1);
  for (int y = 0; y < 64; ++y)
    for (int x = 0; x < 64; ++x) img.at(x, y) = 0.5f + 0.3f * std::sin(0.2 * x) * std::cos(0.15 * y);
  for (double x = 10.25; x < 50; x += 3.7) {
    const double y = 20.6;
    EXPECT_NEAR(interpolate_lanczos3(img, x, y), 0.5 + 0.3 * std::sin(0.2 * x) * std::cos(0.15 * y),
                2e-3);
  }
}

TEST(DownsampleDisparity, HandExample) {
  DisparityMap d(2, 2);
  d.set(0, 0, 8.0f);
  d.set(1, 0, 8.2f);
  d.set(0, 1, std::numeric_limits<float>::infinity());
  d.set(1, 1, std::numeric_limits<float>::infinity());
  const DisparityMap h = downsample_disparity(d);
  ASSERT_EQ(h.width(), 1);
  ASSERT_TRUE(h.valid(0, 0));
  EXPECT_NEAR(h.at(0, 0), 4.05f, 1e-6);
  EXPECT_NEAR(downsample_disparity(d, DisparityScaling::keep).at(0, 0), 8.1f, 1e-6);
}

TEST(DownsampleDisparity, OddMedianAndAllInvalid) {
  DisparityMap d(4, 2);
  d.set(0, 0, 3.0f);
  d.set(1, 0, 9.0f);
  d.set(0, 1, 4.0f);
  const DisparityMap h = downsample_disparity(d, DisparityScaling::keep);
  EXPECT_EQ(h.at(0, 0), 4.0f);
  EXPECT_FALSE(h.valid(1, 0));
}

TEST(DownsampleDisparity, ValidityProperty) {
  std::mt19937 rng(12);
  std::bernoulli_distribution valid(0.4);
  std::uniform_real_distribution<float> val(1.0f, 100.0f);
  for (int n = 0; n < 50; ++n) {
    DisparityMap d(16, 12);
    for (std::size_t i = 0; i < d.size(); ++i)
      if (valid(rng)) d.set(i, val(rng));
    const DisparityMap h = downsample_disparity(d, DisparityScaling::keep);
    for (int j = 0; j < 6; ++j) {
      for (int i = 0; i < 8; ++i) {
        float lo = 1e9f, hi = -1.0f;
        bool any = false;
        for (int k = 0; k < 4; ++k) {
          const int x = 2 * i + k % 2, y = 2 * j + k / 2;
          if (!d.valid(x, y)) continue;
          any = true;
          lo = std::min(lo, d.at(x, y));
          hi = std::max(hi, d.at(x, y));
        }
        ASSERT_EQ(h.valid(i, j), any);
        if (any) {
          ASSERT_GE(h.at(i, j), lo);
          ASSERT_LE(h.at(i, j), hi);
        }
      }
    }
  }
}

TEST(ResizeHalf, RampKeepsEndpoints) {
  ImageBuffer img(128, 8, 1);
  for (int y = 0; y < 8; ++y)
    for (int x = 0; x < 128; ++x) img.at(x, y) = static_cast<float>(x) / 127.0f;
  const ImageBuffer half = resize_half(img);
  EXPECT_NEAR(half.at(0, 3), 0.0, 0.01);
  EXPECT_NEAR(half.at(63, 3), 1.0, 0.01);
}

TEST(DownsampleDisparity, ConstantAndAllInvalid) {
  DisparityMap d(6, 4);
  for (std::size_t i = 0; i < d.size(); ++i) d.set(i, 10.0f);
  const DisparityMap h = downsample_disparity(d);
  for (std::size_t i = 0; i < h.size(); ++i) EXPECT_EQ(h.at(i), 5.0f);
  EXPECT_EQ(downsample_disparity(DisparityMap(6, 4)).valid_count(), 0u);
  EXPECT_THROW(downsample_disparity(DisparityMap(5, 4)), InvalidInput);
}
