#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "stereobench/error.hpp"
#include "stereobench/evaluate.hpp"
#include "stereobench/resample.hpp"
#include "support.hpp"

using namespace stereobench;
using stereobench::testing::make_rig;

namespace {

DisparityMap constant_map(int w, int h, float d) {
  DisparityMap m(w, h);
  for (std::size_t i = 0; i < m.size(); ++i) m.set(i, d);
  return m;
}

DepthBinSpec paper_bins() { return {{{0, 2}, {2, 4}, {4, 6}}}; }

BinErrorReport model_report(const StereoRig& rig, double delta_d, std::size_t count) {
  BinErrorReport r;
  for (const DepthBin& b : DepthBinSpec::standard().bins) {
    BinStats s;
    s.bin = b;
    s.count = count;
    s.median_abs_err_m = theoretical_depth_error(b.center(), rig, delta_d);
    r.bins.push_back(s);
  }
  return r;
}

}  // namespace

TEST(Bins, StandardSpecIsValid) {
  const DepthBinSpec s = DepthBinSpec::standard();
  EXPECT_NO_THROW(s.validate());
  EXPECT_EQ(s.bins.front().z_min, 0.0);
  EXPECT_EQ(s.bins.back().z_max, 42.0);
  EXPECT_THROW((DepthBinSpec{{{2, 4}, {3, 5}}}.validate()), InvalidInput);
  EXPECT_THROW((DepthBinSpec{{{4, 2}}}.validate()), InvalidInput);
  EXPECT_THROW(DepthBinSpec{}.validate(), InvalidInput);
}

TEST(Masks, ConstantDepthFillsOneBin) {
  DepthMap d(4, 3);
  for (std::size_t i = 0; i < d.size(); ++i) d.set(i, 3.0f);
  const auto masks = depth_bin_masks(d, paper_bins());
  ASSERT_EQ(masks.size(), 3u);
  for (std::size_t i = 0; i < d.size(); ++i) {
    EXPECT_EQ(masks[0][i], 0);
    EXPECT_EQ(masks[1][i], 1);
    EXPECT_EQ(masks[2][i], 0);
  }
}

TEST(Masks, HalfOpenBoundaryAndInvalid) {
  DepthMap d(3, 1);
  d.set(0, 0, 4.0f);
  d.set(1, 0, 2.0f);
  const auto masks = depth_bin_masks(d, paper_bins());
  EXPECT_EQ(masks[1][0], 0);
  EXPECT_EQ(masks[2][0], 1);
  EXPECT_EQ(masks[1][1], 1);
  EXPECT_EQ(masks[0][1], 0);
  for (const auto& m : masks) EXPECT_EQ(m[2], 0);
}

TEST(Masks, PartitionProperty) {
  std::mt19937 rng(1);
  std::uniform_real_distribution<float> z(0.05f, 50.0f);
  std::bernoulli_distribution valid(0.8);
  DepthMap d(50, 40);
  for (std::size_t i = 0; i < d.size(); ++i)
    if (valid(rng)) d.set(i, z(rng));
  const DepthBinSpec spec = DepthBinSpec::standard();
  const auto masks = depth_bin_masks(d, spec);
  for (std::size_t i = 0; i < d.size(); ++i) {
    int n = 0;
    for (const auto& m : masks) n += m[i];
    const bool covered = d.valid(i) && d.at(i) < spec.bins.back().z_max;
    EXPECT_EQ(n, covered ? 1 : 0);
  }
}

TEST(Report, IdentityIsZero) {
  const StereoRig rig = make_rig(590, 0.15, 8, 6);
  DisparityMap ref(8, 6);
  for (std::size_t i = 0; i < ref.size(); ++i) ref.set(i, 10.0f + i);
  const BinErrorReport r = binned_error_report(ref, ref, rig, DepthBinSpec::standard());
  std::size_t total = 0;
  for (const auto& b : r.bins) {
    EXPECT_EQ(b.median_abs_err_m, 0.0);
    EXPECT_EQ(b.rms_err_m, 0.0);
    total += b.count;
  }
  EXPECT_EQ(total, ref.size());
}

TEST(Report, HandExample) {
  const StereoRig rig = make_rig(590, 0.15, 10, 10);
  const BinErrorReport r =
      binned_error_report(constant_map(10, 10, 44.0f), constant_map(10, 10, 44.25f), rig, paper_bins());
  EXPECT_EQ(r.bins[0].count, 0u);
  EXPECT_EQ(r.bins[1].count, 100u);
  EXPECT_NEAR(r.bins[1].median_abs_err_m, 0.01136, 1e-5);
  EXPECT_NEAR(r.bins[1].rms_err_m, 0.01136, 1e-5);
  EXPECT_NEAR(r.bins[1].median_abs_disp_err_px, 0.25, 1e-6);
}

TEST(Report, CoverageLossAndMismatch) {
  const StereoRig rig = make_rig(590, 0.15, 4, 4);
  DisparityMap test = constant_map(4, 4, 44.25f);
  test.invalidate(0, 0);
  test.invalidate(1, 0);
  const BinErrorReport r = binned_error_report(test, constant_map(4, 4, 44.25f), rig, paper_bins());
  EXPECT_EQ(r.bins[1].count, 14u);
  EXPECT_EQ(r.bins[1].coverage_loss, 2u);
  EXPECT_EQ(r.coverage_loss, 2u);
  EXPECT_THROW(binned_error_report(DisparityMap(3, 4), DisparityMap(4, 4), rig, paper_bins()), InvalidInput);
}

TEST(FitDeltaD, ExactModelRecovered) {
  const StereoRig rig = make_rig(1180, 0.15);
  const DeltaDFit fit = fit_delta_d(model_report(rig, 0.31, 1000), rig);
  EXPECT_NEAR(fit.delta_d_px, 0.31, 1e-6);
  EXPECT_NEAR(fit.residual_rms_m, 0.0, 1e-9);
  EXPECT_EQ(fit.bins_used, DepthBinSpec::standard().bins.size());
}

TEST(FitDeltaD, ZeroErrorsAndTooFewBins) {
  const StereoRig rig = make_rig(1180, 0.15);
  BinErrorReport zero = model_report(rig, 0.31, 1000);
  for (auto& b : zero.bins) b.median_abs_err_m = 0.0;
  EXPECT_EQ(fit_delta_d(zero, rig).delta_d_px, 0.0);
  BinErrorReport r = model_report(rig, 0.31, 50);
  EXPECT_THROW(fit_delta_d(r, rig), EstimationError);
  r.bins[3].count = r.bins[5].count = 200;
  EXPECT_THROW(fit_delta_d(r, rig), EstimationError);
  r.bins[7].count = 200;
  EXPECT_EQ(fit_delta_d(r, rig).bins_used, 3u);
}

TEST(FitDeltaD, CountWeighting) {
  // One bin disagrees on delta_d; raising its count pulls the fit toward it.
  const StereoRig rig = make_rig(1180, 0.15);
  BinErrorReport light = model_report(rig, 0.3, 1000);
  light.bins[4] = model_report(rig, 0.6, 1000).bins[4];
  BinErrorReport heavy = light;
  heavy.bins[4].count = 1000000;
  const double a = fit_delta_d(light, rig).delta_d_px;
  const double b = fit_delta_d(heavy, rig).delta_d_px;
  EXPECT_GT(a, 0.3);
  EXPECT_GT(b, a + 0.1);
  EXPECT_LT(b, 0.6);
}

TEST(NoiseFloor, IdentityIsZeroAndBlankEmpty) {
  const StereoRig rig = make_rig(590, 0.15, 40, 30);
  DisparityMap full(80, 60);
  std::mt19937 rng(2);
  std::uniform_real_distribution<float> d(5.0f, 80.0f);
  for (std::size_t i = 0; i < full.size(); ++i) full.set(i, d(rng));
  const BinErrorReport r = noise_floor(full, downsample_disparity(full), rig, DepthBinSpec::standard());
  for (const auto& b : r.bins) EXPECT_EQ(b.median_abs_err_m, 0.0);
  const BinErrorReport blank = noise_floor(DisparityMap(80, 60), DisparityMap(40, 30), rig, DepthBinSpec::standard());
  for (const auto& b : blank.bins) EXPECT_EQ(b.count, 0u);
  EXPECT_THROW(noise_floor(full, DisparityMap(30, 30), rig, DepthBinSpec::standard()), InvalidInput);
}

TEST(Scaling, ModelRatios) {
  const StereoRig full = make_rig(1180, 0.15);
  const StereoRig half = full.half_resolution();
  const ScalingCheck two = resolution_scaling_check(model_report(full, 0.31, 1000), model_report(half, 0.31, 1000));
  for (const auto& row : two.rows) EXPECT_NEAR(row.ratio, 2.0, 1e-12);
  EXPECT_NEAR(two.summary_ratio, 2.0, 1e-12);
  const ScalingCheck paper = resolution_scaling_check(model_report(full, 0.31, 1000), model_report(half, 0.25, 1000));
  EXPECT_NEAR(paper.summary_ratio, 1.613, 1e-3);
}

TEST(Scaling, ErrorCases) {
  const StereoRig rig = make_rig(1180, 0.15);
  EXPECT_THROW(resolution_scaling_check(model_report(rig, 0.3, 100), model_report(rig, 0.3, 100)),
               EstimationError);
  BinErrorReport other = model_report(rig, 0.3, 1000);
  other.bins.pop_back();
  EXPECT_THROW(resolution_scaling_check(model_report(rig, 0.3, 1000), other), InvalidInput);
}

TEST(PlaneFit, NoiseFreePlanes) {
  const StereoRig rig = make_rig(590, 0.15, 200, 150);
  const Roi roi{50, 25, 100, 100};
  DepthMap flat(200, 150);
  for (std::size_t i = 0; i < flat.size(); ++i) flat.set(i, 2.0f);
  const PlaneFitResult a = plane_fit_rmse(flat, rig, roi);
  EXPECT_LE(a.rmse_m, 1e-6);
  EXPECT_NEAR(a.c, 2.0, 1e-6);
  EXPECT_EQ(a.point_count, 10000u);

  // z = 3 + 0.2 x - 0.1 y along rays: z = 3 / (1 - 0.2 xn + 0.1 yn)
  DepthMap tilted(200, 150);
  for (int v = 0; v < 150; ++v) {
    for (int u = 0; u < 200; ++u) {
      const double xn = (u - rig.intrinsics.cx) / 590.0, yn = (v - rig.intrinsics.cy) / 590.0;
      tilted.set(u, v, static_cast<float>(3.0 / (1.0 - 0.2 * xn + 0.1 * yn)));
    }
  }
  const PlaneFitResult b = plane_fit_rmse(tilted, rig, roi);
  EXPECT_LE(b.rmse_m, 1e-6);
  EXPECT_NEAR(b.a, 0.2, 1e-5);
  EXPECT_NEAR(b.b, -0.1, 1e-5);
}

TEST(PlaneFit, ErrorCases) {
  const StereoRig rig = make_rig(590, 0.15, 200, 150);
  DepthMap d(200, 150);
  EXPECT_THROW(plane_fit_rmse(d, rig, {150, 100, 100, 100}), InvalidInput);
  EXPECT_THROW(plane_fit_rmse(d, rig, {0, 0, 100, 100}), EstimationError);
  for (int v = 0; v < 150; ++v) d.set(60, v, 2.0f);
  EXPECT_THROW(plane_fit_rmse(d, rig, {60, 10, 1, 20}), DegenerateGeometry);
}

TEST(Median, Definition) {
  EXPECT_EQ(median_of({}), 0.0);
  EXPECT_EQ(median_of({3, 1, 2}), 2.0);
  EXPECT_EQ(median_of({4, 1, 3, 2}), 2.5);
  // robust to a single outlier, unlike the mean
  EXPECT_EQ(median_of({1, 1, 1, 1000}), 1.0);
}
