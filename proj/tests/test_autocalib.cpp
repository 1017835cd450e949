#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "stereobench/autocalib.hpp"
#include "stereobench/error.hpp"
#include "stereobench/evaluate.hpp"
#include "stereobench/synth.hpp"
#include "support.hpp"

using namespace stereobench;
using stereobench::testing::make_rig;

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

// Yaw acts through (u - cx)(v - cy)/f, so it needs some image extent.
Intrinsics intrinsics() { return make_rig(590.0, 0.15, 640, 480).intrinsics; }

// Samples on a full grid whose dv follows the first-order model exactly.
std::vector<VerticalSample> model_samples(const Intrinsics& in, double roll, double pitch, double yaw) {
  std::vector<VerticalSample> s;
  for (int v = 0; v < in.height; v += 12) {
    for (int u = 0; u < in.width; u += 12) {
      const double x = u - in.cx, y = v - in.cy, f = in.focal_length_px;
      s.push_back({double(u), double(v), -f * pitch * kDeg + roll * kDeg * x + yaw * kDeg * x * y / f});
    }
  }
  return s;
}

ImageBuffer shift_down(const ImageBuffer& img, int dy) {
  ImageBuffer out(img.width(), img.height(), 1);
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x) out.at(x, y) = img.at(x, std::clamp(y - dy, 0, img.height() - 1));
  return out;
}

RenderOutput wall(const RotationDeg& rot) {
  StereoRig rig = make_rig(590.0, 0.15, 640, 480);
  rig.relative_rotation_deg = rot;
  return render(scene_preset("calib-wall"), rig);
}

}  // namespace

TEST(FitRotation, AllZeroResiduals) {
  const CalibrationEstimate e = fit_rotation(model_samples(intrinsics(), 0, 0, 0), intrinsics());
  EXPECT_EQ(e.roll_deg, 0.0);
  EXPECT_EQ(e.pitch_deg, 0.0);
  EXPECT_EQ(e.yaw_deg, 0.0);
  EXPECT_EQ(e.residual_rms_px, 0.0);
}

TEST(FitRotation, RollFromLinearField) {
  const Intrinsics in = intrinsics();
  std::vector<VerticalSample> s = model_samples(in, 0, 0, 0);
  for (auto& p : s) p.dv = 0.002 * (p.u - in.cx);
  const CalibrationEstimate e = fit_rotation(s, in);
  EXPECT_NEAR(e.roll_deg, 0.1146, 1e-4);
  EXPECT_NEAR(e.pitch_deg, 0.0, 1e-9);
  EXPECT_NEAR(e.yaw_deg, 0.0, 1e-9);
}

TEST(FitRotation, RecoversAllThreeAnglesDespiteOutliers) {
  const Intrinsics in = intrinsics();
  std::vector<VerticalSample> s = model_samples(in, 0.03, -0.02, 0.04);
  std::mt19937 rng(3);
  std::normal_distribution<double> noise(0.0, 0.02);
  for (auto& p : s) p.dv += noise(rng);
  for (std::size_t i = 0; i < s.size(); i += 17) s[i].dv += 3.0;
  const CalibrationEstimate e = fit_rotation(s, in);
  EXPECT_NEAR(e.roll_deg, 0.03, 2e-3);
  EXPECT_NEAR(e.pitch_deg, -0.02, 2e-3);
  EXPECT_NEAR(e.yaw_deg, 0.04, 5e-3);
  EXPECT_LT(e.inlier_fraction, 1.0);
  EXPECT_EQ(e.sample_count, s.size());
}

TEST(FitRotation, ErrorCases) {
  const Intrinsics in = intrinsics();
  std::vector<VerticalSample> few(10, VerticalSample{10, 10, 0, 1});
  EXPECT_THROW(fit_rotation(few, in), EstimationError);
  std::vector<VerticalSample> line;
  for (int u = 0; u < 600; u += 6) line.push_back({double(u), 50.0, 0.1});
  EXPECT_THROW(fit_rotation(line, in), DegenerateGeometry);
}

TEST(Samples, RectifiedPairHasZeroOffset) {
  const RenderOutput out = wall({});
  const auto s = collect_vertical_samples(out.left, out.right);
  ASSERT_GT(s.size(), 100u);
  std::vector<double> dv;
  for (const auto& p : s) dv.push_back(p.dv);
  EXPECT_NEAR(median_of(dv), 0.0, 0.05);
}

TEST(Samples, DownwardShiftGivesMinusOne) {
  const RenderOutput out = wall({});
  const auto s = collect_vertical_samples(out.left, shift_down(out.right, 1));
  ASSERT_GT(s.size(), 100u);
  std::size_t near = 0;
  for (const auto& p : s) near += std::fabs(p.dv + 1.0) < 0.2;
  EXPECT_GT(near, s.size() * 9 / 10);
}

TEST(Samples, BlankImagesGiveNoSamples) {
  const ImageBuffer blank(640, 480, 1);
  EXPECT_TRUE(collect_vertical_samples(blank, blank).empty());
}

TEST(Samples, InvariantToGlobalGain) {
  const RenderOutput out = wall({0, 0.05, 0});
  const auto a = collect_vertical_samples(out.left, out.right);
  const auto b = collect_vertical_samples(out.left, apply_gain(out.right, 0.8f));
  ASSERT_FALSE(a.empty());
  EXPECT_NEAR(static_cast<double>(b.size()) / a.size(), 1.0, 0.1);
}

TEST(Derotate, ZeroRotationIsIdentity) {
  const RenderOutput out = wall({});
  EXPECT_EQ(derotate_right(out.right, intrinsics(), {}), out.right);
}

TEST(EstimateRotation, ClosedLoopPitch) {
  const RenderOutput out = wall({0, 0.05, 0});
  const CalibrationEstimate e = estimate_rotation(out.left, out.right, intrinsics());
  EXPECT_NEAR(e.pitch_deg, 0.05, 0.01);
  EXPECT_NEAR(e.roll_deg, 0.0, 0.01);
  EXPECT_NEAR(e.yaw_deg, 0.0, 0.01);
}

TEST(EstimateRotation, ClosedLoopAllAxes) {
  const RotationDeg truth{-0.04, 0.03, 0.05};
  const RenderOutput out = wall(truth);
  const CalibrationEstimate e = estimate_rotation(out.left, out.right, intrinsics());
  EXPECT_NEAR(e.roll_deg, truth.roll, 0.01);
  EXPECT_NEAR(e.pitch_deg, truth.pitch, 0.01);
  EXPECT_NEAR(e.yaw_deg, truth.yaw, 0.01);
}

TEST(EstimateRotation, RejectsMismatchedIntrinsics) {
  const RenderOutput out = wall({});
  EXPECT_THROW(estimate_rotation(out.left, out.right, make_rig(590, 0.15, 320, 240).intrinsics),
               InvalidInput);
}

TEST(TrackSequence, BlankFrameIsAGap) {
  const RenderOutput a = wall({0, 0.02, 0});
  const RenderOutput b = wall({0.03, 0, 0});
  const ImageBuffer blank(640, 480, 1);
  const std::vector<StereoPair> frames = {{a.left, a.right}, {blank, blank}, {b.left, b.right}};
  const auto trace = track_sequence(frames, intrinsics());
  ASSERT_EQ(trace.size(), 3u);
  ASSERT_TRUE(trace[0] && trace[2]);
  EXPECT_FALSE(trace[1]);
  const auto solo = track_sequence({frames[2]}, intrinsics());
  EXPECT_EQ(trace[2]->roll_deg, solo[0]->roll_deg);

  TrackOptions smooth;
  smooth.ema_alpha = 0.5;
  const auto s = track_sequence(frames, intrinsics(), smooth);
  EXPECT_FALSE(s[1]);
  EXPECT_NEAR(s[2]->roll_deg, 0.5 * trace[0]->roll_deg + 0.5 * trace[2]->roll_deg, 1e-12);
}

TEST(TraceCsv, Format) {
  CalibrationEstimate e;
  e.roll_deg = 0.0125;
  e.pitch_deg = -0.5;
  e.yaw_deg = 1e-7;
  e.residual_rms_px = 0.25;
  e.inlier_fraction = 0.75;
  const std::string text = encode_trace_csv({e, std::nullopt});
  EXPECT_EQ(text, std::string(kTraceCsvHeader) + "\n0,0.0125,-0.5,1e-07,0.25,0.75\n1,,,,,\n");
}
