#ifndef STEREOBENCH_AUTOCALIB_HPP
#define STEREOBENCH_AUTOCALIB_HPP

// Dense online estimation of the right camera's relative rotation from the
// vertical misalignment of census matches.
//
// A sample at left pixel (u, v) carries dv = v_L - v_R, the vertical offset
// of its best right-image match with the sign flipped. For a right camera
// rotated by small angles (pitch about x, yaw about y, roll about z),
//
//   dv(u, v) = -f * pitch + roll * (u - cx) + yaw * (u - cx)(v - cy) / f
//
// to first order. estimate_rotation fits this model, warps the right image
// by the estimate and re-fits the residual, so curvature terms and subpixel
// bias vanish as the residual goes to zero. See docs/config.md.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "stereobench/geometry.hpp"
#include "stereobench/image.hpp"
#include "stereobench/matcher.hpp"

namespace stereobench {

struct VerticalSample {
  double u = 0.0;
  double v = 0.0;
  double dv = 0.0;
  double weight = 1.0;
};

struct SampleParams {
  int grid_step = 8;
  int search_h = 64;  // horizontal disparities 0..search_h
  int search_v = 3;   // vertical offsets -search_v..search_v
  WindowSize census{9, 7};
  WindowSize block{15, 15};
  /// Minimum mean absolute central-difference gradient (per pixel, both
  /// axes) of the left image over the block.
  double min_gradient = 0.01;
  /// Best horizontal cost must be below this fraction of the best cost at
  /// least 2 px away.
  double uniqueness = 0.9;

  void validate() const;
};

/// Census block matches on a regular grid of the left image. Sites with too
/// little texture, an ambiguous horizontal match, or a vertical minimum on
/// the search boundary are omitted. Blank images give an empty list.
std::vector<VerticalSample> collect_vertical_samples(const ImageBuffer& left,
                                                     const ImageBuffer& right,
                                                     const SampleParams& params = {});

struct CalibrationEstimate {
  double roll_deg = 0.0;
  double pitch_deg = 0.0;
  double yaw_deg = 0.0;
  double residual_rms_px = 0.0;  // over inliers
  std::size_t sample_count = 0;
  double inlier_fraction = 0.0;

  RotationDeg rotation() const { return {roll_deg, pitch_deg, yaw_deg}; }
};

inline constexpr std::size_t kMinCalibrationSamples = 50;

struct FitParams {
  int irls_iterations = 3;
  /// Huber threshold as a multiple of the median absolute residual.
  double huber_k = 1.345;
};

/// Huber-weighted least squares of dv on {-f, u - cx, (u - cx)(v - cy)/f}.
/// Throws EstimationError with fewer than 50 samples and DegenerateGeometry
/// when the samples do not constrain all three angles.
CalibrationEstimate fit_rotation(const std::vector<VerticalSample>& samples,
                                 const Intrinsics& intr, const FitParams& params = {});

/// Right image resampled (Lanczos-3) as seen by a right camera with the
/// given rotation removed: out(p) = right(K R^T K^-1 p).
ImageBuffer derotate_right(const ImageBuffer& right, const Intrinsics& intr,
                           const RotationDeg& rotation);

struct CalibParams {
  SampleParams sampling;
  FitParams fit;
  /// Sample-fit-derotate passes; 1 is the plain single-shot fit.
  int iterations = 4;
};

/// Relative rotation of the right camera from a single pair.
CalibrationEstimate estimate_rotation(const ImageBuffer& left, const ImageBuffer& right,
                                      const Intrinsics& intr, const CalibParams& params = {});

struct StereoPair {
  ImageBuffer left;
  ImageBuffer right;
};

struct TrackOptions {
  CalibParams calib;
  /// Exponential smoothing weight of the newest estimate; 1 disables it.
  double ema_alpha = 1.0;
};

/// Independent per-frame estimates; frames whose estimate fails are gaps
/// (nullopt) and do not affect the others. With smoothing, a gap leaves the
/// running average unchanged.
std::vector<std::optional<CalibrationEstimate>> track_sequence(
    const std::vector<StereoPair>& frames, const Intrinsics& intr,
    const TrackOptions& options = {});

inline constexpr const char* kTraceCsvHeader =
    "frame,roll_deg,pitch_deg,yaw_deg,residual_rms_px,inlier_fraction";

/// One row per frame, %.6g values; gap rows keep the frame index and leave
/// the other fields empty.
std::string encode_trace_csv(const std::vector<std::optional<CalibrationEstimate>>& trace);
void write_trace_csv(const std::string& path,
                     const std::vector<std::optional<CalibrationEstimate>>& trace);

}  // namespace stereobench

#endif  // STEREOBENCH_AUTOCALIB_HPP
