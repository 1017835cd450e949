#ifndef STEREOBENCH_EVALUATE_HPP
#define STEREOBENCH_EVALUATE_HPP

// Depth-binned error evaluation against a reference disparity map,
// quadratic error-model fitting, the resampling noise floor and plane-fit
// RMSE. Bins are assigned from the reference depth with half-open
// intervals [z_min, z_max).

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "stereobench/geometry.hpp"
#include "stereobench/report.hpp"

namespace stereobench {

inline constexpr std::size_t kMinFitBinCount = 100;
inline constexpr std::size_t kMinScalingBinCount = 500;

/// mask[n][i] = 1 iff pixel i is valid and its depth lies in bin n.
std::vector<std::vector<std::uint8_t>> depth_bin_masks(const DepthMap& ref_depth,
                                                       const DepthBinSpec& bins);

/// Per-bin errors of test against ref; both maps are converted to depth
/// with z = f*B/d. Pixels inside a bin but invalid in test count toward
/// coverage loss and are otherwise excluded.
BinErrorReport binned_error_report(const DisparityMap& test, const DisparityMap& ref,
                                   const StereoRig& rig, const DepthBinSpec& bins,
                                   const std::string& label = "");

struct DeltaDFit {
  double delta_d_px = 0.0;
  std::size_t bins_used = 0;
  /// RMS over used bins of median_abs_err_m - z^2 * delta_d / (f*B).
  double residual_rms_m = 0.0;
  /// Mean median_abs_err_m over used bins.
  double mean_error_m = 0.0;
};

/// Count-weighted least-squares delta_d of the model e = z^2 * delta_d / (f*B)
/// over bins with count >= min_count, z = bin center. Throws
/// EstimationError when fewer than 3 bins qualify.
DeltaDFit fit_delta_d(const BinErrorReport& report, const StereoRig& rig,
                      std::size_t min_count = kMinFitBinCount);

/// Compares the downsampled full-resolution reference against the
/// half-resolution reference under the half-resolution rig.
BinErrorReport noise_floor(const DisparityMap& ref_full, const DisparityMap& ref_half,
                           const StereoRig& rig_half, const DepthBinSpec& bins);

struct Roi {
  int u0 = 0;
  int v0 = 0;
  int width = 0;
  int height = 0;
};

struct PlaneFitResult {
  double a = 0.0;  // z = a*x + b*y + c, camera frame meters
  double b = 0.0;
  double c = 0.0;
  double rmse_m = 0.0;
  double mean_depth_m = 0.0;
  std::size_t point_count = 0;
  Roi roi;
};

/// Back-projects the valid ROI pixels and fits z = a*x + b*y + c. Throws
/// InvalidInput for an ROI outside the image, EstimationError when fewer than
/// half the ROI pixels are valid, DegenerateGeometry for collinear points.
PlaneFitResult plane_fit_rmse(const DepthMap& depth, const StereoRig& rig, const Roi& roi);

struct ScalingRow {
  DepthBin bin;
  std::size_t count = 0;  // min of the two bin counts
  double full_err_m = 0.0;
  double half_err_m = 0.0;
  double ratio = 0.0;     // half / full
};

struct ScalingCheck {
  std::vector<ScalingRow> rows;
  /// Count-weighted geometric mean of the per-bin ratios.
  double summary_ratio = 0.0;
};

/// Ratio of half- to full-resolution median error per bin, over bins where
/// both reports have count >= min_count and non-zero error. Throws
/// InvalidInput when the bin specs differ and EstimationError when no bin
/// qualifies.
ScalingCheck resolution_scaling_check(const BinErrorReport& full, const BinErrorReport& half,
                                      std::size_t min_count = kMinScalingBinCount);

/// Median of values (mean of the middle pair for an even count); 0 if empty.
double median_of(std::vector<double> values);

}  // namespace stereobench

#endif  // STEREOBENCH_EVALUATE_HPP
