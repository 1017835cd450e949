#include "stereobench/evaluate.hpp"

#include <algorithm>
#include <cmath>

#include "stereobench/error.hpp"
#include "stereobench/resample.hpp"

namespace stereobench {

void DepthBinSpec::validate() const {
  if (bins.empty()) throw InvalidInput("depth bins: empty specification");
  for (std::size_t i = 0; i < bins.size(); ++i) {
    const DepthBin& b = bins[i];
    if (!(std::isfinite(b.z_min) && std::isfinite(b.z_max)) || !(b.z_min < b.z_max)) {
      throw InvalidInput("depth bins: bin " + std::to_string(i) + " needs z_min < z_max");
    }
    if (i == 0 && b.z_min < 0.0) throw InvalidInput("depth bins: first z_min must be >= 0");
    if (i > 0 && b.z_min < bins[i - 1].z_max) {
      throw InvalidInput("depth bins: bins must be sorted and non-overlapping");
    }
  }
}

DepthBinSpec DepthBinSpec::standard() {
  return {{{0, 2}, {2, 4}, {4, 6}, {6, 8}, {8, 10}, {10, 16}, {16, 22}, {22, 28}, {28, 36}, {36, 42}}};
}

double median_of(std::vector<double> values) {
  if (values.empty()) return 0.0;
  const std::size_t n = values.size();
  const auto mid = values.begin() + static_cast<std::ptrdiff_t>(n / 2);
  std::nth_element(values.begin(), mid, values.end());
  const double upper = *mid;
  if (n % 2) return upper;
  const double lower = *std::max_element(values.begin(), mid);
  return 0.5 * (lower + upper);
}

namespace {

int bin_index(const DepthBinSpec& spec, double z) {
  for (std::size_t n = 0; n < spec.bins.size(); ++n) {
    if (spec.bins[n].contains(z)) return static_cast<int>(n);
  }
  return -1;
}

}  // namespace

std::vector<std::vector<std::uint8_t>> depth_bin_masks(const DepthMap& ref_depth,
                                                       const DepthBinSpec& bins) {
  bins.validate();
  std::vector<std::vector<std::uint8_t>> masks(bins.bins.size(),
                                               std::vector<std::uint8_t>(ref_depth.size(), 0));
  for (std::size_t i = 0; i < ref_depth.size(); ++i) {
    if (!ref_depth.valid(i)) continue;
    const int n = bin_index(bins, ref_depth.at(i));
    if (n >= 0) masks[n][i] = 1;
  }
  return masks;
}

BinErrorReport binned_error_report(const DisparityMap& test, const DisparityMap& ref,
                                   const StereoRig& rig, const DepthBinSpec& bins,
                                   const std::string& label) {
  bins.validate();
  if (test.width() != ref.width() || test.height() != ref.height()) {
    throw InvalidInput("binned_error_report: map dimensions differ");
  }
  const double fb = rig.focal_baseline();
  if (!(fb > 0.0)) throw InvalidInput("binned_error_report: rig needs f*B > 0");

  const std::size_t nb = bins.bins.size();
  std::vector<std::vector<double>> depth_err(nb), disp_err(nb);
  std::vector<double> sq(nb, 0.0);
  BinErrorReport report;
  report.label = label;
  report.bins.resize(nb);
  for (std::size_t n = 0; n < nb; ++n) report.bins[n].bin = bins.bins[n];

  for (std::size_t i = 0; i < ref.size(); ++i) {
    if (!ref.valid(i)) continue;
    const double dr = ref.at(i);
    const double zr = fb / dr;
    const int n = bin_index(bins, zr);
    if (n < 0) continue;
    if (!test.valid(i)) {
      ++report.bins[n].coverage_loss;
      continue;
    }
    const double dt = test.at(i);
    const double dz = fb / dt - zr;
    depth_err[n].push_back(std::fabs(dz));
    disp_err[n].push_back(std::fabs(dt - dr));
    sq[n] += dz * dz;
  }
  for (std::size_t n = 0; n < nb; ++n) {
    BinStats& s = report.bins[n];
    s.count = depth_err[n].size();
    if (s.count > 0) {
      s.rms_err_m = std::sqrt(sq[n] / static_cast<double>(s.count));
      s.median_abs_err_m = median_of(std::move(depth_err[n]));
      s.median_abs_disp_err_px = median_of(std::move(disp_err[n]));
    }
    report.coverage_loss += s.coverage_loss;
  }
  return report;
}

DeltaDFit fit_delta_d(const BinErrorReport& report, const StereoRig& rig, std::size_t min_count) {
  const double fb = rig.focal_baseline();
  if (!(fb > 0.0)) throw InvalidInput("fit_delta_d: rig needs f*B > 0");
  double num = 0.0;
  double den = 0.0;
  DeltaDFit fit;
  for (const BinStats& s : report.bins) {
    if (s.count < min_count) continue;
    const double z = s.bin.center();
    const double q = z * z / fb;
    const double w = static_cast<double>(s.count);
    num += w * s.median_abs_err_m * q;
    den += w * q * q;
    ++fit.bins_used;
  }
  if (fit.bins_used < 3) {
    throw EstimationError("fit_delta_d: need at least 3 bins with >= " + std::to_string(min_count) +
                          " pixels, have " + std::to_string(fit.bins_used));
  }
  fit.delta_d_px = num / den;
  double rss = 0.0;
  double sum = 0.0;
  for (const BinStats& s : report.bins) {
    if (s.count < min_count) continue;
    const double z = s.bin.center();
    const double r = s.median_abs_err_m - z * z * fit.delta_d_px / fb;
    rss += r * r;
    sum += s.median_abs_err_m;
  }
  const double n = static_cast<double>(fit.bins_used);
  fit.residual_rms_m = std::sqrt(rss / n);
  fit.mean_error_m = sum / n;
  return fit;
}

BinErrorReport noise_floor(const DisparityMap& ref_full, const DisparityMap& ref_half,
                           const StereoRig& rig_half, const DepthBinSpec& bins) {
  if (ref_full.width() != 2 * ref_half.width() || ref_full.height() != 2 * ref_half.height()) {
    throw InvalidInput("noise_floor: full-resolution map must be twice the half-resolution size");
  }
  const DisparityMap down = downsample_disparity(ref_full, DisparityScaling::halve);
  return binned_error_report(down, ref_half, rig_half, bins, "noise_floor");
}

PlaneFitResult plane_fit_rmse(const DepthMap& depth, const StereoRig& rig, const Roi& roi) {
  if (roi.width <= 0 || roi.height <= 0 || roi.u0 < 0 || roi.v0 < 0 ||
      roi.u0 + roi.width > depth.width() || roi.v0 + roi.height > depth.height()) {
    throw InvalidInput("plane_fit_rmse: roi outside the image");
  }
  const Intrinsics& k = rig.intrinsics;
  std::vector<double> xs, ys, zs;
  for (int v = roi.v0; v < roi.v0 + roi.height; ++v) {
    for (int u = roi.u0; u < roi.u0 + roi.width; ++u) {
      if (!depth.valid(u, v)) continue;
      const double z = depth.at(u, v);
      xs.push_back((u - k.cx) * z / k.focal_length_px);
      ys.push_back((v - k.cy) * z / k.focal_length_px);
      zs.push_back(z);
    }
  }
  const std::size_t n = zs.size();
  if (2 * n < static_cast<std::size_t>(roi.width) * roi.height || n < 3) {
    throw EstimationError("plane_fit_rmse: fewer than half the roi pixels are valid");
  }
  double mx = 0.0, my = 0.0, mz = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += xs[i];
    my += ys[i];
    mz += zs[i];
  }
  mx /= n;
  my /= n;
  mz /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0, sxz = 0.0, syz = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = xs[i] - mx;
    const double y = ys[i] - my;
    const double z = zs[i] - mz;
    sxx += x * x;
    sxy += x * y;
    syy += y * y;
    sxz += x * z;
    syz += y * z;
  }
  const double det = sxx * syy - sxy * sxy;
  const double trace = sxx + syy;
  if (!(trace > 0.0) || !(det > 1e-12 * trace * trace)) {
    throw DegenerateGeometry("plane_fit_rmse: roi points are collinear");
  }
  PlaneFitResult out;
  out.a = (sxz * syy - syz * sxy) / det;
  out.b = (syz * sxx - sxz * sxy) / det;
  out.c = mz - out.a * mx - out.b * my;
  double rss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = zs[i] - (out.a * xs[i] + out.b * ys[i] + out.c);
    rss += r * r;
  }
  out.rmse_m = std::sqrt(rss / n);
  out.mean_depth_m = mz;
  out.point_count = n;
  out.roi = roi;
  return out;
}

ScalingCheck resolution_scaling_check(const BinErrorReport& full, const BinErrorReport& half,
                                      std::size_t min_count) {
  if (full.bins.size() != half.bins.size()) {
    throw InvalidInput("resolution_scaling_check: reports use different bins");
  }
  ScalingCheck out;
  double wsum = 0.0;
  double lsum = 0.0;
  for (std::size_t n = 0; n < full.bins.size(); ++n) {
    const BinStats& f = full.bins[n];
    const BinStats& h = half.bins[n];
    if (f.bin.z_min != h.bin.z_min || f.bin.z_max != h.bin.z_max) {
      throw InvalidInput("resolution_scaling_check: reports use different bins");
    }
    if (f.count < min_count || h.count < min_count) continue;
    if (!(f.median_abs_err_m > 0.0 && h.median_abs_err_m > 0.0)) continue;
    ScalingRow row;
    row.bin = f.bin;
    row.count = std::min(f.count, h.count);
    row.full_err_m = f.median_abs_err_m;
    row.half_err_m = h.median_abs_err_m;
    row.ratio = h.median_abs_err_m / f.median_abs_err_m;
    const double w = static_cast<double>(row.count);
    wsum += w;
    lsum += w * std::log(row.ratio);
    out.rows.push_back(row);
  }
  if (out.rows.empty()) throw EstimationError("resolution_scaling_check: no overlapping populated bins");
  out.summary_ratio = std::exp(lsum / wsum);
  return out;
}

}  // namespace stereobench
