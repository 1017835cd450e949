#ifndef STEREOBENCH_REPORT_HPP
#define STEREOBENCH_REPORT_HPP

#include <cstddef>
#include <string>
#include <vector>

namespace stereobench {

/// Half-open depth interval [z_min, z_max) in meters.
struct DepthBin {
  double z_min = 0.0;
  double z_max = 0.0;

  double center() const { return 0.5 * (z_min + z_max); }
  bool contains(double z) const { return z >= z_min && z < z_max; }
};

struct DepthBinSpec {
  std::vector<DepthBin> bins;

  /// Throws InvalidInput unless bins are non-empty intervals, sorted,
  /// non-overlapping and start at z >= 0.
  void validate() const;
  /// 2 m bins to 10 m, then 6 m bins to 42 m (with one 8 m bin at 28-36 m).
  static DepthBinSpec standard();
};

struct BinStats {
  DepthBin bin;
  std::size_t count = 0;             // pixels valid in both maps
  double median_abs_err_m = 0.0;     // median |z_test - z_ref|
  double rms_err_m = 0.0;            // sqrt(mean (z_test - z_ref)^2)
  double median_abs_disp_err_px = 0.0;
  std::size_t coverage_loss = 0;     // valid in ref, invalid in test
};

struct BinErrorReport {
  std::string label;
  std::vector<BinStats> bins;
  std::size_t coverage_loss = 0;     // total over all bins
};

}  // namespace stereobench

#endif  // STEREOBENCH_REPORT_HPP
