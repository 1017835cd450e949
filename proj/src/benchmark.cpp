#include <chrono>
#include <string>

#include "stereobench/error.hpp"
#include "stereobench/matcher.hpp"
#include "stereobench/synth.hpp"

namespace stereobench {

ThroughputReport throughput_benchmark(MatcherKind kind, const ImageBuffer& left,
                                      const ImageBuffer& right, const MatchParams& params) {
  ThroughputReport report;
  report.resolution = std::to_string(left.width()) + "x" + std::to_string(left.height());
  const auto t0 = std::chrono::steady_clock::now();
  report.disparity = kind == MatcherKind::fast ? match_fast(left, right, params)
                                               : match_accurate(left, right, params);
  const auto t1 = std::chrono::steady_clock::now();
  report.seconds = std::chrono::duration<double>(t1 - t0).count();
  if (report.seconds > 0.0) {
    report.fps = 1.0 / report.seconds;
    report.pixels_per_second = static_cast<double>(left.width()) * left.height() / report.seconds;
    report.points_per_second = static_cast<double>(report.disparity.valid_count()) / report.seconds;
  }
  return report;
}

ThroughputReport throughput_benchmark(MatcherKind kind, int width, int height,
                                      const MatchParams& params) {
  if (width < 16 || height < 16) throw InvalidInput("throughput_benchmark: resolution too small");
  const StereoRig ref = eagle_rig();
  StereoRig rig = ref;
  rig.intrinsics.focal_length_px = ref.intrinsics.focal_length_px * width / ref.intrinsics.width;
  rig.intrinsics.width = width;
  rig.intrinsics.height = height;
  rig.intrinsics.cx = 0.5 * (width - 1);
  rig.intrinsics.cy = 0.5 * (height - 1);
  RenderOptions opts;
  opts.supersample = 1;
  const RenderOutput pair = render(scene_preset("paper-analog"), rig, opts);
  return throughput_benchmark(kind, pair.left, pair.right, params);
}

}  // namespace stereobench
