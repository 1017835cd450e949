#ifndef STEREOBENCH_MATCHER_HPP
#define STEREOBENCH_MATCHER_HPP

// Census-based stereo matchers.
//
// Both matchers share one matching cost: the Hamming distance between the
// census codes of left pixel (x, y) and right pixel (x - d, y), with the
// maximum cost (the number of census bits) when x - d < 0. Disparities are
// searched over the integers 0..max_disparity; WTA ties go to the smaller
// disparity. All aggregation is integer arithmetic, so results do not depend
// on thread count.
//
//   match_fast      box-filtered cost over the block window, WTA.
//   match_accurate  8-path semi-global aggregation, WTA, 3x3 median.
//
// Both apply a left-right consistency check and parabolic subpixel
// refinement (|offset| <= 0.5) around the integer minimum. The fast matcher
// fits the parabola to its census cost; the accurate matcher fits it to a
// zero-mean SSD intensity cost, which is smooth in the shift and so avoids
// the bias of census costs toward integer disparities; before the fit the
// SGM integer is moved to the intensity-cost minimum among it and its two
// neighbors. A pixel whose integer minimum is not unique is invalid.

#include <cstdint>
#include <string>
#include <vector>

#include "stereobench/geometry.hpp"
#include "stereobench/image.hpp"

namespace stereobench {

struct WindowSize {
  int width = 9;
  int height = 7;

  int census_bits() const { return width * height - 1; }
  bool operator==(const WindowSize&) const = default;
};

struct MatchParams {
  int max_disparity = 256;
  WindowSize census{9, 7};
  WindowSize block{9, 9};
  int p1 = 0;  // 0: 8 * census_bits / 64, rounded
  int p2 = 0;  // 0: 32 * census_bits / 64, rounded
  double lr_threshold = 1.0;
  bool subpixel = true;
  /// Accurate matcher only: window of the zero-mean SSD refinement around
  /// the SGM minimum.
  WindowSize refine{9, 9};

  /// Throws InvalidInput unless max_disparity >= 1, windows are odd with
  /// at most 64 census bits, P2 > P1 > 0 and lr_threshold >= 0.5.
  void validate() const;
  int effective_p1() const;
  int effective_p2() const;
  int levels() const { return max_disparity + 1; }
};

struct CensusImage {
  int width = 0;
  int height = 0;
  int bits = 0;
  std::vector<std::uint64_t> codes;

  std::uint64_t at(int x, int y) const {
    return codes[static_cast<std::size_t>(y) * width + x];
  }
};

/// Bit k (window scanned row-major, center skipped) is set iff that
/// neighbor is strictly darker than the center. Neighborhoods clamp at the
/// image border. Input must be single-channel.
CensusImage census_transform(const ImageBuffer& gray, WindowSize window);

/// Matching cost of left (x, y) against right (x - d, y).
inline int census_cost(const CensusImage& left, const CensusImage& right, int x, int y, int d) {
  if (x - d < 0) return left.bits;
  return __builtin_popcountll(left.at(x, y) ^ right.at(x - d, y));
}

inline constexpr std::int16_t kNoDisparity = -1;

struct MatchDetail {
  DisparityMap disparity;
  /// Refined, LR-checked disparity before any post-filter.
  DisparityMap refined;
  /// Integer WTA disparity per left pixel before refinement and checks.
  std::vector<std::int16_t> left_wta;
  /// Integer WTA disparity per right pixel (right pixel x matches left x + d).
  std::vector<std::int16_t> right_wta;
  /// Integer disparity the subpixel offset is added to: the WTA for the fast
  /// matcher, the WTA re-centered by at most 1 px on the intensity cost for
  /// the accurate matcher.
  std::vector<std::int16_t> subpixel_base;
};

MatchDetail match_fast_detailed(const ImageBuffer& left, const ImageBuffer& right,
                                const MatchParams& params);
DisparityMap match_fast(const ImageBuffer& left, const ImageBuffer& right,
                        const MatchParams& params);

MatchDetail match_accurate_detailed(const ImageBuffer& left, const ImageBuffer& right,
                                    const MatchParams& params);
DisparityMap match_accurate(const ImageBuffer& left, const ImageBuffer& right,
                            const MatchParams& params);

/// Path directions (dx, dy): L(p) is computed from L(p - (dx, dy)).
enum SgmDirection : unsigned {
  kLeftToRight = 1u << 0,       // (+1,  0)
  kRightToLeft = 1u << 1,       // (-1,  0)
  kTopToBottom = 1u << 2,       // ( 0, +1)
  kBottomToTop = 1u << 3,       // ( 0, -1)
  kTopLeft = 1u << 4,           // (+1, +1)
  kTopRight = 1u << 5,          // (-1, +1)
  kBottomLeft = 1u << 6,        // (+1, -1)
  kBottomRight = 1u << 7,       // (-1, -1)
  kAllDirections = 0xffu,
};

/// P2 used on a path step whose intensity changes by `step` (in [0, 1]):
/// max(P1, P2 * 16 / (16 + round(255 * step))).
int sgm_step_penalty(int p1, int p2, float step);

/// Sum over the selected directions of the SGM path costs
///   L(p, d) = C(p, d) + min(L(q, d), L(q, d +- 1) + P1, min_k L(q, k) + P2')
///             - min_k L(q, k),   q = p - r,
/// with L = C where the path enters the image. Layout ((y * W) + x) * D + d.
std::vector<std::uint16_t> sgm_aggregate(const CensusImage& left, const CensusImage& right,
                                         const ImageBuffer& left_gray, const MatchParams& params,
                                         unsigned directions = kAllDirections);

/// 3x3 median over the valid members of each neighborhood; invalid pixels
/// stay invalid.
DisparityMap median3x3(const DisparityMap& disp);

enum class MatcherKind { fast, accurate };

struct ThroughputReport {
  std::string resolution;  // "WxH"
  double seconds = 0.0;
  double fps = 0.0;
  double pixels_per_second = 0.0;
  double points_per_second = 0.0;  // valid output points per second
  DisparityMap disparity;
};

/// Times one run of the matcher on the given pair.
ThroughputReport throughput_benchmark(MatcherKind kind, const ImageBuffer& left,
                                      const ImageBuffer& right, const MatchParams& params);

/// Renders a textured synthetic pair at width x height (focal length scaled
/// from the 2560-px reference rig) and times the matcher on it.
ThroughputReport throughput_benchmark(MatcherKind kind, int width, int height,
                                      const MatchParams& params);

}  // namespace stereobench

#endif  // STEREOBENCH_MATCHER_HPP
