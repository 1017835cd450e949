#ifndef STEREOBENCH_RESAMPLE_HPP
#define STEREOBENCH_RESAMPLE_HPP

#include "stereobench/geometry.hpp"
#include "stereobench/image.hpp"

namespace stereobench {

/// sinc(x) * sinc(x / a) for |x| < a, else 0. Exactly 1 at 0 and exactly 0
/// at the other integers. a must be 2 or 3.
double lanczos_kernel(double x, int a);

/// Lanczos-3 weights of the six taps floor(x) - 2 .. floor(x) + 3 for
/// t = x - floor(x) in [0, 1), unnormalized. Same values as lanczos_kernel
/// up to rounding; t = 0 gives the exact unit impulse at tap 2.
void lanczos3_weights(double t, double (&w)[6]);

/// 2x decimation with a separable Lanczos-3 filter stretched to the output
/// grid. Output pixel i is centered on input coordinate 2i + 0.5; samples
/// outside the image clamp to the edge and tap weights are renormalized to
/// sum to one. Width and height must be even.
ImageBuffer resize_half(const ImageBuffer& img);

/// Lanczos-3 interpolation at fractional position (x, y), clamp-to-edge.
float interpolate_lanczos3(const ImageBuffer& img, double x, double y, int channel = 0);

enum class DisparityScaling {
  halve,  // values re-expressed in pixels of the half-resolution grid
  keep,   // values stay in full-resolution pixels
};

/// 2x decimation of a disparity map: each output is the median of the valid
/// members of its 2x2 block (mean of the middle pair for an even count),
/// invalid iff all four are invalid.
DisparityMap downsample_disparity(const DisparityMap& disp,
                                  DisparityScaling scaling = DisparityScaling::halve);

}  // namespace stereobench

#endif  // STEREOBENCH_RESAMPLE_HPP
