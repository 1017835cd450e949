#ifndef STEREOBENCH_GEOMETRY_HPP
#define STEREOBENCH_GEOMETRY_HPP

// Rectified pinhole stereo rig, disparity/depth maps and the closed-form
// depth-resolution relations built on z = f*B/d.
//
// Axis convention: right-handed, x right, y down, z forward, origin at the
// left camera's optical center. Pixel (u, v) = (column, row), pixel centers
// at integer coordinates.

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace stereobench {

class ImageBuffer;

struct Intrinsics {
  double focal_length_px = 0.0;
  double cx = 0.0;
  double cy = 0.0;
  int width = 0;
  int height = 0;

  /// Throws InvalidInput unless f > 0, 0 <= c < size and both sizes >= 2.
  void validate() const;
  std::size_t pixel_count() const { return static_cast<std::size_t>(width) * height; }
  /// Intrinsics of the same camera after 2x decimation, where output pixel i
  /// covers input pixels 2i and 2i+1.
  Intrinsics half_resolution() const;
};

/// Relative rotation of the right camera; angles in degrees.
struct RotationDeg {
  double roll = 0.0;   // about z (optical axis)
  double pitch = 0.0;  // about x
  double yaw = 0.0;    // about y

  RotationDeg operator+(const RotationDeg& o) const {
    return {roll + o.roll, pitch + o.pitch, yaw + o.yaw};
  }
  RotationDeg operator-(const RotationDeg& o) const {
    return {roll - o.roll, pitch - o.pitch, yaw - o.yaw};
  }
  bool operator==(const RotationDeg&) const = default;
};

/// Small-angle bound on every component of StereoRig::relative_rotation_deg.
inline constexpr double kMaxRotationDeg = 5.0;

struct StereoRig {
  Intrinsics intrinsics;
  double baseline_m = 0.0;
  RotationDeg relative_rotation_deg;

  void validate() const;
  double focal_baseline() const { return intrinsics.focal_length_px * baseline_m; }
  StereoRig half_resolution() const;
};

/// 3x3 rotation matrix (row-major) of the right camera body in the left frame.
/// Applied as Rz(roll) * Rx(pitch) * Ry(yaw).
std::array<double, 9> rotation_matrix(const RotationDeg& rot);

namespace detail {
struct DisparityTag {};
struct DepthTag {};
}  // namespace detail

/// Dense per-pixel scalar map with an explicit validity flag per pixel.
template <class Tag>
class ScalarMap {
 public:
  ScalarMap() = default;
  ScalarMap(int width, int height);

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t size() const { return values_.size(); }

  bool valid(int x, int y) const { return valid_[index(x, y)] != 0; }
  bool valid(std::size_t i) const { return valid_[i] != 0; }
  float at(int x, int y) const { return values_[index(x, y)]; }
  float at(std::size_t i) const { return values_[i]; }

  /// Stores v and marks the pixel valid when v is finite and > 0; any other
  /// value marks the pixel invalid.
  void set(int x, int y, float v) { set(index(x, y), v); }
  void set(std::size_t i, float v);
  void invalidate(int x, int y) { invalidate(index(x, y)); }
  void invalidate(std::size_t i);

  std::size_t valid_count() const;
  std::span<const float> values() const { return values_; }
  std::span<const std::uint8_t> validity() const { return valid_; }

  bool operator==(const ScalarMap&) const = default;

 private:
  std::size_t index(int x, int y) const {
    return static_cast<std::size_t>(y) * width_ + x;
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<float> values_;
  std::vector<std::uint8_t> valid_;
};

using DisparityMap = ScalarMap<detail::DisparityTag>;
using DepthMap = ScalarMap<detail::DepthTag>;

extern template class ScalarMap<detail::DisparityTag>;
extern template class ScalarMap<detail::DepthTag>;

struct Point3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
};

struct Color {
  float r = 0.0f;
  float g = 0.0f;
  float b = 0.0f;
};

struct PointCloud {
  std::vector<Point3> points;
  std::vector<Color> colors;  // empty, or one per point

  bool colored() const { return !colors.empty(); }
  /// Throws InvalidInput on non-finite coordinates or a color-count mismatch.
  void validate() const;
};

double disparity_to_depth(double disparity_px, const StereoRig& rig);
double depth_to_disparity(double depth_m, const StereoRig& rig);

/// Best-case depth resolution z^2 * delta_d / (f*B). z = 0 yields 0.
double theoretical_depth_error(double depth_m, const StereoRig& rig, double delta_d_px);

/// Factor by which usable range grows when the pixel count grows by npix_ratio.
double range_scaling_factor(double npix_ratio);

/// Deflection-angle sensitivity of a cantilever of length a relative to one
/// of length b: (a/b)^2.
double baseline_sensitivity_ratio(double length_a_m, double length_b_m);

Point3 triangulate_pixel(double u, double v, double disparity_px, const StereoRig& rig);

DepthMap disparity_to_depth_map(const DisparityMap& disp, const StereoRig& rig);

/// One point per valid disparity. `color` (1 or 3 channels) must match the
/// map dimensions when given.
PointCloud disparity_map_to_cloud(const DisparityMap& disp, const StereoRig& rig,
                                  const ImageBuffer* color = nullptr);

}  // namespace stereobench

#endif  // STEREOBENCH_GEOMETRY_HPP
