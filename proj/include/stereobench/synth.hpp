#ifndef STEREOBENCH_SYNTH_HPP
#define STEREOBENCH_SYNTH_HPP

// Deterministic ray-cast renderer for textured planar scenes with exact
// ground-truth disparity. World frame = left camera frame; the right camera
// sits at (baseline, 0, 0) and is rotated about its own optical center by
// the rig's relative rotation.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "stereobench/geometry.hpp"
#include "stereobench/image.hpp"

namespace stereobench {

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
};

enum class TextureMapping {
  /// Texture coordinates are surface coordinates in meters / scale.
  surface,
  /// Texture coordinates are (x/z, y/z) / scale: a pattern projected from
  /// the left camera center, so feature size in pixels does not depend on
  /// range. Scale is in radians per feature.
  projected,
};

struct TextureSpec {
  std::uint64_t seed = 1;
  double scale = 0.05;  // meters (surface) or radians (projected) per feature
  TextureMapping mapping = TextureMapping::surface;
  double contrast = 2.0;
};

/// Three-octave value noise (persistence 0.5) at texture coordinates
/// (s, t), contrast-stretched around 0.5 and clipped to [0.1, 0.9].
double texture_value(const TextureSpec& tex, double s, double t);

enum class PrimitiveKind {
  fronto_rect,   // z = center.z, |x - cx| <= w/2, |y - cy| <= h/2
  tilted_plane,  // z = center.z + tilt_x (x - cx) + tilt_y (y - cy), same footprint
  box,           // axis-aligned, extent = (w, h, depth)
};

struct Primitive {
  PrimitiveKind kind = PrimitiveKind::fronto_rect;
  Vec3 center;
  Vec3 extent{1.0, 1.0, 1.0};
  double tilt_x = 0.0;  // dz/dx
  double tilt_y = 0.0;  // dz/dy
  TextureSpec texture;
};

/// Infinite ground y = camera_height + slope * z (y points down, so a
/// positive slope descends away from the camera).
struct GroundPlane {
  double camera_height = 1.0;
  double slope = 0.0;
  TextureSpec texture;
};

inline constexpr double kMinPrimitiveDepth = 0.1;

struct SceneSpec {
  std::vector<Primitive> primitives;
  std::optional<GroundPlane> ground;  // nullopt: void background

  /// Throws SceneValidationError naming the offending field.
  void validate() const;
};

struct RenderOptions {
  int supersample = 2;       // samples per pixel axis, box-filtered
  double noise_sigma = 0.0;  // additive Gaussian pixel noise, seeded
  std::uint64_t noise_seed = 0;
};

struct RenderOutput {
  ImageBuffer left;
  ImageBuffer right;
  DisparityMap gt_disparity;  // left-referenced, f*B/z
  DepthMap gt_depth;
};

RenderOutput render(const SceneSpec& scene, const StereoRig& rig, const RenderOptions& opts = {});

/// Right view only; the left view does not depend on the rig rotation.
ImageBuffer render_right(const SceneSpec& scene, const StereoRig& rig,
                         const RenderOptions& opts = {});

/// Frame k uses rotation = rig rotation + perturbation[k].
std::vector<RenderOutput> render_sequence(const SceneSpec& scene, const StereoRig& rig,
                                          const std::vector<RotationDeg>& perturbation,
                                          const RenderOptions& opts = {});

/// Band-limited per-axis trace: a seeded sum of 3-5 sinusoids per axis,
/// scaled so that the largest |value| over the trace equals the amplitude.
std::vector<RotationDeg> vibration_trace(int frames, std::uint64_t seed,
                                         const RotationDeg& amplitude_deg);

/// Named scenes: "board@2m", "board@6m", "edge", "paper-analog",
/// "calib-wall". Throws InvalidInput for unknown names.
SceneSpec scene_preset(const std::string& name);
std::vector<std::string> scene_preset_names();

/// 2560x1984, f = 1180 px, B = 0.15 m, principal point at the image center.
StereoRig eagle_rig();

}  // namespace stereobench

#endif  // STEREOBENCH_SYNTH_HPP
