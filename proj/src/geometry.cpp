#include "stereobench/geometry.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "stereobench/error.hpp"
#include "stereobench/image.hpp"

namespace stereobench {

namespace {

void require_positive_finite(double v, const char* what) {
  if (!std::isfinite(v) || v <= 0.0) {
    throw InvalidInput(std::string(what) + " must be finite and > 0, got " + std::to_string(v));
  }
}

}  // namespace

void Intrinsics::validate() const {
  if (!std::isfinite(focal_length_px) || focal_length_px <= 0.0) {
    throw InvalidInput("intrinsics: focal_length_px must be > 0");
  }
  if (width < 2 || height < 2) {
    throw InvalidInput("intrinsics: width and height must be >= 2");
  }
  if (!(cx >= 0.0 && cx < width) || !(cy >= 0.0 && cy < height)) {
    throw InvalidInput("intrinsics: principal point outside the image");
  }
}

Intrinsics Intrinsics::half_resolution() const {
  Intrinsics h;
  h.focal_length_px = focal_length_px / 2.0;
  h.cx = (cx - 0.5) / 2.0;
  h.cy = (cy - 0.5) / 2.0;
  h.width = width / 2;
  h.height = height / 2;
  return h;
}

void StereoRig::validate() const {
  intrinsics.validate();
  if (!std::isfinite(baseline_m) || baseline_m <= 0.0) {
    throw InvalidInput("rig: baseline_m must be > 0");
  }
  for (double a : {relative_rotation_deg.roll, relative_rotation_deg.pitch,
                   relative_rotation_deg.yaw}) {
    if (!(std::abs(a) < kMaxRotationDeg)) {
      throw InvalidInput("rig: rotation components must lie in (-5, 5) degrees");
    }
  }
}

StereoRig StereoRig::half_resolution() const {
  StereoRig h = *this;
  h.intrinsics = intrinsics.half_resolution();
  return h;
}

std::array<double, 9> rotation_matrix(const RotationDeg& rot) {
  constexpr double kDeg = std::numbers::pi / 180.0;
  const double cr = std::cos(rot.roll * kDeg), sr = std::sin(rot.roll * kDeg);
  const double cp = std::cos(rot.pitch * kDeg), sp = std::sin(rot.pitch * kDeg);
  const double cw = std::cos(rot.yaw * kDeg), sw = std::sin(rot.yaw * kDeg);
  // Rz * Rx
  const double a[9] = {cr, -sr * cp, sr * sp,  //
                       sr, cr * cp,  -cr * sp,  //
                       0,  sp,       cp};
  // (Rz * Rx) * Ry
  const double ry[9] = {cw, 0, sw, 0, 1, 0, -sw, 0, cw};
  std::array<double, 9> r{};
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      r[i * 3 + j] = a[i * 3 + 0] * ry[0 * 3 + j] + a[i * 3 + 1] * ry[1 * 3 + j] +
                     a[i * 3 + 2] * ry[2 * 3 + j];
    }
  }
  return r;
}

template <class Tag>
ScalarMap<Tag>::ScalarMap(int width, int height) : width_(width), height_(height) {
  if (width < 0 || height < 0) throw InvalidInput("map dimensions must be non-negative");
  const std::size_t n = static_cast<std::size_t>(width) * height;
  values_.assign(n, std::numeric_limits<float>::infinity());
  valid_.assign(n, 0);
}

template <class Tag>
void ScalarMap<Tag>::set(std::size_t i, float v) {
  if (std::isfinite(v) && v > 0.0f) {
    values_[i] = v;
    valid_[i] = 1;
  } else {
    invalidate(i);
  }
}

template <class Tag>
void ScalarMap<Tag>::invalidate(std::size_t i) {
  values_[i] = std::numeric_limits<float>::infinity();
  valid_[i] = 0;
}

template <class Tag>
std::size_t ScalarMap<Tag>::valid_count() const {
  std::size_t n = 0;
  for (auto f : valid_) n += f;
  return n;
}

template class ScalarMap<detail::DisparityTag>;
template class ScalarMap<detail::DepthTag>;

void PointCloud::validate() const {
  if (!colors.empty() && colors.size() != points.size()) {
    throw InvalidInput("point cloud: color count does not match point count");
  }
  for (const auto& p : points) {
    if (!std::isfinite(p.x) || !std::isfinite(p.y) || !std::isfinite(p.z)) {
      throw InvalidInput("point cloud: non-finite coordinate");
    }
  }
}

double disparity_to_depth(double disparity_px, const StereoRig& rig) {
  require_positive_finite(disparity_px, "disparity");
  return rig.focal_baseline() / disparity_px;
}

double depth_to_disparity(double depth_m, const StereoRig& rig) {
  require_positive_finite(depth_m, "depth");
  return rig.focal_baseline() / depth_m;
}

double theoretical_depth_error(double depth_m, const StereoRig& rig, double delta_d_px) {
  if (!std::isfinite(depth_m) || depth_m < 0.0) {
    throw InvalidInput("depth must be finite and >= 0");
  }
  require_positive_finite(delta_d_px, "delta_d");
  return depth_m * depth_m * delta_d_px / rig.focal_baseline();
}

double range_scaling_factor(double npix_ratio) {
  require_positive_finite(npix_ratio, "pixel-count ratio");
  return std::sqrt(npix_ratio);
}

double baseline_sensitivity_ratio(double length_a_m, double length_b_m) {
  require_positive_finite(length_a_m, "length_a");
  require_positive_finite(length_b_m, "length_b");
  const double r = length_a_m / length_b_m;
  return r * r;
}

Point3 triangulate_pixel(double u, double v, double disparity_px, const StereoRig& rig) {
  const auto& k = rig.intrinsics;
  const double z = disparity_to_depth(disparity_px, rig);
  return {(u - k.cx) * z / k.focal_length_px, (v - k.cy) * z / k.focal_length_px, z};
}

DepthMap disparity_to_depth_map(const DisparityMap& disp, const StereoRig& rig) {
  DepthMap depth(disp.width(), disp.height());
  const double fb = rig.focal_baseline();
  for (std::size_t i = 0; i < disp.size(); ++i) {
    if (disp.valid(i)) depth.set(i, static_cast<float>(fb / disp.at(i)));
  }
  return depth;
}

PointCloud disparity_map_to_cloud(const DisparityMap& disp, const StereoRig& rig,
                                  const ImageBuffer* color) {
  if (color != nullptr && (color->width() != disp.width() || color->height() != disp.height())) {
    throw InvalidInput("cloud: color image dimensions do not match the disparity map");
  }
  PointCloud cloud;
  cloud.points.reserve(disp.valid_count());
  for (int y = 0; y < disp.height(); ++y) {
    for (int x = 0; x < disp.width(); ++x) {
      if (!disp.valid(x, y)) continue;
      cloud.points.push_back(triangulate_pixel(x, y, disp.at(x, y), rig));
      if (color != nullptr) {
        if (color->channels() == 3) {
          cloud.colors.push_back({color->at(x, y, 0), color->at(x, y, 1), color->at(x, y, 2)});
        } else {
          const float g = color->at(x, y, 0);
          cloud.colors.push_back({g, g, g});
        }
      }
    }
  }
  return cloud;
}

}  // namespace stereobench
