#include "stereobench/synth.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "hash.hpp"
#include "stereobench/error.hpp"
#include "stereobench/parallel.hpp"

namespace stereobench {

namespace {

constexpr double kEps = 1e-9;

struct Hit {
  double t = std::numeric_limits<double>::infinity();
  Vec3 p;
  double s = 0.0;  // surface texture coordinates (meters)
  double u = 0.0;
  const TextureSpec* texture = nullptr;
};

Vec3 at(const Vec3& o, const Vec3& d, double t) {
  return {o.x + t * d.x, o.y + t * d.y, o.z + t * d.z};
}

void hit_plane(const Primitive& prim, const Vec3& o, const Vec3& d, Hit& best) {
  const double tx = prim.kind == PrimitiveKind::tilted_plane ? prim.tilt_x : 0.0;
  const double ty = prim.kind == PrimitiveKind::tilted_plane ? prim.tilt_y : 0.0;
  const Vec3& c = prim.center;
  const double denom = d.z - tx * d.x - ty * d.y;
  if (std::abs(denom) < kEps) return;
  const double t = (c.z + tx * (o.x - c.x) + ty * (o.y - c.y) - o.z) / denom;
  if (!(t > kEps) || t >= best.t) return;
  const Vec3 p = at(o, d, t);
  if (std::abs(p.x - c.x) > 0.5 * prim.extent.x || std::abs(p.y - c.y) > 0.5 * prim.extent.y) {
    return;
  }
  best = {t, p, p.x, p.y, &prim.texture};
}

void hit_box(const Primitive& prim, const Vec3& o, const Vec3& d, Hit& best) {
  const double lo[3] = {prim.center.x - 0.5 * prim.extent.x, prim.center.y - 0.5 * prim.extent.y,
                        prim.center.z - 0.5 * prim.extent.z};
  const double hi[3] = {prim.center.x + 0.5 * prim.extent.x, prim.center.y + 0.5 * prim.extent.y,
                        prim.center.z + 0.5 * prim.extent.z};
  const double org[3] = {o.x, o.y, o.z};
  const double dir[3] = {d.x, d.y, d.z};
  double t_near = -std::numeric_limits<double>::infinity();
  double t_far = std::numeric_limits<double>::infinity();
  int axis = -1;
  for (int a = 0; a < 3; ++a) {
    if (std::abs(dir[a]) < kEps) {
      if (org[a] < lo[a] || org[a] > hi[a]) return;
      continue;
    }
    double t1 = (lo[a] - org[a]) / dir[a];
    double t2 = (hi[a] - org[a]) / dir[a];
    if (t1 > t2) std::swap(t1, t2);
    if (t1 > t_near) {
      t_near = t1;
      axis = a;
    }
    t_far = std::min(t_far, t2);
  }
  if (axis < 0 || t_near > t_far || !(t_near > kEps) || t_near >= best.t) return;
  const Vec3 p = at(o, d, t_near);
  switch (axis) {
    case 0: best = {t_near, p, p.z, p.y, &prim.texture}; break;
    case 1: best = {t_near, p, p.x, p.z, &prim.texture}; break;
    default: best = {t_near, p, p.x, p.y, &prim.texture}; break;
  }
}

void hit_ground(const GroundPlane& g, const Vec3& o, const Vec3& d, Hit& best) {
  const double denom = d.y - g.slope * d.z;
  if (std::abs(denom) < kEps) return;
  const double t = (g.camera_height + g.slope * o.z - o.y) / denom;
  if (!(t > kEps) || t >= best.t) return;
  const Vec3 p = at(o, d, t);
  if (p.z <= kMinPrimitiveDepth) return;
  best = {t, p, p.x, p.z, &g.texture};
}

Hit trace(const SceneSpec& scene, const Vec3& o, const Vec3& d) {
  Hit best;
  for (const auto& prim : scene.primitives) {
    if (prim.kind == PrimitiveKind::box) {
      hit_box(prim, o, d, best);
    } else {
      hit_plane(prim, o, d, best);
    }
  }
  if (scene.ground) hit_ground(*scene.ground, o, d, best);
  return best;
}

double shade(const Hit& h) {
  if (h.texture == nullptr) return 0.0;
  const TextureSpec& tex = *h.texture;
  if (tex.mapping == TextureMapping::projected) {
    return texture_value(tex, h.p.x / (h.p.z * tex.scale), h.p.y / (h.p.z * tex.scale));
  }
  return texture_value(tex, h.s / tex.scale, h.u / tex.scale);
}

using Mat3 = std::array<double, 9>;

Vec3 mul(const Mat3& r, const Vec3& v) {
  return {r[0] * v.x + r[1] * v.y + r[2] * v.z, r[3] * v.x + r[4] * v.y + r[5] * v.z,
          r[6] * v.x + r[7] * v.y + r[8] * v.z};
}

/// Renders one view. `rotation` maps camera-frame rays into the world frame.
ImageBuffer render_view(const SceneSpec& scene, const Intrinsics& k, const Vec3& origin,
                        const Mat3& rotation, const RenderOptions& opts, std::uint64_t view_id) {
  ImageBuffer img(k.width, k.height, 1);
  const int ss = std::max(1, opts.supersample);
  const double inv_f = 1.0 / k.focal_length_px;
  const double weight = 1.0 / (ss * ss);
  auto out = img.samples();
  parallel_for(0, k.height, [&](int v) {
    for (int u = 0; u < k.width; ++u) {
      double acc = 0.0;
      for (int j = 0; j < ss; ++j) {
        for (int i = 0; i < ss; ++i) {
          const double du = (i + 0.5) / ss - 0.5;
          const double dv = (j + 0.5) / ss - 0.5;
          const Vec3 cam{(u + du - k.cx) * inv_f, (v + dv - k.cy) * inv_f, 1.0};
          acc += shade(trace(scene, origin, mul(rotation, cam)));
        }
      }
      double value = acc * weight;
      if (opts.noise_sigma > 0.0) {
        const std::uint64_t idx = static_cast<std::uint64_t>(v) * k.width + u;
        value += opts.noise_sigma *
                 detail::hashed_normal(detail::hash3(opts.noise_seed, view_id, idx));
      }
      out[static_cast<std::size_t>(v) * k.width + u] =
          static_cast<float>(std::clamp(value, 0.0, 1.0));
    }
  });
  return img;
}

constexpr Mat3 kIdentity{1, 0, 0, 0, 1, 0, 0, 0, 1};

void check_rotation(const RotationDeg& r, const char* what) {
  for (double a : {r.roll, r.pitch, r.yaw}) {
    if (!std::isfinite(a) || !(std::abs(a) < kMaxRotationDeg)) {
      throw InvalidInput(std::string(what) + ": rotation outside the small-angle bound");
    }
  }
}

}  // namespace

void SceneSpec::validate() const {
  if (primitives.empty() && !ground) {
    throw SceneValidationError("primitives", "scene has no primitives and no ground");
  }
  auto check_texture = [](const TextureSpec& t, const std::string& field) {
    if (!(t.scale > 0.0) || !std::isfinite(t.scale)) {
      throw SceneValidationError(field + ".texture.scale", "must be > 0");
    }
    if (!(t.contrast > 0.0) || !std::isfinite(t.contrast)) {
      throw SceneValidationError(field + ".texture.contrast", "must be > 0");
    }
  };
  for (std::size_t i = 0; i < primitives.size(); ++i) {
    const auto& p = primitives[i];
    const std::string field = "primitives[" + std::to_string(i) + "]";
    if (!(p.extent.x > 0.0) || !(p.extent.y > 0.0) ||
        (p.kind == PrimitiveKind::box && !(p.extent.z > 0.0))) {
      throw SceneValidationError(field + ".extent", "must be > 0");
    }
    double min_z = p.center.z;
    if (p.kind == PrimitiveKind::box) {
      min_z = p.center.z - 0.5 * p.extent.z;
    } else if (p.kind == PrimitiveKind::tilted_plane) {
      min_z = p.center.z - 0.5 * (std::abs(p.tilt_x) * p.extent.x + std::abs(p.tilt_y) * p.extent.y);
    }
    if (!std::isfinite(min_z) || min_z <= kMinPrimitiveDepth) {
      throw SceneValidationError(field + ".center", "depth must exceed 0.1 m (primitive behind or at the camera)");
    }
    check_texture(p.texture, field);
  }
  if (ground) {
    if (!std::isfinite(ground->camera_height) || !std::isfinite(ground->slope)) {
      throw SceneValidationError("ground", "height and slope must be finite");
    }
    check_texture(ground->texture, "ground");
  }
}

RenderOutput render(const SceneSpec& scene, const StereoRig& rig, const RenderOptions& opts) {
  rig.validate();
  scene.validate();
  const Intrinsics& k = rig.intrinsics;
  RenderOutput out;
  out.left = render_view(scene, k, {0, 0, 0}, kIdentity, opts, 0);
  out.right = render_right(scene, rig, opts);
  out.gt_disparity = DisparityMap(k.width, k.height);
  out.gt_depth = DepthMap(k.width, k.height);
  const double fb = rig.focal_baseline();
  parallel_for(0, k.height, [&](int v) {
    for (int u = 0; u < k.width; ++u) {
      const Vec3 dir{(u - k.cx) / k.focal_length_px, (v - k.cy) / k.focal_length_px, 1.0};
      const Hit h = trace(scene, {0, 0, 0}, dir);
      if (h.texture == nullptr) continue;
      const double z = h.p.z;
      out.gt_depth.set(u, v, static_cast<float>(z));
      out.gt_disparity.set(u, v, static_cast<float>(fb / z));
    }
  });
  return out;
}

ImageBuffer render_right(const SceneSpec& scene, const StereoRig& rig, const RenderOptions& opts) {
  rig.validate();
  scene.validate();
  return render_view(scene, rig.intrinsics, {rig.baseline_m, 0, 0},
                     rotation_matrix(rig.relative_rotation_deg), opts, 1);
}

std::vector<RenderOutput> render_sequence(const SceneSpec& scene, const StereoRig& rig,
                                          const std::vector<RotationDeg>& perturbation,
                                          const RenderOptions& opts) {
  if (perturbation.empty()) throw InvalidInput("render_sequence: empty perturbation list");
  for (const auto& p : perturbation) check_rotation(rig.relative_rotation_deg + p, "render_sequence");
  std::vector<RenderOutput> frames;
  frames.reserve(perturbation.size());
  const RenderOutput base = render(scene, rig, opts);
  for (const auto& p : perturbation) {
    StereoRig r = rig;
    r.relative_rotation_deg = rig.relative_rotation_deg + p;
    RenderOutput f;
    f.left = base.left;
    f.gt_disparity = base.gt_disparity;
    f.gt_depth = base.gt_depth;
    f.right = (r.relative_rotation_deg == rig.relative_rotation_deg) ? base.right
                                                                      : render_right(scene, r, opts);
    frames.push_back(std::move(f));
  }
  return frames;
}

std::vector<RotationDeg> vibration_trace(int frames, std::uint64_t seed,
                                         const RotationDeg& amplitude_deg) {
  if (frames < 1) throw InvalidInput("vibration_trace: frames must be >= 1");
  std::vector<RotationDeg> trace(static_cast<std::size_t>(frames));
  const double amps[3] = {amplitude_deg.roll, amplitude_deg.pitch, amplitude_deg.yaw};
  for (int axis = 0; axis < 3; ++axis) {
    detail::SplitMix rng(detail::hash3(seed, static_cast<std::uint64_t>(axis), 0xf1b));
    const int components = 3 + static_cast<int>(rng.next() % 3);
    double freq[5], phase[5], weight[5];
    for (int c = 0; c < components; ++c) {
      freq[c] = rng.uniform(0.01, 0.25);  // cycles per frame
      phase[c] = rng.uniform(0.0, 2.0 * std::numbers::pi);
      weight[c] = rng.uniform(0.5, 1.0);
    }
    std::vector<double> values(trace.size());
    double peak = 0.0;
    for (int f = 0; f < frames; ++f) {
      double v = 0.0;
      for (int c = 0; c < components; ++c) {
        v += weight[c] * std::sin(2.0 * std::numbers::pi * freq[c] * f + phase[c]);
      }
      values[f] = v;
      peak = std::max(peak, std::abs(v));
    }
    const double scale = peak > 0.0 ? std::abs(amps[axis]) / peak : 0.0;
    for (int f = 0; f < frames; ++f) {
      double v = values[f] * scale;
      v = std::clamp(v, -std::abs(amps[axis]), std::abs(amps[axis]));
      double* slot = axis == 0 ? &trace[f].roll : axis == 1 ? &trace[f].pitch : &trace[f].yaw;
      *slot = v;
    }
  }
  return trace;
}

StereoRig eagle_rig() {
  StereoRig rig;
  rig.intrinsics = {1180.0, 1279.5, 991.5, 2560, 1984};
  rig.baseline_m = 0.15;
  return rig;
}

}  // namespace stereobench

namespace stereobench {

namespace {

TextureSpec projected(std::uint64_t seed, double radians_per_feature) {
  return {seed, radians_per_feature, TextureMapping::projected, 2.0};
}

// Feature size of roughly 8 px at f = 1180.
constexpr double kPatternScale = 8.0 / 1180.0;

Primitive board(Vec3 center, double w, double h, TextureSpec tex) {
  Primitive p;
  p.kind = PrimitiveKind::fronto_rect;
  p.center = center;
  p.extent = {w, h, 0.0};
  p.texture = tex;
  return p;
}

/// Person-sized box whose front face is at `front_z`, standing on the ground.
Primitive person(double x, double front_z, const GroundPlane& g, std::uint64_t seed) {
  Primitive p;
  p.kind = PrimitiveKind::box;
  const double depth = 0.3, height = 1.7;
  const double cz = front_z + 0.5 * depth;
  p.center = {x, g.camera_height + g.slope * cz - 0.5 * height, cz};
  p.extent = {0.5, height, depth};
  p.texture = projected(seed, kPatternScale);
  return p;
}

}  // namespace

std::vector<std::string> scene_preset_names() {
  return {"board@2m", "board@6m", "edge", "paper-analog", "calib-wall"};
}

SceneSpec scene_preset(const std::string& name) {
  SceneSpec s;
  if (name == "board@2m") {
    s.primitives.push_back(board({0, 0, 2.0}, 1.2, 1.0, projected(21, kPatternScale)));
  } else if (name == "board@6m") {
    s.primitives.push_back(board({0, 0, 6.0}, 3.6, 3.0, projected(22, kPatternScale)));
  } else if (name == "edge") {
    // Near board covers x < 0 at 2 m; its right edge projects onto column cx.
    s.primitives.push_back(board({-0.6, 0, 2.0}, 1.2, 1.2, projected(31, kPatternScale)));
    s.primitives.push_back(board({0, 0, 6.0}, 8.0, 6.0, projected(32, kPatternScale)));
  } else if (name == "paper-analog") {
    GroundPlane g;
    g.camera_height = 1.0;
    g.slope = 0.05;  // 1 m of elevation change per 20 m of range
    g.texture = projected(11, kPatternScale);
    s.ground = g;
    const double wall_z = 90.0;
    const double wall_bottom = g.camera_height + g.slope * wall_z;
    s.primitives.push_back(board({0, wall_bottom - 45.0, wall_z}, 220.0, 90.0,
                                 projected(12, kPatternScale)));
    s.primitives.push_back(person(-0.35, 0.71, g, 13));
    s.primitives.push_back(person(0.9, 4.50, g, 14));
    s.primitives.push_back(person(-1.2, 20.93, g, 15));
  } else if (name == "calib-wall") {
    Primitive wall = board({0, 0, 12.0}, 40.0, 30.0, {41, 0.12, TextureMapping::surface, 2.0});
    s.primitives.push_back(wall);
  } else {
    throw InvalidInput("unknown scene preset '" + name + "'");
  }
  return s;
}

}  // namespace stereobench
