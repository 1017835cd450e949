#include "stereobench/scene_config.hpp"

#include "stereobench/error.hpp"

namespace stereobench {

namespace {

int line_of(const YAML::Node& n) { return n.Mark().line >= 0 ? n.Mark().line + 1 : 0; }

Vec3 vec3(const YAML::Node& node, const std::string& key, const std::string& path, Vec3 fallback) {
  const YAML::Node child = node[key];
  if (!child) return fallback;
  const std::string field = path + "." + key;
  if (!child.IsSequence() || (child.size() != 3 && child.size() != 2)) {
    throw ConfigError(field, line_of(child), "expected a list of 2 or 3 numbers");
  }
  try {
    Vec3 v{child[0].as<double>(), child[1].as<double>(), fallback.z};
    if (child.size() == 3) v.z = child[2].as<double>();
    return v;
  } catch (const YAML::Exception&) {
    throw ConfigError(field, line_of(child), "expected numbers");
  }
}

TextureSpec texture(const YAML::Node& node, const std::string& path) {
  TextureSpec t;
  if (!node) return t;
  t.seed = yaml_get<std::uint64_t>(node, "seed", path, t.seed);
  t.scale = yaml_get<double>(node, "scale", path, t.scale);
  t.contrast = yaml_get<double>(node, "contrast", path, t.contrast);
  const std::string mapping = yaml_get<std::string>(node, "mapping", path, "surface");
  if (mapping == "surface") {
    t.mapping = TextureMapping::surface;
  } else if (mapping == "projected") {
    t.mapping = TextureMapping::projected;
  } else {
    throw ConfigError(path + ".mapping", line_of(node["mapping"]),
                      "expected 'surface' or 'projected'");
  }
  return t;
}

YAML::Node texture_node(const TextureSpec& t) {
  YAML::Node n;
  n["seed"] = t.seed;
  n["scale"] = t.scale;
  n["contrast"] = t.contrast;
  n["mapping"] = t.mapping == TextureMapping::projected ? "projected" : "surface";
  return n;
}

YAML::Node seq(std::initializer_list<double> values) {
  YAML::Node n(YAML::NodeType::Sequence);
  for (double v : values) n.push_back(v);
  n.SetStyle(YAML::EmitterStyle::Flow);
  return n;
}

const char* kind_name(PrimitiveKind k) {
  switch (k) {
    case PrimitiveKind::fronto_rect: return "board";
    case PrimitiveKind::tilted_plane: return "tilted_plane";
    case PrimitiveKind::box: return "box";
  }
  return "board";
}

}  // namespace

SceneSpec scene_from_yaml(const YAML::Node& node) {
  SceneSpec scene;
  if (!node || node.IsNull()) throw ConfigError("scene", 0, "missing scene description");
  if (!node.IsMap()) throw ConfigError("scene", line_of(node), "expected a mapping");
  if (const YAML::Node prims = node["primitives"]) {
    if (!prims.IsSequence()) throw ConfigError("scene.primitives", line_of(prims), "expected a list");
    for (std::size_t i = 0; i < prims.size(); ++i) {
      const YAML::Node p = prims[i];
      const std::string path = "scene.primitives[" + std::to_string(i) + "]";
      Primitive prim;
      const std::string kind = yaml_get<std::string>(p, "kind", path, "board");
      if (kind == "board" || kind == "fronto_rect") {
        prim.kind = PrimitiveKind::fronto_rect;
      } else if (kind == "tilted_plane") {
        prim.kind = PrimitiveKind::tilted_plane;
      } else if (kind == "box") {
        prim.kind = PrimitiveKind::box;
      } else {
        throw ConfigError(path + ".kind", line_of(p["kind"]),
                          "unknown primitive kind '" + kind + "'");
      }
      prim.center = vec3(p, "center", path, prim.center);
      prim.extent = vec3(p, "extent", path, prim.extent);
      prim.tilt_x = yaml_get<double>(p, "tilt_x", path, 0.0);
      prim.tilt_y = yaml_get<double>(p, "tilt_y", path, 0.0);
      prim.texture = texture(p["texture"], path + ".texture");
      // Report scene-level invariants against the config line.
      if (!(prim.center.z > kMinPrimitiveDepth)) {
        throw ConfigError(path + ".center", line_of(p["center"]),
                          "depth must exceed 0.1 m, got " + std::to_string(prim.center.z));
      }
      scene.primitives.push_back(prim);
    }
  }
  if (const YAML::Node g = node["ground"]; g && !g.IsNull()) {
    GroundPlane ground;
    ground.camera_height = yaml_get<double>(g, "camera_height", "scene.ground", 1.0);
    ground.slope = yaml_get<double>(g, "slope", "scene.ground", 0.0);
    ground.texture = texture(g["texture"], "scene.ground.texture");
    scene.ground = ground;
  }
  try {
    scene.validate();
  } catch (const SceneValidationError& e) {
    throw ConfigError("scene." + e.field(), line_of(node), e.what());
  }
  return scene;
}

YAML::Node scene_to_yaml(const SceneSpec& scene) {
  YAML::Node n;
  YAML::Node prims(YAML::NodeType::Sequence);
  for (const auto& p : scene.primitives) {
    YAML::Node pn;
    pn["kind"] = kind_name(p.kind);
    pn["center"] = seq({p.center.x, p.center.y, p.center.z});
    pn["extent"] = seq({p.extent.x, p.extent.y, p.extent.z});
    if (p.kind == PrimitiveKind::tilted_plane) {
      pn["tilt_x"] = p.tilt_x;
      pn["tilt_y"] = p.tilt_y;
    }
    pn["texture"] = texture_node(p.texture);
    prims.push_back(pn);
  }
  n["primitives"] = prims;
  if (scene.ground) {
    YAML::Node g;
    g["camera_height"] = scene.ground->camera_height;
    g["slope"] = scene.ground->slope;
    g["texture"] = texture_node(scene.ground->texture);
    n["ground"] = g;
  }
  return n;
}

StereoRig rig_from_yaml(const YAML::Node& node, const StereoRig& defaults) {
  StereoRig rig = defaults;
  if (!node || node.IsNull()) return rig;
  const std::string path = "rig";
  rig.intrinsics.focal_length_px =
      yaml_get<double>(node, "focal_length_px", path, rig.intrinsics.focal_length_px);
  rig.intrinsics.cx = yaml_get<double>(node, "cx", path, rig.intrinsics.cx);
  rig.intrinsics.cy = yaml_get<double>(node, "cy", path, rig.intrinsics.cy);
  rig.intrinsics.width = yaml_get<int>(node, "width", path, rig.intrinsics.width);
  rig.intrinsics.height = yaml_get<int>(node, "height", path, rig.intrinsics.height);
  rig.baseline_m = yaml_get<double>(node, "baseline_m", path, rig.baseline_m);
  if (node["rotation_deg"]) {
    const Vec3 v = vec3(node, "rotation_deg", path, {});
    rig.relative_rotation_deg = {v.x, v.y, v.z};
  }
  try {
    rig.validate();
  } catch (const InvalidInput& e) {
    throw ConfigError(path, line_of(node), e.what());
  }
  return rig;
}

YAML::Node rig_to_yaml(const StereoRig& rig) {
  YAML::Node n;
  n["focal_length_px"] = rig.intrinsics.focal_length_px;
  n["cx"] = rig.intrinsics.cx;
  n["cy"] = rig.intrinsics.cy;
  n["width"] = rig.intrinsics.width;
  n["height"] = rig.intrinsics.height;
  n["baseline_m"] = rig.baseline_m;
  n["rotation_deg"] = seq({rig.relative_rotation_deg.roll, rig.relative_rotation_deg.pitch,
                           rig.relative_rotation_deg.yaw});
  return n;
}

}  // namespace stereobench
