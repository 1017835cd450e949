#include "cli.hpp"

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <yaml-cpp/yaml.h>

#include "stereobench/autocalib.hpp"
#include "stereobench/error.hpp"
#include "stereobench/evaluate.hpp"
#include "stereobench/geometry.hpp"
#include "stereobench/imageio.hpp"
#include "stereobench/matcher.hpp"
#include "stereobench/parallel.hpp"
#include "stereobench/resample.hpp"
#include "stereobench/scene_config.hpp"
#include "stereobench/synth.hpp"
#include "svg_plot.hpp"

namespace stereobench::cli {

namespace fs = std::filesystem;

namespace {

int line_of(const YAML::Node& n) { return n.Mark().line >= 0 ? n.Mark().line + 1 : 0; }

void check_keys(const YAML::Node& node, const std::string& path, const std::set<std::string>& allowed) {
  if (!node) return;
  if (!node.IsMap()) throw ConfigError(path.empty() ? "config" : path, line_of(node), "expected a mapping");
  for (const auto& kv : node) {
    const std::string key = kv.first.as<std::string>();
    if (!allowed.count(key)) {
      throw ConfigError(path.empty() ? key : path + "." + key, line_of(kv.first), "unknown key");
    }
  }
}

std::pair<double, double> pair_of(const YAML::Node& node, const std::string& path) {
  if (!node.IsSequence() || node.size() != 2) {
    throw ConfigError(path, line_of(node), "expected [low, high]");
  }
  try {
    return {node[0].as<double>(), node[1].as<double>()};
  } catch (const YAML::Exception&) {
    throw ConfigError(path, line_of(node), "expected two numbers");
  }
}

WindowSize window_of(const YAML::Node& node, const std::string& key, const std::string& path,
                     WindowSize fallback) {
  const YAML::Node n = node[key];
  if (!n) return fallback;
  const auto [w, h] = pair_of(n, path + "." + key);
  return {static_cast<int>(w), static_cast<int>(h)};
}

WindowSize parse_window(const std::string& text, const std::string& flag) {
  int w = 0, h = 0;
  char x = 0;
  if (std::sscanf(text.c_str(), "%d%c%d", &w, &x, &h) != 3 || (x != 'x' && x != 'X')) {
    throw InvalidInput(flag + ": expected WxH, got '" + text + "'");
  }
  return {w, h};
}

YAML::Node seq2(double a, double b) {
  YAML::Node n(YAML::NodeType::Sequence);
  n.SetStyle(YAML::EmitterStyle::Flow);
  n.push_back(a);
  n.push_back(b);
  return n;
}

YAML::Node load_config(const std::optional<std::string>& path) {
  if (!path) return YAML::Node(YAML::NodeType::Map);
  if (!fs::exists(*path)) throw IoError("cannot open config file '" + *path + "'");
  try {
    YAML::Node root = YAML::LoadFile(*path);
    if (root.IsNull()) return YAML::Node(YAML::NodeType::Map);
    return root;
  } catch (const YAML::ParserException& e) {
    throw ConfigError("config", e.mark.line + 1, e.msg);
  }
}

void write_text(const fs::path& path, const std::string& text) {
  write_file(path, text);
  std::cout << "wrote " << path.string() << "\n";
}

// ---------------------------------------------------------------------------
// Settings shared by every subcommand.

struct Common {
  std::optional<std::string> config;
  std::string out = "out";
  std::uint64_t seed = 1;
  int threads = 0;
  bool svg_timestamp = true;
  StereoRig rig = eagle_rig();
};

struct CommonFlags {
  std::optional<std::string> config;
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  bool no_timestamp = false;
  bool half_rig = false;
};

const std::set<std::string> kCommonKeys = {"out", "seed", "threads", "svg_timestamp", "rig"};

void add_common(CLI::App* sub, CommonFlags& f) {
  sub->add_option("--config", f.config, "YAML settings file");
  sub->add_option("--out", f.out, "output directory");
  sub->add_option("--seed", f.seed, "random seed");
  sub->add_option("--threads", f.threads, "worker threads (never changes results)");
  sub->add_flag("--no-timestamp", f.no_timestamp, "omit the timestamp comment from SVG files");
  sub->add_flag("--half-rig", f.half_rig, "use the rig at half resolution");
}

Common resolve_common(const YAML::Node& root, const CommonFlags& f) {
  Common c;
  c.config = f.config;
  c.out = yaml_get<std::string>(root, "out", "", c.out);
  c.seed = yaml_get<std::uint64_t>(root, "seed", "", c.seed);
  c.threads = yaml_get<int>(root, "threads", "", c.threads);
  c.svg_timestamp = yaml_get<bool>(root, "svg_timestamp", "", c.svg_timestamp);
  if (root["rig"]) c.rig = rig_from_yaml(root["rig"], c.rig);
  if (f.out) c.out = *f.out;
  if (f.seed) c.seed = *f.seed;
  if (f.threads) c.threads = *f.threads;
  if (f.no_timestamp) c.svg_timestamp = false;
  if (f.half_rig) c.rig = c.rig.half_resolution();
  if (c.threads < 0) throw InvalidInput("--threads must be >= 0");
  c.rig.validate();
  return c;
}

YAML::Node common_yaml(const Common& c) {
  YAML::Node n;
  n["out"] = c.out;
  n["seed"] = c.seed;
  n["threads"] = c.threads;
  n["svg_timestamp"] = c.svg_timestamp;
  n["rig"] = rig_to_yaml(c.rig);
  return n;
}

void prepare(const Common& c) {
  set_thread_count(c.threads);
  fs::create_directories(c.out);
}

void echo_config(const Common& c, const std::string& section, const YAML::Node& body) {
  YAML::Node root = common_yaml(c);
  root[section] = body;
  YAML::Emitter em;
  em << root;
  write_text(fs::path(c.out) / "config.yaml", std::string(em.c_str()) + "\n");
}

plot::Canvas canvas(const Common& c) {
  plot::Canvas cv;
  cv.timestamp = c.svg_timestamp;
  return cv;
}

void require_size(const Intrinsics& k, int w, int h, const std::string& what) {
  if (k.width != w || k.height != h) {
    throw InvalidInput(what + " is " + std::to_string(w) + "x" + std::to_string(h) +
                       " but the rig is " + std::to_string(k.width) + "x" + std::to_string(k.height));
  }
}

// ---------------------------------------------------------------------------
// synth

struct SynthSettings {
  std::string preset = "board@2m";
  std::optional<YAML::Node> scene;  // explicit scene overrides the preset
  int supersample = 2;
  double noise_sigma = 0.0;
};

struct SynthFlags {
  std::optional<std::string> preset;
  std::optional<std::string> scene_file;
  std::optional<int> supersample;
  std::optional<double> noise_sigma;
};

SceneSpec scene_of(const SynthSettings& s) {
  if (s.scene) return scene_from_yaml(*s.scene);
  return scene_preset(s.preset);
}

int cmd_synth(const CommonFlags& cf, const SynthFlags& f) {
  const YAML::Node root = load_config(cf.config);
  std::set<std::string> top = kCommonKeys;
  top.insert("synth");
  check_keys(root, "", top);
  const YAML::Node sec = root["synth"];
  check_keys(sec, "synth", {"preset", "scene", "supersample", "noise_sigma"});
  const Common c = resolve_common(root, cf);

  SynthSettings s;
  if (sec) {
    s.preset = yaml_get<std::string>(sec, "preset", "synth", s.preset);
    if (sec["scene"]) s.scene = sec["scene"];
    s.supersample = yaml_get<int>(sec, "supersample", "synth", s.supersample);
    s.noise_sigma = yaml_get<double>(sec, "noise_sigma", "synth", s.noise_sigma);
  }
  if (f.preset) {
    s.preset = *f.preset;
    s.scene.reset();
  }
  if (f.scene_file) {
    const YAML::Node file = load_config(f.scene_file);
    s.scene = file["scene"] ? file["scene"] : file;
  }
  if (f.supersample) s.supersample = *f.supersample;
  if (f.noise_sigma) s.noise_sigma = *f.noise_sigma;
  if (s.supersample < 1 || s.supersample > 8) throw InvalidInput("synth.supersample must be in 1..8");
  if (!(s.noise_sigma >= 0.0)) throw InvalidInput("synth.noise_sigma must be >= 0");

  const SceneSpec scene = scene_of(s);
  scene.validate();
  prepare(c);
  RenderOptions opts;
  opts.supersample = s.supersample;
  opts.noise_sigma = s.noise_sigma;
  opts.noise_seed = c.seed;
  const RenderOutput out = render(scene, c.rig, opts);
  const fs::path dir = c.out;
  write_image(out.left, dir / "left.png");
  write_image(out.right, dir / "right.png");
  write_pfm(out.gt_disparity, dir / "gt.pfm");
  write_pfm(out.gt_depth, dir / "gt_depth.pfm");
  std::cout << "wrote left.png, right.png, gt.pfm, gt_depth.pfm in " << dir.string() << "\n";

  YAML::Node scene_doc;
  scene_doc["scene"] = scene_to_yaml(scene);
  YAML::Emitter em;
  em << scene_doc;
  write_text(dir / "scene.yaml", std::string(em.c_str()) + "\n");

  YAML::Node body;
  body["preset"] = s.preset;
  body["scene"] = scene_to_yaml(scene);
  body["supersample"] = s.supersample;
  body["noise_sigma"] = s.noise_sigma;
  echo_config(c, "synth", body);
  return kExitOk;
}

// ---------------------------------------------------------------------------
// match

struct MatchSettings {
  std::string left, right;
  MatcherKind matcher = MatcherKind::fast;
  MatchParams params;
  RotationDeg prewarp;
};

struct MatchFlags {
  std::optional<std::string> left, right, matcher;
  std::optional<int> max_disparity;
  std::optional<std::string> census, block, refine;
  std::optional<int> p1, p2;
  std::optional<double> lr_threshold;
  std::optional<bool> subpixel;
  std::optional<std::vector<double>> prewarp;
};

MatcherKind matcher_of(const std::string& name) {
  if (name == "fast") return MatcherKind::fast;
  if (name == "accurate") return MatcherKind::accurate;
  throw InvalidInput("matcher must be 'fast' or 'accurate', got '" + name + "'");
}

RotationDeg rotation_of(const YAML::Node& n, const std::string& path) {
  if (!n.IsSequence() || n.size() != 3) throw ConfigError(path, line_of(n), "expected [roll, pitch, yaw]");
  try {
    return {n[0].as<double>(), n[1].as<double>(), n[2].as<double>()};
  } catch (const YAML::Exception&) {
    throw ConfigError(path, line_of(n), "expected three numbers");
  }
}

YAML::Node rotation_yaml(const RotationDeg& r) {
  YAML::Node n(YAML::NodeType::Sequence);
  n.SetStyle(YAML::EmitterStyle::Flow);
  n.push_back(r.roll);
  n.push_back(r.pitch);
  n.push_back(r.yaw);
  return n;
}

int cmd_match(const CommonFlags& cf, const MatchFlags& f) {
  const YAML::Node root = load_config(cf.config);
  std::set<std::string> top = kCommonKeys;
  top.insert("match");
  check_keys(root, "", top);
  const YAML::Node sec = root["match"];
  check_keys(sec, "match", {"left", "right", "matcher", "max_disparity", "census", "block", "p1",
                            "p2", "lr_threshold", "subpixel", "refine", "prewarp_deg"});
  const Common c = resolve_common(root, cf);

  MatchSettings s;
  MatchParams& p = s.params;
  if (sec) {
    s.left = yaml_get<std::string>(sec, "left", "match", s.left);
    s.right = yaml_get<std::string>(sec, "right", "match", s.right);
    if (sec["matcher"]) s.matcher = matcher_of(sec["matcher"].as<std::string>());
    p.max_disparity = yaml_get<int>(sec, "max_disparity", "match", p.max_disparity);
    p.census = window_of(sec, "census", "match", p.census);
    p.block = window_of(sec, "block", "match", p.block);
    p.refine = window_of(sec, "refine", "match", p.refine);
    p.p1 = yaml_get<int>(sec, "p1", "match", p.p1);
    p.p2 = yaml_get<int>(sec, "p2", "match", p.p2);
    p.lr_threshold = yaml_get<double>(sec, "lr_threshold", "match", p.lr_threshold);
    p.subpixel = yaml_get<bool>(sec, "subpixel", "match", p.subpixel);
    if (sec["prewarp_deg"]) s.prewarp = rotation_of(sec["prewarp_deg"], "match.prewarp_deg");
  }
  if (f.left) s.left = *f.left;
  if (f.right) s.right = *f.right;
  if (f.matcher) s.matcher = matcher_of(*f.matcher);
  if (f.max_disparity) p.max_disparity = *f.max_disparity;
  if (f.census) p.census = parse_window(*f.census, "--census");
  if (f.block) p.block = parse_window(*f.block, "--block");
  if (f.refine) p.refine = parse_window(*f.refine, "--refine");
  if (f.p1) p.p1 = *f.p1;
  if (f.p2) p.p2 = *f.p2;
  if (f.lr_threshold) p.lr_threshold = *f.lr_threshold;
  if (f.subpixel) p.subpixel = *f.subpixel;
  if (f.prewarp) {
    if (f.prewarp->size() != 3) throw InvalidInput("--prewarp expects roll pitch yaw");
    s.prewarp = {(*f.prewarp)[0], (*f.prewarp)[1], (*f.prewarp)[2]};
  }
  if (s.left.empty() || s.right.empty()) throw InvalidInput("match needs --left and --right images");
  p.validate();

  prepare(c);
  const ImageBuffer left = read_image(s.left);
  ImageBuffer right = read_image(s.right);
  if (!(s.prewarp == RotationDeg{})) {
    require_size(c.rig.intrinsics, right.width(), right.height(), "the right image");
    right = derotate_right(right, c.rig.intrinsics, s.prewarp);
  }
  const DisparityMap disp = s.matcher == MatcherKind::fast ? match_fast(left, right, p)
                                                           : match_accurate(left, right, p);
  write_pfm(disp, fs::path(c.out) / "disp.pfm");
  std::cout << "wrote " << (fs::path(c.out) / "disp.pfm").string() << " (" << disp.valid_count()
            << " valid pixels)\n";

  YAML::Node body;
  body["left"] = s.left;
  body["right"] = s.right;
  body["matcher"] = s.matcher == MatcherKind::fast ? "fast" : "accurate";
  body["max_disparity"] = p.max_disparity;
  body["census"] = seq2(p.census.width, p.census.height);
  body["block"] = seq2(p.block.width, p.block.height);
  body["refine"] = seq2(p.refine.width, p.refine.height);
  body["p1"] = p.p1;
  body["p2"] = p.p2;
  body["lr_threshold"] = p.lr_threshold;
  body["subpixel"] = p.subpixel;
  body["prewarp_deg"] = rotation_yaml(s.prewarp);
  echo_config(c, "match", body);
  return kExitOk;
}

// ---------------------------------------------------------------------------
// eval

struct EvalSettings {
  std::string test, ref, test_half, ref_half;
  DepthBinSpec bins = DepthBinSpec::standard();
  int min_fit_count = static_cast<int>(kMinFitBinCount);
  int min_scaling_count = static_cast<int>(kMinScalingBinCount);
  bool log_y = true;
};

struct EvalFlags {
  std::optional<std::string> test, ref, test_half, ref_half;
  std::optional<bool> log_y;
};

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

void report_summary(const BinErrorReport& r) {
  std::cout << r.label << ":";
  for (const BinStats& b : r.bins) {
    if (b.count) std::cout << " [" << b.bin.z_min << "," << b.bin.z_max << ")=" << format_g6(b.median_abs_err_m);
  }
  std::cout << "\n";
}

int cmd_eval(const CommonFlags& cf, const EvalFlags& f) {
  const YAML::Node root = load_config(cf.config);
  std::set<std::string> top = kCommonKeys;
  top.insert("eval");
  check_keys(root, "", top);
  const YAML::Node sec = root["eval"];
  check_keys(sec, "eval", {"test", "ref", "test_half", "ref_half", "bins", "min_fit_count",
                           "min_scaling_count", "log_y"});
  const Common c = resolve_common(root, cf);

  EvalSettings s;
  if (sec) {
    s.test = yaml_get<std::string>(sec, "test", "eval", s.test);
    s.ref = yaml_get<std::string>(sec, "ref", "eval", s.ref);
    s.test_half = yaml_get<std::string>(sec, "test_half", "eval", s.test_half);
    s.ref_half = yaml_get<std::string>(sec, "ref_half", "eval", s.ref_half);
    s.min_fit_count = yaml_get<int>(sec, "min_fit_count", "eval", s.min_fit_count);
    s.min_scaling_count = yaml_get<int>(sec, "min_scaling_count", "eval", s.min_scaling_count);
    s.log_y = yaml_get<bool>(sec, "log_y", "eval", s.log_y);
    if (const YAML::Node b = sec["bins"]) {
      if (!b.IsSequence()) throw ConfigError("eval.bins", line_of(b), "expected a list of [z_min, z_max]");
      s.bins.bins.clear();
      for (std::size_t i = 0; i < b.size(); ++i) {
        const auto [lo, hi] = pair_of(b[i], "eval.bins[" + std::to_string(i) + "]");
        s.bins.bins.push_back({lo, hi});
      }
    }
  }
  if (f.test) s.test = *f.test;
  if (f.ref) s.ref = *f.ref;
  if (f.test_half) s.test_half = *f.test_half;
  if (f.ref_half) s.ref_half = *f.ref_half;
  if (f.log_y) s.log_y = *f.log_y;
  if (s.test.empty() && s.test_half.empty()) throw InvalidInput("eval needs --test and --ref");
  if (s.test.empty() != s.ref.empty()) throw InvalidInput("eval: --test and --ref go together");
  if (s.test_half.empty() != s.ref_half.empty()) {
    throw InvalidInput("eval: --test-half and --ref-half go together");
  }
  if (s.min_fit_count < 0 || s.min_scaling_count < 0) throw InvalidInput("eval: counts must be >= 0");
  s.bins.validate();

  prepare(c);
  const fs::path dir = c.out;
  const StereoRig half_rig = c.rig.half_resolution();
  std::vector<std::pair<BinErrorReport, StereoRig>> reports;
  std::optional<DisparityMap> ref_full, ref_half;
  if (!s.test.empty()) {
    const DisparityMap test = read_pfm(s.test);
    ref_full = read_pfm(s.ref);
    require_size(c.rig.intrinsics, test.width(), test.height(), "the test map");
    reports.emplace_back(binned_error_report(test, *ref_full, c.rig, s.bins, "full"), c.rig);
  }
  if (!s.test_half.empty()) {
    const DisparityMap test = read_pfm(s.test_half);
    ref_half = read_pfm(s.ref_half);
    require_size(half_rig.intrinsics, test.width(), test.height(), "the half-resolution test map");
    reports.emplace_back(binned_error_report(test, *ref_half, half_rig, s.bins, "half"), half_rig);
  }
  std::optional<BinErrorReport> floor;
  if (ref_full && ref_half) floor = noise_floor(*ref_full, *ref_half, half_rig, s.bins);

  for (const auto& [r, rig] : reports) {
    const fs::path path = dir / (r.label == "full" ? "report.csv" : "report_half.csv");
    write_csv_report(r, path);
    std::cout << "wrote " << path.string() << "\n";
    report_summary(r);
  }
  if (floor) {
    write_csv_report(*floor, dir / "noise_floor.csv");
    std::cout << "wrote " << (dir / "noise_floor.csv").string() << "\n";
  }

  YAML::Node summary;
  std::vector<plot::Series> series;
  int color = 0;
  const double z_top = s.bins.bins.back().z_max;
  for (const auto& [r, rig] : reports) {
    plot::Series pts;
    pts.label = r.label + " measured";
    pts.color = kPalette[color % 6];
    pts.line = false;
    pts.markers = true;
    for (const BinStats& b : r.bins) {
      if (b.count > 0) pts.points.emplace_back(b.bin.center(), b.median_abs_err_m);
    }
    series.push_back(pts);
    try {
      const DeltaDFit fit = fit_delta_d(r, rig, static_cast<std::size_t>(s.min_fit_count));
      YAML::Node fn;
      fn["delta_d_px"] = fit.delta_d_px;
      fn["bins_used"] = fit.bins_used;
      fn["residual_rms_m"] = fit.residual_rms_m;
      fn["mean_error_m"] = fit.mean_error_m;
      summary["fit_" + r.label] = fn;
      plot::Series curve;
      curve.label = r.label + " fit, dd=" + format_g6(fit.delta_d_px) + " px";
      curve.color = kPalette[color % 6];
      for (int i = 1; i <= 200; ++i) {
        const double z = z_top * i / 200.0;
        curve.points.emplace_back(z, theoretical_depth_error(z, rig, fit.delta_d_px));
      }
      series.push_back(curve);
      std::cout << r.label << ": fitted delta_d = " << format_g6(fit.delta_d_px) << " px over "
                << fit.bins_used << " bins\n";
    } catch (const EstimationError& e) {
      std::cout << r.label << ": no fit (" << e.what() << ")\n";
    }
    ++color;
  }
  if (floor) {
    plot::Series pts;
    pts.label = "noise floor";
    pts.color = "#7f7f7f";
    pts.markers = true;
    pts.dashed = true;
    for (const BinStats& b : floor->bins) {
      if (b.count > 0) pts.points.emplace_back(b.bin.center(), b.median_abs_err_m);
    }
    series.push_back(pts);
  }
  if (reports.size() == 2) {
    try {
      const ScalingCheck sc = resolution_scaling_check(reports[0].first, reports[1].first,
                                                       static_cast<std::size_t>(s.min_scaling_count));
      summary["scaling_ratio"] = sc.summary_ratio;
      std::cout << "half/full error ratio = " << format_g6(sc.summary_ratio) << "\n";
    } catch (const EstimationError& e) {
      std::cout << "no scaling ratio (" << e.what() << ")\n";
    }
  }
  if (summary.size() > 0) {
    YAML::Emitter em;
    em << summary;
    write_text(dir / "summary.yaml", std::string(em.c_str()) + "\n");
  }

  plot::Axes axes;
  axes.title = "median absolute depth error";
  axes.x_label = "depth (m)";
  axes.y_label = "error (m)";
  axes.log_y = s.log_y;
  axes.x_range = std::make_pair(0.0, z_top);
  bool any_positive = false;
  for (const auto& ser : series) {
    for (const auto& pt : ser.points) any_positive |= pt.second > 0.0;
  }
  if (!any_positive) {
    axes.log_y = false;
    axes.y_range = std::make_pair(0.0, 1.0);
  }
  write_text(dir / "error_vs_depth.svg", plot::line_chart(axes, series, canvas(c)));

  YAML::Node body;
  body["test"] = s.test;
  body["ref"] = s.ref;
  body["test_half"] = s.test_half;
  body["ref_half"] = s.ref_half;
  YAML::Node bins(YAML::NodeType::Sequence);
  for (const DepthBin& b : s.bins.bins) bins.push_back(seq2(b.z_min, b.z_max));
  body["bins"] = bins;
  body["min_fit_count"] = s.min_fit_count;
  body["min_scaling_count"] = s.min_scaling_count;
  body["log_y"] = s.log_y;
  echo_config(c, "eval", body);
  return kExitOk;
}

// ---------------------------------------------------------------------------
// resize

struct ResizeFlags {
  std::vector<std::string> images, disparities;
  std::optional<std::string> disparity_scaling;
};

DisparityScaling scaling_of(const std::string& s) {
  if (s == "halve") return DisparityScaling::halve;
  if (s == "keep") return DisparityScaling::keep;
  throw InvalidInput("disparity_scaling must be 'halve' or 'keep', got '" + s + "'");
}

std::vector<std::string> string_list(const YAML::Node& node, const std::string& key, const std::string& path) {
  std::vector<std::string> out;
  const YAML::Node n = node[key];
  if (!n) return out;
  if (!n.IsSequence()) throw ConfigError(path + "." + key, line_of(n), "expected a list of paths");
  for (const auto& v : n) out.push_back(v.as<std::string>());
  return out;
}

int cmd_resize(const CommonFlags& cf, const ResizeFlags& f) {
  const YAML::Node root = load_config(cf.config);
  std::set<std::string> top = kCommonKeys;
  top.insert("resize");
  check_keys(root, "", top);
  const YAML::Node sec = root["resize"];
  check_keys(sec, "resize", {"images", "disparities", "disparity_scaling"});
  const Common c = resolve_common(root, cf);

  std::vector<std::string> images, disparities;
  std::string scaling = "halve";
  if (sec) {
    images = string_list(sec, "images", "resize");
    disparities = string_list(sec, "disparities", "resize");
    scaling = yaml_get<std::string>(sec, "disparity_scaling", "resize", scaling);
  }
  if (!f.images.empty()) images = f.images;
  if (!f.disparities.empty()) disparities = f.disparities;
  if (f.disparity_scaling) scaling = *f.disparity_scaling;
  const DisparityScaling mode = scaling_of(scaling);
  if (images.empty() && disparities.empty()) throw InvalidInput("resize needs --image or --disparity");

  prepare(c);
  const fs::path dir = c.out;
  for (const std::string& p : images) {
    const fs::path src(p);
    const fs::path dst = dir / (src.stem().string() + "_half" + src.extension().string());
    write_image(resize_half(read_image(src)), dst);
    std::cout << "wrote " << dst.string() << "\n";
  }
  for (const std::string& p : disparities) {
    const fs::path src(p);
    const fs::path dst = dir / (src.stem().string() + "_half.pfm");
    write_pfm(downsample_disparity(read_pfm(src), mode), dst);
    std::cout << "wrote " << dst.string() << "\n";
  }

  YAML::Node body;
  YAML::Node im(YAML::NodeType::Sequence), dp(YAML::NodeType::Sequence);
  for (const auto& p : images) im.push_back(p);
  for (const auto& p : disparities) dp.push_back(p);
  body["images"] = im;
  body["disparities"] = dp;
  body["disparity_scaling"] = scaling;
  echo_config(c, "resize", body);
  return kExitOk;
}

// ---------------------------------------------------------------------------
// calib

struct CalibSettings {
  std::vector<std::pair<std::string, std::string>> pairs;
  int synth_frames = 0;  // > 0 renders a perturbed sequence instead of reading pairs
  std::string synth_preset = "calib-wall";
  RotationDeg amplitude_deg{0.05, 0.05, 0.05};
  CalibParams calib;
  double ema_alpha = 1.0;
};

struct CalibFlags {
  std::vector<std::string> left, right;
  std::optional<int> synth_frames;
  std::optional<std::string> synth_preset;
  std::optional<std::vector<double>> amplitude;
  std::optional<int> grid_step, search_h, search_v, iterations;
  std::optional<double> ema_alpha;
};

std::string truth_csv(const std::vector<RotationDeg>& trace) {
  std::string out = "frame,roll_deg,pitch_deg,yaw_deg\n";
  for (std::size_t k = 0; k < trace.size(); ++k) {
    out += std::to_string(k) + "," + format_g6(trace[k].roll) + "," + format_g6(trace[k].pitch) +
           "," + format_g6(trace[k].yaw) + "\n";
  }
  return out;
}

int cmd_calib(const CommonFlags& cf, const CalibFlags& f) {
  const YAML::Node root = load_config(cf.config);
  std::set<std::string> top = kCommonKeys;
  top.insert("calib");
  check_keys(root, "", top);
  const YAML::Node sec = root["calib"];
  check_keys(sec, "calib", {"pairs", "synth_frames", "synth_preset", "amplitude_deg", "grid_step",
                            "search_h", "search_v", "iterations", "ema_alpha"});
  const Common c = resolve_common(root, cf);

  CalibSettings s;
  SampleParams& sp = s.calib.sampling;
  if (sec) {
    if (const YAML::Node pairs = sec["pairs"]) {
      if (!pairs.IsSequence()) throw ConfigError("calib.pairs", line_of(pairs), "expected a list of [left, right]");
      for (std::size_t i = 0; i < pairs.size(); ++i) {
        const YAML::Node p = pairs[i];
        if (!p.IsSequence() || p.size() != 2) {
          throw ConfigError("calib.pairs[" + std::to_string(i) + "]", line_of(p), "expected [left, right]");
        }
        s.pairs.emplace_back(p[0].as<std::string>(), p[1].as<std::string>());
      }
    }
    s.synth_frames = yaml_get<int>(sec, "synth_frames", "calib", s.synth_frames);
    s.synth_preset = yaml_get<std::string>(sec, "synth_preset", "calib", s.synth_preset);
    if (sec["amplitude_deg"]) s.amplitude_deg = rotation_of(sec["amplitude_deg"], "calib.amplitude_deg");
    sp.grid_step = yaml_get<int>(sec, "grid_step", "calib", sp.grid_step);
    sp.search_h = yaml_get<int>(sec, "search_h", "calib", sp.search_h);
    sp.search_v = yaml_get<int>(sec, "search_v", "calib", sp.search_v);
    s.calib.iterations = yaml_get<int>(sec, "iterations", "calib", s.calib.iterations);
    s.ema_alpha = yaml_get<double>(sec, "ema_alpha", "calib", s.ema_alpha);
  }
  if (f.left.size() != f.right.size()) throw InvalidInput("calib: give --left and --right the same number of times");
  if (!f.left.empty()) {
    s.pairs.clear();
    for (std::size_t i = 0; i < f.left.size(); ++i) s.pairs.emplace_back(f.left[i], f.right[i]);
  }
  if (f.synth_frames) s.synth_frames = *f.synth_frames;
  if (f.synth_preset) s.synth_preset = *f.synth_preset;
  if (f.amplitude) {
    if (f.amplitude->size() != 3) throw InvalidInput("--amplitude expects roll pitch yaw");
    s.amplitude_deg = {(*f.amplitude)[0], (*f.amplitude)[1], (*f.amplitude)[2]};
  }
  if (f.grid_step) sp.grid_step = *f.grid_step;
  if (f.search_h) sp.search_h = *f.search_h;
  if (f.search_v) sp.search_v = *f.search_v;
  if (f.iterations) s.calib.iterations = *f.iterations;
  if (f.ema_alpha) s.ema_alpha = *f.ema_alpha;
  sp.validate();
  if (s.calib.iterations < 1) throw InvalidInput("calib.iterations must be >= 1");
  if (!(s.ema_alpha > 0.0 && s.ema_alpha <= 1.0)) throw InvalidInput("calib.ema_alpha must be in (0, 1]");
  if (s.synth_frames < 0) throw InvalidInput("calib.synth_frames must be >= 0");
  if (s.synth_frames == 0 && s.pairs.empty()) throw InvalidInput("calib needs --left/--right or --synth-frames");
  if (s.synth_frames > 0 && !s.pairs.empty()) throw InvalidInput("calib: use either image pairs or --synth-frames");
  for (double a : {s.amplitude_deg.roll, s.amplitude_deg.pitch, s.amplitude_deg.yaw}) {
    if (!(a >= 0.0 && a <= kMaxRotationDeg)) throw InvalidInput("calib.amplitude_deg must be in [0, 5]");
  }

  prepare(c);
  const fs::path dir = c.out;
  std::vector<StereoPair> frames;
  std::vector<RotationDeg> truth;
  if (s.synth_frames > 0) {
    const SceneSpec scene = scene_preset(s.synth_preset);
    truth = vibration_trace(s.synth_frames, c.seed, s.amplitude_deg);
    for (RotationDeg& r : truth) r = r + c.rig.relative_rotation_deg;
    StereoRig base = c.rig;
    base.relative_rotation_deg = {};
    for (auto& o : render_sequence(scene, base, truth)) frames.push_back({std::move(o.left), std::move(o.right)});
    write_text(dir / "truth.csv", truth_csv(truth));
  } else {
    for (const auto& [l, r] : s.pairs) {
      StereoPair p{read_image(l), read_image(r)};
      require_size(c.rig.intrinsics, p.left.width(), p.left.height(), "image '" + l + "'");
      frames.push_back(std::move(p));
    }
  }
  TrackOptions opts;
  opts.calib = s.calib;
  opts.ema_alpha = s.ema_alpha;
  const auto trace = track_sequence(frames, c.rig.intrinsics, opts);
  write_trace_csv((dir / "trace.csv").string(), trace);
  std::cout << "wrote " << (dir / "trace.csv").string() << "\n";
  std::size_t gaps = 0;
  for (const auto& e : trace) gaps += e ? 0 : 1;
  if (gaps) std::cout << gaps << " of " << trace.size() << " frames gave no estimate\n";

  std::vector<plot::Series> series;
  const char* names[3] = {"roll", "pitch", "yaw"};
  for (int a = 0; a < 3; ++a) {
    plot::Series est;
    est.label = std::string(names[a]) + " estimate";
    est.color = kPalette[a];
    est.markers = trace.size() < 2;
    for (std::size_t k = 0; k < trace.size(); ++k) {
      const double v = !trace[k] ? std::nan("")
                       : a == 0  ? trace[k]->roll_deg
                       : a == 1  ? trace[k]->pitch_deg
                                 : trace[k]->yaw_deg;
      est.points.emplace_back(static_cast<double>(k), v);
    }
    series.push_back(est);
    if (!truth.empty()) {
      plot::Series t;
      t.label = std::string(names[a]) + " injected";
      t.color = kPalette[a];
      t.dashed = true;
      for (std::size_t k = 0; k < truth.size(); ++k) {
        t.points.emplace_back(static_cast<double>(k),
                              a == 0 ? truth[k].roll : a == 1 ? truth[k].pitch : truth[k].yaw);
      }
      series.push_back(t);
    }
  }
  plot::Axes axes;
  axes.title = "relative rotation of the right camera";
  axes.x_label = "frame";
  axes.y_label = "angle (deg)";
  write_text(dir / "trace.svg", plot::line_chart(axes, series, canvas(c)));

  YAML::Node body;
  YAML::Node pairs(YAML::NodeType::Sequence);
  for (const auto& [l, r] : s.pairs) {
    YAML::Node p(YAML::NodeType::Sequence);
    p.SetStyle(YAML::EmitterStyle::Flow);
    p.push_back(l);
    p.push_back(r);
    pairs.push_back(p);
  }
  body["pairs"] = pairs;
  body["synth_frames"] = s.synth_frames;
  body["synth_preset"] = s.synth_preset;
  body["amplitude_deg"] = rotation_yaml(s.amplitude_deg);
  body["grid_step"] = sp.grid_step;
  body["search_h"] = sp.search_h;
  body["search_v"] = sp.search_v;
  body["iterations"] = s.calib.iterations;
  body["ema_alpha"] = s.ema_alpha;
  echo_config(c, "calib", body);
  return kExitOk;
}

// ---------------------------------------------------------------------------
// cloud

struct CloudSettings {
  std::string disparity, color;
  std::string ply_format = "binary";
  bool birds_eye = true;
  double grid_m = 1.0;
  double cell_m = 0.05;
  std::optional<std::pair<double, double>> x_range, z_range;
};

struct CloudFlags {
  std::optional<std::string> disparity, color, ply_format;
  std::optional<bool> birds_eye;
  std::optional<double> grid_m, cell_m;
  std::optional<std::vector<double>> x_range, z_range;
};

std::pair<double, double> range_flag(const std::vector<double>& v, const std::string& name) {
  if (v.size() != 2 || !(v[1] > v[0])) throw InvalidInput(name + " expects LOW HIGH with LOW < HIGH");
  return {v[0], v[1]};
}

int cmd_cloud(const CommonFlags& cf, const CloudFlags& f) {
  const YAML::Node root = load_config(cf.config);
  std::set<std::string> top = kCommonKeys;
  top.insert("cloud");
  check_keys(root, "", top);
  const YAML::Node sec = root["cloud"];
  check_keys(sec, "cloud", {"disparity", "color", "ply_format", "birds_eye", "grid_m", "cell_m",
                            "x_range", "z_range"});
  const Common c = resolve_common(root, cf);

  CloudSettings s;
  if (sec) {
    s.disparity = yaml_get<std::string>(sec, "disparity", "cloud", s.disparity);
    s.color = yaml_get<std::string>(sec, "color", "cloud", s.color);
    s.ply_format = yaml_get<std::string>(sec, "ply_format", "cloud", s.ply_format);
    s.birds_eye = yaml_get<bool>(sec, "birds_eye", "cloud", s.birds_eye);
    s.grid_m = yaml_get<double>(sec, "grid_m", "cloud", s.grid_m);
    s.cell_m = yaml_get<double>(sec, "cell_m", "cloud", s.cell_m);
    if (sec["x_range"]) s.x_range = pair_of(sec["x_range"], "cloud.x_range");
    if (sec["z_range"]) s.z_range = pair_of(sec["z_range"], "cloud.z_range");
  }
  if (f.disparity) s.disparity = *f.disparity;
  if (f.color) s.color = *f.color;
  if (f.ply_format) s.ply_format = *f.ply_format;
  if (f.birds_eye) s.birds_eye = *f.birds_eye;
  if (f.grid_m) s.grid_m = *f.grid_m;
  if (f.cell_m) s.cell_m = *f.cell_m;
  if (f.x_range) s.x_range = range_flag(*f.x_range, "--x-range");
  if (f.z_range) s.z_range = range_flag(*f.z_range, "--z-range");
  if (s.disparity.empty()) throw InvalidInput("cloud needs --disparity");
  if (s.ply_format != "binary" && s.ply_format != "ascii") {
    throw InvalidInput("cloud.ply_format must be 'binary' or 'ascii'");
  }
  if (!(s.grid_m > 0.0) || !(s.cell_m > 0.0)) throw InvalidInput("cloud: grid_m and cell_m must be > 0");
  for (const auto* r : {&s.x_range, &s.z_range}) {
    if (*r && !((*r)->second > (*r)->first)) throw InvalidInput("cloud: ranges need low < high");
  }

  prepare(c);
  const fs::path dir = c.out;
  const DisparityMap disp = read_pfm(s.disparity);
  require_size(c.rig.intrinsics, disp.width(), disp.height(), "the disparity map");
  std::optional<ImageBuffer> color;
  if (!s.color.empty()) color = read_image(s.color);
  const PointCloud cloud = disparity_map_to_cloud(disp, c.rig, color ? &*color : nullptr);
  write_ply(cloud, dir / "cloud.ply",
            s.ply_format == "ascii" ? PlyFormat::ascii : PlyFormat::binary_little_endian);
  std::cout << "wrote " << (dir / "cloud.ply").string() << " (" << cloud.points.size() << " points)\n";
  if (s.birds_eye) {
    plot::BirdsEyeOptions o;
    o.grid_m = s.grid_m;
    o.cell_m = s.cell_m;
    o.x_range = s.x_range;
    o.z_range = s.z_range;
    write_text(dir / "birds_eye.svg", plot::birds_eye(cloud, o, canvas(c)));
  }

  YAML::Node body;
  body["disparity"] = s.disparity;
  body["color"] = s.color;
  body["ply_format"] = s.ply_format;
  body["birds_eye"] = s.birds_eye;
  body["grid_m"] = s.grid_m;
  body["cell_m"] = s.cell_m;
  if (s.x_range) body["x_range"] = seq2(s.x_range->first, s.x_range->second);
  if (s.z_range) body["z_range"] = seq2(s.z_range->first, s.z_range->second);
  echo_config(c, "cloud", body);
  return kExitOk;
}

}  // namespace

int run(int argc, const char* const* argv) {
  CLI::App app{"Stereo depth-resolution benchmark"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "stereobench 1.0");

  CommonFlags common;

  SynthFlags synth;
  CLI::App* s_synth = app.add_subcommand("synth", "render a synthetic stereo pair with ground truth");
  add_common(s_synth, common);
  s_synth->add_option("--preset", synth.preset, "scene preset");
  s_synth->add_option("--scene", synth.scene_file, "YAML scene description");
  s_synth->add_option("--supersample", synth.supersample, "samples per pixel axis");
  s_synth->add_option("--noise-sigma", synth.noise_sigma, "additive Gaussian pixel noise");

  MatchFlags match;
  CLI::App* s_match = app.add_subcommand("match", "compute a left-referenced disparity map");
  add_common(s_match, common);
  s_match->add_option("--left", match.left, "left image (.png or .pgm)");
  s_match->add_option("--right", match.right, "right image");
  s_match->add_option("--matcher", match.matcher, "fast or accurate");
  s_match->add_option("--max-disparity", match.max_disparity, "largest disparity searched");
  s_match->add_option("--census", match.census, "census window WxH");
  s_match->add_option("--block", match.block, "fast matcher aggregation block WxH");
  s_match->add_option("--refine", match.refine, "accurate matcher refinement window WxH");
  s_match->add_option("--p1", match.p1, "small disparity-change penalty (0: default)");
  s_match->add_option("--p2", match.p2, "large disparity-change penalty (0: default)");
  s_match->add_option("--lr-threshold", match.lr_threshold, "left-right consistency tolerance (px)");
  s_match->add_option("--subpixel", match.subpixel, "subpixel refinement (true/false)");
  s_match->add_option("--prewarp", match.prewarp, "derotate the right image by ROLL PITCH YAW degrees")
      ->expected(3);

  EvalFlags eval;
  CLI::App* s_eval = app.add_subcommand("eval", "depth-binned error report against a reference");
  add_common(s_eval, common);
  s_eval->add_option("--test", eval.test, "test disparity (PFM, rig resolution)");
  s_eval->add_option("--ref", eval.ref, "reference disparity (PFM)");
  s_eval->add_option("--test-half", eval.test_half, "half-resolution test disparity");
  s_eval->add_option("--ref-half", eval.ref_half, "half-resolution reference disparity");
  s_eval->add_option("--log-y", eval.log_y, "logarithmic error axis (true/false)");

  ResizeFlags resize;
  CLI::App* s_resize = app.add_subcommand("resize", "2x Lanczos decimation of images and disparity maps");
  add_common(s_resize, common);
  s_resize->add_option("--image", resize.images, "image to halve (repeatable)");
  s_resize->add_option("--disparity", resize.disparities, "disparity map to halve (repeatable)");
  s_resize->add_option("--disparity-scaling", resize.disparity_scaling, "halve or keep");

  CalibFlags calib;
  CLI::App* s_calib = app.add_subcommand("calib", "track the right camera's relative rotation");
  add_common(s_calib, common);
  s_calib->add_option("--left", calib.left, "left image of a frame (repeatable)");
  s_calib->add_option("--right", calib.right, "right image of a frame (repeatable)");
  s_calib->add_option("--synth-frames", calib.synth_frames, "render this many perturbed frames instead");
  s_calib->add_option("--synth-preset", calib.synth_preset, "scene for --synth-frames");
  s_calib->add_option("--amplitude", calib.amplitude, "vibration amplitude ROLL PITCH YAW (deg)")->expected(3);
  s_calib->add_option("--grid-step", calib.grid_step, "sample spacing (px)");
  s_calib->add_option("--search-h", calib.search_h, "horizontal search range (px)");
  s_calib->add_option("--search-v", calib.search_v, "vertical search range (px)");
  s_calib->add_option("--iterations", calib.iterations, "fit-derotate passes per frame");
  s_calib->add_option("--ema-alpha", calib.ema_alpha, "smoothing weight of the newest frame");

  CloudFlags cloud;
  CLI::App* s_cloud = app.add_subcommand("cloud", "triangulate a disparity map to PLY and a top view");
  add_common(s_cloud, common);
  s_cloud->add_option("--disparity", cloud.disparity, "disparity map (PFM)");
  s_cloud->add_option("--color", cloud.color, "color source image");
  s_cloud->add_option("--ply-format", cloud.ply_format, "binary or ascii");
  s_cloud->add_option("--birds-eye", cloud.birds_eye, "write birds_eye.svg (true/false)");
  s_cloud->add_option("--grid", cloud.grid_m, "top-view grid spacing (m), e.g. 1 or 2.5");
  s_cloud->add_option("--cell", cloud.cell_m, "top-view density cell (m)");
  s_cloud->add_option("--x-range", cloud.x_range, "lateral view range LOW HIGH (m)")->expected(2);
  s_cloud->add_option("--z-range", cloud.z_range, "forward view range LOW HIGH (m)")->expected(2);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitValidationError;
  }

  try {
    if (s_synth->parsed()) return cmd_synth(common, synth);
    if (s_match->parsed()) return cmd_match(common, match);
    if (s_eval->parsed()) return cmd_eval(common, eval);
    if (s_resize->parsed()) return cmd_resize(common, resize);
    if (s_calib->parsed()) return cmd_calib(common, calib);
    if (s_cloud->parsed()) return cmd_cloud(common, cloud);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitValidationError;
  } catch (const InvalidInput& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return kExitValidationError;
  } catch (const YAML::Exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitValidationError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntimeError;
  }
  return kExitValidationError;
}

}  // namespace stereobench::cli
