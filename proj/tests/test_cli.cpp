#include <cmath>
#include <filesystem>
#include <regex>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "cli.hpp"
#include "stereobench/imageio.hpp"
#include "svg_plot.hpp"

using namespace stereobench;
namespace fs = std::filesystem;

namespace {

fs::path workdir(const std::string& name) {
  const fs::path d = fs::path(::testing::TempDir()) / "stereobench_cli" / name;
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

int run(std::vector<std::string> args) {
  args.insert(args.begin(), "stereobench");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  return cli::run(static_cast<int>(argv.size()), argv.data());
}

// 320x240 rig at f = 590 px keeps every run small.
fs::path small_rig_config(const fs::path& dir) {
  const fs::path p = dir / "rig.yaml";
  write_file(p,
             "rig:\n"
             "  focal_length_px: 590\n"
             "  cx: 159.5\n"
             "  cy: 119.5\n"
             "  width: 320\n"
             "  height: 240\n"
             "  baseline_m: 0.15\n");
  return p;
}

std::size_t count(const std::string& text, const std::string& needle) {
  std::size_t n = 0;
  for (auto pos = text.find(needle); pos != std::string::npos; pos = text.find(needle, pos + 1)) ++n;
  return n;
}

}  // namespace

TEST(Cli, ExitCodes) {
  const fs::path d = workdir("exit");
  EXPECT_EQ(run({"--help"}), cli::kExitOk);
  EXPECT_EQ(run({"match", "--no-such-flag"}), cli::kExitValidationError);
  EXPECT_EQ(run({"match", "--left", (d / "missing.png").string(), "--right", (d / "missing.png").string(),
                 "--out", d.string()}),
            cli::kExitRuntimeError);
  write_file(d / "bad.yaml", "match:\n  bogus: 1\n");
  EXPECT_EQ(run({"match", "--config", (d / "bad.yaml").string()}), cli::kExitValidationError);
  write_file(d / "scene.yaml",
             "primitives:\n"
             "  - kind: fronto_rect\n"
             "    center: [0, 0, -1]\n"
             "    extent: [1, 1, 1]\n");
  EXPECT_EQ(run({"synth", "--config", small_rig_config(d).string(), "--scene", (d / "scene.yaml").string(),
                 "--out", d.string()}),
            cli::kExitValidationError);
}

TEST(Cli, SynthWritesOutputsAndConfigRerunIsIdentical) {
  const fs::path d = workdir("synth");
  const fs::path a = d / "a", b = d / "b";
  ASSERT_EQ(run({"synth", "--config", small_rig_config(d).string(), "--preset", "board@2m", "--out", a.string()}),
            cli::kExitOk);
  for (const char* f : {"left.png", "right.png", "gt.pfm", "gt_depth.pfm", "scene.yaml", "config.yaml"}) {
    EXPECT_TRUE(fs::exists(a / f)) << f;
  }
  const DisparityMap gt = read_pfm(a / "gt.pfm");
  EXPECT_NEAR(gt.at(160, 120), 44.25f, 1e-4);

  ASSERT_EQ(run({"synth", "--config", (a / "config.yaml").string(), "--out", b.string()}), cli::kExitOk);
  EXPECT_EQ(read_file(a / "gt.pfm"), read_file(b / "gt.pfm"));
  EXPECT_EQ(read_file(a / "left.png"), read_file(b / "left.png"));
}

TEST(Cli, MatchAndIdentityEval) {
  const fs::path d = workdir("match");
  const fs::path rig = small_rig_config(d);
  ASSERT_EQ(run({"synth", "--config", rig.string(), "--preset", "board@2m", "--out", (d / "s").string()}), 0);
  ASSERT_EQ(run({"match", "--config", rig.string(), "--left", (d / "s/left.png").string(), "--right",
                 (d / "s/right.png").string(), "--max-disparity", "64", "--out", (d / "m").string()}),
            0);
  const DisparityMap disp = read_pfm(d / "m/disp.pfm");
  EXPECT_GT(disp.valid_count(), disp.size() / 2);

  ASSERT_EQ(run({"match", "--config", (d / "m/config.yaml").string(), "--out", (d / "m2").string()}), 0);
  EXPECT_EQ(read_file(d / "m/disp.pfm"), read_file(d / "m2/disp.pfm"));

  ASSERT_EQ(run({"eval", "--config", rig.string(), "--test", (d / "s/gt.pfm").string(), "--ref",
                 (d / "s/gt.pfm").string(), "--no-timestamp", "--out", (d / "e").string()}),
            0);
  const BinErrorReport r = read_csv_report(d / "e/report.csv");
  for (const auto& b : r.bins) EXPECT_EQ(b.median_abs_err_m, 0.0);
  const std::string svg = read_file(d / "e/error_vs_depth.svg");
  EXPECT_NE(svg.find("<svg"), std::string::npos);
  EXPECT_EQ(svg.find("generated"), std::string::npos);
}

TEST(Cli, EvalFullAndHalfPlotsBothSeriesAndFits) {
  const fs::path d = workdir("eval");
  const fs::path rig = small_rig_config(d);
  ASSERT_EQ(run({"synth", "--config", rig.string(), "--preset", "paper-analog", "--out", (d / "s").string()}), 0);
  ASSERT_EQ(run({"resize", "--config", rig.string(), "--image", (d / "s/left.png").string(), "--image",
                 (d / "s/right.png").string(), "--disparity", (d / "s/gt.pfm").string(), "--out",
                 (d / "s").string()}),
            0);
  const std::string m = (d / "m").string();
  ASSERT_EQ(run({"match", "--config", rig.string(), "--left", (d / "s/left.png").string(), "--right",
                 (d / "s/right.png").string(), "--max-disparity", "64", "--out", m}),
            0);
  ASSERT_EQ(run({"match", "--config", rig.string(), "--half-rig", "--left", (d / "s/left_half.png").string(),
                 "--right", (d / "s/right_half.png").string(), "--max-disparity", "32", "--out", m + "_half"}),
            0);
  ASSERT_EQ(run({"eval", "--config", rig.string(), "--test", m + "/disp.pfm", "--ref", (d / "s/gt.pfm").string(),
                 "--test-half", m + "_half/disp.pfm", "--ref-half", (d / "s/gt_half.pfm").string(), "--out",
                 (d / "e").string()}),
            0);
  EXPECT_TRUE(fs::exists(d / "e/report.csv"));
  EXPECT_TRUE(fs::exists(d / "e/report_half.csv"));
  EXPECT_TRUE(fs::exists(d / "e/noise_floor.csv"));
  const std::string svg = read_file(d / "e/error_vs_depth.svg");
  EXPECT_EQ(count(svg, "full measured"), 1u);
  EXPECT_EQ(count(svg, "half measured"), 1u);
  EXPECT_EQ(count(svg, "full fit, dd="), 1u);
  EXPECT_EQ(count(svg, "half fit, dd="), 1u);
  EXPECT_NE(svg.find("<!-- generated"), std::string::npos);
}

TEST(Cli, BirdsEyeClusterSitsOnSixMeterLine) {
  const fs::path d = workdir("cloud");
  const fs::path rig = small_rig_config(d);
  ASSERT_EQ(run({"synth", "--config", rig.string(), "--preset", "board@6m", "--out", (d / "s").string()}), 0);
  ASSERT_EQ(run({"cloud", "--config", rig.string(), "--disparity", (d / "s/gt.pfm").string(), "--color",
                 (d / "s/left.png").string(), "--z-range", "0", "10", "--x-range", "-5", "5", "--no-timestamp",
                 "--out", (d / "c").string()}),
            0);
  const PointCloud pc = read_ply(d / "c/cloud.ply");
  EXPECT_EQ(pc.points.size(), 320u * 240u);
  EXPECT_TRUE(pc.colored());

  const std::string svg = read_file(d / "c/birds_eye.svg");
  // Horizontal grid lines are the z lines, drawn from z = 0 upward.
  std::vector<double> z_lines;
  const std::regex line(R"re(<line x1="[^"]+" y1="([^"]+)" x2="[^"]+" y2="([^"]+)"/>)re");
  for (auto it = std::sregex_iterator(svg.begin(), svg.end(), line); it != std::sregex_iterator(); ++it) {
    if ((*it)[1] == (*it)[2]) z_lines.push_back(std::stod((*it)[1]));
  }
  ASSERT_EQ(z_lines.size(), 11u);
  const std::regex cell(R"re(<rect x="[^"]+" y="([^"]+)" width="([^"]+)")re");
  const auto group = svg.find("<g fill=\"#08306b\"");
  ASSERT_NE(group, std::string::npos);
  double sum = 0.0;
  int n = 0;
  for (auto it = std::sregex_iterator(svg.begin() + group, svg.end(), cell); it != std::sregex_iterator(); ++it) {
    sum += std::stod((*it)[1]) + 0.5 * std::stod((*it)[2]);
    ++n;
  }
  ASSERT_GT(n, 0);
  const double spacing = std::fabs(z_lines[1] - z_lines[0]);
  EXPECT_NEAR(sum / n, z_lines[6], 0.1 * spacing);
}

TEST(Cli, CalibSyntheticTrace) {
  const fs::path d = workdir("calib");
  ASSERT_EQ(run({"calib", "--config", small_rig_config(d).string(), "--synth-frames", "2", "--amplitude", "0.02",
                 "0.02", "0.02", "--no-timestamp", "--out", d.string()}),
            0);
  const std::string csv = read_file(d / "trace.csv");
  EXPECT_EQ(count(csv, "\n"), 3u);
  EXPECT_TRUE(fs::exists(d / "truth.csv"));
  const std::string svg = read_file(d / "trace.svg");
  EXPECT_NE(svg.find("pitch estimate"), std::string::npos);
  EXPECT_NE(svg.find("pitch injected"), std::string::npos);
}

TEST(SvgPlot, DeterministicAndTicks) {
  plot::Series s;
  s.label = "a";
  s.points = {{0, 1}, {1, 2}, {2, std::nan("")}, {3, 1.5}};
  plot::Axes axes;
  axes.title = "t";
  const std::string a = plot::line_chart(axes, {s});
  EXPECT_EQ(a, plot::line_chart(axes, {s}));
  EXPECT_EQ(a.find("generated"), std::string::npos);
  plot::Canvas c;
  c.timestamp = true;
  EXPECT_NE(plot::line_chart(axes, {s}, c).find("<!-- generated"), std::string::npos);
  const auto ticks = plot::nice_ticks(0.0, 42.0);
  ASSERT_FALSE(ticks.empty());
  EXPECT_EQ(ticks.front(), 0.0);
  EXPECT_LE(ticks.size(), 7u);
}
