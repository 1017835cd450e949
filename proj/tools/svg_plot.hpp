#ifndef STEREOBENCH_TOOLS_SVG_PLOT_HPP
#define STEREOBENCH_TOOLS_SVG_PLOT_HPP

// Minimal deterministic SVG 1.1 plotter: line/marker charts and bird's-eye
// point-density views. Identical inputs give byte-identical output unless a
// timestamp comment is requested.

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "stereobench/geometry.hpp"

namespace stereobench::plot {

struct Series {
  std::string label;
  std::vector<std::pair<double, double>> points;  // NaN y breaks a line
  std::string color = "#1f77b4";
  bool line = true;
  bool markers = false;
  bool dashed = false;
};

struct Axes {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_y = false;
  std::optional<std::pair<double, double>> x_range;
  std::optional<std::pair<double, double>> y_range;
};

struct Canvas {
  int width = 760;
  int height = 500;
  bool timestamp = false;
};

std::string line_chart(const Axes& axes, const std::vector<Series>& series, const Canvas& canvas = {});

struct BirdsEyeOptions {
  double grid_m = 1.0;
  double cell_m = 0.05;
  std::optional<std::pair<double, double>> x_range;  // lateral, meters
  std::optional<std::pair<double, double>> z_range;  // forward, meters
  std::string title = "top view";
};

/// Top view (x right, z up the page) of point density on a cell_m grid with
/// reference lines every grid_m meters.
std::string birds_eye(const PointCloud& cloud, const BirdsEyeOptions& options,
                      const Canvas& canvas = {});

/// Ticks covering [lo, hi] at a 1/2/5 x 10^k step, at most about `target` of them.
std::vector<double> nice_ticks(double lo, double hi, int target = 6);

}  // namespace stereobench::plot

#endif  // STEREOBENCH_TOOLS_SVG_PLOT_HPP
