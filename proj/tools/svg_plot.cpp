#include "svg_plot.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <limits>
#include <map>

#include "stereobench/error.hpp"

namespace stereobench::plot {

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string label_num(double v) {
  char buf[32];
  if (v != 0.0 && (std::fabs(v) < 1e-3 || std::fabs(v) >= 1e5)) {
    std::snprintf(buf, sizeof buf, "%.0e", v);
  } else {
    std::snprintf(buf, sizeof buf, "%.6g", v);
  }
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string header(const Canvas& c) {
  std::string s = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  if (c.timestamp) {
    const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    char buf[64];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
    s += "<!-- generated " + std::string(buf) + " -->\n";
  }
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" +
       std::to_string(c.width) + "\" height=\"" + std::to_string(c.height) + "\" viewBox=\"0 0 " +
       std::to_string(c.width) + " " + std::to_string(c.height) + "\">\n";
  s += "<rect x=\"0\" y=\"0\" width=\"" + std::to_string(c.width) + "\" height=\"" +
       std::to_string(c.height) + "\" fill=\"white\"/>\n";
  return s;
}

std::string text(double x, double y, const std::string& s, const char* anchor = "middle",
                 int size = 12, const char* extra = "") {
  return "<text x=\"" + num(x) + "\" y=\"" + num(y) + "\" font-family=\"sans-serif\" font-size=\"" +
         std::to_string(size) + "\" text-anchor=\"" + anchor + "\"" + extra + ">" + escape(s) +
         "</text>\n";
}

struct Frame {
  double left = 70, right = 0, top = 40, bottom = 0;
  double x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  bool log_y = false;

  double px(double x) const { return left + (x - x0) / (x1 - x0) * (right - left); }
  double py(double y) const {
    const double t = log_y ? (std::log10(y) - y0) / (y1 - y0) : (y - y0) / (y1 - y0);
    return bottom - t * (bottom - top);
  }
};

}  // namespace

std::vector<double> nice_ticks(double lo, double hi, int target) {
  if (!(hi > lo) || target < 1) return {lo};
  const double raw = (hi - lo) / target;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (double m : {1.0, 2.0, 5.0, 10.0}) {
    step = m * mag;
    if (step >= raw) break;
  }
  std::vector<double> ticks;
  const long first = static_cast<long>(std::ceil(lo / step - 1e-9));
  const long last = static_cast<long>(std::floor(hi / step + 1e-9));
  for (long k = first; k <= last; ++k) ticks.push_back(k * step);
  return ticks;
}

std::string line_chart(const Axes& axes, const std::vector<Series>& series, const Canvas& canvas) {
  Frame f;
  f.right = canvas.width - 180;
  f.bottom = canvas.height - 55;
  f.log_y = axes.log_y;

  double xlo = std::numeric_limits<double>::infinity(), xhi = -xlo;
  double ylo = xlo, yhi = -xlo;
  for (const Series& s : series) {
    for (const auto& [x, y] : s.points) {
      if (!std::isfinite(x) || !std::isfinite(y)) continue;
      if (axes.log_y && !(y > 0.0)) continue;
      xlo = std::min(xlo, x);
      xhi = std::max(xhi, x);
      ylo = std::min(ylo, y);
      yhi = std::max(yhi, y);
    }
  }
  if (!std::isfinite(xlo)) {
    xlo = 0.0, xhi = 1.0;
    ylo = axes.log_y ? 1e-3 : 0.0;
    yhi = 1.0;
  }
  if (axes.x_range) std::tie(xlo, xhi) = *axes.x_range;
  if (axes.y_range) std::tie(ylo, yhi) = *axes.y_range;
  if (!(xhi > xlo)) xhi = xlo + 1.0;
  if (axes.log_y) {
    f.y0 = std::floor(std::log10(ylo));
    f.y1 = std::ceil(std::log10(yhi));
    if (!(f.y1 > f.y0)) f.y1 = f.y0 + 1.0;
  } else {
    if (!(yhi > ylo)) {
      const double pad = ylo == 0.0 ? 1.0 : 0.1 * std::fabs(ylo);
      ylo -= pad;
      yhi += pad;
    }
    const double pad = 0.05 * (yhi - ylo);
    f.y0 = axes.y_range ? ylo : ylo - pad;
    f.y1 = axes.y_range ? yhi : yhi + pad;
  }
  f.x0 = xlo;
  f.x1 = xhi;

  std::string s = header(canvas);
  s += text(canvas.width / 2.0, 22, axes.title, "middle", 15);
  s += "<g stroke=\"#dddddd\" stroke-width=\"1\">\n";
  const std::vector<double> xt = nice_ticks(f.x0, f.x1);
  std::vector<double> yt;
  if (axes.log_y) {
    for (double e = f.y0; e <= f.y1 + 1e-9; e += 1.0) yt.push_back(std::pow(10.0, e));
  } else {
    yt = nice_ticks(f.y0, f.y1);
  }
  for (double x : xt) {
    s += "<line x1=\"" + num(f.px(x)) + "\" y1=\"" + num(f.top) + "\" x2=\"" + num(f.px(x)) +
         "\" y2=\"" + num(f.bottom) + "\"/>\n";
  }
  for (double y : yt) {
    s += "<line x1=\"" + num(f.left) + "\" y1=\"" + num(f.py(y)) + "\" x2=\"" + num(f.right) +
         "\" y2=\"" + num(f.py(y)) + "\"/>\n";
  }
  s += "</g>\n";
  s += "<rect x=\"" + num(f.left) + "\" y=\"" + num(f.top) + "\" width=\"" + num(f.right - f.left) +
       "\" height=\"" + num(f.bottom - f.top) + "\" fill=\"none\" stroke=\"black\"/>\n";
  for (double x : xt) s += text(f.px(x), f.bottom + 16, label_num(x));
  for (double y : yt) s += text(f.left - 6, f.py(y) + 4, label_num(y), "end");
  s += text((f.left + f.right) / 2.0, canvas.height - 15, axes.x_label);
  s += text(18, (f.top + f.bottom) / 2.0, axes.y_label, "middle", 12,
            (" transform=\"rotate(-90 18 " + num((f.top + f.bottom) / 2.0) + ")\"").c_str());

  s += "<g>\n";
  for (const Series& ser : series) {
    const std::string dash = ser.dashed ? " stroke-dasharray=\"6 4\"" : "";
    if (ser.line) {
      std::string pts;
      auto flush = [&]() {
        if (!pts.empty()) {
          s += "<polyline fill=\"none\" stroke=\"" + ser.color + "\" stroke-width=\"1.6\"" + dash +
               " points=\"" + pts + "\"/>\n";
        }
        pts.clear();
      };
      for (const auto& [x, y] : ser.points) {
        if (!std::isfinite(x) || !std::isfinite(y) || (axes.log_y && !(y > 0.0))) {
          flush();
          continue;
        }
        if (!pts.empty()) pts += ' ';
        pts += num(f.px(x)) + "," + num(f.py(y));
      }
      flush();
    }
    if (ser.markers) {
      for (const auto& [x, y] : ser.points) {
        if (!std::isfinite(x) || !std::isfinite(y) || (axes.log_y && !(y > 0.0))) continue;
        s += "<circle cx=\"" + num(f.px(x)) + "\" cy=\"" + num(f.py(y)) + "\" r=\"3.5\" fill=\"" +
             ser.color + "\"/>\n";
      }
    }
  }
  s += "</g>\n";

  double ly = f.top + 10;
  for (const Series& ser : series) {
    const double lx = f.right + 14;
    if (ser.line) {
      s += "<line x1=\"" + num(lx) + "\" y1=\"" + num(ly) + "\" x2=\"" + num(lx + 22) + "\" y2=\"" +
           num(ly) + "\" stroke=\"" + ser.color + "\" stroke-width=\"1.6\"" +
           (ser.dashed ? " stroke-dasharray=\"6 4\"" : "") + "/>\n";
    }
    if (ser.markers) {
      s += "<circle cx=\"" + num(lx + 11) + "\" cy=\"" + num(ly) + "\" r=\"3.5\" fill=\"" + ser.color +
           "\"/>\n";
    }
    s += text(lx + 28, ly + 4, ser.label, "start", 11);
    ly += 18;
  }
  s += "</svg>\n";
  return s;
}

std::string birds_eye(const PointCloud& cloud, const BirdsEyeOptions& options, const Canvas& canvas) {
  if (!(options.grid_m > 0.0) || !(options.cell_m > 0.0)) {
    throw InvalidInput("birds_eye: grid and cell sizes must be positive");
  }
  double xlo, xhi, zlo, zhi;
  if (options.x_range && options.z_range) {
    std::tie(xlo, xhi) = *options.x_range;
    std::tie(zlo, zhi) = *options.z_range;
  } else {
    std::vector<double> xs, zs;
    for (const Point3& p : cloud.points) {
      xs.push_back(p.x);
      zs.push_back(p.z);
    }
    auto pct = [](std::vector<double> v, double q) {
      if (v.empty()) return 0.0;
      const auto k = static_cast<std::ptrdiff_t>(q * (v.size() - 1));
      std::nth_element(v.begin(), v.begin() + k, v.end());
      return v[k];
    };
    const double g = options.grid_m;
    xlo = std::floor(pct(xs, 0.01) / g) * g - g;
    xhi = std::ceil(pct(xs, 0.99) / g) * g + g;
    zlo = 0.0;
    zhi = std::ceil(pct(zs, 0.99) / g) * g + g;
    if (options.x_range) std::tie(xlo, xhi) = *options.x_range;
    if (options.z_range) std::tie(zlo, zhi) = *options.z_range;
  }
  if (!(xhi > xlo) || !(zhi > zlo)) throw InvalidInput("birds_eye: empty view range");

  // Equal scale on both axes.
  const double margin = 50;
  const double avail_w = canvas.width - 2 * margin;
  const double avail_h = canvas.height - 2 * margin;
  const double scale = std::min(avail_w / (xhi - xlo), avail_h / (zhi - zlo));
  const double ox = margin + 0.5 * (avail_w - scale * (xhi - xlo));
  const double oz = margin + 0.5 * (avail_h - scale * (zhi - zlo));
  auto px = [&](double x) { return ox + (x - xlo) * scale; };
  auto pz = [&](double z) { return canvas.height - oz - (z - zlo) * scale; };

  std::map<std::pair<long, long>, std::size_t> cells;
  for (const Point3& p : cloud.points) {
    if (p.x < xlo || p.x >= xhi || p.z < zlo || p.z >= zhi) continue;
    const long i = static_cast<long>(std::floor((p.x - xlo) / options.cell_m));
    const long k = static_cast<long>(std::floor((p.z - zlo) / options.cell_m));
    ++cells[{i, k}];
  }
  std::size_t max_count = 1;
  for (const auto& [key, n] : cells) max_count = std::max(max_count, n);

  std::string s = header(canvas);
  s += text(canvas.width / 2.0, 22, options.title, "middle", 15);
  s += "<g stroke=\"#cccccc\" stroke-width=\"1\">\n";
  const double g = options.grid_m;
  for (long k = static_cast<long>(std::ceil(xlo / g - 1e-9)); k * g <= xhi + 1e-9; ++k) {
    s += "<line x1=\"" + num(px(k * g)) + "\" y1=\"" + num(pz(zlo)) + "\" x2=\"" + num(px(k * g)) +
         "\" y2=\"" + num(pz(zhi)) + "\"/>\n";
  }
  for (long k = static_cast<long>(std::ceil(zlo / g - 1e-9)); k * g <= zhi + 1e-9; ++k) {
    s += "<line x1=\"" + num(px(xlo)) + "\" y1=\"" + num(pz(k * g)) + "\" x2=\"" + num(px(xhi)) +
         "\" y2=\"" + num(pz(k * g)) + "\"/>\n";
  }
  s += "</g>\n";
  const double label_step = g * std::max(1.0, std::ceil(20.0 / (g * scale)));
  for (long k = static_cast<long>(std::ceil(zlo / label_step - 1e-9)); k * label_step <= zhi + 1e-9;
       ++k) {
    s += text(px(xlo) - 6, pz(k * label_step) + 4, label_num(k * label_step), "end", 10);
  }
  for (long k = static_cast<long>(std::ceil(xlo / label_step - 1e-9)); k * label_step <= xhi + 1e-9;
       ++k) {
    s += text(px(k * label_step), pz(zlo) + 14, label_num(k * label_step), "middle", 10);
  }
  s += text(canvas.width / 2.0, canvas.height - 12, "x (m), grid " + label_num(g) + " m");
  s += text(16, canvas.height / 2.0, "z (m)", "middle", 12,
            (" transform=\"rotate(-90 16 " + num(canvas.height / 2.0) + ")\"").c_str());

  const double cw = options.cell_m * scale;
  const double lmax = std::log1p(static_cast<double>(max_count));
  s += "<g fill=\"#08306b\" stroke=\"none\">\n";
  for (const auto& [key, n] : cells) {
    const double x = xlo + key.first * options.cell_m;
    const double z = zlo + (key.second + 1) * options.cell_m;
    const double alpha = 0.15 + 0.85 * std::log1p(static_cast<double>(n)) / lmax;
    s += "<rect x=\"" + num(px(x)) + "\" y=\"" + num(pz(z)) + "\" width=\"" + num(cw) +
         "\" height=\"" + num(cw) + "\" fill-opacity=\"" + num(alpha) + "\"/>\n";
  }
  s += "</g>\n";
  s += "<circle cx=\"" + num(px(0.0)) + "\" cy=\"" + num(pz(0.0)) +
       "\" r=\"4\" fill=\"#d62728\"/>\n";
  s += "</svg>\n";
  return s;
}

}  // namespace stereobench::plot
