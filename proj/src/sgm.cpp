#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <vector>

#include "match_common.hpp"
#include "stereobench/error.hpp"
#include "stereobench/matcher.hpp"
#include "stereobench/parallel.hpp"
#include "stereobench/resample.hpp"

namespace stereobench {

namespace {

constexpr std::uint16_t kSentinel = 0x3fff;
constexpr int kMaxRefineTaps = 31 * 31;

struct Direction {
  int dx;
  int dy;
  unsigned flag;
};

constexpr Direction kDirections[8] = {
    {+1, 0, kLeftToRight}, {-1, 0, kRightToLeft}, {0, +1, kTopToBottom}, {0, -1, kBottomToTop},
    {+1, +1, kTopLeft},    {-1, +1, kTopRight},   {+1, -1, kBottomLeft}, {-1, -1, kBottomRight},
};

// Path-cost rows of one direction. Each pixel holds levels + 2 entries with
// sentinels at both ends so that the d +- 1 terms need no bounds checks.
struct PathRows {
  Direction dir;
  int pitch;
  std::vector<std::uint16_t> prev, cur;
  std::vector<std::uint16_t> prev_min, cur_min;

  PathRows(Direction d, int width, int levels)
      : dir(d),
        pitch(levels + 2),
        prev(static_cast<std::size_t>(width) * (levels + 2), kSentinel),
        cur(prev),
        prev_min(width, 0),
        cur_min(width, 0) {}

  void swap_rows() {
    prev.swap(cur);
    prev_min.swap(cur_min);
  }
};

void compute_cost_row(const CensusImage& l, const CensusImage& r, int y, int levels,
                      std::uint16_t* out) {
  const int w = l.width;
  for (int x = 0; x < w; ++x) {
    std::uint16_t* c = out + static_cast<std::size_t>(x) * levels;
    const std::uint64_t code = l.at(x, y);
    const int dlim = std::min(levels - 1, x);
    for (int d = 0; d <= dlim; ++d) {
      c[d] = static_cast<std::uint16_t>(__builtin_popcountll(code ^ r.at(x - d, y)));
    }
    for (int d = dlim + 1; d < levels; ++d) c[d] = static_cast<std::uint16_t>(l.bits);
  }
}

inline void update_pixel(const std::uint16_t* cost, const std::uint16_t* prev, std::uint16_t prev_min,
                         int p1, int p2, int levels, std::uint16_t* cur, std::uint16_t& cur_min) {
  const std::uint16_t jump = static_cast<std::uint16_t>(prev_min + p2);
  const std::uint16_t step = static_cast<std::uint16_t>(p1);
  std::uint16_t best = std::numeric_limits<std::uint16_t>::max();
  for (int d = 0; d < levels; ++d) {
    std::uint16_t v = std::min<std::uint16_t>(prev[d - 1], prev[d + 1]) + step;
    v = std::min<std::uint16_t>(v, prev[d]);
    v = std::min<std::uint16_t>(v, jump);
    v = static_cast<std::uint16_t>(cost[d] + v - prev_min);
    cur[d] = v;
    best = std::min(best, v);
  }
  cur_min = best;
}

inline void start_pixel(const std::uint16_t* cost, int levels, std::uint16_t* cur,
                        std::uint16_t& cur_min) {
  std::uint16_t best = std::numeric_limits<std::uint16_t>::max();
  for (int d = 0; d < levels; ++d) {
    cur[d] = cost[d];
    best = std::min(best, cost[d]);
  }
  cur_min = best;
}

// Advances one direction's path costs to row y.
void advance_row(PathRows& rows, const std::uint16_t* cost, const ImageBuffer& gray, int y, int p1,
                 int p2, int levels) {
  const int w = gray.width();
  const int h = gray.height();
  const int dx = rows.dir.dx;
  const int dy = rows.dir.dy;
  const int qy = y - dy;
  const bool have_prev_row = qy >= 0 && qy < h;
  const std::vector<std::uint16_t>& src = dy == 0 ? rows.cur : rows.prev;
  const std::vector<std::uint16_t>& src_min = dy == 0 ? rows.cur_min : rows.prev_min;

  const int x_begin = dx >= 0 ? 0 : w - 1;
  const int x_step = dx >= 0 ? 1 : -1;
  for (int i = 0, x = x_begin; i < w; ++i, x += x_step) {
    const std::uint16_t* c = cost + static_cast<std::size_t>(x) * levels;
    std::uint16_t* out = rows.cur.data() + static_cast<std::size_t>(x) * rows.pitch + 1;
    const int qx = x - dx;
    if (!have_prev_row || qx < 0 || qx >= w) {
      start_pixel(c, levels, out, rows.cur_min[x]);
      continue;
    }
    const float step = std::fabs(gray.at(x, y) - gray.at(qx, qy));
    const int penalty = sgm_step_penalty(p1, p2, step);
    const std::uint16_t* prev = src.data() + static_cast<std::size_t>(qx) * rows.pitch + 1;
    update_pixel(c, prev, src_min[qx], p1, penalty, levels, out, rows.cur_min[x]);
  }
}

// Zero-mean SSD between the window around left (x, y) and the window around
// right (x - s, y); windows clamp at the image border.
double zssd(const ImageBuffer& l, const ImageBuffer& r, int x, int y, int s, WindowSize win) {
  const int w = l.width();
  const int h = l.height();
  const int rx = win.width / 2;
  const int ry = win.height / 2;
  double sa = 0.0, sb = 0.0, saa = 0.0, sbb = 0.0, sab = 0.0;
  for (int j = -ry; j <= ry; ++j) {
    const int yy = std::clamp(y + j, 0, h - 1);
    const auto lrow = l.row(yy);
    const auto rrow = r.row(yy);
    for (int i = -rx; i <= rx; ++i) {
      const double a = lrow[std::clamp(x + i, 0, w - 1)];
      const double b = rrow[std::clamp(x + i - s, 0, w - 1)];
      sa += a;
      sb += b;
      saa += a * a;
      sbb += b * b;
      sab += a * b;
    }
  }
  const double n = static_cast<double>(win.width) * win.height;
  return (saa - sa * sa / n) + (sbb - sb * sb / n) - 2.0 * (sab - sa * sb / n);
}

// Disparity at (x, y) from Gauss-Newton on the zero-mean SSD between the
// window around left (x, y) and the right image sampled at
// (x + i - s - beta * j, y + j), where beta absorbs a vertical disparity
// slope. Right rows are interpolated with Lanczos-3; the Jacobian uses left
// central-difference gradients. Returns NaN for an untextured window.
double refine_shift(const ImageBuffer& l, const ImageBuffer& r, const std::vector<float>& grad,
                    int x, int y, double s0, WindowSize win, int iterations) {
  const int w = l.width();
  const int h = l.height();
  const int rx = win.width / 2;
  const int ry = win.height / 2;
  const int n = win.width * win.height;
  double a[kMaxRefineTaps];
  double j1[kMaxRefineTaps];
  double j2[kMaxRefineTaps];
  double ma = 0.0, m1 = 0.0, m2 = 0.0;
  int k = 0;
  for (int j = -ry; j <= ry; ++j) {
    const int yy = std::clamp(y + j, 0, h - 1);
    for (int i = -rx; i <= rx; ++i, ++k) {
      const int xx = std::clamp(x + i, 0, w - 1);
      a[k] = l.at(xx, yy);
      j1[k] = grad[static_cast<std::size_t>(yy) * w + xx];
      j2[k] = j * j1[k];
      ma += a[k];
      m1 += j1[k];
      m2 += j2[k];
    }
  }
  ma /= n;
  m1 /= n;
  m2 /= n;
  double h11 = 0.0, h12 = 0.0, h22 = 0.0;
  for (k = 0; k < n; ++k) {
    a[k] -= ma;
    j1[k] -= m1;
    j2[k] -= m2;
    h11 += j1[k] * j1[k];
    h12 += j1[k] * j2[k];
    h22 += j2[k] * j2[k];
  }
  const double det = h11 * h22 - h12 * h12;
  if (!(h11 > 1e-12) || !(det > 1e-9 * h11 * h22)) return std::numeric_limits<double>::quiet_NaN();

  double s = s0;
  double beta = 0.0;
  double b[kMaxRefineTaps];
  for (int it = 0; it < iterations; ++it) {
    double mb = 0.0;
    k = 0;
    for (int j = -ry; j <= ry; ++j) {
      // Row samples at x + i + pos with pos = -(s + beta * j).
      const double pos = -(s + beta * j);
      const double fl = std::floor(pos);
      const double t = pos - fl;
      double wt[6];
      lanczos3_weights(t, wt);
      double wsum = 0.0;
      for (int q = 0; q < 6; ++q) wsum += wt[q];
      const int base = static_cast<int>(fl);
      const auto row = r.row(std::clamp(y + j, 0, h - 1));
      for (int i = -rx; i <= rx; ++i, ++k) {
        double v = 0.0;
        for (int q = 0; q < 6; ++q) v += wt[q] * row[std::clamp(x + i + base + q - 2, 0, w - 1)];
        b[k] = v / wsum;
        mb += b[k];
      }
    }
    mb /= n;
    // a ~ b(p + step) ~ b(p) - step_s * j1 - step_beta * j2
    double g1 = 0.0, g2 = 0.0;
    for (k = 0; k < n; ++k) {
      const double res = a[k] - (b[k] - mb);
      g1 += res * j1[k];
      g2 += res * j2[k];
    }
    const double ds = -(h22 * g1 - h12 * g2) / det;
    const double db = -(h11 * g2 - h12 * g1) / det;
    s += ds;
    beta = std::clamp(beta + db, -1.0, 1.0);
    if (std::fabs(ds) < 1e-4 && std::fabs(db) < 1e-4) break;
  }
  return s;
}

// Re-centers each valid disparity on the zero-mean SSD minimum among its
// integer WTA and the two neighbors, takes the parabolic offset there, and
// polishes it with Gauss-Newton steps on the same cost. The result stays
// within 0.5 px of the integer it is reported against (`base`).
void refine_intensity(const ImageBuffer& l, const ImageBuffer& r, const MatchParams& params,
                      const std::vector<std::int16_t>& wta, std::vector<float>& disparity,
                      std::vector<std::int16_t>& base) {
  const int w = l.width();
  const int h = l.height();
  std::vector<float> grad(static_cast<std::size_t>(w) * h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      grad[static_cast<std::size_t>(y) * w + x] =
          0.5f * (l.at(std::min(x + 1, w - 1), y) - l.at(std::max(x - 1, 0), y));
    }
  }
  parallel_for(0, h, [&](int y) {
    for (int x = 0; x < w; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * w + x;
      if (!std::isfinite(disparity[i])) continue;
      int d = wta[i];
      double e[3];
      for (int k = 0; k < 3; ++k) e[k] = zssd(l, r, x, y, d - 1 + k, params.refine);
      if (e[0] < e[1] && e[0] < e[2] && d > 1) {
        --d;
        e[2] = e[1];
        e[1] = e[0];
        e[0] = zssd(l, r, x, y, d - 1, params.refine);
      } else if (e[2] < e[1] && e[2] < e[0]) {
        ++d;
        e[0] = e[1];
        e[1] = e[2];
        e[2] = zssd(l, r, x, y, d + 1, params.refine);
      }
      const double denom = e[0] + e[2] - 2.0 * e[1];
      double value = d;
      if (denom > 0.0) value += std::clamp(0.5 * (e[0] - e[2]) / denom, -0.5, 0.5);
      const double polished = refine_shift(l, r, grad, x, y, value, params.refine, 4);
      if (std::isfinite(polished) && std::fabs(polished - wta[i]) < 1.5) {
        d = static_cast<int>(std::lround(polished));
        value = std::clamp(polished, d - 0.5, d + 0.5);
      }
      base[i] = static_cast<std::int16_t>(d);
      disparity[i] = value > 0.0 && value <= params.max_disparity
                         ? static_cast<float>(value)
                         : std::numeric_limits<float>::infinity();
    }
  });
}

}  // namespace

int sgm_step_penalty(int p1, int p2, float step) {
  const int g = static_cast<int>(std::lround(255.0 * std::fabs(static_cast<double>(step))));
  return std::max(p1, p2 * 16 / (16 + g));
}

std::vector<std::uint16_t> sgm_aggregate(const CensusImage& left, const CensusImage& right,
                                         const ImageBuffer& left_gray, const MatchParams& params,
                                         unsigned directions) {
  params.validate();
  if (left.width != right.width || left.height != right.height ||
      left.width != left_gray.width() || left.height != left_gray.height() ||
      left_gray.channels() != 1) {
    throw InvalidInput("sgm_aggregate: census images and guide image must share dimensions");
  }
  const int w = left.width;
  const int h = left.height;
  const int levels = params.levels();
  const int p1 = params.effective_p1();
  const int p2 = params.effective_p2();
  const std::size_t row_cells = static_cast<std::size_t>(w) * levels;
  std::vector<std::uint16_t> total(row_cells * h, 0);
  std::vector<std::uint16_t> cost(row_cells);

  // Forward pass walks rows top to bottom and carries the horizontal paths
  // and those with dy = +1; the backward pass carries dy = -1.
  for (int pass = 0; pass < 2; ++pass) {
    std::vector<PathRows> active;
    for (const Direction& d : kDirections) {
      if (!(directions & d.flag)) continue;
      const bool forward = d.dy > 0 || d.dy == 0;
      if (forward == (pass == 0)) active.emplace_back(d, w, levels);
    }
    if (active.empty()) continue;
    const int n = static_cast<int>(active.size());
    for (int i = 0; i < h; ++i) {
      const int y = pass == 0 ? i : h - 1 - i;
      compute_cost_row(left, right, y, levels, cost.data());
      parallel_for(0, n, [&](int k) { advance_row(active[k], cost.data(), left_gray, y, p1, p2, levels); });
      std::uint16_t* dst = total.data() + row_cells * y;
      parallel_for(0, w, [&](int x) {
        std::uint16_t* o = dst + static_cast<std::size_t>(x) * levels;
        for (const PathRows& rows : active) {
          const std::uint16_t* s = rows.cur.data() + static_cast<std::size_t>(x) * rows.pitch + 1;
          for (int d = 0; d < levels; ++d) o[d] = static_cast<std::uint16_t>(o[d] + s[d]);
        }
      });
      for (PathRows& rows : active) rows.swap_rows();
    }
  }
  return total;
}

MatchDetail match_accurate_detailed(const ImageBuffer& left, const ImageBuffer& right,
                                    const MatchParams& params) {
  ImageBuffer lg, rg;
  detail::prepare_pair(left, right, params, lg, rg);
  const CensusImage cl = census_transform(lg, params.census);
  const CensusImage cr = census_transform(rg, params.census);
  const int w = cl.width;
  const int h = cl.height;
  const std::vector<std::uint16_t> total = sgm_aggregate(cl, cr, lg, params);
  const std::size_t row_cells = static_cast<std::size_t>(w) * params.levels();

  MatchDetail out;
  out.left_wta.assign(static_cast<std::size_t>(w) * h, kNoDisparity);
  out.right_wta.assign(static_cast<std::size_t>(w) * h, kNoDisparity);
  std::vector<float> disparity(static_cast<std::size_t>(w) * h);
  parallel_for(0, h, [&](int y) {
    const std::size_t off = static_cast<std::size_t>(y) * w;
    detail::finish_row(total.data() + row_cells * y, w, params, out.left_wta.data() + off,
                       out.right_wta.data() + off, disparity.data() + off);
  });
  out.subpixel_base = out.left_wta;
  if (params.subpixel) refine_intensity(lg, rg, params, out.left_wta, disparity, out.subpixel_base);
  out.refined = DisparityMap(w, h);
  for (std::size_t i = 0; i < disparity.size(); ++i) out.refined.set(i, disparity[i]);
  out.disparity = median3x3(out.refined);
  return out;
}

DisparityMap match_accurate(const ImageBuffer& left, const ImageBuffer& right,
                            const MatchParams& params) {
  return match_accurate_detailed(left, right, params).disparity;
}

}  // namespace stereobench
