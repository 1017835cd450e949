#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "match_common.hpp"
#include "stereobench/error.hpp"
#include "stereobench/matcher.hpp"
#include "stereobench/parallel.hpp"

namespace stereobench {

namespace {

constexpr float kInvalid = std::numeric_limits<float>::infinity();

bool odd_window(WindowSize w) { return w.width >= 1 && w.height >= 1 && w.width % 2 && w.height % 2; }

DisparityMap to_map(int width, int height, const std::vector<float>& values) {
  DisparityMap out(width, height);
  for (std::size_t i = 0; i < values.size(); ++i) out.set(i, values[i]);
  return out;
}

}  // namespace

void MatchParams::validate() const {
  if (max_disparity < 1) throw InvalidInput("max_disparity must be >= 1");
  if (max_disparity > std::numeric_limits<std::int16_t>::max() - 1) {
    throw InvalidInput("max_disparity too large");
  }
  if (!odd_window(census) || !odd_window(block) || !odd_window(refine)) throw InvalidInput("windows must be odd-sized");
  if (refine.width > 31 || refine.height > 31) throw InvalidInput("refine window must be at most 31x31");
  if (census.census_bits() > 64) throw InvalidInput("census window exceeds 64 bits");
  if (census.census_bits() < 1) throw InvalidInput("census window must have at least 2 pixels");
  const int a = effective_p1();
  const int b = effective_p2();
  if (!(a > 0 && b > a)) throw InvalidInput("penalties must satisfy P2 > P1 > 0");
  if (!(lr_threshold >= 0.5)) throw InvalidInput("lr_threshold must be >= 0.5");
}

int MatchParams::effective_p1() const {
  return p1 > 0 ? p1 : static_cast<int>(std::lround(8.0 * census.census_bits() / 64.0));
}

int MatchParams::effective_p2() const {
  return p2 > 0 ? p2 : static_cast<int>(std::lround(32.0 * census.census_bits() / 64.0));
}

namespace detail {

void prepare_pair(const ImageBuffer& left, const ImageBuffer& right, const MatchParams& params,
                  ImageBuffer& left_gray, ImageBuffer& right_gray) {
  params.validate();
  if (left.empty() || right.empty()) throw InvalidInput("matcher: empty image");
  if (left.width() != right.width() || left.height() != right.height()) {
    throw InvalidInput("matcher: left/right dimensions differ");
  }
  left_gray = to_gray(left);
  right_gray = to_gray(right);
}

void finish_row(const std::uint16_t* cost, int width, const MatchParams& params,
                std::int16_t* left_wta, std::int16_t* right_wta, float* disparity) {
  const int levels = params.levels();
  std::vector<std::uint8_t> ambiguous(width, 0);

  for (int x = 0; x < width; ++x) {
    const std::uint16_t* c = cost + static_cast<std::size_t>(x) * levels;
    int best = 0;
    for (int d = 1; d < levels; ++d) {
      if (c[d] < c[best]) best = d;
    }
    bool amb = false;
    for (int d = 0; d < levels; ++d) {
      if (c[d] == c[best] && std::abs(d - best) >= 2) {
        amb = true;
        break;
      }
    }
    left_wta[x] = static_cast<std::int16_t>(best);
    ambiguous[x] = amb;
  }

  for (int xr = 0; xr < width; ++xr) {
    const int dmax = std::min(levels - 1, width - 1 - xr);
    int best = 0;
    std::uint16_t best_cost = cost[static_cast<std::size_t>(xr) * levels];
    for (int d = 1; d <= dmax; ++d) {
      const std::uint16_t v = cost[static_cast<std::size_t>(xr + d) * levels + d];
      if (v < best_cost) {
        best_cost = v;
        best = d;
      }
    }
    right_wta[xr] = static_cast<std::int16_t>(best);
  }

  for (int x = 0; x < width; ++x) {
    disparity[x] = kInvalid;
    const int d = left_wta[x];
    if (ambiguous[x] || d <= 0 || x - d < 0) continue;
    if (std::abs(d - right_wta[x - d]) > params.lr_threshold) continue;
    double value = d;
    if (params.subpixel && d < levels - 1) {
      const std::uint16_t* c = cost + static_cast<std::size_t>(x) * levels;
      const int c0 = c[d - 1];
      const int c1 = c[d];
      const int c2 = c[d + 1];
      const int denom = c0 + c2 - 2 * c1;
      if (denom > 0) value += std::clamp(0.5 * (c0 - c2) / denom, -0.5, 0.5);
    }
    if (value > 0.0 && value <= params.max_disparity) disparity[x] = static_cast<float>(value);
  }
}

}  // namespace detail

MatchDetail match_fast_detailed(const ImageBuffer& left, const ImageBuffer& right,
                                const MatchParams& params) {
  ImageBuffer lg, rg;
  detail::prepare_pair(left, right, params, lg, rg);
  const CensusImage cl = census_transform(lg, params.census);
  const CensusImage cr = census_transform(rg, params.census);
  const int w = cl.width;
  const int h = cl.height;
  const int levels = params.levels();
  const int rx = params.block.width / 2;
  const int ry = params.block.height / 2;
  const std::size_t row_cells = static_cast<std::size_t>(w) * levels;

  MatchDetail out;
  out.left_wta.assign(static_cast<std::size_t>(w) * h, kNoDisparity);
  out.right_wta.assign(static_cast<std::size_t>(w) * h, kNoDisparity);
  std::vector<float> disparity(static_cast<std::size_t>(w) * h, kInvalid);

  // Rows are processed in independent bands; each band keeps a running
  // vertical sum of horizontally box-filtered cost rows.
  constexpr int kBandRows = 64;
  const int bands = (h + kBandRows - 1) / kBandRows;
  parallel_for(0, bands, [&](int band) {
    const int y0 = band * kBandRows;
    const int y1 = std::min(h, y0 + kBandRows);
    const int ring = 2 * ry + 2;
    std::vector<std::uint16_t> ring_rows(row_cells * ring);
    std::vector<int> ring_tag(ring, -1);
    std::vector<std::uint16_t> raw(row_cells);
    std::vector<std::uint16_t> sum(levels);
    std::vector<std::uint16_t> vertical(row_cells, 0);

    auto box_row = [&](int j) -> const std::uint16_t* {
      j = std::clamp(j, 0, h - 1);
      const int slot = j % ring;
      std::uint16_t* dst = ring_rows.data() + row_cells * slot;
      if (ring_tag[slot] == j) return dst;
      for (int x = 0; x < w; ++x) {
        std::uint16_t* r = raw.data() + static_cast<std::size_t>(x) * levels;
        const std::uint64_t code = cl.at(x, j);
        const int dlim = std::min(levels - 1, x);
        for (int d = 0; d <= dlim; ++d) {
          r[d] = static_cast<std::uint16_t>(__builtin_popcountll(code ^ cr.at(x - d, j)));
        }
        for (int d = dlim + 1; d < levels; ++d) r[d] = static_cast<std::uint16_t>(cl.bits);
      }
      std::fill(sum.begin(), sum.end(), 0);
      for (int i = -rx; i <= rx; ++i) {
        const std::uint16_t* r = raw.data() + static_cast<std::size_t>(std::clamp(i, 0, w - 1)) * levels;
        for (int d = 0; d < levels; ++d) sum[d] += r[d];
      }
      for (int x = 0; x < w; ++x) {
        std::uint16_t* o = dst + static_cast<std::size_t>(x) * levels;
        const std::uint16_t* add = raw.data() + static_cast<std::size_t>(std::min(x + rx + 1, w - 1)) * levels;
        const std::uint16_t* sub = raw.data() + static_cast<std::size_t>(std::max(x - rx, 0)) * levels;
        for (int d = 0; d < levels; ++d) {
          o[d] = sum[d];
          sum[d] = static_cast<std::uint16_t>(sum[d] + add[d] - sub[d]);
        }
      }
      ring_tag[slot] = j;
      return dst;
    };

    for (int k = -ry; k <= ry; ++k) {
      const std::uint16_t* r = box_row(y0 + k);
      for (std::size_t i = 0; i < row_cells; ++i) vertical[i] += r[i];
    }
    for (int y = y0; y < y1; ++y) {
      if (y > y0) {
        const std::uint16_t* sub = box_row(y - 1 - ry);
        const std::uint16_t* add = box_row(y + ry);
        for (std::size_t i = 0; i < row_cells; ++i) {
          vertical[i] = static_cast<std::uint16_t>(vertical[i] + add[i] - sub[i]);
        }
      }
      const std::size_t off = static_cast<std::size_t>(y) * w;
      detail::finish_row(vertical.data(), w, params, out.left_wta.data() + off,
                         out.right_wta.data() + off, disparity.data() + off);
    }
  });

  out.disparity = to_map(w, h, disparity);
  out.refined = out.disparity;
  out.subpixel_base = out.left_wta;
  return out;
}

DisparityMap match_fast(const ImageBuffer& left, const ImageBuffer& right,
                        const MatchParams& params) {
  return match_fast_detailed(left, right, params).disparity;
}

DisparityMap median3x3(const DisparityMap& disp) {
  const int w = disp.width();
  const int h = disp.height();
  std::vector<float> values(disp.size(), kInvalid);
  parallel_for(0, h, [&](int y) {
    float window[9];
    for (int x = 0; x < w; ++x) {
      if (!disp.valid(x, y)) continue;
      int n = 0;
      for (int dy = -1; dy <= 1; ++dy) {
        const int yy = y + dy;
        if (yy < 0 || yy >= h) continue;
        for (int dx = -1; dx <= 1; ++dx) {
          const int xx = x + dx;
          if (xx < 0 || xx >= w || !disp.valid(xx, yy)) continue;
          window[n++] = disp.at(xx, yy);
        }
      }
      std::sort(window, window + n);
      values[static_cast<std::size_t>(y) * w + x] =
          n % 2 ? window[n / 2] : 0.5f * (window[n / 2 - 1] + window[n / 2]);
    }
  });
  return to_map(w, h, values);
}

}  // namespace stereobench
