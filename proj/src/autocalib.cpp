#include "stereobench/autocalib.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Dense>

#include "stereobench/error.hpp"
#include "stereobench/evaluate.hpp"
#include "stereobench/imageio.hpp"
#include "stereobench/parallel.hpp"
#include "stereobench/resample.hpp"

namespace stereobench {

namespace {

constexpr double kRadToDeg = 180.0 / std::numbers::pi;

struct Site {
  int u;
  int v;
};

bool odd(WindowSize w) { return w.width >= 1 && w.height >= 1 && w.width % 2 && w.height % 2; }

std::vector<Site> textured_sites(const ImageBuffer& gray, const SampleParams& p) {
  const int w = gray.width();
  const int h = gray.height();
  const int bx = p.block.width / 2;
  const int by = p.block.height / 2;
  const int v_lo = by + p.search_v;
  const int v_hi = h - 1 - by - p.search_v;
  std::vector<std::vector<Site>> rows;
  for (int v = v_lo; v <= v_hi; v += p.grid_step) rows.emplace_back();
  const double area = static_cast<double>(p.block.width) * p.block.height;
  parallel_for(0, static_cast<int>(rows.size()), [&](int r) {
    const int v = v_lo + r * p.grid_step;
    for (int u = bx; u <= w - 1 - bx; u += p.grid_step) {
      double gx = 0.0;
      double gy = 0.0;
      for (int j = -by; j <= by; ++j) {
        const int y = v + j;
        for (int i = -bx; i <= bx; ++i) {
          const int x = u + i;
          gx += std::fabs(gray.at(std::min(x + 1, w - 1), y) - gray.at(std::max(x - 1, 0), y));
          gy += std::fabs(gray.at(x, std::min(y + 1, h - 1)) - gray.at(x, std::max(y - 1, 0)));
        }
      }
      gx *= 0.5 / area;
      gy *= 0.5 / area;
      if (gx >= p.min_gradient && gy >= p.min_gradient) rows[r].push_back({u, v});
    }
  });
  std::vector<Site> sites;
  for (const auto& r : rows) sites.insert(sites.end(), r.begin(), r.end());
  return sites;
}

int block_cost(const CensusImage& l, const CensusImage& r, const Site& s, int bx, int by, int d,
               int dy) {
  int sum = 0;
  for (int j = -by; j <= by; ++j) {
    const std::uint64_t* lrow = l.codes.data() + static_cast<std::size_t>(s.v + j) * l.width;
    const std::uint64_t* rrow = r.codes.data() + static_cast<std::size_t>(s.v + j + dy) * r.width;
    for (int i = -bx; i <= bx; ++i) {
      sum += __builtin_popcountll(lrow[s.u + i] ^ rrow[s.u + i - d]);
    }
  }
  return sum;
}

// Horizontal disparity of each site at zero vertical offset; -1 when the
// match is ambiguous.
std::vector<int> horizontal_hints(const CensusImage& l, const CensusImage& r,
                                  const std::vector<Site>& sites, const SampleParams& p) {
  const int bx = p.block.width / 2;
  const int by = p.block.height / 2;
  std::vector<int> hints(sites.size(), -1);
  parallel_for(0, static_cast<int>(sites.size()), [&](int k) {
    const Site& s = sites[k];
    const int dmax = std::min(p.search_h, s.u - bx);
    std::vector<int> cost(dmax + 1);
    int best = 0;
    for (int d = 0; d <= dmax; ++d) {
      cost[d] = block_cost(l, r, s, bx, by, d, 0);
      if (cost[d] < cost[best]) best = d;
    }
    int second = -1;
    for (int d = 0; d <= dmax; ++d) {
      if (std::abs(d - best) >= 2 && (second < 0 || cost[d] < second)) second = cost[d];
    }
    if (second < 0 || cost[best] < p.uniqueness * second) hints[k] = best;
  });
  return hints;
}

std::vector<VerticalSample> vertical_samples(const CensusImage& l, const CensusImage& r,
                                             const std::vector<Site>& sites,
                                             const std::vector<int>& hints,
                                             const SampleParams& p) {
  const int bx = p.block.width / 2;
  const int by = p.block.height / 2;
  const int sv = p.search_v;
  std::vector<VerticalSample> found(sites.size());
  std::vector<std::uint8_t> ok(sites.size(), 0);
  parallel_for(0, static_cast<int>(sites.size()), [&](int k) {
    if (hints[k] < 0) return;
    const Site& s = sites[k];
    const int d_lo = std::max(0, hints[k] - 1);
    const int d_hi = std::min(hints[k] + 1, s.u - bx);
    int best = -1;
    int best_d = 0;
    int best_dy = 0;
    int slice[64];
    for (int d = d_lo; d <= d_hi; ++d) {
      for (int dy = -sv; dy <= sv; ++dy) {
        const int c = block_cost(l, r, s, bx, by, d, dy);
        if (best < 0 || c < best) {
          best = c;
          best_d = d;
          best_dy = dy;
        }
      }
    }
    if (std::abs(best_dy) == sv) return;
    for (int dy = best_dy - 1; dy <= best_dy + 1; ++dy) {
      slice[dy - best_dy + 1] = block_cost(l, r, s, bx, by, best_d, dy);
    }
    const int denom = slice[0] + slice[2] - 2 * slice[1];
    if (denom <= 0) return;
    const double offset = 0.5 * (slice[0] - slice[2]) / denom;
    found[k] = {static_cast<double>(s.u), static_cast<double>(s.v), -(best_dy + offset), 1.0};
    ok[k] = 1;
  });
  std::vector<VerticalSample> out;
  for (std::size_t k = 0; k < sites.size(); ++k) {
    if (ok[k]) out.push_back(found[k]);
  }
  return out;
}

void check_pair(const ImageBuffer& left, const ImageBuffer& right) {
  if (left.empty() || left.width() != right.width() || left.height() != right.height()) {
    throw InvalidInput("autocalib: left/right dimensions differ");
  }
}

}  // namespace

void SampleParams::validate() const {
  if (grid_step < 1) throw InvalidInput("grid_step must be >= 1");
  if (search_h < 0 || search_v < 1 || search_v > 30) throw InvalidInput("invalid search bounds");
  if (!odd(census) || census.census_bits() > 64 || !odd(block)) {
    throw InvalidInput("sampling windows must be odd-sized, census at most 64 bits");
  }
  if (!(uniqueness > 0.0 && uniqueness <= 1.0)) throw InvalidInput("uniqueness must be in (0, 1]");
}

std::vector<VerticalSample> collect_vertical_samples(const ImageBuffer& left,
                                                     const ImageBuffer& right,
                                                     const SampleParams& params) {
  params.validate();
  check_pair(left, right);
  const ImageBuffer lg = to_gray(left);
  const ImageBuffer rg = to_gray(right);
  if (lg.width() < params.block.width || lg.height() < params.block.height + 2 * params.search_v) {
    return {};
  }
  const CensusImage lc = census_transform(lg, params.census);
  const CensusImage rc = census_transform(rg, params.census);
  const std::vector<Site> sites = textured_sites(lg, params);
  return vertical_samples(lc, rc, sites, horizontal_hints(lc, rc, sites, params), params);
}

CalibrationEstimate fit_rotation(const std::vector<VerticalSample>& samples,
                                 const Intrinsics& intr, const FitParams& params) {
  intr.validate();
  const std::size_t n = samples.size();
  if (n < kMinCalibrationSamples) {
    throw EstimationError("fit_rotation: " + std::to_string(n) + " samples, need at least " +
                          std::to_string(kMinCalibrationSamples));
  }
  const double f = intr.focal_length_px;
  Eigen::MatrixXd a(n, 3);
  Eigen::VectorXd b(n);
  Eigen::VectorXd prior(n);
  for (std::size_t i = 0; i < n; ++i) {
    const VerticalSample& s = samples[i];
    const double x = s.u - intr.cx;
    a(i, 0) = -f;
    a(i, 1) = x;
    a(i, 2) = x * (s.v - intr.cy) / f;
    b(i) = s.dv;
    prior(i) = s.weight;
  }
  const Eigen::Vector3d scale = (a.colwise().squaredNorm() / static_cast<double>(n)).cwiseSqrt();
  for (int j = 0; j < 3; ++j) {
    if (!(scale(j) > 0.0)) throw DegenerateGeometry("fit_rotation: samples do not span the image");
  }
  const Eigen::MatrixXd an = a * scale.cwiseInverse().asDiagonal();

  auto solve = [&](const Eigen::VectorXd& w) {
    const Eigen::Matrix3d ata = an.transpose() * w.asDiagonal() * an;
    const Eigen::Vector3d atb = an.transpose() * w.asDiagonal() * b;
    const Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(ata);
    const double lo = eig.eigenvalues().minCoeff();
    const double hi = eig.eigenvalues().maxCoeff();
    if (!(hi > 0.0) || !(lo > 1e-9 * hi)) {
      throw DegenerateGeometry("fit_rotation: samples do not constrain all three angles");
    }
    return Eigen::Vector3d(ata.ldlt().solve(atb));
  };

  Eigen::VectorXd w = prior;
  Eigen::Vector3d theta = solve(w);
  Eigen::VectorXd r = b - an * theta;
  auto threshold = [&](const Eigen::VectorXd& res) {
    const std::vector<double> rv(res.data(), res.data() + res.size());
    const double med = median_of(rv);
    std::vector<double> dev(rv.size());
    for (std::size_t i = 0; i < rv.size(); ++i) dev[i] = std::fabs(rv[i] - med);
    return params.huber_k * median_of(std::move(dev));
  };
  for (int it = 0; it < params.irls_iterations; ++it) {
    const double k = threshold(r);
    if (!(k > 0.0)) break;
    for (std::size_t i = 0; i < n; ++i) {
      const double ar = std::fabs(r(i));
      w(i) = prior(i) * (ar <= k ? 1.0 : k / ar);
    }
    theta = solve(w);
    r = b - an * theta;
  }

  const Eigen::Vector3d rad = theta.cwiseQuotient(scale);
  CalibrationEstimate est;
  est.pitch_deg = rad(0) * kRadToDeg;
  est.roll_deg = rad(1) * kRadToDeg;
  est.yaw_deg = rad(2) * kRadToDeg;
  est.sample_count = n;
  const double k = threshold(r);
  std::size_t inliers = 0;
  double ss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (std::fabs(r(i)) <= k || !(k > 0.0)) {
      ++inliers;
      ss += r(i) * r(i);
    }
  }
  est.inlier_fraction = static_cast<double>(inliers) / static_cast<double>(n);
  est.residual_rms_px = inliers > 0 ? std::sqrt(ss / static_cast<double>(inliers)) : 0.0;
  return est;
}

ImageBuffer derotate_right(const ImageBuffer& right, const Intrinsics& intr,
                           const RotationDeg& rotation) {
  const auto m = rotation_matrix(rotation);
  const double f = intr.focal_length_px;
  ImageBuffer out(right.width(), right.height(), right.channels());
  parallel_for(0, right.height(), [&](int y) {
    const double ry = (y - intr.cy) / f;
    for (int x = 0; x < right.width(); ++x) {
      const double rx = (x - intr.cx) / f;
      // R^T * (rx, ry, 1)
      const double px = m[0] * rx + m[3] * ry + m[6];
      const double py = m[1] * rx + m[4] * ry + m[7];
      const double pz = m[2] * rx + m[5] * ry + m[8];
      const double sx = f * px / pz + intr.cx;
      const double sy = f * py / pz + intr.cy;
      for (int c = 0; c < right.channels(); ++c) out.at(x, y, c) = interpolate_lanczos3(right, sx, sy, c);
    }
  });
  return out;
}

CalibrationEstimate estimate_rotation(const ImageBuffer& left, const ImageBuffer& right,
                                      const Intrinsics& intr, const CalibParams& params) {
  params.sampling.validate();
  intr.validate();
  check_pair(left, right);
  if (left.width() != intr.width || left.height() != intr.height) {
    throw InvalidInput("estimate_rotation: image size does not match the intrinsics");
  }
  if (params.iterations < 1) throw InvalidInput("estimate_rotation: iterations must be >= 1");
  const SampleParams& sp = params.sampling;
  const ImageBuffer lg = to_gray(left);
  const ImageBuffer rg = to_gray(right);
  const CensusImage lc = census_transform(lg, sp.census);
  const std::vector<Site> sites = textured_sites(lg, sp);
  std::vector<int> hints;

  RotationDeg total;
  CalibrationEstimate last;
  for (int it = 0; it < params.iterations; ++it) {
    const CensusImage rc =
        census_transform(it == 0 ? rg : derotate_right(rg, intr, total), sp.census);
    if (it == 0) hints = horizontal_hints(lc, rc, sites, sp);
    last = fit_rotation(vertical_samples(lc, rc, sites, hints, sp), intr, params.fit);
    total = total + last.rotation();
  }
  last.roll_deg = total.roll;
  last.pitch_deg = total.pitch;
  last.yaw_deg = total.yaw;
  return last;
}

std::vector<std::optional<CalibrationEstimate>> track_sequence(
    const std::vector<StereoPair>& frames, const Intrinsics& intr, const TrackOptions& options) {
  if (frames.empty()) throw InvalidInput("track_sequence: no frames");
  if (!(options.ema_alpha > 0.0 && options.ema_alpha <= 1.0)) {
    throw InvalidInput("track_sequence: ema_alpha must be in (0, 1]");
  }
  std::vector<std::optional<CalibrationEstimate>> out(frames.size());
  for (std::size_t k = 0; k < frames.size(); ++k) {
    try {
      out[k] = estimate_rotation(frames[k].left, frames[k].right, intr, options.calib);
    } catch (const EstimationError&) {
      out[k].reset();
    }
  }
  if (options.ema_alpha < 1.0) {
    std::optional<RotationDeg> running;
    const double a = options.ema_alpha;
    for (auto& e : out) {
      if (!e) continue;
      const RotationDeg cur = e->rotation();
      running = running ? RotationDeg{a * cur.roll + (1 - a) * running->roll,
                                      a * cur.pitch + (1 - a) * running->pitch,
                                      a * cur.yaw + (1 - a) * running->yaw}
                        : cur;
      e->roll_deg = running->roll;
      e->pitch_deg = running->pitch;
      e->yaw_deg = running->yaw;
    }
  }
  return out;
}

std::string encode_trace_csv(const std::vector<std::optional<CalibrationEstimate>>& trace) {
  std::string out = std::string(kTraceCsvHeader) + "\n";
  for (std::size_t k = 0; k < trace.size(); ++k) {
    out += std::to_string(k);
    if (const auto& e = trace[k]) {
      for (double v : {e->roll_deg, e->pitch_deg, e->yaw_deg, e->residual_rms_px, e->inlier_fraction}) {
        out += "," + format_g6(v);
      }
    } else {
      out += ",,,,,";
    }
    out += "\n";
  }
  return out;
}

void write_trace_csv(const std::string& path,
                     const std::vector<std::optional<CalibrationEstimate>>& trace) {
  write_file(path, encode_trace_csv(trace));
}

}  // namespace stereobench
