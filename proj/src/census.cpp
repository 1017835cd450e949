#include <algorithm>

#include "stereobench/error.hpp"
#include "stereobench/matcher.hpp"
#include "stereobench/parallel.hpp"

namespace stereobench {

CensusImage census_transform(const ImageBuffer& gray, WindowSize window) {
  if (gray.channels() != 1) throw InvalidInput("census_transform: expected a grayscale image");
  if (window.width < 1 || window.height < 1 || window.width % 2 == 0 || window.height % 2 == 0) {
    throw InvalidInput("census_transform: window must be odd-sized");
  }
  if (window.census_bits() > 64) throw InvalidInput("census_transform: window exceeds 64 bits");
  const int w = gray.width();
  const int h = gray.height();
  if (window.width > w || window.height > h) {
    throw InvalidInput("census_transform: window larger than image");
  }
  const int rx = window.width / 2;
  const int ry = window.height / 2;

  CensusImage out;
  out.width = w;
  out.height = h;
  out.bits = window.census_bits();
  out.codes.assign(static_cast<std::size_t>(w) * h, 0);

  parallel_for(0, h, [&](int y) {
    const bool inner_row = y >= ry && y < h - ry;
    std::uint64_t* dst = out.codes.data() + static_cast<std::size_t>(y) * w;
    for (int x = 0; x < w; ++x) {
      const float c = gray.at(x, y);
      std::uint64_t code = 0;
      int bit = 0;
      if (inner_row && x >= rx && x < w - rx) {
        for (int dy = -ry; dy <= ry; ++dy) {
          const float* row = gray.row(y + dy).data() + x;
          for (int dx = -rx; dx <= rx; ++dx) {
            if (dx == 0 && dy == 0) continue;
            code |= std::uint64_t{row[dx] < c} << bit;
            ++bit;
          }
        }
      } else {
        for (int dy = -ry; dy <= ry; ++dy) {
          const auto row = gray.row(std::clamp(y + dy, 0, h - 1));
          for (int dx = -rx; dx <= rx; ++dx) {
            if (dx == 0 && dy == 0) continue;
            if (row[std::clamp(x + dx, 0, w - 1)] < c) code |= std::uint64_t{1} << bit;
            ++bit;
          }
        }
      }
      dst[x] = code;
    }
  });
  return out;
}

}  // namespace stereobench
