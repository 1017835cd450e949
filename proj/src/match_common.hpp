#ifndef STEREOBENCH_MATCH_COMMON_HPP
#define STEREOBENCH_MATCH_COMMON_HPP

#include <cstdint>

#include "stereobench/image.hpp"
#include "stereobench/matcher.hpp"

namespace stereobench::detail {

/// Validates params and the pair; returns grayscale copies of both views.
void prepare_pair(const ImageBuffer& left, const ImageBuffer& right, const MatchParams& params,
                  ImageBuffer& left_gray, ImageBuffer& right_gray);

/// WTA, subpixel refinement and LR check for one image row of aggregated
/// costs laid out [x * levels + d]. Writes the integer WTA of both views and
/// the refined disparity (+inf where invalid).
void finish_row(const std::uint16_t* cost, int width, const MatchParams& params,
                std::int16_t* left_wta, std::int16_t* right_wta, float* disparity);

}  // namespace stereobench::detail

#endif  // STEREOBENCH_MATCH_COMMON_HPP
