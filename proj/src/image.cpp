#include "stereobench/image.hpp"

#include <algorithm>

#include "stereobench/error.hpp"

namespace stereobench {

namespace {

void check_shape(int width, int height, int channels) {
  if (width < 0 || height < 0) throw InvalidInput("image dimensions must be non-negative");
  if (channels != 1 && channels != 3) throw InvalidInput("image channels must be 1 or 3");
}

}  // namespace

ImageBuffer::ImageBuffer(int width, int height, int channels)
    : width_(width), height_(height), channels_(channels) {
  check_shape(width, height, channels);
  samples_.assign(static_cast<std::size_t>(width) * height * channels, 0.0f);
}

ImageBuffer::ImageBuffer(int width, int height, int channels, std::vector<float> samples)
    : width_(width), height_(height), channels_(channels), samples_(std::move(samples)) {
  check_shape(width, height, channels);
  if (samples_.size() != static_cast<std::size_t>(width) * height * channels) {
    throw InvalidInput("image sample count does not match width*height*channels");
  }
  for (float s : samples_) {
    if (!(s >= 0.0f && s <= 1.0f)) throw InvalidInput("image samples must lie in [0, 1]");
  }
}

ImageBuffer to_gray(const ImageBuffer& img) {
  if (img.channels() == 1) return img;
  ImageBuffer out(img.width(), img.height(), 1);
  auto src = img.samples();
  auto dst = out.samples();
  for (std::size_t i = 0; i < dst.size(); ++i) {
    const float v = 0.299f * src[3 * i] + 0.587f * src[3 * i + 1] + 0.114f * src[3 * i + 2];
    dst[i] = std::clamp(v, 0.0f, 1.0f);
  }
  return out;
}

ImageBuffer apply_gain(const ImageBuffer& img, float gain) {
  ImageBuffer out = img;
  for (float& s : out.samples()) s = std::clamp(s * gain, 0.0f, 1.0f);
  return out;
}

}  // namespace stereobench
