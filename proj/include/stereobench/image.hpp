#ifndef STEREOBENCH_IMAGE_HPP
#define STEREOBENCH_IMAGE_HPP

#include <cstddef>
#include <span>
#include <vector>

namespace stereobench {

/// Row-major interleaved single-precision image with samples in [0, 1].
class ImageBuffer {
 public:
  ImageBuffer() = default;
  /// Zero-filled image. channels must be 1 or 3.
  ImageBuffer(int width, int height, int channels = 1);
  /// Takes ownership of samples; throws InvalidInput on a size mismatch or
  /// a sample outside [0, 1].
  ImageBuffer(int width, int height, int channels, std::vector<float> samples);

  int width() const { return width_; }
  int height() const { return height_; }
  int channels() const { return channels_; }
  bool empty() const { return samples_.empty(); }

  float at(int x, int y, int c = 0) const { return samples_[index(x, y, c)]; }
  float& at(int x, int y, int c = 0) { return samples_[index(x, y, c)]; }
  std::span<const float> samples() const { return samples_; }
  std::span<float> samples() { return samples_; }
  std::span<const float> row(int y) const {
    return std::span<const float>(samples_).subspan(index(0, y, 0),
                                                    static_cast<std::size_t>(width_) * channels_);
  }

  bool same_shape(const ImageBuffer& o) const {
    return width_ == o.width_ && height_ == o.height_ && channels_ == o.channels_;
  }
  bool operator==(const ImageBuffer&) const = default;

 private:
  std::size_t index(int x, int y, int c) const {
    return (static_cast<std::size_t>(y) * width_ + x) * channels_ + c;
  }

  int width_ = 0;
  int height_ = 0;
  int channels_ = 1;
  std::vector<float> samples_;
};

/// Rec. 601 luma for 3-channel input; 1-channel input is returned unchanged.
ImageBuffer to_gray(const ImageBuffer& img);

/// Multiplies every sample by gain and clamps to [0, 1].
ImageBuffer apply_gain(const ImageBuffer& img, float gain);

}  // namespace stereobench

#endif  // STEREOBENCH_IMAGE_HPP
