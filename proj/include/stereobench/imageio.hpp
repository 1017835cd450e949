#ifndef STEREOBENCH_IMAGEIO_HPP
#define STEREOBENCH_IMAGEIO_HPP

// File formats:
//   PGM  binary P5, maxval <= 255
//   PNG  8-bit gray or 8-bit RGB (libpng)
//   PFM  single-channel "Pf", rows stored bottom-to-top, scale sign gives
//        endianness; written little-endian with scale -1. Invalid pixels
//        are stored as +inf.
//   PLY  1.0, ascii or binary_little_endian, float x/y/z (+ uchar rgb)
//   CSV  depth-bin error report, LF line endings, %.6g numbers

#include <cstddef>
#include <filesystem>
#include <string>

#include "stereobench/geometry.hpp"
#include "stereobench/image.hpp"
#include "stereobench/report.hpp"

namespace stereobench {

/// Dispatches on extension: ".pgm" or ".png".
ImageBuffer read_image(const std::filesystem::path& path);
void write_image(const ImageBuffer& img, const std::filesystem::path& path);

ImageBuffer read_pgm(const std::filesystem::path& path);
void write_pgm(const ImageBuffer& img, const std::filesystem::path& path);
ImageBuffer read_png(const std::filesystem::path& path);
void write_png(const ImageBuffer& img, const std::filesystem::path& path);

/// Byte-level variants used by the file functions.
ImageBuffer decode_pgm(const std::string& bytes);
std::string encode_pgm(const ImageBuffer& img);

struct PfmReadStats {
  std::size_t nan_count = 0;        // NaN samples, read as invalid
  std::size_t nonpositive_count = 0;  // finite samples <= 0, read as invalid
};

DisparityMap read_pfm(const std::filesystem::path& path, PfmReadStats* stats = nullptr);
void write_pfm(const DisparityMap& disp, const std::filesystem::path& path);
DepthMap read_depth_pfm(const std::filesystem::path& path, PfmReadStats* stats = nullptr);
void write_pfm(const DepthMap& depth, const std::filesystem::path& path);

DisparityMap decode_pfm(const std::string& bytes, PfmReadStats* stats = nullptr);
std::string encode_pfm(const DisparityMap& disp);

enum class PlyFormat { ascii, binary_little_endian };

void write_ply(const PointCloud& cloud, const std::filesystem::path& path,
               PlyFormat format = PlyFormat::binary_little_endian);
std::string encode_ply(const PointCloud& cloud, PlyFormat format);
/// Reads the subset of PLY this library writes.
PointCloud read_ply(const std::filesystem::path& path);
PointCloud decode_ply(const std::string& bytes);

inline constexpr const char* kReportCsvHeader = "z_min,z_max,count,median_abs_err_m,rms_err_m";

void write_csv_report(const BinErrorReport& report, const std::filesystem::path& path);
std::string encode_csv_report(const BinErrorReport& report);
BinErrorReport read_csv_report(const std::filesystem::path& path);
BinErrorReport decode_csv_report(const std::string& text);

/// Formats v with %.6g.
std::string format_g6(double v);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& bytes);

}  // namespace stereobench

#endif  // STEREOBENCH_IMAGEIO_HPP
