#include "stereobench/imageio.hpp"

#include <png.h>

#include <algorithm>
#include <array>
#include <bit>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>
#include <vector>

#include "stereobench/error.hpp"

namespace stereobench {

namespace {

std::uint8_t to_code(float v) {
  const float s = std::round(std::clamp(v, 0.0f, 1.0f) * 255.0f);
  return static_cast<std::uint8_t>(s);
}

std::string lower_extension(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  for (auto& c : ext) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return ext;
}

/// Whitespace/comment-aware tokenizer for netpbm-style headers.
class HeaderReader {
 public:
  explicit HeaderReader(const std::string& bytes) : bytes_(bytes) {}

  std::string token(bool allow_comments) {
    skip_space(allow_comments);
    const std::size_t start = pos_;
    while (pos_ < bytes_.size() && !std::isspace(static_cast<unsigned char>(bytes_[pos_]))) {
      ++pos_;
    }
    if (start == pos_) throw FormatError("unexpected end of header", static_cast<long long>(pos_));
    return bytes_.substr(start, pos_ - start);
  }

  long long integer(bool allow_comments, const char* what) {
    const std::size_t at = pos_;
    const std::string t = token(allow_comments);
    long long v = 0;
    for (char c : t) {
      if (!std::isdigit(static_cast<unsigned char>(c))) {
        throw FormatError(std::string("malformed ") + what, static_cast<long long>(at));
      }
      v = v * 10 + (c - '0');
      if (v > (1LL << 31)) throw FormatError(std::string(what) + " too large", static_cast<long long>(at));
    }
    return v;
  }

  /// Consumes exactly one whitespace byte separating header from payload.
  void single_space() {
    if (pos_ >= bytes_.size() || !std::isspace(static_cast<unsigned char>(bytes_[pos_]))) {
      throw FormatError("missing whitespace before payload", static_cast<long long>(pos_));
    }
    ++pos_;
  }

  std::size_t pos() const { return pos_; }

 private:
  void skip_space(bool allow_comments) {
    while (pos_ < bytes_.size()) {
      const char c = bytes_[pos_];
      if (std::isspace(static_cast<unsigned char>(c))) {
        ++pos_;
      } else if (allow_comments && c == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  const std::string& bytes_;
  std::size_t pos_ = 0;
};

template <class Map>
std::string encode_pfm_map(const Map& map) {
  std::string out = "Pf\n" + std::to_string(map.width()) + " " + std::to_string(map.height()) +
                    "\n-1.0\n";
  const std::size_t header = out.size();
  out.resize(header + map.size() * 4);
  char* dst = out.data() + header;
  for (int y = map.height() - 1; y >= 0; --y) {
    for (int x = 0; x < map.width(); ++x) {
      const float v = map.valid(x, y) ? map.at(x, y) : std::numeric_limits<float>::infinity();
      std::uint32_t bits = std::bit_cast<std::uint32_t>(v);
      if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap32(bits);
      std::memcpy(dst, &bits, 4);
      dst += 4;
    }
  }
  return out;
}

template <class Map>
Map decode_pfm_map(const std::string& bytes, PfmReadStats* stats) {
  HeaderReader hdr(bytes);
  const std::string magic = hdr.token(false);
  if (magic == "PF") throw FormatError("color PFM (PF) is not supported", 0);
  if (magic != "Pf") throw FormatError("not a PFM file", 0);
  const long long w = hdr.integer(false, "width");
  const long long h = hdr.integer(false, "height");
  const std::size_t scale_at = hdr.pos();
  const std::string scale_tok = hdr.token(false);
  double scale = 0.0;
  try {
    std::size_t used = 0;
    scale = std::stod(scale_tok, &used);
    if (used != scale_tok.size()) throw std::invalid_argument("trailing");
  } catch (const std::exception&) {
    throw FormatError("malformed PFM scale", static_cast<long long>(scale_at));
  }
  if (scale == 0.0 || !std::isfinite(scale)) {
    throw FormatError("PFM scale must be non-zero", static_cast<long long>(scale_at));
  }
  hdr.single_space();
  const bool little = scale < 0.0;
  const std::size_t payload = static_cast<std::size_t>(w) * static_cast<std::size_t>(h) * 4;
  if (bytes.size() - hdr.pos() < payload) {
    throw FormatError("truncated PFM payload", static_cast<long long>(bytes.size()));
  }
  Map map(static_cast<int>(w), static_cast<int>(h));
  const char* src = bytes.data() + hdr.pos();
  PfmReadStats local;
  for (long long y = h - 1; y >= 0; --y) {
    for (long long x = 0; x < w; ++x) {
      std::uint32_t bits;
      std::memcpy(&bits, src, 4);
      src += 4;
      const bool swap = little != (std::endian::native == std::endian::little);
      if (swap) bits = __builtin_bswap32(bits);
      const float v = std::bit_cast<float>(bits);
      if (std::isnan(v)) {
        ++local.nan_count;
      } else if (std::isfinite(v) && v <= 0.0f) {
        ++local.nonpositive_count;
      }
      map.set(static_cast<int>(x), static_cast<int>(y), v);
    }
  }
  if (stats != nullptr) *stats = local;
  return map;
}

const char* ply_format_name(PlyFormat f) {
  return f == PlyFormat::ascii ? "ascii" : "binary_little_endian";
}

template <class T>
void append_le(std::string& out, T v) {
  auto bits = std::bit_cast<std::array<char, sizeof(T)>>(v);
  if constexpr (std::endian::native == std::endian::big) std::reverse(bits.begin(), bits.end());
  out.append(bits.data(), bits.size());
}

template <class T>
T read_le(const char* p) {
  std::array<char, sizeof(T)> bits;
  std::memcpy(bits.data(), p, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bits.begin(), bits.end());
  return std::bit_cast<T>(bits);
}

std::string format_float9(float v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", static_cast<double>(v));
  return buf;
}

}  // namespace

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed: " + path.string());
}

ImageBuffer decode_pgm(const std::string& bytes) {
  HeaderReader hdr(bytes);
  const std::string magic = hdr.token(true);
  if (magic != "P5") throw FormatError("not a binary PGM (P5) file", 0);
  const long long w = hdr.integer(true, "width");
  const long long h = hdr.integer(true, "height");
  const std::size_t maxval_at = hdr.pos();
  const long long maxval = hdr.integer(true, "maxval");
  if (maxval > 255) {
    throw FormatError("unsupported PGM bit depth (maxval " + std::to_string(maxval) + ")",
                      static_cast<long long>(maxval_at));
  }
  if (maxval < 1) throw FormatError("PGM maxval must be >= 1", static_cast<long long>(maxval_at));
  hdr.single_space();
  const std::size_t n = static_cast<std::size_t>(w) * static_cast<std::size_t>(h);
  if (bytes.size() - hdr.pos() < n) {
    throw FormatError("truncated PGM payload", static_cast<long long>(bytes.size()));
  }
  std::vector<float> samples(n);
  const auto* src = reinterpret_cast<const unsigned char*>(bytes.data() + hdr.pos());
  for (std::size_t i = 0; i < n; ++i) {
    if (src[i] > maxval) {
      throw FormatError("PGM sample exceeds maxval", static_cast<long long>(hdr.pos() + i));
    }
    samples[i] = static_cast<float>(src[i]) / static_cast<float>(maxval);
  }
  return ImageBuffer(static_cast<int>(w), static_cast<int>(h), 1, std::move(samples));
}

std::string encode_pgm(const ImageBuffer& img) {
  if (img.channels() != 1) throw InvalidInput("PGM output requires a single-channel image");
  std::string out = "P5\n" + std::to_string(img.width()) + " " + std::to_string(img.height()) +
                    "\n255\n";
  out.reserve(out.size() + img.samples().size());
  for (float s : img.samples()) out.push_back(static_cast<char>(to_code(s)));
  return out;
}

ImageBuffer read_pgm(const std::filesystem::path& path) { return decode_pgm(read_file(path)); }

void write_pgm(const ImageBuffer& img, const std::filesystem::path& path) {
  write_file(path, encode_pgm(img));
}

ImageBuffer read_png(const std::filesystem::path& path) {
  png_image image;
  std::memset(&image, 0, sizeof image);
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&image, path.string().c_str())) {
    const std::string msg = image.message;
    png_image_free(&image);
    if (!std::filesystem::exists(path)) throw IoError("cannot open " + path.string());
    throw FormatError("PNG: " + msg);
  }
  const png_uint_32 fmt = image.format;
  if ((fmt & PNG_FORMAT_FLAG_LINEAR) != 0) {
    png_image_free(&image);
    throw FormatError("unsupported PNG bit depth (16-bit)");
  }
  if ((fmt & PNG_FORMAT_FLAG_ALPHA) != 0 || (fmt & PNG_FORMAT_FLAG_COLORMAP) != 0) {
    png_image_free(&image);
    throw FormatError("unsupported PNG layout (only 8-bit gray or RGB)");
  }
  const int channels = (fmt & PNG_FORMAT_FLAG_COLOR) != 0 ? 3 : 1;
  image.format = channels == 3 ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  std::vector<unsigned char> buf(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, buf.data(), 0, nullptr)) {
    const std::string msg = image.message;
    png_image_free(&image);
    throw FormatError("PNG: " + msg);
  }
  std::vector<float> samples(buf.size());
  for (std::size_t i = 0; i < buf.size(); ++i) samples[i] = static_cast<float>(buf[i]) / 255.0f;
  return ImageBuffer(static_cast<int>(image.width), static_cast<int>(image.height), channels,
                     std::move(samples));
}

void write_png(const ImageBuffer& img, const std::filesystem::path& path) {
  png_image image;
  std::memset(&image, 0, sizeof image);
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(img.width());
  image.height = static_cast<png_uint_32>(img.height());
  image.format = img.channels() == 3 ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  std::vector<unsigned char> buf(img.samples().size());
  for (std::size_t i = 0; i < buf.size(); ++i) buf[i] = to_code(img.samples()[i]);
  if (!png_image_write_to_file(&image, path.string().c_str(), 0, buf.data(), 0, nullptr)) {
    const std::string msg = image.message;
    png_image_free(&image);
    throw IoError("PNG write failed for " + path.string() + ": " + msg);
  }
}

ImageBuffer read_image(const std::filesystem::path& path) {
  const std::string ext = lower_extension(path);
  if (ext == ".pgm") return read_pgm(path);
  if (ext == ".png") return read_png(path);
  throw InvalidInput("unsupported image extension: " + path.string());
}

void write_image(const ImageBuffer& img, const std::filesystem::path& path) {
  const std::string ext = lower_extension(path);
  if (ext == ".pgm") return write_pgm(img, path);
  if (ext == ".png") return write_png(img, path);
  throw InvalidInput("unsupported image extension: " + path.string());
}

DisparityMap decode_pfm(const std::string& bytes, PfmReadStats* stats) {
  return decode_pfm_map<DisparityMap>(bytes, stats);
}

std::string encode_pfm(const DisparityMap& disp) { return encode_pfm_map(disp); }

DisparityMap read_pfm(const std::filesystem::path& path, PfmReadStats* stats) {
  return decode_pfm(read_file(path), stats);
}

void write_pfm(const DisparityMap& disp, const std::filesystem::path& path) {
  write_file(path, encode_pfm_map(disp));
}

DepthMap read_depth_pfm(const std::filesystem::path& path, PfmReadStats* stats) {
  return decode_pfm_map<DepthMap>(read_file(path), stats);
}

void write_pfm(const DepthMap& depth, const std::filesystem::path& path) {
  write_file(path, encode_pfm_map(depth));
}

std::string encode_ply(const PointCloud& cloud, PlyFormat format) {
  cloud.validate();
  std::string out = "ply\nformat ";
  out += ply_format_name(format);
  out += " 1.0\nelement vertex " + std::to_string(cloud.points.size()) + "\n";
  out += "property float x\nproperty float y\nproperty float z\n";
  if (cloud.colored()) out += "property uchar red\nproperty uchar green\nproperty uchar blue\n";
  out += "end_header\n";
  for (std::size_t i = 0; i < cloud.points.size(); ++i) {
    const auto& p = cloud.points[i];
    const float xyz[3] = {static_cast<float>(p.x), static_cast<float>(p.y),
                          static_cast<float>(p.z)};
    if (format == PlyFormat::ascii) {
      out += format_float9(xyz[0]) + " " + format_float9(xyz[1]) + " " + format_float9(xyz[2]);
      if (cloud.colored()) {
        const auto& c = cloud.colors[i];
        out += " " + std::to_string(to_code(c.r)) + " " + std::to_string(to_code(c.g)) + " " +
               std::to_string(to_code(c.b));
      }
      out += "\n";
    } else {
      for (float v : xyz) append_le(out, v);
      if (cloud.colored()) {
        const auto& c = cloud.colors[i];
        out.push_back(static_cast<char>(to_code(c.r)));
        out.push_back(static_cast<char>(to_code(c.g)));
        out.push_back(static_cast<char>(to_code(c.b)));
      }
    }
  }
  return out;
}

void write_ply(const PointCloud& cloud, const std::filesystem::path& path, PlyFormat format) {
  write_file(path, encode_ply(cloud, format));
}

PointCloud decode_ply(const std::string& bytes) {
  const std::string end_marker = "end_header\n";
  const std::size_t end = bytes.find(end_marker);
  if (bytes.rfind("ply\n", 0) != 0) throw FormatError("not a PLY file", 0);
  if (end == std::string::npos) throw FormatError("PLY header not terminated", 0);
  std::istringstream header(bytes.substr(0, end));
  std::string line;
  std::size_t count = 0;
  bool ascii = false, have_format = false, colored = false;
  while (std::getline(header, line)) {
    std::istringstream ls(line);
    std::string key;
    ls >> key;
    if (key == "format") {
      std::string name;
      ls >> name;
      if (name == "ascii") {
        ascii = true;
      } else if (name != "binary_little_endian") {
        throw FormatError("unsupported PLY format " + name);
      }
      have_format = true;
    } else if (key == "element") {
      std::string name;
      ls >> name >> count;
      if (name != "vertex") throw FormatError("unsupported PLY element " + name);
    } else if (key == "property") {
      std::string type, name;
      ls >> type >> name;
      if (name == "red") colored = true;
    }
  }
  if (!have_format) throw FormatError("PLY header missing format line");
  PointCloud cloud;
  cloud.points.resize(count);
  if (colored) cloud.colors.resize(count);
  const std::size_t body = end + end_marker.size();
  if (ascii) {
    std::istringstream in(bytes.substr(body));
    for (std::size_t i = 0; i < count; ++i) {
      float x, y, z;
      if (!(in >> x >> y >> z)) throw FormatError("truncated PLY vertex list");
      cloud.points[i] = {x, y, z};
      if (colored) {
        int r, g, b;
        if (!(in >> r >> g >> b)) throw FormatError("truncated PLY vertex list");
        cloud.colors[i] = {r / 255.0f, g / 255.0f, b / 255.0f};
      }
    }
  } else {
    const std::size_t stride = 12 + (colored ? 3 : 0);
    if (bytes.size() - body < count * stride) {
      throw FormatError("truncated PLY payload", static_cast<long long>(bytes.size()));
    }
    const char* p = bytes.data() + body;
    for (std::size_t i = 0; i < count; ++i, p += stride) {
      cloud.points[i] = {read_le<float>(p), read_le<float>(p + 4), read_le<float>(p + 8)};
      if (colored) {
        const auto* c = reinterpret_cast<const unsigned char*>(p + 12);
        cloud.colors[i] = {c[0] / 255.0f, c[1] / 255.0f, c[2] / 255.0f};
      }
    }
  }
  return cloud;
}

PointCloud read_ply(const std::filesystem::path& path) { return decode_ply(read_file(path)); }

std::string format_g6(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string encode_csv_report(const BinErrorReport& report) {
  std::string out = kReportCsvHeader;
  out += "\n";
  for (const auto& b : report.bins) {
    out += format_g6(b.bin.z_min) + "," + format_g6(b.bin.z_max) + "," + std::to_string(b.count) +
           "," + format_g6(b.median_abs_err_m) + "," + format_g6(b.rms_err_m) + "\n";
  }
  return out;
}

void write_csv_report(const BinErrorReport& report, const std::filesystem::path& path) {
  write_file(path, encode_csv_report(report));
}

BinErrorReport decode_csv_report(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != kReportCsvHeader) {
    throw FormatError("report CSV: unexpected header", 0);
  }
  BinErrorReport report;
  std::size_t offset = line.size() + 1;
  while (std::getline(in, line)) {
    if (line.empty()) {
      offset += 1;
      continue;
    }
    std::vector<std::string> fields;
    std::stringstream ls(line);
    std::string f;
    while (std::getline(ls, f, ',')) fields.push_back(f);
    if (fields.size() != 5) {
      throw FormatError("report CSV: expected 5 fields", static_cast<long long>(offset));
    }
    BinStats s;
    try {
      s.bin.z_min = std::stod(fields[0]);
      s.bin.z_max = std::stod(fields[1]);
      s.count = static_cast<std::size_t>(std::stoull(fields[2]));
      s.median_abs_err_m = std::stod(fields[3]);
      s.rms_err_m = std::stod(fields[4]);
    } catch (const std::exception&) {
      throw FormatError("report CSV: malformed number", static_cast<long long>(offset));
    }
    report.bins.push_back(s);
    offset += line.size() + 1;
  }
  return report;
}

BinErrorReport read_csv_report(const std::filesystem::path& path) {
  return decode_csv_report(read_file(path));
}

}  // namespace stereobench
