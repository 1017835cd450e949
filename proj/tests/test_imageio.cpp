#include <bit>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <limits>
#include <random>

#include <gtest/gtest.h>

#include "stereobench/error.hpp"
#include "stereobench/imageio.hpp"
#include "support.hpp"

using namespace stereobench;
namespace fs = std::filesystem;

namespace {

fs::path temp_file(const std::string& name) {
  const fs::path dir = fs::path(::testing::TempDir()) / "stereobench_imageio";
  fs::create_directories(dir);
  return dir / name;
}

std::string le_float(float v) {
  std::string s(4, '\0');
  const auto bits = std::bit_cast<std::uint32_t>(v);
  for (int i = 0; i < 4; ++i) s[i] = static_cast<char>((bits >> (8 * i)) & 0xff);
  return s;
}

std::string be_float(float v) {
  std::string s = le_float(v);
  std::swap(s[0], s[3]);
  std::swap(s[1], s[2]);
  return s;
}

DisparityMap random_map(std::mt19937& rng, int w, int h) {
  std::uniform_real_distribution<float> val(1e-3f, 500.0f);
  std::bernoulli_distribution invalid(0.2);
  DisparityMap m(w, h);
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (!invalid(rng)) m.set(i, val(rng));
  }
  return m;
}

}  // namespace

TEST(Pgm, DecodesHandExample) {
  const std::string bytes = std::string("P5\n2 2\n255\n") + '\x00' + '\x80' + '\xff' + '\x40';
  const ImageBuffer img = decode_pgm(bytes);
  ASSERT_EQ(img.width(), 2);
  ASSERT_EQ(img.height(), 2);
  EXPECT_EQ(img.at(0, 0), 0.0f);
  EXPECT_NEAR(img.at(1, 0), 0.50196, 1e-5);
  EXPECT_EQ(img.at(0, 1), 1.0f);
  EXPECT_NEAR(img.at(1, 1), 0.25098, 1e-5);
}

TEST(Pgm, CommentsAndSmallMaxval) {
  const std::string bytes = std::string("P5 # comment\n1 1\n# another\n15\n") + '\x0f';
  EXPECT_EQ(decode_pgm(bytes).at(0, 0), 1.0f);
}

TEST(Pgm, RejectsSixteenBit) {
  const std::string bytes = std::string("P5\n1 1\n65535\n") + '\x00' + '\x00';
  EXPECT_THROW(decode_pgm(bytes), FormatError);
}

TEST(Pgm, ErrorsCarryOffsets) {
  try {
    decode_pgm("P5\n4 4\n255\nab");
    FAIL() << "expected FormatError";
  } catch (const FormatError& e) {
    EXPECT_GE(e.offset(), 0);
  }
  EXPECT_THROW(decode_pgm("P2\n1 1\n255\n0"), FormatError);
  EXPECT_THROW(decode_pgm("P5\nx 1\n255\n0"), FormatError);
}

TEST(Pgm, RandomRoundTripProperty) {
  std::mt19937 rng(1);
  std::uniform_int_distribution<int> dim(1, 40);
  for (int n = 0; n < 1000; ++n) {
    const ImageBuffer img = stereobench::testing::random_image(dim(rng), dim(rng), 1, rng());
    const std::string bytes = encode_pgm(img);
    const ImageBuffer back = decode_pgm(bytes);
    ASSERT_EQ(back, img) << "instance " << n;
    ASSERT_EQ(encode_pgm(back), bytes);
  }
}

TEST(Png, FileRoundTripGrayAndColor) {
  std::mt19937 rng(2);
  for (int n = 0; n < 20; ++n) {
    const int ch = n % 2 ? 3 : 1;
    const ImageBuffer img = stereobench::testing::random_image(13 + n, 7 + n, ch, rng());
    const fs::path p = temp_file("rt" + std::to_string(n) + ".png");
    write_image(img, p);
    EXPECT_EQ(read_image(p), img);
  }
}

TEST(Png, MissingFileIsIoError) {
  EXPECT_THROW(read_png(temp_file("does_not_exist.png")), IoError);
  EXPECT_THROW(read_image(temp_file("x.bmp")), InvalidInput);
}

TEST(Pfm, SinglePixelValues) {
  DisparityMap m = decode_pfm("Pf\n1 1\n-1.0\n" + le_float(8.85f));
  ASSERT_TRUE(m.valid(0, 0));
  EXPECT_EQ(m.at(0, 0), 8.85f);
  m = decode_pfm("Pf\n1 1\n-1.0\n" + le_float(std::numeric_limits<float>::infinity()));
  EXPECT_FALSE(m.valid(0, 0));
}

TEST(Pfm, BigEndianAndRowOrder) {
  // Two rows stored bottom-to-top: the first payload row is the image's last row.
  const std::string bytes = "Pf\n1 2\n1.0\n" + be_float(2.0f) + be_float(3.0f);
  const DisparityMap m = decode_pfm(bytes);
  EXPECT_EQ(m.at(0, 0), 3.0f);
  EXPECT_EQ(m.at(0, 1), 2.0f);
}

TEST(Pfm, NanCountedAsInvalid) {
  PfmReadStats stats;
  const std::string bytes = "Pf\n3 1\n-1.0\n" + le_float(std::nanf("")) + le_float(-2.0f) + le_float(1.0f);
  const DisparityMap m = decode_pfm(bytes, &stats);
  EXPECT_EQ(stats.nan_count, 1u);
  EXPECT_EQ(stats.nonpositive_count, 1u);
  EXPECT_EQ(m.valid_count(), 1u);
}

TEST(Pfm, RejectsColorAndTruncation) {
  EXPECT_THROW(decode_pfm("PF\n1 1\n-1.0\n" + le_float(1) + le_float(1) + le_float(1)), FormatError);
  EXPECT_THROW(decode_pfm("Pf\n2 2\n-1.0\n" + le_float(1)), FormatError);
  EXPECT_THROW(decode_pfm("Pf\n1 1\n0\n" + le_float(1)), FormatError);
}

TEST(Pfm, FileRoundTripIsBitIdentical) {
  std::mt19937 rng(4);
  const DisparityMap m = random_map(rng, 64, 48);
  const fs::path p = temp_file("map.pfm");
  write_pfm(m, p);
  const std::string first = read_file(p);
  const DisparityMap back = read_pfm(p);
  EXPECT_EQ(back, m);
  write_pfm(back, p);
  EXPECT_EQ(read_file(p), first);
}

TEST(Pfm, RandomRoundTripProperty) {
  std::mt19937 rng(5);
  std::uniform_int_distribution<int> dim(0, 30);
  for (int n = 0; n < 1000; ++n) {
    const DisparityMap m = random_map(rng, dim(rng), dim(rng));
    const std::string bytes = encode_pfm(m);
    const DisparityMap back = decode_pfm(bytes);
    ASSERT_EQ(back, m) << "instance " << n;
    ASSERT_EQ(back.valid_count(), m.valid_count());
    ASSERT_EQ(encode_pfm(back), bytes);
  }
}

TEST(Pfm, DepthMapsRoundTrip) {
  DepthMap d(3, 2);
  d.set(0, 0, 1.5f);
  d.set(2, 1, 40.0f);
  const fs::path p = temp_file("depth.pfm");
  write_pfm(d, p);
  EXPECT_EQ(read_depth_pfm(p), d);
}

TEST(Ply, HeaderContract) {
  PointCloud empty;
  const std::string e = encode_ply(empty, PlyFormat::ascii);
  EXPECT_NE(e.find("element vertex 0\n"), std::string::npos);

  PointCloud three;
  three.points = {{0, 0, 1}, {1, 2, 3}, {-1, 0.5, 7}};
  const std::string a = encode_ply(three, PlyFormat::ascii);
  EXPECT_NE(a.find("element vertex 3\n"), std::string::npos);
  const std::string body = a.substr(a.find("end_header\n") + 11);
  EXPECT_EQ(std::count(body.begin(), body.end(), '\n'), 3);

  three.colors = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
  const std::string c = encode_ply(three, PlyFormat::binary_little_endian);
  EXPECT_NE(c.find("property uchar red\nproperty uchar green\nproperty uchar blue\n"),
            std::string::npos);
}

TEST(Ply, AsciiAndBinaryEncodeSameGeometry) {
  std::mt19937 rng(6);
  std::uniform_real_distribution<double> u(-50, 50);
  PointCloud pc;
  for (int i = 0; i < 200; ++i) pc.points.push_back({u(rng), u(rng), std::fabs(u(rng)) + 0.1});
  const PointCloud a = decode_ply(encode_ply(pc, PlyFormat::ascii));
  const PointCloud b = decode_ply(encode_ply(pc, PlyFormat::binary_little_endian));
  ASSERT_EQ(a.points.size(), b.points.size());
  for (std::size_t i = 0; i < a.points.size(); ++i) {
    EXPECT_EQ(a.points[i].x, b.points[i].x);
    EXPECT_EQ(a.points[i].y, b.points[i].y);
    EXPECT_EQ(a.points[i].z, b.points[i].z);
  }
}

TEST(Ply, RandomRoundTripProperty) {
  std::mt19937 rng(7);
  std::uniform_int_distribution<int> count(0, 40);
  std::uniform_real_distribution<double> u(-1e3, 1e3);
  std::uniform_int_distribution<int> code(0, 255);
  for (int n = 0; n < 1000; ++n) {
    PointCloud pc;
    const int k = count(rng);
    const bool colored = n % 2 == 0;
    for (int i = 0; i < k; ++i) {
      // float32-representable coordinates and 8-bit colors are stored exactly.
      pc.points.push_back({static_cast<float>(u(rng)), static_cast<float>(u(rng)),
                           static_cast<float>(u(rng))});
      if (colored) pc.colors.push_back({code(rng) / 255.0f, code(rng) / 255.0f, code(rng) / 255.0f});
    }
    for (PlyFormat f : {PlyFormat::ascii, PlyFormat::binary_little_endian}) {
      const std::string bytes = encode_ply(pc, f);
      const PointCloud back = decode_ply(bytes);
      ASSERT_EQ(back.points.size(), pc.points.size());
      ASSERT_EQ(back.colors.size(), pc.colors.size());
      for (std::size_t i = 0; i < pc.points.size(); ++i) {
        ASSERT_EQ(back.points[i].x, pc.points[i].x);
        ASSERT_EQ(back.points[i].y, pc.points[i].y);
        ASSERT_EQ(back.points[i].z, pc.points[i].z);
        if (colored) {
          ASSERT_EQ(back.colors[i].r, pc.colors[i].r);
          ASSERT_EQ(back.colors[i].g, pc.colors[i].g);
          ASSERT_EQ(back.colors[i].b, pc.colors[i].b);
        }
      }
      ASSERT_EQ(encode_ply(back, f), bytes) << "instance " << n;
    }
  }
}

TEST(Ply, RejectsMalformed) {
  EXPECT_THROW(decode_ply("nope"), FormatError);
  EXPECT_THROW(decode_ply("ply\nformat binary_big_endian 1.0\nend_header\n"), FormatError);
  EXPECT_THROW(decode_ply("ply\nformat ascii 1.0\nelement vertex 2\nend_header\n1 2 3\n"), FormatError);
}

TEST(CsvReport, HeaderAndLineCounts) {
  BinErrorReport empty;
  EXPECT_EQ(encode_csv_report(empty), std::string(kReportCsvHeader) + "\n");

  BinErrorReport r;
  for (int i = 0; i < 10; ++i) {
    BinStats s;
    s.bin = {2.0 * i, 2.0 * i + 2};
    s.count = 100 + i;
    s.median_abs_err_m = 0.001 * i * i;
    s.rms_err_m = 0.0123456789 * i;
    r.bins.push_back(s);
  }
  const std::string text = encode_csv_report(r);
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 11);
  EXPECT_NE(text.find("18,20,109,0.081,0.111111\n"), std::string::npos);
}

TEST(CsvReport, RandomReserializationProperty) {
  std::mt19937 rng(8);
  std::uniform_int_distribution<int> nb(0, 12);
  std::uniform_real_distribution<double> u(0, 50);
  std::uniform_int_distribution<std::size_t> cnt(0, 5000000);
  for (int n = 0; n < 1000; ++n) {
    BinErrorReport r;
    const int k = nb(rng);
    for (int i = 0; i < k; ++i) {
      BinStats s;
      s.bin = {u(rng), u(rng) + 50};
      s.count = cnt(rng);
      s.median_abs_err_m = u(rng) * 1e-3;
      s.rms_err_m = u(rng);
      r.bins.push_back(s);
    }
    const std::string text = encode_csv_report(r);
    const BinErrorReport back = decode_csv_report(text);
    ASSERT_EQ(back.bins.size(), r.bins.size());
    for (std::size_t i = 0; i < r.bins.size(); ++i) {
      ASSERT_EQ(back.bins[i].count, r.bins[i].count);
      ASSERT_NEAR(back.bins[i].rms_err_m, r.bins[i].rms_err_m, 1e-5 * r.bins[i].rms_err_m + 1e-12);
    }
    ASSERT_EQ(encode_csv_report(back), text) << "instance " << n;
  }
}

TEST(CsvReport, FileRoundTripAndErrors) {
  BinErrorReport r;
  r.bins.push_back({{0, 2}, 5, 0.25, 0.5, 0.0, 0});
  const fs::path p = temp_file("report.csv");
  write_csv_report(r, p);
  const BinErrorReport back = read_csv_report(p);
  ASSERT_EQ(back.bins.size(), 1u);
  EXPECT_EQ(back.bins[0].median_abs_err_m, 0.25);
  EXPECT_THROW(decode_csv_report("a,b\n"), FormatError);
  EXPECT_THROW(decode_csv_report(std::string(kReportCsvHeader) + "\n1,2,3\n"), FormatError);
  EXPECT_THROW(decode_csv_report(std::string(kReportCsvHeader) + "\n1,2,x,4,5\n"), FormatError);
}

TEST(Files, WriteToMissingDirectoryIsIoError) {
  EXPECT_THROW(write_file("/nonexistent_dir_for_tests/x.bin", "abc"), IoError);
  EXPECT_THROW(read_file("/nonexistent_dir_for_tests/x.bin"), IoError);
}
