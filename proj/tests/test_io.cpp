#include <gtest/gtest.h>

#include <bit>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "stride/evalkit.hpp"
#include "stride/io.hpp"
#include "test_support.hpp"

using namespace stride;
namespace fs = std::filesystem;

namespace {

class IoTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("stride_io_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  static std::string bytes(const std::string& p) {
    std::ifstream is(p, std::ios::binary);
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
  }
  static void put(const std::string& p, const std::string& b) {
    std::ofstream os(p, std::ios::binary);
    os << b;
  }

  fs::path dir_;
};

// Values already representable as float32 survive the round trip exactly.
Array2D float_exact(std::size_t r, std::size_t c, std::uint64_t seed) {
  Array2D a = testkit::random_array(r, c, seed);
  for (double& v : a.flat()) v = static_cast<double>(static_cast<float>(v));
  return a;
}

}  // namespace

TEST_F(IoTest, ImgfHeaderAndLayout) {
  Array2D a(2, 3);
  for (std::size_t i = 0; i < 6; ++i) a.data()[i] = static_cast<double>(i) + 0.5;
  io::write_imgf(path("a.imgf"), a);
  const std::string b = bytes(path("a.imgf"));
  const std::string head = "IMGF 3 2\n";
  ASSERT_EQ(b.size(), head.size() + 24);
  EXPECT_EQ(b.substr(0, head.size()), head);
  // third value (row 0, col 2) is 2.5f = 0x40200000, little-endian
  const std::string third = b.substr(head.size() + 8, 4);
  EXPECT_EQ(third, std::string("\x00\x00\x20\x40", 4));
}

TEST_F(IoTest, SgramHeaderPutsViewsFirst) {
  io::write_sgram(path("s.sgram"), Array2D(5, 7));
  const std::string b = bytes(path("s.sgram"));
  EXPECT_EQ(b.substr(0, 10), "SGRAM 5 7\n");
  EXPECT_EQ(b.size(), 10u + 5 * 7 * 4);
}

TEST_F(IoTest, RoundTripsAreExactForFloatValues) {
  const Array2D a = float_exact(9, 13, 1);
  io::write_imgf(path("a.imgf"), a);
  EXPECT_EQ(io::read_imgf(path("a.imgf")), a);
  io::write_sgram(path("a.sgram"), a);
  EXPECT_EQ(io::read_sgram(path("a.sgram")), a);
}

TEST_F(IoTest, WriteReadWriteIsByteIdentical) {
  const Array2D a = testkit::random_array(11, 6, 2);
  io::write_imgf(path("1.imgf"), a);
  io::write_imgf(path("2.imgf"), io::read_imgf(path("1.imgf")));
  EXPECT_EQ(bytes(path("1.imgf")), bytes(path("2.imgf")));
  io::write_sgram(path("1.sgram"), a);
  io::write_sgram(path("2.sgram"), io::read_sgram(path("1.sgram")));
  EXPECT_EQ(bytes(path("1.sgram")), bytes(path("2.sgram")));
}

TEST_F(IoTest, DoublesAreRoundedToFloat) {
  const Array2D a = testkit::random_array(4, 4, 3);
  io::write_imgf(path("a.imgf"), a);
  const Array2D b = io::read_imgf(path("a.imgf"));
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(b.data()[i], static_cast<double>(static_cast<float>(a.data()[i])));
  }
}

TEST_F(IoTest, PhantomRoundTripIsBitwise) {
  const Array2D p = shepp_logan(64, 64).values;
  io::write_imgf(path("p.imgf"), p);
  const Array2D q = io::read_imgf(path("p.imgf"));
  for (std::size_t i = 0; i < p.size(); ++i) {
    EXPECT_EQ(q.data()[i], static_cast<double>(static_cast<float>(p.data()[i])));
  }
}

TEST_F(IoTest, RejectsMalformedFiles) {
  const std::string payload(2 * 3 * 4, '\0');
  put(path("tag"), "IMGX 3 2\n" + payload);
  EXPECT_THROW(io::read_imgf(path("tag")), io::FormatError);
  put(path("wrongkind"), "SGRAM 2 3\n" + payload);
  EXPECT_THROW(io::read_imgf(path("wrongkind")), io::FormatError);
  put(path("dims"), "IMGF 0 2\n");
  EXPECT_THROW(io::read_imgf(path("dims")), io::FormatError);
  put(path("neg"), "IMGF -3 2\n" + payload);
  EXPECT_THROW(io::read_imgf(path("neg")), io::FormatError);
  put(path("extra"), "IMGF 3 2 1\n" + payload);
  EXPECT_THROW(io::read_imgf(path("extra")), io::FormatError);
  put(path("short"), "IMGF 3 2\n" + payload.substr(0, 23));
  EXPECT_THROW(io::read_imgf(path("short")), io::FormatError);
  put(path("long"), "IMGF 3 2\n" + payload + "x");
  EXPECT_THROW(io::read_imgf(path("long")), io::FormatError);
  put(path("empty"), "");
  EXPECT_THROW(io::read_sgram(path("empty")), io::FormatError);
  EXPECT_THROW(io::read_imgf(path("missing")), io::FormatError);
  put(path("ok"), "IMGF 3 2\n" + payload);
  EXPECT_EQ(io::read_imgf(path("ok")), Array2D(2, 3));
}

TEST_F(IoTest, GeometryPathReplacesExtension) {
  EXPECT_EQ(io::geometry_path("/a/b/s.sgram"), "/a/b/s.geom");
  EXPECT_EQ(io::geometry_path("s"), "s.geom");
}

TEST_F(IoTest, SinogramCarriesItsGeometry) {
  FanBeamGeometry g = desk_geometry(12, 10);
  g.angle_start = 0.1;
  g.detector_width = 17.0 / 3.0;
  const Sinogram s(g, float_exact(12, 10, 4));
  io::write_sinogram(path("s.sgram"), s);
  EXPECT_TRUE(fs::exists(path("s.geom")));
  const Sinogram t = io::read_sinogram(path("s.sgram"));
  EXPECT_EQ(t.geometry, g);
  EXPECT_EQ(t.values, s.values);

  FanBeamGeometry p = g;
  p.beam = BeamKind::parallel;
  io::write_geometry(path("p.geom"), p);
  EXPECT_EQ(io::read_geometry(path("p.geom")), p);
}

TEST_F(IoTest, SinogramShapeMismatchIsShapeError) {
  io::write_sgram(path("s.sgram"), Array2D(12, 10));
  io::write_geometry(path("s.geom"), desk_geometry(12, 11));
  EXPECT_THROW(io::read_sinogram(path("s.sgram")), ShapeError);
}

TEST_F(IoTest, BadGeometryIsFormatError) {
  io::write_sgram(path("s.sgram"), Array2D(12, 10));
  put(path("s.geom"), "n_views=12\nn_detectors=ten\n");
  EXPECT_THROW(io::read_sinogram(path("s.sgram")), io::FormatError);
  put(path("s.geom"), "n_views=12\nwobble=3\n");
  EXPECT_THROW(io::read_sinogram(path("s.sgram")), io::FormatError);
  fs::remove(path("s.geom"));
  EXPECT_THROW(io::read_sinogram(path("s.sgram")), io::FormatError);
}

TEST_F(IoTest, PgmScalesToPeak) {
  Array2D a(2, 3);
  a(0, 0) = -1.0, a(0, 1) = 0.0, a(0, 2) = 0.5;
  a(1, 0) = 1.0, a(1, 1) = 2.0, a(1, 2) = 0.25;
  io::write_pgm(path("a.pgm"), a);
  const std::string b = bytes(path("a.pgm"));
  const std::string head = "P5\n3 2\n255\n";
  ASSERT_EQ(b.size(), head.size() + 6);
  EXPECT_EQ(b.substr(0, head.size()), head);
  const std::string px = b.substr(head.size());
  const int want[6] = {0, 0, 64, 128, 255, 32};
  for (int i = 0; i < 6; ++i) EXPECT_EQ(static_cast<unsigned char>(px[static_cast<std::size_t>(i)]), want[i]) << i;
}

TEST_F(IoTest, PgmOfZeroImageIsBlack) {
  io::write_pgm(path("z.pgm"), Array2D(2, 2));
  const std::string b = bytes(path("z.pgm"));
  EXPECT_EQ(b.substr(b.size() - 4), std::string(4, '\0'));
}

TEST_F(IoTest, TextRoundTrip) {
  io::write_text(path("t.txt"), "a=1\nb=2\n");
  EXPECT_EQ(io::read_text(path("t.txt")), "a=1\nb=2\n");
  EXPECT_THROW(io::read_text(path("nope")), io::FormatError);
  EXPECT_THROW(io::write_text(path("no/such/dir/t.txt"), "x"), io::FormatError);
}
