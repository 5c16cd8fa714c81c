#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "pgvo/depth.hpp"
#include "pgvo/depth_io.hpp"

using namespace pgvo;

namespace {

constexpr double kPi = std::numbers::pi;

DepthImage constant_depth(const CameraIntrinsics& cam, double zmin, double zmax, double d) {
  return DepthImage(cam.width, cam.height, zmin, zmax, static_cast<float>(d));
}

}  // namespace

TEST(Intrinsics, FromFov) {
  const auto a = intrinsics_from_fov(90, 2, 2);
  EXPECT_NEAR(a.fx(), 1.0, 1e-15);
  EXPECT_NEAR(a.fy(), 1.0, 1e-15);
  EXPECT_EQ(a.cx(), 1.0);
  EXPECT_EQ(a.cy(), 1.0);

  const auto b = intrinsics_from_fov(70, 341, 192);
  EXPECT_NEAR(b.fx(), 170.5 / std::tan(35.0 * kPi / 180.0), 1e-12);
  EXPECT_NEAR(b.fx(), 243.4992, 1e-3);
  EXPECT_EQ(b.cx(), 170.5);
  EXPECT_EQ(b.cy(), 96.0);
  // the image edge ray sits at half the field of view
  const Vec3 r = b.ray(0.0, b.cy());
  EXPECT_NEAR(std::atan2(std::abs(r.x()), r.z()), 35.0 * kPi / 180.0, 1e-12);
}

TEST(Intrinsics, FovOutOfRange) {
  EXPECT_THROW(intrinsics_from_fov(0, 4, 4), UsageError);
  EXPECT_THROW(intrinsics_from_fov(180, 4, 4), UsageError);
  EXPECT_THROW(intrinsics_from_fov(-5, 4, 4), UsageError);
}

TEST(DepthImage, ValidatesRange) {
  EXPECT_THROW(DepthImage(2, 2, 1.0, 1.0), UsageError);
  EXPECT_THROW(DepthImage(2, 2, 0.0, 5.0, std::vector<float>{1, 2, 3}), UsageError);
  EXPECT_THROW(DepthImage(2, 2, 0.0, 5.0, std::vector<float>{1, 2, 3, 6}), UsageError);
  EXPECT_NO_THROW(DepthImage(2, 2, 0.0, 5.0, std::vector<float>{0, 2, 3, 5}));
}

TEST(Unproject, CenterPixelOnAxis) {
  const auto cam = intrinsics_from_fov(70, 5, 5);  // odd size: pixel (2,2) center is the principal point
  auto img = constant_depth(cam, 0.0, 10.0, 1.0);
  img.set(2, 2, 3.5);
  const auto pts = unproject(img, cam);
  const Vec3& p = pts[2 * 5 + 2];
  EXPECT_NEAR(p.x(), 0.0, 1e-12);
  EXPECT_NEAR(p.y(), 0.0, 1e-12);
  EXPECT_NEAR(p.z(), 3.5, 1e-12);
}

TEST(Unproject, ZeroDepthCollapsesToOrigin) {
  const auto cam = intrinsics_from_fov(90, 4, 3);
  const auto pts = unproject(constant_depth(cam, 0.0, 10.0, 0.0), cam);
  ASSERT_EQ(pts.size(), 12u);
  for (const auto& p : pts) EXPECT_EQ(p.norm(), 0.0);
  EXPECT_TRUE(unproject_valid(constant_depth(cam, 0.0, 10.0, 0.0), cam).empty());
}

TEST(Unproject, TwoByTwoHandOracle) {
  // fx = fy = 1, c = (1, 1): pixel centers sit at +-0.5 from the principal point
  const auto cam = intrinsics_from_fov(90, 2, 2);
  const auto pts = unproject(constant_depth(cam, 0.0, 10.0, 1.0), cam);
  ASSERT_EQ(pts.size(), 4u);
  const double expect[4][2] = {{-0.5, -0.5}, {0.5, -0.5}, {-0.5, 0.5}, {0.5, 0.5}};
  for (int i = 0; i < 4; ++i) {
    EXPECT_NEAR(pts[i].x(), expect[i][0], 1e-15);
    EXPECT_NEAR(pts[i].y(), expect[i][1], 1e-15);
    EXPECT_EQ(pts[i].z(), 1.0);
  }
}

TEST(Unproject, DimensionMismatch) {
  const auto cam = intrinsics_from_fov(90, 4, 4);
  EXPECT_THROW(unproject(DepthImage(3, 4, 0.0, 1.0), cam), UsageError);
}

TEST(Unproject, ReprojectsToPixelCenters) {
  const auto cam = intrinsics_from_fov(70, 17, 11);
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<float> d(0.2f, 9.5f);
  std::vector<float> vals(17 * 11);
  for (auto& v : vals) v = d(rng);
  const DepthImage img(17, 11, 0.1, 10.0, vals);
  const auto pts = unproject(img, cam);
  for (int v = 0; v < 11; ++v)
    for (int u = 0; u < 17; ++u) {
      const auto uv = cam.project(pts[static_cast<std::size_t>(v * 17 + u)]);
      EXPECT_NEAR(uv.x(), u + 0.5, 1e-9);
      EXPECT_NEAR(uv.y(), v + 0.5, 1e-9);
    }
}

TEST(Discretize, Examples) {
  EXPECT_EQ(depth_channel(2.5, 10, 0.0, 10.0), 2);  // third interval [2, 3)
  EXPECT_EQ(depth_channel(0.0, 10, 0.0, 10.0), 0);
  EXPECT_EQ(depth_channel(10.0, 10, 0.0, 10.0), 9);
  EXPECT_EQ(depth_channel(3.0, 10, 0.0, 10.0), 3);  // left edge belongs to the interval
  EXPECT_EQ(depth_channel(2.9999999999, 10, 0.0, 10.0), 2);
  EXPECT_THROW(depth_channel(1.0, 0, 0.0, 10.0), UsageError);

  const auto cam = intrinsics_from_fov(90, 3, 2);
  auto img = constant_depth(cam, 0.0, 10.0, 7.2);
  img.set(1, 1, 2.5);
  const auto dd = discretize_depth(img, 10);
  for (int c = 0; c < 10; ++c) EXPECT_EQ(dd.at(c, 1, 1), c == 2 ? 1 : 0);
  EXPECT_EQ(dd.hot_channel(0, 0), 7);
  EXPECT_THROW(discretize_depth(img, 0), UsageError);
}

TEST(Discretize, MatchesIntervalMembership) {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> d(0.0, 10.0);
  for (int n : {1, 3, 7, 10, 64}) {
    for (int k = 0; k < 2000; ++k) {
      const double z = d(rng);
      const int c = depth_channel(z, n, 0.0, 10.0);
      // membership oracle: z in [i * 10 / n, (i + 1) * 10 / n)
      EXPECT_GE(z, c * 10.0 / n);
      if (c < n - 1) {
        EXPECT_LT(z, (c + 1) * 10.0 / n);
      }
    }
  }
}

TEST(Discretize, OneHotEverywhere) {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<float> d(0.0f, 10.0f);
  std::vector<float> vals(13 * 7);
  for (auto& v : vals) v = d(rng);
  vals[0] = 0.0f;
  vals[1] = 10.0f;
  const auto dd = discretize_depth(DepthImage(13, 7, 0.0, 10.0, vals), 10);
  for (int v = 0; v < 7; ++v)
    for (int u = 0; u < 13; ++u) {
      int sum = 0;
      for (int c = 0; c < 10; ++c) sum += dd.at(c, u, v);
      EXPECT_EQ(sum, 1);
    }
}

TEST(Discretize, ToleranceWithinInterval) {
  std::mt19937_64 rng(14);
  std::uniform_real_distribution<double> d(0.0, 10.0), e(-0.5, 0.5);
  const int n = 10;
  int same = 0, crossed = 0;
  for (int k = 0; k < 20000; ++k) {
    const double z = d(rng), z2 = std::clamp(z + e(rng), 0.0, 10.0);
    const int oracle_a = std::min(static_cast<int>(std::floor(z)), n - 1);
    const int oracle_b = std::min(static_cast<int>(std::floor(z2)), n - 1);
    if (oracle_a == oracle_b) {
      EXPECT_EQ(depth_channel(z, n, 0.0, 10.0), depth_channel(z2, n, 0.0, 10.0));
      ++same;
    } else {
      EXPECT_NE(depth_channel(z, n, 0.0, 10.0), depth_channel(z2, n, 0.0, 10.0));
      ++crossed;
    }
  }
  EXPECT_GT(same, 1000);
  EXPECT_GT(crossed, 1000);
}

TEST(SoftProjection, WallFillsOneRow) {
  const auto cam = intrinsics_from_fov(90, 32, 24);
  const double d = 4.3;
  const auto sp = soft_projection(constant_depth(cam, 0.0, 10.0, d), cam, 20, 16);
  const int row = static_cast<int>(std::floor(20 * d / 10.0));
  EXPECT_EQ(sp.max(), 1.0);
  for (int r = 0; r < 20; ++r)
    for (int c = 0; c < 16; ++c) {
      if (r != row) {
        EXPECT_EQ(sp.at(r, c), 0.0);
      }
      EXPECT_GE(sp.at(r, c), 0.0);
      EXPECT_LE(sp.at(r, c), 1.0);
    }
  // x spans d/z_max of the frustum width, centered: the middle cells of the row are occupied
  EXPECT_GT(sp.at(row, 8), 0.0);
  EXPECT_GT(sp.at(row, 7), 0.0);
  EXPECT_EQ(sp.at(row, 0), 0.0);
}

TEST(SoftProjection, CountsMatchBinningOracle) {
  const auto cam = intrinsics_from_fov(70, 21, 9);
  std::mt19937_64 rng(15);
  std::uniform_real_distribution<float> d(0.0f, 6.0f);
  std::vector<float> vals(21 * 9);
  for (auto& v : vals) v = d(rng);
  const DepthImage img(21, 9, 0.0, 6.0, vals);
  const int oh = 12, ow = 10;
  const auto counts = projection_counts(img, cam, oh, ow);
  // independent binning: frustum half-width at z_max from the outermost pixel centers
  const double half = (10.5 - 0.5) / cam.fx() * 6.0;
  std::vector<std::uint32_t> expect(static_cast<std::size_t>(oh * ow), 0);
  for (int v = 0; v < 9; ++v)
    for (int u = 0; u < 21; ++u) {
      const double z = img.at(u, v);
      if (!(z > 0.0)) continue;
      const double x = (u + 0.5 - 10.5) / cam.fx() * z;
      const int r = std::clamp(static_cast<int>(std::floor(oh * z / 6.0)), 0, oh - 1);
      const int c = std::clamp(static_cast<int>(std::floor(ow * (x + half) / (2 * half))), 0, ow - 1);
      ++expect[static_cast<std::size_t>(r * ow + c)];
    }
  EXPECT_EQ(counts, expect);
}

TEST(SoftProjection, EmptyCloudIsBlack) {
  const auto cam = intrinsics_from_fov(90, 8, 6);
  const auto sp = soft_projection(constant_depth(cam, 0.0, 10.0, 0.0), cam);
  EXPECT_EQ(sp.rows, kDefaultProjectionSize);
  EXPECT_EQ(sp.cols, kDefaultProjectionSize);
  EXPECT_EQ(sp.max(), 0.0);
}

TEST(SoftProjection, TwoWallsEqualRows) {
  const auto cam = intrinsics_from_fov(90, 16, 8);
  auto img = constant_depth(cam, 0.0, 10.0, 2.0);
  for (int v = 4; v < 8; ++v)
    for (int u = 0; u < 16; ++u) img.set(u, v, 4.0);
  // one column: each row holds one wall's pixel count
  const auto sp = soft_projection(img, cam, 10, 1);
  EXPECT_EQ(sp.at(2, 0), 1.0);
  EXPECT_EQ(sp.at(4, 0), 1.0);
  double total = 0;
  for (double v : sp.cells) total += v;
  EXPECT_EQ(total, 2.0);
}

TEST(SoftProjection, DegenerateBoxAndBadSize) {
  const auto cam = intrinsics_from_fov(90, 8, 6);
  EXPECT_THROW(soft_projection(constant_depth(cam, 0.0, 10.0, 1.0), cam, 0, 4), UsageError);
  auto flat = make_intrinsics(10, 10, 0.5, 0.5, 1, 1);  // single column: x_min == x_max
  EXPECT_THROW(soft_projection(DepthImage(1, 1, 0.0, 10.0, 1.0f), flat, 4, 4), UsageError);
}

TEST(SoftProjection, RangeProperty) {
  const auto cam = intrinsics_from_fov(80, 24, 16);
  std::mt19937_64 rng(16);
  std::uniform_real_distribution<float> d(0.0f, 10.0f);
  for (int k = 0; k < 50; ++k) {
    std::vector<float> vals(24 * 16);
    for (auto& v : vals) v = d(rng);
    const auto sp = soft_projection(DepthImage(24, 16, 0.0, 10.0, vals), cam, 32, 32);
    EXPECT_EQ(sp.max(), 1.0);
    for (double v : sp.cells) {
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, 1.0);
    }
  }
}

TEST(DepthFile, RoundTripAndMagic) {
  std::vector<float> vals{0.1f, 2.5f, 9.75f, 10.0f, 3.0f, 0.1f};
  const DepthImage img(3, 2, 0.1, 10.0, vals);
  const std::string bytes = encode_depth(img);
  EXPECT_EQ(bytes.rfind("DPTH1 3 2 ", 0), 0u);
  EXPECT_EQ(decode_depth(bytes), img);
  std::string bad = bytes;
  bad[0] = 'X';
  EXPECT_THROW(decode_depth(bad), UsageError);
  EXPECT_THROW(decode_depth(bytes.substr(0, bytes.size() - 1)), UsageError);
}

TEST(DepthFile, ValidFlagUsesStoredPrecision) {
  // 0.1 is not representable in float; a pixel clamped to z_min is still invalid
  DepthImage img(1, 1, 0.1, 3.3, 1.0f);
  img.set(0, 0, 0.0);
  EXPECT_FALSE(img.valid(0, 0));
  img.set(0, 0, 99.0);
  EXPECT_NO_THROW(decode_depth(encode_depth(img)));
}

TEST(Pgm, ScalesTo255) {
  SoftProjection sp{1, 3, {0.0, 0.5, 1.0}};
  const std::string pgm = encode_pgm(sp);
  const std::string header = "P5\n3 1\n255\n";
  ASSERT_EQ(pgm.size(), header.size() + 3);
  EXPECT_EQ(pgm.substr(0, header.size()), header);
  EXPECT_EQ(static_cast<unsigned char>(pgm[header.size()]), 0);
  EXPECT_EQ(static_cast<unsigned char>(pgm[header.size() + 1]), 128);
  EXPECT_EQ(static_cast<unsigned char>(pgm[header.size() + 2]), 255);
}
