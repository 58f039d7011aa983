#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "stride/evalkit.hpp"
#include "test_support.hpp"

using namespace stride;

namespace {

Array2D mirror_lr(const Array2D& a) {
  Array2D out(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < a.cols(); ++j) out(i, a.cols() - 1 - j) = a(i, j);
  }
  return out;
}

// SSIM of one window, straight from the definition.
double window_ssim(const Array2D& a, const Array2D& b, std::size_t i0, std::size_t j0, double range) {
  const double n = 49.0;
  double ma = 0.0, mb = 0.0;
  for (std::size_t i = i0; i < i0 + 7; ++i) {
    for (std::size_t j = j0; j < j0 + 7; ++j) {
      ma += a(i, j) / n;
      mb += b(i, j) / n;
    }
  }
  double va = 0.0, vb = 0.0, cab = 0.0;
  for (std::size_t i = i0; i < i0 + 7; ++i) {
    for (std::size_t j = j0; j < j0 + 7; ++j) {
      va += (a(i, j) - ma) * (a(i, j) - ma) / (n - 1.0);
      vb += (b(i, j) - mb) * (b(i, j) - mb) / (n - 1.0);
      cab += (a(i, j) - ma) * (b(i, j) - mb) / (n - 1.0);
    }
  }
  const double c1 = std::pow(0.01 * range, 2), c2 = std::pow(0.03 * range, 2);
  return (2 * ma * mb + c1) * (2 * cab + c2) / ((ma * ma + mb * mb + c1) * (va + vb + c2));
}

}  // namespace

TEST(SheppLogan, CentreIsSoftTissue) {
  const auto img = shepp_logan(64, 64);
  const double v = img.values(32, 32);
  EXPECT_GT(v, 0.0);
  EXPECT_LT(v, 1.0);
  // inside the skull (1.0) and the brain (-0.8) only
  EXPECT_NEAR(v, 0.2, 1e-12);
}

TEST(SheppLogan, CornersAreEmpty) {
  const auto img = shepp_logan(64, 48);
  EXPECT_EQ(img.values(0, 0), 0.0);
  EXPECT_EQ(img.values(0, 63), 0.0);
  EXPECT_EQ(img.values(47, 0), 0.0);
  EXPECT_EQ(img.values(47, 63), 0.0);
  for (double v : img.values.flat()) {
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 1.0);
  }
}

TEST(SheppLogan, MirroredTableGivesMirroredImage) {
  auto table = shepp_logan_table();
  for (auto& e : table) {
    e.x0 = -e.x0;
    e.theta = -e.theta;
  }
  const ImageShape shape{64, 64, 1.0};
  const auto a = rasterize_ellipses(shepp_logan_table(), shape);
  const auto b = rasterize_ellipses(table, shape);
  EXPECT_EQ(mirror_lr(a.values), b.values);
}

TEST(SheppLogan, Validation) {
  EXPECT_THROW(shepp_logan(8, 64), std::invalid_argument);
  auto table = shepp_logan_table();
  table[3].a = 0.0;
  EXPECT_THROW(rasterize_ellipses(table, ImageShape{16, 16, 1.0}), std::invalid_argument);
}

TEST(RandomSheppLogan, StaysNearTheStandardTable) {
  Rng rng(3);
  const auto base = shepp_logan_table();
  for (int k = 0; k < 20; ++k) {
    const auto t = random_shepp_logan_table(rng);
    ASSERT_EQ(t.size(), base.size());
    EXPECT_EQ(t[0].density, base[0].density);
    EXPECT_EQ(t[1].a, base[1].a);
    for (std::size_t i = 2; i < t.size(); ++i) {
      EXPECT_LE(std::abs(t[i].density / base[i].density - 1.0), 0.3 + 1e-12);
      EXPECT_LE(std::abs(t[i].x0 - base[i].x0), 0.03 + 1e-12);
      EXPECT_LE(std::abs(t[i].a / base[i].a - 1.0), 0.15 + 1e-12);
    }
  }
}

TEST(Psnr, Examples) {
  const Array2D a = testkit::random_array(10, 10, 1);
  EXPECT_EQ(psnr(a, a, 1.0), std::numeric_limits<double>::infinity());
  Array2D u(10, 10, 0.5), v(10, 10, 0.6);
  EXPECT_NEAR(mse(u, v), 0.01, 1e-15);
  EXPECT_NEAR(psnr(u, v, 1.0), 20.0, 1e-10);
  EXPECT_NEAR(psnr(u, v, 2.0) - psnr(u, v, 1.0), 20.0 * std::log10(2.0), 1e-10);
  EXPECT_NEAR(20.0 * std::log10(2.0), 6.0206, 1e-4);
  EXPECT_THROW(psnr(u, Array2D(10, 9), 1.0), ShapeError);
  EXPECT_THROW(psnr(u, v, 0.0), std::invalid_argument);
}

TEST(Psnr, DecreasesWithNoise) {
  const Array2D x = shepp_logan(32, 32).values;
  const Array2D z = testkit::random_array(32, 32, 5);
  double prev = std::numeric_limits<double>::infinity();
  for (double sigma : {0.001, 0.01, 0.05, 0.1, 0.3}) {
    Array2D y = x;
    axpy(sigma, z, y);
    const double p = psnr(y, x, 1.0);
    EXPECT_LT(p, prev);
    EXPECT_NEAR(p, 10.0 * std::log10(1.0 / mse(y, x)), 1e-10);
    prev = p;
  }
}

TEST(Mse, MeanOfSquaredDifferences) {
  const Array2D a = testkit::random_array(7, 9, 1), b = testkit::random_array(7, 9, 2);
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::pow(a.data()[i] - b.data()[i], 2);
  EXPECT_EQ(mse(a, b), s / 63.0);
}

TEST(Ssim, IdenticalIsOne) {
  const Array2D a = testkit::random_array(16, 20, 1);
  EXPECT_NEAR(ssim(a, a, 1.0), 1.0, 1e-12);
}

TEST(Ssim, NegatedZeroMeanPatchMatchesDirectFormula) {
  // u and v sum to zero over both 7-long runs, so every 7x7 window of u v' + v u' has zero mean
  const double u[8] = {1, -1, 0, 0, 0, 0, 0, 1};
  const double v[8] = {2, 1, -3, 0, 0, 1, -1, 2};
  Array2D a(8, 8);
  for (std::size_t i = 0; i < 8; ++i) {
    for (std::size_t j = 0; j < 8; ++j) a(i, j) = 0.1 * (u[i] * v[j] + v[i] * u[j]);
  }
  const Array2D b = -1.0 * a;
  double want = 0.0;
  for (std::size_t i = 0; i < 2; ++i) {
    for (std::size_t j = 0; j < 2; ++j) want += window_ssim(a, b, i, j, 2.0) / 4.0;
  }
  const double got = ssim(a, b, 2.0);
  EXPECT_LT(got, 0.0);
  EXPECT_NEAR(got, want, 1e-12);
}

TEST(Ssim, Symmetric) {
  const Array2D a = testkit::random_array(12, 15, 3), b = testkit::random_array(12, 15, 4);
  EXPECT_NEAR(ssim(a, b, 3.0), ssim(b, a, 3.0), 1e-12);
}

TEST(Ssim, ConstantShiftLeavesOnlyLuminance) {
  const Array2D a = shepp_logan(20, 20).values;
  const double c = 0.15;
  Array2D b = a;
  for (double& v : b.flat()) v += c;
  const double c1 = 1e-4;
  double want = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i + 7 <= 20; ++i) {
    for (std::size_t j = 0; j + 7 <= 20; ++j) {
      double m = 0.0;
      for (std::size_t di = 0; di < 7; ++di) {
        for (std::size_t dj = 0; dj < 7; ++dj) m += a(i + di, j + dj) / 49.0;
      }
      want += (2.0 * m * (m + c) + c1) / (m * m + (m + c) * (m + c) + c1);
      ++n;
    }
  }
  EXPECT_NEAR(ssim(a, b, 1.0), want / static_cast<double>(n), 1e-6);
}

TEST(Ssim, Validation) {
  EXPECT_THROW(ssim(Array2D(6, 10), Array2D(6, 10), 1.0), std::invalid_argument);
  EXPECT_THROW(ssim(Array2D(8, 8), Array2D(8, 9), 1.0), ShapeError);
}

TEST(KlDivergence, IdenticalIsZero) {
  const Array2D a = testkit::random_array(20, 20, 1);
  EXPECT_LE(kl_divergence(a, a), 1e-9);
}

TEST(KlDivergence, DisjointSupportsAreFarApart) {
  const Array2D a(10, 10, 0.0), b(10, 10, 1.0);
  EXPECT_GT(kl_divergence(a, b), 5.0);
}

TEST(KlDivergence, MatchesHistogramOracle) {
  // a fills bins 0 and 7 equally, b puts 3/4 in bin 0 and 1/4 in bin 7 (8 bins over [0, 1])
  Array2D a(1, 4), b(1, 4);
  a.data()[0] = 0.0, a.data()[1] = 0.0, a.data()[2] = 1.0, a.data()[3] = 1.0;
  b.data()[0] = 0.0, b.data()[1] = 0.0, b.data()[2] = 0.0, b.data()[3] = 1.0;
  const double want = 0.5 * std::log(0.5 / 0.75) + 0.5 * std::log(0.5 / 0.25);
  EXPECT_NEAR(kl_divergence(a, b, 8), want, 1e-9);
}

TEST(KlDivergence, NonNegative) {
  Rng rng(4);
  for (int k = 0; k < 100; ++k) {
    Array2D a = rng.normal_like(6, 6), b = rng.normal_like(6, 6);
    a *= 1.0 + rng.uniform();
    EXPECT_GE(kl_divergence(a, b), 0.0);
  }
  EXPECT_THROW(kl_divergence(Array2D(2, 2), Array2D(2, 2), 4), std::invalid_argument);
}
