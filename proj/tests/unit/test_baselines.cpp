#include <gtest/gtest.h>

#include <cmath>

#include "based/baselines.hpp"
#include "based/errors.hpp"
#include "based/filter.hpp"
#include "oracles.hpp"
#include "synthetic.hpp"

using namespace based;
using namespace based::testing;

TEST(Psnr, IdenticalInputs) {
  Xoshiro256 rng(30);
  const Plane a = random_plane(16, 16, rng);
  EXPECT_THROW(psnr(a, a), IdenticalError);
  EXPECT_EQ(psnr(a, a, 255.0, true), kPsnrCap);
}

TEST(Psnr, UnitOffset) {
  Xoshiro256 rng(31);
  const Plane a = random_plane(16, 12, rng);
  Plane b = a;
  for (double& v : b.data()) v += 1.0;
  EXPECT_NEAR(psnr(a, b), 48.1308036086791, 1e-9);
}

TEST(Psnr, FullScaleOffsetIsZero) {
  const Plane a(8, 8, 0.0), b(8, 8, 255.0);
  EXPECT_NEAR(psnr(a, b), 0.0, 1e-12);
}

TEST(Psnr, ShapeMismatch) { EXPECT_THROW(psnr(Plane(8, 8), Plane(9, 8)), DimensionError); }

TEST(Psnr, NonNegativeForByteRange) {
  Xoshiro256 rng(32);
  for (int t = 0; t < 20; ++t) {
    const Plane a = random_plane(12, 12, rng), b = random_plane(12, 12, rng);
    EXPECT_GE(psnr(a, b), 0.0);
  }
}

TEST(Ssim, IdentityIsOne) {
  Xoshiro256 rng(33);
  const Plane a = random_plane(40, 30, rng);
  EXPECT_DOUBLE_EQ(ssim(a, a), 1.0);
}

TEST(Ssim, Symmetric) {
  Xoshiro256 rng(34);
  const Plane a = random_plane(48, 48, rng);
  const Plane b = gaussian_blur(a, 1.0);
  EXPECT_NEAR(ssim(a, b), ssim(b, a), 1e-12);
}

TEST(Ssim, MatchesDirectWindowedImplementation) {
  Xoshiro256 rng(35);
  const Plane a = random_plane(64, 64, rng);
  const Plane b = gaussian_blur(a, 2.0);
  const double got = ssim(a, b);
  EXPECT_NEAR(got, oracle_ssim(a, b), 1e-9);
  EXPECT_LT(got, 1.0);
}

TEST(Ssim, Bounded) {
  Xoshiro256 rng(36);
  for (int t = 0; t < 10; ++t) {
    const Plane a = random_plane(24, 24, rng), b = random_plane(24, 24, rng);
    const double s = ssim(a, b);
    EXPECT_GE(s, -1.0);
    EXPECT_LE(s, 1.0);
  }
  Plane inv(24, 24);
  const Plane a = random_plane(24, 24, rng);
  for (std::size_t i = 0; i < inv.size(); ++i) inv.data()[i] = 255.0 - a.data()[i];
  EXPECT_LT(ssim(a, inv), 0.0);
}

TEST(Ssim, Errors) {
  EXPECT_THROW(ssim(Plane(20, 20), Plane(20, 21)), DimensionError);
  EXPECT_THROW(ssim(Plane(10, 20), Plane(10, 20)), SizeError);
  EXPECT_NO_THROW(ssim(Plane(11, 11), Plane(11, 11)));
}
