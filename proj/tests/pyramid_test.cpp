#include "uhrseg/pyramid.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace uhrseg;

namespace {

PlaneD random_plane_d(int h, int w, SeededRng& rng) {
  PlaneD p(h, w);
  for (double& v : p.data) v = 2.0 * rng.uniform01() - 1.0;
  return p;
}

// independent blur oracle: full 5x5 separable binomial convolution with
// edge-inclusive reflection, then decimation at even indices
int reflect_oracle(int i, int n) {
  while (i < 0 || i >= n) {
    if (i < 0) i = -i - 1;
    if (i >= n) i = 2 * n - 1 - i;
  }
  return i;
}

PlaneD reduce_oracle(const PlaneD& p) {
  const double tap[5] = {1, 4, 6, 4, 1};
  PlaneD out((p.height + 1) / 2, (p.width + 1) / 2);
  for (int oy = 0; oy < out.height; ++oy) {
    for (int ox = 0; ox < out.width; ++ox) {
      double acc = 0;
      for (int ky = -2; ky <= 2; ++ky)
        for (int kx = -2; kx <= 2; ++kx)
          acc += tap[ky + 2] * tap[kx + 2] *
                 p.at(reflect_oracle(2 * oy + ky, p.height), reflect_oracle(2 * ox + kx, p.width));
      out.at(oy, ox) = acc / 256.0;
    }
  }
  return out;
}

}  // namespace

TEST(Reduce, MatchesFullConvolutionOracle) {
  SeededRng rng(21);
  for (int trial = 0; trial < 10; ++trial) {
    const int h = 2 + static_cast<int>(rng.below(30));
    const int w = 2 + static_cast<int>(rng.below(30));
    PlaneD p = random_plane_d(h, w, rng);
    PlaneD got = gaussian_reduce(p);
    PlaneD want = reduce_oracle(p);
    ASSERT_EQ(got.height, want.height);
    ASSERT_EQ(got.width, want.width);
    for (std::size_t i = 0; i < got.size(); ++i) ASSERT_NEAR(got.data[i], want.data[i], 1e-12);
  }
}

TEST(Reduce, OutputDimsRoundUp) {
  EXPECT_EQ(gaussian_reduce(Plane(7, 10)).height, 4);
  EXPECT_EQ(gaussian_reduce(Plane(7, 10)).width, 5);
}

TEST(Reduce, PreservesConstantsExactly) {
  PlaneD p(9, 7, 0.37);
  PlaneD r = gaussian_reduce(p);
  for (double v : r.data) EXPECT_EQ(v, 0.37);
}

TEST(Reduce, CenteredImpulseKeepsUnitMass) {
  // away from borders the kernel sums to 1, so a unit impulse spreads
  // into samples that total exactly 1/4 after 2x2 decimation... the
  // decimated taps at even offsets are {1,6,1}/16 per axis
  PlaneD p(16, 16, 0.0);
  p.at(8, 8) = 1.0;
  PlaneD r = gaussian_reduce(p);
  double mass = 0;
  for (double v : r.data) mass += v;
  EXPECT_NEAR(mass, 0.25, 1e-12);
  EXPECT_NEAR(r.at(4, 4), 36.0 / 256.0, 1e-12);
  EXPECT_NEAR(r.at(4, 3), 6.0 / 256.0, 1e-12);
  EXPECT_NEAR(r.at(3, 3), 1.0 / 256.0, 1e-12);
}

TEST(Reduce, RejectsTinyPlanes) {
  EXPECT_THROW(gaussian_reduce(Plane(1, 8)), std::invalid_argument);
  EXPECT_THROW(gaussian_reduce(Plane(8, 1)), std::invalid_argument);
}

TEST(Upsample, TwoToFourClosedForm) {
  PlaneD p(1, 2, std::vector<double>{0.0, 1.0});
  PlaneD up = upsample_bilinear(p, 1, 4);
  EXPECT_DOUBLE_EQ(up.at(0, 0), 0.0);
  EXPECT_DOUBLE_EQ(up.at(0, 1), 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(up.at(0, 2), 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(up.at(0, 3), 1.0);
}

TEST(Upsample, IdentityWhenSameSize) {
  SeededRng rng(22);
  PlaneD p = random_plane_d(5, 9, rng);
  PlaneD up = upsample_bilinear(p, 5, 9);
  EXPECT_EQ(up.data, p.data);
}

TEST(Upsample, CornersMapExactly) {
  SeededRng rng(23);
  PlaneD p = random_plane_d(4, 6, rng);
  PlaneD up = upsample_bilinear(p, 13, 17);
  EXPECT_EQ(up.at(0, 0), p.at(0, 0));
  EXPECT_EQ(up.at(0, 16), p.at(0, 5));
  EXPECT_EQ(up.at(12, 0), p.at(3, 0));
  EXPECT_EQ(up.at(12, 16), p.at(3, 5));
}

TEST(Upsample, ConstantsExactAtAnyScale) {
  PlaneD p(3, 3, -1.25);
  PlaneD up = upsample_bilinear(p, 10, 24);
  for (double v : up.data) EXPECT_EQ(v, -1.25);
}

TEST(Upsample, SingleSampleBroadcasts) {
  PlaneD p(1, 1, 4.0);
  PlaneD up = upsample_bilinear(p, 3, 3);
  for (double v : up.data) EXPECT_EQ(v, 4.0);
}

TEST(Upsample, RejectsShrinking) {
  EXPECT_THROW(upsample_bilinear(Plane(4, 4), 2, 8), std::invalid_argument);
}

TEST(Residuals, ShapesAndBase) {
  SeededRng rng(24);
  PlaneD p = random_plane_d(16, 12, rng);
  BasicResidualStack<double> stack = laplacian_residuals(p, 2);
  ASSERT_EQ(stack.residuals.size(), 2u);
  EXPECT_EQ(stack.residuals[0].height, 16);
  EXPECT_EQ(stack.residuals[0].width, 12);
  EXPECT_EQ(stack.residuals[1].height, 8);
  EXPECT_EQ(stack.residuals[1].width, 6);
  EXPECT_EQ(stack.base.height, 4);
  EXPECT_EQ(stack.base.width, 3);
}

TEST(Residuals, TelescopesBackToInput) {
  SeededRng rng(25);
  for (int trial = 0; trial < 10; ++trial) {
    PlaneD p = random_plane_d(16, 16, rng);
    for (int levels = 1; levels <= 3; ++levels) {
      BasicResidualStack<double> stack = laplacian_residuals(p, levels);
      PlaneD back = laplacian_reconstruct(stack);
      ASSERT_TRUE(back.same_shape(p));
      for (std::size_t i = 0; i < p.size(); ++i) ASSERT_NEAR(back.data[i], p.data[i], 1e-12);
    }
  }
}

TEST(Residuals, FloatTelescopeStaysTight) {
  SeededRng rng(26);
  Plane p(32, 32);
  for (float& v : p.data) v = static_cast<float>(rng.uniform01());
  BasicResidualStack<float> stack = laplacian_residuals(p, 3);
  Plane back = laplacian_reconstruct(stack);
  for (std::size_t i = 0; i < p.size(); ++i) ASSERT_NEAR(back.data[i], p.data[i], 1e-5);
}

TEST(Residuals, ConstantsProduceExactlyZero) {
  Plane p(16, 16, 0.6f);
  BasicResidualStack<float> stack = laplacian_residuals(p, 2);
  for (const Plane& r : stack.residuals)
    for (float v : r.data) EXPECT_EQ(v, 0.0f);
  for (float v : stack.base.data) EXPECT_EQ(v, 0.6f);
}

TEST(Residuals, ResidualsAreHighPass) {
  // a smooth ramp should put almost all its energy in the base
  PlaneD p(16, 16);
  for (int y = 0; y < 16; ++y)
    for (int x = 0; x < 16; ++x) p.at(y, x) = 0.1 * x + 0.05 * y;
  BasicResidualStack<double> stack = laplacian_residuals(p, 2);
  EXPECT_LT(plane_energy(stack.residuals[0]), 0.05 * plane_energy(p));
}

TEST(Residuals, RejectsIndivisibleDims) {
  EXPECT_THROW(laplacian_residuals(Plane(10, 16), 2), std::invalid_argument);
  EXPECT_THROW(laplacian_residuals(Plane(16, 16), 0), std::invalid_argument);
  EXPECT_THROW(laplacian_reconstruct(BasicResidualStack<float>{}), std::invalid_argument);
}
