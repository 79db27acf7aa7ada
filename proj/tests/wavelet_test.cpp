#include "uhrseg/wavelet.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace uhrseg;

namespace {

Plane random_plane(int h, int w, SeededRng& rng, float scale = 1.0f) {
  Plane p(h, w);
  for (float& v : p.data) v = scale * (2.0f * static_cast<float>(rng.uniform01()) - 1.0f);
  return p;
}

PlaneD random_plane_d(int h, int w, SeededRng& rng) {
  PlaneD p(h, w);
  for (double& v : p.data) v = 2.0 * rng.uniform01() - 1.0;
  return p;
}

}  // namespace

// One 2x2 block [[1,2],[3,4]] by hand with coefficient 1/2:
//   ll = (1+2+3+4)/2 = 5, lh = (1+2-3-4)/2 = -2,
//   hl = (1-2+3-4)/2 = -1, hh = (1-2-3+4)/2 = 0.
TEST(Dwt, SingleBlockByHand) {
  Plane p(2, 2, std::vector<float>{1, 2, 3, 4});
  BasicSubbandQuad<float> q = dwt2(p);
  EXPECT_FLOAT_EQ(q.ll.at(0, 0), 5.0f);
  EXPECT_FLOAT_EQ(q.lh.at(0, 0), -2.0f);
  EXPECT_FLOAT_EQ(q.hl.at(0, 0), -1.0f);
  EXPECT_FLOAT_EQ(q.hh.at(0, 0), 0.0f);
  Plane back = iwt2(q);
  for (std::size_t i = 0; i < 4; ++i) EXPECT_FLOAT_EQ(back.data[i], p.data[i]);
}

TEST(Dwt, SubbandShapesHalve) {
  SeededRng rng(1);
  Plane p = random_plane(6, 10, rng);
  BasicSubbandQuad<float> q = dwt2(p);
  EXPECT_EQ(q.ll.height, 3);
  EXPECT_EQ(q.ll.width, 5);
  EXPECT_TRUE(q.ll.same_shape(q.lh));
  EXPECT_TRUE(q.ll.same_shape(q.hl));
  EXPECT_TRUE(q.ll.same_shape(q.hh));
}

TEST(Dwt, OddDimensionsRejected) {
  EXPECT_THROW(dwt2(Plane(3, 4)), std::invalid_argument);
  EXPECT_THROW(dwt2(Plane(4, 7)), std::invalid_argument);
}

TEST(Dwt, RoundtripAndEnergyDouble) {
  SeededRng rng(2);
  for (int trial = 0; trial < 20; ++trial) {
    const int h = 2 * (1 + static_cast<int>(rng.below(16)));
    const int w = 2 * (1 + static_cast<int>(rng.below(16)));
    PlaneD p = random_plane_d(h, w, rng);
    BasicSubbandQuad<double> q = dwt2(p);
    PlaneD back = iwt2(q);
    const double in_energy = plane_energy(p);
    const double coeff_energy =
        plane_energy(q.ll) + plane_energy(q.lh) + plane_energy(q.hl) + plane_energy(q.hh);
    EXPECT_NEAR(coeff_energy / in_energy, 1.0, 1e-12);
    for (std::size_t i = 0; i < p.size(); ++i) EXPECT_NEAR(back.data[i], p.data[i], 1e-12);
  }
}

TEST(Dwt, Linearity) {
  SeededRng rng(3);
  PlaneD a = random_plane_d(8, 8, rng), b = random_plane_d(8, 8, rng);
  PlaneD sum(8, 8);
  for (std::size_t i = 0; i < sum.size(); ++i) sum.data[i] = 2.0 * a.data[i] - 3.0 * b.data[i];
  BasicSubbandQuad<double> qa = dwt2(a), qb = dwt2(b), qs = dwt2(sum);
  for (std::size_t i = 0; i < qa.ll.size(); ++i) {
    EXPECT_NEAR(qs.ll.data[i], 2 * qa.ll.data[i] - 3 * qb.ll.data[i], 1e-12);
    EXPECT_NEAR(qs.hh.data[i], 2 * qa.hh.data[i] - 3 * qb.hh.data[i], 1e-12);
  }
}

TEST(Dwt, ConstantPlaneHasOnlyLowBand) {
  BasicSubbandQuad<float> q = dwt2(Plane(4, 4, 3.0f));
  for (std::size_t i = 0; i < q.ll.size(); ++i) {
    EXPECT_FLOAT_EQ(q.ll.data[i], 6.0f);  // 4 * 3 / 2
    EXPECT_FLOAT_EQ(q.lh.data[i], 0.0f);
    EXPECT_FLOAT_EQ(q.hl.data[i], 0.0f);
    EXPECT_FLOAT_EQ(q.hh.data[i], 0.0f);
  }
}

// <dwt(x), y> must equal <x, adjoint(y)>; with coefficient 1/2 the
// transform is orthonormal and its adjoint is its inverse.
TEST(Dwt, AdjointIdentity) {
  SeededRng rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    PlaneD x = random_plane_d(12, 8, rng);
    BasicSubbandQuad<double> y{random_plane_d(6, 4, rng), random_plane_d(6, 4, rng),
                               random_plane_d(6, 4, rng), random_plane_d(6, 4, rng)};
    BasicSubbandQuad<double> fx = dwt2(x);
    const double lhs = plane_dot(fx.ll, y.ll) + plane_dot(fx.lh, y.lh) +
                       plane_dot(fx.hl, y.hl) + plane_dot(fx.hh, y.hh);
    PlaneD aty = dwt_adjoint_scatter(y);
    const double rhs = plane_dot(x, aty);
    EXPECT_NEAR(lhs, rhs, 1e-12 * std::max(1.0, std::abs(lhs)));
  }
}

TEST(Multilevel, StructureAndRoundtrip) {
  SeededRng rng(5);
  PlaneD p = random_plane_d(16, 16, rng);
  BasicMallatPyramid<double> pyr = dwt_multilevel(p, 3);
  ASSERT_EQ(pyr.details.size(), 3u);
  EXPECT_EQ(pyr.details[0].lh.height, 8);  // finest first
  EXPECT_EQ(pyr.details[1].lh.height, 4);
  EXPECT_EQ(pyr.details[2].lh.height, 2);
  EXPECT_EQ(pyr.low.height, 2);
  PlaneD back = iwt_multilevel(pyr);
  for (std::size_t i = 0; i < p.size(); ++i) EXPECT_NEAR(back.data[i], p.data[i], 1e-12);
}

TEST(Multilevel, RejectsIndivisibleDims) {
  EXPECT_THROW(dwt_multilevel(Plane(12, 16), 3), std::invalid_argument);
  EXPECT_THROW(dwt_multilevel(Plane(16, 16), 0), std::invalid_argument);
}

TEST(Multilevel, EnergyConservedAcrossLevels) {
  SeededRng rng(6);
  PlaneD p = random_plane_d(32, 32, rng);
  BasicMallatPyramid<double> pyr = dwt_multilevel(p, 4);
  double total = plane_energy(pyr.low);
  for (const auto& d : pyr.details)
    total += plane_energy(d.lh) + plane_energy(d.hl) + plane_energy(d.hh);
  EXPECT_NEAR(total / plane_energy(p), 1.0, 1e-12);
}

TEST(Packet, TreeShapeAndLevelOne) {
  SeededRng rng(7);
  PlaneD p = random_plane_d(16, 16, rng);
  BasicPacketTree<double> tree = packet_decompose(p, 3);
  ASSERT_EQ(tree.nodes.size(), 4u);
  EXPECT_EQ(tree.nodes[0].size(), 1u);
  EXPECT_EQ(tree.nodes[1].size(), 4u);
  EXPECT_EQ(tree.nodes[2].size(), 16u);
  EXPECT_EQ(tree.nodes[3].size(), 64u);
  EXPECT_EQ(tree.nodes[3][0].height, 2);

  // level 1 must agree with the plain transform in LL,LH,HL,HH order
  BasicSubbandQuad<double> q = dwt2(p);
  EXPECT_EQ(tree.nodes[1][0].data, q.ll.data);
  EXPECT_EQ(tree.nodes[1][1].data, q.lh.data);
  EXPECT_EQ(tree.nodes[1][2].data, q.hl.data);
  EXPECT_EQ(tree.nodes[1][3].data, q.hh.data);

  // children of node j live at 4j+k
  BasicSubbandQuad<double> qhh = dwt2(q.hh);
  EXPECT_EQ(tree.nodes[2][4 * 3 + 2].data, qhh.hl.data);
}

TEST(Packet, EveryLevelConservesEnergy) {
  SeededRng rng(8);
  PlaneD p = random_plane_d(16, 16, rng);
  BasicPacketTree<double> tree = packet_decompose(p, 3);
  const double ref = plane_energy(p);
  for (int l = 1; l <= 3; ++l) {
    double e = 0;
    for (const auto& node : tree.nodes[l]) e += plane_energy(node);
    EXPECT_NEAR(e / ref, 1.0, 1e-12) << "level " << l;
  }
}

// <packet(x), y> == <x, scatter(y)> over full random trees.
TEST(Packet, AdjointScatterIdentity) {
  SeededRng rng(9);
  for (int trial = 0; trial < 10; ++trial) {
    PlaneD x = random_plane_d(8, 8, rng);
    BasicPacketTree<double> tree = packet_decompose(x, 2);
    BasicPacketTree<double> y = tree;
    for (auto& level : y.nodes)
      for (auto& node : level) node = random_plane_d(node.height, node.width, rng);
    // only the leaf-ward levels enter the inner product; zero the root
    for (auto& v : y.nodes[0][0].data) v = 0.0;

    double lhs = 0;
    for (int l = 1; l <= 2; ++l)
      for (std::size_t j = 0; j < y.nodes[l].size(); ++j)
        lhs += plane_dot(tree.nodes[l][j], y.nodes[l][j]);
    PlaneD aty = packet_adjoint_scatter(y);
    EXPECT_NEAR(lhs, plane_dot(x, aty), 1e-10 * std::max(1.0, std::abs(lhs)));
  }
}

TEST(Mallat, PackUnpackRoundtripAndLayout) {
  SeededRng rng(10);
  PlaneD p = random_plane_d(8, 8, rng);
  BasicMallatPyramid<double> pyr = dwt_multilevel(p, 2);
  PlaneD packed = mallat_pack(pyr);
  EXPECT_EQ(packed.height, 8);
  EXPECT_EQ(packed.width, 8);
  // finest detail occupies the three outer quadrants
  EXPECT_EQ(packed.at(0, 4), pyr.details[0].lh.at(0, 0));
  EXPECT_EQ(packed.at(4, 0), pyr.details[0].hl.at(0, 0));
  EXPECT_EQ(packed.at(4, 4), pyr.details[0].hh.at(0, 0));
  // coarsest low band sits top-left
  EXPECT_EQ(packed.at(0, 0), pyr.low.at(0, 0));
  EXPECT_EQ(packed.at(0, 2), pyr.details[1].lh.at(0, 0));

  BasicMallatPyramid<double> back = mallat_unpack(packed, 2);
  PlaneD recon = iwt_multilevel(back);
  for (std::size_t i = 0; i < p.size(); ++i) EXPECT_NEAR(recon.data[i], p.data[i], 1e-12);
}

TEST(Mallat, UnpackRejectsBadLevels) {
  EXPECT_THROW(mallat_unpack(Plane(8, 8), 4), std::invalid_argument);
}

TEST(Energy, DotAndEnergyAgree) {
  SeededRng rng(11);
  PlaneD p = random_plane_d(4, 4, rng);
  EXPECT_NEAR(plane_energy(p), plane_dot(p, p), 1e-15);
  EXPECT_THROW(plane_dot(PlaneD(2, 2), PlaneD(2, 4)), std::invalid_argument);
}
