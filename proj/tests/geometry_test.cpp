#include "oracles/oracles.hpp"
#include "sparsetrack/geometry.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace sparsetrack;

TEST(Iou, IdenticalBoxIsOne) {
  const BBox b{0, 0, 10, 10};
  EXPECT_DOUBLE_EQ(iou(b, b), 1.0);
}

TEST(Iou, DisjointIsZero) { EXPECT_EQ(iou({0, 0, 1, 1}, {5, 5, 6, 6}), 0.0); }

TEST(Iou, HalfOverlapSquares) { EXPECT_NEAR(iou({0, 0, 2, 2}, {1, 1, 3, 3}), 1.0 / 7.0, 1e-12); }

TEST(Iou, DegenerateBoxesGiveZero) {
  EXPECT_EQ(iou({1, 1, 1, 1}, {1, 1, 1, 1}), 0.0);
  EXPECT_EQ(iou({0, 0, 0, 5}, {0, 0, 4, 5}), 0.0);
}

TEST(Iou, MatchesPixelGridOnIntegerBoxes) {
  Rng rng(7);
  for (int trial = 0; trial < 2000; ++trial) {
    int c[8];
    for (int k = 0; k < 8; k += 4) {
      c[k] = static_cast<int>(rng.integer(0, 20));
      c[k + 1] = static_cast<int>(rng.integer(0, 20));
      c[k + 2] = c[k] + static_cast<int>(rng.integer(0, 20));
      c[k + 3] = c[k + 1] + static_cast<int>(rng.integer(0, 20));
    }
    const BBox a{double(c[0]), double(c[1]), double(c[2]), double(c[3])};
    const BBox b{double(c[4]), double(c[5]), double(c[6]), double(c[7])};
    ASSERT_NEAR(iou(a, b), oracle::pixel_iou(c[0], c[1], c[2], c[3], c[4], c[5], c[6], c[7]), 1e-9);
  }
}

TEST(Iou, SymmetricAndBounded) {
  Rng rng(8);
  for (int trial = 0; trial < 500; ++trial) {
    const BBox a = oracle::random_box(rng, 30.0);
    const BBox b = oracle::random_box(rng, 30.0);
    const double v = iou(a, b);
    EXPECT_EQ(v, iou(b, a));
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 1.0);
  }
}

TEST(Cosine, KnownValues) {
  Embedding u(3), v(2), w(2);
  u << 1, 2, 3;
  EXPECT_NEAR(cosine_similarity(u, u), 1.0, 1e-15);
  v << 1, 0;
  w << 0, 1;
  EXPECT_EQ(cosine_similarity(v, w), 0.0);
  w << 1, 1;
  EXPECT_NEAR(cosine_similarity(w, v), 1.0 / std::sqrt(2.0), 1e-12);
}

TEST(Cosine, ZeroNormGivesZero) {
  Embedding z = Embedding::Zero(4), u = Embedding::Ones(4);
  EXPECT_EQ(cosine_similarity(z, u), 0.0);
  EXPECT_EQ(cosine_similarity(z, z), 0.0);
}

TEST(Cosine, SymmetricAndScaleInvariant) {
  Rng rng(9);
  for (int trial = 0; trial < 200; ++trial) {
    const Embedding a = oracle::random_embedding(rng, 5);
    const Embedding b = oracle::random_embedding(rng, 5);
    const double s = cosine_similarity(a, b);
    EXPECT_NEAR(s, cosine_similarity(b, a), 1e-15);
    EXPECT_NEAR(s, cosine_similarity(3.5 * a, 0.2 * b), 1e-12);
    EXPECT_LE(std::abs(s), 1.0);
  }
}

TEST(CenterDistance, PythagoreanTriple) { EXPECT_DOUBLE_EQ(center_distance({0, 0, 2, 2}, {3, 4, 5, 6}), 5.0); }
