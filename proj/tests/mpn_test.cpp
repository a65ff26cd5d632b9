#include "oracles/oracles.hpp"
#include "sparsetrack/graph_builder.hpp"
#include "sparsetrack/mpn.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>

using namespace sparsetrack;

namespace {

SparseGraph random_graph(oracle::Rng& rng, int n1, int n2, int dim, int m = 2) {
  std::vector<Detection> a, b;
  for (int i = 0; i < n1; ++i) a.push_back(oracle::random_detection(rng, dim));
  for (int j = 0; j < n2; ++j) b.push_back(oracle::random_detection(rng, dim));
  return build_detection_graph(a, b, m, 50.0);
}

}  // namespace

TEST(FcBlock, ZeroWeightsGiveReluOfLayerNormOfBias) {
  FcBlock b = FcBlock::zeros(3, 4);
  b.bias << 1, 2, 3, 4;
  b.ln_gain.setOnes();
  Eigen::MatrixXd x = Eigen::MatrixXd::Random(3, 5);
  const auto y = fc_forward(b, x);
  const double mean = 2.5, sd = std::sqrt(1.25 + kLayerNormEps);
  for (int c = 0; c < 5; ++c) {
    for (int r = 0; r < 4; ++r) EXPECT_NEAR(y(r, c), std::max(0.0, (r + 1 - mean) / sd), 1e-12);
  }
}

TEST(EncodeEdges, ZeroWeightEncoderIsConstant) {
  oracle::Rng rng(1);
  const auto g = random_graph(rng, 3, 4, 4);
  MpnParameters p = oracle::random_parameters(rng, 4, 4);
  for (auto& blk : p.f_enc) blk.weight.setZero();
  const auto s = encode_edges(g, p);
  for (Eigen::Index k = 1; k < s.edge_feats.cols(); ++k) EXPECT_TRUE(s.edge_feats.col(k).isApprox(s.edge_feats.col(0), 1e-12));
}

TEST(EncodeEdges, SymmetricInputGivesEqualDirections) {
  oracle::Rng rng(2);
  Detection d = oracle::random_detection(rng, 4);
  const auto g = build_detection_graph({d}, {d}, 1);
  const auto p = oracle::random_parameters(rng, 4, 6);
  const auto s = encode_edges(g, p);
  ASSERT_EQ(s.edge_feats.cols(), 2);
  EXPECT_EQ((s.edge_feats.col(0) - s.edge_feats.col(1)).norm(), 0.0);
  EXPECT_TRUE(s.edge_feats.allFinite());
  EXPECT_EQ(s.iteration, 0);
}

TEST(EncodeEdges, EmbeddingDimensionMismatchThrows) {
  oracle::Rng rng(3);
  const auto g = random_graph(rng, 2, 2, 3);
  EXPECT_THROW(encode_edges(g, oracle::random_parameters(rng, 4, 4)), ConfigError);
}

TEST(EdgeUpdate, CopyingTheInitialSliceIgnoresNodes) {
  // f_e's first block copies the e^0 slice; the second is an identity map.
  // Then e^1 = relu(ln(relu(ln(e^0)))), whatever the node features are.
  const int dn = 3, de = 4;
  oracle::Rng rng(4);
  auto g = random_graph(rng, 3, 3, dn);
  MpnParameters p = oracle::random_parameters(rng, dn, de);
  for (auto& blk : p.f_e) {
    blk.weight.setZero();
    blk.bias.setZero();
    blk.ln_gain.setOnes();
    blk.ln_bias.setZero();
  }
  for (int r = 0; r < de; ++r) {
    p.f_e[0].weight(r, 2 * dn + r) = 1.0;
    p.f_e[1].weight(r, r) = 1.0;
  }
  const auto s0 = encode_edges(g, p);
  const auto s1 = edge_update(s0, g, p);
  auto ln_relu = [](Eigen::VectorXd z) {
    const double mean = z.mean();
    const double var = (z.array() - mean).square().mean();
    return Eigen::VectorXd(((z.array() - mean) / std::sqrt(var + kLayerNormEps)).max(0.0));
  };
  for (Eigen::Index k = 0; k < s0.edge_feats.cols(); ++k) {
    const Eigen::VectorXd expect = ln_relu(ln_relu(s0.edge_feats.col(k)));
    EXPECT_TRUE(s1.edge_feats.col(k).isApprox(expect, 1e-12));
  }
  for (auto& n : g.nodes_t2) n.embedding = oracle::random_embedding(rng, dn);
  EXPECT_TRUE(edge_update(encode_edges(g, p), g, p).edge_feats.isApprox(s1.edge_feats, 1e-12));
}

TEST(EdgeUpdate, InitialFeaturesAreNeverModified) {
  oracle::Rng rng(5);
  const auto g = random_graph(rng, 3, 4, 4);
  const auto p = oracle::random_parameters(rng, 4, 4);
  const auto s0 = encode_edges(g, p);
  const Eigen::MatrixXd e0 = *s0.edge_feats_initial;
  auto s = s0;
  for (int l = 0; l < 3; ++l) s = node_update(edge_update(s, g, p), g, p);
  EXPECT_EQ(s.iteration, 3);
  EXPECT_EQ(s.edge_feats_initial.get(), s0.edge_feats_initial.get());
  EXPECT_EQ((*s.edge_feats_initial - e0).norm(), 0.0);
  EXPECT_EQ(s.edge_feats.rows(), 4);
}

TEST(NodeUpdate, SingleAndDuplicatedIncomingEdges) {
  oracle::Rng rng(6);
  const Detection a = oracle::random_detection(rng, 3);
  const Detection b = oracle::random_detection(rng, 3);
  const auto p = oracle::random_parameters(rng, 3, 4);
  const auto one = build_detection_graph({a}, {b}, 1);
  const auto two = build_detection_graph({a, a}, {b}, 1);
  const auto v1 = node_update(edge_update(encode_edges(one, p), one, p), one, p).node_feats;
  const auto v2 = node_update(edge_update(encode_edges(two, p), two, p), two, p).node_feats;
  // t2 node column: after the t1 nodes.
  EXPECT_TRUE(v1.col(1).isApprox(v2.col(2), 1e-12));
}

TEST(NodeUpdate, IsolatedNodesKeepFeatures) {
  oracle::Rng rng(7);
  std::vector<Detection> t2{oracle::random_detection(rng, 3), oracle::random_detection(rng, 3)};
  SparseGraph g = build_detection_graph({}, t2, 1);
  const auto p = oracle::random_parameters(rng, 3, 4);
  const auto s = node_update(edge_update(encode_edges(g, p), g, p), g, p);
  EXPECT_TRUE(s.node_feats.col(0).isApprox(t2[0].embedding));
  EXPECT_TRUE(s.node_feats.col(1).isApprox(t2[1].embedding));
}

TEST(Forward, ZeroClassifiersGiveLogisticOfBias) {
  oracle::Rng rng(8);
  const auto g = random_graph(rng, 3, 3, 4);
  MpnParameters p = oracle::random_parameters(rng, 4, 4);
  p.edge_classifier.weight.setZero();
  p.edge_classifier.bias = 0.3;
  p.node_classifier.weight.setZero();
  p.node_classifier.bias = -1.2;
  const auto out = forward(g, p, 0);
  for (double e : out.edge_scores) EXPECT_DOUBLE_EQ(e, logistic(0.3));
  for (double n : out.node_scores_t2) EXPECT_DOUBLE_EQ(n, logistic(-1.2));
}

TEST(Forward, MatchesStraightLineReference) {
  oracle::Rng rng(9);
  for (int trial = 0; trial < 40; ++trial) {
    const int dn = static_cast<int>(rng.integer(2, 5)), de = static_cast<int>(rng.integer(2, 5));
    const auto g = random_graph(rng, static_cast<int>(rng.integer(0, 4)), static_cast<int>(rng.integer(0, 4)), dn);
    const auto p = oracle::random_parameters(rng, dn, de);
    const int n_iter = static_cast<int>(rng.integer(0, 3));
    const auto got = forward(g, p, n_iter);
    const auto ref = oracle::reference_forward(g, p, n_iter);
    ASSERT_EQ(got.edge_scores.size(), ref.edge.size());
    ASSERT_EQ(got.node_scores_t2.size(), ref.node_t2.size());
    for (size_t k = 0; k < ref.edge.size(); ++k) EXPECT_NEAR(got.edge_scores[k], ref.edge[k], 1e-9);
    for (size_t k = 0; k < ref.node_t2.size(); ++k) EXPECT_NEAR(got.node_scores_t2[k], ref.node_t2[k], 1e-9);
  }
}

TEST(Forward, ScoresStrictlyInsideUnitIntervalAndDeterministic) {
  oracle::Rng rng(10);
  const auto g = random_graph(rng, 5, 6, 4);
  const auto p = oracle::random_parameters(rng, 4, 4);
  const auto a = forward(g, p, 3);
  const auto b = forward(g, p, 3);
  EXPECT_EQ(a.edge_scores, b.edge_scores);
  EXPECT_EQ(a.node_scores_t2, b.node_scores_t2);
  for (double e : a.edge_scores) {
    EXPECT_GT(e, 0.0);
    EXPECT_LT(e, 1.0);
  }
}

TEST(Forward, SwappingDirectedEdgeOrderLeavesScores) {
  oracle::Rng rng(11);
  auto g = random_graph(rng, 3, 3, 4);
  const auto p = oracle::random_parameters(rng, 4, 4);
  const auto before = forward(g, p, 2);
  for (auto& pr : g.pairs) {
    std::swap(g.edges[pr.forward_edge], g.edges[pr.backward_edge]);
    std::swap(pr.forward_edge, pr.backward_edge);
  }
  const auto after = forward(g, p, 2);
  for (size_t k = 0; k < before.edge_scores.size(); ++k) EXPECT_NEAR(before.edge_scores[k], after.edge_scores[k], 1e-12);
}

TEST(Forward, PermutingT2NodesPermutesScores) {
  oracle::Rng rng(12);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<Detection> a, b;
    for (int i = 0; i < 4; ++i) a.push_back(oracle::random_detection(rng, 3));
    for (int j = 0; j < 5; ++j) b.push_back(oracle::random_detection(rng, 3));
    std::vector<int> perm(b.size());
    std::iota(perm.begin(), perm.end(), 0);
    for (int k = static_cast<int>(perm.size()) - 1; k > 0; --k) std::swap(perm[k], perm[rng.integer(0, k)]);
    std::vector<Detection> b2(b.size());
    for (size_t j = 0; j < b.size(); ++j) b2[j] = b[perm[j]];
    const auto p = oracle::random_parameters(rng, 3, 4);
    // m = 5 keeps every pair, so tie-breaking by index cannot change the graph.
    const auto g1 = build_detection_graph(a, b, 5, 50.0);
    const auto g2 = build_detection_graph(a, b2, 5, 50.0);
    ASSERT_EQ(g1.pairs.size(), g2.pairs.size());
    const auto o1 = forward(g1, p, 2);
    const auto o2 = forward(g2, p, 2);
    for (size_t j = 0; j < b.size(); ++j) EXPECT_NEAR(o2.node_scores_t2[j], o1.node_scores_t2[perm[j]], 1e-12);
    for (size_t k = 0; k < g2.pairs.size(); ++k) {
      const int t1 = g2.pairs[k].t1, t2 = perm[g2.pairs[k].t2];
      const auto it = std::find_if(g1.pairs.begin(), g1.pairs.end(),
                                   [&](const NodePair& q) { return q.t1 == t1 && q.t2 == t2; });
      ASSERT_NE(it, g1.pairs.end());
      EXPECT_NEAR(o2.edge_scores[k], o1.edge_scores[it - g1.pairs.begin()], 1e-12);
    }
  }
}

TEST(Forward, ReceptiveFieldGrowsWithIterations) {
  // Path a1 - b1 - a2 - b2 (with m = 1 and far-apart boxes). Perturbing
  // a2's embedding cannot change ES(a1, b1) without message passing, and
  // does change it after two iterations.
  oracle::Rng rng(13);
  Detection a1 = oracle::random_detection(rng, 3), b1 = a1, a2 = oracle::random_detection(rng, 3);
  a1.box = BBox::from_ltwh(0, 0, 10, 10);
  b1.box = BBox::from_ltwh(2, 0, 10, 10);
  a2.box = BBox::from_ltwh(300, 0, 10, 10);
  Detection b2 = a2;
  b2.box = BBox::from_ltwh(302, 0, 10, 10);
  const auto p = oracle::random_parameters(rng, 3, 4);
  auto es_a1b1 = [&](const Detection& a2v, int n_iter) {
    auto g = build_detection_graph({a1, a2v}, {b1, b2}, 1);
    const auto out = forward(g, p, n_iter);
    for (size_t k = 0; k < g.pairs.size(); ++k) {
      if (g.pairs[k].t1 == 0 && g.pairs[k].t2 == 0) return out.edge_scores[k];
    }
    return -1.0;
  };
  Detection a2p = a2;
  a2p.embedding = oracle::random_embedding(rng, 3);
  EXPECT_EQ(es_a1b1(a2, 0), es_a1b1(a2p, 0));
  EXPECT_NE(es_a1b1(a2, 2), es_a1b1(a2p, 2));
}

TEST(InitParameters, DeterministicAndBounded) {
  const auto a = init_parameters(42, 4, 4);
  const auto b = init_parameters(42, 4, 4);
  const auto c = init_parameters(43, 4, 4);
  EXPECT_EQ(save_parameters(a), save_parameters(b));
  EXPECT_NE(save_parameters(a), save_parameters(c));
  // f_enc's second block has fan-in d_edge = 4.
  EXPECT_LE(a.f_enc[1].weight.cwiseAbs().maxCoeff(), 0.5);
  EXPECT_LE(a.f_enc[1].bias.cwiseAbs().maxCoeff(), 0.5);
  EXPECT_EQ(a.f_enc[1].ln_gain, Eigen::VectorXd::Ones(4));
  a.validate_shapes();
}

TEST(Parameters, RoundTripIsBitExact) {
  oracle::Rng rng(14);
  const auto p = oracle::random_parameters(rng, 5, 3);
  const auto q = load_parameters(save_parameters(p));
  EXPECT_EQ(save_parameters(q), save_parameters(p));
  EXPECT_EQ(q.d_node, 5);
  EXPECT_EQ(q.f_v_out.weight, p.f_v_out.weight);
}

TEST(Parameters, BadMagicAndTruncation) {
  std::string bytes = save_parameters(init_parameters(1, 3, 3));
  std::string bad = bytes;
  bad[0] = 'X';
  try {
    load_parameters(bad);
    FAIL();
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("bad magic"), std::string::npos);
  }
  try {
    load_parameters(bytes.substr(0, bytes.size() - 20));
    FAIL();
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("classifier"), std::string::npos) << e.what();
  }
}
