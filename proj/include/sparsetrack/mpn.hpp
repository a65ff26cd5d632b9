#pragma once

// Message-passing network over a SparseGraph: edge encoder, iterated
// edge/node updates, and the edge and node classifiers.

#include "sparsetrack/graph_builder.hpp"
#include "sparsetrack/types.hpp"

#include <Eigen/Core>

#include <array>
#include <cmath>
#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace sparsetrack {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

inline constexpr int kRawEdgeDim = 6;
inline constexpr double kLayerNormEps = 1e-5;

/// Affine map, layer normalization over the output entries, then ReLU.
struct FcBlock {
  RowMatrix weight;  // out_dim x in_dim
  Eigen::VectorXd bias;
  Eigen::VectorXd ln_gain;
  Eigen::VectorXd ln_bias;

  static FcBlock zeros(int in_dim, int out_dim);
  int in_dim() const { return static_cast<int>(weight.cols()); }
  int out_dim() const { return static_cast<int>(weight.rows()); }
};

using FcStack = std::array<FcBlock, 2>;

/// Scalar affine classifier head.
struct Affine {
  Eigen::VectorXd weight;
  double bias = 0.0;
};

/// Mutable view of one parameter tensor, in serialization order.
struct TensorView {
  std::string name;
  double* data;
  size_t size;
};

struct ConstTensorView {
  std::string name;
  const double* data;
  size_t size;
};

struct MpnParameters {
  int d_node = 0;
  int d_edge = 0;
  FcStack f_enc;        // 6 -> d_edge -> d_edge
  FcStack f_e;          // 2 d_node + 2 d_edge -> d_edge -> d_edge
  FcStack f_v_enc_fwd;  // messages travelling t1 -> t2: d_node + d_edge -> d_node -> d_node
  FcStack f_v_enc_bwd;  // messages travelling t2 -> t1
  FcBlock f_v_out;      // d_node -> d_node
  Affine edge_classifier;
  Affine node_classifier;

  /// All-zero parameters of the right shapes (layernorm gains included).
  static MpnParameters zeros(int d_node, int d_edge);

  std::vector<TensorView> tensors();
  std::vector<ConstTensorView> tensors() const;
  size_t parameter_count() const;

  /// Throws ConfigError when any tensor disagrees with (d_node, d_edge).
  void validate_shapes() const;

  /// this += scale * other, tensor by tensor.
  void add_scaled(const MpnParameters& other, double scale);
};

/// Uniform in +-1/sqrt(fan_in) for every affine weight and bias; layernorm
/// gain 1 and bias 0. Bit-identical for equal seeds.
MpnParameters init_parameters(uint64_t seed, int d_node, int d_edge);

/// Versioned little-endian binary format:
///   bytes 0..7   magic "SPTRKMPN"
///   uint32       format version (1)
///   uint32       d_node
///   uint32       d_edge
///   float64[]    every tensor in MpnParameters::tensors() order, weights row-major
std::string save_parameters(const MpnParameters& params);
MpnParameters load_parameters(std::string_view bytes);
void save_parameters_file(const MpnParameters& params, const std::string& path);
MpnParameters load_parameters_file(const std::string& path);

/// Evaluates an FC block on every column of `input`.
Eigen::MatrixXd fc_forward(const FcBlock& block, const Eigen::MatrixXd& input);
Eigen::MatrixXd fc_stack_forward(const FcStack& stack, const Eigen::MatrixXd& input);

/// Node features are stored t1 nodes first, then t2 nodes.
struct GraphState {
  Eigen::MatrixXd node_feats;                                // d_node x (n_t1 + n_t2)
  Eigen::MatrixXd edge_feats;                                // d_edge x n_edges
  std::shared_ptr<const Eigen::MatrixXd> edge_feats_initial;  // e^0, never modified
  int iteration = 0;
};

/// Column of `ref` in GraphState::node_feats.
inline int node_column(const SparseGraph& graph, const NodeRef& ref) {
  return ref.on_t2() ? static_cast<int>(graph.nodes_t1.size()) + ref.index : ref.index;
}

GraphState encode_edges(const SparseGraph& graph, const MpnParameters& params);
GraphState edge_update(const GraphState& state, const SparseGraph& graph, const MpnParameters& params);
GraphState node_update(const GraphState& state, const SparseGraph& graph, const MpnParameters& params);

struct MpnOutput {
  std::vector<double> edge_scores;     // aligned with SparseGraph::pairs
  std::vector<double> node_scores_t2;  // aligned with SparseGraph::nodes_t2
};

MpnOutput forward(const SparseGraph& graph, const MpnParameters& params, int n_iter);

inline double logistic(double z) { return 1.0 / (1.0 + std::exp(-z)); }

// Intermediate values of one forward pass, kept for backpropagation.
namespace trace {

struct FcCache {
  Eigen::MatrixXd input;
  Eigen::MatrixXd normalized;  // layernorm output before gain/bias
  Eigen::VectorXd inv_std;     // per column
  Eigen::MatrixXd output;
};

struct StackCache {
  FcCache first;
  FcCache second;
};

struct Iteration {
  StackCache edge_mlp;
  std::vector<int> fwd_edges;  // edges leaving t1 nodes
  std::vector<int> bwd_edges;  // edges leaving t2 nodes
  StackCache msg_fwd;
  StackCache msg_bwd;
  std::vector<int> updated_nodes;  // columns with at least one incoming edge
  Eigen::VectorXd inv_in_degree;   // per node column, 0 when isolated
  FcCache node_out;
};

struct Forward {
  StackCache encoder;
  std::vector<Eigen::MatrixXd> node_feats;  // [0] = embeddings, [l] after iteration l
  std::vector<Eigen::MatrixXd> edge_feats;  // [0] = e^0, [l] after iteration l
  std::vector<Iteration> iterations;
  Eigen::MatrixXd pair_feats;  // d_edge x n_pairs, mean of both directions
  MpnOutput output;
};

Forward run(const SparseGraph& graph, const MpnParameters& params, int n_iter);

FcCache fc_forward_cached(const FcBlock& block, const Eigen::MatrixXd& input);
StackCache stack_forward_cached(const FcStack& stack, const Eigen::MatrixXd& input);

/// Accumulates parameter gradients into `grad` and returns d(loss)/d(input).
Eigen::MatrixXd fc_backward(const FcBlock& block, const FcCache& cache, const Eigen::MatrixXd& d_output,
                            FcBlock& grad);
Eigen::MatrixXd stack_backward(const FcStack& stack, const StackCache& cache, const Eigen::MatrixXd& d_output,
                               FcStack& grad);

}  // namespace trace

}  // namespace sparsetrack
