#include "sparsetrack/mpn.hpp"

#include <random>

namespace sparsetrack {

namespace {

void check_dims(const SparseGraph& graph, const MpnParameters& params) {
  auto check = [&](const Embedding& e, const char* side) {
    if (e.size() != params.d_node) {
      throw ConfigError(std::string("mpn: ") + side + " embedding has dimension " + std::to_string(e.size()) +
                        ", parameters expect d_node=" + std::to_string(params.d_node));
    }
  };
  for (const auto& n : graph.nodes_t1) check(n.detection.embedding, "t1");
  for (const auto& d : graph.nodes_t2) check(d.embedding, "t2");
}

Eigen::MatrixXd initial_node_feats(const SparseGraph& graph, int d_node) {
  const Eigen::Index n1 = static_cast<Eigen::Index>(graph.nodes_t1.size());
  Eigen::MatrixXd v(d_node, n1 + static_cast<Eigen::Index>(graph.nodes_t2.size()));
  for (Eigen::Index i = 0; i < n1; ++i) v.col(i) = graph.nodes_t1[i].detection.embedding;
  for (size_t j = 0; j < graph.nodes_t2.size(); ++j) v.col(n1 + static_cast<Eigen::Index>(j)) = graph.nodes_t2[j].embedding;
  return v;
}

Eigen::MatrixXd raw_feature_matrix(const SparseGraph& graph) {
  Eigen::MatrixXd r(kRawEdgeDim, static_cast<Eigen::Index>(graph.edges.size()));
  for (size_t e = 0; e < graph.edges.size(); ++e) {
    const auto a = graph.edges[e].raw.as_array();
    for (int k = 0; k < kRawEdgeDim; ++k) r(k, static_cast<Eigen::Index>(e)) = a[k];
  }
  return r;
}

Eigen::MatrixXd edge_mlp_input(const SparseGraph& graph, const Eigen::MatrixXd& v, const Eigen::MatrixXd& e0,
                               const Eigen::MatrixXd& e_prev) {
  const Eigen::Index dn = v.rows();
  const Eigen::Index de = e0.rows();
  Eigen::MatrixXd x(2 * dn + 2 * de, static_cast<Eigen::Index>(graph.edges.size()));
  for (size_t k = 0; k < graph.edges.size(); ++k) {
    const auto c = static_cast<Eigen::Index>(k);
    const auto& edge = graph.edges[k];
    x.col(c).segment(0, dn) = v.col(node_column(graph, edge.from));
    x.col(c).segment(dn, dn) = v.col(node_column(graph, edge.to));
    x.col(c).segment(2 * dn, de) = e0.col(c);
    x.col(c).segment(2 * dn + de, de) = e_prev.col(c);
  }
  return x;
}

Eigen::MatrixXd message_input(const SparseGraph& graph, const std::vector<int>& edges, const Eigen::MatrixXd& v,
                              const Eigen::MatrixXd& e) {
  const Eigen::Index dn = v.rows();
  Eigen::MatrixXd x(dn + e.rows(), static_cast<Eigen::Index>(edges.size()));
  for (size_t k = 0; k < edges.size(); ++k) {
    const auto c = static_cast<Eigen::Index>(k);
    x.col(c).head(dn) = v.col(node_column(graph, graph.edges[edges[k]].from));
    x.col(c).tail(e.rows()) = e.col(edges[k]);
  }
  return x;
}

// Node pass of one iteration given e^l; fills the message/aggregation part of `it`.
Eigen::MatrixXd aggregate_nodes(const SparseGraph& graph, const MpnParameters& params, const Eigen::MatrixXd& v_prev,
                                const Eigen::MatrixXd& e_cur, trace::Iteration& it) {
  const Eigen::Index n_nodes = v_prev.cols();
  it.fwd_edges.clear();
  it.bwd_edges.clear();
  for (size_t k = 0; k < graph.edges.size(); ++k) {
    (graph.edges[k].from.on_t2() ? it.bwd_edges : it.fwd_edges).push_back(static_cast<int>(k));
  }
  it.msg_fwd = trace::stack_forward_cached(params.f_v_enc_fwd, message_input(graph, it.fwd_edges, v_prev, e_cur));
  it.msg_bwd = trace::stack_forward_cached(params.f_v_enc_bwd, message_input(graph, it.bwd_edges, v_prev, e_cur));

  Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(params.d_node, n_nodes);
  Eigen::VectorXd count = Eigen::VectorXd::Zero(n_nodes);
  auto scatter = [&](const std::vector<int>& edges, const Eigen::MatrixXd& msgs) {
    for (size_t k = 0; k < edges.size(); ++k) {
      const int dst = node_column(graph, graph.edges[edges[k]].to);
      sum.col(dst) += msgs.col(static_cast<Eigen::Index>(k));
      count(dst) += 1.0;
    }
  };
  scatter(it.fwd_edges, it.msg_fwd.second.output);
  scatter(it.bwd_edges, it.msg_bwd.second.output);

  it.inv_in_degree = Eigen::VectorXd::Zero(n_nodes);
  it.updated_nodes.clear();
  for (Eigen::Index j = 0; j < n_nodes; ++j) {
    if (count(j) > 0.0) {
      it.inv_in_degree(j) = 1.0 / count(j);
      it.updated_nodes.push_back(static_cast<int>(j));
    }
  }
  Eigen::MatrixXd mean(params.d_node, static_cast<Eigen::Index>(it.updated_nodes.size()));
  for (size_t k = 0; k < it.updated_nodes.size(); ++k) {
    const int j = it.updated_nodes[k];
    mean.col(static_cast<Eigen::Index>(k)) = sum.col(j) * it.inv_in_degree(j);
  }
  it.node_out = trace::fc_forward_cached(params.f_v_out, mean);

  Eigen::MatrixXd v_next = v_prev;
  for (size_t k = 0; k < it.updated_nodes.size(); ++k) {
    v_next.col(it.updated_nodes[k]) = it.node_out.output.col(static_cast<Eigen::Index>(k));
  }
  return v_next;
}

// Uniform in [-bound, bound) from the top 53 bits of the generator output.
double draw_symmetric(std::mt19937_64& rng, double bound) {
  const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  return (2.0 * u - 1.0) * bound;
}

FcBlock random_block(std::mt19937_64& rng, int in_dim, int out_dim) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(in_dim));
  auto draw = [&]() { return draw_symmetric(rng, bound); };
  FcBlock b = FcBlock::zeros(in_dim, out_dim);
  for (Eigen::Index i = 0; i < b.weight.size(); ++i) b.weight.data()[i] = draw();
  for (Eigen::Index i = 0; i < b.bias.size(); ++i) b.bias(i) = draw();
  b.ln_gain.setOnes();
  return b;
}

Affine random_affine(std::mt19937_64& rng, int in_dim) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(in_dim));
  auto draw = [&]() { return draw_symmetric(rng, bound); };
  Affine a;
  a.weight.resize(in_dim);
  for (Eigen::Index i = 0; i < a.weight.size(); ++i) a.weight(i) = draw();
  a.bias = draw();
  return a;
}

void push_block(std::vector<TensorView>& out, const std::string& name, FcBlock& b) {
  out.push_back({name + ".weight", b.weight.data(), static_cast<size_t>(b.weight.size())});
  out.push_back({name + ".bias", b.bias.data(), static_cast<size_t>(b.bias.size())});
  out.push_back({name + ".ln_gain", b.ln_gain.data(), static_cast<size_t>(b.ln_gain.size())});
  out.push_back({name + ".ln_bias", b.ln_bias.data(), static_cast<size_t>(b.ln_bias.size())});
}

void check_block(const FcBlock& b, int in_dim, int out_dim, const std::string& name) {
  if (b.weight.rows() != out_dim || b.weight.cols() != in_dim || b.bias.size() != out_dim ||
      b.ln_gain.size() != out_dim || b.ln_bias.size() != out_dim) {
    throw ConfigError("mpn parameters: tensor '" + name + "' has the wrong shape");
  }
}

}  // namespace

FcBlock FcBlock::zeros(int in_dim, int out_dim) {
  FcBlock b;
  b.weight = RowMatrix::Zero(out_dim, in_dim);
  b.bias = Eigen::VectorXd::Zero(out_dim);
  b.ln_gain = Eigen::VectorXd::Zero(out_dim);
  b.ln_bias = Eigen::VectorXd::Zero(out_dim);
  return b;
}

MpnParameters MpnParameters::zeros(int d_node, int d_edge) {
  MpnParameters p;
  p.d_node = d_node;
  p.d_edge = d_edge;
  p.f_enc = {FcBlock::zeros(kRawEdgeDim, d_edge), FcBlock::zeros(d_edge, d_edge)};
  p.f_e = {FcBlock::zeros(2 * d_node + 2 * d_edge, d_edge), FcBlock::zeros(d_edge, d_edge)};
  p.f_v_enc_fwd = {FcBlock::zeros(d_node + d_edge, d_node), FcBlock::zeros(d_node, d_node)};
  p.f_v_enc_bwd = p.f_v_enc_fwd;
  p.f_v_out = FcBlock::zeros(d_node, d_node);
  p.edge_classifier = {Eigen::VectorXd::Zero(d_edge), 0.0};
  p.node_classifier = {Eigen::VectorXd::Zero(d_node), 0.0};
  return p;
}

std::vector<TensorView> MpnParameters::tensors() {
  std::vector<TensorView> out;
  push_block(out, "f_enc[0]", f_enc[0]);
  push_block(out, "f_enc[1]", f_enc[1]);
  push_block(out, "f_e[0]", f_e[0]);
  push_block(out, "f_e[1]", f_e[1]);
  push_block(out, "f_v_enc_fwd[0]", f_v_enc_fwd[0]);
  push_block(out, "f_v_enc_fwd[1]", f_v_enc_fwd[1]);
  push_block(out, "f_v_enc_bwd[0]", f_v_enc_bwd[0]);
  push_block(out, "f_v_enc_bwd[1]", f_v_enc_bwd[1]);
  push_block(out, "f_v_out", f_v_out);
  out.push_back({"edge_classifier.weight", edge_classifier.weight.data(),
                 static_cast<size_t>(edge_classifier.weight.size())});
  out.push_back({"edge_classifier.bias", &edge_classifier.bias, 1});
  out.push_back({"node_classifier.weight", node_classifier.weight.data(),
                 static_cast<size_t>(node_classifier.weight.size())});
  out.push_back({"node_classifier.bias", &node_classifier.bias, 1});
  return out;
}

std::vector<ConstTensorView> MpnParameters::tensors() const {
  std::vector<ConstTensorView> out;
  for (const auto& t : const_cast<MpnParameters*>(this)->tensors()) out.push_back({t.name, t.data, t.size});
  return out;
}

size_t MpnParameters::parameter_count() const {
  size_t n = 0;
  for (const auto& t : tensors()) n += t.size;
  return n;
}

void MpnParameters::validate_shapes() const {
  if (d_node < 1 || d_edge < 1) throw ConfigError("mpn parameters: dimensions must be positive");
  check_block(f_enc[0], kRawEdgeDim, d_edge, "f_enc[0]");
  check_block(f_enc[1], d_edge, d_edge, "f_enc[1]");
  check_block(f_e[0], 2 * d_node + 2 * d_edge, d_edge, "f_e[0]");
  check_block(f_e[1], d_edge, d_edge, "f_e[1]");
  check_block(f_v_enc_fwd[0], d_node + d_edge, d_node, "f_v_enc_fwd[0]");
  check_block(f_v_enc_fwd[1], d_node, d_node, "f_v_enc_fwd[1]");
  check_block(f_v_enc_bwd[0], d_node + d_edge, d_node, "f_v_enc_bwd[0]");
  check_block(f_v_enc_bwd[1], d_node, d_node, "f_v_enc_bwd[1]");
  check_block(f_v_out, d_node, d_node, "f_v_out");
  if (edge_classifier.weight.size() != d_edge) throw ConfigError("mpn parameters: edge_classifier has the wrong shape");
  if (node_classifier.weight.size() != d_node) throw ConfigError("mpn parameters: node_classifier has the wrong shape");
}

void MpnParameters::add_scaled(const MpnParameters& other, double scale) {
  auto dst = tensors();
  const auto src = other.tensors();
  if (dst.size() != src.size()) throw ConfigError("add_scaled: parameter layouts differ");
  for (size_t t = 0; t < dst.size(); ++t) {
    if (dst[t].size != src[t].size) throw ConfigError("add_scaled: tensor '" + dst[t].name + "' differs in size");
    for (size_t i = 0; i < dst[t].size; ++i) dst[t].data[i] += scale * src[t].data[i];
  }
}

MpnParameters init_parameters(uint64_t seed, int d_node, int d_edge) {
  if (d_node < 1 || d_edge < 1) throw ConfigError("init_parameters: dimensions must be positive");
  std::mt19937_64 rng(seed);
  MpnParameters p;
  p.d_node = d_node;
  p.d_edge = d_edge;
  p.f_enc = {random_block(rng, kRawEdgeDim, d_edge), random_block(rng, d_edge, d_edge)};
  p.f_e = {random_block(rng, 2 * d_node + 2 * d_edge, d_edge), random_block(rng, d_edge, d_edge)};
  p.f_v_enc_fwd = {random_block(rng, d_node + d_edge, d_node), random_block(rng, d_node, d_node)};
  p.f_v_enc_bwd = {random_block(rng, d_node + d_edge, d_node), random_block(rng, d_node, d_node)};
  p.f_v_out = random_block(rng, d_node, d_node);
  p.edge_classifier = random_affine(rng, d_edge);
  p.node_classifier = random_affine(rng, d_node);
  return p;
}

Eigen::MatrixXd fc_forward(const FcBlock& block, const Eigen::MatrixXd& input) {
  return trace::fc_forward_cached(block, input).output;
}

Eigen::MatrixXd fc_stack_forward(const FcStack& stack, const Eigen::MatrixXd& input) {
  return fc_forward(stack[1], fc_forward(stack[0], input));
}

GraphState encode_edges(const SparseGraph& graph, const MpnParameters& params) {
  check_dims(graph, params);
  GraphState s;
  s.node_feats = initial_node_feats(graph, params.d_node);
  s.edge_feats_initial = std::make_shared<const Eigen::MatrixXd>(fc_stack_forward(params.f_enc, raw_feature_matrix(graph)));
  s.edge_feats = *s.edge_feats_initial;
  s.iteration = 0;
  return s;
}

GraphState edge_update(const GraphState& state, const SparseGraph& graph, const MpnParameters& params) {
  GraphState s = state;
  s.edge_feats = fc_stack_forward(params.f_e, edge_mlp_input(graph, state.node_feats, *state.edge_feats_initial,
                                                             state.edge_feats));
  s.iteration = state.iteration + 1;
  return s;
}

GraphState node_update(const GraphState& state, const SparseGraph& graph, const MpnParameters& params) {
  trace::Iteration scratch;
  GraphState s = state;
  s.node_feats = aggregate_nodes(graph, params, state.node_feats, state.edge_feats, scratch);
  return s;
}

MpnOutput forward(const SparseGraph& graph, const MpnParameters& params, int n_iter) {
  return trace::run(graph, params, n_iter).output;
}

namespace trace {

FcCache fc_forward_cached(const FcBlock& block, const Eigen::MatrixXd& input) {
  if (input.rows() != block.in_dim()) {
    throw ConfigError("fc block expects input dimension " + std::to_string(block.in_dim()) + ", got " +
                      std::to_string(input.rows()));
  }
  FcCache c;
  c.input = input;
  Eigen::MatrixXd z = block.weight * input;
  z.colwise() += block.bias;
  const double n = static_cast<double>(z.rows());
  c.normalized.resize(z.rows(), z.cols());
  c.inv_std.resize(z.cols());
  for (Eigen::Index k = 0; k < z.cols(); ++k) {
    const double mean = z.col(k).sum() / n;
    const Eigen::VectorXd centered = z.col(k).array() - mean;
    const double var = centered.squaredNorm() / n;
    c.inv_std(k) = 1.0 / std::sqrt(var + kLayerNormEps);
    c.normalized.col(k) = centered * c.inv_std(k);
  }
  c.output = ((c.normalized.array().colwise() * block.ln_gain.array()).colwise() + block.ln_bias.array()).cwiseMax(0.0);
  return c;
}

StackCache stack_forward_cached(const FcStack& stack, const Eigen::MatrixXd& input) {
  StackCache c;
  c.first = fc_forward_cached(stack[0], input);
  c.second = fc_forward_cached(stack[1], c.first.output);
  return c;
}

Eigen::MatrixXd fc_backward(const FcBlock& block, const FcCache& cache, const Eigen::MatrixXd& d_output,
                            FcBlock& grad) {
  const Eigen::MatrixXd d_ln = (cache.output.array() > 0.0).select(d_output, 0.0);
  grad.ln_gain += (d_ln.array() * cache.normalized.array()).rowwise().sum().matrix();
  grad.ln_bias += d_ln.rowwise().sum();
  const Eigen::MatrixXd d_norm = d_ln.array().colwise() * block.ln_gain.array();
  const double n = static_cast<double>(d_norm.rows());
  Eigen::MatrixXd d_z(d_norm.rows(), d_norm.cols());
  for (Eigen::Index k = 0; k < d_norm.cols(); ++k) {
    const double mean_d = d_norm.col(k).sum() / n;
    const double mean_dx = d_norm.col(k).dot(cache.normalized.col(k)) / n;
    d_z.col(k) = cache.inv_std(k) * (d_norm.col(k).array() - mean_d - cache.normalized.col(k).array() * mean_dx);
  }
  grad.weight += d_z * cache.input.transpose();
  grad.bias += d_z.rowwise().sum();
  return block.weight.transpose() * d_z;
}

Eigen::MatrixXd stack_backward(const FcStack& stack, const StackCache& cache, const Eigen::MatrixXd& d_output,
                               FcStack& grad) {
  const Eigen::MatrixXd d_mid = fc_backward(stack[1], cache.second, d_output, grad[1]);
  return fc_backward(stack[0], cache.first, d_mid, grad[0]);
}

Forward run(const SparseGraph& graph, const MpnParameters& params, int n_iter) {
  if (n_iter < 0) throw ConfigError("mpn: n_iter must be >= 0");
  check_dims(graph, params);
  Forward f;
  f.encoder = stack_forward_cached(params.f_enc, raw_feature_matrix(graph));
  f.node_feats.push_back(initial_node_feats(graph, params.d_node));
  f.edge_feats.push_back(f.encoder.second.output);
  f.iterations.resize(static_cast<size_t>(n_iter));
  for (int l = 0; l < n_iter; ++l) {
    auto& it = f.iterations[static_cast<size_t>(l)];
    it.edge_mlp = stack_forward_cached(
        params.f_e, edge_mlp_input(graph, f.node_feats.back(), f.edge_feats.front(), f.edge_feats.back()));
    f.edge_feats.push_back(it.edge_mlp.second.output);
    f.node_feats.push_back(aggregate_nodes(graph, params, f.node_feats.back(), f.edge_feats.back(), it));
  }

  const Eigen::MatrixXd& e_final = f.edge_feats.back();
  const Eigen::MatrixXd& v_final = f.node_feats.back();
  f.pair_feats.resize(params.d_edge, static_cast<Eigen::Index>(graph.pairs.size()));
  f.output.edge_scores.resize(graph.pairs.size());
  for (size_t p = 0; p < graph.pairs.size(); ++p) {
    const auto c = static_cast<Eigen::Index>(p);
    f.pair_feats.col(c) = 0.5 * (e_final.col(graph.pairs[p].forward_edge) + e_final.col(graph.pairs[p].backward_edge));
    f.output.edge_scores[p] = logistic(params.edge_classifier.weight.dot(f.pair_feats.col(c)) + params.edge_classifier.bias);
  }
  const auto n1 = static_cast<Eigen::Index>(graph.nodes_t1.size());
  f.output.node_scores_t2.resize(graph.nodes_t2.size());
  for (size_t j = 0; j < graph.nodes_t2.size(); ++j) {
    f.output.node_scores_t2[j] =
        logistic(params.node_classifier.weight.dot(v_final.col(n1 + static_cast<Eigen::Index>(j))) + params.node_classifier.bias);
  }
  return f;
}

}  // namespace trace

}  // namespace sparsetrack
