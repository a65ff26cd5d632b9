#include "sparsetrack/training.hpp"

namespace sparsetrack {

namespace {

LossValue loss_from_output(const LabeledPair& pair, const MpnOutput& out, const TrainConfig& cfg) {
  LossValue v;
  v.edge = edge_loss(out.edge_scores, pair.edge_labels, cfg);
  v.node = node_loss(out.node_scores_t2, pair.labels_t2, cfg);
  v.total = association_loss(v.edge, v.node, cfg);
  return v;
}

}  // namespace

LossValue evaluate_loss(const LabeledPair& pair, const MpnParameters& params, int n_iter, const TrainConfig& cfg) {
  return loss_from_output(pair, forward(pair.graph, params, n_iter), cfg);
}

GradientResult association_gradients(const LabeledPair& pair, const MpnParameters& params, int n_iter,
                                     const TrainConfig& cfg) {
  const SparseGraph& graph = pair.graph;
  const trace::Forward fwd = trace::run(graph, params, n_iter);
  GradientResult result{loss_from_output(pair, fwd.output, cfg), MpnParameters::zeros(params.d_node, params.d_edge)};
  MpnParameters& grad = result.gradient;

  const Eigen::Index n_nodes = fwd.node_feats.front().cols();
  const Eigen::Index n_edges = static_cast<Eigen::Index>(graph.edges.size());
  const Eigen::Index n1 = static_cast<Eigen::Index>(graph.nodes_t1.size());

  // Edge classifier on the direction-averaged final edge features.
  int eligible = 0;
  for (int e : pair.edge_labels.has_positive_end) eligible += e;
  Eigen::MatrixXd d_edge = Eigen::MatrixXd::Zero(params.d_edge, n_edges);
  if (eligible > 0) {
    const double scale = cfg.w_edge / eligible;
    for (size_t p = 0; p < graph.pairs.size(); ++p) {
      if (!pair.edge_labels.has_positive_end[p]) continue;
      const double es = fwd.output.edge_scores[p];
      const double d_logit =
          scale * focal_loss_derivative(es, pair.edge_labels.label[p], cfg.focal_gamma, cfg.focal_alpha) * es * (1.0 - es);
      const auto c = static_cast<Eigen::Index>(p);
      grad.edge_classifier.weight += d_logit * fwd.pair_feats.col(c);
      grad.edge_classifier.bias += d_logit;
      const Eigen::VectorXd d_pair = d_logit * params.edge_classifier.weight;
      d_edge.col(graph.pairs[p].forward_edge) += 0.5 * d_pair;
      d_edge.col(graph.pairs[p].backward_edge) += 0.5 * d_pair;
    }
  }

  // Node classifier on the final t2 node features.
  int positives = 0;
  for (int y : pair.labels_t2.positive) positives += y;
  Eigen::MatrixXd d_node = Eigen::MatrixXd::Zero(params.d_node, n_nodes);
  if (positives > 0) {
    const double scale = cfg.w_node / positives;
    const Eigen::MatrixXd& v_final = fwd.node_feats.back();
    for (size_t j = 0; j < graph.nodes_t2.size(); ++j) {
      const double ns = fwd.output.node_scores_t2[j];
      const double d_logit =
          scale * focal_loss_derivative(ns, pair.labels_t2.positive[j], cfg.focal_gamma, cfg.focal_alpha) * ns * (1.0 - ns);
      const Eigen::Index c = n1 + static_cast<Eigen::Index>(j);
      grad.node_classifier.weight += d_logit * v_final.col(c);
      grad.node_classifier.bias += d_logit;
      d_node.col(c) += d_logit * params.node_classifier.weight;
    }
  }

  // Iterations in reverse. d_edge / d_node hold gradients w.r.t. e^l / v^l.
  const Eigen::Index dn = params.d_node;
  const Eigen::Index de = params.d_edge;
  Eigen::MatrixXd d_initial = Eigen::MatrixXd::Zero(de, n_edges);
  for (int l = n_iter; l >= 1; --l) {
    const trace::Iteration& it = fwd.iterations[static_cast<size_t>(l - 1)];
    Eigen::MatrixXd d_node_prev = d_node;
    for (int j : it.updated_nodes) d_node_prev.col(j).setZero();

    Eigen::MatrixXd d_out(dn, static_cast<Eigen::Index>(it.updated_nodes.size()));
    for (size_t k = 0; k < it.updated_nodes.size(); ++k) d_out.col(static_cast<Eigen::Index>(k)) = d_node.col(it.updated_nodes[k]);
    const Eigen::MatrixXd d_mean = trace::fc_backward(params.f_v_out, it.node_out, d_out, grad.f_v_out);
    Eigen::MatrixXd d_sum = Eigen::MatrixXd::Zero(dn, n_nodes);
    for (size_t k = 0; k < it.updated_nodes.size(); ++k) {
      const int j = it.updated_nodes[k];
      d_sum.col(j) = d_mean.col(static_cast<Eigen::Index>(k)) * it.inv_in_degree(j);
    }

    auto messages_backward = [&](const std::vector<int>& edges, const FcStack& stack, const trace::StackCache& cache,
                                 FcStack& stack_grad) {
      Eigen::MatrixXd d_msg(dn, static_cast<Eigen::Index>(edges.size()));
      for (size_t k = 0; k < edges.size(); ++k) {
        d_msg.col(static_cast<Eigen::Index>(k)) = d_sum.col(node_column(graph, graph.edges[edges[k]].to));
      }
      const Eigen::MatrixXd d_in = trace::stack_backward(stack, cache, d_msg, stack_grad);
      for (size_t k = 0; k < edges.size(); ++k) {
        const auto c = static_cast<Eigen::Index>(k);
        d_node_prev.col(node_column(graph, graph.edges[edges[k]].from)) += d_in.col(c).head(dn);
        d_edge.col(edges[k]) += d_in.col(c).tail(de);
      }
    };
    messages_backward(it.fwd_edges, params.f_v_enc_fwd, it.msg_fwd, grad.f_v_enc_fwd);
    messages_backward(it.bwd_edges, params.f_v_enc_bwd, it.msg_bwd, grad.f_v_enc_bwd);

    const Eigen::MatrixXd d_in = trace::stack_backward(params.f_e, it.edge_mlp, d_edge, grad.f_e);
    Eigen::MatrixXd d_edge_prev(de, n_edges);
    for (Eigen::Index k = 0; k < n_edges; ++k) {
      const auto& edge = graph.edges[static_cast<size_t>(k)];
      d_node_prev.col(node_column(graph, edge.from)) += d_in.col(k).segment(0, dn);
      d_node_prev.col(node_column(graph, edge.to)) += d_in.col(k).segment(dn, dn);
      d_initial.col(k) += d_in.col(k).segment(2 * dn, de);
      d_edge_prev.col(k) = d_in.col(k).segment(2 * dn + de, de);
    }
    d_edge = std::move(d_edge_prev);
    d_node = std::move(d_node_prev);
  }
  // At l = 0 the running edge gradient refers to e^0 itself.
  d_initial += d_edge;
  trace::stack_backward(params.f_enc, fwd.encoder, d_initial, grad.f_enc);
  return result;
}

}  // namespace sparsetrack
