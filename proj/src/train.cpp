#include "sparsetrack/training.hpp"

#include <cmath>
#include <sstream>

namespace sparsetrack {

TrainResult train_loop(const std::vector<LabeledPair>& dataset, MpnParameters params, const TrainConfig& cfg,
                       const TrainOptions& options) {
  cfg.validate();
  params.validate_shapes();
  if (options.steps < 0) throw ConfigError("train_loop: steps must be >= 0");
  TrainResult result;
  if (dataset.empty()) {
    result.params = std::move(params);
    return result;
  }
  const double inv_n = 1.0 / static_cast<double>(dataset.size());
  const bool adam = cfg.optimizer == "adam";
  MpnParameters first_moment = MpnParameters::zeros(params.d_node, params.d_edge);
  MpnParameters second_moment = first_moment;
  for (int step = 0; step < options.steps; ++step) {
    MpnParameters total = MpnParameters::zeros(params.d_node, params.d_edge);
    double loss = 0.0;
    for (const auto& pair : dataset) {
      const GradientResult g = association_gradients(pair, params, options.n_iter, cfg);
      loss += g.loss.total;
      total.add_scaled(g.gradient, 1.0);
    }
    loss *= inv_n;
    if (!std::isfinite(loss)) {
      throw DataError("train_loop: non-finite loss at step " + std::to_string(step));
    }
    result.loss_trace.push_back(loss);
    if (options.on_step) options.on_step(step, loss);
    if (!adam) {
      params.add_scaled(total, -cfg.learning_rate * inv_n);
      continue;
    }
    const double bias1 = 1.0 - std::pow(cfg.adam_beta1, step + 1);
    const double bias2 = 1.0 - std::pow(cfg.adam_beta2, step + 1);
    auto p = params.tensors();
    auto g = total.tensors();
    auto m = first_moment.tensors();
    auto v = second_moment.tensors();
    for (size_t t = 0; t < p.size(); ++t) {
      for (size_t k = 0; k < p[t].size; ++k) {
        const double grad = g[t].data[k] * inv_n;
        m[t].data[k] = cfg.adam_beta1 * m[t].data[k] + (1.0 - cfg.adam_beta1) * grad;
        v[t].data[k] = cfg.adam_beta2 * v[t].data[k] + (1.0 - cfg.adam_beta2) * grad * grad;
        p[t].data[k] -= cfg.learning_rate * (m[t].data[k] / bias1) / (std::sqrt(v[t].data[k] / bias2) + cfg.adam_eps);
      }
    }
  }
  result.params = std::move(params);
  return result;
}

std::string format_loss_trace(const std::vector<double>& trace) {
  std::ostringstream out;
  out.precision(10);
  for (size_t i = 0; i < trace.size(); ++i) out << i << ',' << trace[i] << '\n';
  return out.str();
}

double edge_accuracy(const std::vector<LabeledPair>& dataset, const MpnParameters& params, int n_iter,
                     double threshold) {
  long correct = 0;
  long total = 0;
  for (const auto& pair : dataset) {
    const MpnOutput out = forward(pair.graph, params, n_iter);
    for (size_t p = 0; p < out.edge_scores.size(); ++p) {
      if (!pair.edge_labels.has_positive_end[p]) continue;
      const int predicted = out.edge_scores[p] >= threshold ? 1 : 0;
      correct += predicted == pair.edge_labels.label[p] ? 1 : 0;
      ++total;
    }
  }
  return total == 0 ? 1.0 : static_cast<double>(correct) / static_cast<double>(total);
}

}  // namespace sparsetrack
