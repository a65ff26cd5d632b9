#include "sparsetrack/training.hpp"

#include <algorithm>
#include <cmath>

namespace sparsetrack {

double focal_loss(double p, int y, double gamma, double alpha) {
  const double q = std::clamp(p, kFocalEps, 1.0 - kFocalEps);
  if (y == 1) return -alpha * std::pow(1.0 - q, gamma) * std::log(q);
  return -(1.0 - alpha) * std::pow(q, gamma) * std::log(1.0 - q);
}

double focal_loss_derivative(double p, int y, double gamma, double alpha) {
  if (p < kFocalEps || p > 1.0 - kFocalEps) return 0.0;
  if (y == 1) {
    const double r = 1.0 - p;
    const double pow_term = gamma == 0.0 ? 0.0 : gamma * std::pow(r, gamma - 1.0) * std::log(p);
    return -alpha * (-pow_term + std::pow(r, gamma) / p);
  }
  const double pow_term = gamma == 0.0 ? 0.0 : gamma * std::pow(p, gamma - 1.0) * std::log(1.0 - p);
  return -(1.0 - alpha) * (pow_term - std::pow(p, gamma) / (1.0 - p));
}

double edge_loss(const std::vector<double>& edge_scores, const EdgeLabels& labels, const TrainConfig& cfg) {
  if (edge_scores.size() != labels.label.size()) throw ConfigError("edge_loss: scores and labels differ in length");
  double sum = 0.0;
  int eligible = 0;
  for (size_t p = 0; p < edge_scores.size(); ++p) {
    if (!labels.has_positive_end[p]) continue;
    sum += focal_loss(edge_scores[p], labels.label[p], cfg.focal_gamma, cfg.focal_alpha);
    ++eligible;
  }
  return eligible == 0 ? 0.0 : sum / eligible;
}

double node_loss(const std::vector<double>& node_scores_t2, const NodeLabels& labels_t2, const TrainConfig& cfg) {
  if (node_scores_t2.size() != labels_t2.positive.size()) {
    throw ConfigError("node_loss: scores and labels differ in length");
  }
  double sum = 0.0;
  int positives = 0;
  for (size_t j = 0; j < node_scores_t2.size(); ++j) {
    sum += focal_loss(node_scores_t2[j], labels_t2.positive[j], cfg.focal_gamma, cfg.focal_alpha);
    positives += labels_t2.positive[j];
  }
  return positives == 0 ? 0.0 : sum / positives;
}

double association_loss(double edge_loss_value, double node_loss_value, const TrainConfig& cfg) {
  return cfg.w_edge * edge_loss_value + cfg.w_node * node_loss_value;
}

}  // namespace sparsetrack
