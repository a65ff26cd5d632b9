#pragma once

// Seeded synthetic corpora, training-pair sampling, model training and
// the ablation presets shared by the CLI and the acceptance suite.

#include "sparsetrack/evaluate.hpp"
#include "sparsetrack/synth.hpp"
#include "sparsetrack/training.hpp"

#include <string>
#include <vector>

namespace sparsetrack {

struct CorpusSpec {
  int n_sequences = 20;
  int n_frames = 200;
  int n_identities = 10;
  double fps = 30.0;
  // Score dips: a fraction of identities per sequence (rounded half up)
  // gets one event of random length with low scores and visibility.
  double dip_fraction = 0.25;
  int dip_min_frames = 30;
  int dip_max_frames = 60;
  double dip_score_min = 0.25;
  double dip_score_max = 0.35;
  double dip_visibility_min = 0.2;
  double dip_visibility_max = 0.5;
  double false_positive_rate = 0.0;
  int clutter_per_frame = 5;
  int embedding_dim = 16;
};

using Corpus = std::vector<SyntheticSequence>;

/// Per-sequence spec with dip events drawn from `rng_seed`.
SequenceSpec corpus_sequence_spec(const CorpusSpec& spec, uint64_t rng_seed);
Corpus make_corpus(const CorpusSpec& spec, uint64_t seed);

struct PairSampling {
  int n_pairs = 50;
  int max_gap = 30;
  int top_k = 100;
  int edges_per_criterion = 10;
  double iou_threshold = 0.5;
  double position_scale = TrackerConfig{}.position_scale;
};

/// Random (sequence, frame, gap) draws; top-K detections on both sides.
std::vector<LabeledPair> sample_training_pairs(const Corpus& corpus, const PairSampling& sampling, uint64_t seed);

struct ModelRecipe {
  int d_node = 16;
  int d_edge = 16;
  int n_iter = 3;
  int steps = 500;
  uint64_t init_seed = 1;
  TrainConfig train;
};

TrainResult train_model(const std::vector<LabeledPair>& pairs, const ModelRecipe& recipe);

/// Tracks every sequence and pools the per-sequence reports.
EvalReport evaluate_corpus(const Corpus& corpus, const MpnParameters& params, const TrackerConfig& cfg);

struct AblationRow {
  std::string setting;
  EvalReport report;
};

struct AblationInputs {
  Corpus train_corpus;
  Corpus test_corpus;
  TrackerConfig base;
  ModelRecipe recipe;
  PairSampling sampling;
  uint64_t seed = 0;
};

/// Presets: "recovery" (on/off), "node_gate" (on/off), "n_iter" (retrains
/// per value), "K", "age" (seconds, converted with the corpus frame rate).
std::vector<AblationRow> run_ablation(const std::string& name, const std::vector<std::string>& values,
                                      const AblationInputs& inputs, double fps);

}  // namespace sparsetrack
