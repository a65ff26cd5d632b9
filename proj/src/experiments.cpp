#include "sparsetrack/experiments.hpp"

#include "sparsetrack/config.hpp"
#include "sparsetrack/pipeline.hpp"
#include "sparsetrack/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace sparsetrack {

SequenceSpec corpus_sequence_spec(const CorpusSpec& spec, uint64_t rng_seed) {
  Rng rng(rng_seed);
  SequenceSpec seq;
  seq.n_frames = spec.n_frames;
  seq.n_identities = spec.n_identities;
  seq.fps = spec.fps;
  seq.embedding_dim = spec.embedding_dim;
  seq.clutter_per_frame = spec.clutter_per_frame;
  seq.false_positive_rate = spec.false_positive_rate;

  const int n_dips = std::min(spec.n_identities, static_cast<int>(std::floor(spec.dip_fraction * spec.n_identities + 0.5)));
  std::vector<int> ids(spec.n_identities);
  std::iota(ids.begin(), ids.end(), 0);
  for (int i = 0; i < n_dips; ++i) {
    std::swap(ids[i], ids[rng.integer(i, spec.n_identities - 1)]);
    const int len = static_cast<int>(
        rng.integer(std::min(spec.dip_min_frames, spec.n_frames), std::min(spec.dip_max_frames, spec.n_frames)));
    OcclusionEvent e;
    e.identity = ids[i];
    e.start_frame = static_cast<int>(rng.integer(0, spec.n_frames - len));
    e.end_frame = e.start_frame + len;
    e.score_during = rng.uniform(spec.dip_score_min, spec.dip_score_max);
    e.visibility_during = rng.uniform(spec.dip_visibility_min, spec.dip_visibility_max);
    seq.occlusion_events.push_back(e);
  }
  return seq;
}

Corpus make_corpus(const CorpusSpec& spec, uint64_t seed) {
  Rng rng(seed);
  Corpus corpus;
  for (int s = 0; s < spec.n_sequences; ++s) {
    const uint64_t spec_seed = rng.next();
    const uint64_t data_seed = rng.next();
    corpus.push_back(synth_generate(corpus_sequence_spec(spec, spec_seed), data_seed));
  }
  return corpus;
}

std::vector<LabeledPair> sample_training_pairs(const Corpus& corpus, const PairSampling& sampling, uint64_t seed) {
  if (corpus.empty()) throw ConfigError("sample_training_pairs: empty corpus");
  Rng rng(seed);
  std::vector<LabeledPair> pairs;
  int attempts = 0;
  while (static_cast<int>(pairs.size()) < sampling.n_pairs) {
    if (++attempts > 100 * std::max(1, sampling.n_pairs)) throw DataError("sample_training_pairs: corpus too short");
    const auto& seq = corpus[rng.integer(0, static_cast<int64_t>(corpus.size()) - 1)];
    const int64_t first = seq.detections.begin()->first;
    const int64_t last = seq.detections.rbegin()->first;
    const int64_t gap = rng.integer(1, sampling.max_gap);
    if (last - first < gap) continue;
    const int64_t t1 = rng.integer(first, last - gap);
    const int64_t t2 = t1 + gap;
    const auto d1 = seq.detections.find(t1);
    const auto d2 = seq.detections.find(t2);
    const auto g1 = seq.gt.find(t1);
    const auto g2 = seq.gt.find(t2);
    if (d1 == seq.detections.end() || d2 == seq.detections.end() || g1 == seq.gt.end() || g2 == seq.gt.end()) continue;
    if (d1->second.empty() || d2->second.empty()) continue;
    pairs.push_back(make_labeled_pair(top_k(d1->second, sampling.top_k), g1->second, top_k(d2->second, sampling.top_k),
                                      g2->second, sampling.edges_per_criterion, sampling.iou_threshold,
                                      sampling.position_scale));
  }
  return pairs;
}

TrainResult train_model(const std::vector<LabeledPair>& pairs, const ModelRecipe& recipe) {
  TrainOptions options;
  options.steps = recipe.steps;
  options.n_iter = recipe.n_iter;
  return train_loop(pairs, init_parameters(recipe.init_seed, recipe.d_node, recipe.d_edge), recipe.train, options);
}

EvalReport evaluate_corpus(const Corpus& corpus, const MpnParameters& params, const TrackerConfig& cfg) {
  std::vector<EvalReport> reports;
  for (const auto& seq : corpus) {
    const auto frames = run_tracker(seq.detections, params, cfg);
    reports.push_back(evaluate(results_by_frame(frames), seq.gt));
  }
  return combine_reports(reports);
}

namespace {

bool parse_switch(const std::string& v) {
  if (v == "on" || v == "1" || v == "true") return true;
  if (v == "off" || v == "0" || v == "false") return false;
  throw ConfigError("ablation: expected on/off, got '" + v + "'");
}

int parse_int(const std::string& v) {
  try {
    size_t used = 0;
    const int x = std::stoi(v, &used);
    if (used == v.size()) return x;
  } catch (const std::exception&) {
  }
  throw ConfigError("ablation: expected an integer, got '" + v + "'");
}

double parse_real(const std::string& v) {
  try {
    size_t used = 0;
    const double x = std::stod(v, &used);
    if (used == v.size()) return x;
  } catch (const std::exception&) {
  }
  throw ConfigError("ablation: expected a number, got '" + v + "'");
}

}  // namespace

std::vector<AblationRow> run_ablation(const std::string& name, const std::vector<std::string>& values,
                                      const AblationInputs& inputs, double fps) {
  static const std::vector<std::string> kPresets{"recovery", "node_gate", "n_iter", "K", "age"};
  if (std::find(kPresets.begin(), kPresets.end(), name) == kPresets.end()) {
    throw ConfigError("ablation: unknown preset '" + name + "'");
  }
  if (values.empty()) throw ConfigError("ablation: no values given");

  const auto pairs = sample_training_pairs(inputs.train_corpus, inputs.sampling, inputs.seed);
  MpnParameters shared;
  if (name != "n_iter") shared = train_model(pairs, inputs.recipe).params;

  std::vector<AblationRow> rows;
  for (const auto& v : values) {
    TrackerConfig cfg = inputs.base;
    MpnParameters params = shared;
    cfg.n_iter = inputs.recipe.n_iter;
    if (name == "recovery") {
      cfg.recovery = parse_switch(v);
    } else if (name == "node_gate") {
      cfg.node_gate = parse_switch(v);
    } else if (name == "K") {
      cfg.top_k = parse_int(v);
    } else if (name == "age") {
      cfg.age_max_frames = age_frames_from_seconds(parse_real(v), fps);
    } else {
      ModelRecipe recipe = inputs.recipe;
      recipe.n_iter = parse_int(v);
      cfg.n_iter = recipe.n_iter;
      params = train_model(pairs, recipe).params;
    }
    cfg.validate();
    rows.push_back({name + "=" + v, evaluate_corpus(inputs.test_corpus, params, cfg)});
  }
  return rows;
}

}  // namespace sparsetrack
