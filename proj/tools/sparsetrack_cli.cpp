#include "sparsetrack/config.hpp"
#include "sparsetrack/evaluate.hpp"
#include "sparsetrack/experiments.hpp"
#include "sparsetrack/mot_io.hpp"
#include "sparsetrack/pipeline.hpp"
#include "sparsetrack/synth.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <filesystem>
#include <iostream>
#include <optional>

using namespace sparsetrack;

namespace {

struct TrackerFlags {
  std::string config_path;
  std::optional<int> top_k;
  std::optional<double> tau_init, tau_edge, tau_node;
  std::optional<double> age_max_seconds;
  std::optional<int> age_max_frames, age_min_frames, n_iter, edges_per_criterion;
  std::optional<double> learning_rate;
  std::optional<std::string> optimizer;
  double fps = 30.0;
  bool no_recovery = false;
  bool no_node_gate = false;

  void add_to(CLI::App* app) {
    app->add_option("--config", config_path, "key=value configuration file (flags take precedence)");
    app->add_option("--K", top_k, "detections kept per frame");
    app->add_option("--tau-init", tau_init, "score threshold for new tracks");
    app->add_option("--tau-E", tau_edge, "edge-score acceptance threshold");
    app->add_option("--tau-N", tau_node, "node-score threshold for recovered detections");
    app->add_option("--age-max", age_max_seconds, "missing-track lifetime in seconds (uses --fps)");
    app->add_option("--age-max-frames", age_max_frames, "missing-track lifetime in frames");
    app->add_option("--age-min-frames", age_min_frames, "minimum track length before it may go missing");
    app->add_option("--n-iter", n_iter, "message-passing iterations");
    app->add_option("--edges-per-criterion", edges_per_criterion, "neighbors per selection criterion");
    app->add_option("--lr", learning_rate, "training step size");
    app->add_option("--optimizer", optimizer, "adam | gd");
    app->add_option("--fps", fps, "frame rate for second-based settings")->capture_default_str();
    app->add_flag("--no-recovery", no_recovery, "discard matched low-score detections");
    app->add_flag("--no-node-gate", no_node_gate, "accept recovered detections without the node-score check");
  }

  void apply(TrackerConfig& t, TrainConfig& r) const {
    if (!config_path.empty()) apply_config(read_config_file(config_path), t, r);
    if (top_k) t.top_k = *top_k;
    if (tau_init) t.tau_init = *tau_init;
    if (tau_edge) t.tau_edge = *tau_edge;
    if (tau_node) t.tau_node = *tau_node;
    if (age_max_seconds) t.age_max_frames = age_frames_from_seconds(*age_max_seconds, fps);
    if (age_max_frames) t.age_max_frames = *age_max_frames;
    if (age_min_frames) t.age_min_frames = *age_min_frames;
    if (n_iter) t.n_iter = *n_iter;
    if (edges_per_criterion) t.edges_per_criterion = *edges_per_criterion;
    if (learning_rate) r.learning_rate = *learning_rate;
    if (optimizer) r.optimizer = *optimizer;
    if (no_recovery) t.recovery = false;
    if (no_node_gate) t.node_gate = false;
    t.validate();
    r.validate();
  }
};

struct CorpusFlags {
  CorpusSpec spec;

  void add_to(CLI::App* app) {
    app->add_option("--sequences", spec.n_sequences, "synthetic sequences")->capture_default_str();
    app->add_option("--frames", spec.n_frames, "frames per sequence")->capture_default_str();
    app->add_option("--identities", spec.n_identities, "objects per sequence")->capture_default_str();
    app->add_option("--dip-fraction", spec.dip_fraction, "fraction of identities with a score dip")
        ->capture_default_str();
    app->add_option("--fp-rate", spec.false_positive_rate, "low-score false positives per object and frame")
        ->capture_default_str();
    app->add_option("--clutter", spec.clutter_per_frame, "background detections per frame")->capture_default_str();
    app->add_option("--embedding-dim", spec.embedding_dim, "embedding dimension (= d_node)")->capture_default_str();
  }
};

void print_reports(const std::vector<AblationRow>& rows) {
  for (const auto& row : rows) {
    std::cout << "== " << row.setting << '\n' << format_report_table(row.report) << format_report_kv(row.report);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sparse-graph multi-object tracker"};
  app.require_subcommand(1);

  // track
  auto* track = app.add_subcommand("track", "track a detection file or a synthetic sequence");
  std::string det_path, emb_path, params_path, out_path, events_path;
  std::optional<uint64_t> synth_seed;
  TrackerFlags track_flags;
  CorpusFlags track_corpus;
  track->add_option("--det", det_path, "MOT detection file");
  track->add_option("--emb", emb_path, "embedding sidecar");
  track->add_option("--synth-seed", synth_seed, "track one generated sequence instead of --det");
  track->add_option("--params", params_path, "parameter file")->required();
  track->add_option("--out", out_path, "results file")->required();
  track->add_option("--events", events_path, "recovered-flag sidecar");
  track_flags.add_to(track);
  track_corpus.add_to(track);

  // train
  auto* train = app.add_subcommand("train", "train the association network on synthetic pairs");
  uint64_t train_seed = 1;
  int train_steps = 500;
  PairSampling sampling;
  ModelRecipe recipe;
  std::string trace_path;
  TrackerFlags train_flags;
  CorpusFlags train_corpus;
  train->add_option("--seed", train_seed, "corpus, sampling and init seed")->capture_default_str();
  train->add_option("--steps", train_steps, "gradient steps")->capture_default_str();
  train->add_option("--pairs", sampling.n_pairs, "training pairs")->capture_default_str();
  train->add_option("--max-gap", sampling.max_gap, "largest frame gap inside a pair")->capture_default_str();
  train->add_option("--d-node", recipe.d_node, "node feature size")->capture_default_str();
  train->add_option("--d-edge", recipe.d_edge, "edge feature size")->capture_default_str();
  train->add_option("--out", params_path, "parameter file to write")->required();
  train->add_option("--trace", trace_path, "loss trace (step,loss)");
  train_flags.add_to(train);
  train_corpus.add_to(train);

  // eval
  auto* eval = app.add_subcommand("eval", "score a results file against ground truth");
  std::string results_path, gt_path;
  double iou_threshold = 0.5;
  eval->add_option("--results", results_path, "results file")->required();
  eval->add_option("--gt", gt_path, "ground-truth file")->required();
  eval->add_option("--iou", iou_threshold, "match threshold")->capture_default_str();

  // synth
  auto* synth = app.add_subcommand("synth", "write a synthetic sequence (det, emb, gt)");
  uint64_t synth_out_seed = 1;
  std::string out_dir;
  CorpusFlags synth_corpus;
  synth->add_option("--seed", synth_out_seed, "generator seed")->capture_default_str();
  synth->add_option("--out-dir", out_dir, "output directory")->required();
  synth_corpus.add_to(synth);

  // ablate
  auto* ablate = app.add_subcommand("ablate", "run an ablation preset on a seeded corpus");
  std::string preset;
  std::vector<std::string> values;
  uint64_t ablate_seed = 1;
  int ablate_steps = 300;
  TrackerFlags ablate_flags;
  CorpusFlags ablate_corpus;
  PairSampling ablate_sampling;
  ablate->add_option("preset", preset, "recovery | node_gate | n_iter | K | age")->required();
  ablate->add_option("values", values, "settings to compare")->required();
  ablate->add_option("--seed", ablate_seed, "corpus and training seed")->capture_default_str();
  ablate->add_option("--steps", ablate_steps, "gradient steps per trained model")->capture_default_str();
  ablate->add_option("--pairs", ablate_sampling.n_pairs, "training pairs")->capture_default_str();
  ablate_flags.add_to(ablate);
  ablate_corpus.add_to(ablate);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    std::cerr << app.help();
    return 1;
  }

  try {
    if (*track) {
      TrackerConfig cfg;
      TrainConfig tcfg;
      track_flags.apply(cfg, tcfg);
      const MpnParameters params = load_parameters_file(params_path);
      DetectionsByFrame dets;
      if (synth_seed) {
        dets = synth_generate(corpus_sequence_spec(track_corpus.spec, *synth_seed), *synth_seed).detections;
      } else if (!det_path.empty()) {
        std::optional<std::string> emb;
        if (!emb_path.empty()) emb = emb_path;
        auto loaded = load_mot(det_path, emb, params.d_node);
        for (const auto& w : loaded.warnings) std::cerr << "warning: " << w << '\n';
        dets = std::move(loaded.frames);
      } else {
        std::cerr << "track: give --det or --synth-seed\n" << track->help();
        return 1;
      }
      const auto start = std::chrono::steady_clock::now();
      const auto frames = run_tracker(dets, params, cfg);
      const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      write_results(frames, out_path);
      if (!events_path.empty()) write_events(frames, events_path);
      std::cerr << "tracked " << frames.size() << " frames in " << secs << " s\n";
      return 0;
    }

    if (*train) {
      TrackerConfig cfg;
      train_flags.apply(cfg, recipe.train);
      recipe.n_iter = cfg.n_iter;
      recipe.steps = train_steps;
      recipe.init_seed = train_seed;
      sampling.top_k = cfg.top_k;
      sampling.edges_per_criterion = cfg.edges_per_criterion;
      sampling.iou_threshold = recipe.train.iou_label_threshold;
      sampling.position_scale = cfg.position_scale;
      train_corpus.spec.embedding_dim = recipe.d_node;
      const Corpus corpus = make_corpus(train_corpus.spec, train_seed);
      const auto pairs = sample_training_pairs(corpus, sampling, train_seed + 1);
      TrainOptions options;
      options.steps = recipe.steps;
      options.n_iter = recipe.n_iter;
      const auto result = train_loop(pairs, init_parameters(recipe.init_seed, recipe.d_node, recipe.d_edge),
                                     recipe.train, options);
      save_parameters_file(result.params, params_path);
      if (!trace_path.empty()) write_text_file(trace_path, format_loss_trace(result.loss_trace));
      if (!result.loss_trace.empty()) {
        std::cout << "loss " << result.loss_trace.front() << " -> " << result.loss_trace.back() << '\n';
      }
      std::cout << "edge_accuracy=" << edge_accuracy(pairs, result.params, recipe.n_iter) << '\n';
      return 0;
    }

    if (*eval) {
      const EvalReport report = evaluate(load_results(results_path), load_gt(gt_path), iou_threshold);
      std::cout << format_report_table(report) << format_report_kv(report);
      return 0;
    }

    if (*synth) {
      const auto seq = synth_generate(corpus_sequence_spec(synth_corpus.spec, synth_out_seed), synth_out_seed);
      std::filesystem::create_directories(out_dir);
      const std::filesystem::path dir(out_dir);
      write_text_file((dir / "det.txt").string(), format_detections(seq.detections));
      write_text_file((dir / "emb.txt").string(), format_embeddings(seq.detections));
      write_text_file((dir / "gt.txt").string(), format_gt(seq.gt));
      return 0;
    }

    if (*ablate) {
      AblationInputs inputs;
      TrainConfig tcfg;
      ablate_flags.apply(inputs.base, tcfg);
      inputs.recipe.train = tcfg;
      inputs.recipe.steps = ablate_steps;
      inputs.recipe.n_iter = inputs.base.n_iter;
      inputs.recipe.d_node = ablate_corpus.spec.embedding_dim;
      inputs.recipe.init_seed = ablate_seed;
      inputs.sampling = ablate_sampling;
      inputs.sampling.top_k = inputs.base.top_k;
      inputs.sampling.edges_per_criterion = inputs.base.edges_per_criterion;
      inputs.sampling.iou_threshold = tcfg.iou_label_threshold;
      inputs.sampling.position_scale = inputs.base.position_scale;
      inputs.seed = ablate_seed;
      inputs.train_corpus = make_corpus(ablate_corpus.spec, ablate_seed);
      inputs.test_corpus = make_corpus(ablate_corpus.spec, ablate_seed + 1000);
      print_reports(run_ablation(preset, values, inputs, ablate_corpus.spec.fps));
      return 0;
    }
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
