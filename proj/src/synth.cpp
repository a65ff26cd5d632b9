#include "sparsetrack/synth.hpp"

#include "sparsetrack/geometry.hpp"
#include "sparsetrack/rng.hpp"

#include <algorithm>
#include <cmath>

namespace sparsetrack {

void SequenceSpec::validate() const {
  if (n_frames < 1) throw ConfigError("SequenceSpec: n_frames must be >= 1");
  if (n_identities < 0) throw ConfigError("SequenceSpec: n_identities must be >= 0");
  if (embedding_dim < 1) throw ConfigError("SequenceSpec: embedding_dim must be >= 1");
  if (image_w <= 0.0 || image_h <= 0.0) throw ConfigError("SequenceSpec: image size must be positive");
  if (!motion.empty() && static_cast<int>(motion.size()) != n_identities) {
    throw ConfigError("SequenceSpec: motion must list every identity or none");
  }
  if (score_min > score_max || fp_score_min > fp_score_max) throw ConfigError("SequenceSpec: empty score range");
  if (false_positive_rate < 0.0 || false_positive_rate > 1.0) throw ConfigError("SequenceSpec: false_positive_rate outside [0,1]");
  if (fp_shift_min < 0.0 || fp_shift_min > fp_shift_max) throw ConfigError("SequenceSpec: bad fp shift range");
  if (fp_similarity < 0.0 || fp_similarity > 1.0) throw ConfigError("SequenceSpec: fp_similarity outside [0,1]");
  for (const auto& e : occlusion_events) {
    if (e.identity < 0 || e.identity >= n_identities) throw ConfigError("SequenceSpec: event identity out of range");
    if (e.start_frame < 0 || e.end_frame > n_frames || e.start_frame > e.end_frame) {
      throw ConfigError("SequenceSpec: event frames outside [0, n_frames)");
    }
    if (e.score_during < 0.0 || e.score_during > 1.0) throw ConfigError("SequenceSpec: score_during outside [0,1]");
  }
}

namespace {

Embedding random_unit(Rng& rng, int dim) {
  Embedding v(dim);
  for (int k = 0; k < dim; ++k) v(k) = rng.normal();
  const double n = v.norm();
  return n > 0.0 ? Embedding(v / n) : v;
}

Embedding noisy(const Embedding& base, double stddev, Rng& rng) {
  Embedding v = base;
  for (Eigen::Index k = 0; k < v.size(); ++k) v(k) += stddev * rng.normal();
  const double n = v.norm();
  return n > 0.0 ? Embedding(v / n) : v;
}

BBox random_person_box(Rng& rng, double image_w, double image_h) {
  const double w = rng.uniform(30.0, 60.0);
  const double h = 2.5 * w;
  return BBox::from_ltwh(rng.uniform(0.0, image_w - w), rng.uniform(0.0, image_h - h), w, h);
}

const OcclusionEvent* active_event(const std::vector<OcclusionEvent>& events, int identity, int frame) {
  for (const auto& e : events) {
    if (e.identity == identity && frame >= e.start_frame && frame < e.end_frame) return &e;
  }
  return nullptr;
}

}  // namespace

SyntheticSequence synth_generate(const SequenceSpec& spec, uint64_t seed) {
  spec.validate();
  Rng rng(seed);
  const int n = spec.n_identities;

  std::vector<IdentityMotion> motion = spec.motion;
  if (motion.empty()) {
    for (int i = 0; i < n; ++i) {
      IdentityMotion m;
      m.initial = random_person_box(rng, spec.image_w, spec.image_h);
      m.vx = rng.uniform(-spec.velocity_max, spec.velocity_max);
      m.vy = rng.uniform(-spec.velocity_max, spec.velocity_max);
      motion.push_back(m);
    }
  }
  std::vector<Embedding> identity_emb;
  for (int i = 0; i < n; ++i) identity_emb.push_back(random_unit(rng, spec.embedding_dim));

  std::vector<BBox> boxes;
  for (const auto& m : motion) boxes.push_back(m.initial);

  SyntheticSequence seq;
  for (int f = 0; f < spec.n_frames; ++f) {
    const int64_t frame = f + 1;
    if (f > 0) {
      for (int i = 0; i < n; ++i) {
        auto& m = motion[i];
        BBox& b = boxes[i];
        const double w = b.width();
        const double h = b.height();
        double x = b.x_left + m.vx;
        double y = b.y_top + m.vy;
        if (x < 0.0 || x + w > spec.image_w) {
          m.vx = -m.vx;
          x = std::clamp(x, 0.0, std::max(0.0, spec.image_w - w));
        }
        if (y < 0.0 || y + h > spec.image_h) {
          m.vy = -m.vy;
          y = std::clamp(y, 0.0, std::max(0.0, spec.image_h - h));
        }
        b = BBox::from_ltwh(x, y, w, h);
      }
    }

    auto& dets = seq.detections[frame];
    auto& gts = seq.gt[frame];
    for (int i = 0; i < n; ++i) {
      const BBox& b = boxes[i];
      // Objects lower in the image are closer to the camera and occlude.
      double covered = 0.0;
      for (int j = 0; j < n; ++j) {
        if (j == i || boxes[j].y_bottom <= b.y_bottom) continue;
        const double ix = std::max(0.0, std::min(b.x_right, boxes[j].x_right) - std::max(b.x_left, boxes[j].x_left));
        const double iy = std::max(0.0, std::min(b.y_bottom, boxes[j].y_bottom) - std::max(b.y_top, boxes[j].y_top));
        covered = std::max(covered, ix * iy / b.area());
      }
      const OcclusionEvent* ev = active_event(spec.occlusion_events, i, f);
      GtObject g;
      g.id = i + 1;
      g.box = b;
      g.visibility = ev ? ev->visibility_during : std::clamp(1.0 - covered, 0.0, 1.0);
      gts.push_back(g);

      if (!ev || ev->score_during > 0.0) {
        Detection d;
        d.frame = frame;
        const double s = spec.box_noise_std;
        d.box = {b.x_left + rng.normal(0.0, s), b.y_top + rng.normal(0.0, s), b.x_right + rng.normal(0.0, s),
                 b.y_bottom + rng.normal(0.0, s)};
        if (d.box.x_right < d.box.x_left) std::swap(d.box.x_left, d.box.x_right);
        if (d.box.y_bottom < d.box.y_top) std::swap(d.box.y_top, d.box.y_bottom);
        d.score = ev ? ev->score_during : rng.uniform(spec.score_min, spec.score_max);
        d.embedding = noisy(identity_emb[i], ev ? 2.0 * spec.embedding_noise_std : spec.embedding_noise_std, rng);
        dets.push_back(std::move(d));
      }

      if (spec.false_positive_rate > 0.0 && rng.bernoulli(spec.false_positive_rate)) {
        for (int attempt = 0; attempt < 5; ++attempt) {
          const double side = rng.bernoulli(0.5) ? 1.0 : -1.0;
          const double dx = side * rng.uniform(spec.fp_shift_min, spec.fp_shift_max) * b.width();
          const double dy = rng.uniform(-0.1, 0.1) * b.height();
          const BBox ghost{b.x_left + dx, b.y_top + dy, b.x_right + dx, b.y_bottom + dy};
          bool clear = true;
          for (const auto& other : boxes) clear = clear && iou(ghost, other) < 0.5;
          if (!clear) continue;
          Detection fp;
          fp.frame = frame;
          fp.box = ghost;
          fp.score = rng.uniform(spec.fp_score_min, spec.fp_score_max);
          const double a = spec.fp_similarity;
          Embedding e = a * identity_emb[i] + std::sqrt(std::max(0.0, 1.0 - a * a)) * random_unit(rng, spec.embedding_dim);
          fp.embedding = noisy(e, spec.embedding_noise_std, rng);
          dets.push_back(std::move(fp));
          break;
        }
      }
    }

    for (int c = 0; c < spec.clutter_per_frame; ++c) {
      Detection d;
      d.frame = frame;
      d.box = random_person_box(rng, spec.image_w, spec.image_h);
      d.score = rng.uniform(0.01, spec.clutter_score_max);
      d.embedding = random_unit(rng, spec.embedding_dim);
      dets.push_back(std::move(d));
    }
  }
  return seq;
}

}  // namespace sparsetrack
