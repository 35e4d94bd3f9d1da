#include "gids/detector.hpp"

#include <chrono>
#include <ostream>

namespace gids {

const char* stage_name(Stage s) {
  switch (s) {
    case Stage::None: return "none";
    case Stage::FirstDiscriminator: return "first_discriminator";
    case Stage::SecondDiscriminator: return "second_discriminator";
  }
  return "?";
}

const char* decision_name(Decision d) {
  return d == Decision::Anomaly ? "anomaly" : "normal";
}

Verdict cascade_decide(std::optional<float> d1_score, const std::function<float()>& d2_score,
                       float d1_threshold, float d2_threshold) {
  Verdict v;
  v.d1_score = d1_score;
  if (d1_score && *d1_score < d1_threshold) {
    v.decision = Decision::Anomaly;
    v.stage = Stage::FirstDiscriminator;
    return v;  // second stage never runs
  }
  float s2 = d2_score();
  v.d2_score = s2;
  if (s2 < d2_threshold) {
    v.decision = Decision::Anomaly;
    v.stage = Stage::SecondDiscriminator;
  } else {
    v.decision = Decision::Normal;
    v.stage = Stage::None;
  }
  return v;
}

namespace {

float resolved_th(const std::optional<float>& override_th, const TrainedGids& model) {
  return override_th ? *override_th : model.detection_threshold;
}

}  // namespace

Verdict classify(const CanImage& image, const TrainedGids& model, const DetectorConfig& cfg,
                 EvalCounters* counters) {
  const float th1 = resolved_th(cfg.d1_threshold, model);
  const float th2 = resolved_th(cfg.d2_threshold, model);

  std::optional<float> s1;
  if (model.d1) {
    s1 = score_images(*model.d1, {image}).at(0);
    if (counters) ++counters->d1_evals;
  }
  return cascade_decide(
      s1,
      [&]() {
        if (counters) ++counters->d2_evals;
        return score_images(model.d2, {image}).at(0);
      },
      th1, th2);
}

DetectResult detect_stream(std::span<const CanFrame> frames, const TrainedGids& model,
                           const DetectorConfig& cfg) {
  model.validate();
  const float th1 = resolved_th(cfg.d1_threshold, model);
  const float th2 = resolved_th(cfg.d2_threshold, model);

  DetectResult res;
  res.stats.frames = frames.size();
  const auto t0 = std::chrono::steady_clock::now();

  CanLog view;
  view.frames.assign(frames.begin(), frames.end());
  auto images = build_images(view, model.encoder_cfg);
  res.stats.windows = images.size();
  res.stats.pending_frames =
      images.empty() ? frames.size()
                     : frames.size() - (images.back().first_frame + images.back().frame_count);

  // Batched cascade: score a chunk through D1 in one matmul, then only
  // the windows D1 passed through D2. Chunking keeps throughput linear
  // in stream length.
  const std::size_t chunk = 256;
  res.verdicts.reserve(images.size());
  for (std::size_t lo = 0; lo < images.size(); lo += chunk) {
    const std::size_t hi = std::min(images.size(), lo + chunk);
    std::vector<CanImage> batch(images.begin() + static_cast<std::ptrdiff_t>(lo),
                                images.begin() + static_cast<std::ptrdiff_t>(hi));

    std::vector<float> s1;
    if (model.d1) {
      s1 = score_images(*model.d1, batch);
      res.stats.counters.d1_evals += batch.size();
    }

    std::vector<std::size_t> need_d2;
    for (std::size_t i = 0; i < batch.size(); ++i)
      if (!model.d1 || s1[i] >= th1) need_d2.push_back(i);

    std::vector<float> s2;
    if (!need_d2.empty()) {
      std::vector<CanImage> d2_batch;
      d2_batch.reserve(need_d2.size());
      for (std::size_t i : need_d2) d2_batch.push_back(batch[i]);
      s2 = score_images(model.d2, d2_batch);
      res.stats.counters.d2_evals += need_d2.size();
    }

    std::size_t d2_pos = 0;
    for (std::size_t i = 0; i < batch.size(); ++i) {
      Verdict v;
      v.image_index = lo + i;
      v.first_frame_ts_us = view.frames[batch[i].first_frame].ts_us;
      if (model.d1) v.d1_score = s1[i];
      if (model.d1 && s1[i] < th1) {
        v.decision = Decision::Anomaly;
        v.stage = Stage::FirstDiscriminator;
      } else {
        float score2 = s2[d2_pos++];
        v.d2_score = score2;
        if (score2 < th2) {
          v.decision = Decision::Anomaly;
          v.stage = Stage::SecondDiscriminator;
        }
      }
      res.verdicts.push_back(v);
    }
  }

  const auto t1 = std::chrono::steady_clock::now();
  res.stats.seconds = std::chrono::duration<double>(t1 - t0).count();
  res.stats.frames_per_sec =
      res.stats.seconds > 0.0 ? static_cast<double>(res.stats.frames) / res.stats.seconds : 0.0;
  return res;
}

void write_verdicts_csv(const std::vector<Verdict>& verdicts, std::ostream& out) {
  out << "image_index,first_frame_ts,d1_score,d2_score,stage,decision\n";
  char buf[32];
  for (const Verdict& v : verdicts) {
    out << v.image_index << ',' << format_timestamp(v.first_frame_ts_us) << ',';
    if (v.d1_score) {
      std::snprintf(buf, sizeof buf, "%.6f", static_cast<double>(*v.d1_score));
      out << buf;
    }
    out << ',';
    if (v.d2_score) {
      std::snprintf(buf, sizeof buf, "%.6f", static_cast<double>(*v.d2_score));
      out << buf;
    }
    out << ',' << stage_name(v.stage) << ',' << decision_name(v.decision) << '\n';
  }
  if (!out) throw Error(ErrorKind::SinkFailure, "verdict write failed");
}

}  // namespace gids
