#pragma once

#include <functional>
#include <optional>
#include <span>

#include "gids/gan.hpp"

namespace gids {

enum class Decision : std::uint8_t { Normal, Anomaly };
enum class Stage : std::uint8_t { None, FirstDiscriminator, SecondDiscriminator };

const char* stage_name(Stage s);
const char* decision_name(Decision d);

// Per-image cascade outcome. Scores are unset for stages that never ran:
// d1_score when the model has no first discriminator, d2_score when the
// first discriminator already fired.
struct Verdict {
  std::size_t image_index = 0;
  std::int64_t first_frame_ts_us = 0;
  std::optional<float> d1_score;
  std::optional<float> d2_score;
  Decision decision = Decision::Normal;
  Stage stage = Stage::None;
};

// Optional per-stage overrides of the model's shared threshold.
struct DetectorConfig {
  std::optional<float> d1_threshold;
  std::optional<float> d2_threshold;
};

struct EvalCounters {
  std::size_t d1_evals = 0;
  std::size_t d2_evals = 0;
};

// The cascade rule in isolation. d2_score() runs only when stage one
// passes (or is absent): a score below the threshold means anomaly.
Verdict cascade_decide(std::optional<float> d1_score, const std::function<float()>& d2_score,
                       float d1_threshold, float d2_threshold);

// Scores one binary image through the cascade. Pure in (image, model,
// thresholds); counters only observe which networks ran.
Verdict classify(const CanImage& image, const TrainedGids& model, const DetectorConfig& cfg = {},
                 EvalCounters* counters = nullptr);

struct StreamStats {
  std::size_t frames = 0;
  std::size_t windows = 0;
  std::size_t pending_frames = 0;  // incomplete tail, never zero-padded
  double seconds = 0.0;
  double frames_per_sec = 0.0;
  EvalCounters counters;
};

struct DetectResult {
  std::vector<Verdict> verdicts;
  StreamStats stats;
};

// Windows the frame stream per model.encoder_cfg and classifies every
// window, batching network evaluations. Verdicts are identical to
// mapping classify over build_images; stats cover encode + cascade.
DetectResult detect_stream(std::span<const CanFrame> frames, const TrainedGids& model,
                           const DetectorConfig& cfg = {});

// CSV: image_index,first_frame_ts,d1_score,d2_score,stage,decision with
// empty score fields for stages that were skipped.
void write_verdicts_csv(const std::vector<Verdict>& verdicts, std::ostream& out);

}  // namespace gids
