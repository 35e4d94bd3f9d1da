#include "gids/detector.hpp"

#include <sstream>

#include "doctest.h"
#include "gids/attack.hpp"

using namespace gids;

namespace {

// Discriminator with zero weights and a bias chosen so sigmoid(bias)
// equals the wanted score, independent of the input image.
nn::Model fixed_score_model(int rows, int cols, float score) {
  nn::Model m;
  nn::DenseT<float> l;
  l.in_dim = rows * cols;
  l.out_dim = 1;
  l.act = nn::Activation::Sigmoid;
  l.w.assign(static_cast<std::size_t>(l.in_dim), 0.0f);
  l.b = {std::log(score / (1.0f - score))};
  m.layers.push_back(l);
  nn::validate_model(m);
  return m;
}

CanImage blank_image(int rows, int cols) {
  CanImage img;
  img.rows = rows;
  img.cols = cols;
  img.pixels.assign(static_cast<std::size_t>(rows) * cols, 0);
  return img;
}

TrainedGids cascade_model(float d1_score, float d2_score, int input_size = 8) {
  EncoderConfig enc;
  enc.input_size = input_size;
  return TrainedGids{.d1 = fixed_score_model(input_size, 48, d1_score),
                     .d2 = fixed_score_model(input_size, 48, d2_score),
                     .g = std::nullopt,
                     .encoder_cfg = enc,
                     .detection_threshold = 0.1f};
}

}  // namespace

TEST_CASE("cascade fires stage one and skips d2") {
  auto model = cascade_model(0.05f, 0.9f);
  EvalCounters counters;
  Verdict v = classify(blank_image(8, 48), model, {}, &counters);
  CHECK(v.decision == Decision::Anomaly);
  CHECK(v.stage == Stage::FirstDiscriminator);
  CHECK(v.d1_score.has_value());
  CHECK(*v.d1_score == doctest::Approx(0.05).epsilon(1e-4));
  CHECK(!v.d2_score.has_value());
  CHECK(counters.d1_evals == 1);
  CHECK(counters.d2_evals == 0);
}

TEST_CASE("cascade falls through to stage two") {
  auto model = cascade_model(0.9f, 0.02f);
  EvalCounters counters;
  Verdict v = classify(blank_image(8, 48), model, {}, &counters);
  CHECK(v.decision == Decision::Anomaly);
  CHECK(v.stage == Stage::SecondDiscriminator);
  CHECK(*v.d2_score == doctest::Approx(0.02).epsilon(1e-3));
  CHECK(counters.d2_evals == 1);
}

TEST_CASE("both stages passing yields normal") {
  auto model = cascade_model(0.9f, 0.95f);
  Verdict v = classify(blank_image(8, 48), model);
  CHECK(v.decision == Decision::Normal);
  CHECK(v.stage == Stage::None);
  CHECK(v.d1_score.has_value());
  CHECK(v.d2_score.has_value());
}

TEST_CASE("missing d1 lets d2 decide alone") {
  auto model = cascade_model(0.9f, 0.05f);
  model.d1.reset();
  EvalCounters counters;
  Verdict v = classify(blank_image(8, 48), model, {}, &counters);
  CHECK(v.decision == Decision::Anomaly);
  CHECK(v.stage == Stage::SecondDiscriminator);
  CHECK(!v.d1_score.has_value());
  CHECK(counters.d1_evals == 0);
  CHECK(counters.d2_evals == 1);
}

TEST_CASE("verdict invariants hold over randomized score triples") {
  Rng rng(123);
  std::size_t d2_skips = 0;
  for (int rep = 0; rep < 10'000; ++rep) {
    const float d1 = static_cast<float>(rng.uniform01());
    const float d2 = static_cast<float>(rng.uniform01());
    const float th = 0.001f + 0.998f * static_cast<float>(rng.uniform01());
    const bool with_d1 = rng.below(8) != 0;

    std::size_t d2_evals = 0;
    Verdict v = cascade_decide(with_d1 ? std::optional<float>(d1) : std::nullopt,
                               [&]() {
                                 ++d2_evals;
                                 return d2;
                               },
                               th, th);

    CHECK((v.decision == Decision::Anomaly) == (v.stage != Stage::None));
    if (v.stage == Stage::FirstDiscriminator) {
      CHECK(*v.d1_score < th);
      CHECK(d2_evals == 0);  // short-circuit
      CHECK(!v.d2_score.has_value());
      ++d2_skips;
    }
    if (v.stage == Stage::SecondDiscriminator) {
      if (v.d1_score) CHECK(*v.d1_score >= th);
      CHECK(*v.d2_score < th);
      CHECK(d2_evals == 1);
    }
    if (v.stage == Stage::None) {
      if (v.d1_score) CHECK(*v.d1_score >= th);
      CHECK(*v.d2_score >= th);
    }
  }
  CHECK(d2_skips > 1000);  // the short-circuit path was actually exercised
}

TEST_CASE("per-stage threshold overrides") {
  auto model = cascade_model(0.2f, 0.2f);
  DetectorConfig cfg;
  cfg.d1_threshold = 0.5f;  // now d1 fires
  Verdict v = classify(blank_image(8, 48), model, cfg);
  CHECK(v.stage == Stage::FirstDiscriminator);

  cfg.d1_threshold = 0.1f;
  cfg.d2_threshold = 0.5f;  // d1 passes, d2 fires
  v = classify(blank_image(8, 48), model, cfg);
  CHECK(v.stage == Stage::SecondDiscriminator);
}

TEST_CASE("detect_stream on an empty stream") {
  auto model = cascade_model(0.9f, 0.9f, 64);
  auto res = detect_stream({}, model);
  CHECK(res.verdicts.empty());
  CHECK(res.stats.windows == 0);
  CHECK(res.stats.frames == 0);
}

TEST_CASE("detect_stream equals mapping classify over build_images") {
  auto profile = TrafficProfile::vehicle_default(3);
  auto log = gen_normal_traffic(profile, 3.0);
  auto spec = AttackSpec::dos(0.5, 2.0);
  auto attacked = inject_attack(log, spec);

  // Real (untrained) models so scores vary by image.
  EncoderConfig enc;
  TrainedGids model{.d1 = nn::make_discriminator(64, 48, 5),
                    .d2 = nn::make_discriminator(64, 48, 6),
                    .g = std::nullopt,
                    .encoder_cfg = enc,
                    .detection_threshold = 0.5f};

  auto res = detect_stream(attacked.frames, model);
  auto images = build_images(attacked, enc);
  REQUIRE(res.verdicts.size() == images.size());
  CHECK(res.stats.pending_frames == attacked.frames.size() - images.size() * 64);

  for (std::size_t i = 0; i < images.size(); ++i) {
    Verdict direct = classify(images[i], model);
    const Verdict& batched = res.verdicts[i];
    CHECK(batched.decision == direct.decision);
    CHECK(batched.stage == direct.stage);
    CHECK(batched.d1_score.has_value() == direct.d1_score.has_value());
    if (direct.d1_score) CHECK(*batched.d1_score == *direct.d1_score);
    CHECK(batched.d2_score.has_value() == direct.d2_score.has_value());
    if (direct.d2_score) CHECK(*batched.d2_score == *direct.d2_score);
  }
}

TEST_CASE("detect_stream enforces the short-circuit counter invariant") {
  auto profile = TrafficProfile::vehicle_default(4);
  auto log = gen_normal_traffic(profile, 3.0);
  auto model = cascade_model(0.05f, 0.9f, 64);  // d1 always fires
  auto res = detect_stream(log.frames, model);
  CHECK(res.stats.counters.d1_evals == res.verdicts.size());
  CHECK(res.stats.counters.d2_evals == 0);
}

TEST_CASE("verdict csv format with skipped stages") {
  std::vector<Verdict> vs;
  Verdict a;
  a.image_index = 0;
  a.first_frame_ts_us = 1500000;
  a.d1_score = 0.05f;
  a.decision = Decision::Anomaly;
  a.stage = Stage::FirstDiscriminator;
  vs.push_back(a);
  Verdict b;
  b.image_index = 1;
  b.first_frame_ts_us = 2000000;
  b.d2_score = 0.95f;
  b.decision = Decision::Normal;
  b.stage = Stage::None;
  vs.push_back(b);

  std::ostringstream out;
  write_verdicts_csv(vs, out);
  CHECK(out.str() ==
        "image_index,first_frame_ts,d1_score,d2_score,stage,decision\n"
        "0,1.500000,0.050000,,first_discriminator,anomaly\n"
        "1,2.000000,,0.950000,none,normal\n");
}
