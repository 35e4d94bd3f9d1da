// Acceptance suite: one check per release criterion, one line of output
// each, nonzero exit if any fail. Heavier checks train real models on a
// synthetic corpus; expect the full run to take tens of minutes.

#include <chrono>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "gids/attack.hpp"
#include "gids/detector.hpp"
#include "gids/eval.hpp"
#include "gids/gan.hpp"

using namespace gids;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

double now_s() {
  return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

std::string fmt(const char* f, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return buf;
}

// ---------------------------------------------------------------- corpus

struct Corpus {
  CanLog train_normal;       // attack-free training capture
  CanLog held_normal;        // attack-free, unseen seed
  struct AttackSet {
    std::string name;
    CanLog log;  // labeled, attack window inside
  };
  std::vector<AttackSet> tests;

  static Corpus build(double train_s, double test_s, std::uint64_t seed) {
    Corpus c;
    auto profile = TrafficProfile::vehicle_default(seed);
    c.train_normal = gen_normal_traffic(profile, train_s);
    auto held_profile = profile;
    held_profile.seed = mix64(seed) ^ 0x9999ULL;
    c.held_normal = gen_normal_traffic(held_profile, test_s * 0.7);

    auto base_profile = profile;
    base_profile.seed = mix64(seed) ^ 0x7777ULL;
    auto base = gen_normal_traffic(base_profile, test_s);
    const double a = test_s * 0.25, b = test_s * 0.75;
    c.tests.push_back({"dos", inject_attack(base, AttackSpec::dos(a, b))});
    c.tests.push_back({"fuzzy", inject_attack(base, AttackSpec::fuzzy(a, b, mix64(seed) ^ 5))});
    c.tests.push_back({"rpm", inject_attack(base, AttackSpec::targeted(0x316, a, b))});
    c.tests.push_back({"gear", inject_attack(base, AttackSpec::targeted(0x43f, a, b))});
    return c;
  }
};

// ------------------------------------------------------------ criteria

Outcome c1_encoding() {
  const double t0 = now_s();
  Rng rng(101);
  for (int i = 0; i < 10'000; ++i) {
    CanId id = static_cast<CanId>(rng.below(kMaxCanId + 1));
    auto row = encode_id(id);
    if (decode_onehot_row(row) != id) return {false, "encode/decode mismatch"};
    for (int block = 0; block < 3; ++block) {
      int ones = 0;
      for (int c = 0; c < 16; ++c) ones += row[static_cast<std::size_t>(block) * 16 + c];
      if (ones != 1) return {false, "row block does not have exactly one hot bit"};
    }
  }
  // full windows as produced by the encoder
  CanLog log;
  for (int i = 0; i < 64 * 16; ++i) {
    CanFrame f;
    f.ts_us = i;
    f.id = static_cast<CanId>(rng.below(kMaxCanId + 1));
    log.frames.push_back(f);
  }
  for (const auto& img : build_images(log, EncoderConfig{})) {
    for (int r = 0; r < img.rows; ++r) {
      int ones = 0;
      for (int c = 0; c < img.cols; ++c) ones += img.at(r, c);
      if (ones != 3) return {false, "window row does not have three hot bits"};
    }
  }
  const double dt = now_s() - t0;
  if (dt >= 1.0) return {false, fmt("took %.2f s (budget 1 s)", dt)};
  return {true, fmt("10000 ids, bijection + one-hot shape, %.3f s", dt)};
}

template <class T>
struct FdHarness {
  Rng rng{202};

  nn::DenseT<T> dense(int in, int out, nn::Activation act) {
    nn::DenseT<T> l;
    l.in_dim = in;
    l.out_dim = out;
    l.act = act;
    l.w.resize(static_cast<std::size_t>(in) * out);
    l.b.resize(static_cast<std::size_t>(out));
    for (auto& w : l.w) w = static_cast<T>(rng.uniform(-0.5, 0.5));
    for (auto& b : l.b) b = static_cast<T>(rng.uniform(-0.5, 0.5));
    return l;
  }

  nn::Deconv2dT<T> deconv(int ic, int oc, nn::Activation act) {
    nn::Deconv2dT<T> l;
    l.in_ch = ic;
    l.out_ch = oc;
    l.kh = l.kw = 4;
    l.sh = l.sw = 2;
    l.ph = l.pw = 1;
    l.act = act;
    l.k.resize(static_cast<std::size_t>(ic) * oc * 16);
    l.b.resize(static_cast<std::size_t>(oc));
    for (auto& k : l.k) k = static_cast<T>(rng.uniform(-0.5, 0.5));
    for (auto& b : l.b) b = static_cast<T>(rng.uniform(-0.2, 0.2));
    return l;
  }

  nn::TensorT<T> input(std::vector<int> shape) {
    nn::TensorT<T> t(std::move(shape));
    for (auto& x : t.v) x = static_cast<T>(rng.uniform(-1.0, 1.0));
    return t;
  }

  // max relative FD error over all parameters, floor-1 denominator
  double check(nn::ModelT<T>& m, const nn::TensorT<T>& x, double h) {
    nn::ForwardCacheT<T> cache;
    auto y = nn::forward(m, x, &cache);
    std::vector<double> c(y.size());
    for (auto& v : c) v = rng.uniform(-1.0, 1.0);
    nn::TensorT<T> dy(y.shape);
    for (std::size_t i = 0; i < y.size(); ++i) dy.v[i] = static_cast<T>(c[i]);
    auto grads = nn::backward(m, cache, dy);

    auto loss = [&]() {
      auto out = nn::forward(m, x);
      double s = 0.0;
      for (std::size_t i = 0; i < out.size(); ++i) s += c[i] * static_cast<double>(out.v[i]);
      return s;
    };

    double max_rel = 0.0;
    for (std::size_t li = 0; li < m.layers.size(); ++li) {
      auto probe = [&](std::vector<T>& params, const std::vector<T>& g) {
        for (std::size_t i = 0; i < params.size(); ++i) {
          const T saved = params[i];
          params[i] = saved + static_cast<T>(h);
          double lp = loss();
          params[i] = saved - static_cast<T>(h);
          double lm = loss();
          params[i] = saved;
          const double numeric = (lp - lm) / (2.0 * h);
          const double analytic = static_cast<double>(g[i]);
          const double denom = std::max({std::abs(numeric), std::abs(analytic), 1.0});
          max_rel = std::max(max_rel, std::abs(numeric - analytic) / denom);
        }
      };
      std::visit(
          [&](auto& l) {
            using L = std::decay_t<decltype(l)>;
            if constexpr (std::is_same_v<L, nn::DenseT<T>>) {
              probe(l.w, grads.layers[li].dw);
              probe(l.b, grads.layers[li].db);
            } else if constexpr (std::is_same_v<L, nn::Deconv2dT<T>>) {
              probe(l.k, grads.layers[li].dw);
              probe(l.b, grads.layers[li].db);
            }
          },
          m.layers[li]);
    }
    return max_rel;
  }
};

Outcome c2_gradients() {
  const double t0 = now_s();
  const nn::Activation heads[] = {nn::Activation::None, nn::Activation::ReLU,
                                  nn::Activation::Sigmoid, nn::Activation::Tanh};
  double worst64 = 0.0, worst32 = 0.0;

  FdHarness<double> h64;
  for (int rep = 0; rep < 20; ++rep) {
    for (auto head : heads) {
      nn::ModelT<double> dm;
      dm.layers.push_back(h64.dense(6, 5, nn::Activation::Tanh));
      dm.layers.push_back(h64.dense(5, 3, head));
      nn::validate_model(dm);
      auto x = h64.input({3, 6});
      worst64 = std::max(worst64, h64.check(dm, x, 1e-4));
    }
    nn::ModelT<double> cm;
    cm.layers.push_back(h64.dense(5, 12, nn::Activation::None));
    cm.layers.push_back(nn::Reshape{{2, 2, 3}});
    cm.layers.push_back(h64.deconv(2, 3, heads[rep % 4]));
    nn::validate_model(cm);
    auto xc = h64.input({2, 5});
    worst64 = std::max(worst64, h64.check(cm, xc, 1e-4));
  }

  FdHarness<float> h32;
  for (int rep = 0; rep < 20; ++rep) {
    nn::ModelT<float> dm;
    dm.layers.push_back(h32.dense(6, 5, nn::Activation::Tanh));
    dm.layers.push_back(h32.dense(5, 3, heads[rep % 4]));
    nn::validate_model(dm);
    auto x = h32.input({3, 6});
    worst32 = std::max(worst32, h32.check(dm, x, 1e-2));

    nn::ModelT<float> cm;
    cm.layers.push_back(h32.dense(5, 12, nn::Activation::None));
    cm.layers.push_back(nn::Reshape{{2, 2, 3}});
    cm.layers.push_back(h32.deconv(2, 3, nn::Activation::Tanh));
    nn::validate_model(cm);
    auto xc = h32.input({2, 5});
    worst32 = std::max(worst32, h32.check(cm, xc, 1e-2));
  }

  const double dt = now_s() - t0;
  const bool pass = worst64 < 1e-3 && worst32 < 1e-3 && dt < 30.0;
  return {pass, fmt("max rel err f64 %.2e (f32 %.2e), 20+ instances/layer type, %.1f s", worst64,
                    worst32, dt)};
}

Outcome c3_known_attack(const Corpus& corpus) {
  // D1 training data: a DoS-labeled capture split by image label.
  auto dos_train_base = gen_normal_traffic(
      [&] {
        auto p = TrafficProfile::vehicle_default(404);
        return p;
      }(),
      60.0);
  auto dos_train = inject_attack(dos_train_base, AttackSpec::dos(10.0, 50.0));

  EncoderConfig enc;
  std::vector<CanImage> normal, attack;
  for (auto& img : build_images(dos_train, enc))
    (img.label == ImageLabel::Abnormal ? attack : normal).push_back(std::move(img));
  for (auto& img : build_images(corpus.train_normal, enc))
    if (img.label == ImageLabel::Normal && normal.size() < 2500) normal.push_back(std::move(img));

  const std::size_t total_train = normal.size() + attack.size();
  if (total_train > 5000) return {false, fmt("train set too large: %zu", total_train)};

  TrainConfig cfg;
  cfg.epochs = 8;
  cfg.batch_size = 32;
  cfg.seed = 42;
  auto d1 = train_first_discriminator(normal, attack, cfg);

  const float th = 0.1f;
  auto detection_rate = [&](const CanLog& log, bool against_abnormal) {
    auto images = build_images(log, enc);
    std::vector<CanImage> subset;
    for (auto& img : images)
      if ((img.label == ImageLabel::Abnormal) == against_abnormal) subset.push_back(img);
    auto scores = score_images(d1, subset);
    std::size_t hit = 0;
    for (float s : scores) hit += against_abnormal ? (s < th) : (s >= th);
    return scores.empty() ? 0.0 : static_cast<double>(hit) / static_cast<double>(scores.size());
  };

  double dos_rate = 0.0, targeted_rate = 0.0;
  for (const auto& t : corpus.tests) {
    if (t.name == "dos") dos_rate = detection_rate(t.log, true);
    if (t.name == "rpm") targeted_rate = detection_rate(t.log, true);
  }
  const double normality = detection_rate(corpus.held_normal, false);

  const bool pass = dos_rate >= 0.95 && targeted_rate <= 0.20 && normality >= 0.95;
  return {pass, fmt("train %zu imgs: DoS %.1f%% (>=95), unseen-targeted %.1f%% (<=20), "
                    "normality %.1f%% (>=95)",
                    total_train, 100 * dos_rate, 100 * targeted_rate, 100 * normality)};
}

GanResult train_reference_gan(const Corpus& corpus, EncodeMode mode, int epochs,
                              std::uint64_t seed) {
  EncoderConfig enc;
  enc.mode = mode;
  std::vector<CanImage> normal;
  for (auto& img : build_images(corpus.train_normal, enc))
    if (img.label == ImageLabel::Normal) normal.push_back(std::move(img));

  TrainConfig cfg;
  cfg.epochs = epochs;
  cfg.batch_size = 32;
  cfg.d_steps_per_g_step = 2;
  cfg.seed = seed;
  return train_gan(normal, cfg);
}

Outcome c4_unknown_attack(const Corpus& corpus, const nn::Model& d2) {
  EncoderConfig enc;
  TrainedGids model{.d1 = std::nullopt,
                    .d2 = d2,
                    .g = std::nullopt,
                    .encoder_cfg = enc,
                    .detection_threshold = 0.1f};

  std::string detail;
  bool pass = true;
  for (const auto& t : corpus.tests) {
    auto report = evaluate_log(model, t.log, EvalMode::D2Only, t.name);
    pass = pass && report.accuracy >= 0.90 && report.auc >= 0.95;
    detail += fmt("%s acc %.1f%% auc %.3f; ", t.name.c_str(), 100 * report.accuracy, report.auc);
  }
  return {pass, detail + "(need acc>=90%, auc>=0.95 at th 0.1)"};
}

Outcome c5_cascade() {
  Rng rng(909);
  std::size_t skips = 0;
  for (int rep = 0; rep < 10'000; ++rep) {
    const float d1 = static_cast<float>(rng.uniform01());
    const float d2 = static_cast<float>(rng.uniform01());
    const float th = 0.001f + 0.998f * static_cast<float>(rng.uniform01());
    const bool with_d1 = rng.below(10) != 0;

    std::size_t d2_evals = 0;
    Verdict v = cascade_decide(with_d1 ? std::optional<float>(d1) : std::nullopt,
                               [&] {
                                 ++d2_evals;
                                 return d2;
                               },
                               th, th);

    const bool anomaly_iff_stage = (v.decision == Decision::Anomaly) == (v.stage != Stage::None);
    if (!anomaly_iff_stage) return {false, "decision/stage mismatch"};
    if (v.stage == Stage::FirstDiscriminator) {
      if (!(v.d1_score && *v.d1_score < th)) return {false, "stage-one fired above threshold"};
      if (d2_evals != 0) return {false, "d2 evaluated after stage one fired"};
      ++skips;
    } else {
      if (v.d1_score && !(*v.d1_score >= th)) return {false, "fell through below threshold"};
      if (d2_evals != 1) return {false, "d2 evaluation count wrong"};
      if (v.stage == Stage::SecondDiscriminator && !(*v.d2_score < th))
        return {false, "stage-two fired above threshold"};
      if (v.stage == Stage::None && !(*v.d2_score >= th))
        return {false, "normal verdict below threshold"};
    }
  }
  return {true, fmt("10000 randomized triples, %zu short-circuits, invariants exact", skips)};
}

Outcome c6_auc_oracle() {
  Rng rng(606);
  double worst = 0.0;
  for (int rep = 0; rep < 100; ++rep) {
    const std::size_t n = 2 + rng.below(499);
    std::vector<double> scores(n);
    std::vector<int> labels(n);
    for (auto& s : scores) s = rng.below(5) ? rng.uniform01() : 0.25;  // ties included
    bool pos = false, neg = false;
    for (auto& l : labels) {
      l = static_cast<int>(rng.below(2));
      (l ? pos : neg) = true;
    }
    if (!pos) labels[0] = 1;
    if (!neg) labels[n - 1] = 0;
    if (n == 2 && labels[0] == labels[1]) labels[0] = 1 - labels[1];

    const double trap = roc_auc_trapezoid(scores, labels);

    // O(n^2) pairwise brute force
    double wins = 0.0;
    std::size_t pairs = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (!labels[i]) continue;
      for (std::size_t j = 0; j < n; ++j) {
        if (labels[j]) continue;
        ++pairs;
        if (scores[i] > scores[j]) wins += 1.0;
        else if (scores[i] == scores[j]) wins += 0.5;
      }
    }
    const double brute = wins / static_cast<double>(pairs);
    worst = std::max({worst, std::abs(trap - brute),
                      std::abs(roc_auc_ustat(scores, labels) - brute)});
  }
  return {worst < 1e-9, fmt("100 instances (n<=500), max |route difference| %.2e", worst)};
}

Outcome c7_throughput() {
  EncoderConfig enc;
  TrainedGids model{.d1 = nn::make_discriminator(64, 48, 1),
                    .d2 = nn::make_discriminator(64, 48, 2),
                    .g = std::nullopt,
                    .encoder_cfg = enc,
                    .detection_threshold = 0.1f};

  auto profile = TrafficProfile::vehicle_default(77);
  auto small = gen_normal_traffic(profile, 2.55);    // ~2k frames
  auto big = gen_normal_traffic(profile, 250.0);     // ~200k frames
  small.frames.resize(2000);
  big.frames.resize(200'000);

  // paper-scale burst: 1954 frames within 0.18 s
  CanLog burst = small;
  burst.frames.resize(1954);
  double burst_s = 1e9;
  for (int r = 0; r < 5; ++r) {
    auto res = detect_stream(burst.frames, model);
    burst_s = std::min(burst_s, res.stats.seconds);
  }

  double t_small = 1e9, t_big = 1e9;
  for (int r = 0; r < 5; ++r)
    t_small = std::min(t_small, detect_stream(small.frames, model).stats.seconds);
  for (int r = 0; r < 2; ++r)
    t_big = std::min(t_big, detect_stream(big.frames, model).stats.seconds);

  const double rate_small = 2000.0 / t_small;
  const double rate_big = 200'000.0 / t_big;
  const double ratio = rate_big / rate_small;

  const bool pass = burst_s <= 0.18 && rate_big >= 10'856.0 && ratio >= 0.8 && ratio <= 1.2;
  return {pass, fmt("1954 frames in %.3f s (<=0.18); %.0f frames/s sustained (>=10856); "
                    "2k->200k rate ratio %.2f (0.8..1.2)",
                    burst_s, rate_big, ratio)};
}

Outcome c8_round_trips() {
  Rng rng(808);
  for (int rep = 0; rep < 30; ++rep) {
    CanLog log;
    std::int64_t ts = 0;
    const std::size_t n = rng.below(300);
    for (std::size_t i = 0; i < n; ++i) {
      CanFrame f;
      ts += static_cast<std::int64_t>(rng.below(100'000));
      f.ts_us = ts;
      f.id = static_cast<CanId>(rng.below(kMaxCanId + 1));
      f.dlc = static_cast<std::uint8_t>(rng.below(9));
      for (int b = 0; b < f.dlc; ++b) f.data[b] = static_cast<std::uint8_t>(rng.below(256));
      f.label = rng.below(2) ? FrameLabel::Injected : FrameLabel::Normal;
      log.frames.push_back(f);
    }
    std::ostringstream out;
    write_log(log, out);
    std::istringstream in(out.str());
    if (!(read_log(in) == log)) return {false, "text round trip mismatch"};
    std::ostringstream out2;
    write_log(log, out2);
    if (out.str() != out2.str()) return {false, "text serialization not byte-stable"};
  }

  for (int rep = 0; rep < 5; ++rep) {
    auto d = nn::make_discriminator(32, 48, 1000 + rep);
    auto g = nn::make_generator(32, 48, 64, 2000 + rep);
    for (const auto& m : {d, g}) {
      const std::string bytes = nn::save_weights(m);
      if (!(nn::load_weights_str(bytes) == m)) return {false, "weight round trip mismatch"};
      if (nn::save_weights(nn::load_weights_str(bytes)) != bytes)
        return {false, "weight serialization not byte-stable"};
    }
  }
  return {true, "30 random logs + 10 random models, byte-identical round trips"};
}

Outcome c9_determinism(const std::string& cli) {
  const std::string root = "acceptance_scratch";
  (void)!std::system(("rm -rf " + root).c_str());

  auto pipeline = [&](const std::string& dir) {
    (void)!std::system(("mkdir -p " + dir).c_str());
    auto sh = [&](const std::string& args) {
      const std::string cmd = cli + " " + args + " >/dev/null 2>&1";
      return std::system(cmd.c_str()) == 0;
    };
    return sh("synth --duration 25 --seed 31 -o " + dir + "/normal.log") &&
           sh("inject --attack dos --window 5:20 --seed 31 -i " + dir + "/normal.log -o " + dir +
              "/dos.log") &&
           sh("encode -i " + dir + "/dos.log --input-size 32 -o " + dir + "/dos.img") &&
           sh("train-gan -i " + dir + "/normal.log -o " + dir + "/gan --epochs 2 --batch 32 "
              "--seed 31 --input-size 32") &&
           sh("detect -i " + dir + "/dos.log --d2 " + dir + "/gan/d2.gidsw --input-size 32 -o " +
              dir + "/verdicts.csv") &&
           sh("eval -i " + dir + "/dos.log --d2 " + dir + "/gan/d2.gidsw --input-size 32 -o " +
              dir + "/report");
  };

  if (!pipeline(root + "/run1")) return {false, "pipeline run 1 failed"};
  if (!pipeline(root + "/run2")) return {false, "pipeline run 2 failed"};

  auto slurp = [](const std::string& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };
  for (const char* rel :
       {"/normal.log", "/dos.log", "/dos.img", "/gan/d2.gidsw", "/gan/g.gidsw",
        "/gan/history.csv", "/verdicts.csv", "/report/report.csv", "/report/report.txt"}) {
    const std::string a = slurp(root + "/run1" + rel);
    const std::string b = slurp(root + "/run2" + rel);
    if (a.empty()) return {false, fmt("missing artifact %s", rel)};
    if (a != b) return {false, fmt("artifact %s differs between runs", rel)};
  }
  return {true, "synth|inject|encode|train-gan|detect|eval twice: 9 artifacts byte-identical"};
}

Outcome c10_ablation(const Corpus& corpus) {
  const int epochs = 12;
  auto pooled_auc = [&](EncodeMode mode, const nn::Model& d2) {
    EncoderConfig enc;
    enc.mode = mode;
    std::vector<double> scores;
    std::vector<int> labels;
    for (const auto& t : corpus.tests) {
      auto images = build_images(t.log, enc);
      auto s = score_images(d2, images);
      for (std::size_t i = 0; i < images.size(); ++i) {
        scores.push_back(1.0 - static_cast<double>(s[i]));
        labels.push_back(images[i].label == ImageLabel::Abnormal ? 1 : 0);
      }
    }
    return roc_auc(scores, labels);
  };

  auto onehot = train_reference_gan(corpus, EncodeMode::OneHot, epochs, 1717);
  auto raw = train_reference_gan(corpus, EncodeMode::RawBinary, epochs, 1717);
  const double auc_onehot = pooled_auc(EncodeMode::OneHot, onehot.d2);
  const double auc_raw = pooled_auc(EncodeMode::RawBinary, raw.d2);
  return {auc_onehot >= auc_raw,
          fmt("identical budget (%d epochs): AUC one-hot %.4f vs raw-binary %.4f", epochs,
              auc_onehot, auc_raw)};
}

}  // namespace

int main(int argc, char** argv) {
  nn::set_threads(0);
  int only = argc > 1 ? std::atoi(argv[1]) : 0;

  printf("building synthetic corpus...\n");
  fflush(stdout);
  Corpus corpus = Corpus::build(120.0, 60.0, 7);

  nn::Model d2_ref;
  if (only == 0 || only == 4) {
    printf("training reference gan (this is the long step)...\n");
    fflush(stdout);
    d2_ref = train_reference_gan(corpus, EncodeMode::OneHot, 44, 2024).d2;
  }

#ifdef GIDS_CLI_PATH
  const std::string cli = GIDS_CLI_PATH;
#else
  const std::string cli = "./gids";
#endif

  struct Criterion {
    int id;
    const char* name;
    std::function<Outcome()> fn;
  };
  const std::vector<Criterion> criteria{
      {1, "encoding invariants", [&] { return c1_encoding(); }},
      {2, "gradient correctness", [&] { return c2_gradients(); }},
      {3, "known-attack pattern (D1)", [&] { return c3_known_attack(corpus); }},
      {4, "unknown-attack detection (D2)", [&] { return c4_unknown_attack(corpus, d2_ref); }},
      {5, "cascade semantics", [&] { return c5_cascade(); }},
      {6, "auc oracle equivalence", [&] { return c6_auc_oracle(); }},
      {7, "throughput", [&] { return c7_throughput(); }},
      {8, "round trips", [&] { return c8_round_trips(); }},
      {9, "pipeline determinism", [&] { return c9_determinism(cli); }},
      {10, "one-hot ablation", [&] { return c10_ablation(corpus); }},
  };

  int failures = 0;
  for (const auto& c : criteria) {
    if (only && c.id != only) continue;
    Outcome o;
    try {
      o = c.fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    printf("C%-2d %-32s %s  %s\n", c.id, c.name, o.pass ? "PASS" : "FAIL", o.detail.c_str());
    fflush(stdout);
    failures += o.pass ? 0 : 1;
  }
  printf(failures ? "ACCEPTANCE: %d criterion(s) failing\n" : "ACCEPTANCE: all criteria pass\n",
         failures);
  return failures ? 1 : 0;
}
