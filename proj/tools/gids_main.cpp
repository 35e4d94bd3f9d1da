// gids - CAN log synthesis, attack injection, GAN training, and cascade
// detection from one binary. Exit codes: 0 ok, 1 usage error, 2 data error.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "gids/attack.hpp"
#include "gids/detector.hpp"
#include "gids/eval.hpp"
#include "gids/gan.hpp"

namespace fs = std::filesystem;
using namespace gids;

namespace {

using KV = std::vector<std::pair<std::string, std::string>>;

// Every run leaves its resolved configuration next to its primary
// output, so artifacts stay reproducible.
void write_run_config(const std::string& out_path, const std::string& subcommand, const KV& kv) {
  fs::path p(out_path);
  fs::path cfg_path = fs::is_directory(p) ? p / "run_config.txt" : fs::path(out_path + ".runcfg");
  std::ofstream out(cfg_path);
  if (!out) throw Error(ErrorKind::SinkFailure, "cannot write " + cfg_path.string());
  out << "subcommand=" << subcommand << "\n";
  for (const auto& [k, v] : kv) out << k << "=" << v << "\n";
}

std::string fmt_double(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

EncoderConfig encoder_from(int input_size, int stride, const std::string& mode) {
  EncoderConfig enc;
  enc.input_size = input_size;
  enc.stride = stride;
  if (mode == "onehot") enc.mode = EncodeMode::OneHot;
  else if (mode == "rawbinary") enc.mode = EncodeMode::RawBinary;
  else throw Error(ErrorKind::MalformedLine, "unknown encode mode '" + mode + "'");
  enc.validate();
  return enc;
}

TrafficProfile profile_from_file(const std::string& path, std::uint64_t seed) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::SinkFailure, "cannot open profile '" + path + "'");
  TrafficProfile p;
  p.seed = seed;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw Error(ErrorKind::MalformedLine, "expected id=period_ms[:jitter]", line_no);
    try {
      CanId id = static_cast<CanId>(std::stoul(line.substr(0, eq), nullptr, 16));
      if (id > kMaxCanId) throw Error(ErrorKind::IdOutOfRange, "profile id too large", line_no);
      std::string rest = line.substr(eq + 1);
      auto colon = rest.find(':');
      TrafficProfile::IdTiming t;
      t.period_ms = std::stod(rest.substr(0, colon));
      t.jitter = colon == std::string::npos ? 0.05 : std::stod(rest.substr(colon + 1));
      p.id_periods[id] = t;
    } catch (const std::logic_error&) {
      throw Error(ErrorKind::MalformedLine, "bad profile entry", line_no);
    }
  }
  return p;
}

struct ModelFlags {
  std::string d2_path;
  std::string d1_path;
  double threshold = 0.1;
  double d1_threshold = -1.0;
  double d2_threshold = -1.0;
  int input_size = 64;
  int stride = 0;
  std::string mode = "onehot";

  void attach(CLI::App* cmd, bool need_d2 = true) {
    auto* d2 = cmd->add_option("--d2", d2_path, "second discriminator weight file");
    if (need_d2) d2->required();
    cmd->add_option("--d1", d1_path, "optional first discriminator weight file");
    cmd->add_option("--threshold", threshold, "shared detection threshold")
        ->check(CLI::Range(1e-6, 1.0 - 1e-6))
        ->capture_default_str();
    cmd->add_option("--d1-threshold", d1_threshold, "override stage-one threshold");
    cmd->add_option("--d2-threshold", d2_threshold, "override stage-two threshold");
    cmd->add_option("--input-size", input_size, "frames per image")->capture_default_str();
    cmd->add_option("--stride", stride, "frames between image starts (0 = input size)")
        ->capture_default_str();
    cmd->add_option("--mode", mode, "onehot|rawbinary")->capture_default_str();
  }

  TrainedGids load() const {
    TrainedGids model{.d1 = std::nullopt,
                      .d2 = nn::load_weights_file(d2_path),
                      .g = std::nullopt,
                      .encoder_cfg = encoder_from(input_size, stride, mode),
                      .detection_threshold = static_cast<float>(threshold)};
    if (!d1_path.empty()) model.d1 = nn::load_weights_file(d1_path);
    model.validate();
    return model;
  }

  DetectorConfig detector_cfg() const {
    DetectorConfig cfg;
    if (d1_threshold > 0.0) cfg.d1_threshold = static_cast<float>(d1_threshold);
    if (d2_threshold > 0.0) cfg.d2_threshold = static_cast<float>(d2_threshold);
    return cfg;
  }

  KV kv() const {
    return {{"d2", d2_path},
            {"d1", d1_path},
            {"threshold", fmt_double(threshold)},
            {"input_size", std::to_string(input_size)},
            {"stride", std::to_string(stride)},
            {"mode", mode}};
  }
};

int run(int argc, char** argv) {
  CLI::App app{"GAN-based intrusion detection for CAN bus logs"};
  app.require_subcommand(1);
  app.set_config("--config", "", "key=value config file; command-line flags win");

  int threads = 0;
  app.add_option("--threads", threads, "worker threads (0 = hardware)")->capture_default_str();

  // synth ------------------------------------------------------------
  auto* synth = app.add_subcommand("synth", "generate labeled normal traffic");
  double duration = 60.0;
  std::uint64_t seed = 0;
  std::string out_path, profile_path, payload_mode = "counter";
  synth->add_option("--duration", duration, "seconds of traffic")->capture_default_str();
  synth->add_option("--seed", seed, "rng seed")->capture_default_str();
  synth->add_option("--profile", profile_path, "profile file (hex_id=period_ms[:jitter] lines); default built-in");
  synth->add_option("--payload-mode", payload_mode, "constant|counter|random")->capture_default_str();
  synth->add_option("-o,--output", out_path, "output log")->required();

  // inject -----------------------------------------------------------
  auto* inject = app.add_subcommand("inject", "inject attack traffic into a log");
  std::string attack_kind = "dos", in_path, window, payload_hex, spec_path;
  double period_ms = 0.0, start_s = 0.0, end_s = 0.0;
  std::string target_id_hex;
  std::uint64_t inject_seed = 0;
  inject->add_option("--attack", attack_kind, "dos|fuzzy|rpm|gear|targeted")->capture_default_str();
  inject->add_option("--period-ms", period_ms, "injection period (default per attack)");
  inject->add_option("--target-id", target_id_hex, "hex id for targeted attacks");
  inject->add_option("--window", window, "active window as start:end seconds");
  inject->add_option("--start-s", start_s, "window start");
  inject->add_option("--end-s", end_s, "window end");
  inject->add_option("--payload", payload_hex, "targeted payload, up to 16 hex digits");
  inject->add_option("--spec", spec_path, "attack spec file (key=value)");
  inject->add_option("--seed", inject_seed, "rng seed")->capture_default_str();
  inject->add_option("-i,--input", in_path, "base log")->required();
  inject->add_option("-o,--output", out_path, "output log")->required();

  // encode -----------------------------------------------------------
  auto* encode = app.add_subcommand("encode", "convert a log into image dumps");
  int enc_input_size = 64, enc_stride = 0;
  std::string enc_mode = "onehot";
  encode->add_option("-i,--input", in_path, "input log")->required();
  encode->add_option("-o,--output", out_path, "image dump file")->required();
  encode->add_option("--input-size", enc_input_size, "frames per image")->capture_default_str();
  encode->add_option("--stride", enc_stride, "frames between image starts")->capture_default_str();
  encode->add_option("--mode", enc_mode, "onehot|rawbinary")->capture_default_str();

  // shared training knobs ---------------------------------------------
  TrainConfig tc;
  auto add_train_flags = [&](CLI::App* cmd) {
    cmd->add_option("--epochs", tc.epochs, "training epochs")->capture_default_str();
    cmd->add_option("--batch", tc.batch_size, "mini-batch size")->capture_default_str();
    cmd->add_option("--seed", tc.seed, "rng seed")->capture_default_str();
    cmd->add_option("--lr", tc.lr, "adam learning rate")->capture_default_str();
    cmd->add_option("--beta1", tc.beta1, "adam beta1")->capture_default_str();
    cmd->add_option("--beta2", tc.beta2, "adam beta2")->capture_default_str();
  };

  // train-d1 -----------------------------------------------------------
  auto* train_d1 = app.add_subcommand("train-d1", "supervised first discriminator");
  std::string extra_normal;
  int d1_input_size = 64, d1_stride = 0;
  std::string d1_mode = "onehot";
  train_d1->add_option("-i,--input", in_path, "labeled log (normal + injected frames)")->required();
  train_d1->add_option("--extra-normal", extra_normal, "additional attack-free log");
  train_d1->add_option("-o,--output", out_path, "weight file")->required();
  train_d1->add_option("--input-size", d1_input_size, "frames per image")->capture_default_str();
  train_d1->add_option("--stride", d1_stride, "frames between image starts")->capture_default_str();
  train_d1->add_option("--mode", d1_mode, "onehot|rawbinary")->capture_default_str();
  add_train_flags(train_d1);

  // train-gan ----------------------------------------------------------
  auto* train_gan_cmd = app.add_subcommand("train-gan", "adversarial generator + second discriminator");
  int gan_input_size = 64, gan_stride = 0;
  std::string gan_mode = "onehot";
  train_gan_cmd->add_option("-i,--input", in_path, "attack-free log")->required();
  train_gan_cmd->add_option("-o,--output", out_path, "output directory")->required();
  train_gan_cmd->add_option("--input-size", gan_input_size, "frames per image")->capture_default_str();
  train_gan_cmd->add_option("--stride", gan_stride, "frames between image starts")->capture_default_str();
  train_gan_cmd->add_option("--mode", gan_mode, "onehot|rawbinary")->capture_default_str();
  add_train_flags(train_gan_cmd);
  train_gan_cmd->add_option("--d-steps", tc.d_steps_per_g_step, "discriminator steps per generator step")
      ->capture_default_str();
  train_gan_cmd->add_option("--label-smoothing", tc.label_smoothing, "real label smoothing")
      ->capture_default_str();
  train_gan_cmd->add_option("--noise-dim", tc.noise_dim, "generator noise dimension")
      ->capture_default_str();
  train_gan_cmd->add_option("--val-fraction", tc.val_fraction, "checkpoint validation split")
      ->capture_default_str();
  train_gan_cmd->add_option("--replay-fraction", tc.replay_fraction, "replayed fakes per batch")
      ->capture_default_str();
  train_gan_cmd->add_option("--replay-capacity", tc.replay_capacity, "fake replay buffer size")
      ->capture_default_str();
  train_gan_cmd->add_option("--noise-scale-max", tc.noise_scale_max, "max inflated noise scale")
      ->capture_default_str();

  // detect ---------------------------------------------------------------
  auto* detect = app.add_subcommand("detect", "run the cascade over a log");
  ModelFlags detect_flags;
  detect->add_option("-i,--input", in_path, "input log")->required();
  detect->add_option("-o,--output", out_path, "verdict csv")->required();
  detect_flags.attach(detect);

  // eval -------------------------------------------------------------------
  auto* eval_cmd = app.add_subcommand("eval", "confusion/AUC reports for labeled logs");
  ModelFlags eval_flags;
  std::vector<std::string> eval_inputs;
  std::string roc_dir;
  eval_cmd->add_option("-i,--input", eval_inputs, "labeled logs (repeatable)")->required();
  eval_cmd->add_option("-o,--output", out_path, "report directory")->required();
  eval_cmd->add_option("--roc-dir", roc_dir, "also dump fpr,tpr csv per log");
  eval_flags.attach(eval_cmd);

  // sweep ---------------------------------------------------------------
  auto* sweep = app.add_subcommand("sweep", "input-size sweep: train + evaluate per size");
  std::vector<int> sweep_sizes{32, 48, 64, 96, 128};
  std::vector<std::string> sweep_tests;
  double sweep_threshold = 0.1;
  sweep->add_option("-i,--input", in_path, "attack-free training log")->required();
  sweep->add_option("--test", sweep_tests, "labeled test logs (repeatable)")->required();
  sweep->add_option("--sizes", sweep_sizes, "input sizes (multiples of 16)")->capture_default_str();
  sweep->add_option("--threshold", sweep_threshold, "detection threshold")->capture_default_str();
  sweep->add_option("-o,--output", out_path, "sweep csv")->required();
  add_train_flags(sweep);
  sweep->add_option("--d-steps", tc.d_steps_per_g_step, "discriminator steps per generator step")
      ->capture_default_str();

  // bench -----------------------------------------------------------------
  auto* bench = app.add_subcommand("bench", "detection throughput measurement");
  ModelFlags bench_flags;
  int repeat = 3;
  bench->add_option("-i,--input", in_path, "input log")->required();
  bench->add_option("--repeat", repeat, "measurement repetitions")->capture_default_str();
  bench_flags.attach(bench);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n\n" << app.help() << "\n";
    return 1;
  }

  nn::set_threads(threads);

  if (*synth) {
    TrafficProfile profile = profile_path.empty() ? TrafficProfile::vehicle_default(seed)
                                                  : profile_from_file(profile_path, seed);
    if (payload_mode == "constant") profile.payload_mode = PayloadMode::Constant;
    else if (payload_mode == "counter") profile.payload_mode = PayloadMode::Counter;
    else if (payload_mode == "random") profile.payload_mode = PayloadMode::Random;
    else throw Error(ErrorKind::MalformedLine, "unknown payload mode '" + payload_mode + "'");
    auto log = gen_normal_traffic(profile, duration);
    write_log_file(log, out_path);
    write_run_config(out_path, "synth",
                     {{"duration", fmt_double(duration)},
                      {"seed", std::to_string(seed)},
                      {"profile", profile_path.empty() ? "default" : profile_path},
                      {"payload_mode", payload_mode},
                      {"frames", std::to_string(log.frames.size())}});
    std::cerr << "wrote " << log.frames.size() << " frames to " << out_path << "\n";
  } else if (*inject) {
    AttackSpec spec;
    if (!spec_path.empty()) {
      std::ifstream sin(spec_path);
      if (!sin) throw Error(ErrorKind::SinkFailure, "cannot open spec '" + spec_path + "'");
      spec = AttackSpec::from_config(sin);
    }
    if (attack_kind == "dos") spec = AttackSpec::dos(spec.start_s, spec.end_s);
    else if (attack_kind == "fuzzy") spec = AttackSpec::fuzzy(spec.start_s, spec.end_s, 0);
    else if (attack_kind == "rpm") spec = AttackSpec::targeted(0x316, spec.start_s, spec.end_s);
    else if (attack_kind == "gear") spec = AttackSpec::targeted(0x43f, spec.start_s, spec.end_s);
    else if (attack_kind == "targeted") spec.kind = AttackKind::Targeted;
    else throw Error(ErrorKind::MalformedLine, "unknown attack '" + attack_kind + "'");

    if (!window.empty()) {
      auto colon = window.find(':');
      if (colon == std::string::npos)
        throw Error(ErrorKind::MalformedLine, "window must be start:end");
      spec.start_s = std::stod(window.substr(0, colon));
      spec.end_s = std::stod(window.substr(colon + 1));
    }
    if (inject->count("--start-s")) spec.start_s = start_s;
    if (inject->count("--end-s")) spec.end_s = end_s;
    if (period_ms > 0.0) spec.period_ms = period_ms;
    if (!target_id_hex.empty()) {
      spec.target_id = static_cast<CanId>(std::stoul(target_id_hex, nullptr, 16));
      if (spec.target_id > kMaxCanId) throw Error(ErrorKind::IdOutOfRange, "target id too large");
    }
    if (!payload_hex.empty()) {
      for (std::size_t i = 0; i < 8 && i * 2 + 1 < payload_hex.size() + 1; ++i)
        spec.payload[i] =
            static_cast<std::uint8_t>(std::stoul(payload_hex.substr(i * 2, 2), nullptr, 16));
    }
    spec.seed = inject_seed;

    auto base = read_log_file(in_path);
    auto attacked = inject_attack(base, spec);
    write_log_file(attacked, out_path);
    write_run_config(out_path, "inject",
                     {{"attack", attack_kind},
                      {"period_ms", fmt_double(spec.period_ms)},
                      {"target_id", std::to_string(spec.target_id)},
                      {"start_s", fmt_double(spec.start_s)},
                      {"end_s", fmt_double(spec.end_s)},
                      {"seed", std::to_string(inject_seed)},
                      {"input", in_path},
                      {"injected", std::to_string(attacked.frames.size() - base.frames.size())}});
    std::cerr << "injected " << attacked.frames.size() - base.frames.size() << " frames\n";
  } else if (*encode) {
    auto enc = encoder_from(enc_input_size, enc_stride, enc_mode);
    auto log = read_log_file(in_path);
    auto images = build_images(log, enc);
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw Error(ErrorKind::SinkFailure, "cannot open '" + out_path + "'");
    write_images(images, out);
    write_run_config(out_path, "encode",
                     {{"input", in_path},
                      {"input_size", std::to_string(enc_input_size)},
                      {"stride", std::to_string(enc_stride)},
                      {"mode", enc_mode},
                      {"images", std::to_string(images.size())}});
    std::cerr << "wrote " << images.size() << " images\n";
  } else if (*train_d1) {
    auto enc = encoder_from(d1_input_size, d1_stride, d1_mode);
    auto log = read_log_file(in_path);
    auto images = build_images(log, enc);
    std::vector<CanImage> normal, attack;
    for (auto& img : images)
      (img.label == ImageLabel::Abnormal ? attack : normal).push_back(std::move(img));
    if (!extra_normal.empty()) {
      auto extra = build_images(read_log_file(extra_normal), enc);
      for (auto& img : extra)
        if (img.label == ImageLabel::Normal) normal.push_back(std::move(img));
    }
    std::vector<double> losses;
    auto d1 = train_first_discriminator(normal, attack, tc, &losses);
    nn::save_weights_file(d1, out_path);
    write_run_config(out_path, "train-d1",
                     {{"input", in_path},
                      {"extra_normal", extra_normal},
                      {"input_size", std::to_string(d1_input_size)},
                      {"mode", d1_mode},
                      {"epochs", std::to_string(tc.epochs)},
                      {"batch", std::to_string(tc.batch_size)},
                      {"seed", std::to_string(tc.seed)},
                      {"lr", fmt_double(tc.lr)},
                      {"normal_images", std::to_string(normal.size())},
                      {"attack_images", std::to_string(attack.size())}});
    std::cerr << "trained d1 on " << normal.size() << " normal / " << attack.size()
              << " attack images; final loss " << (losses.empty() ? 0.0 : losses.back()) << "\n";
  } else if (*train_gan_cmd) {
    auto enc = encoder_from(gan_input_size, gan_stride, gan_mode);
    auto log = read_log_file(in_path);
    auto images = build_images(log, enc);
    std::vector<CanImage> normal;
    for (auto& img : images)
      if (img.label == ImageLabel::Normal) normal.push_back(std::move(img));
    auto result = train_gan(normal, tc);

    fs::create_directories(out_path);
    nn::save_weights_file(result.d2, (fs::path(out_path) / "d2.gidsw").string());
    nn::save_weights_file(result.g, (fs::path(out_path) / "g.gidsw").string());
    std::ofstream hist((fs::path(out_path) / "history.csv").string());
    write_history_csv(result.history, hist);
    write_run_config(out_path, "train-gan",
                     {{"input", in_path},
                      {"input_size", std::to_string(gan_input_size)},
                      {"stride", std::to_string(gan_stride)},
                      {"mode", gan_mode},
                      {"epochs", std::to_string(tc.epochs)},
                      {"batch", std::to_string(tc.batch_size)},
                      {"d_steps", std::to_string(tc.d_steps_per_g_step)},
                      {"seed", std::to_string(tc.seed)},
                      {"lr", fmt_double(tc.lr)},
                      {"label_smoothing", fmt_double(tc.label_smoothing)},
                      {"noise_dim", std::to_string(tc.noise_dim)},
                      {"val_fraction", fmt_double(tc.val_fraction)},
                      {"replay_fraction", fmt_double(tc.replay_fraction)},
                      {"replay_capacity", std::to_string(tc.replay_capacity)},
                      {"noise_scale_max", fmt_double(tc.noise_scale_max)},
                      {"train_images", std::to_string(normal.size())}});
    std::cerr << "trained gan on " << normal.size() << " normal images over " << tc.epochs
              << " epochs\n";
  } else if (*detect) {
    auto model = detect_flags.load();
    auto log = read_log_file(in_path);
    auto res = detect_stream(log.frames, model, detect_flags.detector_cfg());
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw Error(ErrorKind::SinkFailure, "cannot open '" + out_path + "'");
    write_verdicts_csv(res.verdicts, out);
    KV kv = detect_flags.kv();
    kv.emplace_back("input", in_path);
    write_run_config(out_path, "detect", kv);
    std::size_t anomalies = 0;
    for (const auto& v : res.verdicts) anomalies += v.decision == Decision::Anomaly;
    std::cerr << res.stats.frames << " frames, " << res.stats.windows << " windows, " << anomalies
              << " anomalies, " << res.stats.seconds << " s (" << res.stats.frames_per_sec
              << " frames/s)\n";
  } else if (*eval_cmd) {
    auto model = eval_flags.load();
    fs::create_directories(out_path);
    std::vector<std::pair<EvalMode, EvalReport>> rows;
    for (const auto& path : eval_inputs) {
      auto log = read_log_file(path);
      std::string name = fs::path(path).stem().string();
      if (model.d1) {
        rows.emplace_back(EvalMode::CascadeD1D2,
                          evaluate_log(model, log, EvalMode::CascadeD1D2, name,
                                       eval_flags.detector_cfg()));
        rows.emplace_back(EvalMode::D1Only, evaluate_log(model, log, EvalMode::D1Only, name,
                                                         eval_flags.detector_cfg()));
      }
      rows.emplace_back(EvalMode::D2Only, evaluate_log(model, log, EvalMode::D2Only, name,
                                                       eval_flags.detector_cfg()));
      if (!roc_dir.empty()) {
        fs::create_directories(roc_dir);
        TrainedGids d2only = model;
        d2only.d1.reset();
        auto images = build_images(log, model.encoder_cfg);
        auto det = detect_stream(log.frames, d2only, eval_flags.detector_cfg());
        std::vector<double> anomaly;
        std::vector<int> truth;
        for (std::size_t i = 0; i < det.verdicts.size(); ++i) {
          anomaly.push_back(1.0 - static_cast<double>(*det.verdicts[i].d2_score));
          truth.push_back(images[i].label == ImageLabel::Abnormal ? 1 : 0);
        }
        std::ofstream roc((fs::path(roc_dir) / (name + "_roc.csv")).string());
        write_roc_csv(roc_points(anomaly, truth), roc);
      }
    }
    std::ofstream csv((fs::path(out_path) / "report.csv").string());
    write_report_csv(rows, csv);
    std::ofstream tbl((fs::path(out_path) / "report.txt").string());
    write_report_table(rows, tbl);
    KV kv = eval_flags.kv();
    for (const auto& p : eval_inputs) kv.emplace_back("input", p);
    write_run_config(out_path, "eval", kv);
    write_report_table(rows, std::cout);
  } else if (*sweep) {
    auto train_log = read_log_file(in_path);
    std::vector<CanLog> tests;
    for (const auto& p : sweep_tests) tests.push_back(read_log_file(p));
    auto rows = input_size_sweep(train_log, tests, sweep_sizes, tc,
                                 static_cast<float>(sweep_threshold));
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw Error(ErrorKind::SinkFailure, "cannot open '" + out_path + "'");
    write_sweep_csv(rows, out);
    KV kv{{"input", in_path},
          {"threshold", fmt_double(sweep_threshold)},
          {"epochs", std::to_string(tc.epochs)},
          {"seed", std::to_string(tc.seed)}};
    for (int s : sweep_sizes) kv.emplace_back("size", std::to_string(s));
    for (const auto& p : sweep_tests) kv.emplace_back("test", p);
    write_run_config(out_path, "sweep", kv);
    write_sweep_csv(rows, std::cout);
  } else if (*bench) {
    auto model = bench_flags.load();
    auto log = read_log_file(in_path);
    double best_fps = 0.0;
    StreamStats stats;
    for (int r = 0; r < repeat; ++r) {
      auto res = detect_stream(log.frames, model, bench_flags.detector_cfg());
      stats = res.stats;
      best_fps = std::max(best_fps, res.stats.frames_per_sec);
    }
    std::cout << "frames " << stats.frames << "\nwindows " << stats.windows << "\nseconds "
              << stats.seconds << "\nframes_per_sec " << best_fps << "\nd1_evals "
              << stats.counters.d1_evals << "\nd2_evals " << stats.counters.d2_evals << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
