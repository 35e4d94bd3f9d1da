#include "gids/eval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

namespace gids {

void EvalReport::derive_rates() {
  const double tpd = static_cast<double>(tp), fpd = static_cast<double>(fp);
  const double tnd = static_cast<double>(tn), fnd = static_cast<double>(fn);
  detection_rate = tp + fn ? tpd / (tpd + fnd) : 0.0;
  if (tp + fp == 0) {
    precision = 0.0;
    precision_degenerate = true;
  } else {
    precision = tpd / (tpd + fpd);
    precision_degenerate = false;
  }
  accuracy = total() ? (tpd + tnd) / static_cast<double>(total()) : 0.0;
}

EvalReport confusion(const std::vector<Verdict>& verdicts, const std::vector<ImageLabel>& labels) {
  if (verdicts.size() != labels.size())
    throw Error(ErrorKind::LengthMismatch, "verdict and label counts differ");
  EvalReport r;
  for (std::size_t i = 0; i < verdicts.size(); ++i) {
    const bool predicted = verdicts[i].decision == Decision::Anomaly;
    const bool actual = labels[i] == ImageLabel::Abnormal;
    if (predicted && actual) ++r.tp;
    else if (predicted && !actual) ++r.fp;
    else if (!predicted && actual) ++r.fn;
    else ++r.tn;
  }
  r.derive_rates();
  return r;
}

namespace {

void check_two_classes(std::span<const int> labels) {
  bool has_pos = false, has_neg = false;
  for (int l : labels) (l ? has_pos : has_neg) = true;
  if (!has_pos || !has_neg)
    throw Error(ErrorKind::SingleClassInput, "auc needs both classes");
}

std::vector<std::size_t> order_by_score_desc(std::span<const double> scores) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  return order;
}

}  // namespace

double roc_auc_ustat(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size())
    throw Error(ErrorKind::LengthMismatch, "scores and labels differ in length");
  check_two_classes(labels);

  // Midranks over ascending scores, ties share the average rank.
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  std::vector<double> rank(scores.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && scores[order[j + 1]] == scores[order[i]]) ++j;
    const double mid = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) rank[order[k]] = mid;
    i = j + 1;
  }

  double rank_sum_pos = 0.0;
  std::size_t n_pos = 0;
  for (std::size_t k = 0; k < labels.size(); ++k) {
    if (labels[k]) {
      rank_sum_pos += rank[k];
      ++n_pos;
    }
  }
  const std::size_t n_neg = labels.size() - n_pos;
  const double u = rank_sum_pos - static_cast<double>(n_pos) * (static_cast<double>(n_pos) + 1.0) / 2.0;
  return u / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

std::vector<std::pair<double, double>> roc_points(std::span<const double> scores,
                                                  std::span<const int> labels) {
  if (scores.size() != labels.size())
    throw Error(ErrorKind::LengthMismatch, "scores and labels differ in length");
  check_two_classes(labels);

  std::size_t n_pos = 0;
  for (int l : labels) n_pos += l ? 1 : 0;
  const std::size_t n_neg = labels.size() - n_pos;

  auto order = order_by_score_desc(scores);
  std::vector<std::pair<double, double>> pts;
  pts.emplace_back(0.0, 0.0);
  std::size_t tp = 0, fp = 0, i = 0;
  while (i < order.size()) {
    // Consume a whole tie group before emitting a point.
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) {
      if (labels[order[j]]) ++tp;
      else ++fp;
      ++j;
    }
    pts.emplace_back(static_cast<double>(fp) / static_cast<double>(n_neg),
                     static_cast<double>(tp) / static_cast<double>(n_pos));
    i = j;
  }
  return pts;
}

double roc_auc_trapezoid(std::span<const double> scores, std::span<const int> labels) {
  auto pts = roc_points(scores, labels);
  double area = 0.0;
  for (std::size_t i = 1; i < pts.size(); ++i)
    area += (pts[i].first - pts[i - 1].first) * (pts[i].second + pts[i - 1].second) / 2.0;
  return area;
}

double roc_auc(std::span<const double> scores, std::span<const int> labels) {
  return roc_auc_ustat(scores, labels);
}

void write_roc_csv(const std::vector<std::pair<double, double>>& points, std::ostream& out) {
  out << "fpr,tpr\n";
  char buf[64];
  for (const auto& [fpr, tpr] : points) {
    std::snprintf(buf, sizeof buf, "%.9f,%.9f\n", fpr, tpr);
    out << buf;
  }
}

const char* eval_mode_name(EvalMode m) {
  switch (m) {
    case EvalMode::CascadeD1D2: return "cascade";
    case EvalMode::D2Only: return "d2_only";
    case EvalMode::D1Only: return "d1_only";
  }
  return "?";
}

EvalReport evaluate_log(const TrainedGids& model, const CanLog& log, EvalMode mode,
                        std::string name, const DetectorConfig& cfg) {
  TrainedGids effective = model;
  if (mode == EvalMode::D2Only) {
    effective.d1.reset();
  } else if (mode == EvalMode::D1Only) {
    if (!model.d1) throw Error(ErrorKind::EmptyDataset, "d1-only evaluation without a d1 model");
    // Degenerate cascade: stage two always passes.
    DetectorConfig only;
    only.d1_threshold = cfg.d1_threshold;
    only.d2_threshold = -1.0f;
    return evaluate_log(model, log, EvalMode::CascadeD1D2, std::move(name), only);
  }

  auto images = build_images(log, effective.encoder_cfg);
  std::vector<ImageLabel> labels;
  labels.reserve(images.size());
  for (const auto& img : images) labels.push_back(img.label);

  auto det = detect_stream(log.frames, effective, cfg);
  EvalReport r = confusion(det.verdicts, labels);
  r.name = std::move(name);

  // Anomaly score: 1 - (score of the deciding stage), monotone with the
  // cascade decision at the shared threshold.
  std::vector<double> anomaly;
  std::vector<int> truth;
  anomaly.reserve(det.verdicts.size());
  truth.reserve(det.verdicts.size());
  for (std::size_t i = 0; i < det.verdicts.size(); ++i) {
    const Verdict& v = det.verdicts[i];
    double s;
    if (v.stage == Stage::FirstDiscriminator) s = static_cast<double>(*v.d1_score);
    else if (v.d2_score) s = static_cast<double>(*v.d2_score);
    else s = static_cast<double>(*v.d1_score);
    anomaly.push_back(1.0 - s);
    truth.push_back(labels[i] == ImageLabel::Abnormal ? 1 : 0);
  }
  bool has_pos = false, has_neg = false;
  for (int t : truth) (t ? has_pos : has_neg) = true;
  r.auc = has_pos && has_neg ? roc_auc(anomaly, truth) : 0.0;
  return r;
}

void write_report_csv(const std::vector<std::pair<EvalMode, EvalReport>>& rows,
                      std::ostream& out) {
  out << "config,data,tp,fp,tn,fn,detection_rate,precision,accuracy,auc,precision_degenerate\n";
  char buf[256];
  for (const auto& [mode, r] : rows) {
    std::snprintf(buf, sizeof buf, "%s,%s,%zu,%zu,%zu,%zu,%.6f,%.6f,%.6f,%.6f,%d\n",
                  eval_mode_name(mode), r.name.c_str(), r.tp, r.fp, r.tn, r.fn, r.detection_rate,
                  r.precision, r.accuracy, r.auc, r.precision_degenerate ? 1 : 0);
    out << buf;
  }
}

void write_report_table(const std::vector<std::pair<EvalMode, EvalReport>>& rows,
                        std::ostream& out) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "%-10s %-12s %12s %12s %10s %8s\n", "config", "data",
                "det.rate", "precision", "accuracy", "AUC");
  out << buf;
  for (const auto& [mode, r] : rows) {
    std::snprintf(buf, sizeof buf, "%-10s %-12s %11.1f%% %11.1f%% %9.1f%% %8.3f\n",
                  eval_mode_name(mode), r.name.c_str(), 100.0 * r.detection_rate,
                  100.0 * r.precision, 100.0 * r.accuracy, r.auc);
    out << buf;
  }
}

std::vector<SweepRow> input_size_sweep(const CanLog& normal_train,
                                       const std::vector<CanLog>& attack_tests,
                                       std::span<const int> sizes, const TrainConfig& base_cfg,
                                       float threshold) {
  if (sizes.empty()) throw Error(ErrorKind::EmptyDataset, "sweep needs at least one size");
  if (attack_tests.empty()) throw Error(ErrorKind::EmptyDataset, "sweep needs labeled test logs");

  std::vector<SweepRow> rows;
  for (int size : sizes) {
    if (size < 1) throw Error(ErrorKind::ShapeMismatch, "input size must be >= 1");
    EncoderConfig enc;
    enc.input_size = size;

    TrainConfig cfg = base_cfg;
    cfg.seed = mix64(base_cfg.seed) ^ static_cast<std::uint64_t>(size);

    auto train_images = build_images(normal_train, enc);
    GanResult gan = train_gan(train_images, cfg);

    TrainedGids model{.d1 = std::nullopt,
                      .d2 = std::move(gan.d2),
                      .g = std::move(gan.g),
                      .encoder_cfg = enc,
                      .detection_threshold = threshold};

    std::size_t correct = 0, total = 0;
    for (const CanLog& log : attack_tests) {
      auto images = build_images(log, enc);
      auto det = detect_stream(log.frames, model, {});
      for (std::size_t i = 0; i < det.verdicts.size(); ++i) {
        const bool predicted = det.verdicts[i].decision == Decision::Anomaly;
        const bool actual = images[i].label == ImageLabel::Abnormal;
        correct += predicted == actual ? 1 : 0;
        ++total;
      }
    }
    rows.push_back({size, total ? static_cast<double>(correct) / static_cast<double>(total) : 0.0});
  }
  return rows;
}

void write_sweep_csv(const std::vector<SweepRow>& rows, std::ostream& out) {
  out << "input_size,accuracy\n";
  char buf[64];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%d,%.6f\n", r.input_size, r.accuracy);
    out << buf;
  }
}

}  // namespace gids
