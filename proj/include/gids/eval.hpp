#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "gids/detector.hpp"

namespace gids {

// Confusion counts and derived rates over images; positive = Abnormal.
struct EvalReport {
  std::string name;
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
  double detection_rate = 0.0;  // tp / (tp + fn)
  double precision = 0.0;       // tp / (tp + fp); 0 + flag when no positive predictions
  double accuracy = 0.0;
  double auc = 0.0;
  bool precision_degenerate = false;

  std::size_t total() const { return tp + fp + tn + fn; }
  void derive_rates();
};

// Exact confusion counts of verdicts against encoder labels.
// Throws Error{LengthMismatch} when the sequences differ in length.
EvalReport confusion(const std::vector<Verdict>& verdicts, const std::vector<ImageLabel>& labels);

// AUC of anomaly scores (higher = more anomalous, positive label = 1).
// Both routes are exposed; they agree to 1e-9 including ties. roc_auc
// itself returns the rank/U-statistic value. Throws
// Error{SingleClassInput} unless both classes are present.
double roc_auc(std::span<const double> scores, std::span<const int> labels);
double roc_auc_trapezoid(std::span<const double> scores, std::span<const int> labels);
double roc_auc_ustat(std::span<const double> scores, std::span<const int> labels);

// ROC polyline, (fpr, tpr), from (0,0) to (1,1), one step per distinct
// score.
std::vector<std::pair<double, double>> roc_points(std::span<const double> scores,
                                                  std::span<const int> labels);
void write_roc_csv(const std::vector<std::pair<double, double>>& points, std::ostream& out);

enum class EvalMode : std::uint8_t { CascadeD1D2, D2Only, D1Only };
const char* eval_mode_name(EvalMode m);

// Runs the detector over a labeled log and scores it. The anomaly score
// feeding the AUC is 1 - (the score of the stage that decided), which is
// monotone with the cascade decision at the shared threshold.
EvalReport evaluate_log(const TrainedGids& model, const CanLog& log, EvalMode mode,
                        std::string name, const DetectorConfig& cfg = {});

// CSV: config,data,tp,fp,tn,fn,detection_rate,precision,accuracy,auc,degenerate
void write_report_csv(const std::vector<std::pair<EvalMode, EvalReport>>& rows,
                      std::ostream& out);
// Fixed-width table of the same rows.
void write_report_table(const std::vector<std::pair<EvalMode, EvalReport>>& rows,
                        std::ostream& out);

struct SweepRow {
  int input_size = 0;
  double accuracy = 0.0;
};

// Trains a fresh GAN per input size (per-size derived seed) and reports
// pooled accuracy over the supplied labeled attack logs at the given
// threshold. Sizes must be multiples of 16 (generator constraint).
std::vector<SweepRow> input_size_sweep(const CanLog& normal_train,
                                       const std::vector<CanLog>& attack_tests,
                                       std::span<const int> sizes, const TrainConfig& base_cfg,
                                       float threshold);
void write_sweep_csv(const std::vector<SweepRow>& rows, std::ostream& out);

}  // namespace gids
