#pragma once

#include "glad/detector.hpp"

#include <array>
#include <string>
#include <vector>

namespace glad {

struct ConfusionCounts {
  long tp = 0, fp = 0, fn = 0, tn = 0;
};

// The four counting metrics plus rank-statistic AUC. Undefined values are
// reported as 0 with the matching flag cleared, so aggregation stays finite.
struct Metrics {
  ConfusionCounts counts;
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double auc = 0.0;
  bool precision_defined = true;
  bool recall_defined = true;
  bool f1_defined = true;
  bool auc_defined = true;

  double metric(int idx) const;  // 0..4 = accuracy..auc
};

inline constexpr std::array<const char*, 5> kMetricNames = {"accuracy", "precision", "recall",
                                                            "f1", "auc"};

Metrics compute_metrics(const std::vector<int>& labels, const std::vector<int>& predictions,
                        const std::vector<double>& scores);

// Probability that a random positive outscores a random negative, ties
// counted one half (average-rank form of the Mann-Whitney statistic).
double auc_rank(const std::vector<int>& labels, const std::vector<double>& scores,
                bool* defined = nullptr);

// Cohen's kappa over a square inter-annotator contingency table.
double kappa(const MatrixXd& table);
double kappa_from_agreement(double p_a, double p_e);

struct SplitSpec {
  double train_fraction = 0.8;
  int n_splits = 10;
  uint64_t seed = 1;
};

struct SplitReport {
  std::vector<Metrics> per_split;
  std::array<double, 5> mean{};
  std::array<double, 5> ci{};  // 1.96 * sample std / sqrt(n)
  std::vector<std::string> notes;
};

SplitReport aggregate_splits(const std::vector<Metrics>& per_split);

// Everything the trainer needs that does not depend on a split.
struct PreparedData {
  CitationNetwork net;
  MatrixXd x, z;
  std::vector<LabeledEdge> labeled;  // every edge with a 0/1 label
};

SplitReport run_splits(const PreparedData& data, const TrainConfig& base, const SplitSpec& spec,
                       int jobs = 1);

struct VariantRow {
  Variant variant;
  SplitReport report;
};

std::vector<VariantRow> ablate(const PreparedData& data, const TrainConfig& base,
                               const SplitSpec& spec, int jobs = 1);

enum class SweepAxis { BatchSize, EmbeddingDim, LearningRate, AeArch };

SweepAxis sweep_axis_from_name(const std::string& name);
const char* sweep_axis_name(SweepAxis axis);

struct SweepValue {
  // one of the three payloads is read, depending on the axis
  long int_value = 0;
  double real_value = 0.0;
  std::vector<int> arch;

  std::string display(SweepAxis axis) const;
};

struct SweepRow {
  SweepValue value;
  SplitReport report;
};

std::vector<SweepRow> sweep(const PreparedData& data, const TrainConfig& base,
                            const SplitSpec& spec, SweepAxis axis,
                            const std::vector<SweepValue>& values, int jobs = 1);

// Report rendering: a fixed-width table plus line-delimited records
// (one JSON object per metric per run).
std::string render_split_report(const std::string& run_name, const SplitReport& report);
std::string split_report_jsonl(const std::string& run_name, const SplitReport& report);

}  // namespace glad
