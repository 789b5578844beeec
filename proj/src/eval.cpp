#include "glad/eval.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <sstream>
#include <thread>

namespace glad {

using nlohmann::json;

double Metrics::metric(int idx) const {
  switch (idx) {
    case 0: return accuracy;
    case 1: return precision;
    case 2: return recall;
    case 3: return f1;
    case 4: return auc;
  }
  throw Error("metric index out of range");
}

Metrics compute_metrics(const std::vector<int>& labels, const std::vector<int>& predictions,
                        const std::vector<double>& scores) {
  if (labels.size() != predictions.size() || labels.size() != scores.size())
    throw Error("compute_metrics: length mismatch");
  Metrics m;
  for (size_t i = 0; i < labels.size(); ++i) {
    int y = labels[i];
    if (y != 0 && y != 1) throw Error("compute_metrics: labels must be 0/1");
    int p = predictions[i];
    if (y == 1) {
      (p == 1 ? m.counts.tp : m.counts.fn)++;
    } else {
      (p == 1 ? m.counts.fp : m.counts.tn)++;
    }
  }
  long total = m.counts.tp + m.counts.fp + m.counts.fn + m.counts.tn;
  m.accuracy = total > 0
                   ? static_cast<double>(m.counts.tp + m.counts.tn) / static_cast<double>(total)
                   : 0.0;
  if (m.counts.tp + m.counts.fp > 0) {
    m.precision = static_cast<double>(m.counts.tp) /
                  static_cast<double>(m.counts.tp + m.counts.fp);
  } else {
    m.precision_defined = false;
  }
  if (m.counts.tp + m.counts.fn > 0) {
    m.recall = static_cast<double>(m.counts.tp) /
               static_cast<double>(m.counts.tp + m.counts.fn);
  } else {
    m.recall_defined = false;
  }
  if (m.precision_defined && m.recall_defined && m.precision + m.recall > 0.0) {
    m.f1 = 2.0 * m.precision * m.recall / (m.precision + m.recall);
  } else {
    m.f1_defined = false;
  }
  m.auc = auc_rank(labels, scores, &m.auc_defined);
  return m;
}

double auc_rank(const std::vector<int>& labels, const std::vector<double>& scores,
                bool* defined) {
  long n_pos = 0, n_neg = 0;
  for (int y : labels) (y == 1 ? n_pos : n_neg)++;
  if (n_pos == 0 || n_neg == 0) {
    if (defined) *defined = false;
    return 0.0;
  }
  if (defined) *defined = true;

  std::vector<size_t> order(labels.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](size_t a, size_t b) { return scores[a] < scores[b]; });

  // average ranks over tied score groups
  double rank_sum_pos = 0.0;
  size_t i = 0;
  while (i < order.size()) {
    size_t j = i;
    while (j + 1 < order.size() && scores[order[j + 1]] == scores[order[i]]) ++j;
    double avg_rank = 0.5 * (static_cast<double>(i + 1) + static_cast<double>(j + 1));
    for (size_t k = i; k <= j; ++k)
      if (labels[order[k]] == 1) rank_sum_pos += avg_rank;
    i = j + 1;
  }
  double u = rank_sum_pos - 0.5 * static_cast<double>(n_pos) * static_cast<double>(n_pos + 1);
  return u / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

double kappa_from_agreement(double p_a, double p_e) {
  if (std::abs(1.0 - p_e) < 1e-15) throw Error("kappa: undefined when chance agreement is 1");
  return (p_a - p_e) / (1.0 - p_e);
}

double kappa(const MatrixXd& table) {
  if (table.rows() != table.cols() || table.rows() == 0)
    throw Error("kappa: table must be square and non-empty");
  double total = table.sum();
  if (total <= 0.0) throw Error("kappa: empty table");
  double p_a = table.trace() / total;
  double p_e = 0.0;
  for (Eigen::Index i = 0; i < table.rows(); ++i)
    p_e += (table.row(i).sum() / total) * (table.col(i).sum() / total);
  return kappa_from_agreement(p_a, p_e);
}

SplitReport aggregate_splits(const std::vector<Metrics>& per_split) {
  SplitReport report;
  report.per_split = per_split;
  const double n = static_cast<double>(per_split.size());
  if (per_split.empty()) return report;
  for (int k = 0; k < 5; ++k) {
    double mean = 0.0;
    for (const Metrics& m : per_split) mean += m.metric(k);
    mean /= n;
    double var = 0.0;
    for (const Metrics& m : per_split) var += (m.metric(k) - mean) * (m.metric(k) - mean);
    double sd = per_split.size() > 1 ? std::sqrt(var / (n - 1.0)) : 0.0;
    report.mean[static_cast<size_t>(k)] = mean;
    report.ci[static_cast<size_t>(k)] = 1.96 * sd / std::sqrt(n);
  }
  return report;
}

namespace {

struct SplitTask {
  std::vector<LabeledEdge> train;
  std::vector<int> test_edges;
  std::vector<int> test_labels;
  uint64_t train_seed = 0;
};

// Deterministic split of the labeled edges; resamples (and notes it) until
// the training side holds both classes.
SplitTask make_split(const PreparedData& data, const SplitSpec& spec, int split_idx,
                     std::vector<std::string>* notes) {
  SplitTask task;
  task.train_seed = derive_seed(spec.seed, 2 * static_cast<uint64_t>(split_idx) + 1);
  size_t n = data.labeled.size();
  size_t n_train = static_cast<size_t>(std::floor(spec.train_fraction * static_cast<double>(n)));
  n_train = std::min(n_train, n);

  for (int attempt = 0; attempt < 100; ++attempt) {
    Rng rng(derive_seed(spec.seed,
                        2 * static_cast<uint64_t>(split_idx) + 1000 * static_cast<uint64_t>(attempt)));
    std::vector<size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    rng.shuffle(order);

    task.train.clear();
    task.test_edges.clear();
    task.test_labels.clear();
    bool pos = false, neg = false;
    for (size_t i = 0; i < n; ++i) {
      const LabeledEdge& le = data.labeled[order[i]];
      if (i < n_train) {
        task.train.push_back(le);
        (le.label == 1 ? pos : neg) = true;
      } else {
        task.test_edges.push_back(le.edge);
        task.test_labels.push_back(le.label);
      }
    }
    if (n_train == n) {
      // degenerate split: evaluate on the training set itself
      for (const LabeledEdge& le : task.train) {
        task.test_edges.push_back(le.edge);
        task.test_labels.push_back(le.label);
      }
    }
    if (pos && neg) return task;
    if (notes)
      notes->push_back("split " + std::to_string(split_idx) + ": resampled (attempt " +
                       std::to_string(attempt + 1) + "), single-class training set");
  }
  throw Error("run_splits: unable to draw a two-class training split");
}

Metrics evaluate_split(const PreparedData& data, const TrainConfig& base, const SplitTask& task) {
  TrainConfig cfg = base;
  cfg.seed = task.train_seed;
  JointModel model = train_glad(data.net, data.x, data.z, task.train, cfg);
  std::vector<Prediction> preds = predict_edges(model, data.net, task.test_edges);
  std::vector<int> labels = task.test_labels;
  std::vector<int> hat(preds.size());
  std::vector<double> scores(preds.size());
  for (size_t i = 0; i < preds.size(); ++i) {
    hat[i] = preds[i].label_hat;
    scores[i] = preds[i].score;
  }
  return compute_metrics(labels, hat, scores);
}

}  // namespace

SplitReport run_splits(const PreparedData& data, const TrainConfig& base, const SplitSpec& spec,
                       int jobs) {
  if (spec.n_splits < 1) throw Error("run_splits: need at least one split");
  std::vector<std::string> notes;
  std::vector<SplitTask> tasks;
  tasks.reserve(static_cast<size_t>(spec.n_splits));
  for (int s = 0; s < spec.n_splits; ++s) tasks.push_back(make_split(data, spec, s, &notes));

  std::vector<Metrics> results(tasks.size());
  std::vector<std::string> errors(tasks.size());
  int workers = std::max(1, std::min<int>(jobs, static_cast<int>(tasks.size())));
  if (workers == 1) {
    for (size_t s = 0; s < tasks.size(); ++s) {
      try {
        results[s] = evaluate_split(data, base, tasks[s]);
      } catch (const std::exception& e) {
        throw Error("split " + std::to_string(s) + ": " + e.what());
      }
    }
  } else {
    std::vector<std::thread> pool;
    std::atomic<size_t> next{0};
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (;;) {
          size_t s = next.fetch_add(1);
          if (s >= tasks.size()) return;
          try {
            results[s] = evaluate_split(data, base, tasks[s]);
          } catch (const std::exception& e) {
            errors[s] = e.what();
          }
        }
      });
    }
    for (std::thread& t : pool) t.join();
    for (size_t s = 0; s < errors.size(); ++s)
      if (!errors[s].empty()) throw Error("split " + std::to_string(s) + ": " + errors[s]);
  }

  SplitReport report = aggregate_splits(results);
  report.notes = std::move(notes);
  return report;
}

std::vector<VariantRow> ablate(const PreparedData& data, const TrainConfig& base,
                               const SplitSpec& spec, int jobs) {
  std::vector<VariantRow> rows;
  rows.reserve(kAllVariants.size());
  for (Variant v : kAllVariants) {
    TrainConfig cfg = base;
    cfg.variant = v;
    rows.push_back({v, run_splits(data, cfg, spec, jobs)});
  }
  return rows;
}

SweepAxis sweep_axis_from_name(const std::string& name) {
  if (name == "batch_size") return SweepAxis::BatchSize;
  if (name == "embedding_dim") return SweepAxis::EmbeddingDim;
  if (name == "learning_rate") return SweepAxis::LearningRate;
  if (name == "ae_arch") return SweepAxis::AeArch;
  throw Error("unknown sweep axis: " + name);
}

const char* sweep_axis_name(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::BatchSize: return "batch_size";
    case SweepAxis::EmbeddingDim: return "embedding_dim";
    case SweepAxis::LearningRate: return "learning_rate";
    case SweepAxis::AeArch: return "ae_arch";
  }
  throw Error("unknown sweep axis");
}

std::string SweepValue::display(SweepAxis axis) const {
  switch (axis) {
    case SweepAxis::BatchSize:
    case SweepAxis::EmbeddingDim:
      return std::to_string(int_value);
    case SweepAxis::LearningRate:
      return fmt_g17(real_value);
    case SweepAxis::AeArch: {
      std::string s;
      for (size_t i = 0; i < arch.size(); ++i) s += (i ? "," : "") + std::to_string(arch[i]);
      return s;
    }
  }
  throw Error("unknown sweep axis");
}

std::vector<SweepRow> sweep(const PreparedData& data, const TrainConfig& base,
                            const SplitSpec& spec, SweepAxis axis,
                            const std::vector<SweepValue>& values, int jobs) {
  if (values.empty()) throw Error("sweep: empty value list");
  std::vector<SweepRow> rows;
  rows.reserve(values.size());
  for (const SweepValue& v : values) {
    TrainConfig cfg = base;
    switch (axis) {
      case SweepAxis::BatchSize:
        cfg.batch_size = static_cast<int>(v.int_value);
        break;
      case SweepAxis::EmbeddingDim:
        cfg.d1 = static_cast<int>(v.int_value);
        break;
      case SweepAxis::LearningRate:
        cfg.lr = v.real_value;
        break;
      case SweepAxis::AeArch:
        cfg.ae_hidden = v.arch;
        break;
    }
    rows.push_back({v, run_splits(data, cfg, spec, jobs)});
  }
  return rows;
}

std::string render_split_report(const std::string& run_name, const SplitReport& report) {
  std::ostringstream out;
  char buf[160];
  std::snprintf(buf, sizeof(buf), "%-12s", run_name.c_str());
  out << buf;
  for (size_t k = 0; k < kMetricNames.size(); ++k) {
    std::snprintf(buf, sizeof(buf), "  %s=%.4f±%.4f", kMetricNames[k],
                  report.mean[k], report.ci[k]);
    out << buf;
  }
  out << "\n";
  return out.str();
}

std::string split_report_jsonl(const std::string& run_name, const SplitReport& report) {
  std::ostringstream out;
  for (size_t k = 0; k < kMetricNames.size(); ++k) {
    json j;
    j["run"] = run_name;
    j["metric"] = kMetricNames[k];
    j["mean"] = report.mean[k];
    j["ci"] = report.ci[k];
    json splits = json::array();
    for (const Metrics& m : report.per_split) splits.push_back(m.metric(static_cast<int>(k)));
    j["splits"] = splits;
    out << j.dump() << "\n";
  }
  return out.str();
}

}  // namespace glad
