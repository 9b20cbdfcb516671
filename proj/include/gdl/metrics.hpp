#pragma once

#include <cstddef>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace gdl {

/// Positive class is 1 ("good").
struct ConfusionMatrix {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  std::size_t tn = 0;

  std::size_t total() const { return tp + fp + fn + tn; }
  std::size_t correct() const { return tp + tn; }
  /// Swaps the roles of the two classes.
  ConfusionMatrix flipped() const { return {tn, fn, fp, tp}; }
  ConfusionMatrix transposed() const { return {tp, fn, fp, tn}; }

  friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;
};

ConfusionMatrix confusion(std::span<const int> predicted, std::span<const int> truth);

/// A metric value; degenerate is set when a denominator vanished and the
/// value was defined as 0.
struct Metric {
  double value = 0.0;
  bool degenerate = false;
};

Metric accuracy(const ConfusionMatrix& cm);
Metric precision(const ConfusionMatrix& cm);
Metric recall(const ConfusionMatrix& cm);
Metric f1(const ConfusionMatrix& cm);
Metric mcc(const ConfusionMatrix& cm);

/// Fraction of all graphs classed correctly, counting both the unknown set
/// (model predictions) and the known set (training labels vs true labels).
double total_set_accuracy(const ConfusionMatrix& unknown, const ConfusionMatrix& known, std::size_t n_all);

/// Expected total set accuracy of coin-flip predictions when a fraction f of
/// the set is known exactly.
double random_baseline(double known_fraction);

struct MetricsSummary {
  ConfusionMatrix cm;
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double mcc = 0.0;
  /// Names of the metrics whose denominators vanished.
  std::vector<std::string> degenerate;

  friend bool operator==(const MetricsSummary&, const MetricsSummary&) = default;
};

MetricsSummary summarize(const ConfusionMatrix& cm);

/// One line of a metrics table.
struct MetricsRow {
  std::size_t n_known = 0;
  double pct_known = 0.0;
  double train_seconds = 0.0;
  MetricsSummary metrics;
  /// NaN when ground truth for the whole set is unavailable.
  double total_set_accuracy = 0.0;
};

inline constexpr const char* kMetricsCsvHeader =
    "N_known,pct_known,train_seconds,accuracy,precision,recall,f1,mcc,total_set_accuracy";

void write_metrics_csv(std::ostream& out, std::span<const MetricsRow> rows);

}  // namespace gdl
