#include "gdl/metrics.hpp"

#include <cmath>
#include <cstdio>

namespace gdl {

ConfusionMatrix confusion(std::span<const int> predicted, std::span<const int> truth) {
  if (predicted.size() != truth.size()) {
    throw std::invalid_argument("confusion: " + std::to_string(predicted.size()) + " predictions for " +
                                std::to_string(truth.size()) + " labels");
  }
  ConfusionMatrix cm;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const int p = predicted[i], t = truth[i];
    if ((p != 0 && p != 1) || (t != 0 && t != 1)) throw std::invalid_argument("confusion: labels must be 0 or 1");
    if (p == 1) {
      t == 1 ? ++cm.tp : ++cm.fp;
    } else {
      t == 1 ? ++cm.fn : ++cm.tn;
    }
  }
  return cm;
}

namespace {

Metric ratio(double num, double den) {
  if (den == 0.0) return {0.0, true};
  return {num / den, false};
}

double d(std::size_t v) { return static_cast<double>(v); }

}  // namespace

Metric accuracy(const ConfusionMatrix& cm) { return ratio(d(cm.correct()), d(cm.total())); }

Metric precision(const ConfusionMatrix& cm) { return ratio(d(cm.tp), d(cm.tp + cm.fp)); }

Metric recall(const ConfusionMatrix& cm) { return ratio(d(cm.tp), d(cm.tp + cm.fn)); }

Metric f1(const ConfusionMatrix& cm) {
  const Metric p = precision(cm), r = recall(cm);
  if (p.degenerate || r.degenerate) return {0.0, true};
  return ratio(2.0 * p.value * r.value, p.value + r.value);
}

Metric mcc(const ConfusionMatrix& cm) {
  const double num = d(cm.tp) * d(cm.tn) - d(cm.fp) * d(cm.fn);
  const double den = std::sqrt(d(cm.tp + cm.fp) * d(cm.tp + cm.fn) * d(cm.tn + cm.fp) * d(cm.tn + cm.fn));
  return ratio(num, den);
}

double total_set_accuracy(const ConfusionMatrix& unknown, const ConfusionMatrix& known, std::size_t n_all) {
  if (unknown.total() + known.total() != n_all) {
    throw std::invalid_argument("total_set_accuracy: " + std::to_string(unknown.total()) + " unknown + " +
                                std::to_string(known.total()) + " known != " + std::to_string(n_all));
  }
  if (n_all == 0) throw std::invalid_argument("total_set_accuracy: empty set");
  return d(unknown.correct() + known.correct()) / d(n_all);
}

double random_baseline(double known_fraction) {
  if (!(known_fraction >= 0.0 && known_fraction <= 1.0)) throw std::invalid_argument("fraction outside [0, 1]");
  return known_fraction + (1.0 - known_fraction) / 2.0;
}

MetricsSummary summarize(const ConfusionMatrix& cm) {
  MetricsSummary s;
  s.cm = cm;
  auto take = [&s](const char* name, Metric m) {
    if (m.degenerate) s.degenerate.emplace_back(name);
    return m.value;
  };
  s.accuracy = take("accuracy", accuracy(cm));
  s.precision = take("precision", precision(cm));
  s.recall = take("recall", recall(cm));
  s.f1 = take("f1", f1(cm));
  s.mcc = take("mcc", mcc(cm));
  return s;
}

namespace {

void cell(std::ostream& out, double v, const char* format) {
  if (std::isnan(v)) {
    out << "NA";
    return;
  }
  char buf[64];
  std::snprintf(buf, sizeof buf, format, v);
  out << buf;
}

}  // namespace

void write_metrics_csv(std::ostream& out, std::span<const MetricsRow> rows) {
  out << kMetricsCsvHeader << '\n';
  for (const auto& r : rows) {
    out << r.n_known << ',';
    cell(out, r.pct_known, "%.6g");
    out << ',';
    cell(out, r.train_seconds, "%.6g");
    for (double v : {r.metrics.accuracy, r.metrics.precision, r.metrics.recall, r.metrics.f1, r.metrics.mcc,
                     r.total_set_accuracy}) {
      out << ',';
      cell(out, v, "%.6f");
    }
    out << '\n';
  }
}

}  // namespace gdl
