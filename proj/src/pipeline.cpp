#include "gdl/pipeline.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstring>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <unordered_set>

#include "gdl/random.hpp"

namespace gdl {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string fmt(double v) {
  char buf[64];
  auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

double performance_of(const CircuitGraph& g) {
  if (!g.performance()) throw std::invalid_argument("graph '" + g.id() + "' has no performance value");
  return *g.performance();
}

std::vector<double> performances(const GraphDataset& d, std::span<const std::size_t> idx) {
  std::vector<double> out;
  out.reserve(idx.size());
  for (std::size_t i : idx) out.push_back(performance_of(d[i]));
  return out;
}

std::vector<std::string> ids_of(const GraphDataset& d, std::span<const std::size_t> idx) {
  std::vector<std::string> out;
  out.reserve(idx.size());
  for (std::size_t i : idx) out.push_back(d[i].id());
  return out;
}

SetStats sizes_only(std::size_t n) {
  SetStats s = set_stats({});
  s.size = n;
  return s;
}

std::vector<std::pair<std::string, std::string>> snapshot(const SplitSpec& spec, FeatureMode mode,
                                                          const TrainConfig& c) {
  return {{"known_fraction", fmt(spec.known_fraction)},
          {"training_fraction", fmt(spec.training_fraction_of_known)},
          {"split_seed", std::to_string(spec.seed)},
          {"features", to_string(mode)},
          {"learning_rate", fmt(c.learning_rate)},
          {"epochs", std::to_string(c.epochs)},
          {"batch_size", std::to_string(c.batch_size)},
          {"seed", std::to_string(c.seed)},
          {"beta1", fmt(c.beta1)},
          {"beta2", fmt(c.beta2)},
          {"epsilon", fmt(c.epsilon)},
          {"dropout", fmt(c.dropout_p)},
          {"hidden", std::to_string(c.hidden)}};
}

struct Labeled {
  std::vector<std::size_t> indices;
  MedianLabels labels;
  std::size_t ones = 0;
};

Labeled label_known(const GraphDataset& d, std::vector<std::size_t> known) {
  Labeled out;
  out.indices = std::move(known);
  const auto j = performances(d, out.indices);
  const auto ids = ids_of(d, out.indices);
  out.labels = label_by_median(j, ids);
  out.ones = static_cast<std::size_t>(std::count(out.labels.labels.begin(), out.labels.labels.end(), 1));
  return out;
}

struct Prepared {
  std::vector<std::size_t> training, validation;
  std::vector<int> training_labels, validation_labels;
};

Prepared prepare(const Labeled& l, const Trainer& trainer, double training_fraction, std::uint64_t seed) {
  Prepared p;
  if (trainer.min_per_class() >= 2) {
    const auto tv = split_train_validation(l.labels.labels, training_fraction, seed);
    for (std::size_t pos : tv.training) {
      p.training.push_back(l.indices[pos]);
      p.training_labels.push_back(l.labels.labels[pos]);
    }
    for (std::size_t pos : tv.validation) {
      p.validation.push_back(l.indices[pos]);
      p.validation_labels.push_back(l.labels.labels[pos]);
    }
  } else {
    p.training = l.indices;
    p.training_labels = l.labels.labels;
  }
  return p;
}

/// Empty string when both classes are large enough.
std::string class_shortfall(const Labeled& l, const Trainer& trainer) {
  const std::size_t need = static_cast<std::size_t>(trainer.min_per_class());
  const std::size_t zeros = l.indices.size() - l.ones;
  if (l.ones >= need && zeros >= need) return {};
  return "known set of " + std::to_string(l.indices.size()) + " graphs has " + std::to_string(l.ones) +
         " good / " + std::to_string(zeros) + " bad; the trainer needs at least " + std::to_string(need) +
         " per class";
}

KnownSplit initial_split(const GraphDataset& d, const SplitSpec& spec, bool has_truth) {
  if (has_truth) return split_known(d, spec);
  KnownSplit ks;
  for (std::size_t i = 0; i < d.size(); ++i) (d[i].performance() ? ks.known : ks.unknown).push_back(i);
  if (ks.known.empty()) throw std::invalid_argument("no graph in the dataset carries a performance value");
  return ks;
}

bool same(double a, double b) {
  return (std::isnan(a) && std::isnan(b)) || std::memcmp(&a, &b, sizeof(double)) == 0;
}

bool same(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (!same(a[i], b[i])) return false;
  return true;
}

bool same(const std::optional<double>& a, const std::optional<double>& b) {
  return a.has_value() == b.has_value() && (!a || same(*a, *b));
}

bool same(const SetStats& a, const SetStats& b) {
  return a.size == b.size && same(a.min, b.min) && same(a.q1, b.q1) && same(a.median, b.median) &&
         same(a.q3, b.q3) && same(a.max, b.max);
}

bool same(const MetricsSummary& a, const MetricsSummary& b) {
  return a.cm == b.cm && same(a.accuracy, b.accuracy) && same(a.precision, b.precision) &&
         same(a.recall, b.recall) && same(a.f1, b.f1) && same(a.mcc, b.mcc) && a.degenerate == b.degenerate;
}

bool same(const std::optional<TrainHistory>& a, const std::optional<TrainHistory>& b) {
  if (a.has_value() != b.has_value()) return false;
  if (!a) return true;
  return same(a->train_loss, b->train_loss) && same(a->train_accuracy, b->train_accuracy) &&
         same(a->validation_accuracy, b->validation_accuracy) && same(a->wall_seconds, b->wall_seconds);
}

bool same(const ExperimentResult& a, const ExperimentResult& b) {
  if (a.metrics.has_value() != b.metrics.has_value() || (a.metrics && !same(*a.metrics, *b.metrics))) return false;
  return same(a.known_fraction, b.known_fraction) && a.n_all == b.n_all && a.n_known == b.n_known &&
         a.n_unknown == b.n_unknown && a.n_training == b.n_training && a.n_validation == b.n_validation &&
         same(a.threshold, b.threshold) && a.threshold_degenerate == b.threshold_degenerate &&
         a.metrics_on == b.metrics_on && a.known_cm == b.known_cm &&
         same(a.total_set_accuracy, b.total_set_accuracy) && same(a.random_baseline, b.random_baseline) &&
         same(a.history, b.history) && same(a.train_seconds, b.train_seconds) && a.checkpoint == b.checkpoint &&
         a.error == b.error;
}

bool same(const IterationRecord& a, const IterationRecord& b) {
  return a.k == b.k && same(a.known, b.known) && same(a.known1, b.known1) && same(a.known0, b.known0) &&
         same(a.predicted1, b.predicted1) && same(a.predicted0, b.predicted0) && same(a.threshold, b.threshold) &&
         a.threshold_degenerate == b.threshold_degenerate && a.confusion == b.confusion &&
         same(a.train_seconds, b.train_seconds) && a.checkpoint == b.checkpoint;
}

template <typename T>
bool all_same(const std::vector<T>& a, const std::vector<T>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (!same(a[i], b[i])) return false;
  return true;
}

}  // namespace

void SplitSpec::check() const {
  if (!(known_fraction > 0.0 && known_fraction <= 1.0)) throw std::invalid_argument("known_fraction must be in (0, 1]");
  if (!(training_fraction_of_known > 0.0 && training_fraction_of_known < 1.0)) {
    throw std::invalid_argument("training_fraction_of_known must be in (0, 1)");
  }
}

KnownSplit split_known(std::size_t n_all, const SplitSpec& spec) {
  spec.check();
  if (n_all == 0) throw std::invalid_argument("split_known: empty dataset");
  const auto n_known = static_cast<std::size_t>(std::floor(spec.known_fraction * static_cast<double>(n_all) + 1e-9));
  if (n_known == 0) {
    throw std::invalid_argument("split_known: fraction " + fmt(spec.known_fraction) + " of " +
                                std::to_string(n_all) + " graphs leaves no known graph");
  }
  std::vector<std::size_t> order(n_all);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(spec.seed);
  rng.shuffle(order);
  KnownSplit out;
  out.known.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_known));
  out.unknown.assign(order.begin() + static_cast<std::ptrdiff_t>(n_known), order.end());
  std::sort(out.known.begin(), out.known.end());
  std::sort(out.unknown.begin(), out.unknown.end());
  return out;
}

KnownSplit split_known(const GraphDataset& dataset, const SplitSpec& spec) {
  return split_known(dataset.size(), spec);
}

MedianLabels label_by_median(std::span<const double> performance, std::span<const std::string> ids) {
  if (performance.size() != ids.size()) throw std::invalid_argument("label_by_median: size mismatch");
  const std::size_t n = performance.size();
  MedianLabels out;
  out.labels.assign(n, 0);
  if (n == 0) {
    out.threshold = kNaN;
    return out;
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (performance[a] != performance[b]) return performance[a] < performance[b];
    return ids[a] < ids[b];
  });
  const std::size_t good = (n + 1) / 2;
  for (std::size_t r = 0; r < good; ++r) out.labels[order[r]] = 1;
  if (good < n) {
    const double lo = performance[order[good - 1]], hi = performance[order[good]];
    out.threshold = lo + (hi - lo) / 2.0;
    out.degenerate = lo == hi;
  } else {
    out.threshold = performance[order[n - 1]];
  }
  return out;
}

TrainValidationSplit split_train_validation(std::span<const int> labels, double training_fraction,
                                            std::uint64_t seed) {
  if (!(training_fraction > 0.0 && training_fraction < 1.0)) {
    throw std::invalid_argument("training fraction must be in (0, 1)");
  }
  std::array<std::vector<std::size_t>, 2> members;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] != 0 && labels[i] != 1) throw std::invalid_argument("labels must be 0 or 1");
    members[static_cast<std::size_t>(labels[i])].push_back(i);
  }
  for (int c = 0; c < 2; ++c) {
    if (members[static_cast<std::size_t>(c)].size() < 2) {
      throw std::invalid_argument("class " + std::to_string(c) + " has " +
                                  std::to_string(members[static_cast<std::size_t>(c)].size()) +
                                  " members; at least 2 are needed for a training/validation split");
    }
  }

  // Largest-remainder apportionment of the training total over the classes.
  const auto total = static_cast<std::size_t>(std::floor(training_fraction * static_cast<double>(labels.size()) + 1e-9));
  std::array<std::size_t, 2> take{};
  std::array<double, 2> frac{};
  std::size_t assigned = 0;
  for (std::size_t c = 0; c < 2; ++c) {
    const double quota = training_fraction * static_cast<double>(members[c].size());
    take[c] = static_cast<std::size_t>(std::floor(quota + 1e-9));
    frac[c] = quota - static_cast<double>(take[c]);
    assigned += take[c];
  }
  for (std::size_t extra = total > assigned ? total - assigned : 0; extra > 0; --extra) {
    const std::size_t c = frac[1] > frac[0] ? 1 : 0;
    ++take[c];
    frac[c] = -1.0;
  }
  for (std::size_t c = 0; c < 2; ++c) take[c] = std::clamp<std::size_t>(take[c], 1, members[c].size() - 1);

  Rng rng(seed);
  TrainValidationSplit out;
  for (std::size_t c = 0; c < 2; ++c) {
    auto m = members[c];
    rng.shuffle(m);
    out.training.insert(out.training.end(), m.begin(), m.begin() + static_cast<std::ptrdiff_t>(take[c]));
    out.validation.insert(out.validation.end(), m.begin() + static_cast<std::ptrdiff_t>(take[c]), m.end());
  }
  std::sort(out.training.begin(), out.training.end());
  std::sort(out.validation.begin(), out.validation.end());
  return out;
}

SetStats set_stats(std::vector<double> values) {
  SetStats s;
  s.size = values.size();
  if (values.empty()) {
    s.min = s.q1 = s.median = s.q3 = s.max = kNaN;
    return s;
  }
  std::sort(values.begin(), values.end());
  auto q = [&](double p) {
    const double h = p * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
  };
  s.min = values.front();
  s.q1 = q(0.25);
  s.median = q(0.5);
  s.q3 = q(0.75);
  s.max = values.back();
  return s;
}

GnnTrainer::GnnTrainer(const GraphDataset& dataset, FeatureMode mode, TrainConfig config)
    : dataset_(dataset), mode_(mode), config_(config), cache_(dataset.size()) {
  config_.check();
}

const GraphSample& GnnTrainer::sample(std::size_t i) {
  auto& slot = cache_.at(i);
  if (!slot) slot = make_sample(dataset_[i], mode_);
  return *slot;
}

TrainingOutcome GnnTrainer::fit_predict(const TrainingTask& task) {
  auto gather = [&](std::span<const std::size_t> idx, std::span<const int> labels) {
    std::vector<GraphSample> out;
    out.reserve(idx.size());
    for (std::size_t k = 0; k < idx.size(); ++k) {
      out.push_back(sample(idx[k]));
      out.back().label = labels.empty() ? -1 : labels[k];
    }
    return out;
  };
  const auto training = gather(task.training, task.training_labels);
  const auto validation = gather(task.validation, task.validation_labels);
  const auto unknown = gather(task.unknown, {});

  TrainConfig cfg = config_;
  cfg.seed = derive_seed(task.model_seed, 1);
  const GdlModel init = GdlModel::initialize(feature_width(mode_), cfg.hidden, cfg.dropout_p, task.model_seed);
  auto trained = train(init, training, validation, cfg);

  TrainingOutcome out;
  out.unknown_predictions = predict(trained.model, unknown).classes;
  out.validation_predictions = predict(trained.model, validation).classes;
  out.seconds = trained.history.wall_seconds;
  out.history = std::move(trained.history);
  out.checkpoint = Checkpoint{std::move(trained.model), cfg};
  return out;
}

TrainingOutcome OracleTrainer::fit_predict(const TrainingTask& task) {
  TrainingOutcome out;
  for (std::size_t i : task.unknown) out.unknown_predictions.push_back(performance_of(dataset_[i]) < task.threshold);
  for (std::size_t i : task.validation) {
    out.validation_predictions.push_back(performance_of(dataset_[i]) < task.threshold);
  }
  return out;
}

MetricsOn parse_metrics_on(const std::string& name) {
  if (name == "unknown") return MetricsOn::Unknown;
  if (name == "validation") return MetricsOn::Validation;
  throw std::invalid_argument("unknown metrics set '" + name + "' (expected unknown or validation)");
}

std::string to_string(MetricsOn on) { return on == MetricsOn::Unknown ? "unknown" : "validation"; }

RunReport RunReport::without_timings() const {
  RunReport r = *this;
  r.wall_seconds = 0.0;
  for (auto& e : r.experiments) {
    e.train_seconds = 0.0;
    if (e.history) e.history->wall_seconds = 0.0;
  }
  for (auto& it : r.iterations) it.train_seconds = 0.0;
  return r;
}

bool operator==(const RunReport& a, const RunReport& b) {
  return a.mode == b.mode && a.config == b.config && a.dataset == b.dataset && a.n_all == b.n_all &&
         a.has_truth == b.has_truth && all_same(a.experiments, b.experiments) &&
         all_same(a.iterations, b.iterations) && a.final_set == b.final_set &&
         std::equal(a.retention.begin(), a.retention.end(), b.retention.begin(), b.retention.end(),
                    [](const Retention& x, const Retention& y) {
                      return x.k == y.k && x.retained == y.retained && same(x.expected_random, y.expected_random);
                    }) &&
         a.stopped_early == b.stopped_early && a.stop_reason == b.stop_reason && same(a.wall_seconds, b.wall_seconds);
}

namespace {

ExperimentResult run_experiment_impl(const GraphDataset& dataset, const SplitSpec& spec, Trainer& trainer,
                                     std::uint64_t model_seed, const ExperimentOptions& options,
                                     std::optional<Checkpoint>* kept) {
  spec.check();
  if (dataset.empty()) throw std::invalid_argument("run_experiment: empty dataset");
  const bool has_truth = dataset.fully_sized();
  const KnownSplit ks = initial_split(dataset, spec, has_truth);

  ExperimentResult r;
  r.n_all = dataset.size();
  r.n_known = ks.known.size();
  r.n_unknown = ks.unknown.size();
  r.known_fraction = has_truth ? spec.known_fraction : static_cast<double>(r.n_known) / static_cast<double>(r.n_all);
  r.metrics_on = options.metrics_on;
  r.random_baseline = random_baseline(static_cast<double>(r.n_known) / static_cast<double>(r.n_all));

  const Labeled known = label_known(dataset, ks.known);
  r.threshold = known.labels.threshold;
  r.threshold_degenerate = known.labels.degenerate;
  if (auto why = class_shortfall(known, trainer); !why.empty()) throw std::invalid_argument(why);
  const Prepared p = prepare(known, trainer, spec.training_fraction_of_known, derive_seed(spec.seed, 1));
  r.n_training = p.training.size();
  r.n_validation = p.validation.size();

  TrainingTask task{p.training, p.training_labels, p.validation, p.validation_labels, ks.unknown,
                    known.labels.threshold, model_seed};
  TrainingOutcome outcome = trainer.fit_predict(task);
  r.history = std::move(outcome.history);
  r.train_seconds = outcome.seconds;
  if (kept) *kept = std::move(outcome.checkpoint);

  if (options.metrics_on == MetricsOn::Validation) {
    r.metrics = summarize(confusion(outcome.validation_predictions, p.validation_labels));
  }
  if (has_truth) {
    std::vector<std::size_t> all(dataset.size());
    std::iota(all.begin(), all.end(), 0);
    const auto truth = label_by_median(performances(dataset, all), ids_of(dataset, all)).labels;
    std::vector<int> truth_known, truth_unknown;
    for (std::size_t i : ks.known) truth_known.push_back(truth[i]);
    for (std::size_t i : ks.unknown) truth_unknown.push_back(truth[i]);
    const ConfusionMatrix cm_known = confusion(known.labels.labels, truth_known);
    const ConfusionMatrix cm_unknown = confusion(outcome.unknown_predictions, truth_unknown);
    r.known_cm = cm_known;
    r.total_set_accuracy = total_set_accuracy(cm_unknown, cm_known, dataset.size());
    if (options.metrics_on == MetricsOn::Unknown) r.metrics = summarize(cm_unknown);
  }
  return r;
}

}  // namespace

ExperimentResult run_experiment(const GraphDataset& dataset, const SplitSpec& spec, Trainer& trainer,
                                std::uint64_t model_seed, const ExperimentOptions& options) {
  return run_experiment_impl(dataset, spec, trainer, model_seed, options, nullptr);
}

RunResult run_experiment(const GraphDataset& dataset, const SplitSpec& spec, FeatureMode mode,
                         const TrainConfig& config, const ExperimentOptions& options) {
  const auto t0 = std::chrono::steady_clock::now();
  GnnTrainer trainer(dataset, mode, config);
  RunResult out;
  out.report.mode = "experiment";
  out.report.config = snapshot(spec, mode, config);
  out.report.config.emplace_back("metrics_on", to_string(options.metrics_on));
  out.report.dataset = dataset.provenance();
  out.report.n_all = dataset.size();
  out.report.has_truth = dataset.fully_sized();

  std::optional<Checkpoint> kept;
  auto result = run_experiment_impl(dataset, spec, trainer, config.seed, options, &kept);
  if (kept) {
    result.checkpoint = "model";
    out.checkpoints.emplace_back("model", std::move(*kept));
  }
  out.report.experiments.push_back(std::move(result));
  out.report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

RunResult sweep(const GraphDataset& dataset, const SplitSpec& spec, std::span<const double> fractions,
                FeatureMode mode, const TrainConfig& config, const ExperimentOptions& options) {
  const auto t0 = std::chrono::steady_clock::now();
  if (fractions.empty()) throw std::invalid_argument("sweep: no known fractions");
  GnnTrainer trainer(dataset, mode, config);
  RunResult out;
  out.report.mode = "sweep";
  out.report.config = snapshot(spec, mode, config);
  std::string list;
  for (double f : fractions) list += (list.empty() ? "" : ",") + fmt(f);
  out.report.config.emplace_back("known_fractions", list);
  out.report.config.emplace_back("metrics_on", to_string(options.metrics_on));
  out.report.dataset = dataset.provenance();
  out.report.n_all = dataset.size();
  out.report.has_truth = dataset.fully_sized();

  for (double f : fractions) {
    SplitSpec s = spec;
    s.known_fraction = f;
    try {
      out.report.experiments.push_back(run_experiment(dataset, s, trainer, config.seed, options));
    } catch (const std::invalid_argument& e) {
      ExperimentResult r;
      r.known_fraction = f;
      r.n_all = dataset.size();
      r.n_known = static_cast<std::size_t>(std::floor(f * static_cast<double>(dataset.size()) + 1e-9));
      r.n_unknown = dataset.size() - std::min(r.n_known, dataset.size());
      r.threshold = kNaN;
      r.metrics_on = options.metrics_on;
      r.random_baseline = random_baseline(std::clamp(f, 0.0, 1.0));
      r.error = e.what();
      out.report.experiments.push_back(std::move(r));
    }
  }
  out.report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

RunResult iterative_downselect(const GraphDataset& dataset, const SplitSpec& spec, Trainer& trainer,
                               std::uint64_t model_seed, int n_iterations) {
  const auto t0 = std::chrono::steady_clock::now();
  spec.check();
  if (n_iterations < 1) throw std::invalid_argument("n_iterations must be >= 1");
  if (dataset.empty()) throw std::invalid_argument("iterative_downselect: empty dataset");
  RunResult out;
  RunReport& rep = out.report;
  rep.mode = "iterate";
  rep.dataset = dataset.provenance();
  rep.n_all = dataset.size();
  rep.has_truth = dataset.fully_sized();

  const KnownSplit ks = initial_split(dataset, spec, rep.has_truth);
  std::vector<std::size_t> known = ks.known, unknown = ks.unknown;
  std::vector<std::size_t> final_set;

  for (int k = 1; k <= n_iterations; ++k) {
    const Labeled lab = label_known(dataset, known);
    if (auto why = class_shortfall(lab, trainer); !why.empty()) {
      rep.stopped_early = true;
      rep.stop_reason = "iteration " + std::to_string(k) + ": " + why;
      break;
    }
    const Prepared p = prepare(lab, trainer, spec.training_fraction_of_known, derive_seed(spec.seed, static_cast<std::uint64_t>(k)));
    TrainingTask task{p.training, p.training_labels, p.validation, p.validation_labels, unknown,
                      lab.labels.threshold, model_seed + static_cast<std::uint64_t>(k) - 1};
    TrainingOutcome outcome = trainer.fit_predict(task);

    std::vector<std::size_t> known1, known0, pred1, pred0;
    for (std::size_t i = 0; i < lab.indices.size(); ++i) {
      (lab.labels.labels[i] == 1 ? known1 : known0).push_back(lab.indices[i]);
    }
    for (std::size_t i = 0; i < unknown.size(); ++i) {
      (outcome.unknown_predictions[i] == 1 ? pred1 : pred0).push_back(unknown[i]);
    }

    IterationRecord rec;
    rec.k = k;
    rec.known = set_stats(performances(dataset, lab.indices));
    rec.known1 = set_stats(performances(dataset, known1));
    rec.known0 = set_stats(performances(dataset, known0));
    rec.threshold = lab.labels.threshold;
    rec.threshold_degenerate = lab.labels.degenerate;
    rec.train_seconds = outcome.seconds;
    if (rep.has_truth) {
      rec.predicted1 = set_stats(performances(dataset, pred1));
      rec.predicted0 = set_stats(performances(dataset, pred0));
      std::vector<int> truth;
      for (std::size_t i : unknown) truth.push_back(performance_of(dataset[i]) < lab.labels.threshold);
      rec.confusion = confusion(outcome.unknown_predictions, truth);
    } else {
      rec.predicted1 = sizes_only(pred1.size());
      rec.predicted0 = sizes_only(pred0.size());
    }
    if (outcome.checkpoint) {
      rec.checkpoint = "model-iter" + std::to_string(k);
      out.checkpoints.emplace_back(rec.checkpoint, std::move(*outcome.checkpoint));
    }
    rep.iterations.push_back(std::move(rec));

    final_set = known1;
    final_set.insert(final_set.end(), pred1.begin(), pred1.end());
    known = std::move(known1);
    unknown = std::move(pred1);
  }

  std::sort(final_set.begin(), final_set.end());
  rep.final_set = ids_of(dataset, final_set);
  if (rep.has_truth) {
    for (std::size_t k : {std::size_t{10}, std::size_t{100}, std::size_t{1000}}) {
      if (k <= dataset.size()) rep.retention.push_back(topk_retention(rep.final_set, dataset, k));
    }
  }
  rep.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

RunResult iterative_downselect(const GraphDataset& dataset, const SplitSpec& spec, FeatureMode mode,
                               const TrainConfig& config, int n_iterations) {
  GnnTrainer trainer(dataset, mode, config);
  RunResult out = iterative_downselect(dataset, spec, trainer, config.seed, n_iterations);
  auto cfg = snapshot(spec, mode, config);
  cfg.emplace_back("iterations", std::to_string(n_iterations));
  out.report.config = std::move(cfg);
  return out;
}

std::vector<std::size_t> rank_by_performance(const GraphDataset& dataset) {
  std::vector<double> j(dataset.size());
  for (std::size_t i = 0; i < dataset.size(); ++i) j[i] = performance_of(dataset[i]);
  std::vector<std::size_t> order(dataset.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (j[a] != j[b]) return j[a] < j[b];
    return dataset[a].id() < dataset[b].id();
  });
  return order;
}

Retention topk_retention(std::span<const std::string> final_set, const GraphDataset& dataset, std::size_t k) {
  if (k > dataset.size()) {
    throw std::invalid_argument("top-" + std::to_string(k) + " requested from " + std::to_string(dataset.size()) +
                                " graphs");
  }
  const auto order = rank_by_performance(dataset);
  std::unordered_set<std::string> top;
  for (std::size_t r = 0; r < k; ++r) top.insert(dataset[order[r]].id());
  Retention out;
  out.k = k;
  for (const auto& id : final_set) out.retained += top.count(id);
  out.expected_random = static_cast<double>(k) * static_cast<double>(final_set.size()) /
                        static_cast<double>(dataset.size());
  return out;
}

}  // namespace gdl
