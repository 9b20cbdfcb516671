#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "gdl/features.hpp"
#include "gdl/gnn.hpp"
#include "gdl/graph.hpp"
#include "gdl/metrics.hpp"

namespace gdl {

struct SplitSpec {
  double known_fraction = 0.2;
  double training_fraction_of_known = 0.8;
  std::uint64_t seed = 1;

  void check() const;
};

/// Dataset indices, each list in ascending order.
struct KnownSplit {
  std::vector<std::size_t> known;
  std::vector<std::size_t> unknown;
};

/// floor(known_fraction * n_all) indices drawn without replacement.
KnownSplit split_known(std::size_t n_all, const SplitSpec& spec);
KnownSplit split_known(const GraphDataset& dataset, const SplitSpec& spec);

struct MedianLabels {
  /// Parallel to the input; 1 for the ceil(n/2) smallest J.
  std::vector<int> labels;
  /// Midpoint between the largest J labeled 1 and the smallest labeled 0.
  double threshold = 0.0;
  /// The two halves share a boundary J value.
  bool degenerate = false;
};

/// Rank halving with ties broken by id.
MedianLabels label_by_median(std::span<const double> performance, std::span<const std::string> ids);

struct TrainValidationSplit {
  /// Positions into the labeled list, ascending.
  std::vector<std::size_t> training;
  std::vector<std::size_t> validation;
};

/// Stratified per class. Throws std::invalid_argument when a class has fewer
/// than two members.
TrainValidationSplit split_train_validation(std::span<const int> labels, double training_fraction,
                                            std::uint64_t seed);

/// Min, quartiles, median and max of a value set (linear interpolation
/// between order statistics). All NaN when the set is empty.
struct SetStats {
  std::size_t size = 0;
  double min = 0.0;
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
  double max = 0.0;
};

SetStats set_stats(std::vector<double> values);

struct TrainingTask {
  std::span<const std::size_t> training;
  std::span<const int> training_labels;
  std::span<const std::size_t> validation;
  std::span<const int> validation_labels;
  std::span<const std::size_t> unknown;
  double threshold = 0.0;
  std::uint64_t model_seed = 1;
};

struct TrainingOutcome {
  std::vector<int> unknown_predictions;
  std::vector<int> validation_predictions;
  std::optional<TrainHistory> history;
  std::optional<Checkpoint> checkpoint;
  double seconds = 0.0;
};

/// Something that learns from labeled known graphs and classes the rest.
class Trainer {
 public:
  virtual ~Trainer() = default;
  /// Smallest class size the trainer can work with.
  virtual int min_per_class() const = 0;
  virtual TrainingOutcome fit_predict(const TrainingTask& task) = 0;
};

/// The graph classifier; features are computed once per graph and cached.
class GnnTrainer : public Trainer {
 public:
  GnnTrainer(const GraphDataset& dataset, FeatureMode mode, TrainConfig config);
  int min_per_class() const override { return 2; }
  TrainingOutcome fit_predict(const TrainingTask& task) override;

 private:
  const GraphSample& sample(std::size_t i);

  const GraphDataset& dataset_;
  FeatureMode mode_;
  TrainConfig config_;
  std::vector<std::optional<GraphSample>> cache_;
};

/// Classes by the true J against the task threshold.
class OracleTrainer : public Trainer {
 public:
  explicit OracleTrainer(const GraphDataset& dataset) : dataset_(dataset) {}
  int min_per_class() const override { return 1; }
  TrainingOutcome fit_predict(const TrainingTask& task) override;

 private:
  const GraphDataset& dataset_;
};

enum class MetricsOn { Unknown, Validation };

MetricsOn parse_metrics_on(const std::string& name);
std::string to_string(MetricsOn on);

struct ExperimentResult {
  double known_fraction = 0.0;
  std::size_t n_all = 0;
  std::size_t n_known = 0;
  std::size_t n_unknown = 0;
  std::size_t n_training = 0;
  std::size_t n_validation = 0;
  double threshold = 0.0;
  bool threshold_degenerate = false;
  MetricsOn metrics_on = MetricsOn::Unknown;
  /// Against the true global median classing, or against validation labels.
  std::optional<MetricsSummary> metrics;
  std::optional<ConfusionMatrix> known_cm;
  std::optional<double> total_set_accuracy;
  double random_baseline = 0.0;
  std::optional<TrainHistory> history;
  double train_seconds = 0.0;
  std::string checkpoint;
  /// Set when the run could not be carried out (e.g., too few known graphs).
  std::string error;
};

struct IterationRecord {
  int k = 0;
  SetStats known;
  SetStats known1;
  SetStats known0;
  /// J statistics of predicted sets need ground truth; sizes are always set.
  SetStats predicted1;
  SetStats predicted0;
  double threshold = 0.0;
  bool threshold_degenerate = false;
  /// Predictions vs (J < threshold) when ground truth is available.
  std::optional<ConfusionMatrix> confusion;
  double train_seconds = 0.0;
  std::string checkpoint;
};

struct Retention {
  std::size_t k = 0;
  std::size_t retained = 0;
  double expected_random = 0.0;
};

struct RunReport {
  std::string mode;
  std::vector<std::pair<std::string, std::string>> config;
  std::string dataset;
  std::size_t n_all = 0;
  bool has_truth = false;
  std::vector<ExperimentResult> experiments;
  std::vector<IterationRecord> iterations;
  std::vector<std::string> final_set;
  std::vector<Retention> retention;
  bool stopped_early = false;
  std::string stop_reason;
  double wall_seconds = 0.0;

  /// Copy with every wall-clock field zeroed.
  RunReport without_timings() const;
};

/// Bitwise on doubles, NaN equal to NaN.
bool operator==(const RunReport& a, const RunReport& b);

struct RunResult {
  RunReport report;
  /// Named model checkpoints referenced by the report.
  std::vector<std::pair<std::string, Checkpoint>> checkpoints;
};

struct ExperimentOptions {
  MetricsOn metrics_on = MetricsOn::Unknown;
};

/// split -> label -> train -> predict unknown -> metrics. When the dataset is
/// not fully sized, the sized graphs form the known set and no ground-truth
/// metrics are produced.
ExperimentResult run_experiment(const GraphDataset& dataset, const SplitSpec& spec, Trainer& trainer,
                                std::uint64_t model_seed, const ExperimentOptions& options = {});

RunResult run_experiment(const GraphDataset& dataset, const SplitSpec& spec, FeatureMode mode,
                         const TrainConfig& config, const ExperimentOptions& options = {});

/// Each fraction halves the previous one; printed tables round them to 1.3, 0.6 and 0.3%.
inline const std::vector<double> kSweepFractions = {0.8, 0.4, 0.2, 0.1, 0.05, 0.025, 0.0125, 0.00625, 0.003125};

/// One experiment per known fraction with the split seed held fixed.
RunResult sweep(const GraphDataset& dataset, const SplitSpec& spec, std::span<const double> fractions,
                FeatureMode mode, const TrainConfig& config, const ExperimentOptions& options = {});

/// Iteration k trains a fresh model seeded with model_seed + k - 1.
RunResult iterative_downselect(const GraphDataset& dataset, const SplitSpec& spec, Trainer& trainer,
                               std::uint64_t model_seed, int n_iterations = 4);

RunResult iterative_downselect(const GraphDataset& dataset, const SplitSpec& spec, FeatureMode mode,
                               const TrainConfig& config, int n_iterations = 4);

/// Dataset indices sorted by ascending J, ties by id. Requires a fully sized
/// dataset.
std::vector<std::size_t> rank_by_performance(const GraphDataset& dataset);

/// |final ∩ top-k| and the random-sampling expectation k * |final| / N_all.
Retention topk_retention(std::span<const std::string> final_set, const GraphDataset& dataset, std::size_t k);

}  // namespace gdl
