#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include <gtest/gtest.h>

#include "gdl/config.hpp"
#include "gdl/generator.hpp"
#include "gdl/pipeline.hpp"
#include "gdl/report.hpp"
#include "oracles.hpp"

using namespace gdl;

namespace {

// Desk graphs with distinct pseudo-random J values.
GraphDataset sized_corpus(std::size_t n, std::uint64_t seed) {
  const auto base = generate_desk_dataset({3, seed, n});
  Rng rng(seed + 100);
  std::vector<CircuitGraph> out;
  for (const auto& g : base) out.push_back(g.with_performance(std::pow(10.0, rng.uniform(-3, 2))));
  return GraphDataset(out, "synthetic");
}

// J strictly decreasing in the mean label code of the graph.
GraphDataset monotone_corpus(std::size_t n) {
  const auto base = generate_desk_dataset({3, 41, n});
  std::vector<CircuitGraph> out;
  for (const auto& g : base) out.push_back(g.with_performance(std::exp(-encode_labels(g).mean())));
  return GraphDataset(out, "monotone");
}

TrainConfig quick_config(int epochs = 20) {
  TrainConfig c;
  c.epochs = epochs;
  c.hidden = 8;
  c.batch_size = 16;
  return c;
}

std::vector<std::string> id_list(std::size_t n) {
  std::vector<std::string> ids;
  for (std::size_t i = 0; i < n; ++i) ids.push_back("g" + std::to_string(1000 + i));
  return ids;
}

std::filesystem::path scratch_dir(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("gdl_test_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::size_t lines_of(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

}  // namespace

TEST(SplitKnown, TwentyOfHundred) {
  const auto ks = split_known(100, SplitSpec{0.2, 0.8, 3});
  EXPECT_EQ(ks.known.size(), 20u);
  EXPECT_EQ(ks.unknown.size(), 80u);
}

TEST(SplitKnown, FullFractionLeavesNoUnknowns) {
  const auto ks = split_known(37, SplitSpec{1.0, 0.8, 3});
  EXPECT_EQ(ks.known.size(), 37u);
  EXPECT_TRUE(ks.unknown.empty());
}

TEST(SplitKnown, PartitionIdentityAndDeterminism) {
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    const SplitSpec spec{0.3, 0.8, seed};
    const auto a = split_known(101, spec);
    const auto b = split_known(101, spec);
    EXPECT_EQ(a.known, b.known);
    EXPECT_EQ(a.unknown, b.unknown);
    std::set<std::size_t> all(a.known.begin(), a.known.end());
    all.insert(a.unknown.begin(), a.unknown.end());
    EXPECT_EQ(all.size(), 101u);
    EXPECT_EQ(a.known.size() + a.unknown.size(), 101u);
    EXPECT_TRUE(std::is_sorted(a.known.begin(), a.known.end()));
  }
  EXPECT_NE(split_known(101, SplitSpec{0.3, 0.8, 1}).known, split_known(101, SplitSpec{0.3, 0.8, 2}).known);
}

TEST(SplitKnown, EmptyKnownSetIsAnError) {
  EXPECT_THROW(split_known(10, SplitSpec{0.05, 0.8, 1}), std::invalid_argument);
  EXPECT_THROW(split_known(10, SplitSpec{0.0, 0.8, 1}), std::invalid_argument);
  EXPECT_THROW(split_known(10, SplitSpec{0.5, 1.0, 1}), std::invalid_argument);
}

TEST(MedianLabels, FourDistinct) {
  const std::vector<double> j = {1, 2, 3, 4};
  const auto m = label_by_median(j, id_list(4));
  EXPECT_EQ(m.labels, (std::vector<int>{1, 1, 0, 0}));
  EXPECT_DOUBLE_EQ(m.threshold, 2.5);
  EXPECT_FALSE(m.degenerate);
}

TEST(MedianLabels, AllTiedUsesIdOrder) {
  const std::vector<double> j = {5, 5, 5, 5};
  const std::vector<std::string> ids = {"d", "a", "c", "b"};
  const auto m = label_by_median(j, ids);
  EXPECT_EQ(m.labels, (std::vector<int>{0, 1, 0, 1}));
  EXPECT_TRUE(m.degenerate);
}

TEST(MedianLabels, OddCountRoundsUp) {
  const std::vector<double> j = {9, 1, 7, 3, 5};
  const auto m = label_by_median(j, id_list(5));
  EXPECT_EQ(std::count(m.labels.begin(), m.labels.end(), 1), 3);
  EXPECT_EQ(m.labels, (std::vector<int>{0, 1, 0, 1, 1}));
  EXPECT_DOUBLE_EQ(m.threshold, 6.0);
}

TEST(TrainValidation, EightyTwenty) {
  std::vector<int> labels(100);
  for (int i = 0; i < 100; ++i) labels[static_cast<std::size_t>(i)] = i % 2;
  const auto s = split_train_validation(labels, 0.8, 5);
  EXPECT_EQ(s.training.size(), 80u);
  EXPECT_EQ(s.validation.size(), 20u);
}

TEST(TrainValidation, Stratified) {
  Rng rng(6);
  for (int t = 0; t < 50; ++t) {
    const std::size_t n = 10 + rng.below(200);
    std::vector<int> labels(n);
    for (auto& l : labels) l = rng.uniform() < 0.3 ? 1 : 0;
    if (std::count(labels.begin(), labels.end(), 1) < 2 || std::count(labels.begin(), labels.end(), 0) < 2) continue;
    const auto s = split_train_validation(labels, 0.8, t);
    const double ratio = static_cast<double>(std::count(labels.begin(), labels.end(), 1)) / static_cast<double>(n);
    auto ones = [&](const std::vector<std::size_t>& idx) {
      return static_cast<double>(std::count_if(idx.begin(), idx.end(), [&](std::size_t i) { return labels[i] == 1; }));
    };
    EXPECT_LE(std::abs(ones(s.training) - ratio * static_cast<double>(s.training.size())), 1.0);
    EXPECT_LE(std::abs(ones(s.validation) - ratio * static_cast<double>(s.validation.size())), 1.0);
    EXPECT_EQ(s.training.size() + s.validation.size(), n);
  }
}

TEST(TrainValidation, FullScalePartitionSizes) {
  const std::size_t n_all = 43249;
  const auto ks = split_known(n_all, SplitSpec{0.9, 0.8, 1});
  std::vector<int> labels(ks.known.size());
  for (std::size_t i = 0; i < labels.size(); ++i) labels[i] = i < (labels.size() + 1) / 2;
  const auto s = split_train_validation(labels, 0.8, 1);
  EXPECT_EQ(s.training.size(), 31139u);
  // Floor rounding; the three sizes add back up to 43,249.
  EXPECT_EQ(s.validation.size(), 7785u);
  EXPECT_EQ(ks.unknown.size(), 4325u);
}

TEST(TrainValidation, NeedsTwoPerClass) {
  const std::vector<int> labels = {1, 0, 0, 0};
  EXPECT_THROW(split_train_validation(labels, 0.8, 1), std::invalid_argument);
}

TEST(SetStatsTest, Quartiles) {
  const auto s = set_stats({4, 1, 3, 2, 5});
  EXPECT_EQ(s.size, 5u);
  EXPECT_EQ(s.min, 1.0);
  EXPECT_EQ(s.q1, 2.0);
  EXPECT_EQ(s.median, 3.0);
  EXPECT_EQ(s.q3, 4.0);
  EXPECT_EQ(s.max, 5.0);
  EXPECT_EQ(set_stats({1, 2}).median, 1.5);
  EXPECT_TRUE(std::isnan(set_stats({}).median));
}

TEST(Experiment, FullKnownZeroEpochs) {
  const auto d = sized_corpus(60, 1);
  auto cfg = quick_config(0);
  const auto r = run_experiment(d, SplitSpec{1.0, 0.8, 2}, FeatureMode::Baseline, cfg).report;
  ASSERT_EQ(r.experiments.size(), 1u);
  const auto& e = r.experiments[0];
  EXPECT_EQ(e.n_unknown, 0u);
  ASSERT_TRUE(e.total_set_accuracy);
  EXPECT_EQ(*e.total_set_accuracy, 1.0);
}

TEST(Experiment, CountsAndBaseline) {
  const auto d = sized_corpus(200, 2);
  const auto r = run_experiment(d, SplitSpec{0.25, 0.8, 3}, FeatureMode::ThreeFeature, quick_config()).report;
  const auto& e = r.experiments[0];
  EXPECT_EQ(e.n_known, 50u);
  EXPECT_EQ(e.n_unknown, 150u);
  EXPECT_EQ(e.n_training + e.n_validation, 50u);
  EXPECT_EQ(e.n_training, 40u);
  EXPECT_DOUBLE_EQ(e.random_baseline, 0.625);
  ASSERT_TRUE(e.metrics);
  EXPECT_EQ(e.metrics->cm.total(), 150u);
  ASSERT_TRUE(e.known_cm);
  EXPECT_EQ(e.known_cm->total(), 50u);
  ASSERT_TRUE(e.history);
  EXPECT_EQ(e.history->train_loss.size(), 20u);
  EXPECT_EQ(e.checkpoint, "model");
}

TEST(Experiment, ValidationMetricsOption) {
  const auto d = sized_corpus(200, 3);
  const auto r = run_experiment(d, SplitSpec{0.25, 0.8, 3}, FeatureMode::Baseline, quick_config(),
                                ExperimentOptions{MetricsOn::Validation})
                     .report;
  ASSERT_TRUE(r.experiments[0].metrics);
  EXPECT_EQ(r.experiments[0].metrics->cm.total(), 10u);
  EXPECT_TRUE(r.experiments[0].total_set_accuracy);
}

TEST(Experiment, OracleIsPerfectOnUnknowns) {
  const auto d = sized_corpus(300, 4);
  OracleTrainer oracle(d);
  const auto e = run_experiment(d, SplitSpec{0.5, 0.8, 5}, oracle, 1);
  ASSERT_TRUE(e.total_set_accuracy);
  EXPECT_GT(*e.total_set_accuracy, 0.9);
}

TEST(Experiment, ProductionModeUsesSizedGraphs) {
  const auto full = sized_corpus(80, 5);
  std::vector<CircuitGraph> graphs;
  for (std::size_t i = 0; i < full.size(); ++i) graphs.push_back(i % 4 ? full[i].with_performance(std::nullopt) : full[i]);
  const GraphDataset partial(graphs);
  const auto r = run_experiment(partial, SplitSpec{0.2, 0.8, 1}, FeatureMode::Baseline, quick_config(5)).report;
  EXPECT_FALSE(r.has_truth);
  const auto& e = r.experiments[0];
  EXPECT_EQ(e.n_known, 20u);
  EXPECT_EQ(e.n_unknown, 60u);
  EXPECT_FALSE(e.total_set_accuracy);
  EXPECT_FALSE(e.metrics);
}

TEST(Experiment, ReproducibleBitForBit) {
  const auto d = sized_corpus(150, 6);
  const SplitSpec spec{0.3, 0.8, 9};
  const auto a = run_experiment(d, spec, FeatureMode::ThreeFeature, quick_config());
  const auto b = run_experiment(d, spec, FeatureMode::ThreeFeature, quick_config());
  EXPECT_TRUE(a.report.without_timings() == b.report.without_timings());
  EXPECT_EQ(a.checkpoints[0].second.model, b.checkpoints[0].second.model);
}

TEST(Sweep, OneRowPerFraction) {
  const auto d = sized_corpus(400, 7);
  const auto r = sweep(d, SplitSpec{0.2, 0.8, 1}, kSweepFractions, FeatureMode::Baseline, quick_config(3)).report;
  ASSERT_EQ(r.experiments.size(), 9u);
  std::size_t failed = 0;
  for (std::size_t i = 0; i < 9; ++i) {
    EXPECT_EQ(r.experiments[i].known_fraction, kSweepFractions[i]);
    failed += !r.experiments[i].error.empty();
  }
  // 0.3% of 400 is a single graph, too few for two classes.
  EXPECT_GE(failed, 1u);
  EXPECT_TRUE(r.experiments[0].error.empty());

  const auto dir = scratch_dir("sweep");
  emit_report(r, ReportFormat::Csv, dir);
  const auto csv = slurp(dir / "metrics.csv");
  EXPECT_EQ(lines_of(csv), 10u);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), kMetricsCsvHeader);
  EXPECT_NE(csv.find("NA"), std::string::npos);
}

TEST(Sweep, FullScaleKnownCounts) {
  const std::vector<std::size_t> reference = {34599, 17300, 8650, 4325, 2162, 1081, 541, 270, 135};
  for (std::size_t i = 0; i < kSweepFractions.size(); ++i) {
    const auto n = split_known(43249, SplitSpec{kSweepFractions[i], 0.8, 1}).known.size();
    EXPECT_LE(n > reference[i] ? n - reference[i] : reference[i] - n, 1u) << kSweepFractions[i];
  }
}

TEST(Iterate, OracleKnownSizesHalve) {
  const auto d = sized_corpus(160, 8);
  OracleTrainer oracle(d);
  const auto r = iterative_downselect(d, SplitSpec{0.1, 0.8, 2}, oracle, 1, 4).report;
  ASSERT_EQ(r.iterations.size(), 4u);
  const std::vector<std::size_t> sizes = {16, 8, 4, 2};
  for (std::size_t k = 0; k < 4; ++k) {
    EXPECT_EQ(r.iterations[k].known.size, sizes[k]);
    EXPECT_EQ(r.iterations[k].known1.size + r.iterations[k].known0.size, sizes[k]);
    EXPECT_LE(r.iterations[k].known1.median, r.iterations[k].known.median);
    EXPECT_LE(r.iterations[k].known.median, r.iterations[k].known0.median);
  }
  EXPECT_FALSE(r.stopped_early);
}

TEST(Iterate, HalvingWithOddSizes) {
  const auto d = sized_corpus(300, 9);
  OracleTrainer oracle(d);
  const auto r = iterative_downselect(d, SplitSpec{0.17, 0.8, 2}, oracle, 1, 5).report;
  for (std::size_t k = 1; k < r.iterations.size(); ++k) {
    EXPECT_EQ(r.iterations[k].known.size, (r.iterations[k - 1].known.size + 1) / 2);
  }
}

TEST(Iterate, PerfectOracleKeepsTrueTop) {
  const auto d = sized_corpus(500, 10);
  OracleTrainer oracle(d);
  const auto r = iterative_downselect(d, SplitSpec{0.2, 0.8, 3}, oracle, 1, 3).report;
  const auto order = rank_by_performance(d);
  std::set<std::string> top;
  for (std::size_t i = 0; i < r.final_set.size(); ++i) top.insert(d[order[i]].id());
  EXPECT_EQ(std::set<std::string>(r.final_set.begin(), r.final_set.end()), top);
  EXPECT_FALSE(r.final_set.empty());
}

TEST(Iterate, SingleIterationMatchesExperiment) {
  const auto d = sized_corpus(200, 11);
  const SplitSpec spec{0.3, 0.8, 4};
  const auto cfg = quick_config();
  const auto it = iterative_downselect(d, spec, FeatureMode::ThreeFeature, cfg, 1);
  const auto ex = run_experiment(d, spec, FeatureMode::ThreeFeature, cfg);
  ASSERT_EQ(it.report.iterations.size(), 1u);
  ASSERT_EQ(it.checkpoints.size(), 1u);
  EXPECT_EQ(it.checkpoints[0].second.model, ex.checkpoints[0].second.model);
  const auto& e = ex.report.experiments[0];
  EXPECT_EQ(it.report.iterations[0].predicted1.size, e.metrics->cm.tp + e.metrics->cm.fp);
  EXPECT_EQ(it.report.iterations[0].known.size, e.n_known);
  EXPECT_EQ(it.report.iterations[0].threshold, e.threshold);
}

TEST(Iterate, StopsEarlyWhenClassesRunOut) {
  const auto d = sized_corpus(100, 12);
  const auto r = iterative_downselect(d, SplitSpec{0.1, 0.8, 1}, FeatureMode::Baseline, quick_config(2), 4).report;
  EXPECT_TRUE(r.stopped_early);
  EXPECT_LT(r.iterations.size(), 4u);
  EXPECT_NE(r.stop_reason.find("per class"), std::string::npos);
}

TEST(Iterate, MonotoneFixtureMediansDecrease) {
  const auto d = monotone_corpus(800);
  TrainConfig cfg = quick_config(150);
  cfg.hidden = 16;
  const auto r = iterative_downselect(d, SplitSpec{0.25, 0.8, 1}, FeatureMode::Baseline, cfg, 3).report;
  ASSERT_EQ(r.iterations.size(), 3u);
  // Many graphs share a mean label code, so consecutive medians can tie.
  EXPECT_LE(r.iterations[1].predicted1.median, r.iterations[0].predicted1.median);
  EXPECT_LE(r.iterations[2].predicted1.median, r.iterations[1].predicted1.median);
  EXPECT_LT(r.iterations[2].predicted1.median, r.iterations[0].predicted1.median);
}

TEST(Iterate, ProductionModeOmitsRetention) {
  const auto full = sized_corpus(120, 13);
  std::vector<CircuitGraph> graphs;
  for (std::size_t i = 0; i < full.size(); ++i) graphs.push_back(i % 3 ? full[i].with_performance(std::nullopt) : full[i]);
  const GraphDataset partial(graphs);
  const auto r = iterative_downselect(partial, SplitSpec{0.2, 0.8, 1}, FeatureMode::Baseline, quick_config(3), 2).report;
  EXPECT_FALSE(r.has_truth);
  EXPECT_TRUE(r.retention.empty());
  ASSERT_FALSE(r.iterations.empty());
  EXPECT_EQ(r.iterations[0].known.size, 40u);
  EXPECT_FALSE(r.iterations[0].confusion);
  EXPECT_TRUE(std::isnan(r.iterations[0].predicted1.median));
}

TEST(Retention, SupersetAndEmpty) {
  const auto d = sized_corpus(120, 14);
  std::vector<std::string> all;
  for (const auto& g : d) all.push_back(g.id());
  EXPECT_EQ(topk_retention(all, d, 10).retained, 10u);
  EXPECT_EQ(topk_retention({}, d, 10).retained, 0u);
  EXPECT_EQ(topk_retention({}, d, 10).expected_random, 0.0);
  EXPECT_THROW(topk_retention(all, d, 121), std::invalid_argument);
}

TEST(Retention, RandomExpectationAtFullScale) {
  const std::size_t n_all = 43249, kept = 11029;
  std::vector<CircuitGraph> graphs;
  graphs.reserve(n_all);
  const auto proto = oracle::rc_lowpass();
  for (std::size_t i = 0; i < n_all; ++i) graphs.push_back(proto.with_id("g" + std::to_string(i)).with_performance(1.0 + static_cast<double>(i)));
  const GraphDataset d(graphs);
  std::vector<std::string> final_set;
  for (std::size_t i = 0; i < kept; ++i) final_set.push_back("g" + std::to_string(n_all - 1 - i));
  const auto r = topk_retention(final_set, d, 10);
  EXPECT_NEAR(r.expected_random, 2.550, 5e-4);
  EXPECT_EQ(r.retained, 0u);
}

TEST(Report, JsonRoundTripIsExact) {
  const auto d = sized_corpus(200, 15);
  const auto it = iterative_downselect(d, SplitSpec{0.3, 0.8, 1}, FeatureMode::ThreeFeature, quick_config(5), 2).report;
  EXPECT_TRUE(report_from_json(report_to_json(it)) == it);
  const auto sw = sweep(d, SplitSpec{0.2, 0.8, 1}, kSweepFractions, FeatureMode::Baseline, quick_config(2)).report;
  EXPECT_TRUE(report_from_json(report_to_json(sw)) == sw);
  const auto path = scratch_dir("json") / "r.json";
  save_report(sw, path);
  EXPECT_TRUE(load_report(path) == sw);
}

TEST(Report, IteratePlotdataShape) {
  const auto d = sized_corpus(400, 16);
  const auto r = iterative_downselect(d, SplitSpec{0.4, 0.8, 1}, FeatureMode::Baseline, quick_config(3), 4).report;
  ASSERT_EQ(r.iterations.size(), 4u);
  const auto dir = scratch_dir("plot");
  emit_report(r, ReportFormat::Plotdata, dir);
  const auto box = slurp(dir / "iteration_boxplots.csv");
  EXPECT_EQ(lines_of(box), 1u + 16u);
  std::set<std::string> groups;
  std::istringstream in(box);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line.rfind("k,set,", 0), 0u);
  while (std::getline(in, line)) groups.insert(line.substr(0, line.find(',')));
  EXPECT_EQ(groups.size(), 4u);
}

TEST(Report, SweepPlotdataHasKnownFractionCurve) {
  const auto d = sized_corpus(300, 17);
  const std::vector<double> fr = {0.5, 0.25, 0.1};
  const auto r = sweep(d, SplitSpec{0.2, 0.8, 1}, fr, FeatureMode::Baseline, quick_config(2)).report;
  const auto dir = scratch_dir("plot_sweep");
  emit_report(r, ReportFormat::Plotdata, dir);
  EXPECT_EQ(lines_of(slurp(dir / "tsa_vs_known_fraction.csv")), 4u);
  EXPECT_TRUE(std::filesystem::exists(dir / "accuracy_vs_epoch.csv"));
}

TEST(Report, FormatNames) {
  EXPECT_EQ(parse_report_format("json"), ReportFormat::Json);
  EXPECT_EQ(parse_report_format("plotdata"), ReportFormat::Plotdata);
  EXPECT_THROW(parse_report_format("xml"), std::invalid_argument);
}

TEST(Config, TextOverridesDefaults) {
  RunConfig c;
  apply_config_text(c, "# comment\nseed = 7\nknown_frac=0.25\n\nfeatures = baseline\nepochs = 12  # trailing\nknown_fracs = 0.5, 0.25\n");
  EXPECT_EQ(c.seed, 7u);
  EXPECT_EQ(c.known_fraction, 0.25);
  EXPECT_EQ(c.features, FeatureMode::Baseline);
  EXPECT_EQ(c.train.epochs, 12);
  EXPECT_EQ(c.known_fractions, (std::vector<double>{0.5, 0.25}));
  EXPECT_EQ(c.training().seed, 7u);
  EXPECT_EQ(c.split().seed, 7u);
}

TEST(Config, ErrorsCarryLineNumbers) {
  RunConfig c;
  try {
    apply_config_text(c, "seed = 1\nbogus = 3\n", "run.cfg");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("run.cfg:2"), std::string::npos) << e.what();
  }
  EXPECT_THROW(apply_config_text(c, "lr = fast\n"), ConfigError);
  EXPECT_THROW(apply_config_text(c, "just words\n"), ConfigError);
  EXPECT_THROW(apply_setting(c, "known_frac", "1.5"), ConfigError);
}

TEST(Config, SchemaListsEveryKey) {
  const auto schema = config_schema();
  for (const char* key : {"seed", "known_frac", "train_frac", "features", "epochs", "lr", "batch_size", "hidden",
                          "dropout", "iterations", "known_fracs", "starts", "max_evals", "jobs"}) {
    EXPECT_NE(schema.find(key), std::string::npos) << key;
    RunConfig c;
    EXPECT_THROW(apply_setting(c, key, ""), ConfigError) << key;
  }
}
