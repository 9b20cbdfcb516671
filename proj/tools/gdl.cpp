#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "gdl/circuit.hpp"
#include "gdl/config.hpp"
#include "gdl/dataset_io.hpp"
#include "gdl/features.hpp"
#include "gdl/generator.hpp"
#include "gdl/gnn.hpp"
#include "gdl/metrics.hpp"
#include "gdl/pipeline.hpp"
#include "gdl/report.hpp"
#include "gdl/sizing.hpp"

namespace fs = std::filesystem;
using namespace gdl;

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitNumerical = 3;

class ValidationFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NumericalFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Globals {
  std::string config_file;
  std::string out = ".";
  std::map<std::string, std::string> overrides;
};

/// Registers `--flag` as an override for config key `key`.
void setting(CLI::App* app, Globals& g, const std::string& flag, const std::string& key, const std::string& help) {
  app->add_option_function<std::string>(
      flag, [&g, key](const std::string& v) { g.overrides[key] = v; }, help);
}

RunConfig resolve(const Globals& g) {
  RunConfig c;
  if (!g.config_file.empty()) apply_config_file(c, g.config_file);
  for (const auto& [k, v] : g.overrides) apply_setting(c, k, v);
  return c;
}

fs::path out_dir(const Globals& g) {
  fs::create_directories(g.out);
  return g.out;
}

GraphDataset load(const std::string& path) {
  const auto parsed = parse_dataset(path, DatasetFormat::Jsonl);
  for (const auto& d : parsed.diagnostics) {
    std::cerr << path << ':' << d.line << ": " << (d.id.empty() ? "" : d.id + ": ") << d.message << '\n';
  }
  if (parsed.rejected > 0) {
    throw ValidationFailure(std::to_string(parsed.rejected) + " invalid graph(s) in " + path);
  }
  if (parsed.dataset.empty()) throw ValidationFailure("no graphs in " + path);
  return parsed.dataset;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

void emit_all(const RunResult& run, const fs::path& dir) {
  for (const auto& [name, ckpt] : run.checkpoints) save_checkpoint(ckpt, dir / (name + ".json"));
  for (auto format : {ReportFormat::Json, ReportFormat::Csv, ReportFormat::Plotdata}) {
    for (const auto& p : emit_report(run.report, format, dir)) std::cout << "wrote " << p.string() << '\n';
  }
}

std::string pct(double v) {
  if (std::isnan(v)) return "NA";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f%%", 100.0 * v);
  return buf;
}

void print_experiment(const ExperimentResult& e) {
  std::printf("known %zu / %zu (train %zu, validation %zu), threshold J = %.6g%s\n", e.n_known, e.n_all,
              e.n_training, e.n_validation, e.threshold, e.threshold_degenerate ? " (tied halves)" : "");
  if (!e.error.empty()) {
    std::printf("  skipped: %s\n", e.error.c_str());
    return;
  }
  if (e.metrics) {
    std::printf("  %s metrics: accuracy %.4f precision %.4f recall %.4f f1 %.4f mcc %.4f\n",
                to_string(e.metrics_on).c_str(), e.metrics->accuracy, e.metrics->precision, e.metrics->recall,
                e.metrics->f1, e.metrics->mcc);
  }
  if (e.total_set_accuracy) {
    std::printf("  total set accuracy %s (random baseline %s)\n", pct(*e.total_set_accuracy).c_str(),
                pct(e.random_baseline).c_str());
  }
}

int cmd_ingest(const Globals& g, const std::string& input, const std::string& format, const std::string& profile) {
  const auto vp = profile == "case-study" ? ValidationProfile::case_study() : ValidationProfile::desk();
  if (profile != "desk" && profile != "case-study") throw ConfigError("unknown profile '" + profile + "'");
  const auto parsed = parse_dataset(input, parse_format(format), vp);
  for (const auto& d : parsed.diagnostics) {
    std::cerr << input << ':' << d.line << ": " << (d.id.empty() ? "" : d.id + ": ") << d.message << '\n';
  }
  const auto path = out_dir(g) / "dataset.jsonl";
  write_dataset(parsed.dataset, path);
  std::cout << "wrote " << parsed.dataset.size() << " graphs to " << path.string() << '\n';
  if (parsed.rejected > 0) {
    std::cerr << parsed.rejected << " graph(s) rejected\n";
    return kExitValidation;
  }
  return 0;
}

int cmd_generate(const Globals& g) {
  const RunConfig c = resolve(g);
  const auto ds = generate_desk_dataset({c.max_subcircuits, c.seed, c.limit});
  const auto path = out_dir(g) / "dataset.jsonl";
  write_dataset(ds, path);
  std::cout << "wrote " << ds.size() << " graphs to " << path.string() << '\n';
  return 0;
}

int cmd_size(const Globals& g, const std::string& input) {
  const RunConfig c = resolve(g);
  const GraphDataset ds = load(input);
  const auto results = size_all(ds.graphs(), c.sizing(), c.jobs, [&](std::size_t done) {
    if (done % 100 == 0 || done == ds.size()) std::cerr << "sized " << done << " / " << ds.size() << '\n';
  });
  const fs::path dir = out_dir(g);
  std::vector<CircuitGraph> sized;
  std::ofstream log(dir / "sizing.jsonl", std::ios::trunc);
  std::size_t failures = 0;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const auto& r = results[i];
    nlohmann::json j = {{"id", ds[i].id()}, {"starts_used", r.starts_used}, {"evaluations", r.evaluations}};
    if (r.error.empty()) {
      j["z"] = r.values;
      j["J"] = r.objective;
      j["converged"] = r.converged;
      sized.push_back(ds[i].with_performance(r.objective));
    } else {
      j["error"] = r.error;
      ++failures;
      std::cerr << ds[i].id() << ": " << r.error << '\n';
      sized.push_back(ds[i].with_performance(std::nullopt));
    }
    log << j.dump() << '\n';
  }
  write_dataset(GraphDataset(std::move(sized), ds.provenance()), dir / "dataset.jsonl");
  std::cout << "sized " << ds.size() - failures << " / " << ds.size() << " graphs into " << (dir / "dataset.jsonl").string()
            << '\n';
  if (failures > 0) throw NumericalFailure(std::to_string(failures) + " graph(s) could not be sized");
  return 0;
}

int cmd_featurize(const Globals& g, const std::string& input) {
  const RunConfig c = resolve(g);
  const GraphDataset ds = load(input);
  const fs::path dir = out_dir(g) / "features";
  fs::create_directories(dir);
  for (const auto& graph : ds) write_text(dir / (graph.id() + ".csv"), features_to_csv(assemble_features(graph, c.features)));
  std::cout << "wrote " << ds.size() << " feature files (" << to_string(c.features) << ") to " << dir.string() << '\n';
  return 0;
}

int cmd_train(const Globals& g, const std::string& input) {
  const RunConfig c = resolve(g);
  const GraphDataset ds = load(input);
  const auto run = run_experiment(ds, c.split(), c.features, c.training(), {c.metrics_on});
  print_experiment(run.report.experiments.front());
  emit_all(run, out_dir(g));
  return 0;
}

FeatureMode mode_for_width(int width) {
  for (auto m : {FeatureMode::Baseline, FeatureMode::ThreeFeature, FeatureMode::OneHot}) {
    if (feature_width(m) == width) return m;
  }
  throw ValidationFailure("checkpoint input width " + std::to_string(width) + " matches no feature mode");
}

int cmd_evaluate(const Globals& g, const std::string& input, const std::string& model_path) {
  const GraphDataset ds = load(input);
  const Checkpoint ckpt = load_checkpoint(model_path);
  const FeatureMode mode = mode_for_width(ckpt.model.input_width);
  std::vector<GraphSample> samples;
  for (const auto& graph : ds) samples.push_back(make_sample(graph, mode));
  const auto pred = predict(ckpt.model, samples);

  std::optional<std::vector<int>> truth;
  if (ds.fully_sized()) {
    std::vector<double> j;
    std::vector<std::string> ids;
    for (const auto& graph : ds) {
      j.push_back(*graph.performance());
      ids.push_back(graph.id());
    }
    truth = label_by_median(j, ids).labels;
  }
  const fs::path dir = out_dir(g);
  std::ofstream out(dir / "predictions.csv", std::ios::trunc);
  out.precision(17);
  out << "id,logit0,logit1,predicted" << (truth ? ",truth" : "") << '\n';
  for (std::size_t i = 0; i < ds.size(); ++i) {
    out << ds[i].id() << ',' << pred.logits[i][0] << ',' << pred.logits[i][1] << ',' << pred.classes[i];
    if (truth) out << ',' << (*truth)[i];
    out << '\n';
  }
  std::cout << "wrote " << (dir / "predictions.csv").string() << '\n';
  if (truth) {
    MetricsRow row;
    row.n_known = 0;
    row.pct_known = 0.0;
    row.train_seconds = std::nan("");
    row.metrics = summarize(confusion(pred.classes, *truth));
    row.total_set_accuracy = std::nan("");
    std::ofstream m(dir / "metrics.csv", std::ios::trunc);
    const MetricsRow rows[] = {row};
    write_metrics_csv(m, rows);
    std::printf("accuracy %.4f precision %.4f recall %.4f f1 %.4f mcc %.4f against the set median\n",
                row.metrics.accuracy, row.metrics.precision, row.metrics.recall, row.metrics.f1, row.metrics.mcc);
  }
  return 0;
}

int cmd_sweep(const Globals& g, const std::string& input) {
  const RunConfig c = resolve(g);
  const GraphDataset ds = load(input);
  const auto run = sweep(ds, c.split(), c.known_fractions, c.features, c.training(), {c.metrics_on});
  for (const auto& e : run.report.experiments) print_experiment(e);
  emit_all(run, out_dir(g));
  return 0;
}

int cmd_iterate(const Globals& g, const std::string& input) {
  const RunConfig c = resolve(g);
  const GraphDataset ds = load(input);
  const auto run = iterative_downselect(ds, c.split(), c.features, c.training(), c.iterations);
  const auto& rep = run.report;
  for (const auto& it : rep.iterations) {
    std::printf("iteration %d: known %zu -> Known1 %zu / Known0 %zu, Predicted1 %zu / Predicted0 %zu", it.k,
                it.known.size, it.known1.size, it.known0.size, it.predicted1.size, it.predicted0.size);
    if (rep.has_truth) std::printf(", median J of Predicted1 %.6g", it.predicted1.median);
    std::printf("\n");
  }
  if (rep.stopped_early) std::printf("stopped early: %s\n", rep.stop_reason.c_str());
  std::printf("final good set: %zu graphs\n", rep.final_set.size());
  for (const auto& r : rep.retention) {
    std::printf("  top-%zu retained %zu (random expectation %.3f)\n", r.k, r.retained, r.expected_random);
  }
  const fs::path dir = out_dir(g);
  std::string ids;
  for (const auto& id : rep.final_set) ids += id + '\n';
  write_text(dir / "final_set.txt", ids);
  emit_all(run, dir);
  return 0;
}

int cmd_report(const Globals& g, const std::string& input, const std::vector<std::string>& formats) {
  const RunReport rep = load_report(input);
  for (const auto& f : formats) {
    for (const auto& p : emit_report(rep, parse_report_format(f), out_dir(g))) std::cout << "wrote " << p.string() << '\n';
  }
  return 0;
}

void training_settings(CLI::App* app, Globals& g) {
  setting(app, g, "--known-frac", "known_frac", "fraction of graphs with known J");
  setting(app, g, "--train-frac", "train_frac", "training share of the known set");
  setting(app, g, "--mode,--features", "features", "baseline, three or onehot");
  setting(app, g, "--epochs", "epochs", "training epochs");
  setting(app, g, "--lr", "lr", "learning rate");
  setting(app, g, "--batch-size", "batch_size", "graphs per step");
  setting(app, g, "--hidden", "hidden", "GCN width");
  setting(app, g, "--dropout", "dropout", "dropout probability");
  setting(app, g, "--metrics-on", "metrics_on", "unknown or validation");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Graph classification pipeline for circuit topology down-selection"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--config", g.config_file, "key = value settings file (run `gdl config-schema` for keys)");
  app.add_option("--out", g.out, "output directory")->capture_default_str();
  setting(&app, g, "--seed", "seed", "base seed");

  std::string input, format = "jsonl", profile = "desk", model;
  std::vector<std::string> formats = {"json", "csv", "plotdata"};

  auto* ingest = app.add_subcommand("ingest", "validate a dataset and write it as JSONL");
  ingest->add_option("--input", input, "dataset file or CSV directory")->required();
  ingest->add_option("--format", format, "jsonl or csv-pair")->capture_default_str();
  ingest->add_option("--profile", profile, "desk or case-study node-count bounds")->capture_default_str();

  auto* generate = app.add_subcommand("generate", "enumerate the desk RC topology set");
  setting(generate, g, "--max-subcircuits", "max_subcircuits", "1 to 3");
  setting(generate, g, "--limit", "limit", "keep a seeded subset of this size (0 keeps all)");

  auto* size = app.add_subcommand("size", "size every graph and attach J");
  size->add_option("--input", input)->required();
  setting(size, g, "--starts", "starts", "multi-start count");
  setting(size, g, "--max-evals", "max_evals", "evaluations per start");
  setting(size, g, "--jobs", "jobs", "worker threads");

  auto* featurize = app.add_subcommand("featurize", "write node feature matrices");
  featurize->add_option("--input", input)->required();
  setting(featurize, g, "--mode", "features", "baseline, three or onehot");

  auto* train = app.add_subcommand("train", "one split/label/train/predict experiment");
  train->add_option("--input", input)->required();
  training_settings(train, g);

  auto* evaluate = app.add_subcommand("evaluate", "apply a saved model to a dataset");
  evaluate->add_option("--input", input)->required();
  evaluate->add_option("--model", model, "checkpoint written by train")->required();

  auto* sweep_cmd = app.add_subcommand("sweep", "experiments over several known fractions");
  sweep_cmd->add_option("--input", input)->required();
  training_settings(sweep_cmd, g);
  setting(sweep_cmd, g, "--known-fracs", "known_fracs", "comma-separated fractions");

  auto* iterate = app.add_subcommand("iterate", "iterative down-selection");
  iterate->add_option("--input", input)->required();
  training_settings(iterate, g);
  setting(iterate, g, "--iterations", "iterations", "iteration count");

  auto* report = app.add_subcommand("report", "re-emit a saved report");
  report->add_option("--input", input, "report.json")->required();
  report->add_option("--format", formats, "json, csv and/or plotdata")->capture_default_str();

  auto* schema = app.add_subcommand("config-schema", "list config file keys");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitValidation;
  }

  try {
    if (*ingest) return cmd_ingest(g, input, format, profile);
    if (*generate) return cmd_generate(g);
    if (*size) return cmd_size(g, input);
    if (*featurize) return cmd_featurize(g, input);
    if (*train) return cmd_train(g, input);
    if (*evaluate) return cmd_evaluate(g, input, model);
    if (*sweep_cmd) return cmd_sweep(g, input);
    if (*iterate) return cmd_iterate(g, input);
    if (*report) return cmd_report(g, input, formats);
    if (*schema) {
      std::cout << config_schema();
      return 0;
    }
  } catch (const NumericalFailure& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const ConvergenceError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const IllPosedCircuitError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const SizingError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const ValidationFailure& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const DatasetError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
