#include "gdl/report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace gdl {

namespace {

using nlohmann::json;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

json num(double v) { return std::isnan(v) ? json(nullptr) : json(v); }

double num(const json& j) { return j.is_null() ? kNaN : j.get<double>(); }

json nums(const std::vector<double>& v) {
  json a = json::array();
  for (double x : v) a.push_back(num(x));
  return a;
}

std::vector<double> nums(const json& j) {
  std::vector<double> out;
  for (const auto& x : j) out.push_back(num(x));
  return out;
}

json to_json(const ConfusionMatrix& cm) { return {{"tp", cm.tp}, {"fp", cm.fp}, {"fn", cm.fn}, {"tn", cm.tn}}; }

ConfusionMatrix cm_from(const json& j) {
  return {j.at("tp").get<std::size_t>(), j.at("fp").get<std::size_t>(), j.at("fn").get<std::size_t>(),
          j.at("tn").get<std::size_t>()};
}

json to_json(const SetStats& s) {
  return {{"size", s.size},        {"min", num(s.min)}, {"q1", num(s.q1)}, {"median", num(s.median)},
          {"q3", num(s.q3)},       {"max", num(s.max)}};
}

SetStats stats_from(const json& j) {
  SetStats s;
  s.size = j.at("size").get<std::size_t>();
  s.min = num(j.at("min"));
  s.q1 = num(j.at("q1"));
  s.median = num(j.at("median"));
  s.q3 = num(j.at("q3"));
  s.max = num(j.at("max"));
  return s;
}

json to_json(const MetricsSummary& m) {
  return {{"confusion", to_json(m.cm)}, {"accuracy", num(m.accuracy)}, {"precision", num(m.precision)},
          {"recall", num(m.recall)},    {"f1", num(m.f1)},             {"mcc", num(m.mcc)},
          {"degenerate", m.degenerate}};
}

MetricsSummary metrics_from(const json& j) {
  MetricsSummary m;
  m.cm = cm_from(j.at("confusion"));
  m.accuracy = num(j.at("accuracy"));
  m.precision = num(j.at("precision"));
  m.recall = num(j.at("recall"));
  m.f1 = num(j.at("f1"));
  m.mcc = num(j.at("mcc"));
  m.degenerate = j.at("degenerate").get<std::vector<std::string>>();
  return m;
}

json to_json(const TrainHistory& h) {
  return {{"train_loss", nums(h.train_loss)},
          {"train_accuracy", nums(h.train_accuracy)},
          {"validation_accuracy", nums(h.validation_accuracy)},
          {"wall_seconds", num(h.wall_seconds)}};
}

TrainHistory history_from(const json& j) {
  TrainHistory h;
  h.train_loss = nums(j.at("train_loss"));
  h.train_accuracy = nums(j.at("train_accuracy"));
  h.validation_accuracy = nums(j.at("validation_accuracy"));
  h.wall_seconds = num(j.at("wall_seconds"));
  return h;
}

template <typename T, typename F>
json optional_json(const std::optional<T>& v, F&& f) {
  return v ? f(*v) : json(nullptr);
}

json to_json(const ExperimentResult& e) {
  return {{"known_fraction", num(e.known_fraction)},
          {"n_all", e.n_all},
          {"n_known", e.n_known},
          {"n_unknown", e.n_unknown},
          {"n_training", e.n_training},
          {"n_validation", e.n_validation},
          {"threshold", num(e.threshold)},
          {"threshold_degenerate", e.threshold_degenerate},
          {"metrics_on", to_string(e.metrics_on)},
          {"metrics", optional_json(e.metrics, [](const auto& m) { return to_json(m); })},
          {"known_confusion", optional_json(e.known_cm, [](const auto& c) { return to_json(c); })},
          {"total_set_accuracy", optional_json(e.total_set_accuracy, [](double v) { return num(v); })},
          {"random_baseline", num(e.random_baseline)},
          {"history", optional_json(e.history, [](const auto& h) { return to_json(h); })},
          {"train_seconds", num(e.train_seconds)},
          {"checkpoint", e.checkpoint},
          {"error", e.error}};
}

ExperimentResult experiment_from(const json& j) {
  ExperimentResult e;
  e.known_fraction = num(j.at("known_fraction"));
  e.n_all = j.at("n_all").get<std::size_t>();
  e.n_known = j.at("n_known").get<std::size_t>();
  e.n_unknown = j.at("n_unknown").get<std::size_t>();
  e.n_training = j.at("n_training").get<std::size_t>();
  e.n_validation = j.at("n_validation").get<std::size_t>();
  e.threshold = num(j.at("threshold"));
  e.threshold_degenerate = j.at("threshold_degenerate").get<bool>();
  e.metrics_on = parse_metrics_on(j.at("metrics_on").get<std::string>());
  if (!j.at("metrics").is_null()) e.metrics = metrics_from(j.at("metrics"));
  if (!j.at("known_confusion").is_null()) e.known_cm = cm_from(j.at("known_confusion"));
  // A present-but-NaN accuracy cannot occur, so null means absent.
  if (!j.at("total_set_accuracy").is_null()) e.total_set_accuracy = num(j.at("total_set_accuracy"));
  e.random_baseline = num(j.at("random_baseline"));
  if (!j.at("history").is_null()) e.history = history_from(j.at("history"));
  e.train_seconds = num(j.at("train_seconds"));
  e.checkpoint = j.at("checkpoint").get<std::string>();
  e.error = j.at("error").get<std::string>();
  return e;
}

json to_json(const IterationRecord& r) {
  return {{"k", r.k},
          {"known", to_json(r.known)},
          {"known1", to_json(r.known1)},
          {"known0", to_json(r.known0)},
          {"predicted1", to_json(r.predicted1)},
          {"predicted0", to_json(r.predicted0)},
          {"threshold", num(r.threshold)},
          {"threshold_degenerate", r.threshold_degenerate},
          {"confusion", optional_json(r.confusion, [](const auto& c) { return to_json(c); })},
          {"train_seconds", num(r.train_seconds)},
          {"checkpoint", r.checkpoint}};
}

IterationRecord iteration_from(const json& j) {
  IterationRecord r;
  r.k = j.at("k").get<int>();
  r.known = stats_from(j.at("known"));
  r.known1 = stats_from(j.at("known1"));
  r.known0 = stats_from(j.at("known0"));
  r.predicted1 = stats_from(j.at("predicted1"));
  r.predicted0 = stats_from(j.at("predicted0"));
  r.threshold = num(j.at("threshold"));
  r.threshold_degenerate = j.at("threshold_degenerate").get<bool>();
  if (!j.at("confusion").is_null()) r.confusion = cm_from(j.at("confusion"));
  r.train_seconds = num(j.at("train_seconds"));
  r.checkpoint = j.at("checkpoint").get<std::string>();
  return r;
}

std::string fmt(double v, const char* format = "%.17g") {
  if (std::isnan(v)) return "NA";
  char buf[64];
  std::snprintf(buf, sizeof buf, format, v);
  return buf;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

}  // namespace

ReportFormat parse_report_format(const std::string& name) {
  if (name == "json") return ReportFormat::Json;
  if (name == "csv") return ReportFormat::Csv;
  if (name == "plotdata") return ReportFormat::Plotdata;
  throw std::invalid_argument("unknown report format '" + name + "' (expected json, csv or plotdata)");
}

std::string report_to_json(const RunReport& r) {
  json config = json::array();
  for (const auto& [k, v] : r.config) config.push_back({k, v});
  json experiments = json::array(), iterations = json::array(), retention = json::array();
  for (const auto& e : r.experiments) experiments.push_back(to_json(e));
  for (const auto& it : r.iterations) iterations.push_back(to_json(it));
  for (const auto& t : r.retention) {
    retention.push_back({{"k", t.k}, {"retained", t.retained}, {"expected_random", num(t.expected_random)}});
  }
  json j = {{"format", "gdl-report"},
            {"version", kReportVersion},
            {"mode", r.mode},
            {"config", config},
            {"dataset", r.dataset},
            {"n_all", r.n_all},
            {"has_truth", r.has_truth},
            {"experiments", experiments},
            {"iterations", iterations},
            {"final_set", r.final_set},
            {"retention", retention},
            {"stopped_early", r.stopped_early},
            {"stop_reason", r.stop_reason},
            {"wall_seconds", num(r.wall_seconds)}};
  return j.dump(1);
}

RunReport report_from_json(const std::string& text) {
  const json j = json::parse(text);
  if (j.value("format", "") != "gdl-report") throw std::runtime_error("not a gdl-report file");
  if (j.at("version").get<int>() != kReportVersion) throw std::runtime_error("unsupported report version");
  RunReport r;
  r.mode = j.at("mode").get<std::string>();
  for (const auto& kv : j.at("config")) r.config.emplace_back(kv.at(0).get<std::string>(), kv.at(1).get<std::string>());
  r.dataset = j.at("dataset").get<std::string>();
  r.n_all = j.at("n_all").get<std::size_t>();
  r.has_truth = j.at("has_truth").get<bool>();
  for (const auto& e : j.at("experiments")) r.experiments.push_back(experiment_from(e));
  for (const auto& it : j.at("iterations")) r.iterations.push_back(iteration_from(it));
  r.final_set = j.at("final_set").get<std::vector<std::string>>();
  for (const auto& t : j.at("retention")) {
    r.retention.push_back({t.at("k").get<std::size_t>(), t.at("retained").get<std::size_t>(),
                           num(t.at("expected_random"))});
  }
  r.stopped_early = j.at("stopped_early").get<bool>();
  r.stop_reason = j.at("stop_reason").get<std::string>();
  r.wall_seconds = num(j.at("wall_seconds"));
  return r;
}

void save_report(const RunReport& report, const std::filesystem::path& path) {
  write_file(path, report_to_json(report) + "\n");
}

RunReport load_report(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return report_from_json(ss.str());
}

std::vector<MetricsRow> metrics_rows(const RunReport& report) {
  std::vector<MetricsRow> rows;
  for (const auto& e : report.experiments) {
    MetricsRow row;
    row.n_known = e.n_known;
    row.pct_known = e.n_all ? 100.0 * static_cast<double>(e.n_known) / static_cast<double>(e.n_all) : kNaN;
    row.train_seconds = e.error.empty() ? e.train_seconds : kNaN;
    if (e.metrics) {
      row.metrics = *e.metrics;
    } else {
      row.metrics.accuracy = row.metrics.precision = row.metrics.recall = row.metrics.f1 = row.metrics.mcc = kNaN;
    }
    row.total_set_accuracy = e.total_set_accuracy.value_or(kNaN);
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_iterations_csv(std::ostream& out, const RunReport& report) {
  out << "k,known,known1,known0,predicted1,predicted0,median_known1,median_known0,median_predicted1,"
         "median_predicted0,threshold\n";
  for (const auto& it : report.iterations) {
    out << it.k << ',' << it.known.size << ',' << it.known1.size << ',' << it.known0.size << ','
        << it.predicted1.size << ',' << it.predicted0.size << ',' << fmt(it.known1.median) << ','
        << fmt(it.known0.median) << ',' << fmt(it.predicted1.median) << ',' << fmt(it.predicted0.median) << ','
        << fmt(it.threshold) << '\n';
  }
}

std::vector<PlotFile> plotdata(const RunReport& report) {
  std::vector<PlotFile> files;

  std::ostringstream curves;
  bool any_history = false;
  curves << "run,known_fraction,epoch,train_loss,train_accuracy,validation_accuracy\n";
  for (std::size_t i = 0; i < report.experiments.size(); ++i) {
    const auto& e = report.experiments[i];
    if (!e.history) continue;
    any_history = true;
    for (std::size_t ep = 0; ep < e.history->train_loss.size(); ++ep) {
      curves << i << ',' << fmt(e.known_fraction) << ',' << ep + 1 << ',' << fmt(e.history->train_loss[ep]) << ','
             << fmt(e.history->train_accuracy[ep]) << ',' << fmt(e.history->validation_accuracy[ep]) << '\n';
    }
  }
  if (any_history) files.push_back({"accuracy_vs_epoch.csv", curves.str()});

  if (!report.experiments.empty() && report.has_truth) {
    std::ostringstream tsa;
    tsa << "known_fraction,total_set_accuracy,random_baseline\n";
    for (const auto& e : report.experiments) {
      tsa << fmt(e.known_fraction) << ',' << fmt(e.total_set_accuracy.value_or(kNaN)) << ','
          << fmt(e.random_baseline) << '\n';
    }
    files.push_back({"tsa_vs_known_fraction.csv", tsa.str()});
  }

  if (!report.iterations.empty()) {
    std::ostringstream box;
    box << "k,set,size,min,q1,median,q3,max\n";
    for (const auto& it : report.iterations) {
      const std::pair<const char*, const SetStats*> sets[] = {
          {"known1", &it.known1}, {"known0", &it.known0}, {"predicted1", &it.predicted1}, {"predicted0", &it.predicted0}};
      for (const auto& [name, s] : sets) {
        box << it.k << ',' << name << ',' << s->size << ',' << fmt(s->min) << ',' << fmt(s->q1) << ','
            << fmt(s->median) << ',' << fmt(s->q3) << ',' << fmt(s->max) << '\n';
      }
    }
    files.push_back({"iteration_boxplots.csv", box.str()});
  }
  return files;
}

std::vector<std::filesystem::path> emit_report(const RunReport& report, ReportFormat format,
                                               const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::vector<std::filesystem::path> written;
  switch (format) {
    case ReportFormat::Json:
      written.push_back(dir / "report.json");
      save_report(report, written.back());
      break;
    case ReportFormat::Csv: {
      if (!report.experiments.empty()) {
        std::ostringstream s;
        const auto rows = metrics_rows(report);
        write_metrics_csv(s, rows);
        written.push_back(dir / "metrics.csv");
        write_file(written.back(), s.str());
      }
      if (!report.iterations.empty()) {
        std::ostringstream s;
        write_iterations_csv(s, report);
        written.push_back(dir / "iterations.csv");
        write_file(written.back(), s.str());
      }
      break;
    }
    case ReportFormat::Plotdata:
      for (const auto& f : plotdata(report)) {
        written.push_back(dir / f.name);
        write_file(written.back(), f.content);
      }
      break;
  }
  return written;
}

}  // namespace gdl
