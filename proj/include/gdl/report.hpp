#pragma once

#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

#include "gdl/metrics.hpp"
#include "gdl/pipeline.hpp"

namespace gdl {

enum class ReportFormat { Json, Csv, Plotdata };

ReportFormat parse_report_format(const std::string& name);

inline constexpr int kReportVersion = 1;

std::string report_to_json(const RunReport& report);
/// Inverse of report_to_json; the result compares equal to the original.
RunReport report_from_json(const std::string& text);

void save_report(const RunReport& report, const std::filesystem::path& path);
RunReport load_report(const std::filesystem::path& path);

/// One row per experiment; failed experiments carry NA metrics.
std::vector<MetricsRow> metrics_rows(const RunReport& report);

/// k, sizes, medians and threshold per iteration.
void write_iterations_csv(std::ostream& out, const RunReport& report);

struct PlotFile {
  std::string name;
  std::string content;
};

/// accuracy_vs_epoch.csv, tsa_vs_known_fraction.csv and iteration_boxplots.csv,
/// each included only when the report has data for it.
std::vector<PlotFile> plotdata(const RunReport& report);

/// Writes the files for one format into `dir` and returns their paths.
std::vector<std::filesystem::path> emit_report(const RunReport& report, ReportFormat format,
                                               const std::filesystem::path& dir);

}  // namespace gdl
