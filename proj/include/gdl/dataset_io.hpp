#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "gdl/graph.hpp"

namespace gdl {

enum class DatasetFormat { Jsonl, CsvPair };

DatasetFormat parse_format(const std::string& name);

/// Raised for records that cannot be read at all: bad JSON, missing fields,
/// unknown label characters, duplicate ids. `line` is 1-based, 0 if not
/// tied to a line.
class DatasetError : public std::runtime_error {
 public:
  DatasetError(const std::string& what, std::size_t line)
      : std::runtime_error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

struct Diagnostic {
  std::size_t line = 0;
  std::string id;
  std::string message;
};

struct ParseResult {
  GraphDataset dataset;
  /// Warnings (e.g. empty input) and graphs rejected by validation.
  std::vector<Diagnostic> diagnostics;
  std::size_t rejected = 0;
};

/// JSONL: one `{"id", "labels", "edges", "performance"?}` object per line.
/// CsvPair: `path` is a directory holding nodes.csv (id,node_index,label)
/// and edges.csv (id,src,dst); an optional performance.csv (id,performance)
/// supplies J values.
ParseResult parse_dataset(const std::filesystem::path& path, DatasetFormat format,
                          const ValidationProfile& profile = ValidationProfile::desk());

ParseResult parse_jsonl_string(const std::string& text,
                               const ValidationProfile& profile = ValidationProfile::desk());

std::string graph_to_json_line(const CircuitGraph& g);
CircuitGraph graph_from_json_line(const std::string& line, std::size_t line_no = 0);

void write_dataset(const GraphDataset& d, const std::filesystem::path& path);
void write_csv_pair(const GraphDataset& d, const std::filesystem::path& dir);

}  // namespace gdl
