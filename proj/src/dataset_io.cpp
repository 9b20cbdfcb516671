#include "gdl/dataset_io.hpp"

#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "json.hpp"

namespace gdl {

using nlohmann::json;

DatasetFormat parse_format(const std::string& name) {
  if (name == "jsonl") return DatasetFormat::Jsonl;
  if (name == "csv-pair" || name == "csv") return DatasetFormat::CsvPair;
  throw std::invalid_argument("unknown dataset format '" + name + "'");
}

std::string graph_to_json_line(const CircuitGraph& g) {
  json edges = json::array();
  for (const auto& [a, b] : g.edges()) edges.push_back({a, b});
  json j = {{"id", g.id()}, {"labels", labels_to_string(g.labels())}, {"edges", edges}};
  if (g.performance()) j["performance"] = *g.performance();
  return j.dump();
}

CircuitGraph graph_from_json_line(const std::string& line, std::size_t line_no) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::parse_error& e) {
    throw DatasetError(std::string("malformed JSON: ") + e.what(), line_no);
  }
  if (!j.is_object()) throw DatasetError("record is not an object", line_no);
  for (const char* key : {"id", "labels", "edges"}) {
    if (!j.contains(key)) throw DatasetError(std::string("missing field '") + key + "'", line_no);
  }
  if (!j["id"].is_string()) throw DatasetError("'id' must be a string", line_no);
  if (!j["labels"].is_string()) throw DatasetError("'labels' must be a string", line_no);
  if (!j["edges"].is_array()) throw DatasetError("'edges' must be an array", line_no);

  std::vector<Label> labels;
  try {
    labels = labels_from_string(j["labels"].get<std::string>());
  } catch (const std::invalid_argument& e) {
    throw DatasetError(e.what(), line_no);
  }

  std::vector<Edge> edges;
  for (const auto& e : j["edges"]) {
    if (!e.is_array() || e.size() != 2 || !e[0].is_number_integer() || !e[1].is_number_integer()) {
      throw DatasetError("edges must be [int, int] pairs", line_no);
    }
    edges.emplace_back(e[0].get<int>(), e[1].get<int>());
  }

  std::optional<double> perf;
  if (j.contains("performance") && !j["performance"].is_null()) {
    if (!j["performance"].is_number()) throw DatasetError("'performance' must be a number", line_no);
    perf = j["performance"].get<double>();
  }
  try {
    return CircuitGraph(j["id"].get<std::string>(), std::move(labels), edges, perf);
  } catch (const std::invalid_argument& e) {
    throw DatasetError(e.what(), line_no);
  }
}

namespace {

struct PendingGraph {
  CircuitGraph graph;
  std::size_t line;
};

ParseResult finish(std::vector<PendingGraph> pending, const std::string& provenance,
                   const ValidationProfile& profile) {
  ParseResult result;
  std::set<std::string> ids;
  std::vector<CircuitGraph> accepted;
  for (auto& p : pending) {
    if (!ids.insert(p.graph.id()).second) {
      throw DatasetError("duplicate id '" + p.graph.id() + "'", p.line);
    }
    auto v = validate_graph(p.graph, profile);
    if (!v.ok()) {
      result.diagnostics.push_back({p.line, p.graph.id(), "rejected: " + v.summary()});
      ++result.rejected;
      continue;
    }
    accepted.push_back(std::move(p.graph));
  }
  if (pending.empty()) result.diagnostics.push_back({0, {}, "warning: dataset is empty"});
  result.dataset = GraphDataset(std::move(accepted), provenance, profile);
  return result;
}

ParseResult parse_jsonl_stream(std::istream& in, const std::string& provenance,
                               const ValidationProfile& profile) {
  std::vector<PendingGraph> pending;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    pending.push_back({graph_from_json_line(line, line_no), line_no});
  }
  return finish(std::move(pending), provenance, profile);
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream is(line);
  while (std::getline(is, cell, ',')) {
    const auto b = cell.find_first_not_of(" \t\r");
    const auto e = cell.find_last_not_of(" \t\r");
    out.push_back(b == std::string::npos ? std::string() : cell.substr(b, e - b + 1));
  }
  return out;
}

int to_int(const std::string& s, std::size_t line_no) {
  try {
    std::size_t pos = 0;
    const int v = std::stoi(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw DatasetError("expected integer, got '" + s + "'", line_no);
  }
}

template <typename RowFn>
void read_csv(const std::filesystem::path& path, std::size_t columns, RowFn fn) {
  std::ifstream in(path);
  if (!in) throw DatasetError("cannot open " + path.string(), 0);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto cells = split_csv(line);
    if (line_no == 1 && !cells.empty() && cells[0] == "id") continue;  // header
    if (cells.size() != columns) {
      throw DatasetError(path.filename().string() + ": expected " + std::to_string(columns) +
                             " columns",
                         line_no);
    }
    fn(cells, line_no);
  }
}

ParseResult parse_csv_pair(const std::filesystem::path& dir, const ValidationProfile& profile) {
  struct Partial {
    std::map<int, Label> labels;
    std::vector<Edge> edges;
    std::optional<double> performance;
    std::size_t line = 0;
  };
  std::vector<std::string> order;
  std::map<std::string, Partial> parts;

  read_csv(dir / "nodes.csv", 3, [&](const std::vector<std::string>& c, std::size_t line_no) {
    auto [it, inserted] = parts.try_emplace(c[0]);
    if (inserted) {
      order.push_back(c[0]);
      it->second.line = line_no;
    }
    if (c[2].size() != 1 || !label_from_char(c[2][0])) {
      throw DatasetError("unknown label '" + c[2] + "'", line_no);
    }
    const int idx = to_int(c[1], line_no);
    if (!it->second.labels.emplace(idx, *label_from_char(c[2][0])).second) {
      throw DatasetError("node index repeated for '" + c[0] + "'", line_no);
    }
  });
  read_csv(dir / "edges.csv", 3, [&](const std::vector<std::string>& c, std::size_t line_no) {
    auto it = parts.find(c[0]);
    if (it == parts.end()) throw DatasetError("edge for unknown graph '" + c[0] + "'", line_no);
    it->second.edges.emplace_back(to_int(c[1], line_no), to_int(c[2], line_no));
  });
  if (std::filesystem::exists(dir / "performance.csv")) {
    read_csv(dir / "performance.csv", 2, [&](const std::vector<std::string>& c, std::size_t line_no) {
      auto it = parts.find(c[0]);
      if (it == parts.end()) throw DatasetError("performance for unknown graph '" + c[0] + "'", line_no);
      try {
        it->second.performance = std::stod(c[1]);
      } catch (const std::exception&) {
        throw DatasetError("bad performance value '" + c[1] + "'", line_no);
      }
    });
  }

  std::vector<PendingGraph> pending;
  for (const auto& id : order) {
    auto& p = parts[id];
    std::vector<Label> labels;
    int expect = 0;
    for (const auto& [idx, l] : p.labels) {
      if (idx != expect++) throw DatasetError("node indices of '" + id + "' are not 0..n-1", p.line);
      labels.push_back(l);
    }
    try {
      pending.push_back({CircuitGraph(id, std::move(labels), p.edges, p.performance), p.line});
    } catch (const std::invalid_argument& e) {
      throw DatasetError(e.what(), p.line);
    }
  }
  return finish(std::move(pending), dir.string(), profile);
}

}  // namespace

ParseResult parse_jsonl_string(const std::string& text, const ValidationProfile& profile) {
  std::istringstream in(text);
  return parse_jsonl_stream(in, "<string>", profile);
}

ParseResult parse_dataset(const std::filesystem::path& path, DatasetFormat format,
                          const ValidationProfile& profile) {
  if (format == DatasetFormat::CsvPair) return parse_csv_pair(path, profile);
  std::ifstream in(path);
  if (!in) throw DatasetError("cannot open " + path.string(), 0);
  return parse_jsonl_stream(in, path.string(), profile);
}

void write_dataset(const GraphDataset& d, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  for (const auto& g : d) out << graph_to_json_line(g) << '\n';
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

void write_csv_pair(const GraphDataset& d, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::ofstream nodes(dir / "nodes.csv"), edges(dir / "edges.csv");
  if (!nodes || !edges) throw std::runtime_error("cannot write csv pair into " + dir.string());
  nodes << "id,node_index,label\n";
  edges << "id,src,dst\n";
  bool any_perf = false;
  for (const auto& g : d) {
    for (int v = 0; v < g.node_count(); ++v) nodes << g.id() << ',' << v << ',' << to_char(g.label(v)) << '\n';
    for (const auto& [a, b] : g.edges()) edges << g.id() << ',' << a << ',' << b << '\n';
    any_perf = any_perf || g.performance().has_value();
  }
  if (any_perf) {
    std::ofstream perf(dir / "performance.csv");
    perf << "id,performance\n";
    perf.precision(17);
    for (const auto& g : d)
      if (g.performance()) perf << g.id() << ',' << *g.performance() << '\n';
  }
}

}  // namespace gdl
