#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace gdl {

/// Vertex roles in a circuit graph. Junctions (I, O, G, N) are electrical
/// nodes; R, C and L are two-terminal components.
enum class Label : std::uint8_t { I, O, G, N, R, C, L };

inline constexpr std::string_view kLabelAlphabet = "IOGNRCL";

char to_char(Label label);
std::optional<Label> label_from_char(char c);
bool is_junction(Label label);
bool is_component(Label label);

std::vector<Label> labels_from_string(std::string_view text);
std::string labels_to_string(const std::vector<Label>& labels);

using Edge = std::pair<int, int>;
using AdjacencyList = std::vector<std::vector<int>>;

/// Undirected vertex-labeled graph with an optional performance value.
///
/// The adjacency matrix is stored as given so that malformed candidates
/// (asymmetric, self-loops) can still be inspected by validate_graph.
class CircuitGraph {
 public:
  CircuitGraph() = default;

  /// Builds the graph from an unordered edge list. Throws
  /// std::invalid_argument on out-of-range endpoints or repeated edges.
  CircuitGraph(std::string id, std::vector<Label> labels, const std::vector<Edge>& edges,
               std::optional<double> performance = std::nullopt);

  /// Builds from a raw n x n 0/1 matrix; asymmetry is preserved.
  static CircuitGraph from_adjacency(std::string id, std::vector<Label> labels,
                                     const std::vector<std::vector<int>>& adjacency,
                                     std::optional<double> performance = std::nullopt);

  const std::string& id() const { return id_; }
  int node_count() const { return static_cast<int>(labels_.size()); }
  const std::vector<Label>& labels() const { return labels_; }
  Label label(int v) const { return labels_[static_cast<std::size_t>(v)]; }
  std::optional<double> performance() const { return performance_; }

  bool adjacent(int i, int j) const { return adj_[index(i, j)] != 0; }
  int degree(int v) const;
  std::vector<int> neighbors(int v) const;
  AdjacencyList adjacency_list() const;
  std::vector<std::vector<int>> adjacency_matrix() const;

  /// Upper-triangle edges (i < j) in row-major order. A self-loop (i, i)
  /// is included when present on the diagonal.
  std::vector<Edge> edges() const;

  CircuitGraph with_performance(std::optional<double> j) const;
  CircuitGraph with_id(std::string id) const;

  /// Relabels node order: old node i becomes node perm[i].
  CircuitGraph permuted(const std::vector<int>& perm) const;

  friend bool operator==(const CircuitGraph& a, const CircuitGraph& b);

 private:
  std::size_t index(int i, int j) const {
    return static_cast<std::size_t>(i) * labels_.size() + static_cast<std::size_t>(j);
  }

  std::string id_;
  std::vector<Label> labels_;
  std::vector<std::uint8_t> adj_;
  std::optional<double> performance_;
};

enum class ViolationCode {
  Asymmetric,
  SelfLoop,
  Disconnected,
  InputCount,
  OutputCount,
  GroundMissing,
  ComponentDegree,
  NodeCount,
  InvalidPerformance,
};

std::string_view to_string(ViolationCode code);

struct Violation {
  ViolationCode code;
  std::string detail;
};

struct ValidationResult {
  std::vector<Violation> violations;

  bool ok() const { return violations.empty(); }
  bool has(ViolationCode code) const;
  std::string summary() const;
};

/// Node-count bounds. The case-study profile is 6..20; generated desk data
/// only needs n >= 4.
struct ValidationProfile {
  int min_nodes = 4;
  int max_nodes = 1 << 20;

  static ValidationProfile desk() { return {}; }
  static ValidationProfile case_study() { return {6, 20}; }
};

ValidationResult validate_graph(const CircuitGraph& g,
                                const ValidationProfile& profile = ValidationProfile::desk());

bool is_connected(const AdjacencyList& adjacency);

/// Labeled-graph canonical form: two graphs get the same string iff they are
/// isomorphic under a label-preserving bijection. Uses colour refinement with
/// individualization, so it is exponential only on highly symmetric inputs.
std::string canonical_form(const CircuitGraph& g);

class GraphDataset {
 public:
  GraphDataset() = default;
  /// Throws std::invalid_argument if any id repeats or any graph is invalid.
  explicit GraphDataset(std::vector<CircuitGraph> graphs, std::string provenance = {},
                        const ValidationProfile& profile = ValidationProfile::desk());

  const std::vector<CircuitGraph>& graphs() const { return graphs_; }
  const std::string& provenance() const { return provenance_; }
  std::size_t size() const { return graphs_.size(); }
  bool empty() const { return graphs_.empty(); }
  const CircuitGraph& operator[](std::size_t i) const { return graphs_[i]; }

  auto begin() const { return graphs_.begin(); }
  auto end() const { return graphs_.end(); }

  /// True when every graph carries a performance value.
  bool fully_sized() const;

  friend bool operator==(const GraphDataset& a, const GraphDataset& b) {
    return a.graphs_ == b.graphs_;
  }

 private:
  std::vector<CircuitGraph> graphs_;
  std::string provenance_;
};

}  // namespace gdl
