#include "gdl/graph.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

namespace gdl {

char to_char(Label label) { return kLabelAlphabet[static_cast<std::size_t>(label)]; }

std::optional<Label> label_from_char(char c) {
  const auto pos = kLabelAlphabet.find(c);
  if (pos == std::string_view::npos) return std::nullopt;
  return static_cast<Label>(pos);
}

bool is_junction(Label label) {
  return label == Label::I || label == Label::O || label == Label::G || label == Label::N;
}

bool is_component(Label label) { return !is_junction(label); }

std::vector<Label> labels_from_string(std::string_view text) {
  std::vector<Label> out;
  out.reserve(text.size());
  for (std::size_t i = 0; i < text.size(); ++i) {
    auto l = label_from_char(text[i]);
    if (!l) {
      throw std::invalid_argument("unknown label '" + std::string(1, text[i]) + "' at position " +
                                  std::to_string(i));
    }
    out.push_back(*l);
  }
  return out;
}

std::string labels_to_string(const std::vector<Label>& labels) {
  std::string s;
  s.reserve(labels.size());
  for (Label l : labels) s.push_back(to_char(l));
  return s;
}

CircuitGraph::CircuitGraph(std::string id, std::vector<Label> labels, const std::vector<Edge>& edges,
                           std::optional<double> performance)
    : id_(std::move(id)), labels_(std::move(labels)), performance_(performance) {
  const int n = node_count();
  adj_.assign(labels_.size() * labels_.size(), 0);
  for (const auto& [a, b] : edges) {
    if (a < 0 || b < 0 || a >= n || b >= n) {
      throw std::invalid_argument("edge (" + std::to_string(a) + "," + std::to_string(b) +
                                  ") out of range for " + std::to_string(n) + " nodes");
    }
    if (adj_[index(a, b)] != 0) {
      throw std::invalid_argument("repeated edge (" + std::to_string(a) + "," + std::to_string(b) +
                                  ")");
    }
    adj_[index(a, b)] = 1;
    adj_[index(b, a)] = 1;
  }
}

CircuitGraph CircuitGraph::from_adjacency(std::string id, std::vector<Label> labels,
                                          const std::vector<std::vector<int>>& adjacency,
                                          std::optional<double> performance) {
  CircuitGraph g;
  g.id_ = std::move(id);
  g.labels_ = std::move(labels);
  g.performance_ = performance;
  const std::size_t n = g.labels_.size();
  if (adjacency.size() != n) throw std::invalid_argument("adjacency row count != label count");
  g.adj_.assign(n * n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    if (adjacency[i].size() != n) throw std::invalid_argument("adjacency is not square");
    for (std::size_t j = 0; j < n; ++j) {
      const int a = adjacency[i][j];
      if (a != 0 && a != 1) throw std::invalid_argument("adjacency entries must be 0 or 1");
      g.adj_[i * n + j] = static_cast<std::uint8_t>(a);
    }
  }
  return g;
}

int CircuitGraph::degree(int v) const {
  int d = 0;
  for (int j = 0; j < node_count(); ++j) {
    if (j != v && adjacent(v, j)) ++d;
  }
  return d;
}

std::vector<int> CircuitGraph::neighbors(int v) const {
  std::vector<int> out;
  for (int j = 0; j < node_count(); ++j) {
    if (j != v && adjacent(v, j)) out.push_back(j);
  }
  return out;
}

AdjacencyList CircuitGraph::adjacency_list() const {
  AdjacencyList out(labels_.size());
  for (int i = 0; i < node_count(); ++i) out[static_cast<std::size_t>(i)] = neighbors(i);
  return out;
}

std::vector<std::vector<int>> CircuitGraph::adjacency_matrix() const {
  const int n = node_count();
  std::vector<std::vector<int>> a(labels_.size(), std::vector<int>(labels_.size(), 0));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = adjacent(i, j);
  return a;
}

std::vector<Edge> CircuitGraph::edges() const {
  std::vector<Edge> out;
  for (int i = 0; i < node_count(); ++i)
    for (int j = i; j < node_count(); ++j)
      if (adjacent(i, j) || adjacent(j, i)) out.emplace_back(i, j);
  return out;
}

CircuitGraph CircuitGraph::with_performance(std::optional<double> j) const {
  CircuitGraph g = *this;
  g.performance_ = j;
  return g;
}

CircuitGraph CircuitGraph::with_id(std::string id) const {
  CircuitGraph g = *this;
  g.id_ = std::move(id);
  return g;
}

CircuitGraph CircuitGraph::permuted(const std::vector<int>& perm) const {
  const int n = node_count();
  if (static_cast<int>(perm.size()) != n) throw std::invalid_argument("permutation size mismatch");
  std::vector<int> seen(perm.size(), 0);
  for (int p : perm) {
    if (p < 0 || p >= n || seen[static_cast<std::size_t>(p)]++) {
      throw std::invalid_argument("not a permutation");
    }
  }
  CircuitGraph g;
  g.id_ = id_;
  g.performance_ = performance_;
  g.labels_.resize(labels_.size());
  g.adj_.assign(adj_.size(), 0);
  for (int i = 0; i < n; ++i) {
    g.labels_[static_cast<std::size_t>(perm[static_cast<std::size_t>(i)])] = labels_[static_cast<std::size_t>(i)];
    for (int j = 0; j < n; ++j) {
      g.adj_[g.index(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(j)])] = adj_[index(i, j)];
    }
  }
  return g;
}

bool operator==(const CircuitGraph& a, const CircuitGraph& b) {
  if (a.id_ != b.id_ || a.labels_ != b.labels_ || a.adj_ != b.adj_) return false;
  if (a.performance_.has_value() != b.performance_.has_value()) return false;
  if (!a.performance_) return true;
  // Bitwise comparison so that round-trips are checked to full precision.
  return std::memcmp(&*a.performance_, &*b.performance_, sizeof(double)) == 0;
}

std::string_view to_string(ViolationCode code) {
  switch (code) {
    case ViolationCode::Asymmetric: return "asymmetric";
    case ViolationCode::SelfLoop: return "self-loop";
    case ViolationCode::Disconnected: return "disconnected";
    case ViolationCode::InputCount: return "input-count";
    case ViolationCode::OutputCount: return "output-count";
    case ViolationCode::GroundMissing: return "ground-missing";
    case ViolationCode::ComponentDegree: return "component-degree";
    case ViolationCode::NodeCount: return "node-count";
    case ViolationCode::InvalidPerformance: return "invalid-performance";
  }
  return "unknown";
}

bool ValidationResult::has(ViolationCode code) const {
  return std::any_of(violations.begin(), violations.end(),
                     [code](const Violation& v) { return v.code == code; });
}

std::string ValidationResult::summary() const {
  std::ostringstream os;
  for (std::size_t i = 0; i < violations.size(); ++i) {
    if (i) os << "; ";
    os << to_string(violations[i].code) << ": " << violations[i].detail;
  }
  return os.str();
}

bool is_connected(const AdjacencyList& adjacency) {
  if (adjacency.empty()) return false;
  std::vector<char> seen(adjacency.size(), 0);
  std::vector<int> stack{0};
  seen[0] = 1;
  std::size_t count = 1;
  while (!stack.empty()) {
    const int v = stack.back();
    stack.pop_back();
    for (int w : adjacency[static_cast<std::size_t>(v)]) {
      if (!seen[static_cast<std::size_t>(w)]) {
        seen[static_cast<std::size_t>(w)] = 1;
        ++count;
        stack.push_back(w);
      }
    }
  }
  return count == adjacency.size();
}

ValidationResult validate_graph(const CircuitGraph& g, const ValidationProfile& profile) {
  ValidationResult r;
  const int n = g.node_count();
  auto add = [&r](ViolationCode c, std::string d) { r.violations.push_back({c, std::move(d)}); };

  if (n < profile.min_nodes || n > profile.max_nodes) {
    add(ViolationCode::NodeCount, std::to_string(n) + " nodes outside [" +
                                      std::to_string(profile.min_nodes) + ", " +
                                      std::to_string(profile.max_nodes) + "]");
  }
  for (int i = 0; i < n; ++i) {
    if (g.adjacent(i, i)) add(ViolationCode::SelfLoop, "node " + std::to_string(i));
    for (int j = i + 1; j < n; ++j) {
      if (g.adjacent(i, j) != g.adjacent(j, i)) {
        add(ViolationCode::Asymmetric, "a(" + std::to_string(i) + "," + std::to_string(j) +
                                           ") != a(" + std::to_string(j) + "," +
                                           std::to_string(i) + ")");
      }
    }
  }
  if (n > 0) {
    // Connectivity over the symmetric closure so that asymmetry is reported once.
    AdjacencyList sym(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        if (i != j && (g.adjacent(i, j) || g.adjacent(j, i))) sym[static_cast<std::size_t>(i)].push_back(j);
    if (!is_connected(sym)) add(ViolationCode::Disconnected, "graph has more than one component");
  }

  const auto count = [&g](Label l) {
    return std::count(g.labels().begin(), g.labels().end(), l);
  };
  if (const auto c = count(Label::I); c != 1) {
    add(ViolationCode::InputCount, "expected exactly one I, found " + std::to_string(c));
  }
  if (const auto c = count(Label::O); c != 1) {
    add(ViolationCode::OutputCount, "expected exactly one O, found " + std::to_string(c));
  }
  if (count(Label::G) < 1) add(ViolationCode::GroundMissing, "no G vertex");

  for (int v = 0; v < n; ++v) {
    if (is_component(g.label(v)) && g.degree(v) != 2) {
      add(ViolationCode::ComponentDegree, std::string(1, to_char(g.label(v))) + " vertex " +
                                              std::to_string(v) + " has degree " +
                                              std::to_string(g.degree(v)));
    }
  }
  if (auto j = g.performance(); j && !(std::isfinite(*j) && *j > 0.0)) {
    add(ViolationCode::InvalidPerformance, "performance must be finite and > 0");
  }
  return r;
}

namespace {

class Canonicalizer {
 public:
  explicit Canonicalizer(const CircuitGraph& g) : g_(g), n_(g.node_count()), adj_(g.adjacency_list()) {}

  std::string run() {
    std::vector<int> colors(static_cast<std::size_t>(n_));
    for (int v = 0; v < n_; ++v) colors[static_cast<std::size_t>(v)] = static_cast<int>(g_.label(v));
    colors = rank(colors, [&](int v) { return std::vector<int>{colors[static_cast<std::size_t>(v)]}; });
    search(refine(colors));
    return best_;
  }

 private:
  template <typename KeyFn>
  std::vector<int> rank(const std::vector<int>& /*colors*/, KeyFn key) const {
    std::map<std::vector<int>, int> ids;
    std::vector<std::vector<int>> keys(static_cast<std::size_t>(n_));
    for (int v = 0; v < n_; ++v) {
      keys[static_cast<std::size_t>(v)] = key(v);
      ids.emplace(keys[static_cast<std::size_t>(v)], 0);
    }
    int next = 0;
    for (auto& [k, id] : ids) id = next++;
    std::vector<int> out(static_cast<std::size_t>(n_));
    for (int v = 0; v < n_; ++v) out[static_cast<std::size_t>(v)] = ids[keys[static_cast<std::size_t>(v)]];
    return out;
  }

  static int color_count(const std::vector<int>& colors) {
    return colors.empty() ? 0 : *std::max_element(colors.begin(), colors.end()) + 1;
  }

  std::vector<int> refine(std::vector<int> colors) const {
    int classes = color_count(colors);
    for (;;) {
      auto next = rank(colors, [&](int v) {
        std::vector<int> key{colors[static_cast<std::size_t>(v)]};
        std::vector<int> nb;
        for (int w : adj_[static_cast<std::size_t>(v)]) nb.push_back(colors[static_cast<std::size_t>(w)]);
        std::sort(nb.begin(), nb.end());
        key.insert(key.end(), nb.begin(), nb.end());
        return key;
      });
      const int next_classes = color_count(next);
      colors = std::move(next);
      if (next_classes == classes) return colors;
      classes = next_classes;
    }
  }

  std::string certificate(const std::vector<int>& colors) const {
    // Discrete colouring: colour c is the canonical position of the vertex.
    std::vector<int> order(static_cast<std::size_t>(n_));
    for (int v = 0; v < n_; ++v) order[static_cast<std::size_t>(colors[static_cast<std::size_t>(v)])] = v;
    std::string cert;
    cert.reserve(static_cast<std::size_t>(n_ + n_ * (n_ - 1) / 2 + 1));
    for (int v : order) cert.push_back(to_char(g_.label(v)));
    cert.push_back('|');
    for (int i = 0; i < n_; ++i)
      for (int j = i + 1; j < n_; ++j)
        cert.push_back(g_.adjacent(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(j)]) ? '1' : '0');
    return cert;
  }

  void search(const std::vector<int>& colors) {
    const int classes = color_count(colors);
    if (classes == n_) {
      auto cert = certificate(colors);
      if (best_.empty() || cert < best_) best_ = std::move(cert);
      return;
    }
    std::vector<int> cell_size(static_cast<std::size_t>(classes), 0);
    for (int c : colors) ++cell_size[static_cast<std::size_t>(c)];
    int target = 0;
    while (cell_size[static_cast<std::size_t>(target)] < 2) ++target;
    for (int v = 0; v < n_; ++v) {
      if (colors[static_cast<std::size_t>(v)] != target) continue;
      auto split = rank(colors, [&](int w) {
        const int c = colors[static_cast<std::size_t>(w)];
        return std::vector<int>{2 * c + ((c == target && w != v) ? 1 : 0)};
      });
      search(refine(std::move(split)));
    }
  }

  const CircuitGraph& g_;
  int n_;
  AdjacencyList adj_;
  std::string best_;
};

}  // namespace

std::string canonical_form(const CircuitGraph& g) {
  if (g.node_count() == 0) return "|";
  return Canonicalizer(g).run();
}

GraphDataset::GraphDataset(std::vector<CircuitGraph> graphs, std::string provenance,
                           const ValidationProfile& profile)
    : graphs_(std::move(graphs)), provenance_(std::move(provenance)) {
  std::set<std::string> ids;
  for (const auto& g : graphs_) {
    if (!ids.insert(g.id()).second) throw std::invalid_argument("duplicate graph id '" + g.id() + "'");
    auto v = validate_graph(g, profile);
    if (!v.ok()) throw std::invalid_argument("graph '" + g.id() + "' invalid: " + v.summary());
  }
}

bool GraphDataset::fully_sized() const {
  return std::all_of(graphs_.begin(), graphs_.end(),
                     [](const CircuitGraph& g) { return g.performance().has_value(); });
}

}  // namespace gdl
