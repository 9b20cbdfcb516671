#pragma once

// Independent reference implementations and fixtures shared by the unit
// tests and the acceptance binary.

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "gdl/circuit.hpp"
#include "gdl/graph.hpp"
#include "gdl/random.hpp"

namespace oracle {

using gdl::AdjacencyList;
using gdl::CircuitGraph;
using gdl::Edge;

// The 13-node mixed RLC example as printed: one L vertex has three
// neighbours and one N vertex is a pendant.
inline CircuitGraph thirteen_node_as_printed() {
  const std::vector<Edge> edges = {{0, 1}, {1, 2}, {2, 3}, {3, 4},  {3, 8},   {3, 9},  {4, 5},
                                   {5, 6}, {6, 7}, {6, 8}, {9, 10}, {10, 11}, {11, 12}};
  return CircuitGraph("printed", gdl::labels_from_string("IRLNCRLNORLCG"), edges);
}

// Same vertex list with edge 6-8 moved to 7-8, the smallest change that
// makes every component two-terminal.
inline CircuitGraph thirteen_node() {
  const std::vector<Edge> edges = {{0, 1}, {1, 2}, {2, 3}, {3, 4},  {3, 8},   {3, 9},  {4, 5},
                                   {5, 6}, {6, 7}, {7, 8}, {9, 10}, {10, 11}, {11, 12}};
  return CircuitGraph("thirteen", gdl::labels_from_string("IRLNCRLNORLCG"), edges);
}

// I - R - O, O - C - G.
inline CircuitGraph rc_lowpass(std::optional<double> j = std::nullopt) {
  return CircuitGraph("lowpass", gdl::labels_from_string("IROCG"), {{0, 1}, {1, 2}, {2, 3}, {3, 4}}, j);
}

inline AdjacencyList to_list(const std::vector<std::vector<int>>& m) {
  AdjacencyList out(m.size());
  for (std::size_t i = 0; i < m.size(); ++i)
    for (std::size_t j = 0; j < m.size(); ++j)
      if (m[i][j]) out[i].push_back(static_cast<int>(j));
  return out;
}

inline bool connected(const std::vector<std::vector<int>>& m) {
  std::vector<int> seen(m.size(), 0), stack = {0};
  seen[0] = 1;
  while (!stack.empty()) {
    const int v = stack.back();
    stack.pop_back();
    for (std::size_t u = 0; u < m.size(); ++u) {
      if (m[static_cast<std::size_t>(v)][u] && !seen[u]) {
        seen[u] = 1;
        stack.push_back(static_cast<int>(u));
      }
    }
  }
  return std::all_of(seen.begin(), seen.end(), [](int s) { return s; });
}

// Erdos-Renyi adjacency with edge probability p.
inline std::vector<std::vector<int>> random_adjacency(int n, double p, gdl::Rng& rng) {
  std::vector<std::vector<int>> m(static_cast<std::size_t>(n), std::vector<int>(static_cast<std::size_t>(n), 0));
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (rng.uniform() < p) m[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = m[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)] = 1;
  return m;
}

// Perron vector from a dense symmetric eigensolver, sign-fixed and
// normalized.
inline Eigen::VectorXd dense_eigenvector_centrality(const std::vector<std::vector<int>>& m) {
  const auto n = static_cast<Eigen::Index>(m.size());
  Eigen::MatrixXd a(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) a(i, j) = m[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a);
  Eigen::VectorXd v = es.eigenvectors().col(n - 1);
  if (v.sum() < 0) v = -v;
  return v.cwiseAbs() / v.norm();
}

// Betweenness by listing every simple s-t path and keeping the shortest.
inline std::vector<double> brute_force_betweenness(const std::vector<std::vector<int>>& m) {
  const int n = static_cast<int>(m.size());
  std::vector<double> out(static_cast<std::size_t>(n), 0.0);
  if (n < 3) return out;
  for (int s = 0; s < n; ++s) {
    for (int t = s + 1; t < n; ++t) {
      std::vector<std::vector<int>> paths;
      std::vector<int> path = {s};
      std::vector<char> on(static_cast<std::size_t>(n), 0);
      on[static_cast<std::size_t>(s)] = 1;
      std::function<void(int)> dfs = [&](int v) {
        if (v == t) {
          paths.push_back(path);
          return;
        }
        for (int u = 0; u < n; ++u) {
          if (!m[static_cast<std::size_t>(v)][static_cast<std::size_t>(u)] || on[static_cast<std::size_t>(u)]) continue;
          on[static_cast<std::size_t>(u)] = 1;
          path.push_back(u);
          dfs(u);
          path.pop_back();
          on[static_cast<std::size_t>(u)] = 0;
        }
      };
      dfs(s);
      if (paths.empty()) continue;
      std::size_t shortest = paths.front().size();
      for (const auto& p : paths) shortest = std::min(shortest, p.size());
      double count = 0;
      std::vector<double> through(static_cast<std::size_t>(n), 0.0);
      for (const auto& p : paths) {
        if (p.size() != shortest) continue;
        ++count;
        for (std::size_t k = 1; k + 1 < p.size(); ++k) through[static_cast<std::size_t>(p[k])] += 1;
      }
      for (int v = 0; v < n; ++v) out[static_cast<std::size_t>(v)] += through[static_cast<std::size_t>(v)] / count;
    }
  }
  const double norm = (n - 1.0) * (n - 2.0) / 2.0;
  for (auto& v : out) v /= norm;
  return out;
}

// Random RC netlist: a random spanning tree over the nodes plus extra
// elements. Input is node 1; output is any other non-ground node.
struct RandomNetlist {
  gdl::Netlist netlist;
  std::vector<double> values;
};

inline RandomNetlist random_rc_netlist(gdl::Rng& rng) {
  RandomNetlist r;
  const int nodes = 3 + static_cast<int>(rng.below(4));
  r.netlist.node_count = nodes;
  r.netlist.input_node = 1;
  r.netlist.output_node = 2 + static_cast<int>(rng.below(static_cast<std::uint64_t>(nodes - 2)));
  auto add = [&](int a, int b) {
    const auto kind = rng.uniform() < 0.5 ? gdl::ElementKind::R : gdl::ElementKind::C;
    r.netlist.elements.push_back({kind, a, b, static_cast<int>(r.values.size())});
    r.values.push_back(std::pow(10.0, rng.uniform(-2.0, 0.0)));
  };
  for (int v = 1; v < nodes; ++v) add(static_cast<int>(rng.below(static_cast<std::uint64_t>(v))), v);
  const int extra = static_cast<int>(rng.below(4));
  for (int e = 0; e < extra; ++e) {
    const int a = static_cast<int>(rng.below(static_cast<std::uint64_t>(nodes)));
    int b = static_cast<int>(rng.below(static_cast<std::uint64_t>(nodes - 1)));
    if (b >= a) ++b;
    add(a, b);
  }
  return r;
}

// Series divider: impedance Z1 from input to output, Z2 from output to
// ground. Each is a single R or C, an R||C pair or an R-C series pair.
inline RandomNetlist random_divider(gdl::Rng& rng) {
  RandomNetlist r;
  r.netlist.node_count = 3;
  r.netlist.input_node = 1;
  r.netlist.output_node = 2;
  auto element = [&](gdl::ElementKind k, int a, int b) {
    r.netlist.elements.push_back({k, a, b, static_cast<int>(r.values.size())});
    r.values.push_back(std::pow(10.0, rng.uniform(-2.0, 0.0)));
  };
  auto impedance = [&](int a, int b) {
    const auto pick = rng.below(4);
    const auto k1 = rng.uniform() < 0.5 ? gdl::ElementKind::R : gdl::ElementKind::C;
    if (pick < 2) {
      element(k1, a, b);
    } else if (pick == 2) {
      element(gdl::ElementKind::R, a, b);
      element(gdl::ElementKind::C, a, b);
    } else {
      const int mid = r.netlist.node_count++;
      element(gdl::ElementKind::R, a, mid);
      element(gdl::ElementKind::C, mid, b);
    }
  };
  impedance(1, 2);
  impedance(2, 0);
  return r;
}

// Central differences of f around x0, one coordinate at a time.
inline std::vector<double> central_difference(const std::function<double(const std::vector<double>&)>& f,
                                              std::vector<double> x0, double h) {
  std::vector<double> g(x0.size());
  for (std::size_t i = 0; i < x0.size(); ++i) {
    const double keep = x0[i];
    x0[i] = keep + h;
    const double up = f(x0);
    x0[i] = keep - h;
    const double down = f(x0);
    x0[i] = keep;
    g[i] = (up - down) / (2 * h);
  }
  return g;
}

}  // namespace oracle
