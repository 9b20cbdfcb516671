#include "gdl/generator.hpp"

#include <algorithm>
#include <cstdio>
#include <functional>
#include <stdexcept>
#include <unordered_set>

#include "gdl/random.hpp"

namespace gdl {

namespace {

enum class Sub { R, C, Parallel, SeriesRC, SeriesCR };
constexpr Sub kSubs[] = {Sub::R, Sub::C, Sub::Parallel, Sub::SeriesRC, Sub::SeriesCR};

struct Slot {
  int a;
  int b;
  Sub kind;
};

constexpr int kI = 0, kO = 1, kG = 2;

struct Builder {
  std::vector<Label> labels;
  std::vector<Edge> edges;

  int add(Label l) {
    labels.push_back(l);
    return static_cast<int>(labels.size()) - 1;
  }
  void component(Label l, int a, int b) {
    const int v = add(l);
    edges.emplace_back(a, v);
    edges.emplace_back(v, b);
  }
  void place(const Slot& s) {
    switch (s.kind) {
      case Sub::R: component(Label::R, s.a, s.b); break;
      case Sub::C: component(Label::C, s.a, s.b); break;
      case Sub::Parallel:
        component(Label::R, s.a, s.b);
        component(Label::C, s.a, s.b);
        break;
      case Sub::SeriesRC:
      case Sub::SeriesCR: {
        const bool rc = s.kind == Sub::SeriesRC;
        const int first = add(rc ? Label::R : Label::C);
        const int second = add(rc ? Label::C : Label::R);
        edges.emplace_back(s.a, first);
        edges.emplace_back(first, second);
        edges.emplace_back(second, s.b);
        break;
      }
    }
  }
};

bool placement_ok(const std::vector<Slot>& chosen, int junctions) {
  std::vector<int> degree(static_cast<std::size_t>(junctions), 0);
  std::vector<int> parent(static_cast<std::size_t>(junctions));
  for (int i = 0; i < junctions; ++i) parent[static_cast<std::size_t>(i)] = i;
  std::function<int(int)> find = [&](int x) {
    return parent[static_cast<std::size_t>(x)] == x ? x : parent[static_cast<std::size_t>(x)] = find(parent[static_cast<std::size_t>(x)]);
  };
  for (const auto& s : chosen) {
    ++degree[static_cast<std::size_t>(s.a)];
    ++degree[static_cast<std::size_t>(s.b)];
    parent[static_cast<std::size_t>(find(s.a))] = find(s.b);
  }
  for (int j = 0; j < junctions; ++j) {
    const int need = j <= kG ? 1 : 2;
    if (degree[static_cast<std::size_t>(j)] < need) return false;
    if (find(j) != find(0)) return false;
  }
  // The signal must reach O without passing through ground, otherwise
  // |H| = 0 and J is undefined.
  for (int i = 0; i < junctions; ++i) parent[static_cast<std::size_t>(i)] = i;
  for (const auto& s : chosen) {
    if (s.a != kG && s.b != kG) parent[static_cast<std::size_t>(find(s.a))] = find(s.b);
  }
  return find(kI) == find(kO);
}

}  // namespace

GraphDataset generate_desk_dataset(const GeneratorOptions& opts) {
  if (opts.max_subcircuits < 1 || opts.max_subcircuits > 3) {
    throw std::invalid_argument("max_subcircuits must be in [1, 3]");
  }
  const int max_total = opts.max_subcircuits + 1;

  std::vector<CircuitGraph> graphs;
  std::unordered_set<std::string> seen;
  for (int total = 2; total <= max_total; ++total) {
    for (int internal = 0; internal <= total - 2; ++internal) {
      const int junctions = 3 + internal;
      std::vector<Slot> slots;
      for (int a = 0; a < junctions; ++a)
        for (int b = a + 1; b < junctions; ++b) {
          if (a == kI && b == kG) continue;
          for (Sub k : kSubs) slots.push_back({a, b, k});
        }

      // Multisets of `total` slots as non-decreasing index sequences.
      std::vector<std::size_t> pick(static_cast<std::size_t>(total), 0);
      std::vector<Slot> chosen(static_cast<std::size_t>(total));
      std::function<void(int, std::size_t)> rec = [&](int depth, std::size_t from) {
        if (depth == total) {
          for (int i = 0; i < total; ++i) chosen[static_cast<std::size_t>(i)] = slots[pick[static_cast<std::size_t>(i)]];
          if (!placement_ok(chosen, junctions)) return;
          Builder b;
          b.add(Label::I);
          b.add(Label::O);
          b.add(Label::G);
          for (int n = 0; n < internal; ++n) b.add(Label::N);
          for (const auto& s : chosen) b.place(s);
          CircuitGraph g("", std::move(b.labels), b.edges);
          if (seen.insert(canonical_form(g)).second) graphs.push_back(std::move(g));
          return;
        }
        for (std::size_t i = from; i < slots.size(); ++i) {
          pick[static_cast<std::size_t>(depth)] = i;
          rec(depth + 1, i);
        }
      };
      rec(0, 0);
    }
  }

  std::vector<std::size_t> keep(graphs.size());
  for (std::size_t i = 0; i < keep.size(); ++i) keep[i] = i;
  if (opts.limit > 0 && opts.limit < graphs.size()) {
    Rng rng(opts.seed);
    rng.shuffle(keep);
    keep.resize(opts.limit);
    std::sort(keep.begin(), keep.end());
  }

  std::vector<CircuitGraph> out;
  out.reserve(keep.size());
  char id[32];
  for (std::size_t i = 0; i < keep.size(); ++i) {
    std::snprintf(id, sizeof id, "rc%d-%05zu", opts.max_subcircuits, i);
    out.push_back(graphs[keep[i]].with_id(id));
  }
  return GraphDataset(std::move(out), "desk-generator max_subcircuits=" +
                                          std::to_string(opts.max_subcircuits));
}

}  // namespace gdl
