#include "gdl/circuit.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <numeric>

namespace gdl {

char to_char(ElementKind kind) {
  switch (kind) {
    case ElementKind::R: return 'R';
    case ElementKind::C: return 'C';
    case ElementKind::L: return 'L';
  }
  return '?';
}

bool Netlist::has_inductor() const {
  return std::any_of(elements.begin(), elements.end(),
                     [](const Element& e) { return e.kind == ElementKind::L; });
}

namespace {

struct DisjointSet {
  explicit DisjointSet(int n) : parent(static_cast<std::size_t>(n)) {
    std::iota(parent.begin(), parent.end(), 0);
  }
  int find(int x) {
    while (parent[static_cast<std::size_t>(x)] != x) {
      parent[static_cast<std::size_t>(x)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
      x = parent[static_cast<std::size_t>(x)];
    }
    return x;
  }
  void unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[static_cast<std::size_t>(std::max(a, b))] = std::min(a, b);
  }
  std::vector<int> parent;
};

ElementKind element_kind(Label l) {
  switch (l) {
    case Label::R: return ElementKind::R;
    case Label::C: return ElementKind::C;
    default: return ElementKind::L;
  }
}

}  // namespace

Netlist graph_to_netlist(const CircuitGraph& g) {
  const int n = g.node_count();
  for (int v = 0; v < n; ++v) {
    if (is_component(g.label(v)) && g.degree(v) != 2) {
      throw NetlistError(std::string(1, to_char(g.label(v))) + " vertex " + std::to_string(v) +
                         " has degree " + std::to_string(g.degree(v)) + ", expected 2");
    }
  }

  // Merge junctions joined by wires; all G vertices share one class.
  DisjointSet sets(n);
  int first_ground = -1;
  for (int v = 0; v < n; ++v) {
    if (g.label(v) != Label::G) continue;
    if (first_ground < 0) {
      first_ground = v;
    } else {
      sets.unite(first_ground, v);
    }
  }
  for (const auto& [a, b] : g.edges()) {
    if (a != b && is_junction(g.label(a)) && is_junction(g.label(b))) sets.unite(a, b);
  }

  Netlist nl;
  std::map<int, int> class_node;
  if (first_ground >= 0) class_node[sets.find(first_ground)] = 0;
  int next = 1;
  for (int v = 0; v < n; ++v) {
    if (!is_junction(g.label(v))) continue;
    const int root = sets.find(v);
    if (!class_node.count(root)) class_node[root] = next++;
  }
  auto junction_node = [&](int v) { return class_node.at(sets.find(v)); };

  std::map<Edge, int> midpoint;
  for (const auto& [a, b] : g.edges()) {
    if (a != b && is_component(g.label(a)) && is_component(g.label(b))) midpoint[{a, b}] = next++;
  }
  nl.node_count = next;

  int component = 0;
  for (int v = 0; v < n; ++v) {
    if (!is_component(g.label(v))) continue;
    const auto nb = g.neighbors(v);
    int terminals[2];
    for (int t = 0; t < 2; ++t) {
      const int w = nb[static_cast<std::size_t>(t)];
      terminals[t] = is_junction(g.label(w)) ? junction_node(w) : midpoint.at({std::min(v, w), std::max(v, w)});
    }
    nl.elements.push_back({element_kind(g.label(v)), terminals[0], terminals[1], component++, v});
  }

  int input = -1, output = -1;
  for (int v = 0; v < n; ++v) {
    if (g.label(v) == Label::I) input = junction_node(v);
    if (g.label(v) == Label::O) output = junction_node(v);
  }
  if (input < 0 || output < 0) throw NetlistError("graph lacks an I or O vertex");
  if (input == 0) throw NetlistError("input vertex is wired to ground");
  if (output == 0) throw NetlistError("output vertex is wired to ground");
  nl.input_node = input;
  nl.output_node = output;
  return nl;
}

void check_netlist(const Netlist& nl) {
  if (nl.node_count < 2) throw NetlistError("netlist needs ground and at least one more node");
  if (nl.input_node <= 0 || nl.input_node >= nl.node_count) throw NetlistError("bad input node");
  if (nl.output_node <= 0 || nl.output_node >= nl.node_count) throw NetlistError("bad output node");
  DisjointSet sets(nl.node_count);
  for (const auto& e : nl.elements) {
    if (e.node_a < 0 || e.node_b < 0 || e.node_a >= nl.node_count || e.node_b >= nl.node_count) {
      throw NetlistError("element terminal out of range");
    }
    if (e.component_index < 0) throw NetlistError("negative component index");
    sets.unite(e.node_a, e.node_b);
  }
  // The source fixes the input node, so a node tied only to it is still determined.
  const int g = sets.find(0), in = sets.find(nl.input_node);
  for (int v = 0; v < nl.node_count; ++v) {
    const int root = sets.find(v);
    if (root != g && root != in) throw NetlistError("node " + std::to_string(v) + " is floating");
  }
}

FrequencyGrid FrequencyGrid::log_spaced(double omega_min, double omega_max, int points) {
  if (!(omega_min > 0.0) || !(omega_max > omega_min) || points < 2) {
    throw std::invalid_argument("invalid frequency grid");
  }
  FrequencyGrid grid;
  grid.omegas.resize(static_cast<std::size_t>(points));
  const double lo = std::log(omega_min), hi = std::log(omega_max);
  for (int k = 0; k < points; ++k) {
    grid.omegas[static_cast<std::size_t>(k)] = std::exp(lo + (hi - lo) * k / (points - 1));
  }
  grid.omegas.front() = omega_min;
  grid.omegas.back() = omega_max;
  return grid;
}

FrequencyGrid FrequencyGrid::standard() {
  return log_spaced(2.0 * std::numbers::pi * kBandLowHz, 2.0 * std::numbers::pi * kBandHighHz,
                    kGridPoints);
}

ResponseSolver::ResponseSolver(const Netlist& nl) : nl_(nl) {
  check_netlist(nl_);
  slot_.assign(static_cast<std::size_t>(nl_.node_count), -1);
  for (int v = 1; v < nl_.node_count; ++v) {
    if (v != nl_.input_node) slot_[static_cast<std::size_t>(v)] = unknowns_++;
  }
  const auto m = static_cast<std::size_t>(unknowns_);
  y_.assign(m * m, 0.0);
  y_copy_.assign(m * m, 0.0);
  b_.assign(m, 0.0);
  x_.assign(m, 0.0);
}

void ResponseSolver::assemble(std::span<const double> z, double omega) {
  if (!(omega > 0.0)) throw std::invalid_argument("omega must be positive");
  std::fill(y_.begin(), y_.end(), Complex{});
  std::fill(b_.begin(), b_.end(), Complex{});
  const auto m = static_cast<std::size_t>(unknowns_);
  for (const auto& e : nl_.elements) {
    if (static_cast<std::size_t>(e.component_index) >= z.size()) {
      throw std::invalid_argument("component value vector too short");
    }
    const double value = z[static_cast<std::size_t>(e.component_index)];
    if (!(value > 0.0)) throw std::invalid_argument("component values must be positive");
    Complex y;
    switch (e.kind) {
      case ElementKind::R: y = 1.0 / value; break;
      case ElementKind::C: y = Complex(0.0, omega * value); break;
      case ElementKind::L: y = Complex(0.0, -1.0 / (omega * value)); break;
    }
    const int sa = slot_[static_cast<std::size_t>(e.node_a)];
    const int sb = slot_[static_cast<std::size_t>(e.node_b)];
    if (sa >= 0) {
      y_[static_cast<std::size_t>(sa) * m + static_cast<std::size_t>(sa)] += y;
      if (sb >= 0) {
        y_[static_cast<std::size_t>(sa) * m + static_cast<std::size_t>(sb)] -= y;
      } else if (e.node_b == nl_.input_node) {
        b_[static_cast<std::size_t>(sa)] += y;
      }
    }
    if (sb >= 0) {
      y_[static_cast<std::size_t>(sb) * m + static_cast<std::size_t>(sb)] += y;
      if (sa >= 0) {
        y_[static_cast<std::size_t>(sb) * m + static_cast<std::size_t>(sa)] -= y;
      } else if (e.node_a == nl_.input_node) {
        b_[static_cast<std::size_t>(sb)] += y;
      }
    }
  }
}

namespace {
inline double norm1(Complex v) { return std::abs(v.real()) + std::abs(v.imag()); }
}  // namespace

void ResponseSolver::factor_and_solve() {
  const auto m = static_cast<std::size_t>(unknowns_);
  y_copy_ = y_;
  x_ = b_;
  double scale = 0.0;
  for (const auto& v : y_) scale = std::max(scale, norm1(v));
  const double tiny = 1e-13 * (scale > 0.0 ? scale : 1.0);

  for (std::size_t k = 0; k < m; ++k) {
    std::size_t piv = k;
    double best = norm1(y_copy_[k * m + k]);
    for (std::size_t r = k + 1; r < m; ++r) {
      const double a = norm1(y_copy_[r * m + k]);
      if (a > best) {
        best = a;
        piv = r;
      }
    }
    if (best <= tiny) throw IllPosedCircuitError("singular admittance system (floating node)");
    if (piv != k) {
      for (std::size_t c = k; c < m; ++c) std::swap(y_copy_[k * m + c], y_copy_[piv * m + c]);
      std::swap(x_[k], x_[piv]);
    }
    const Complex inv = 1.0 / y_copy_[k * m + k];
    for (std::size_t r = k + 1; r < m; ++r) {
      const Complex f = y_copy_[r * m + k] * inv;
      if (f == Complex{}) continue;
      for (std::size_t c = k + 1; c < m; ++c) y_copy_[r * m + c] -= f * y_copy_[k * m + c];
      x_[r] -= f * x_[k];
    }
  }
  for (std::size_t k = m; k-- > 0;) {
    Complex s = x_[k];
    for (std::size_t c = k + 1; c < m; ++c) s -= y_copy_[k * m + c] * x_[c];
    x_[k] = s / y_copy_[k * m + k];
  }
}

Complex ResponseSolver::response(std::span<const double> z, double omega) {
  if (nl_.output_node == nl_.input_node) return 1.0;
  assemble(z, omega);
  factor_and_solve();
  return x_[static_cast<std::size_t>(slot_[static_cast<std::size_t>(nl_.output_node)])];
}

NodalSolution ResponseSolver::solve(std::span<const double> z, double omega) {
  assemble(z, omega);
  factor_and_solve();
  NodalSolution sol;
  sol.voltages.assign(static_cast<std::size_t>(nl_.node_count), 0.0);
  sol.voltages[static_cast<std::size_t>(nl_.input_node)] = 1.0;
  for (int v = 0; v < nl_.node_count; ++v) {
    const int s = slot_[static_cast<std::size_t>(v)];
    if (s >= 0) sol.voltages[static_cast<std::size_t>(v)] = x_[static_cast<std::size_t>(s)];
  }
  const auto m = static_cast<std::size_t>(unknowns_);
  for (std::size_t r = 0; r < m; ++r) {
    Complex acc = -b_[r];
    for (std::size_t c = 0; c < m; ++c) acc += y_[r * m + c] * x_[c];
    sol.residual_inf = std::max(sol.residual_inf, std::abs(acc));
    sol.rhs_inf = std::max(sol.rhs_inf, std::abs(b_[r]));
  }
  return sol;
}

Complex frequency_response(const Netlist& nl, std::span<const double> z, double omega) {
  ResponseSolver solver(nl);
  return solver.response(z, omega);
}

double desired_response(double omega) {
  const double lo = 2.0 * std::numbers::pi * kBandLowHz;
  const double hi = 2.0 * std::numbers::pi * kBandHighHz;
  constexpr double slack = 1e-12;
  if (!(omega >= lo * (1.0 - slack) && omega <= hi * (1.0 + slack))) {
    throw std::domain_error("omega " + std::to_string(omega) + " outside the target band");
  }
  return std::sqrt(2.0 * std::numbers::pi / (10.0 * omega));
}

std::vector<double> log10_target(const FrequencyGrid& grid) {
  std::vector<double> out;
  out.reserve(grid.size());
  for (double w : grid.omegas) out.push_back(std::log10(desired_response(w)));
  return out;
}

double performance_objective(ResponseSolver& solver, std::span<const double> z,
                             const FrequencyGrid& grid, std::span<const double> log_target) {
  double j = 0.0;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const double mag = std::abs(solver.response(z, grid.omegas[k]));
    if (!(mag > 0.0)) throw InfiniteLogError("|H| = 0 at omega = " + std::to_string(grid.omegas[k]));
    const double d = std::log10(mag) - log_target[k];
    j += d * d;
  }
  return j;
}

double performance_objective(const Netlist& nl, std::span<const double> z, const FrequencyGrid& grid) {
  ResponseSolver solver(nl);
  const auto target = log10_target(grid);
  return performance_objective(solver, z, grid, target);
}

}  // namespace gdl
