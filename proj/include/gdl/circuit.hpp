#pragma once

#include <complex>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "gdl/graph.hpp"

namespace gdl {

using Complex = std::complex<double>;

enum class ElementKind { R, C, L };

char to_char(ElementKind kind);

struct Element {
  ElementKind kind;
  int node_a;
  int node_b;
  /// Position in the component value vector z.
  int component_index;
  /// Graph vertex this element came from, -1 for hand-built netlists.
  int vertex = -1;
};

/// Electrical form of a circuit. Node 0 is ground.
struct Netlist {
  int node_count = 1;
  std::vector<Element> elements;
  int input_node = 1;
  int output_node = 1;

  int component_count() const { return static_cast<int>(elements.size()); }
  bool has_inductor() const;
};

class NetlistError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Floating island or resonant singularity in the nodal system.
class IllPosedCircuitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// |H| = 0 somewhere on the grid, so the log objective is undefined.
class InfiniteLogError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Junction vertices joined by edges are one electrical node; every G vertex
/// is ground. Each component vertex becomes an element between its two
/// neighbours' nodes, where an edge to another component is a midpoint node.
/// Components are indexed in vertex order.
Netlist graph_to_netlist(const CircuitGraph& g);

void check_netlist(const Netlist& nl);

struct FrequencyGrid {
  std::vector<double> omegas;

  /// 500 log-spaced angular frequencies with omega / 2pi in [0.2, 5].
  static FrequencyGrid standard();
  static FrequencyGrid log_spaced(double omega_min, double omega_max, int points);
  std::size_t size() const { return omegas.size(); }
};

inline constexpr double kBandLowHz = 0.2;
inline constexpr double kBandHighHz = 5.0;
inline constexpr int kGridPoints = 500;

struct NodalSolution {
  /// Voltages of every node, ground first.
  std::vector<Complex> voltages;
  /// ||Y v - b||_inf of the reduced system.
  double residual_inf = 0.0;
  /// ||b||_inf of the reduced system.
  double rhs_inf = 0.0;
};

/// Reusable nodal-analysis workspace for one netlist. Not thread-safe; give
/// each thread its own solver.
class ResponseSolver {
 public:
  explicit ResponseSolver(const Netlist& nl);

  /// V_out with V_in = 1 and ground = 0, output unloaded.
  Complex response(std::span<const double> z, double omega);
  NodalSolution solve(std::span<const double> z, double omega);

  const Netlist& netlist() const { return nl_; }

 private:
  void assemble(std::span<const double> z, double omega);
  void factor_and_solve();

  Netlist nl_;
  int unknowns_ = 0;
  std::vector<int> slot_;  // node -> unknown index, -1 for fixed nodes
  std::vector<Complex> y_;      // reduced admittance, row-major
  std::vector<Complex> y_copy_;
  std::vector<Complex> b_;
  std::vector<Complex> x_;
};

Complex frequency_response(const Netlist& nl, std::span<const double> z, double omega);

/// Target magnitude sqrt(2 pi / (10 omega)); throws std::domain_error
/// outside the band.
double desired_response(double omega);

/// Sum over the grid of (log10|H| - log10|F|)^2.
double performance_objective(const Netlist& nl, std::span<const double> z, const FrequencyGrid& grid);

/// Same as performance_objective but reusing a solver.
double performance_objective(ResponseSolver& solver, std::span<const double> z,
                             const FrequencyGrid& grid, std::span<const double> log_target);

std::vector<double> log10_target(const FrequencyGrid& grid);

}  // namespace gdl
