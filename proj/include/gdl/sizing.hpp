#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "gdl/circuit.hpp"
#include "gdl/graph.hpp"

namespace gdl {

/// Component value bounds for sizing, in log10 units: [1e-2, 1e0].
inline constexpr double kLogValueMin = -2.0;
inline constexpr double kLogValueMax = 0.0;

struct SizingOptions {
  int starts = 8;
  /// Objective evaluations allowed per start.
  int max_evals = 1500;
  std::uint64_t seed = 1;
  /// Stop a start when the simplex spread in J falls below this.
  double f_tol = 1e-12;
  /// ...and its diameter (log10 units) falls below this.
  double x_tol = 1e-7;
};

struct SizingResult {
  std::vector<double> values;
  double objective = 0.0;
  int starts_used = 0;
  int evaluations = 0;
  bool converged = false;
  /// Set by size_all when sizing threw; objective is then +inf.
  std::string error;
};

class SizingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct LocalResult {
  std::vector<double> x;
  double f = 0.0;
  int evaluations = 0;
  bool converged = false;
};

/// Nelder-Mead on the box [lo, hi]^d; every trial point is projected onto
/// the box before evaluation. Restarts the simplex around the incumbent once
/// it stalls, until a restart brings no improvement.
LocalResult nelder_mead_box(const std::function<double(std::span<const double>)>& f,
                            std::vector<double> x0, double lo, double hi, int max_evals,
                            double f_tol, double x_tol);

/// Multi-start sizing of an RC netlist in log10 space. Start points are
/// drawn sequentially from the seeded generator, so the best J over the
/// first k starts never increases as more starts are added.
SizingResult size_netlist(const Netlist& nl, const SizingOptions& opts,
                          const FrequencyGrid& grid = FrequencyGrid::standard());

/// Rejects inductor-bearing graphs.
SizingResult size_circuit(const CircuitGraph& g, const SizingOptions& opts,
                          const FrequencyGrid& grid = FrequencyGrid::standard());

/// Sizes every graph with a pool of `jobs` threads. Results are indexed like
/// the input and do not depend on the thread count.
std::vector<SizingResult> size_all(const std::vector<CircuitGraph>& graphs, const SizingOptions& opts,
                                   int jobs, const std::function<void(std::size_t)>& progress = {});

}  // namespace gdl
