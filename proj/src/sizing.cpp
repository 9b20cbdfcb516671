#include "gdl/sizing.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <numeric>
#include <thread>

#include "gdl/random.hpp"

namespace gdl {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Simplex {
  std::vector<std::vector<double>> x;
  std::vector<double> f;
};

}  // namespace

LocalResult nelder_mead_box(const std::function<double(std::span<const double>)>& f,
                            std::vector<double> x0, double lo, double hi, int max_evals,
                            double f_tol, double x_tol) {
  const std::size_t d = x0.size();
  LocalResult out;
  auto project = [&](std::vector<double>& p) {
    for (double& v : p) v = std::clamp(v, lo, hi);
  };
  auto eval = [&](const std::vector<double>& p) {
    ++out.evaluations;
    const double v = f(p);
    return std::isnan(v) ? kInf : v;
  };
  project(x0);
  out.x = x0;
  out.f = eval(x0);
  if (d == 0) {
    out.converged = true;
    return out;
  }

  const double step = 0.25 * (hi - lo);
  constexpr double kReflect = 1.0, kExpand = 2.0, kContract = 0.5, kShrink = 0.5;

  for (;;) {
    // Fresh simplex around the incumbent; steps point inward at the bounds.
    Simplex s;
    s.x.push_back(out.x);
    s.f.push_back(out.f);
    for (std::size_t i = 0; i < d && out.evaluations < max_evals; ++i) {
      auto p = out.x;
      p[i] = (p[i] + step <= hi) ? p[i] + step : p[i] - step;
      project(p);
      s.f.push_back(eval(p));
      s.x.push_back(std::move(p));
    }
    if (s.x.size() < d + 1) break;

    const double start_best = out.f;
    bool stalled = false;
    std::vector<std::size_t> order(d + 1);
    std::vector<double> centroid(d), trial(d), trial2(d);
    while (out.evaluations < max_evals) {
      std::iota(order.begin(), order.end(), 0);
      std::stable_sort(order.begin(), order.end(),
                       [&](std::size_t a, std::size_t b) { return s.f[a] < s.f[b]; });
      const std::size_t best = order.front(), worst = order.back(), second = order[d - 1];

      double diameter = 0.0;
      for (std::size_t i = 0; i <= d; ++i)
        for (std::size_t k = 0; k < d; ++k)
          diameter = std::max(diameter, std::abs(s.x[i][k] - s.x[best][k]));
      const double spread = s.f[worst] - s.f[best];
      if ((std::isfinite(spread) && spread <= f_tol * (1.0 + std::abs(s.f[best]))) && diameter <= x_tol) {
        stalled = true;
        break;
      }
      if (diameter <= 1e-3 * x_tol) {
        stalled = true;
        break;
      }

      std::fill(centroid.begin(), centroid.end(), 0.0);
      for (std::size_t i = 0; i <= d; ++i) {
        if (i == worst) continue;
        for (std::size_t k = 0; k < d; ++k) centroid[k] += s.x[i][k] / static_cast<double>(d);
      }
      auto along = [&](double t, std::vector<double>& p) {
        for (std::size_t k = 0; k < d; ++k) p[k] = centroid[k] + t * (centroid[k] - s.x[worst][k]);
        project(p);
      };

      along(kReflect, trial);
      const double fr = eval(trial);
      if (fr < s.f[best]) {
        along(kExpand, trial2);
        const double fe = eval(trial2);
        if (fe < fr) {
          s.x[worst] = trial2;
          s.f[worst] = fe;
        } else {
          s.x[worst] = trial;
          s.f[worst] = fr;
        }
        continue;
      }
      if (fr < s.f[second]) {
        s.x[worst] = trial;
        s.f[worst] = fr;
        continue;
      }
      if (fr < s.f[worst]) {
        along(kContract, trial2);  // outside contraction
      } else {
        along(-kContract, trial2);  // inside contraction
      }
      const double fc = eval(trial2);
      if (fc < std::min(fr, s.f[worst])) {
        s.x[worst] = trial2;
        s.f[worst] = fc;
        continue;
      }
      for (std::size_t i = 0; i <= d; ++i) {
        if (i == best) continue;
        for (std::size_t k = 0; k < d; ++k) s.x[i][k] = s.x[best][k] + kShrink * (s.x[i][k] - s.x[best][k]);
        project(s.x[i]);
        s.f[i] = eval(s.x[i]);
        if (out.evaluations >= max_evals) break;
      }
    }

    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (s.f[i] < out.f) {
        out.f = s.f[i];
        out.x = s.x[i];
      }
    }
    if (!stalled) break;  // budget exhausted
    if (!(out.f < start_best - f_tol * (1.0 + std::abs(start_best)))) {
      out.converged = true;
      break;
    }
  }
  return out;
}

SizingResult size_netlist(const Netlist& nl, const SizingOptions& opts, const FrequencyGrid& grid) {
  if (nl.has_inductor()) throw SizingError("inductor-bearing circuits are not sized by this objective");
  if (opts.starts < 1) throw std::invalid_argument("starts must be >= 1");
  ResponseSolver solver(nl);
  const auto target = log10_target(grid);
  const auto d = static_cast<std::size_t>(nl.component_count());

  std::vector<double> z(d);
  auto objective = [&](std::span<const double> logz) {
    for (std::size_t i = 0; i < d; ++i) z[i] = std::pow(10.0, logz[i]);
    try {
      return performance_objective(solver, z, grid, target);
    } catch (const InfiniteLogError&) {
      return kInf;
    } catch (const IllPosedCircuitError&) {
      return kInf;
    }
  };

  SizingResult result;
  result.objective = kInf;
  if (d == 0) {
    result.objective = objective(std::span<const double>());
    result.converged = std::isfinite(result.objective);
    if (!result.converged) throw SizingError("response not solvable");
    return result;
  }

  Rng rng(opts.seed);
  std::vector<double> best_log;
  for (int s = 0; s < opts.starts; ++s) {
    std::vector<double> x0(d);
    for (auto& v : x0) v = rng.uniform(kLogValueMin, kLogValueMax);
    auto local = nelder_mead_box(objective, std::move(x0), kLogValueMin, kLogValueMax, opts.max_evals,
                                 opts.f_tol, opts.x_tol);
    ++result.starts_used;
    result.evaluations += local.evaluations;
    if (local.f < result.objective) {
      result.objective = local.f;
      result.converged = local.converged;
      best_log = std::move(local.x);
    }
  }
  if (!std::isfinite(result.objective)) throw SizingError("no start produced a solvable response");
  result.values.resize(d);
  for (std::size_t i = 0; i < d; ++i) result.values[i] = std::pow(10.0, best_log[i]);
  return result;
}

SizingResult size_circuit(const CircuitGraph& g, const SizingOptions& opts, const FrequencyGrid& grid) {
  for (Label l : g.labels()) {
    if (l == Label::L) throw SizingError("graph '" + g.id() + "' contains an inductor");
  }
  return size_netlist(graph_to_netlist(g), opts, grid);
}

std::vector<SizingResult> size_all(const std::vector<CircuitGraph>& graphs, const SizingOptions& opts,
                                   int jobs, const std::function<void(std::size_t)>& progress) {
  std::vector<SizingResult> results(graphs.size());
  std::atomic<std::size_t> next{0}, done{0};
  const FrequencyGrid grid = FrequencyGrid::standard();
  auto worker = [&] {
    for (std::size_t i = next++; i < graphs.size(); i = next++) {
      try {
        results[i] = size_circuit(graphs[i], opts, grid);
      } catch (const std::exception& e) {
        results[i] = SizingResult{};
        results[i].objective = kInf;
        results[i].error = e.what();
      }
      const std::size_t count = ++done;
      if (progress && jobs <= 1) progress(count);
    }
  };
  const int threads = std::max(1, jobs);
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    if (progress) progress(done.load());
  }
  return results;
}

}  // namespace gdl
