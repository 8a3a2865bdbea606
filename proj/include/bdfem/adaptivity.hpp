#pragma once

#include <chrono>
#include <cmath>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "bdfem/config.hpp"
#include "bdfem/errors.hpp"
#include "bdfem/estimator.hpp"
#include "bdfem/mesh.hpp"
#include "bdfem/solver.hpp"

namespace bdfem {

struct TraceRow {
  int iter = 0;
  int elements = 0;
  int vertices = 0;
  int ndof = 0;
  double estimator = 0.0;
  int picard_iterations = 0;
  double seconds = 0.0;
};

struct AdaptiveTrace {
  std::vector<TraceRow> rows;
  bool failed = false;
  std::string failure;
};

struct AdaptResult {
  AdaptiveTrace trace;
  Mesh mesh;         // after the final refinement
  Mesh solved_mesh;  // mesh of the last completed solve
  SolutionPair solution;
  IndicatorField indicators;
};

/// Called after each solve+estimate with the mesh the iteration ran on.
using AdaptObserver = std::function<void(
    int iter, const Mesh&, const SolutionPair&, const IndicatorField&)>;

inline DirichletData dirichlet_for(DirichletPreset preset) {
  return preset == DirichletPreset::t_shape_inflow
             ? DirichletData::t_shape_inflow()
             : DirichletData::zero();
}

/// Adaptive loop: solve, estimate, mark (theta = 1/2 maximum strategy), and
/// bisect, for the configured number of iterations. Picard failure aborts the
/// loop and flags the trace; completed rows are kept.
inline AdaptResult adapt(const ExperimentConfig& cfg,
                         const AdaptObserver& observer = {}) {
  validate(cfg);
  AdaptResult result;
  result.mesh = build_initial_mesh(cfg.domain);

  ProblemData data;
  data.dirac_sources = cfg.sources;
  data.dirichlet = dirichlet_for(cfg.dirichlet);
  data.nonlinear = cfg.nonlinear;

  for (int iter = 0; iter < cfg.iterations; ++iter) {
    const auto t0 = std::chrono::steady_clock::now();
    const MixedSpace sp = build_space(result.mesh, cfg.pair);
    if (cfg.max_ndof > 0 && sp.ndof_total > cfg.max_ndof) break;

    SolutionPair sol;
    PicardReport report;
    try {
      std::tie(sol, report) =
          picard_solve(result.mesh, sp, data, cfg.tol);
    } catch (const PicardDivergenceError& err) {
      result.trace.failed = true;
      result.trace.failure = err.what();
      return result;
    }

    IndicatorField field =
        compute_indicators(result.mesh, sol, cfg.alpha, cfg.sources);
    if (observer) observer(iter, result.mesh, sol, field);

    std::vector<int> marked = mark(field);
    if (marked.empty() && field.global > 0.0) {
      // All indicators tied at exactly half the maximum; refine the argmax.
      int argmax = 0;
      for (std::size_t K = 1; K < field.value.size(); ++K)
        if (field.value[K] > field.value[argmax])
          argmax = static_cast<int>(K);
      marked.push_back(argmax);
    }

    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    result.trace.rows.push_back({iter, result.mesh.n_elements(),
                                 result.mesh.n_vertices(), sp.ndof_total,
                                 field.global, report.iterations, seconds});

    result.solved_mesh = result.mesh;
    result.solution = std::move(sol);
    result.indicators = std::move(field);
    if (!marked.empty()) result.mesh = bisect(result.mesh, marked);
  }
  return result;
}

/// Least-squares slope of log(estimator) against log(Ndof) over the last
/// `tail` rows.
inline double fit_rate(const AdaptiveTrace& trace, int tail) {
  if (tail < 2) throw FitError("fit_rate: tail must cover at least 2 rows");
  if (static_cast<int>(trace.rows.size()) < tail)
    throw FitError("fit_rate: trace shorter than the requested tail");
  const std::size_t begin = trace.rows.size() - static_cast<std::size_t>(tail);
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t r = begin; r < trace.rows.size(); ++r) {
    if (!(trace.rows[r].estimator > 0.0))
      throw FitError("fit_rate: nonpositive estimator in the tail");
    const double x = std::log(static_cast<double>(trace.rows[r].ndof));
    const double y = std::log(trace.rows[r].estimator);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double n = static_cast<double>(tail);
  const double denom = n * sxx - sx * sx;
  if (denom == 0.0) throw FitError("fit_rate: degenerate abscissae");
  return (n * sxy - sx * sy) / denom;
}

inline std::string trace_to_csv(const AdaptiveTrace& trace) {
  std::ostringstream os;
  os << "iter,elements,vertices,ndof,estimator,picard_iters,seconds\n";
  os.precision(17);
  for (const auto& r : trace.rows)
    os << r.iter << ',' << r.elements << ',' << r.vertices << ',' << r.ndof
       << ',' << r.estimator << ',' << r.picard_iterations << ','
       << r.seconds << "\n";
  return os.str();
}

}  // namespace bdfem
