#pragma once

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "bdfem/adaptivity.hpp"
#include "bdfem/config.hpp"
#include "bdfem/errors.hpp"
#include "bdfem/estimator.hpp"
#include "bdfem/mesh.hpp"
#include "bdfem/solver.hpp"
#include "bdfem/vtk.hpp"
#include "bdfem/weights.hpp"

namespace bdfem {

/// Criss-cross unit-square mesh with n x n cells (uniform verification runs).
inline Mesh unit_square_mesh(int cells) {
  if (cells < 1) throw ArgumentError("unit_square_mesh: cells must be >= 1");
  std::vector<Vec2> origins;
  const double h = 1.0 / cells;
  for (int i = 0; i < cells; ++i)
    for (int j = 0; j < cells; ++j) origins.push_back({h * i, h * j});
  const auto poly = domain_polygon(DomainSpec::unit_square());
  return detail::criss_cross(origins, h, poly);
}

/// Interpolates an analytic velocity at the scalar dof nodes (vertices, edge
/// midpoints for Taylor–Hood); mini bubble coefficients stay zero.
inline Eigen::VectorXd interpolate_velocity(
    const Mesh& mesh, const MixedSpace& sp,
    const std::function<Vec2(Vec2)>& u) {
  Eigen::VectorXd coeffs = Eigen::VectorXd::Zero(sp.n_velocity);
  const int n_nodal = sp.pair == PairKind::taylor_hood ? sp.n_scalar_velocity
                                                       : mesh.n_vertices();
  for (int s = 0; s < n_nodal; ++s) {
    const Vec2 val = u(scalar_dof_point(mesh, sp, s));
    coeffs[MixedSpace::velocity_dof(s, 0)] = val.x;
    coeffs[MixedSpace::velocity_dof(s, 1)] = val.y;
  }
  return coeffs;
}

// ---------------------------------------------------------------------------
// Manufactured solution on the unit square
// ---------------------------------------------------------------------------

/// u* = curl(x^2(1-x)^2 y^2(1-y)^2), p* = x - 1/2, and the matching forcing
/// f = -Lap u* + (u*.grad)u* + |u*|u* + u* + grad p*. The stream function
/// makes u* solenoidal with zero trace.
struct ManufacturedSolution {
  static double X(double t) { return t * t * (1 - t) * (1 - t); }
  static double dX(double t) { return 2 * t - 6 * t * t + 4 * t * t * t; }
  static double ddX(double t) { return 2 - 12 * t + 12 * t * t; }
  static double dddX(double t) { return -12 + 24 * t; }

  static Vec2 velocity(Vec2 p) {
    return {X(p.x) * dX(p.y), -dX(p.x) * X(p.y)};
  }
  static Mat2 velocity_gradient(Vec2 p) {  // grad(k,l) = d_k u_l
    Mat2 g;
    g(0, 0) = dX(p.x) * dX(p.y);
    g(0, 1) = -ddX(p.x) * X(p.y);
    g(1, 0) = X(p.x) * ddX(p.y);
    g(1, 1) = -dX(p.x) * dX(p.y);
    return g;
  }
  static double pressure(Vec2 p) { return p.x - 0.5; }

  static Vec2 forcing(Vec2 p) {
    const Vec2 u = velocity(p);
    const Mat2 g = velocity_gradient(p);
    const Vec2 lap{ddX(p.x) * dX(p.y) + X(p.x) * dddX(p.y),
                   -dddX(p.x) * X(p.y) - dX(p.x) * ddX(p.y)};
    const Vec2 conv{u.x * g(0, 0) + u.y * g(1, 0),
                    u.x * g(0, 1) + u.y * g(1, 1)};
    const double mag = norm(u);
    return {-lap.x + conv.x + mag * u.x + u.x + 1.0,
            -lap.y + conv.y + mag * u.y + u.y + 0.0};
  }
};

struct VerifyRow {
  double h = 0.0;
  int ndof = 0;
  double err_h1_velocity = 0.0;
  double err_l2_pressure = 0.0;
  double order_velocity = 0.0;  // 0 on the first row
  double order_pressure = 0.0;
};

/// Solves the full nonlinear model with the manufactured forcing on uniformly
/// refined criss-cross meshes and reports unweighted errors and observed
/// orders.
inline std::vector<VerifyRow> verify_manufactured(PairKind pair,
                                                  int refinements) {
  if (refinements < 3)
    throw ArgumentError("verify_manufactured: needs at least 3 refinements");
  const QuadratureRule& rule = triangle_rule(19);
  std::vector<VerifyRow> rows;
  for (int k = 0; k < refinements; ++k) {
    const int cells = 2 << k;  // 2, 4, 8, ...
    const Mesh mesh = unit_square_mesh(cells);
    const MixedSpace sp = build_space(mesh, pair);

    ProblemData data;
    data.smooth_forcing = ManufacturedSolution::forcing;
    data.nonlinear = true;
    const auto [sol, report] = picard_solve(mesh, sp, data);

    double grad2 = 0.0, pres2 = 0.0;
    for (int e = 0; e < mesh.n_elements(); ++e) {
      const ElementVelocity vel(mesh, sp, e, sol.u);
      const ElementPressure pre(mesh, sp, e, sol.p);
      const auto c = mesh.corners(e);
      const double area = mesh.area(e);
      for (std::size_t q = 0; q < rule.points.size(); ++q) {
        const auto& l = rule.points[q];
        const Vec2 x = quad_point(c, l);
        const Mat2 dg =
            vel.gradient(l) - ManufacturedSolution::velocity_gradient(x);
        const double dp = pre.value(l) - ManufacturedSolution::pressure(x);
        grad2 += rule.weights[q] * area * dg.frobenius2();
        pres2 += rule.weights[q] * area * dp * dp;
      }
    }

    VerifyRow row;
    row.h = 1.0 / cells;
    row.ndof = sp.ndof_total;
    row.err_h1_velocity = std::sqrt(grad2);
    row.err_l2_pressure = std::sqrt(pres2);
    if (!rows.empty()) {
      row.order_velocity =
          std::log2(rows.back().err_h1_velocity / row.err_h1_velocity);
      row.order_pressure =
          std::log2(rows.back().err_l2_pressure / row.err_l2_pressure);
    }
    rows.push_back(row);
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Weighted energy distance between solutions on different meshes
// ---------------------------------------------------------------------------

/// ||grad(u_a - u_b)||_{L2(w)} + ||p_a - p_b||_{L2(w)}, integrated over
/// mesh_a; the second solution is evaluated through point location.
inline double weighted_energy_distance(const Mesh& mesh_a,
                                       const SolutionPair& sol_a,
                                       const Mesh& mesh_b,
                                       const SolutionPair& sol_b,
                                       const WeightSpec& w) {
  const PointLocator locator(mesh_b);
  auto grad_diff = [&](int e, Vec2 x, const std::array<double, 3>& l) {
    const ElementVelocity va(mesh_a, sol_a.space, e, sol_a.u);
    const int eb = locator.find(x);
    if (eb < 0) throw GeometryError("energy distance: point outside mesh");
    const auto cb = mesh_b.corners(eb);
    const ElementVelocity vb(mesh_b, sol_b.space, eb, sol_b.u);
    return va.gradient(l) - vb.gradient(barycentric(cb[0], cb[1], cb[2], x));
  };
  auto pres_diff = [&](int e, Vec2 x, const std::array<double, 3>& l) {
    const ElementPressure pa(mesh_a, sol_a.space, e, sol_a.p);
    const int eb = locator.find(x);
    if (eb < 0) throw GeometryError("energy distance: point outside mesh");
    const auto cb = mesh_b.corners(eb);
    const ElementPressure pb(mesh_b, sol_b.space, eb, sol_b.p);
    return pa.value(l) - pb.value(barycentric(cb[0], cb[1], cb[2], x));
  };
  return weighted_h1_seminorm(mesh_a, w, grad_diff) +
         weighted_l2_norm(mesh_a, w, pres_diff);
}

// ---------------------------------------------------------------------------
// Experiment driver
// ---------------------------------------------------------------------------

struct RunOutcome {
  AdaptResult result;
  double rate = 0.0;
  bool solver_failed = false;
};

/// Runs one adaptive experiment and writes trace.csv, rate.txt, the final
/// refined mesh, and the last solved solution as VTK into cfg.out_dir.
inline RunOutcome run(const ExperimentConfig& cfg,
                      const AdaptObserver& observer = {}) {
  validate(cfg);
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(cfg.out_dir, ec);
  if (ec) throw IoError("cannot create output directory " + cfg.out_dir);

  RunOutcome outcome;
  outcome.result = adapt(cfg, observer);
  outcome.solver_failed = outcome.result.trace.failed;

  {
    std::ofstream os(fs::path(cfg.out_dir) / "trace.csv");
    if (!os) throw IoError("cannot write trace.csv");
    os << trace_to_csv(outcome.result.trace);
  }
  {
    std::ofstream os(fs::path(cfg.out_dir) / "config.txt");
    os << serialize(cfg);
  }

  const int rows = static_cast<int>(outcome.result.trace.rows.size());
  const int tail = std::min(10, rows);
  if (!outcome.solver_failed && tail >= 2) {
    outcome.rate = fit_rate(outcome.result.trace, tail);
    std::ofstream os(fs::path(cfg.out_dir) / "rate.txt");
    os.precision(17);
    os << outcome.rate << "\n";
  }

  if (rows > 0) {
    export_vtk(outcome.result.solved_mesh, outcome.result.solution,
               outcome.result.indicators,
               (fs::path(cfg.out_dir) / "solution.vtk").string());
    export_vtk(outcome.result.mesh, nullptr, nullptr,
               (fs::path(cfg.out_dir) / "final_mesh.vtk").string());
  }

  std::cout << cfg.preset << " alpha=" << cfg.alpha << " pair="
            << (cfg.pair == PairKind::taylor_hood ? "th" : "mini")
            << " iterations=" << rows << "/" << cfg.iterations
            << " elements=" << outcome.result.mesh.n_elements()
            << " estimator="
            << (rows ? outcome.result.trace.rows.back().estimator : 0.0)
            << " rate=" << outcome.rate
            << (outcome.solver_failed ? " [solver failure]" : "") << "\n";
  return outcome;
}

}  // namespace bdfem
