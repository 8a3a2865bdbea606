#pragma once

#include <cmath>
#include <span>
#include <utility>
#include <vector>

#include "bdfem/errors.hpp"
#include "bdfem/geometry.hpp"
#include "bdfem/mesh.hpp"
#include "bdfem/quadrature.hpp"
#include "bdfem/solver.hpp"
#include "bdfem/weights.hpp"

namespace bdfem {

/// Per-element indicator values with their squared components and the global
/// root-sum-of-squares value.
struct IndicatorField {
  std::vector<double> value;        // E_alpha(K) or D_alpha(K)
  std::vector<double> residual2;    // h_K^2 D^alpha ||R_K||^2
  std::vector<double> divergence2;  // weighted ||div u||^2
  std::vector<double> jump2;        // h_K D^alpha ||J||^2 over dK \ dOmega
  std::vector<double> dirac2;       // sum over contained sources of h^a |F|^2
  double global = 0.0;
};

/// L2 norm over K of the strong residual
/// R_K = Lap u - u - (u.grad)u - u div u - |u|u - grad p.
inline double element_residual_norm(const Mesh& mesh, int K,
                                    const SolutionPair& sol) {
  const QuadratureRule& rule = triangle_rule(19);
  const ElementVelocity vel(mesh, sol.space, K, sol.u);
  const ElementPressure pres(mesh, sol.space, K, sol.p);
  const Vec2 grad_p = pres.gradient();
  const double area = mesh.area(K);

  double acc = 0.0;
  for (std::size_t q = 0; q < rule.points.size(); ++q) {
    const auto& l = rule.points[q];
    const auto s = velocity_shapes(sol.space.pair, vel.c, l);
    const Vec2 u = vel.value_from(s);
    const Mat2 g = vel.gradient_from(s);
    const double div = g(0, 0) + g(1, 1);
    const Vec2 lap = vel.laplacian_from(s);
    const Vec2 conv{u.x * g(0, 0) + u.y * g(1, 0),
                    u.x * g(0, 1) + u.y * g(1, 1)};  // (u.grad)u
    const Vec2 r = lap - u - conv - div * u - norm(u) * u - grad_p;
    acc += rule.weights[q] * dot(r, r);
  }
  return std::sqrt(area * acc);
}

/// One-sided normal traction ((grad u - p I) . nu)_l = nu_k d_k u_l - p nu_l.
inline Vec2 normal_traction(const Mat2& grad, double pressure, Vec2 nu) {
  return {nu.x * grad(0, 0) + nu.y * grad(1, 0) - pressure * nu.x,
          nu.x * grad(0, 1) + nu.y * grad(1, 1) - pressure * nu.y};
}

/// L2 norm over an interior edge of the jump of (grad u - p I) . normal.
inline double edge_jump_norm(const Mesh& mesh, int edge,
                             const SolutionPair& sol) {
  if (mesh.boundary_edge_flags[edge])
    throw ArgumentError("edge_jump_norm: boundary edge has no jump");
  const GaussRule1D& rule = edge_rule(6);  // exact to degree 11
  const int e0 = mesh.edge_elements[edge][0];
  const int e1 = mesh.edge_elements[edge][1];
  const Vec2 a = mesh.vertices[mesh.edges[edge][0]];
  const Vec2 b = mesh.vertices[mesh.edges[edge][1]];
  const double len = dist(a, b);
  const Vec2 nrm = rot90(b - a) / len;  // fixed orientation; sign cancels

  const ElementVelocity v0(mesh, sol.space, e0, sol.u);
  const ElementVelocity v1(mesh, sol.space, e1, sol.u);
  const ElementPressure p0(mesh, sol.space, e0, sol.p);
  const ElementPressure p1(mesh, sol.space, e1, sol.p);
  const auto c0 = mesh.corners(e0);
  const auto c1 = mesh.corners(e1);

  double acc = 0.0;
  for (std::size_t q = 0; q < rule.points.size(); ++q) {
    const Vec2 x = a + rule.points[q] * (b - a);
    const auto l0 = barycentric(c0[0], c0[1], c0[2], x);
    const auto l1 = barycentric(c1[0], c1[1], c1[2], x);
    // one-sided traces with opposite outward normals
    const Vec2 jump =
        normal_traction(v0.gradient(l0), p0.value(l0), nrm) -
        normal_traction(v1.gradient(l1), p1.value(l1), nrm);
    acc += rule.weights[q] * dot(jump, jump);
  }
  return std::sqrt(len * acc);
}

namespace detail {

struct IndicatorTerms {
  double residual2 = 0, divergence2 = 0, jump2 = 0, dirac2 = 0;
  double total2() const { return residual2 + divergence2 + jump2 + dirac2; }
};

// Shared core: the single-source indicator uses dist_alpha = D_K^alpha and
// the power weight; the multi-source one uses D_{K,Z}^alpha and rho.
inline IndicatorTerms indicator_terms(
    const Mesh& mesh, int K, const SolutionPair& sol, double alpha,
    double dist_alpha, const WeightSpec& div_weight,
    std::span<const std::pair<Vec2, Vec2>> sources,
    const std::vector<double>* edge_jump_cache) {
  IndicatorTerms t;
  const double h = mesh.diameter(K);

  const double res = element_residual_norm(mesh, K, sol);
  t.residual2 = h * h * dist_alpha * res * res;

  const ElementVelocity vel(mesh, sol.space, K, sol.u);
  auto div_at = [&](int, Vec2, const std::array<double, 3>& l) {
    return vel.divergence(l);
  };
  const QuadratureRule& rule = triangle_rule(kWeightedQuadratureDegree);
  const int levels =
      needs_subdivision(div_weight, mesh.corners(K)) ? kSourceSubdivisionLevels
                                                     : 0;
  t.divergence2 =
      weighted_element_integral(mesh, K, div_weight, rule, div_at, levels);

  double jumps = 0.0;
  for (int i = 0; i < 3; ++i) {
    const int g = mesh.element_edges[K][i];
    if (mesh.boundary_edge_flags[g]) continue;
    const double jn =
        edge_jump_cache ? (*edge_jump_cache)[g] : edge_jump_norm(mesh, g, sol);
    jumps += jn * jn;
  }
  t.jump2 = h * dist_alpha * jumps;

  const auto c = mesh.corners(K);
  for (const auto& [z, F] : sources)
    if (element_touches(c, z)) t.dirac2 += std::pow(h, alpha) * dot(F, F);
  return t;
}

}  // namespace detail

/// E_alpha(K) for the single-source estimator, with the component breakdown
/// optionally reported.
inline double local_indicator(const Mesh& mesh, int K, const SolutionPair& sol,
                              const WeightSpec& w,
                              std::span<const std::pair<Vec2, Vec2>> sources,
                              detail::IndicatorTerms* breakdown = nullptr) {
  if (w.kind != WeightSpec::Kind::power || w.sources.size() != 1)
    throw ArgumentError("local_indicator expects a single-source power weight");
  const double dist_alpha =
      std::pow(local_distance(mesh, K, w.sources[0]), w.alpha);
  const auto t = detail::indicator_terms(mesh, K, sol, w.alpha, dist_alpha, w,
                                         sources, nullptr);
  if (breakdown) *breakdown = t;
  return std::sqrt(t.total2());
}

/// D_alpha(K): the multi-source indicator with D_{K,Z} and the composite
/// weight rho in the divergence term.
inline double multi_source_indicator(
    const Mesh& mesh, int K, const SolutionPair& sol, double alpha,
    std::span<const std::pair<Vec2, Vec2>> sources, const WeightSpec& rho,
    detail::IndicatorTerms* breakdown = nullptr) {
  if (sources.empty())
    throw ArgumentError("multi_source_indicator: empty source set");
  std::vector<Vec2> Z;
  Z.reserve(sources.size());
  for (const auto& s : sources) Z.push_back(s.first);
  const double dist_alpha =
      std::pow(multi_source_distance(mesh, K, Z), alpha);
  const auto t = detail::indicator_terms(mesh, K, sol, alpha, dist_alpha, rho,
                                         sources, nullptr);
  if (breakdown) *breakdown = t;
  return std::sqrt(t.total2());
}

/// Indicator field over the whole mesh; interior-edge jump norms are computed
/// once and shared by both incident elements.
inline IndicatorField compute_indicators(
    const Mesh& mesh, const SolutionPair& sol, double alpha,
    std::span<const std::pair<Vec2, Vec2>> sources) {
  const bool multi = sources.size() > 1;

  std::vector<Vec2> Z;
  for (const auto& s : sources) Z.push_back(s.first);
  // A source-free configuration degenerates to the unweighted residual
  // estimator (only exercised by zero-data runs).
  const WeightSpec div_weight =
      sources.empty() ? WeightSpec::unweighted()
      : multi         ? make_composite_weight(alpha, Z, mesh)
                      : WeightSpec::power(alpha, +1, Z[0]);

  std::vector<double> jump_cache(mesh.n_edges(), 0.0);
  for (int g = 0; g < mesh.n_edges(); ++g)
    if (!mesh.boundary_edge_flags[g])
      jump_cache[g] = edge_jump_norm(mesh, g, sol);

  IndicatorField field;
  const int ne = mesh.n_elements();
  field.value.resize(ne);
  field.residual2.resize(ne);
  field.divergence2.resize(ne);
  field.jump2.resize(ne);
  field.dirac2.resize(ne);
  double total2 = 0.0;
  for (int K = 0; K < ne; ++K) {
    const double dist_alpha =
        Z.empty() ? 1.0
        : multi   ? std::pow(multi_source_distance(mesh, K, Z), alpha)
                  : std::pow(local_distance(mesh, K, Z[0]), alpha);
    const auto t = detail::indicator_terms(mesh, K, sol, alpha, dist_alpha,
                                           div_weight, sources, &jump_cache);
    field.residual2[K] = t.residual2;
    field.divergence2[K] = t.divergence2;
    field.jump2[K] = t.jump2;
    field.dirac2[K] = t.dirac2;
    field.value[K] = std::sqrt(t.total2());
    total2 += t.total2();
  }
  field.global = std::sqrt(total2);
  return field;
}

inline double global_estimator(const IndicatorField& field) {
  double total2 = 0.0;
  for (const double v : field.value) total2 += v * v;
  return std::sqrt(total2);
}

/// Maximum marking strategy: mark K when E(K) strictly exceeds half of the
/// largest indicator.
inline std::vector<int> mark(const IndicatorField& field) {
  double max_val = 0.0;
  for (const double v : field.value) max_val = std::max(max_val, v);
  std::vector<int> marked;
  for (std::size_t K = 0; K < field.value.size(); ++K)
    if (field.value[K] > 0.5 * max_val) marked.push_back(static_cast<int>(K));
  return marked;
}

}  // namespace bdfem
