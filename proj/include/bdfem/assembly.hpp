#pragma once

#include <Eigen/Sparse>
#include <functional>
#include <map>
#include <span>
#include <utility>
#include <vector>

#include "bdfem/errors.hpp"
#include "bdfem/geometry.hpp"
#include "bdfem/mesh.hpp"
#include "bdfem/quadrature.hpp"
#include "bdfem/spaces.hpp"

namespace bdfem {

using SparseMat = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;

/// Lowest rule that keeps every polynomial form (stiffness, mass, divergence
/// coupling, Picard convection) exact for the pair.
inline int polynomial_form_degree(PairKind pair) {
  return pair == PairKind::taylor_hood ? 6 : 8;
}

struct BrinkmanBlocks {
  SparseMat A0;       // velocity stiffness, grad:grad
  SparseMat A1;       // velocity mass
  SparseMat B;        // pressure rows: -int q div v
  Eigen::VectorXd m;  // int of each pressure basis function
};

inline BrinkmanBlocks assemble_brinkman(const Mesh& mesh,
                                        const MixedSpace& sp) {
  const QuadratureRule& rule = triangle_rule(polynomial_form_degree(sp.pair));
  std::vector<Triplet> t0, t1, tb;
  Eigen::VectorXd m = Eigen::VectorXd::Zero(sp.n_pressure);

  std::array<int, 6> dofs{};
  for (int e = 0; e < mesh.n_elements(); ++e) {
    const int n = sp.element_scalar_dofs(mesh, e, dofs);
    const auto c = mesh.corners(e);
    const double area = mesh.area(e);
    const auto& tri = mesh.elements[e];

    std::array<std::array<double, 6>, 6> k0{}, k1{};
    std::array<std::array<std::array<double, 2>, 6>, 3> kb{};  // [q][a][c]
    std::array<double, 3> km{};
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
      const auto& l = rule.points[q];
      const double wq = rule.weights[q] * area;
      const auto s = velocity_shapes(sp.pair, c, l);
      for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) {
          k0[a][b] += wq * dot(s.grad[a], s.grad[b]);
          k1[a][b] += wq * s.value[a] * s.value[b];
        }
      for (int p = 0; p < 3; ++p) {
        km[p] += wq * l[p];
        for (int a = 0; a < n; ++a) {
          kb[p][a][0] -= wq * l[p] * s.grad[a].x;
          kb[p][a][1] -= wq * l[p] * s.grad[a].y;
        }
      }
    }

    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b)
        for (int comp = 0; comp < 2; ++comp) {
          const int i = MixedSpace::velocity_dof(dofs[a], comp);
          const int j = MixedSpace::velocity_dof(dofs[b], comp);
          t0.emplace_back(i, j, k0[a][b]);
          t1.emplace_back(i, j, k1[a][b]);
        }
    for (int p = 0; p < 3; ++p) {
      m[tri[p]] += km[p];
      for (int a = 0; a < n; ++a)
        for (int comp = 0; comp < 2; ++comp)
          tb.emplace_back(tri[p], MixedSpace::velocity_dof(dofs[a], comp),
                          kb[p][a][comp]);
    }
  }

  BrinkmanBlocks blocks;
  blocks.A0.resize(sp.n_velocity, sp.n_velocity);
  blocks.A1.resize(sp.n_velocity, sp.n_velocity);
  blocks.B.resize(sp.n_pressure, sp.n_velocity);
  blocks.A0.setFromTriplets(t0.begin(), t0.end());
  blocks.A1.setFromTriplets(t1.begin(), t1.end());
  blocks.B.setFromTriplets(tb.begin(), tb.end());
  blocks.m = std::move(m);
  return blocks;
}

namespace detail {

// N_c[i,j] = -int (u ox phi_j) : grad phi_i, which pairs the blocks as
// -delta_ce int N_b (u . grad N_a) for test dof (a,c) and trial dof (b,e).
// UFactory yields one per-element evaluator (x, l, shapes) -> Vec2.
template <class UFactory>
SparseMat assemble_convection_impl(const Mesh& mesh, const MixedSpace& sp,
                                   UFactory&& u_factory, int degree) {
  const QuadratureRule& rule = triangle_rule(degree);
  std::vector<Triplet> trips;
  std::array<int, 6> dofs{};
  for (int e = 0; e < mesh.n_elements(); ++e) {
    const int n = sp.element_scalar_dofs(mesh, e, dofs);
    const auto c = mesh.corners(e);
    const double area = mesh.area(e);
    const auto u_at = u_factory(e);
    std::array<std::array<double, 6>, 6> loc{};
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
      const auto& l = rule.points[q];
      const double wq = rule.weights[q] * area;
      const auto s = velocity_shapes(sp.pair, c, l);
      const Vec2 u = u_at(quad_point(c, l), l, s);
      for (int a = 0; a < n; ++a) {
        const double conv = dot(u, s.grad[a]);
        for (int b = 0; b < n; ++b) loc[a][b] -= wq * s.value[b] * conv;
      }
    }
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b)
        for (int comp = 0; comp < 2; ++comp)
          trips.emplace_back(MixedSpace::velocity_dof(dofs[a], comp),
                             MixedSpace::velocity_dof(dofs[b], comp),
                             loc[a][b]);
  }
  SparseMat N(sp.n_velocity, sp.n_velocity);
  N.setFromTriplets(trips.begin(), trips.end());
  return N;
}

// N_d[i,j] = int |u| phi_j . phi_i; the Euclidean norm makes the integrand
// non-polynomial, so the degree-19 rule is used.
template <class UFactory>
SparseMat assemble_forchheimer_impl(const Mesh& mesh, const MixedSpace& sp,
                                    UFactory&& u_factory) {
  const QuadratureRule& rule = triangle_rule(19);
  std::vector<Triplet> trips;
  std::array<int, 6> dofs{};
  for (int e = 0; e < mesh.n_elements(); ++e) {
    const int n = sp.element_scalar_dofs(mesh, e, dofs);
    const auto c = mesh.corners(e);
    const double area = mesh.area(e);
    const auto u_at = u_factory(e);
    std::array<std::array<double, 6>, 6> loc{};
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
      const auto& l = rule.points[q];
      const double wq = rule.weights[q] * area;
      const auto s = velocity_shapes(sp.pair, c, l);
      const double mag = norm(u_at(quad_point(c, l), l, s));
      for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
          loc[a][b] += wq * mag * s.value[a] * s.value[b];
    }
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b)
        for (int comp = 0; comp < 2; ++comp)
          trips.emplace_back(MixedSpace::velocity_dof(dofs[a], comp),
                             MixedSpace::velocity_dof(dofs[b], comp),
                             loc[a][b]);
  }
  SparseMat N(sp.n_velocity, sp.n_velocity);
  N.setFromTriplets(trips.begin(), trips.end());
  return N;
}

template <class Vector>
auto discrete_velocity_factory(const Mesh& mesh, const MixedSpace& sp,
                               const Vector& u_prev) {
  return [&mesh, &sp, &u_prev](int e) {
    const ElementVelocity vel(mesh, sp, e, u_prev);
    return [vel](Vec2, const std::array<double, 3>&, const ShapeValues& s) {
      return vel.value_from(s);
    };
  };
}

inline auto analytic_velocity_factory(const std::function<Vec2(Vec2)>& u) {
  return [&u](int) {
    return [&u](Vec2 x, const std::array<double, 3>&, const ShapeValues&) {
      return u(x);
    };
  };
}

}  // namespace detail

inline SparseMat assemble_convection(const Mesh& mesh, const MixedSpace& sp,
                                     const Eigen::VectorXd& u_prev) {
  if (u_prev.size() != sp.n_velocity)
    throw ArgumentError("assemble_convection: velocity size mismatch");
  return detail::assemble_convection_impl(
      mesh, sp, detail::discrete_velocity_factory(mesh, sp, u_prev),
      polynomial_form_degree(sp.pair));
}

inline SparseMat assemble_convection(const Mesh& mesh, const MixedSpace& sp,
                                     const std::function<Vec2(Vec2)>& u_prev) {
  return detail::assemble_convection_impl(
      mesh, sp, detail::analytic_velocity_factory(u_prev), 19);
}

inline SparseMat assemble_forchheimer(const Mesh& mesh, const MixedSpace& sp,
                                      const Eigen::VectorXd& u_prev) {
  if (u_prev.size() != sp.n_velocity)
    throw ArgumentError("assemble_forchheimer: velocity size mismatch");
  return detail::assemble_forchheimer_impl(
      mesh, sp, detail::discrete_velocity_factory(mesh, sp, u_prev));
}

inline SparseMat assemble_forchheimer(const Mesh& mesh, const MixedSpace& sp,
                                      const std::function<Vec2(Vec2)>& u_prev) {
  return detail::assemble_forchheimer_impl(
      mesh, sp, detail::analytic_velocity_factory(u_prev));
}

/// Point loads rhs[i] += F . phi_i(z). The continuous velocity basis makes
/// the value independent of which closed element containing z is used.
inline Eigen::VectorXd assemble_dirac_load(
    const MixedSpace& sp, const Mesh& mesh,
    std::span<const std::pair<Vec2, Vec2>> sources) {
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(sp.n_velocity);
  std::array<int, 6> dofs{};
  for (const auto& [z, F] : sources) {
    const auto hits = locate_point(mesh, z);
    if (hits.empty())
      throw SourcePlacementError("Dirac source lies outside the domain");
    for (int g = 0; g < mesh.n_edges(); ++g)
      if (mesh.boundary_edge_flags[g] &&
          point_segment_distance(mesh.vertices[mesh.edges[g][0]],
                                 mesh.vertices[mesh.edges[g][1]], z) < 1e-12)
        throw SourcePlacementError("Dirac source lies on the boundary");
    const int e = hits.front();
    const int n = sp.element_scalar_dofs(mesh, e, dofs);
    const auto c = mesh.corners(e);
    const auto s = velocity_shapes(sp.pair, c, barycentric(c[0], c[1], c[2], z));
    for (int a = 0; a < n; ++a) {
      rhs[MixedSpace::velocity_dof(dofs[a], 0)] += F.x * s.value[a];
      rhs[MixedSpace::velocity_dof(dofs[a], 1)] += F.y * s.value[a];
    }
  }
  return rhs;
}

inline Eigen::VectorXd assemble_dirac_load(
    const MixedSpace& sp, const Mesh& mesh,
    const std::vector<std::pair<Vec2, Vec2>>& sources) {
  return assemble_dirac_load(
      sp, mesh, std::span<const std::pair<Vec2, Vec2>>(sources));
}

inline Eigen::VectorXd assemble_smooth_load(
    const MixedSpace& sp, const Mesh& mesh,
    const std::function<Vec2(Vec2)>& f) {
  const QuadratureRule& rule = triangle_rule(19);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(sp.n_velocity);
  std::array<int, 6> dofs{};
  for (int e = 0; e < mesh.n_elements(); ++e) {
    const int n = sp.element_scalar_dofs(mesh, e, dofs);
    const auto c = mesh.corners(e);
    const double area = mesh.area(e);
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
      const auto& l = rule.points[q];
      const double wq = rule.weights[q] * area;
      const auto s = velocity_shapes(sp.pair, c, l);
      const Vec2 fx = f(quad_point(c, l));
      for (int a = 0; a < n; ++a) {
        rhs[MixedSpace::velocity_dof(dofs[a], 0)] += wq * fx.x * s.value[a];
        rhs[MixedSpace::velocity_dof(dofs[a], 1)] += wq * fx.y * s.value[a];
      }
    }
  }
  return rhs;
}

// ---------------------------------------------------------------------------
// Dirichlet data and the augmented saddle system
// ---------------------------------------------------------------------------

/// Velocity boundary data selected per boundary-segment tag, with a default
/// for untagged segments.
struct DirichletData {
  std::function<Vec2(Vec2)> value = [](Vec2) { return Vec2{}; };
  std::map<int, std::function<Vec2(Vec2)>> per_tag;

  Vec2 eval(int tag, Vec2 x) const {
    const auto it = per_tag.find(tag);
    return it != per_tag.end() ? it->second(x) : value(x);
  }

  static DirichletData zero() { return {}; }
  static DirichletData from_function(std::function<Vec2(Vec2)> g) {
    DirichletData d;
    d.value = std::move(g);
    return d;
  }
  /// Parabolic horizontal inflow (y(1-y), 0) on the two lateral segments of
  /// the T-shaped domain, homogeneous elsewhere.
  static DirichletData t_shape_inflow() {
    DirichletData d;
    const auto inflow = [](Vec2 x) { return Vec2{x.y * (1.0 - x.y), 0.0}; };
    d.per_tag[5] = inflow;  // x = +1.5
    d.per_tag[7] = inflow;  // x = -1.5
    return d;
  }
};

struct SaddleSystem {
  int n_velocity = 0, n_pressure = 0;
  SparseMat A;  // combined velocity block (a0 + a1 + linearized terms)
  SparseMat B;
  Eigen::VectorXd m;
  Eigen::VectorXd rhs_u, rhs_p;
  std::vector<char> dirichlet;       // per velocity dof; empty = none applied
  Eigen::VectorXd boundary_values;   // lifted values at Dirichlet dofs
};

inline SaddleSystem make_system(const Mesh&, const MixedSpace& sp, SparseMat A,
                                SparseMat B, Eigen::VectorXd m,
                                Eigen::VectorXd rhs_u) {
  SaddleSystem sys;
  sys.n_velocity = sp.n_velocity;
  sys.n_pressure = sp.n_pressure;
  sys.A = std::move(A);
  sys.B = std::move(B);
  sys.m = std::move(m);
  sys.rhs_u = std::move(rhs_u);
  sys.rhs_p = Eigen::VectorXd::Zero(sys.n_pressure);
  return sys;
}

/// Interpolates g at boundary velocity nodes (vertices and, for Taylor–Hood,
/// edge midpoints) and flags the Dirichlet dofs. Boundary segments meeting at
/// a vertex must agree there to 1e-12.
inline SaddleSystem apply_dirichlet(SaddleSystem sys, const Mesh& mesh,
                                    const MixedSpace& sp,
                                    const DirichletData& g) {
  sys.dirichlet.assign(sp.n_velocity, 0);
  sys.boundary_values = Eigen::VectorXd::Zero(sp.n_velocity);

  std::vector<std::vector<int>> vertex_tags(mesh.n_vertices());
  for (int ge = 0; ge < mesh.n_edges(); ++ge) {
    if (!mesh.boundary_edge_flags[ge]) continue;
    vertex_tags[mesh.edges[ge][0]].push_back(mesh.boundary_segment_tags[ge]);
    vertex_tags[mesh.edges[ge][1]].push_back(mesh.boundary_segment_tags[ge]);
  }

  for (int v = 0; v < mesh.n_vertices(); ++v) {
    if (vertex_tags[v].empty()) continue;
    const Vec2 x = mesh.vertices[v];
    Vec2 val = g.eval(vertex_tags[v][0], x);
    for (const int tag : vertex_tags[v]) {
      const Vec2 other = g.eval(tag, x);
      if (norm(other - val) > 1e-12)
        throw IncompatibleDataError(
            "Dirichlet data disagrees at a boundary corner");
    }
    for (int comp = 0; comp < 2; ++comp) {
      const int i = MixedSpace::velocity_dof(v, comp);
      sys.dirichlet[i] = 1;
      sys.boundary_values[i] = comp == 0 ? val.x : val.y;
    }
  }
  if (sp.pair == PairKind::taylor_hood) {
    for (int ge = 0; ge < mesh.n_edges(); ++ge) {
      if (!mesh.boundary_edge_flags[ge]) continue;
      const Vec2 mid = 0.5 * (mesh.vertices[mesh.edges[ge][0]] +
                              mesh.vertices[mesh.edges[ge][1]]);
      const Vec2 val = g.eval(mesh.boundary_segment_tags[ge], mid);
      for (int comp = 0; comp < 2; ++comp) {
        const int i =
            MixedSpace::velocity_dof(mesh.n_vertices() + ge, comp);
        sys.dirichlet[i] = 1;
        sys.boundary_values[i] = comp == 0 ? val.x : val.y;
      }
    }
  }
  return sys;
}

struct AugmentedSystem {
  SparseMat M;
  Eigen::VectorXd rhs;
  int n_velocity = 0, n_pressure = 0;
};

/// Assembles [A B^T 0; B 0 m; 0 m^T 0] with the pressure mean enforced by a
/// single scalar multiplier. Dirichlet dofs (if flagged) are eliminated
/// symmetrically: their rows become identity and their lifted values move to
/// the right-hand side.
inline AugmentedSystem build_saddle(const SaddleSystem& sys) {
  const int nv = sys.n_velocity, np = sys.n_pressure;
  const int n = nv + np + 1;
  const bool has_dirichlet = !sys.dirichlet.empty();
  auto is_dir = [&](int i) { return has_dirichlet && sys.dirichlet[i]; };

  Eigen::VectorXd rhs(n);
  rhs.head(nv) = sys.rhs_u;
  rhs.segment(nv, np) = sys.rhs_p;
  rhs[n - 1] = 0.0;

  std::vector<Triplet> trips;
  trips.reserve(static_cast<std::size_t>(sys.A.nonZeros()) +
                2 * static_cast<std::size_t>(sys.B.nonZeros()) + 2 * np + nv);

  for (int k = 0; k < sys.A.outerSize(); ++k)
    for (SparseMat::InnerIterator it(sys.A, k); it; ++it) {
      const int i = static_cast<int>(it.row());
      const int j = static_cast<int>(it.col());
      if (is_dir(i)) continue;
      if (is_dir(j))
        rhs[i] -= it.value() * sys.boundary_values[j];
      else
        trips.emplace_back(i, j, it.value());
    }
  if (has_dirichlet)
    for (int i = 0; i < nv; ++i)
      if (sys.dirichlet[i]) {
        trips.emplace_back(i, i, 1.0);
        rhs[i] = sys.boundary_values[i];
      }

  for (int k = 0; k < sys.B.outerSize(); ++k)
    for (SparseMat::InnerIterator it(sys.B, k); it; ++it) {
      const int q = static_cast<int>(it.row());
      const int j = static_cast<int>(it.col());
      if (is_dir(j)) {
        rhs[nv + q] -= it.value() * sys.boundary_values[j];
      } else {
        trips.emplace_back(nv + q, j, it.value());
        trips.emplace_back(j, nv + q, it.value());
      }
    }

  for (int q = 0; q < np; ++q) {
    trips.emplace_back(nv + q, n - 1, sys.m[q]);
    trips.emplace_back(n - 1, nv + q, sys.m[q]);
  }

  AugmentedSystem aug;
  aug.n_velocity = nv;
  aug.n_pressure = np;
  aug.M.resize(n, n);
  aug.M.setFromTriplets(trips.begin(), trips.end());
  aug.rhs = std::move(rhs);
  return aug;
}

}  // namespace bdfem
