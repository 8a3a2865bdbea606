#pragma once

#include <array>
#include <vector>

#include "bdfem/errors.hpp"
#include "bdfem/geometry.hpp"
#include "bdfem/mesh.hpp"

namespace bdfem {

enum class PairKind { taylor_hood, mini };
enum class FieldComponent { velocity, pressure };

inline int velocity_dofs_per_element(PairKind pair) {
  return pair == PairKind::taylor_hood ? 6 : 4;
}

/// Scalar shape values, physical gradients, and Laplacians on one element at
/// a barycentric point. Layout: vertices 0..2, then edge functions 3..5
/// (Taylor–Hood, edge i opposite vertex i) or the element bubble (mini).
struct ShapeValues {
  int n = 0;
  std::array<double, 6> value{};
  std::array<Vec2, 6> grad{};
  std::array<double, 6> laplacian{};
};

namespace detail {

inline std::array<Vec2, 3> barycentric_gradients(const std::array<Vec2, 3>& c) {
  const double area2 = cross(c[1] - c[0], c[2] - c[0]);
  return {rot90(c[2] - c[1]) / area2, rot90(c[0] - c[2]) / area2,
          rot90(c[1] - c[0]) / area2};
}

}  // namespace detail

inline ShapeValues pressure_shapes(const std::array<Vec2, 3>& c,
                                   const std::array<double, 3>& l) {
  ShapeValues s;
  s.n = 3;
  const auto g = detail::barycentric_gradients(c);
  for (int i = 0; i < 3; ++i) {
    s.value[i] = l[i];
    s.grad[i] = g[i];
  }
  return s;
}

inline ShapeValues velocity_shapes(PairKind pair, const std::array<Vec2, 3>& c,
                                   const std::array<double, 3>& l) {
  ShapeValues s;
  const auto g = detail::barycentric_gradients(c);
  if (pair == PairKind::taylor_hood) {
    s.n = 6;
    for (int i = 0; i < 3; ++i) {
      s.value[i] = l[i] * (2.0 * l[i] - 1.0);
      s.grad[i] = (4.0 * l[i] - 1.0) * g[i];
      s.laplacian[i] = 4.0 * dot(g[i], g[i]);
    }
    for (int i = 0; i < 3; ++i) {
      const int j = (i + 1) % 3, k = (i + 2) % 3;
      s.value[3 + i] = 4.0 * l[j] * l[k];
      s.grad[3 + i] = 4.0 * (l[k] * g[j] + l[j] * g[k]);
      s.laplacian[3 + i] = 8.0 * dot(g[j], g[k]);
    }
  } else {
    s.n = 4;
    for (int i = 0; i < 3; ++i) {
      s.value[i] = l[i];
      s.grad[i] = g[i];
      s.laplacian[i] = 0.0;
    }
    s.value[3] = 27.0 * l[0] * l[1] * l[2];
    s.grad[3] = 27.0 * (l[1] * l[2] * g[0] + l[0] * l[2] * g[1] +
                        l[0] * l[1] * g[2]);
    s.laplacian[3] =
        54.0 * (l[2] * dot(g[0], g[1]) + l[1] * dot(g[0], g[2]) +
                l[0] * dot(g[1], g[2]));
  }
  return s;
}

/// Shape values and gradients at a physical point x in the closed element K.
inline ShapeValues shape_eval(PairKind pair, FieldComponent component,
                              const Mesh& mesh, int K, Vec2 x) {
  const auto c = mesh.corners(K);
  const auto l = barycentric(c[0], c[1], c[2], x);
  return component == FieldComponent::pressure ? pressure_shapes(c, l)
                                               : velocity_shapes(pair, c, l);
}

/// Velocity–pressure dof layout over a mesh. Scalar velocity dofs are
/// numbered vertices first, then edges (Taylor–Hood) or element bubbles
/// (mini); each scalar dof carries two components interleaved as 2*s+c.
/// Pressure dofs are the vertices. Ndof counts both velocity components and
/// the raw pressure space (before the mean constraint).
struct MixedSpace {
  PairKind pair = PairKind::taylor_hood;
  int n_mesh_vertices = 0;
  int n_scalar_velocity = 0;
  int n_velocity = 0;
  int n_pressure = 0;
  int ndof_total = 0;
  std::vector<char> scalar_dirichlet;  // per scalar velocity dof

  static int velocity_dof(int scalar, int comp) { return 2 * scalar + comp; }

  int element_scalar_dofs(const Mesh& mesh, int e,
                          std::array<int, 6>& out) const {
    const auto& t = mesh.elements[e];
    out[0] = t[0];
    out[1] = t[1];
    out[2] = t[2];
    if (pair == PairKind::taylor_hood) {
      for (int i = 0; i < 3; ++i)
        out[3 + i] = n_mesh_vertices + mesh.element_edges[e][i];
      return 6;
    }
    out[3] = n_mesh_vertices + e;
    return 4;
  }
};

inline MixedSpace build_space(const Mesh& mesh, PairKind pair) {
  MixedSpace sp;
  sp.pair = pair;
  sp.n_mesh_vertices = mesh.n_vertices();
  sp.n_scalar_velocity =
      mesh.n_vertices() +
      (pair == PairKind::taylor_hood ? mesh.n_edges() : mesh.n_elements());
  sp.n_velocity = 2 * sp.n_scalar_velocity;
  sp.n_pressure = mesh.n_vertices();
  sp.ndof_total = sp.n_velocity + sp.n_pressure;

  sp.scalar_dirichlet.assign(sp.n_scalar_velocity, 0);
  for (int g = 0; g < mesh.n_edges(); ++g) {
    if (!mesh.boundary_edge_flags[g]) continue;
    sp.scalar_dirichlet[mesh.edges[g][0]] = 1;
    sp.scalar_dirichlet[mesh.edges[g][1]] = 1;
    if (pair == PairKind::taylor_hood)
      sp.scalar_dirichlet[mesh.n_vertices() + g] = 1;
  }
  return sp;
}

/// Physical node of a scalar velocity dof (vertex, edge midpoint, or element
/// barycenter for the mini bubble).
inline Vec2 scalar_dof_point(const Mesh& mesh, const MixedSpace& sp, int s) {
  if (s < mesh.n_vertices()) return mesh.vertices[s];
  const int k = s - mesh.n_vertices();
  if (sp.pair == PairKind::taylor_hood) {
    const auto& e = mesh.edges[k];
    return 0.5 * (mesh.vertices[e[0]] + mesh.vertices[e[1]]);
  }
  return mesh.barycenter(k);
}

// ---------------------------------------------------------------------------
// Element-local evaluation of discrete fields
// ---------------------------------------------------------------------------

/// Gathered velocity coefficients of one element; evaluates value, gradient
/// (grad(k,l) = d_k u_l), divergence, and Laplacian at barycentric points.
struct ElementVelocity {
  PairKind pair;
  std::array<Vec2, 3> c;
  std::array<Vec2, 6> coeff{};  // coeff[i] = (u_x, u_y) at local scalar dof i
  int n = 0;

  template <class Vector>
  ElementVelocity(const Mesh& mesh, const MixedSpace& sp, int e,
                  const Vector& u)
      : pair(sp.pair), c(mesh.corners(e)) {
    std::array<int, 6> dofs{};
    n = sp.element_scalar_dofs(mesh, e, dofs);
    for (int i = 0; i < n; ++i)
      coeff[i] = {u[MixedSpace::velocity_dof(dofs[i], 0)],
                  u[MixedSpace::velocity_dof(dofs[i], 1)]};
  }

  Vec2 value_from(const ShapeValues& s) const {
    Vec2 v{};
    for (int i = 0; i < n; ++i) v += s.value[i] * coeff[i];
    return v;
  }
  Mat2 gradient_from(const ShapeValues& s) const {
    Mat2 Gm;
    for (int i = 0; i < n; ++i) {
      Gm(0, 0) += s.grad[i].x * coeff[i].x;
      Gm(0, 1) += s.grad[i].x * coeff[i].y;
      Gm(1, 0) += s.grad[i].y * coeff[i].x;
      Gm(1, 1) += s.grad[i].y * coeff[i].y;
    }
    return Gm;
  }
  double divergence_from(const ShapeValues& s) const {
    double d = 0;
    for (int i = 0; i < n; ++i)
      d += s.grad[i].x * coeff[i].x + s.grad[i].y * coeff[i].y;
    return d;
  }
  Vec2 laplacian_from(const ShapeValues& s) const {
    Vec2 v{};
    for (int i = 0; i < n; ++i) v += s.laplacian[i] * coeff[i];
    return v;
  }

  Vec2 value(const std::array<double, 3>& l) const {
    return value_from(velocity_shapes(pair, c, l));
  }
  Mat2 gradient(const std::array<double, 3>& l) const {
    return gradient_from(velocity_shapes(pair, c, l));
  }
  double divergence(const std::array<double, 3>& l) const {
    return divergence_from(velocity_shapes(pair, c, l));
  }
  Vec2 laplacian(const std::array<double, 3>& l) const {
    return laplacian_from(velocity_shapes(pair, c, l));
  }
};

/// Gathered P1 pressure on one element; the gradient is constant.
struct ElementPressure {
  std::array<Vec2, 3> c;
  std::array<double, 3> coeff{};

  template <class Vector>
  ElementPressure(const Mesh& mesh, const MixedSpace&, int e, const Vector& p)
      : c(mesh.corners(e)) {
    const auto& t = mesh.elements[e];
    for (int i = 0; i < 3; ++i) coeff[i] = p[t[i]];
  }

  double value(const std::array<double, 3>& l) const {
    return coeff[0] * l[0] + coeff[1] * l[1] + coeff[2] * l[2];
  }
  Vec2 gradient() const {
    const auto g = detail::barycentric_gradients(c);
    return coeff[0] * g[0] + coeff[1] * g[1] + coeff[2] * g[2];
  }
};

}  // namespace bdfem
