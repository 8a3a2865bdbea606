#pragma once

#include <cmath>
#include <functional>
#include <type_traits>
#include <vector>

#include "bdfem/errors.hpp"
#include "bdfem/geometry.hpp"
#include "bdfem/mesh.hpp"
#include "bdfem/quadrature.hpp"

namespace bdfem {

/// Power weight |x-z|^(sign*alpha) or the composite multi-source weight that
/// equals d_z^alpha inside the ball B(z, separation/2) around each source and
/// 1 elsewhere.
struct WeightSpec {
  enum class Kind { unweighted, power, composite };
  Kind kind = Kind::unweighted;
  double alpha = 0.0;
  int sign = +1;
  std::vector<Vec2> sources;
  double separation = 0.0;  // d_Z, composite only

  static WeightSpec unweighted() { return {}; }

  static WeightSpec power(double alpha, int sign, Vec2 z) {
    if (!(alpha > -2.0 && alpha < 2.0))
      throw ArgumentError("power weight exponent outside (-2,2)");
    if (sign != 1 && sign != -1)
      throw ArgumentError("power weight sign must be +1 or -1");
    WeightSpec w;
    w.kind = Kind::power;
    w.alpha = alpha;
    w.sign = sign;
    w.sources = {z};
    return w;
  }

  static WeightSpec composite(double alpha, std::vector<Vec2> Z,
                              double separation) {
    if (Z.empty()) throw ArgumentError("composite weight needs sources");
    if (!(separation > 0.0))
      throw ArgumentError("composite weight needs positive separation");
    if (!(alpha > -2.0 && alpha < 2.0))
      throw ArgumentError("composite weight exponent outside (-2,2)");
    WeightSpec w;
    w.kind = Kind::composite;
    w.alpha = alpha;
    w.sources = std::move(Z);
    w.separation = separation;
    return w;
  }
};

/// d_Z = min(dist(Z, boundary), min pairwise source distance), with the
/// boundary taken from the mesh's boundary edges.
inline double source_separation(std::span<const Vec2> Z, const Mesh& mesh) {
  if (Z.empty()) throw ArgumentError("source_separation: empty source set");
  double d = std::numeric_limits<double>::infinity();
  for (const Vec2 z : Z)
    for (int g = 0; g < mesh.n_edges(); ++g) {
      if (!mesh.boundary_edge_flags[g]) continue;
      d = std::min(d, point_segment_distance(mesh.vertices[mesh.edges[g][0]],
                                             mesh.vertices[mesh.edges[g][1]],
                                             z));
    }
  for (std::size_t i = 0; i < Z.size(); ++i)
    for (std::size_t j = i + 1; j < Z.size(); ++j)
      d = std::min(d, dist(Z[i], Z[j]));
  if (!(d > 0.0))
    throw ArgumentError("sources touch the boundary or each other");
  return d;
}

inline WeightSpec make_composite_weight(double alpha, std::vector<Vec2> Z,
                                        const Mesh& mesh) {
  const double d = source_separation(Z, mesh);
  return WeightSpec::composite(alpha, std::move(Z), d);
}

inline double weight_value(const WeightSpec& w, Vec2 x) {
  switch (w.kind) {
    case WeightSpec::Kind::unweighted:
      return 1.0;
    case WeightSpec::Kind::power: {
      const double r = dist(x, w.sources[0]);
      const double expo = w.sign * w.alpha;
      if (r == 0.0) {
        if (expo < 0.0)
          throw SingularEvaluationError(
              "negative-exponent weight evaluated at its source point");
        return expo == 0.0 ? 1.0 : 0.0;
      }
      return std::pow(r, expo);
    }
    case WeightSpec::Kind::composite: {
      for (const Vec2 z : w.sources) {
        const double r = dist(x, z);
        if (r < 0.5 * w.separation) {
          if (r == 0.0 && w.alpha < 0.0)
            throw SingularEvaluationError(
                "negative-exponent weight evaluated at its source point");
          return std::pow(r, w.alpha);
        }
      }
      return 1.0;
    }
  }
  return 1.0;
}

namespace detail {

inline bool element_touches(const std::array<Vec2, 3>& c, Vec2 z,
                            double tol = 1e-12) {
  const auto l = barycentric(c[0], c[1], c[2], z);
  return l[0] >= -tol && l[1] >= -tol && l[2] >= -tol;
}

inline bool needs_subdivision(const WeightSpec& w,
                              const std::array<Vec2, 3>& c) {
  if (w.kind == WeightSpec::Kind::unweighted) return false;
  for (const Vec2 z : w.sources)
    if (element_touches(c, z)) return true;
  return false;
}

template <class T>
inline double squared_magnitude(const T& v) {
  if constexpr (std::is_same_v<T, double>)
    return v * v;
  else if constexpr (std::is_same_v<T, Vec2>)
    return dot(v, v);
  else
    return v.frobenius2();  // Mat2
}

// Quadrature of f(x, bary) * weight over the sub-triangle of element `e`
// spanned by barycentric corners `sub`. Nodes landing within 1e-14 of a
// source are nudged toward the sub-triangle center so the weight stays
// finite.
template <class F>
double weighted_cell_sum(const Mesh& mesh, int e, const WeightSpec& w,
                         const QuadratureRule& rule,
                         const std::array<std::array<double, 3>, 3>& sub,
                         F&& f) {
  const auto c = mesh.corners(e);
  const Vec2 p0 = from_barycentric(c[0], c[1], c[2], sub[0]);
  const Vec2 p1 = from_barycentric(c[0], c[1], c[2], sub[1]);
  const Vec2 p2 = from_barycentric(c[0], c[1], c[2], sub[2]);
  const double area = signed_area(p0, p1, p2);
  const double h = triangle_diameter(p0, p1, p2);

  double acc = 0.0;
  for (std::size_t q = 0; q < rule.points.size(); ++q) {
    const auto& r = rule.points[q];
    std::array<double, 3> l{};  // in the parent element
    for (int i = 0; i < 3; ++i)
      l[i] = r[0] * sub[0][i] + r[1] * sub[1][i] + r[2] * sub[2][i];
    Vec2 x = from_barycentric(c[0], c[1], c[2], l);
    for (const Vec2 z : w.sources) {
      if (dist(x, z) < 1e-14 * std::max(1.0, h)) {
        const double eps = 1e-12;
        for (int i = 0; i < 3; ++i)
          l[i] = (1.0 - eps) * l[i] + eps * (1.0 / 3.0);
        x = from_barycentric(c[0], c[1], c[2], l);
        break;
      }
    }
    acc += rule.weights[q] * squared_magnitude(f(e, x, l)) *
           weight_value(w, x);
  }
  return area * acc;
}

template <class F>
double weighted_element_integral(const Mesh& mesh, int e, const WeightSpec& w,
                                 const QuadratureRule& rule, F&& f,
                                 int levels) {
  struct Frame {
    std::array<std::array<double, 3>, 3> sub;
    int depth;
  };
  const std::array<std::array<double, 3>, 3> whole{
      {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}};
  if (levels == 0) return weighted_cell_sum(mesh, e, w, rule, whole, f);

  double acc = 0.0;
  std::vector<Frame> stack{{whole, 0}};
  while (!stack.empty()) {
    const Frame fr = stack.back();
    stack.pop_back();
    if (fr.depth == levels) {
      acc += weighted_cell_sum(mesh, e, w, rule, fr.sub, f);
      continue;
    }
    std::array<double, 3> m01{}, m12{}, m20{};
    for (int i = 0; i < 3; ++i) {
      m01[i] = 0.5 * (fr.sub[0][i] + fr.sub[1][i]);
      m12[i] = 0.5 * (fr.sub[1][i] + fr.sub[2][i]);
      m20[i] = 0.5 * (fr.sub[2][i] + fr.sub[0][i]);
    }
    stack.push_back({{fr.sub[0], m01, m20}, fr.depth + 1});
    stack.push_back({{m01, fr.sub[1], m12}, fr.depth + 1});
    stack.push_back({{m20, m12, fr.sub[2]}, fr.depth + 1});
    stack.push_back({{m01, m12, m20}, fr.depth + 1});
  }
  return acc;
}

}  // namespace detail

inline constexpr int kWeightedQuadratureDegree = 19;
inline constexpr int kSourceSubdivisionLevels = 2;

/// (sum_K int_K |field|^2 w)^(1/2) with the degree-19 rule; elements whose
/// closure contains a source get two levels of uniform quadrature
/// subdivision. `field(e, x, bary)` may return double, Vec2, or Mat2.
template <class F>
double weighted_l2_norm(const Mesh& mesh, const WeightSpec& w, F&& field) {
  const QuadratureRule& rule = triangle_rule(kWeightedQuadratureDegree);
  double acc = 0.0;
  for (int e = 0; e < mesh.n_elements(); ++e) {
    const int levels = detail::needs_subdivision(w, mesh.corners(e))
                           ? kSourceSubdivisionLevels
                           : 0;
    acc += detail::weighted_element_integral(mesh, e, w, rule, field, levels);
  }
  return std::sqrt(acc);
}

/// Same quadrature with the gradient as integrand: pass the field's gradient
/// evaluator (Vec2 for scalar fields, Mat2 for vector fields).
template <class G>
double weighted_h1_seminorm(const Mesh& mesh, const WeightSpec& w,
                            G&& gradient) {
  return weighted_l2_norm(mesh, w, gradient);
}

}  // namespace bdfem
