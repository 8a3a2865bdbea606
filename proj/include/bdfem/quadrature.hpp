#pragma once

#include <Eigen/Dense>
#include <array>
#include <map>
#include <cmath>
#include <vector>

#include "bdfem/errors.hpp"
#include "bdfem/geometry.hpp"

namespace bdfem {

/// Quadrature on the reference triangle in barycentric coordinates.
/// Weights sum to 1; an integral over element K is area(K) * sum w_i f(x_i).
struct QuadratureRule {
  std::vector<std::array<double, 3>> points;
  std::vector<double> weights;
  int exact_degree = 0;
};

/// 1D Gauss rule on [0,1]; weights sum to 1.
struct GaussRule1D {
  std::vector<double> points;
  std::vector<double> weights;
  int exact_degree = 0;
};

namespace detail {

// Golub–Welsch: nodes/weights of the Gauss rule for the Jacobi weight
// (1-x)^a (1+x)^b on [-1,1] from the symmetric tridiagonal recurrence matrix.
inline void gauss_jacobi(int n, double a, double b, std::vector<double>& nodes,
                         std::vector<double>& weights) {
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
  auto diag = [&](int k) {
    const double s = 2.0 * k + a + b;
    if (s == 0.0 || s + 2.0 == 0.0) return (b - a) / 2.0;  // k=0, a+b in {0,-2}
    return (b * b - a * a) / (s * (s + 2.0));
  };
  auto offdiag = [&](int k) {  // beta_k, k >= 1
    const double s = 2.0 * k + a + b;
    return 4.0 * k * (k + a) * (k + b) * (k + a + b) /
           (s * s * (s + 1.0) * (s - 1.0));
  };
  for (int k = 0; k < n; ++k) {
    J(k, k) = diag(k);
    if (k >= 1) {
      const double beta = std::sqrt(offdiag(k));
      J(k, k - 1) = beta;
      J(k - 1, k) = beta;
    }
  }
  const double mu0 = std::pow(2.0, a + b + 1.0) * std::tgamma(a + 1.0) *
                     std::tgamma(b + 1.0) / std::tgamma(a + b + 2.0);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
  nodes.resize(n);
  weights.resize(n);
  for (int i = 0; i < n; ++i) {
    nodes[i] = es.eigenvalues()(i);
    const double v0 = es.eigenvectors()(0, i);
    weights[i] = mu0 * v0 * v0;
  }
}

}  // namespace detail

inline GaussRule1D gauss_legendre_01(int n) {
  if (n < 1) throw ArgumentError("gauss_legendre_01: n must be positive");
  std::vector<double> x, w;
  detail::gauss_jacobi(n, 0.0, 0.0, x, w);
  GaussRule1D r;
  r.exact_degree = 2 * n - 1;
  r.points.resize(n);
  r.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    r.points[i] = 0.5 * (1.0 + x[i]);
    r.weights[i] = 0.5 * w[i];  // total weight 1 on [0,1]
  }
  return r;
}

/// Conical-product rule: Gauss–Jacobi (weight 1-x) in the first coordinate
/// times Gauss–Legendre in the collapsed one. With n points per direction it
/// integrates every bivariate monomial of total degree <= 2n-1 exactly, all
/// weights positive and all points strictly interior.
inline QuadratureRule triangle_quadrature(int degree) {
  if (degree < 1 || degree > 19)
    throw UnsupportedDegreeError("triangle_quadrature: degree " +
                                 std::to_string(degree) +
                                 " outside the supported range [1,19]");
  const int n = degree / 2 + 1;  // 2n-1 >= degree
  std::vector<double> xj, wj;
  detail::gauss_jacobi(n, 1.0, 0.0, xj, wj);
  const GaussRule1D gl = gauss_legendre_01(n);

  QuadratureRule rule;
  rule.exact_degree = 2 * n - 1;
  rule.points.reserve(static_cast<std::size_t>(n) * n);
  rule.weights.reserve(static_cast<std::size_t>(n) * n);
  for (int k = 0; k < n; ++k) {
    const double x = 0.5 * (1.0 + xj[k]);  // in (0,1)
    const double a = 0.25 * wj[k];         // absorbs both mappings
    for (int l = 0; l < n; ++l) {
      const double y = (1.0 - x) * gl.points[l];
      rule.points.push_back({1.0 - x - y, x, y});
      rule.weights.push_back(2.0 * a * gl.weights[l]);  // normalize to sum 1
    }
  }
  return rule;
}

/// Maps a barycentric rule point into element K given its corners.
inline Vec2 quad_point(const std::array<Vec2, 3>& c,
                       const std::array<double, 3>& l) {
  return from_barycentric(c[0], c[1], c[2], l);
}

/// Cached rules for the hot per-element loops.
inline const QuadratureRule& triangle_rule(int degree) {
  static thread_local std::map<int, QuadratureRule> cache;
  auto it = cache.find(degree);
  if (it == cache.end())
    it = cache.emplace(degree, triangle_quadrature(degree)).first;
  return it->second;
}

inline const GaussRule1D& edge_rule(int n) {
  static thread_local std::map<int, GaussRule1D> cache;
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, gauss_legendre_01(n)).first;
  return it->second;
}

}  // namespace bdfem
