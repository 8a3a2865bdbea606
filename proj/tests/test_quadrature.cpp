#include <doctest.h>

#include <cmath>

#include "bdfem/quadrature.hpp"
#include "oracles.hpp"

using namespace bdfem;

namespace {

// Reference-triangle moment: int x^i y^j = i! j! / (i+j+2)!
double reference_moment(int i, int j) {
  double v = 1.0;
  for (int k = 1; k <= i; ++k) v *= k;
  for (int k = 1; k <= j; ++k) v *= k;
  for (int k = 1; k <= i + j + 2; ++k) v /= k;
  return v;
}

double apply(const QuadratureRule& rule, int i, int j) {
  // reference triangle (0,0),(1,0),(0,1): x = lambda_1, y = lambda_2
  double acc = 0.0;
  for (std::size_t q = 0; q < rule.points.size(); ++q)
    acc += rule.weights[q] * std::pow(rule.points[q][1], i) *
           std::pow(rule.points[q][2], j);
  return 0.5 * acc;  // reference area
}

}  // namespace

TEST_CASE("triangle rules are exact for all monomials up to their degree") {
  for (const int degree : {1, 2, 4, 6, 8, 19}) {
    const QuadratureRule rule = triangle_quadrature(degree);
    CHECK(rule.exact_degree >= degree);
    double wsum = 0.0;
    for (const double w : rule.weights) {
      CHECK(w > 0.0);
      wsum += w;
    }
    CHECK(wsum == doctest::Approx(1.0).epsilon(1e-14));
    for (const auto& p : rule.points)
      for (const double l : p) CHECK(l > 0.0);  // strictly interior

    for (int i = 0; i + 0 <= rule.exact_degree; ++i)
      for (int j = 0; i + j <= rule.exact_degree; ++j) {
        const double exact = reference_moment(i, j);
        CHECK(std::abs(apply(rule, i, j) - exact) <=
              1e-12 * std::max(1.0, exact));
      }
  }
}

TEST_CASE("degree-19 rule: the closed-form i=10, j=9 moment") {
  const QuadratureRule rule = triangle_quadrature(19);
  const double exact = reference_moment(10, 9);
  CHECK(apply(rule, 10, 9) == doctest::Approx(exact).epsilon(1e-10));
  CHECK(apply(rule, 0, 0) == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("degree-19 rule matches the independent Duffy oracle on a random "
          "full-degree polynomial") {
  const QuadratureRule rule = triangle_quadrature(19);
  std::vector<double> coef;
  for (int i = 0; i + 0 <= 19; ++i)
    for (int j = 0; i + j <= 19; ++j) coef.push_back(oracle::uniform(-1, 1));

  auto poly = [&](Vec2 x) {
    double v = 0.0;
    std::size_t k = 0;
    for (int i = 0; i + 0 <= 19; ++i)
      for (int j = 0; i + j <= 19; ++j)
        v += coef[k++] * std::pow(x.x, i) * std::pow(x.y, j);
    return v;
  };

  double lib = 0.0;
  for (std::size_t q = 0; q < rule.points.size(); ++q)
    lib += 0.5 * rule.weights[q] *
           poly({rule.points[q][1], rule.points[q][2]});
  const double ref =
      oracle::integrate_triangle({0, 0}, {1, 0}, {0, 1}, poly);
  CHECK(lib == doctest::Approx(ref).epsilon(1e-12));
}

TEST_CASE("degree limits") {
  CHECK_THROWS_AS(triangle_quadrature(20), UnsupportedDegreeError);
  CHECK_THROWS_AS(triangle_quadrature(0), UnsupportedDegreeError);
}

TEST_CASE("1D Gauss rule integrates polynomials on [0,1]") {
  const GaussRule1D rule = gauss_legendre_01(6);
  CHECK(rule.exact_degree == 11);
  for (int k = 0; k <= 11; ++k) {
    double acc = 0.0;
    for (std::size_t q = 0; q < rule.points.size(); ++q)
      acc += rule.weights[q] * std::pow(rule.points[q], k);
    CHECK(acc == doctest::Approx(1.0 / (k + 1)).epsilon(1e-13));
  }
}
