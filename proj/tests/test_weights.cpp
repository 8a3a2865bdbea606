#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "bdfem/mesh.hpp"
#include "bdfem/spaces.hpp"
#include "bdfem/weights.hpp"
#include "oracles.hpp"

using namespace bdfem;

namespace {

constexpr auto one = [](int, Vec2, const std::array<double, 3>&) {
  return 1.0;
};

}  // namespace

TEST_CASE("weight values") {
  const auto w = WeightSpec::power(1.0, +1, {0, 0});
  CHECK(weight_value(w, {3, 4}) == doctest::Approx(5.0));

  const auto w0 = WeightSpec::power(0.0, +1, {0.3, 0.3});
  CHECK(weight_value(w0, {0.9, 0.1}) == doctest::Approx(1.0));

  const auto wneg = WeightSpec::power(1.5, -1, {0.25, 0.25});
  CHECK_THROWS_AS(weight_value(wneg, {0.25, 0.25}), SingularEvaluationError);

  CHECK_THROWS_AS(WeightSpec::power(2.5, +1, {0, 0}), ArgumentError);
}

TEST_CASE("composite weight: per-ball power, far field 1") {
  const Mesh m = build_initial_mesh(DomainSpec::t_shape());
  const std::vector<Vec2> Z{{0.0, 0.5}, {0.0, -1.0}};
  CHECK(source_separation(Z, m) == doctest::Approx(0.5));

  const WeightSpec rho = make_composite_weight(1.0, Z, m);
  // far from both sources
  CHECK(weight_value(rho, {1.2, 0.5}) == doctest::Approx(1.0));
  // inside each ball the power weight takes over
  for (const Vec2 z : Z) {
    for (int k = 0; k < 8; ++k) {
      const double r = 0.24 * (k + 1) / 8.0;
      const Vec2 x{z.x + r, z.y};
      const auto pw = WeightSpec::power(1.0, +1, z);
      CHECK(weight_value(rho, x) == doctest::Approx(weight_value(pw, x)));
    }
    const Vec2 outside{z.x + 0.26, z.y};
    CHECK(weight_value(rho, outside) == doctest::Approx(1.0));
  }
  CHECK_THROWS_AS(WeightSpec::composite(1.0, {}, 0.5), ArgumentError);
}

TEST_CASE("weighted L2 norms against closed forms") {
  const Mesh m = build_initial_mesh(DomainSpec::unit_square());

  // d_z^2 is a polynomial, so the rule is exact: int (x-.5)^2+(y-.5)^2 = 1/6
  WeightSpec w2;  // exponent 2 sits outside the A2 factory range
  w2.kind = WeightSpec::Kind::power;
  w2.alpha = 2.0;
  w2.sign = +1;
  w2.sources = {{0.5, 0.5}};
  CHECK(weighted_l2_norm(m, w2, one) ==
        doctest::Approx(1.0 / std::sqrt(6.0)).epsilon(1e-13));

  CHECK(weighted_l2_norm(m, WeightSpec::unweighted(), one) ==
        doctest::Approx(1.0).epsilon(1e-13));
  const Mesh l = build_initial_mesh(DomainSpec::l_shape());
  CHECK(weighted_l2_norm(l, WeightSpec::unweighted(), one) ==
        doctest::Approx(std::sqrt(3.0)).epsilon(1e-13));
}

TEST_CASE("singular weight norm matches the adaptive oracle") {
  const Mesh m = build_initial_mesh(DomainSpec::unit_square());
  const Vec2 z{0.5, 0.5};
  const auto w = WeightSpec::power(1.0, +1, z);
  const double norm_lib = weighted_l2_norm(m, w, one);

  double ref = 0.0;
  for (int e = 0; e < m.n_elements(); ++e) {
    const auto c = m.corners(e);
    ref += oracle::integrate_adaptive(
        c[0], c[1], c[2], [&](Vec2 x) { return dist(x, z); }, 1e-10);
  }
  CHECK(norm_lib == doctest::Approx(std::sqrt(ref)).epsilon(1e-6));
}

TEST_CASE("weighted H1 seminorms") {
  const Mesh m = build_initial_mesh(DomainSpec::unit_square());
  constexpr auto grad_of_x = [](int, Vec2, const std::array<double, 3>&) {
    return Vec2{1.0, 0.0};
  };
  constexpr auto grad_of_const = [](int, Vec2, const std::array<double, 3>&) {
    return Vec2{0.0, 0.0};
  };
  CHECK(weighted_h1_seminorm(m, WeightSpec::unweighted(), grad_of_x) ==
        doctest::Approx(1.0).epsilon(1e-13));
  CHECK(weighted_h1_seminorm(m, WeightSpec::unweighted(), grad_of_const) ==
        doctest::Approx(0.0));

  WeightSpec w2;
  w2.kind = WeightSpec::Kind::power;
  w2.alpha = 2.0;
  w2.sign = +1;
  w2.sources = {{0.5, 0.5}};
  CHECK(weighted_h1_seminorm(m, w2, grad_of_x) ==
        doctest::Approx(std::sqrt(1.0 / 6.0)).epsilon(1e-13));
}

TEST_CASE("alpha = 0 reduces to the unweighted norm") {
  const Mesh m = build_initial_mesh(DomainSpec::l_shape());
  const auto w0 = WeightSpec::power(0.0, +1, {0.5, 0.5});
  auto field = [](int, Vec2 x, const std::array<double, 3>&) {
    return std::sin(3 * x.x) + x.y;
  };
  CHECK(weighted_l2_norm(m, w0, field) ==
        doctest::Approx(weighted_l2_norm(m, WeightSpec::unweighted(), field))
            .epsilon(1e-12));
}

TEST_CASE("a source sitting exactly on a quadrature node is nudged away") {
  const Mesh m = build_initial_mesh(DomainSpec::unit_square());
  const auto c = m.corners(0);
  // position of a node of the two-level subdivision used near sources:
  // sub-triangle [child 0 of child 0], first rule point
  const QuadratureRule rule = triangle_quadrature(19);
  const std::array<std::array<double, 3>, 3> sub{
      {{1, 0, 0}, {0.75, 0.25, 0}, {0.75, 0, 0.25}}};
  const auto& r = rule.points[0];
  std::array<double, 3> l{};
  for (int i = 0; i < 3; ++i)
    l[i] = r[0] * sub[0][i] + r[1] * sub[1][i] + r[2] * sub[2][i];
  const Vec2 z = from_barycentric(c[0], c[1], c[2], l);

  // the weight alone is singular there for a negative exponent
  const auto w = WeightSpec::power(1.5, -1, z);
  CHECK_THROWS_AS(weight_value(w, z), SingularEvaluationError);
  // the integrator perturbs the node, so the norm stays finite
  double nrm = 0.0;
  CHECK_NOTHROW(nrm = weighted_l2_norm(m, w, one));
  CHECK(std::isfinite(nrm));
  CHECK(nrm > 0.0);
}

TEST_CASE("Cauchy-Schwarz duality on random Taylor-Hood fields") {
  const Mesh m = build_initial_mesh(DomainSpec::unit_square());
  const MixedSpace sp = build_space(m, PairKind::taylor_hood);
  for (const double alpha : {0.5, 1.0, 1.5}) {
    Eigen::VectorXd coeffs(sp.n_velocity);
    for (int i = 0; i < coeffs.size(); ++i)
      coeffs[i] = oracle::uniform(-1, 1);
    auto field = [&](int e, Vec2, const std::array<double, 3>& l) {
      return ElementVelocity(m, sp, e, coeffs).value(l);
    };
    const auto wp = WeightSpec::power(alpha, +1, {0.5, 0.5});
    const auto wm = WeightSpec::power(alpha, -1, {0.5, 0.5});
    const double plain = weighted_l2_norm(m, WeightSpec::unweighted(), field);
    const double with = weighted_l2_norm(m, wp, field);
    const double against = weighted_l2_norm(m, wm, field);
    CHECK(plain * plain <= with * against + 1e-8);
  }
}
