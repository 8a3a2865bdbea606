#include <doctest.h>

#include <cmath>
#include <map>
#include <set>

#include "bdfem/mesh.hpp"
#include "bdfem/spaces.hpp"
#include "oracles.hpp"

using namespace bdfem;

namespace {

Mesh two_triangle_square() {
  return make_mesh({{0, 0}, {1, 0}, {1, 1}, {0, 1}},
                   {{{0, 1, 2}}, {{0, 2, 3}}});
}

std::array<double, 3> random_interior_bary() {
  double a = oracle::uniform(0.05, 0.9);
  double b = oracle::uniform(0.05, 0.9 - a + 0.05);
  b = std::min(b, 0.9 - a);
  return {a, b, 1.0 - a - b};
}

}  // namespace

TEST_CASE("dof counts on the two-triangle square") {
  const Mesh m = two_triangle_square();

  const MixedSpace th = build_space(m, PairKind::taylor_hood);
  CHECK(th.n_velocity == 18);  // 2 * (4 vertices + 5 edges)
  CHECK(th.n_pressure == 4);
  CHECK(th.ndof_total == 22);

  const MixedSpace mini = build_space(m, PairKind::mini);
  CHECK(mini.n_velocity == 12);  // 2 * (4 vertices + 2 bubbles)
  CHECK(mini.n_pressure == 4);
  CHECK(mini.ndof_total == 16);
}

TEST_CASE("dirichlet flags: everything except the diagonal midpoint") {
  const Mesh m = two_triangle_square();
  const MixedSpace th = build_space(m, PairKind::taylor_hood);
  int free_count = 0;
  int free_dof = -1;
  for (int s = 0; s < th.n_scalar_velocity; ++s)
    if (!th.scalar_dirichlet[s]) {
      ++free_count;
      free_dof = s;
    }
  REQUIRE(free_count == 1);
  const Vec2 p = scalar_dof_point(m, th, free_dof);
  CHECK(p.x == doctest::Approx(0.5));
  CHECK(p.y == doctest::Approx(0.5));

  const MixedSpace mini = build_space(m, PairKind::mini);
  for (int v = 0; v < m.n_vertices(); ++v) CHECK(mini.scalar_dirichlet[v]);
  for (int e = 0; e < m.n_elements(); ++e)
    CHECK(!mini.scalar_dirichlet[m.n_vertices() + e]);  // bubbles stay free
}

TEST_CASE("partition of unity and nodal values") {
  const Mesh m = build_initial_mesh(DomainSpec::unit_square());
  const std::array<Vec2, 3> c = m.corners(3);

  for (int rep = 0; rep < 20; ++rep) {
    const auto l = random_interior_bary();
    double sum_p2 = 0.0, sum_p1 = 0.0, sum_mini = 0.0;
    const auto th = velocity_shapes(PairKind::taylor_hood, c, l);
    for (int i = 0; i < th.n; ++i) sum_p2 += th.value[i];
    const auto p1 = pressure_shapes(c, l);
    for (int i = 0; i < p1.n; ++i) sum_p1 += p1.value[i];
    const auto mini = velocity_shapes(PairKind::mini, c, l);
    for (int i = 0; i < 3; ++i) sum_mini += mini.value[i];  // P1 part
    CHECK(sum_p2 == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(sum_p1 == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(sum_mini == doctest::Approx(1.0).epsilon(1e-13));
  }

  // A P2 vertex function vanishes at the midpoint of the opposite edge.
  const auto mid = velocity_shapes(PairKind::taylor_hood, c, {0.0, 0.5, 0.5});
  CHECK(mid.value[0] == doctest::Approx(0.0).epsilon(1e-14));
  // The bubble peaks at 1 at the barycenter.
  const auto bary = velocity_shapes(PairKind::mini, c,
                                    {1.0 / 3, 1.0 / 3, 1.0 / 3});
  CHECK(bary.value[3] == doctest::Approx(1.0).epsilon(1e-13));
}

TEST_CASE("shape gradients match central finite differences") {
  const Mesh m = build_initial_mesh(DomainSpec::l_shape());
  const double h = 1e-6;
  for (const PairKind pair : {PairKind::taylor_hood, PairKind::mini}) {
    const int e = 5;
    const auto c = m.corners(e);
    for (int rep = 0; rep < 10; ++rep) {
      const auto l = random_interior_bary();
      const Vec2 x = from_barycentric(c[0], c[1], c[2], l);
      const auto s = velocity_shapes(pair, c, l);
      for (int i = 0; i < s.n; ++i) {
        auto value_at = [&](Vec2 p) {
          return velocity_shapes(pair, c, barycentric(c[0], c[1], c[2], p))
              .value[i];
        };
        const double gx =
            (value_at({x.x + h, x.y}) - value_at({x.x - h, x.y})) / (2 * h);
        const double gy =
            (value_at({x.x, x.y + h}) - value_at({x.x, x.y - h})) / (2 * h);
        CHECK(s.grad[i].x == doctest::Approx(gx).epsilon(1e-6));
        CHECK(s.grad[i].y == doctest::Approx(gy).epsilon(1e-6));
      }
    }
  }
}

TEST_CASE("laplacians match second finite differences") {
  const Mesh m = build_initial_mesh(DomainSpec::unit_square());
  const int e = 7;
  const auto c = m.corners(e);
  const double h = 1e-4;
  for (const PairKind pair : {PairKind::taylor_hood, PairKind::mini}) {
    const auto l = random_interior_bary();
    const Vec2 x = from_barycentric(c[0], c[1], c[2], l);
    const auto s = velocity_shapes(pair, c, l);
    for (int i = 0; i < s.n; ++i) {
      auto value_at = [&](Vec2 p) {
        return velocity_shapes(pair, c, barycentric(c[0], c[1], c[2], p))
            .value[i];
      };
      const double lap =
          (value_at({x.x + h, x.y}) + value_at({x.x - h, x.y}) +
           value_at({x.x, x.y + h}) + value_at({x.x, x.y - h}) -
           4.0 * value_at(x)) /
          (h * h);
      CHECK(s.laplacian[i] == doctest::Approx(lap).epsilon(1e-4));
    }
  }
}

TEST_CASE("element dof maps agree across shared entities") {
  const Mesh m = build_initial_mesh(DomainSpec::t_shape());
  for (const PairKind pair : {PairKind::taylor_hood, PairKind::mini}) {
    const MixedSpace sp = build_space(m, pair);
    // Each (element, local dof) resolves to one global dof, and a global dof
    // seen from two elements sits at the same physical node.
    std::map<int, Vec2> node_of;
    std::array<int, 6> dofs{};
    for (int e = 0; e < m.n_elements(); ++e) {
      const int n = sp.element_scalar_dofs(m, e, dofs);
      std::set<int> unique(dofs.begin(), dofs.begin() + n);
      CHECK(static_cast<int>(unique.size()) == n);
      for (int i = 0; i < n; ++i) {
        CHECK(dofs[i] >= 0);
        CHECK(dofs[i] < sp.n_scalar_velocity);
        const Vec2 p = scalar_dof_point(m, sp, dofs[i]);
        const auto it = node_of.find(dofs[i]);
        if (it == node_of.end())
          node_of[dofs[i]] = p;
        else
          CHECK(dist(it->second, p) < 1e-14);
      }
    }
  }
}

TEST_CASE("shape_eval wraps physical points") {
  const Mesh m = build_initial_mesh(DomainSpec::unit_square());
  const auto s =
      shape_eval(PairKind::taylor_hood, FieldComponent::velocity, m, 0,
                 m.barycenter(0));
  CHECK(s.n == 6);
  const auto p = shape_eval(PairKind::mini, FieldComponent::pressure, m, 0,
                            m.barycenter(0));
  CHECK(p.n == 3);
  CHECK(p.value[0] == doctest::Approx(1.0 / 3));
}
