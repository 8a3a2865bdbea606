#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "bdfem/mesh.hpp"
#include "oracles.hpp"

using namespace bdfem;

namespace {

Mesh two_triangle_square() {
  return make_mesh({{0, 0}, {1, 0}, {1, 1}, {0, 1}},
                   {{{0, 1, 2}}, {{0, 2, 3}}});
}

double min_angle(const Mesh& m) {
  double best = 4.0;
  for (int e = 0; e < m.n_elements(); ++e) {
    const auto c = m.corners(e);
    for (int i = 0; i < 3; ++i) {
      const Vec2 u = c[(i + 1) % 3] - c[i];
      const Vec2 v = c[(i + 2) % 3] - c[i];
      best = std::min(best, std::atan2(std::abs(cross(u, v)), dot(u, v)));
    }
  }
  return best;
}

double max_edge(const Mesh& m) {
  double best = 0.0;
  for (int g = 0; g < m.n_edges(); ++g)
    best = std::max(best, m.edge_length(g));
  return best;
}

}  // namespace

TEST_CASE("initial meshes: area, Euler relation, conformity") {
  struct Row {
    DomainSpec spec;
    double area;
  };
  const Row rows[] = {{DomainSpec::unit_square(), 1.0},
                      {DomainSpec::l_shape(), 3.0},
                      {DomainSpec::t_shape(), 5.0}};
  for (const auto& row : rows) {
    const Mesh m = build_initial_mesh(row.spec);
    validate_mesh(m);
    CHECK(mesh_area(m) == doctest::Approx(row.area).epsilon(1e-12));
    CHECK(m.n_vertices() - m.n_edges() + m.n_elements() == 1);
    CHECK(mesh_area(m) ==
          doctest::Approx(polygon_area(domain_polygon(row.spec)))
              .epsilon(1e-12));
  }
}

TEST_CASE("t-shape boundary tags expose the two lateral inflow segments") {
  const Mesh m = build_initial_mesh(DomainSpec::t_shape());
  std::set<int> tags;
  for (int g = 0; g < m.n_edges(); ++g) {
    if (!m.boundary_edge_flags[g]) continue;
    tags.insert(m.boundary_segment_tags[g]);
    const Vec2 a = m.vertices[m.edges[g][0]];
    const Vec2 b = m.vertices[m.edges[g][1]];
    if (m.boundary_segment_tags[g] == 5) {
      CHECK(a.x == doctest::Approx(1.5));
      CHECK(b.x == doctest::Approx(1.5));
    }
    if (m.boundary_segment_tags[g] == 7) {
      CHECK(a.x == doctest::Approx(-1.5));
      CHECK(b.x == doctest::Approx(-1.5));
    }
  }
  CHECK(tags.count(5) == 1);
  CHECK(tags.count(7) == 1);
}

TEST_CASE("polygon domain: ear clipping and the non-simple error") {
  const DomainSpec pentagon = DomainSpec::from_polygon(
      {{0, 0}, {2, 0}, {2, 1}, {1, 2}, {0, 1}});
  const Mesh m = build_initial_mesh(pentagon);
  validate_mesh(m);
  CHECK(mesh_area(m) ==
        doctest::Approx(polygon_area(pentagon.polygon)).epsilon(1e-12));

  const DomainSpec bowtie =
      DomainSpec::from_polygon({{0, 0}, {1, 1}, {1, 0}, {0, 1}});
  CHECK_THROWS_AS(build_initial_mesh(bowtie), GeometryError);
}

TEST_CASE("bisect: neighbor forced across the shared diagonal") {
  const Mesh m = two_triangle_square();
  const Mesh r = bisect(m, std::vector<int>{0});
  validate_mesh(r);
  CHECK(r.n_elements() == 4);
  CHECK(mesh_area(r) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("bisect: empty mark set returns an identical mesh") {
  const Mesh m = build_initial_mesh(DomainSpec::l_shape());
  const Mesh r = bisect(m, std::vector<int>{});
  CHECK(r.n_elements() == m.n_elements());
  CHECK(r.n_vertices() == m.n_vertices());
  CHECK(r.elements == m.elements);
  CHECK(r.vertices == m.vertices);
}

TEST_CASE("bisect: mark-all at least doubles the element count") {
  Mesh m = build_initial_mesh(DomainSpec::unit_square());
  std::vector<int> all(m.n_elements());
  for (int e = 0; e < m.n_elements(); ++e) all[e] = e;
  const Mesh r = bisect(m, all);
  validate_mesh(r);
  CHECK(r.n_elements() >= 2 * m.n_elements());
}

TEST_CASE("bisect: children partition their parent's area") {
  Mesh m = build_initial_mesh(DomainSpec::t_shape());
  const Mesh r = bisect(m, std::vector<int>{0, 3, 7, 11});
  validate_mesh(r);
  std::map<int, double> child_area;
  for (int e = 0; e < r.n_elements(); ++e) child_area[r.parent[e]] += r.area(e);
  for (int p = 0; p < m.n_elements(); ++p)
    CHECK(child_area.at(p) == doctest::Approx(m.area(p)).epsilon(1e-12));
}

TEST_CASE("bisect: boundary tags survive refinement") {
  Mesh m = build_initial_mesh(DomainSpec::t_shape());
  for (int round = 0; round < 3; ++round) {
    std::vector<int> some;
    for (int e = 0; e < m.n_elements(); e += 2) some.push_back(e);
    m = bisect(m, some);
  }
  for (int g = 0; g < m.n_edges(); ++g) {
    if (!m.boundary_edge_flags[g]) {
      CHECK(m.boundary_segment_tags[g] == -1);
      continue;
    }
    const int tag = m.boundary_segment_tags[g];
    REQUIRE(tag >= 0);
    const auto poly = domain_polygon(DomainSpec::t_shape());
    const Vec2 qa = poly[tag], qb = poly[(tag + 1) % poly.size()];
    CHECK(detail::point_on_segment(qa, qb, m.vertices[m.edges[g][0]], 1e-10));
    CHECK(detail::point_on_segment(qa, qb, m.vertices[m.edges[g][1]], 1e-10));
  }
}

TEST_CASE("locate_point membership") {
  const Mesh m = build_initial_mesh(DomainSpec::unit_square());
  for (int e = 0; e < m.n_elements(); ++e) {
    const auto hits = locate_point(m, m.barycenter(e));
    REQUIRE(hits.size() == 1);
    CHECK(hits[0] == e);
  }
  // the central grid vertex (0.5,0.5) is shared by 8 criss-cross triangles
  const auto at_vertex = locate_point(m, {0.5, 0.5});
  CHECK(at_vertex.size() == 8);
  CHECK(locate_point(m, {2.0, 0.3}).empty());
}

TEST_CASE("patches: edge and vertex neighborhoods") {
  const Mesh sq = two_triangle_square();
  const Patches p2 = patches(sq, 0);
  CHECK(p2.edge_neighbors == std::vector<int>{0, 1});

  const Mesh m = build_initial_mesh(DomainSpec::unit_square());
  bool saw_interior = false;
  for (int K = 0; K < m.n_elements(); ++K) {
    const Patches p = patches(m, K);
    bool all_interior = true;
    for (int i = 0; i < 3; ++i)
      if (m.boundary_edge_flags[m.element_edges[K][i]]) all_interior = false;
    if (all_interior) {
      saw_interior = true;
      CHECK(p.edge_neighbors.size() == 4);
    }
    // N_K is always contained in N_K*
    for (const int e : p.edge_neighbors)
      CHECK(std::count(p.vertex_neighbors.begin(), p.vertex_neighbors.end(),
                       e) == 1);
  }
  CHECK(saw_interior);
}

TEST_CASE("local distances") {
  const Vec2 a{0, 0}, b{1, 0}, c{0, 1};
  CHECK(local_distance(a, b, c, {0, 0}) == doctest::Approx(1.0));
  CHECK(local_distance(a, b, c, {1.0 / 3, 1.0 / 3}) ==
        doctest::Approx(std::sqrt(5.0) / 3.0));

  // children never reach farther than their parent
  const Mesh m = two_triangle_square();
  const Mesh r = bisect(m, std::vector<int>{0, 1});
  const Vec2 z{0.37, -0.8};
  for (int e = 0; e < r.n_elements(); ++e) {
    const auto cc = r.corners(e);
    CHECK(local_distance(cc[0], cc[1], cc[2], z) <=
          local_distance(m, r.parent[e], z) + 1e-14);
  }

  const std::vector<Vec2> single{{0, 0}};
  CHECK(multi_source_distance(a, b, c, single) ==
        doctest::Approx(local_distance(a, b, c, {0, 0})));
  const std::vector<Vec2> two{{0, 0}, {50, 50}};
  CHECK(multi_source_distance(a, b, c, two) == doctest::Approx(1.0));
  for (const Vec2 z2 : two)
    CHECK(multi_source_distance(a, b, c, two) <=
          local_distance(a, b, c, z2) + 1e-14);
  CHECK_THROWS_AS(multi_source_distance(a, b, c, std::vector<Vec2>{}),
                  ArgumentError);
}

TEST_CASE("uniform bisection: edge halving and shape regularity") {
  const Mesh m0 = build_initial_mesh(DomainSpec::unit_square());
  const double angle0 = min_angle(m0);
  const double h0 = max_edge(m0);

  Mesh m = m0;
  for (int round = 1; round <= 6; ++round) {
    std::vector<int> all(m.n_elements());
    for (int e = 0; e < m.n_elements(); ++e) all[e] = e;
    m = bisect(m, all);
    validate_mesh(m);
    CHECK(min_angle(m) >= angle0 - 1e-12);
    if (round % 2 == 0)
      CHECK(max_edge(m) ==
            doctest::Approx(h0 / std::pow(2.0, round / 2)).epsilon(1e-12));
  }
}

TEST_CASE("mesh text dump round trip") {
  const Mesh m = build_initial_mesh(DomainSpec::l_shape());
  const Mesh r = mesh_from_text(mesh_to_text(m));
  CHECK(r.vertices == m.vertices);
  CHECK(r.elements == m.elements);
  validate_mesh(r);
  CHECK_THROWS_AS(mesh_from_text("triangles 1\n0 1 2\n"), IoError);
}
