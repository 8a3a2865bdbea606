#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <fstream>
#include <map>
#include <span>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "bdfem/errors.hpp"
#include "bdfem/geometry.hpp"

namespace bdfem {

struct DomainSpec {
  enum class Kind { unit_square, l_shape, t_shape, polygon };
  Kind kind = Kind::unit_square;
  std::vector<Vec2> polygon;  // only for Kind::polygon

  static DomainSpec unit_square() { return {Kind::unit_square, {}}; }
  static DomainSpec l_shape() { return {Kind::l_shape, {}}; }
  static DomainSpec t_shape() { return {Kind::t_shape, {}}; }
  static DomainSpec from_polygon(std::vector<Vec2> pts) {
    return {Kind::polygon, std::move(pts)};
  }
  friend bool operator==(const DomainSpec&, const DomainSpec&) = default;
};

/// Conforming triangulation. Immutable after construction; refinement
/// produces a new Mesh. Element vertex triples are counterclockwise.
/// Local edge i of an element is the edge opposite local vertex i.
struct Mesh {
  std::vector<Vec2> vertices;
  std::vector<std::array<int, 3>> elements;
  std::vector<std::array<int, 2>> edges;          // vertex pairs, lo < hi
  std::vector<std::array<int, 2>> edge_elements;  // second == -1 on boundary
  std::vector<char> boundary_edge_flags;
  std::vector<int> boundary_segment_tags;  // per edge; -1 for interior edges
  std::vector<std::array<int, 3>> element_edges;
  std::vector<std::array<int, 3>> element_neighbors;  // -1 across boundary
  std::vector<int> refinement_edge;  // local index of the longest edge
  std::vector<int> parent;  // ancestor in the pre-refinement mesh (or self)

  int n_vertices() const { return static_cast<int>(vertices.size()); }
  int n_elements() const { return static_cast<int>(elements.size()); }
  int n_edges() const { return static_cast<int>(edges.size()); }

  std::array<Vec2, 3> corners(int e) const {
    const auto& t = elements[e];
    return {vertices[t[0]], vertices[t[1]], vertices[t[2]]};
  }
  double area(int e) const {
    const auto c = corners(e);
    return signed_area(c[0], c[1], c[2]);
  }
  double diameter(int e) const {
    const auto c = corners(e);
    return triangle_diameter(c[0], c[1], c[2]);
  }
  Vec2 barycenter(int e) const {
    const auto c = corners(e);
    return (c[0] + c[1] + c[2]) / 3.0;
  }
  double edge_length(int ge) const {
    return dist(vertices[edges[ge][0]], vertices[edges[ge][1]]);
  }
};

namespace detail {

inline std::int64_t edge_key(int a, int b) {
  if (a > b) std::swap(a, b);
  return (static_cast<std::int64_t>(a) << 32) | static_cast<std::int64_t>(b);
}

// Longest local edge; ties broken by the smallest opposite-vertex index.
inline int pick_refinement_edge(const std::array<Vec2, 3>& c,
                                const std::array<int, 3>& v) {
  std::array<double, 3> len;
  for (int i = 0; i < 3; ++i) len[i] = dist(c[(i + 1) % 3], c[(i + 2) % 3]);
  const double lmax = std::max({len[0], len[1], len[2]});
  int best = -1;
  for (int i = 0; i < 3; ++i) {
    if (len[i] < lmax * (1.0 - 1e-12)) continue;
    if (best < 0 || v[i] < v[best]) best = i;
  }
  return best;
}

inline bool point_on_segment(Vec2 a, Vec2 b, Vec2 p, double eps) {
  const Vec2 d = b - a;
  const double len = norm(d);
  if (std::abs(cross(d, p - a)) > eps * std::max(1.0, len)) return false;
  const double t = dot(p - a, d);
  return t >= -eps && t <= dot(d, d) + eps;
}

}  // namespace detail

/// Builds edges, adjacency, boundary flags, and refinement edges from raw
/// vertex/element data. Boundary edges are tagged with the index of the
/// domain-polygon segment they lie on (0 if no polygon is supplied).
inline Mesh make_mesh(std::vector<Vec2> vertices,
                      std::vector<std::array<int, 3>> elements,
                      const std::vector<Vec2>* boundary_polygon = nullptr) {
  Mesh m;
  m.vertices = std::move(vertices);
  m.elements = std::move(elements);

  const int ne = m.n_elements();
  for (int e = 0; e < ne; ++e) {
    if (m.area(e) <= 0.0)
      throw GeometryError("element " + std::to_string(e) +
                          " has non-positive area");
  }

  std::unordered_map<std::int64_t, int> edge_ids;
  edge_ids.reserve(3 * static_cast<std::size_t>(ne));
  m.element_edges.assign(ne, {-1, -1, -1});
  for (int e = 0; e < ne; ++e) {
    const auto& t = m.elements[e];
    for (int i = 0; i < 3; ++i) {
      const int a = t[(i + 1) % 3], b = t[(i + 2) % 3];
      const auto key = detail::edge_key(a, b);
      auto it = edge_ids.find(key);
      int id;
      if (it == edge_ids.end()) {
        id = m.n_edges();
        edge_ids.emplace(key, id);
        m.edges.push_back({std::min(a, b), std::max(a, b)});
        m.edge_elements.push_back({e, -1});
      } else {
        id = it->second;
        if (m.edge_elements[id][1] != -1)
          throw GeometryError("edge shared by more than two elements");
        m.edge_elements[id][1] = e;
      }
      m.element_edges[e][i] = id;
    }
  }

  m.boundary_edge_flags.assign(m.n_edges(), 0);
  m.boundary_segment_tags.assign(m.n_edges(), -1);
  for (int g = 0; g < m.n_edges(); ++g) {
    if (m.edge_elements[g][1] != -1) continue;
    m.boundary_edge_flags[g] = 1;
    int tag = 0;
    if (boundary_polygon) {
      const auto& poly = *boundary_polygon;
      const Vec2 pa = m.vertices[m.edges[g][0]];
      const Vec2 pb = m.vertices[m.edges[g][1]];
      tag = -1;
      for (std::size_t s = 0; s < poly.size(); ++s) {
        const Vec2 qa = poly[s], qb = poly[(s + 1) % poly.size()];
        if (detail::point_on_segment(qa, qb, pa, 1e-10) &&
            detail::point_on_segment(qa, qb, pb, 1e-10)) {
          tag = static_cast<int>(s);
          break;
        }
      }
      if (tag < 0)
        throw GeometryError("boundary edge not on the domain polygon");
    }
    m.boundary_segment_tags[g] = tag;
  }

  m.element_neighbors.assign(ne, {-1, -1, -1});
  for (int e = 0; e < ne; ++e)
    for (int i = 0; i < 3; ++i) {
      const int g = m.element_edges[e][i];
      const auto& inc = m.edge_elements[g];
      m.element_neighbors[e][i] = (inc[0] == e) ? inc[1] : inc[0];
    }

  m.refinement_edge.resize(ne);
  for (int e = 0; e < ne; ++e)
    m.refinement_edge[e] =
        detail::pick_refinement_edge(m.corners(e), m.elements[e]);

  m.parent.resize(ne);
  for (int e = 0; e < ne; ++e) m.parent[e] = e;
  return m;
}

inline std::vector<Vec2> domain_polygon(const DomainSpec& d) {
  switch (d.kind) {
    case DomainSpec::Kind::unit_square:
      return {{0, 0}, {1, 0}, {1, 1}, {0, 1}};
    case DomainSpec::Kind::l_shape:
      return {{-1, -1}, {0, -1}, {0, 0}, {1, 0}, {1, 1}, {-1, 1}};
    case DomainSpec::Kind::t_shape:
      return {{-1.5, 0}, {-0.5, 0}, {-0.5, -2}, {0.5, -2},
              {0.5, 0},  {1.5, 0},  {1.5, 1},   {-1.5, 1}};
    case DomainSpec::Kind::polygon:
      return d.polygon;
  }
  throw ArgumentError("unknown domain kind");
}

inline double polygon_area(const std::vector<Vec2>& poly) {
  double twice = 0.0;
  for (std::size_t i = 0; i < poly.size(); ++i)
    twice += cross(poly[i], poly[(i + 1) % poly.size()]);
  return 0.5 * twice;
}

namespace detail {

// Criss-cross grid: each square cell split into 4 triangles via its centroid.
inline Mesh criss_cross(const std::vector<Vec2>& cell_origins, double h,
                        const std::vector<Vec2>& polygon) {
  std::vector<Vec2> vertices;
  std::map<std::pair<long long, long long>, int> index;  // snapped coordinates
  const double snap = 0.5 * h;                           // grid/centroid pitch
  auto vertex_id = [&](Vec2 p) {
    const auto key = std::make_pair(std::llround(p.x / snap * 2),
                                    std::llround(p.y / snap * 2));
    auto it = index.find(key);
    if (it != index.end()) return it->second;
    const int id = static_cast<int>(vertices.size());
    vertices.push_back(p);
    index.emplace(key, id);
    return id;
  };

  std::vector<std::array<int, 3>> elements;
  for (const Vec2 o : cell_origins) {
    const int c0 = vertex_id(o);
    const int c1 = vertex_id({o.x + h, o.y});
    const int c2 = vertex_id({o.x + h, o.y + h});
    const int c3 = vertex_id({o.x, o.y + h});
    const int ctr = vertex_id({o.x + 0.5 * h, o.y + 0.5 * h});
    elements.push_back({c0, c1, ctr});
    elements.push_back({c1, c2, ctr});
    elements.push_back({c2, c3, ctr});
    elements.push_back({c3, c0, ctr});
  }
  return make_mesh(std::move(vertices), std::move(elements), &polygon);
}

inline bool segments_intersect(Vec2 a, Vec2 b, Vec2 c, Vec2 d) {
  const double d1 = cross(b - a, c - a), d2 = cross(b - a, d - a);
  const double d3 = cross(d - c, a - c), d4 = cross(d - c, b - c);
  return ((d1 > 0) != (d2 > 0)) && ((d3 > 0) != (d4 > 0));
}

inline void require_simple_polygon(const std::vector<Vec2>& poly) {
  const std::size_t n = poly.size();
  if (n < 3) throw GeometryError("polygon needs at least 3 vertices");
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      if (j == i || (j + 1) % n == i || (i + 1) % n == j) continue;
      if (segments_intersect(poly[i], poly[(i + 1) % n], poly[j],
                             poly[(j + 1) % n]))
        throw GeometryError("polygon is not simple");
    }
}

inline Mesh ear_clip(std::vector<Vec2> poly) {
  require_simple_polygon(poly);
  if (polygon_area(poly) < 0) std::reverse(poly.begin(), poly.end());
  const std::vector<Vec2> boundary = poly;

  std::vector<int> ring(poly.size());
  for (std::size_t i = 0; i < poly.size(); ++i) ring[i] = static_cast<int>(i);
  std::vector<std::array<int, 3>> elements;
  while (ring.size() > 3) {
    bool clipped = false;
    for (std::size_t i = 0; i < ring.size(); ++i) {
      const int ia = ring[(i + ring.size() - 1) % ring.size()];
      const int ib = ring[i];
      const int ic = ring[(i + 1) % ring.size()];
      const Vec2 a = poly[ia], b = poly[ib], c = poly[ic];
      if (signed_area(a, b, c) <= 1e-14) continue;
      bool ear = true;
      for (const int other : ring) {
        if (other == ia || other == ib || other == ic) continue;
        const auto l = barycentric(a, b, c, poly[other]);
        if (l[0] > -1e-12 && l[1] > -1e-12 && l[2] > -1e-12) {
          ear = false;
          break;
        }
      }
      if (!ear) continue;
      elements.push_back({ia, ib, ic});
      ring.erase(ring.begin() + static_cast<long>(i));
      clipped = true;
      break;
    }
    if (!clipped) throw GeometryError("ear clipping failed; degenerate polygon");
  }
  elements.push_back({ring[0], ring[1], ring[2]});
  return make_mesh(std::move(poly), std::move(elements), &boundary);
}

}  // namespace detail

inline Mesh build_initial_mesh(const DomainSpec& d) {
  switch (d.kind) {
    case DomainSpec::Kind::unit_square: {
      std::vector<Vec2> cells;
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) cells.push_back({0.5 * i, 0.5 * j});
      return detail::criss_cross(cells, 0.5, domain_polygon(d));
    }
    case DomainSpec::Kind::l_shape: {
      const std::vector<Vec2> cells{{-1, -1}, {-1, 0}, {0, 0}};
      return detail::criss_cross(cells, 1.0, domain_polygon(d));
    }
    case DomainSpec::Kind::t_shape: {
      const std::vector<Vec2> cells{
          {-1.5, 0}, {-0.5, 0}, {0.5, 0}, {-0.5, -1}, {-0.5, -2}};
      return detail::criss_cross(cells, 1.0, domain_polygon(d));
    }
    case DomainSpec::Kind::polygon:
      return detail::ear_clip(d.polygon);
  }
  throw ArgumentError("unknown domain kind");
}

// ---------------------------------------------------------------------------
// Longest-edge bisection with recursive conformity closure.
// ---------------------------------------------------------------------------

namespace detail {

struct WorkingMesh {
  std::vector<Vec2> verts;
  struct El {
    std::array<int, 3> v;    // ccw
    std::array<int, 3> nbr;  // element across edge opposite vertex i, or -1
    std::array<int, 3> tag;  // boundary tag of that edge, or -1
    int root = -1;           // ancestor id in the input mesh
    int ref_edge = 0;
    bool alive = true;
    bool on_stack = false;
  };
  std::vector<El> els;

  explicit WorkingMesh(const Mesh& m) {
    verts = m.vertices;
    els.resize(m.elements.size());
    for (int e = 0; e < m.n_elements(); ++e) {
      auto& el = els[e];
      el.v = m.elements[e];
      el.nbr = m.element_neighbors[e];
      for (int i = 0; i < 3; ++i)
        el.tag[i] = m.boundary_segment_tags[m.element_edges[e][i]];
      el.root = e;
      el.ref_edge = m.refinement_edge[e];
    }
  }

  int recompute_ref_edge(int e) const {
    const auto& el = els[e];
    return pick_refinement_edge({verts[el.v[0]], verts[el.v[1]], verts[el.v[2]]},
                                el.v);
  }

  void replace_neighbor(int e, int old_nbr, int new_nbr) {
    if (e < 0) return;
    for (int i = 0; i < 3; ++i)
      if (els[e].nbr[i] == old_nbr) {
        els[e].nbr[i] = new_nbr;
        return;
      }
  }

  // Splits element t across its refinement edge; n is the neighbor across
  // that edge (-1 on the boundary) and must share it as its own refinement
  // edge so that the pair stays conforming. Returns nothing; children are
  // appended and parents marked dead.
  void bisect_across(int t, int n) {
    const int it = els[t].ref_edge;
    const int a = els[t].v[it];
    const int b = els[t].v[(it + 1) % 3];
    const int c = els[t].v[(it + 2) % 3];
    const int mid = static_cast<int>(verts.size());
    verts.push_back(0.5 * (verts[b] + verts[c]));

    const int tag_bc = els[t].tag[it];
    const int t1 = static_cast<int>(els.size());
    const int t2 = t1 + 1;
    El e1, e2;
    e1.v = {a, b, mid};
    e2.v = {a, mid, c};
    e1.root = e2.root = els[t].root;
    // child edges: opposite a -> half of (b,c); the (a,mid) edge is interior
    e1.nbr = {-1, t2, els[t].nbr[(it + 2) % 3]};
    e1.tag = {tag_bc, -1, els[t].tag[(it + 2) % 3]};
    e2.nbr = {-1, els[t].nbr[(it + 1) % 3], t1};
    e2.tag = {tag_bc, els[t].tag[(it + 1) % 3], -1};
    replace_neighbor(els[t].nbr[(it + 2) % 3], t, t1);
    replace_neighbor(els[t].nbr[(it + 1) % 3], t, t2);
    els[t].alive = false;
    els.push_back(e1);
    els.push_back(e2);

    if (n >= 0) {
      // Local index of the shared edge in n (its refinement edge in the
      // compatible case; searched explicitly so tie cycles also work).
      int in = -1;
      for (int i = 0; i < 3; ++i)
        if (els[n].nbr[i] == t) in = i;
      if (in < 0) throw GeometryError("bisection adjacency corrupted");
      const int an = els[n].v[in];
      const int n1 = static_cast<int>(els.size());
      const int n2 = n1 + 1;
      // n shares the split edge with reversed orientation: (c, b) locally.
      El f1, f2;
      f1.v = {an, c, mid};
      f2.v = {an, mid, b};
      f1.root = f2.root = els[n].root;
      f1.nbr = {t2, n2, els[n].nbr[(in + 2) % 3]};
      f1.tag = {tag_bc, -1, els[n].tag[(in + 2) % 3]};
      f2.nbr = {t1, els[n].nbr[(in + 1) % 3], n1};
      f2.tag = {tag_bc, els[n].tag[(in + 1) % 3], -1};
      replace_neighbor(els[n].nbr[(in + 2) % 3], n, n1);
      replace_neighbor(els[n].nbr[(in + 1) % 3], n, n2);
      els[n].alive = false;
      els.push_back(f1);
      els.push_back(f2);
      els[t1].nbr[0] = n2;
      els[t2].nbr[0] = n1;
    }
    for (int e : {t1, t2}) els[e].ref_edge = recompute_ref_edge(e);
    if (n >= 0)
      for (std::size_t e = els.size() - 2; e < els.size(); ++e)
        els[e].ref_edge = recompute_ref_edge(static_cast<int>(e));
  }

  // Classic recursive longest-edge refinement driven by an explicit stack:
  // propagate to the neighbor until the shared edge is the refinement edge
  // of both (or boundary), then split the terminal pair.
  void refine_once(int k) {
    if (!els[k].alive) return;  // already split by an earlier closure
    std::vector<int> stack{k};
    els[k].on_stack = true;
    while (!stack.empty()) {
      const int t = stack.back();
      if (!els[t].alive) {
        els[t].on_stack = false;
        stack.pop_back();
        continue;
      }
      const int n = els[t].nbr[els[t].ref_edge];
      const bool compatible =
          n < 0 || els[n].nbr[els[n].ref_edge] == t || els[n].on_stack;
      if (compatible) {
        // els[n].on_stack implies a tie cycle; split across the shared edge.
        bisect_across(t, n);
        els[t].on_stack = false;
        stack.pop_back();
      } else {
        els[n].on_stack = true;
        stack.push_back(n);
      }
    }
  }
};

}  // namespace detail

/// Bisects every marked element at least once across its longest edge and
/// recursively refines neighbors until the mesh is conforming again.
/// parent[] of the result maps each element to its ancestor in `mesh`.
inline Mesh bisect(const Mesh& mesh, std::span<const int> marked) {
  detail::WorkingMesh w(mesh);
  std::vector<int> ids(marked.begin(), marked.end());
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  for (const int k : ids) {
    if (k < 0 || k >= mesh.n_elements())
      throw ArgumentError("marked element id out of range");
    w.refine_once(k);
  }

  std::vector<std::array<int, 3>> elements;
  std::vector<int> roots;
  std::vector<std::array<int, 3>> tags;
  for (const auto& el : w.els) {
    if (!el.alive) continue;
    elements.push_back(el.v);
    roots.push_back(el.root);
    tags.push_back(el.tag);
  }

  Mesh out = make_mesh(std::move(w.verts), std::move(elements));
  out.parent = std::move(roots);
  // Boundary tags propagate through the split bookkeeping, not geometry.
  for (int e = 0; e < out.n_elements(); ++e)
    for (int i = 0; i < 3; ++i) {
      const int g = out.element_edges[e][i];
      if (out.boundary_edge_flags[g]) out.boundary_segment_tags[g] = tags[e][i];
    }
  return out;
}

inline Mesh bisect(const Mesh& mesh, const std::vector<int>& marked) {
  return bisect(mesh, std::span<const int>(marked));
}

inline Mesh uniform_bisect(const Mesh& mesh, int rounds = 1) {
  Mesh m = mesh;
  for (int r = 0; r < rounds; ++r) {
    std::vector<int> all(m.n_elements());
    for (int e = 0; e < m.n_elements(); ++e) all[e] = e;
    m = bisect(m, all);
  }
  return m;
}

// ---------------------------------------------------------------------------
// Queries
// ---------------------------------------------------------------------------

/// All elements whose closed triangle contains x (barycentric tolerance).
inline std::vector<int> locate_point(const Mesh& mesh, Vec2 x,
                                     double tol = 1e-12) {
  std::vector<int> hits;
  for (int e = 0; e < mesh.n_elements(); ++e) {
    const auto c = mesh.corners(e);
    const auto l = barycentric(c[0], c[1], c[2], x);
    if (l[0] >= -tol && l[1] >= -tol && l[2] >= -tol) hits.push_back(e);
  }
  return hits;
}

/// Uniform-grid point locator for repeated queries on a fixed mesh.
class PointLocator {
 public:
  explicit PointLocator(const Mesh& mesh) : mesh_(&mesh) {
    lo_ = hi_ = mesh.vertices.at(0);
    for (const Vec2 v : mesh.vertices) {
      lo_.x = std::min(lo_.x, v.x);
      lo_.y = std::min(lo_.y, v.y);
      hi_.x = std::max(hi_.x, v.x);
      hi_.y = std::max(hi_.y, v.y);
    }
    n_ = std::max(1, static_cast<int>(std::sqrt(mesh.n_elements() / 2.0)));
    cells_.assign(static_cast<std::size_t>(n_) * n_, {});
    for (int e = 0; e < mesh.n_elements(); ++e) {
      const auto c = mesh.corners(e);
      const auto [i0, j0] = cell_of({std::min({c[0].x, c[1].x, c[2].x}),
                                     std::min({c[0].y, c[1].y, c[2].y})});
      const auto [i1, j1] = cell_of({std::max({c[0].x, c[1].x, c[2].x}),
                                     std::max({c[0].y, c[1].y, c[2].y})});
      for (int i = i0; i <= i1; ++i)
        for (int j = j0; j <= j1; ++j)
          cells_[static_cast<std::size_t>(j) * n_ + i].push_back(e);
    }
  }

  /// One element containing x, or -1. Prefers strict containment.
  int find(Vec2 x, double tol = 1e-10) const {
    const auto [i, j] = cell_of(x);
    for (const int e : cells_[static_cast<std::size_t>(j) * n_ + i]) {
      const auto c = mesh_->corners(e);
      const auto l = barycentric(c[0], c[1], c[2], x);
      if (l[0] >= -tol && l[1] >= -tol && l[2] >= -tol) return e;
    }
    // Fall back to a global scan (points marginally outside all cells).
    for (int e = 0; e < mesh_->n_elements(); ++e) {
      const auto c = mesh_->corners(e);
      const auto l = barycentric(c[0], c[1], c[2], x);
      if (l[0] >= -tol && l[1] >= -tol && l[2] >= -tol) return e;
    }
    return -1;
  }

 private:
  std::pair<int, int> cell_of(Vec2 p) const {
    const double fx = (p.x - lo_.x) / std::max(hi_.x - lo_.x, 1e-300);
    const double fy = (p.y - lo_.y) / std::max(hi_.y - lo_.y, 1e-300);
    const int i = std::clamp(static_cast<int>(fx * n_), 0, n_ - 1);
    const int j = std::clamp(static_cast<int>(fy * n_), 0, n_ - 1);
    return {i, j};
  }

  const Mesh* mesh_;
  Vec2 lo_, hi_;
  int n_ = 1;
  std::vector<std::vector<int>> cells_;
};

struct Patches {
  std::vector<int> edge_neighbors;    // shares an interior side with K (+K)
  std::vector<int> vertex_neighbors;  // shares at least a vertex with K (+K)
};

inline Patches patches(const Mesh& mesh, int K) {
  if (K < 0 || K >= mesh.n_elements())
    throw ArgumentError("patches: element id out of range");
  Patches p;
  p.edge_neighbors.push_back(K);
  for (int i = 0; i < 3; ++i) {
    const int g = mesh.element_edges[K][i];
    if (mesh.boundary_edge_flags[g]) continue;
    const int n = mesh.element_neighbors[K][i];
    if (n >= 0) p.edge_neighbors.push_back(n);
  }
  std::sort(p.edge_neighbors.begin(), p.edge_neighbors.end());

  const auto& tk = mesh.elements[K];
  for (int e = 0; e < mesh.n_elements(); ++e) {
    const auto& te = mesh.elements[e];
    bool shares = false;
    for (int i = 0; i < 3 && !shares; ++i)
      for (int j = 0; j < 3; ++j)
        if (te[i] == tk[j]) {
          shares = true;
          break;
        }
    if (shares) p.vertex_neighbors.push_back(e);
  }
  return p;
}

/// D_K: the farthest distance from the source point to the closed triangle;
/// for a convex function of x the maximum sits at a vertex.
inline double local_distance(Vec2 a, Vec2 b, Vec2 c, Vec2 z) {
  return std::max({dist(a, z), dist(b, z), dist(c, z)});
}

inline double local_distance(const Mesh& mesh, int K, Vec2 z) {
  const auto c = mesh.corners(K);
  return local_distance(c[0], c[1], c[2], z);
}

/// D_{K,Z}: minimum of the local distances over a set of source points.
inline double multi_source_distance(Vec2 a, Vec2 b, Vec2 c,
                                    std::span<const Vec2> Z) {
  if (Z.empty()) throw ArgumentError("multi_source_distance: empty source set");
  double best = local_distance(a, b, c, Z[0]);
  for (std::size_t i = 1; i < Z.size(); ++i)
    best = std::min(best, local_distance(a, b, c, Z[i]));
  return best;
}

inline double multi_source_distance(const Mesh& mesh, int K,
                                    std::span<const Vec2> Z) {
  const auto c = mesh.corners(K);
  return multi_source_distance(c[0], c[1], c[2], Z);
}

inline double mesh_area(const Mesh& mesh) {
  double s = 0.0;
  for (int e = 0; e < mesh.n_elements(); ++e) s += mesh.area(e);
  return s;
}

/// Structural conformity checks; throws GeometryError on violation.
inline void validate_mesh(const Mesh& mesh) {
  for (int e = 0; e < mesh.n_elements(); ++e)
    if (mesh.area(e) <= 0.0) throw GeometryError("non-positive element area");
  for (int g = 0; g < mesh.n_edges(); ++g) {
    const int count = (mesh.edge_elements[g][0] >= 0 ? 1 : 0) +
                      (mesh.edge_elements[g][1] >= 0 ? 1 : 0);
    if (mesh.boundary_edge_flags[g] ? count != 1 : count != 2)
      throw GeometryError("edge incidence violates conformity");
  }
  const long euler = static_cast<long>(mesh.n_vertices()) - mesh.n_edges() +
                     mesh.n_elements();
  if (euler != 1)
    throw GeometryError("Euler relation V-E+T=1 violated: " +
                        std::to_string(euler));
}

// ---------------------------------------------------------------------------
// Plain-text dump (test fixtures)
// ---------------------------------------------------------------------------

inline std::string mesh_to_text(const Mesh& mesh) {
  std::ostringstream os;
  os.precision(17);
  os << "vertices " << mesh.n_vertices() << "\n";
  for (const Vec2 v : mesh.vertices) os << v.x << " " << v.y << "\n";
  os << "triangles " << mesh.n_elements() << "\n";
  for (const auto& t : mesh.elements)
    os << t[0] << " " << t[1] << " " << t[2] << "\n";
  return os.str();
}

inline Mesh mesh_from_text(std::istream& is) {
  std::string word;
  int nv = 0, ne = 0;
  if (!(is >> word >> nv) || word != "vertices")
    throw IoError("mesh text: expected 'vertices <count>'");
  std::vector<Vec2> vertices(nv);
  for (auto& v : vertices)
    if (!(is >> v.x >> v.y)) throw IoError("mesh text: bad vertex");
  if (!(is >> word >> ne) || word != "triangles")
    throw IoError("mesh text: expected 'triangles <count>'");
  std::vector<std::array<int, 3>> elements(ne);
  for (auto& t : elements)
    if (!(is >> t[0] >> t[1] >> t[2])) throw IoError("mesh text: bad triangle");
  return make_mesh(std::move(vertices), std::move(elements));
}

inline Mesh mesh_from_text(const std::string& text) {
  std::istringstream is(text);
  return mesh_from_text(is);
}

}  // namespace bdfem
