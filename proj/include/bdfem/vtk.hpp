#pragma once

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "bdfem/errors.hpp"
#include "bdfem/estimator.hpp"
#include "bdfem/mesh.hpp"
#include "bdfem/solver.hpp"

namespace bdfem {

/// Legacy ASCII VTK unstructured grid: triangle cells, velocity sampled at
/// the vertices (edge and bubble values are dropped), vertex pressure, and
/// the per-element indicator as cell data.
inline void write_vtk(std::ostream& os, const Mesh& mesh,
                      const SolutionPair* sol, const IndicatorField* field) {
  os << "# vtk DataFile Version 3.0\n";
  os << "bdfem output\n";
  os << "ASCII\n";
  os << "DATASET UNSTRUCTURED_GRID\n";
  os.precision(17);
  os << "POINTS " << mesh.n_vertices() << " double\n";
  for (const Vec2 v : mesh.vertices) os << v.x << " " << v.y << " 0\n";
  os << "CELLS " << mesh.n_elements() << " " << 4 * mesh.n_elements() << "\n";
  for (const auto& t : mesh.elements)
    os << "3 " << t[0] << " " << t[1] << " " << t[2] << "\n";
  os << "CELL_TYPES " << mesh.n_elements() << "\n";
  for (int e = 0; e < mesh.n_elements(); ++e) os << "5\n";

  if (sol) {
    os << "POINT_DATA " << mesh.n_vertices() << "\n";
    os << "VECTORS velocity double\n";
    for (int v = 0; v < mesh.n_vertices(); ++v)
      os << sol->u[MixedSpace::velocity_dof(v, 0)] << " "
         << sol->u[MixedSpace::velocity_dof(v, 1)] << " 0\n";
    os << "SCALARS pressure double 1\n";
    os << "LOOKUP_TABLE default\n";
    for (int v = 0; v < mesh.n_vertices(); ++v) os << sol->p[v] << "\n";
  }
  if (field) {
    os << "CELL_DATA " << mesh.n_elements() << "\n";
    os << "SCALARS indicator double 1\n";
    os << "LOOKUP_TABLE default\n";
    for (const double v : field->value) os << v << "\n";
  }
}

inline void export_vtk(const Mesh& mesh, const SolutionPair* sol,
                       const IndicatorField* field, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open '" + path + "' for writing");
  write_vtk(os, mesh, sol, field);
  if (!os) throw IoError("write to '" + path + "' failed");
}

inline void export_vtk(const Mesh& mesh, const SolutionPair& sol,
                       const IndicatorField& field, const std::string& path) {
  export_vtk(mesh, &sol, &field, path);
}

/// Parsed-back subset of a legacy VTK file, enough to check round trips.
struct VtkData {
  std::vector<Vec2> points;
  std::vector<std::array<int, 3>> cells;
  std::vector<Vec2> velocity;
  std::vector<double> pressure;
  std::vector<double> indicator;
};

inline VtkData read_vtk(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open '" + path + "'");
  VtkData data;
  std::string word;
  while (is >> word) {
    if (word == "POINTS") {
      int n;
      std::string type;
      is >> n >> type;
      data.points.resize(n);
      for (auto& p : data.points) {
        double zdrop;
        is >> p.x >> p.y >> zdrop;
      }
    } else if (word == "CELLS") {
      int n, total;
      is >> n >> total;
      data.cells.resize(n);
      for (auto& c : data.cells) {
        int k;
        is >> k >> c[0] >> c[1] >> c[2];
        if (k != 3) throw IoError("non-triangle cell in VTK file");
      }
    } else if (word == "VECTORS") {
      std::string name, type;
      is >> name >> type;
      data.velocity.resize(data.points.size());
      for (auto& v : data.velocity) {
        double zdrop;
        is >> v.x >> v.y >> zdrop;
      }
    } else if (word == "SCALARS") {
      std::string name, type;
      int comps;
      is >> name >> type >> comps;
      is >> word >> word;  // LOOKUP_TABLE default
      auto& target = name == "indicator" ? data.indicator : data.pressure;
      target.resize(name == "indicator" ? data.cells.size()
                                        : data.points.size());
      for (auto& v : target) is >> v;
    }
  }
  return data;
}

}  // namespace bdfem
