#pragma once

#include <string>

#include "stfem/driver.hpp"

namespace stfem {

/// Legacy-VTK ASCII unstructured grid of triangles (2D) with one optional
/// point scalar.
struct TriangleSoup {
  std::vector<Coord> points;
  std::vector<std::array<int, 3>> triangles;
  std::vector<double> point_scalars;
  std::string scalar_name = "u";
};

void write_vtk_triangles(const std::string& path, const TriangleSoup& soup);

/// Sub-triangulated solution restricted to time t on the slab's active
/// region (interior cells split into two triangles, cut cells into their
/// inside simplices).
TriangleSoup solution_snapshot(const AgFESpace& space, const SlabFunction& u_h,
                               const LevelSetField& ls, double t);

/// Debug dump of the cut geometry at time t (triangle scalar = cell id).
void write_subtriangulation_vtk(const std::string& path, const CartesianMesh& mesh,
                                const LevelSetField& ls, double t);

}  // namespace stfem
