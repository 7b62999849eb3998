#include "stfem/vtk.hpp"

#include <fstream>
#include <stdexcept>

namespace stfem {

void write_vtk_triangles(const std::string& path, const TriangleSoup& soup) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("write_vtk_triangles: cannot open " + path);
  f.precision(17);
  f << "# vtk DataFile Version 3.0\n";
  f << "stfem snapshot\n";
  f << "ASCII\n";
  f << "DATASET UNSTRUCTURED_GRID\n";
  f << "POINTS " << soup.points.size() << " double\n";
  for (const auto& p : soup.points) f << p[0] << ' ' << p[1] << " 0\n";
  f << "CELLS " << soup.triangles.size() << ' ' << 4 * soup.triangles.size() << '\n';
  for (const auto& t : soup.triangles) f << "3 " << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
  f << "CELL_TYPES " << soup.triangles.size() << '\n';
  for (std::size_t i = 0; i < soup.triangles.size(); ++i) f << "5\n";
  if (!soup.point_scalars.empty()) {
    f << "POINT_DATA " << soup.points.size() << '\n';
    f << "SCALARS " << soup.scalar_name << " double 1\n";
    f << "LOOKUP_TABLE default\n";
    for (double v : soup.point_scalars) f << v << '\n';
  }
}

namespace {

void append_cell_triangles(const CartesianMesh& mesh, int cell, const LevelSetField& ls,
                           double t, std::vector<Coord>* tri_buffer) {
  tri_buffer->clear();
  const double frac = in_fraction(mesh, cell, ls, t);
  if (frac == 0.0) return;
  if (frac == 1.0) {
    const Coord lo = mesh.cell_lo(cell), hi = mesh.cell_hi(cell);
    tri_buffer->insert(tri_buffer->end(), {Coord{lo[0], lo[1]}, Coord{hi[0], lo[1]},
                                           Coord{hi[0], hi[1]}, Coord{lo[0], lo[1]},
                                           Coord{hi[0], hi[1]}, Coord{lo[0], hi[1]}});
    return;
  }
  for (const auto& s : subtriangulate(mesh, cell, ls, t).inside)
    tri_buffer->insert(tri_buffer->end(), {s.v[0], s.v[1], s.v[2]});
}

}  // namespace

TriangleSoup solution_snapshot(const AgFESpace& space, const SlabFunction& u_h,
                               const LevelSetField& ls, double t) {
  const CartesianMesh& mesh = *space.mesh;
  if (mesh.dim != 2)
    throw std::invalid_argument("solution_snapshot: snapshots are 2D only");
  TriangleSoup soup;
  std::vector<Coord> buf;
  for (int cell : space.cls.active_cells) {
    append_cell_triangles(mesh, cell, ls, t, &buf);
    for (std::size_t k = 0; k + 3 <= buf.size(); k += 3) {
      const int base = static_cast<int>(soup.points.size());
      for (int v = 0; v < 3; ++v) {
        soup.points.push_back(buf[k + v]);
        soup.point_scalars.push_back(eval_on_cell(space, u_h, cell, buf[k + v], t));
      }
      soup.triangles.push_back({base, base + 1, base + 2});
    }
  }
  return soup;
}

void write_subtriangulation_vtk(const std::string& path, const CartesianMesh& mesh,
                                const LevelSetField& ls, double t) {
  if (mesh.dim != 2)
    throw std::invalid_argument("write_subtriangulation_vtk: dumps are 2D only");
  TriangleSoup soup;
  soup.scalar_name = "cell_id";
  std::vector<Coord> buf;
  for (int cell = 0; cell < mesh.num_cells(); ++cell) {
    append_cell_triangles(mesh, cell, ls, t, &buf);
    for (std::size_t k = 0; k + 3 <= buf.size(); k += 3) {
      const int base = static_cast<int>(soup.points.size());
      for (int v = 0; v < 3; ++v) {
        soup.points.push_back(buf[k + v]);
        soup.point_scalars.push_back(cell);
      }
      soup.triangles.push_back({base, base + 1, base + 2});
    }
  }
  write_vtk_triangles(path, soup);
}

}  // namespace stfem
