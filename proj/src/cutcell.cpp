#include "stfem/cutcell.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "stfem/gauss.hpp"

namespace stfem {

namespace {

// Vertex values within 1e-12*h of zero are perturbed outward: they count
// as exterior (+0.0), so interfaces that coincide with cell faces produce
// no degenerate cuts. Snapping to +0.0 rather than +tol keeps the edge
// crossings of exactly-touching interfaces bit-exact.
double snap(double phi, double tol) { return std::abs(phi) < tol ? +0.0 : phi; }

struct CellSamples {
  std::array<double, 4> corner{};
  double center = 0.0;
  int n_corners = 2;
  bool all_negative = true;
  bool all_positive = true;
};

CellSamples sample_cell(const CartesianMesh& mesh, int cell, const LevelSetField& ls, double t) {
  const Coord lo = mesh.cell_lo(cell), hi = mesh.cell_hi(cell);
  const double tol = 1e-12 * mesh.max_h();
  CellSamples s;
  auto take = [&](double v) {
    if (!std::isfinite(v)) throw std::runtime_error("level set evaluated to a non-finite value");
    return snap(v, tol);
  };
  if (mesh.dim == 1) {
    s.n_corners = 2;
    s.corner[0] = take(ls.value({lo[0], 0.0}, t));
    s.corner[1] = take(ls.value({hi[0], 0.0}, t));
  } else {
    s.n_corners = 4;
    s.corner[0] = take(ls.value({lo[0], lo[1]}, t));
    s.corner[1] = take(ls.value({hi[0], lo[1]}, t));
    s.corner[2] = take(ls.value({lo[0], hi[1]}, t));
    s.corner[3] = take(ls.value({hi[0], hi[1]}, t));
    s.center = take(ls.value({0.5 * (lo[0] + hi[0]), 0.5 * (lo[1] + hi[1])}, t));
    s.all_negative = s.center < 0.0;
    s.all_positive = s.center >= 0.0;
  }
  for (int i = 0; i < s.n_corners; ++i) {
    s.all_negative = s.all_negative && s.corner[i] < 0.0;
    s.all_positive = s.all_positive && s.corner[i] >= 0.0;
  }
  return s;
}

Coord edge_cut(const Coord& a, const Coord& b, double fa, double fb) {
  const double s = fa / (fa - fb);
  return {a[0] + s * (b[0] - a[0]), a[1] + s * (b[1] - a[1])};
}

double tri_signed_area(const Coord& a, const Coord& b, const Coord& c) {
  return 0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]));
}

void push_triangle(SubTriangulation& st, Coord a, Coord b, Coord c, double area_tol) {
  const double sa = tri_signed_area(a, b, c);
  if (std::abs(sa) < area_tol) return;
  if (sa < 0) std::swap(b, c);
  st.inside.push_back(Simplex{{a, b, c}});
  st.inside_measure += std::abs(sa);
}

// Clip one linear-interpolated triangle against {phi < 0}. Vertex values
// are snapped, hence never exactly zero.
void clip_triangle(SubTriangulation& st, const std::array<Coord, 3>& v,
                   const std::array<double, 3>& f, double area_tol, double len_tol) {
  const bool n0 = f[0] < 0, n1 = f[1] < 0, n2 = f[2] < 0;
  const int n_neg = int(n0) + int(n1) + int(n2);
  if (n_neg == 0) return;
  if (n_neg == 3) {
    push_triangle(st, v[0], v[1], v[2], area_tol);
    return;
  }
  // order indices so that i carries the minority sign
  int i, j, k;
  if (n_neg == 1) {
    i = n0 ? 0 : (n1 ? 1 : 2);
  } else {
    i = !n0 ? 0 : (!n1 ? 1 : 2);
  }
  j = (i + 1) % 3;
  k = (i + 2) % 3;
  const Coord cij = edge_cut(v[i], v[j], f[i], f[j]);
  const Coord cik = edge_cut(v[i], v[k], f[i], f[k]);
  if (n_neg == 1) {
    push_triangle(st, v[i], cij, cik, area_tol);
  } else {
    push_triangle(st, v[j], v[k], cik, area_tol);
    push_triangle(st, v[j], cik, cij, area_tol);
  }
  // interface segment with the constant gradient of the linear interpolant
  const double e1x = v[1][0] - v[0][0], e1y = v[1][1] - v[0][1];
  const double e2x = v[2][0] - v[0][0], e2y = v[2][1] - v[0][1];
  const double det = e1x * e2y - e1y * e2x;
  const double r1 = f[1] - f[0], r2 = f[2] - f[0];
  Coord g{(e2y * r1 - e1y * r2) / det, (-e2x * r1 + e1x * r2) / det};
  const double gn = std::hypot(g[0], g[1]);
  const double seg = std::hypot(cij[0] - cik[0], cij[1] - cik[1]);
  if (seg < len_tol || gn == 0.0) return;
  st.facets.push_back(InterfaceFacet{{cij, cik}, {g[0] / gn, g[1] / gn}});
}

CutQuadrature tensor_rule(const CartesianMesh& mesh, int cell, int order) {
  const Rule1D g = gauss_legendre(gauss_count_for_degree(order));
  const Coord lo = mesh.cell_lo(cell);
  CutQuadrature q;
  if (mesh.dim == 1) {
    for (int i = 0; i < g.size(); ++i) {
      q.points.push_back({lo[0] + g.x[i] * mesh.h[0], 0.0});
      q.weights.push_back(g.w[i] * mesh.h[0]);
    }
  } else {
    for (int j = 0; j < g.size(); ++j)
      for (int i = 0; i < g.size(); ++i) {
        q.points.push_back({lo[0] + g.x[i] * mesh.h[0], lo[1] + g.x[j] * mesh.h[1]});
        q.weights.push_back(g.w[i] * g.w[j] * mesh.h[0] * mesh.h[1]);
      }
  }
  return q;
}

void append_triangle_rule(CutQuadrature& q, const Simplex& s, const Rule1D& gj, const Rule1D& gl) {
  const Coord &a = s.v[0], &b = s.v[1], &c = s.v[2];
  const double area2 = std::abs((b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]));
  for (int i = 0; i < gj.size(); ++i) {
    const double u = gj.x[i];
    for (int j = 0; j < gl.size(); ++j) {
      const double v = gl.x[j] * (1.0 - u);
      q.points.push_back({a[0] + u * (b[0] - a[0]) + v * (c[0] - a[0]),
                          a[1] + u * (b[1] - a[1]) + v * (c[1] - a[1])});
      q.weights.push_back(area2 * gj.w[i] * gl.w[j]);
    }
  }
}

// Volume rule shared by cut_cell_quadrature and spacetime_quadrature;
// empty rule when the cell is exterior at t. Fractions within 1e-9 of 0
// or 1 are treated as exactly exterior/interior, matching in_fraction and
// the classification tie rule.
CutQuadrature volume_rule(const CartesianMesh& mesh, int cell, const LevelSetField& ls, double t,
                          int order) {
  const CellSamples s = sample_cell(mesh, cell, ls, t);
  if (s.all_positive) return {};
  if (s.all_negative) return tensor_rule(mesh, cell, order);
  const SubTriangulation st = subtriangulate(mesh, cell, ls, t);
  const double frac = st.inside_measure / mesh.cell_volume();
  if (frac < 1e-9) return {};
  if (frac > 1.0 - 1e-9) return tensor_rule(mesh, cell, order);
  CutQuadrature q;
  if (mesh.dim == 1) {
    const Rule1D g = gauss_legendre(gauss_count_for_degree(order));
    for (const auto& seg : st.inside) {
      const double x0 = seg.v[0][0], x1 = seg.v[1][0];
      for (int i = 0; i < g.size(); ++i) {
        q.points.push_back({x0 + g.x[i] * (x1 - x0), 0.0});
        q.weights.push_back(g.w[i] * (x1 - x0));
      }
    }
  } else {
    const int n = gauss_count_for_degree(order);
    const Rule1D gj = gauss_jacobi10(n), gl = gauss_legendre(n);
    for (const auto& tri : st.inside) append_triangle_rule(q, tri, gj, gl);
  }
  return q;
}

}  // namespace

double CutQuadrature::total_weight() const {
  double s = 0.0;
  for (double w : weights) s += w;
  return s;
}

double Simplex::measure(int dim) const {
  if (dim == 1) return std::abs(v[1][0] - v[0][0]);
  return std::abs(tri_signed_area(v[0], v[1], v[2]));
}

double InterfaceFacet::measure(int dim) const {
  if (dim == 1) return 1.0;
  return std::hypot(v[1][0] - v[0][0], v[1][1] - v[0][1]);
}

SubTriangulation subtriangulate(const CartesianMesh& mesh, int cell, const LevelSetField& ls,
                                double t) {
  if (!mesh.valid_cell(cell)) throw std::invalid_argument("subtriangulate: invalid cell id");
  const CellSamples s = sample_cell(mesh, cell, ls, t);
  const Coord lo = mesh.cell_lo(cell), hi = mesh.cell_hi(cell);
  SubTriangulation st;
  if (mesh.dim == 1) {
    const double f0 = s.corner[0], f1 = s.corner[1];
    if (f0 < 0 && f1 < 0) {
      st.inside.push_back(Simplex{{Coord{lo[0], 0.0}, Coord{hi[0], 0.0}, Coord{}}});
      st.inside_measure = hi[0] - lo[0];
    } else if ((f0 < 0) != (f1 < 0)) {
      const double xc = lo[0] + f0 / (f0 - f1) * (hi[0] - lo[0]);
      const double nrm = f1 > f0 ? 1.0 : -1.0;
      if (f0 < 0) {
        st.inside.push_back(Simplex{{Coord{lo[0], 0.0}, Coord{xc, 0.0}, Coord{}}});
        st.inside_measure = xc - lo[0];
      } else {
        st.inside.push_back(Simplex{{Coord{xc, 0.0}, Coord{hi[0], 0.0}, Coord{}}});
        st.inside_measure = hi[0] - xc;
      }
      st.facets.push_back(InterfaceFacet{{Coord{xc, 0.0}, Coord{}}, Coord{nrm, 0.0}});
    }
    return st;
  }
  // 2D: fan of four triangles around the centre sample, each clipped by the
  // linear interpolant of its vertex values (unambiguous per triangle).
  const Coord c00{lo[0], lo[1]}, c10{hi[0], lo[1]}, c01{lo[0], hi[1]}, c11{hi[0], hi[1]};
  const Coord ctr{0.5 * (lo[0] + hi[0]), 0.5 * (lo[1] + hi[1])};
  const double area_tol = 1e-14 * mesh.cell_volume();
  const double len_tol = 1e-13 * mesh.max_h();
  const std::array<std::array<Coord, 3>, 4> tris{{{c00, c10, ctr}, {c10, c11, ctr}, {c11, c01, ctr}, {c01, c00, ctr}}};
  const std::array<std::array<double, 3>, 4> vals{{{s.corner[0], s.corner[1], s.center},
                                                   {s.corner[1], s.corner[3], s.center},
                                                   {s.corner[3], s.corner[2], s.center},
                                                   {s.corner[2], s.corner[0], s.center}}};
  for (int k = 0; k < 4; ++k) clip_triangle(st, tris[k], vals[k], area_tol, len_tol);
  return st;
}

double in_fraction(const CartesianMesh& mesh, int cell, const LevelSetField& ls, double t) {
  const CellSamples s = sample_cell(mesh, cell, ls, t);
  if (s.all_positive) return 0.0;
  if (s.all_negative) return 1.0;
  const SubTriangulation st = subtriangulate(mesh, cell, ls, t);
  double f = st.inside_measure / mesh.cell_volume();
  if (f > 1.0 - 1e-9) f = 1.0;
  if (f < 1e-9) f = 0.0;
  return f;
}

SlabClassification classify_slab(const CartesianMesh& mesh, const LevelSetField& ls, double t0,
                                 double t1, int n_time_samples, double eta0, int slab_index) {
  if (n_time_samples < 2) throw std::invalid_argument("classify_slab: need n_time_samples >= 2");
  if (!(eta0 > 0.0 && eta0 <= 1.0)) throw std::invalid_argument("classify_slab: eta0 must be in (0,1]");
  if (!(t1 > t0)) throw std::invalid_argument("classify_slab: empty slab");

  SlabClassification cls;
  cls.slab_index = slab_index;
  cls.t_begin = t0;
  cls.t_end = t1;
  cls.eta0 = eta0;
  cls.sample_times.push_back(t0);
  if (n_time_samples > 2) {
    const Rule1D g = gauss_legendre(n_time_samples - 2);
    for (double xi : g.x) cls.sample_times.push_back(t0 + xi * (t1 - t0));
  }
  cls.sample_times.push_back(t1);
  std::sort(cls.sample_times.begin(), cls.sample_times.end());

  const int nc = mesh.num_cells();
  cls.status.resize(nc);
  cls.eta.assign(nc, 0.0);
  cls.well_posed.assign(nc, 0);
  int n_well_posed = 0;
  for (int c = 0; c < nc; ++c) {
    double min_frac = 1.0, max_frac = 0.0;
    for (double ts : cls.sample_times) {
      const double f = in_fraction(mesh, c, ls, ts);
      min_frac = std::min(min_frac, f);
      max_frac = std::max(max_frac, f);
    }
    if (max_frac == 0.0) {
      cls.status[c] = CellStatus::Exterior;
    } else {
      cls.status[c] = (min_frac == 1.0) ? CellStatus::Interior : CellStatus::Cut;
      cls.eta[c] = min_frac;
      cls.well_posed[c] = min_frac >= eta0 ? 1 : 0;
      if (cls.well_posed[c]) ++n_well_posed;
      cls.active_cells.push_back(c);
    }
  }
  if (n_well_posed == 0)
    throw std::runtime_error("classify_slab: no well-posed cell in slab " +
                             std::to_string(slab_index));
  return cls;
}

CutQuadrature cut_cell_quadrature(const CartesianMesh& mesh, int cell, const LevelSetField& ls,
                                  double t, int order) {
  if (!mesh.valid_cell(cell)) throw std::invalid_argument("cut_cell_quadrature: invalid cell id");
  CutQuadrature q = volume_rule(mesh, cell, ls, t, order);
  if (q.points.empty())
    throw std::invalid_argument("cut_cell_quadrature: cell " + std::to_string(cell) +
                                " is exterior at t = " + std::to_string(t));
  return q;
}

CutQuadrature cell_volume_rule(const CartesianMesh& mesh, int cell, const LevelSetField& ls,
                               double t, int order) {
  return volume_rule(mesh, cell, ls, t, order);
}

CutQuadrature full_cell_rule(const CartesianMesh& mesh, int cell, int order) {
  return tensor_rule(mesh, cell, order);
}

CutQuadrature cell_interface_rule(const CartesianMesh& mesh, int cell, const LevelSetField& ls,
                                  double t, int order) {
  const CellSamples s = sample_cell(mesh, cell, ls, t);
  if (s.all_positive || s.all_negative) return {};
  const SubTriangulation st = subtriangulate(mesh, cell, ls, t);
  const double frac = st.inside_measure / mesh.cell_volume();
  if (frac < 1e-9 || frac > 1.0 - 1e-9) return {};
  CutQuadrature q;
  if (mesh.dim == 1) {
    for (const auto& f : st.facets) {
      q.points.push_back(f.v[0]);
      q.weights.push_back(1.0);
      q.normals.push_back(f.normal);
    }
    return q;
  }
  const Rule1D g = gauss_legendre(gauss_count_for_degree(order));
  for (const auto& f : st.facets) {
    const double len = f.measure(2);
    for (int i = 0; i < g.size(); ++i) {
      q.points.push_back({f.v[0][0] + g.x[i] * (f.v[1][0] - f.v[0][0]),
                          f.v[0][1] + g.x[i] * (f.v[1][1] - f.v[0][1])});
      q.weights.push_back(g.w[i] * len);
      q.normals.push_back(f.normal);
    }
  }
  return q;
}

CutQuadrature interface_quadrature(const CartesianMesh& mesh, int cell, const LevelSetField& ls,
                                   double t, int order) {
  if (!mesh.valid_cell(cell)) throw std::invalid_argument("interface_quadrature: invalid cell id");
  CutQuadrature q = cell_interface_rule(mesh, cell, ls, t, order);
  if (q.points.empty())
    throw std::invalid_argument("interface_quadrature: cell " + std::to_string(cell) +
                                " is not cut at t = " + std::to_string(t));
  return q;
}

std::vector<TimeSlice> spacetime_quadrature(const CartesianMesh& mesh, int cell,
                                            const LevelSetField& ls, double t0, double t1,
                                            int spatial_order, int temporal_order) {
  if (!(t1 > t0)) throw std::invalid_argument("spacetime_quadrature: empty slab");
  const Rule1D g = gauss_legendre(gauss_count_for_degree(temporal_order));
  std::vector<TimeSlice> slices;
  slices.reserve(g.size());
  const double tau = t1 - t0;
  for (int k = 0; k < g.size(); ++k) {
    TimeSlice s;
    s.t = t0 + g.x[k] * tau;
    s.weight = g.w[k] * tau;
    s.rule = volume_rule(mesh, cell, ls, s.t, spatial_order);
    slices.push_back(std::move(s));
  }
  return slices;
}

int inside_components(const SubTriangulation& st, int dim, std::vector<int>* labels) {
  const int n = static_cast<int>(st.inside.size());
  std::vector<int> lab(n, -1);
  if (n == 0) {
    if (labels) *labels = lab;
    return 0;
  }
  double scale = 0.0;
  for (const auto& s : st.inside)
    for (int v = 0; v < (dim == 1 ? 2 : 3); ++v)
      scale = std::max({scale, std::abs(s.v[v][0]), std::abs(s.v[v][1])});
  const double tol = 1e-10 * (1.0 + scale);
  auto same = [&](const Coord& a, const Coord& b) {
    return std::abs(a[0] - b[0]) <= tol && std::abs(a[1] - b[1]) <= tol;
  };
  auto adjacent = [&](const Simplex& a, const Simplex& b) {
    int shared = 0;
    const int nv = dim == 1 ? 2 : 3;
    for (int i = 0; i < nv; ++i)
      for (int j = 0; j < nv; ++j)
        if (same(a.v[i], b.v[j])) {
          ++shared;
          break;
        }
    return shared >= dim;  // shared edge (2D) / shared endpoint (1D)
  };
  int n_comp = 0;
  for (int seed = 0; seed < n; ++seed) {
    if (lab[seed] >= 0) continue;
    std::vector<int> stack{seed};
    lab[seed] = n_comp;
    while (!stack.empty()) {
      const int c = stack.back();
      stack.pop_back();
      for (int o = 0; o < n; ++o)
        if (lab[o] < 0 && adjacent(st.inside[c], st.inside[o])) {
          lab[o] = n_comp;
          stack.push_back(o);
        }
    }
    ++n_comp;
  }
  if (labels) *labels = lab;
  return n_comp;
}

}  // namespace stfem
