#include "stfem/assembly.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include "stfem/gauss.hpp"

namespace stfem {

namespace {

using Triplets = std::vector<Eigen::Triplet<double>>;

struct ExpansionView {
  const AgFESpace& sp;
  // singleton buffer for free nodes
  mutable std::pair<int, double> single;

  std::pair<const std::pair<int, double>*, int> operator()(int active_node) const {
    const int fd = sp.free_of_active[active_node];
    if (fd >= 0) {
      single = {fd, 1.0};
      return {&single, 1};
    }
    const auto& c = sp.constraints[active_node];
    return {c.data(), static_cast<int>(c.size())};
  }
};

// Scatter a local (spatial x temporal) block through the constraints into
// the reduced system. Local index layout: a * (q+1) + i.
void scatter_element(const AgFESpace& sp, const std::vector<int>& nodes, const Eigen::MatrixXd& K,
                     const Eigen::VectorXd* F, Triplets& trip, Eigen::VectorXd* rhs) {
  const int nsp = static_cast<int>(nodes.size());
  const int nt = sp.n_temporal();
  ExpansionView expand{sp, {}};
  for (int b = 0; b < nsp; ++b) {
    auto [eb, nb] = expand(nodes[b]);
    for (int kb = 0; kb < nb; ++kb) {
      const auto [fb, wb] = eb[kb];
      for (int j = 0; j < nt; ++j) {
        const int row = sp.st_dof(fb, j);
        if (F && rhs) (*rhs)[row] += wb * (*F)[b * nt + j];
        for (int a = 0; a < nsp; ++a) {
          auto [ea, na] = expand(nodes[a]);
          for (int ka = 0; ka < na; ++ka) {
            const auto [fa, wa] = ea[ka];
            const double w = wb * wa;
            for (int i = 0; i < nt; ++i) {
              const double v = K(b * nt + j, a * nt + i);
              if (v != 0.0) trip.emplace_back(row, sp.st_dof(fa, i), w * v);
            }
          }
        }
      }
    }
  }
}

double eval_or_zero(const std::function<double(const Coord&, double)>& f, const Coord& x,
                    double t) {
  return f ? f(x, t) : 0.0;
}

// Gauss points of one outer-box boundary face of a cell, with the outward
// normal of the box. The face itself is never cut (the physical domain may
// still end before the face; callers filter points by the level-set sign).
struct FaceRule {
  std::vector<Coord> points;
  std::vector<double> weights;
  Coord normal{};
};

FaceRule outer_face_rule(const CartesianMesh& mesh, int cell, int face, int order) {
  const int axis = face / 2, side = face % 2;
  const Coord lo = mesh.cell_lo(cell), hi = mesh.cell_hi(cell);
  FaceRule fr;
  fr.normal = {0.0, 0.0};
  fr.normal[axis] = side == 0 ? -1.0 : 1.0;
  const double plane = side == 0 ? lo[axis] : hi[axis];
  if (mesh.dim == 1) {
    fr.points.push_back({plane, 0.0});
    fr.weights.push_back(1.0);
    return fr;
  }
  const int tangent = 1 - axis;
  const Rule1D g = gauss_legendre(gauss_count_for_degree(order));
  for (int i = 0; i < g.size(); ++i) {
    Coord x{};
    x[axis] = plane;
    x[tangent] = lo[tangent] + g.x[i] * mesh.h[tangent];
    fr.points.push_back(x);
    fr.weights.push_back(g.w[i] * mesh.h[tangent]);
  }
  return fr;
}

// Temporal Gauss points covering the slab, weight includes tau.
std::vector<std::pair<double, double>> temporal_points(const AgFESpace& sp, int order) {
  const Rule1D g = gauss_legendre(gauss_count_for_degree(order));
  std::vector<std::pair<double, double>> out;
  const double tau = sp.t1 - sp.t0;
  for (int k = 0; k < g.size(); ++k) out.emplace_back(sp.t0 + g.x[k] * tau, g.w[k] * tau);
  return out;
}

// integral over the slab of psi_i psi_j
Eigen::MatrixXd temporal_mass(const AgFESpace& sp) {
  const int nt = sp.n_temporal();
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(nt, nt);
  double psi[3];
  for (auto [t, w] : temporal_points(sp, 2 * sp.q)) {
    sp.temporal_basis(t, psi);
    for (int i = 0; i < nt; ++i)
      for (int j = 0; j < nt; ++j) M(i, j) += w * psi[i] * psi[j];
  }
  return M;
}

void add_nitsche_matrix(Eigen::MatrixXd& K, const double* N, const Coord* G, const Coord& n,
                        double w, double beta, double mu, const double* psi, int nsp, int nt) {
  for (int b = 0; b < nsp; ++b) {
    const double gnb = n[0] * G[b][0] + n[1] * G[b][1];
    for (int a = 0; a < nsp; ++a) {
      const double gna = n[0] * G[a][0] + n[1] * G[a][1];
      const double s = beta * N[a] * N[b] - mu * (gna * N[b] + gnb * N[a]);
      for (int j = 0; j < nt; ++j)
        for (int i = 0; i < nt; ++i) K(b * nt + j, a * nt + i) += w * psi[i] * psi[j] * s;
    }
  }
}

}  // namespace

SlabSystem assemble_slab(const AgFESpace& sp, const LevelSetField& ls, const ProblemData& data,
                         const CellEval& prev, const AssemblyOptions& opt) {
  const CartesianMesh& mesh = *sp.mesh;
  const int so = opt.spatial_order > 0 ? opt.spatial_order : 2 * sp.p;
  const int to = opt.temporal_order > 0 ? opt.temporal_order : 2 * sp.q + 1;
  const int nsp = sp.n_local_spatial(), nt = sp.n_temporal(), nloc = nsp * nt;
  const double beta = data.mu * data.gamma / mesh.max_h();

  SlabSystem sys;
  sys.rhs = Eigen::VectorXd::Zero(sp.n_st_dofs());
  Triplets trip;
  trip.reserve(static_cast<std::size_t>(sp.cls.num_active()) * nloc * nloc);

  Eigen::MatrixXd K(nloc, nloc);
  Eigen::VectorXd F(nloc);
  double N[9], psi[3], dpsi[3];
  Coord G[9];

  for (std::size_t ck = 0; ck < sp.active_cell_ids.size(); ++ck) {
    const int cell = sp.active_cell_ids[ck];
    K.setZero();
    F.setZero();

    // bulk space-time terms: d_t, diffusion, convection, source
    for (const TimeSlice& slice : spacetime_quadrature(mesh, cell, ls, sp.t0, sp.t1, so, to)) {
      if (slice.rule.size() == 0) continue;
      sp.temporal_basis(slice.t, psi, dpsi);
      for (int m = 0; m < slice.rule.size(); ++m) {
        const Coord& x = slice.rule.points[m];
        const double w = slice.weight * slice.rule.weights[m];
        sp.spatial_basis(cell, x, N, G);
        const Coord conv = data.convection ? data.convection(x, slice.t) : Coord{0.0, 0.0};
        const double fval = eval_or_zero(data.source, x, slice.t);
        for (int b = 0; b < nsp; ++b) {
          for (int a = 0; a < nsp; ++a) {
            const double mass = N[a] * N[b];
            const double spatial = data.mu * (G[a][0] * G[b][0] + G[a][1] * G[b][1]) +
                                   (conv[0] * G[a][0] + conv[1] * G[a][1]) * N[b];
            for (int j = 0; j < nt; ++j)
              for (int i = 0; i < nt; ++i)
                K(b * nt + j, a * nt + i) +=
                    w * (dpsi[i] * psi[j] * mass + psi[i] * psi[j] * spatial);
          }
          for (int j = 0; j < nt; ++j) F[b * nt + j] += w * fval * N[b] * psi[j];
        }
      }
    }

    // lateral boundary: moving interface portion inside cut cells
    if (sp.cls.status[cell] == CellStatus::Cut) {
      for (auto [t, wt] : temporal_points(sp, to)) {
        const CutQuadrature iq = cell_interface_rule(mesh, cell, ls, t, so);
        if (iq.size() == 0) continue;
        sp.temporal_basis(t, psi);
        for (int m = 0; m < iq.size(); ++m) {
          const Coord& x = iq.points[m];
          const Coord& n = iq.normals[m];
          const double w = wt * iq.weights[m];
          sp.spatial_basis(cell, x, N, G);
          if (data.interface_bc == BoundaryKind::Dirichlet) {
            add_nitsche_matrix(K, N, G, n, w, beta, data.mu, psi, nsp, nt);
            const double gd = eval_or_zero(data.dirichlet, x, t);
            for (int b = 0; b < nsp; ++b) {
              const double gnb = n[0] * G[b][0] + n[1] * G[b][1];
              for (int j = 0; j < nt; ++j)
                F[b * nt + j] += w * psi[j] * (beta * N[b] - data.mu * gnb) * gd;
            }
          } else {
            const double gn = eval_or_zero(data.neumann, x, t);
            for (int b = 0; b < nsp; ++b)
              for (int j = 0; j < nt; ++j) F[b * nt + j] += w * psi[j] * gn * N[b];
          }
        }
      }
    }

    // lateral boundary: outer box faces (never cut; points outside the
    // physical domain are filtered by the level-set sign)
    for (int face = 0; face < 2 * mesh.dim; ++face) {
      if (!mesh.face_on_box_boundary(cell, face)) continue;
      const FaceRule fr = outer_face_rule(mesh, cell, face, so);
      for (auto [t, wt] : temporal_points(sp, to)) {
        sp.temporal_basis(t, psi);
        for (std::size_t m = 0; m < fr.points.size(); ++m) {
          const Coord& x = fr.points[m];
          if (ls.value(x, t) >= 0.0) continue;
          const double w = wt * fr.weights[m];
          sp.spatial_basis(cell, x, N, G);
          if (data.outer_bc == BoundaryKind::Dirichlet) {
            add_nitsche_matrix(K, N, G, fr.normal, w, beta, data.mu, psi, nsp, nt);
            const double gd = eval_or_zero(data.dirichlet, x, t);
            for (int b = 0; b < nsp; ++b) {
              const double gnb = fr.normal[0] * G[b][0] + fr.normal[1] * G[b][1];
              for (int j = 0; j < nt; ++j)
                F[b * nt + j] += w * psi[j] * (beta * N[b] - data.mu * gnb) * gd;
            }
          } else {
            const double gn = eval_or_zero(data.neumann, x, t);
            for (int b = 0; b < nsp; ++b)
              for (int j = 0; j < nt; ++j) F[b * nt + j] += w * psi[j] * gn * N[b];
          }
        }
      }
    }

    // inter-slab coupling on Omega^{n-1}: u^+ v^+ to the matrix, the known
    // u^{n-1,-} v^+ to the right-hand side
    {
      const CutQuadrature q0 = cell_volume_rule(mesh, cell, ls, sp.t0, so);
      if (q0.size() > 0) {
        sp.temporal_basis(sp.t0, psi);
        for (int m = 0; m < q0.size(); ++m) {
          const Coord& x = q0.points[m];
          const double w = q0.weights[m];
          sp.spatial_basis(cell, x, N);
          const double uprev = prev(cell, x);
          for (int b = 0; b < nsp; ++b) {
            for (int a = 0; a < nsp; ++a) {
              const double mass = N[a] * N[b];
              for (int j = 0; j < nt; ++j)
                for (int i = 0; i < nt; ++i)
                  K(b * nt + j, a * nt + i) += w * psi[i] * psi[j] * mass;
            }
            for (int j = 0; j < nt; ++j) F[b * nt + j] += w * psi[j] * uprev * N[b];
          }
        }
      }
    }

    scatter_element(sp, sp.cell_active_nodes[ck], K, &F, trip, &sys.rhs);
  }

  sys.matrix.resize(sp.n_st_dofs(), sp.n_st_dofs());
  sys.matrix.setFromTriplets(trip.begin(), trip.end());
  return sys;
}

SpMat assemble_mass(const AgFESpace& sp, const LevelSetField& ls, const AssemblyOptions& opt) {
  const CartesianMesh& mesh = *sp.mesh;
  const int so = opt.spatial_order > 0 ? opt.spatial_order : 2 * sp.p;
  const int to = opt.temporal_order > 0 ? opt.temporal_order : 2 * sp.q + 1;
  const int nsp = sp.n_local_spatial(), nt = sp.n_temporal(), nloc = nsp * nt;

  Triplets trip;
  trip.reserve(static_cast<std::size_t>(sp.cls.num_active()) * nloc * nloc);
  Eigen::MatrixXd K(nloc, nloc);
  double N[9], psi[3];

  for (std::size_t ck = 0; ck < sp.active_cell_ids.size(); ++ck) {
    const int cell = sp.active_cell_ids[ck];
    K.setZero();
    for (const TimeSlice& slice : spacetime_quadrature(mesh, cell, ls, sp.t0, sp.t1, so, to)) {
      if (slice.rule.size() == 0) continue;
      sp.temporal_basis(slice.t, psi);
      for (int m = 0; m < slice.rule.size(); ++m) {
        const double w = slice.weight * slice.rule.weights[m];
        sp.spatial_basis(cell, slice.rule.points[m], N);
        for (int b = 0; b < nsp; ++b)
          for (int a = 0; a < nsp; ++a) {
            const double mass = N[a] * N[b];
            for (int j = 0; j < nt; ++j)
              for (int i = 0; i < nt; ++i) K(b * nt + j, a * nt + i) += w * psi[i] * psi[j] * mass;
          }
      }
    }
    scatter_element(sp, sp.cell_active_nodes[ck], K, nullptr, trip, nullptr);
  }
  SpMat M(sp.n_st_dofs(), sp.n_st_dofs());
  M.setFromTriplets(trip.begin(), trip.end());
  return M;
}

SpMat assemble_stiffness(const AgFESpace& sp, const LevelSetField& ls, const ProblemData& data,
                         const AssemblyOptions& opt) {
  const CartesianMesh& mesh = *sp.mesh;
  const int so = opt.spatial_order > 0 ? opt.spatial_order : 2 * sp.p;
  const int to = opt.temporal_order > 0 ? opt.temporal_order : 2 * sp.q + 1;
  const int nsp = sp.n_local_spatial(), nt = sp.n_temporal(), nloc = nsp * nt;
  const double beta = data.mu * data.gamma / mesh.max_h();

  Triplets trip;
  trip.reserve(static_cast<std::size_t>(sp.cls.num_active()) * nloc * nloc);
  Eigen::MatrixXd K(nloc, nloc);
  double N[9], psi[3];
  Coord G[9];

  for (std::size_t ck = 0; ck < sp.active_cell_ids.size(); ++ck) {
    const int cell = sp.active_cell_ids[ck];
    K.setZero();
    for (const TimeSlice& slice : spacetime_quadrature(mesh, cell, ls, sp.t0, sp.t1, so, to)) {
      if (slice.rule.size() == 0) continue;
      sp.temporal_basis(slice.t, psi);
      for (int m = 0; m < slice.rule.size(); ++m) {
        const double w = slice.weight * slice.rule.weights[m];
        sp.spatial_basis(cell, slice.rule.points[m], N, G);
        for (int b = 0; b < nsp; ++b)
          for (int a = 0; a < nsp; ++a) {
            const double s = data.mu * (G[a][0] * G[b][0] + G[a][1] * G[b][1]);
            for (int j = 0; j < nt; ++j)
              for (int i = 0; i < nt; ++i) K(b * nt + j, a * nt + i) += w * psi[i] * psi[j] * s;
          }
      }
    }
    if (sp.cls.status[cell] == CellStatus::Cut && data.interface_bc == BoundaryKind::Dirichlet) {
      for (auto [t, wt] : temporal_points(sp, to)) {
        const CutQuadrature iq = cell_interface_rule(mesh, cell, ls, t, so);
        if (iq.size() == 0) continue;
        sp.temporal_basis(t, psi);
        for (int m = 0; m < iq.size(); ++m) {
          sp.spatial_basis(cell, iq.points[m], N, G);
          add_nitsche_matrix(K, N, G, iq.normals[m], wt * iq.weights[m], beta, data.mu, psi, nsp,
                             nt);
        }
      }
    }
    if (data.outer_bc == BoundaryKind::Dirichlet) {
      for (int face = 0; face < 2 * mesh.dim; ++face) {
        if (!mesh.face_on_box_boundary(cell, face)) continue;
        const FaceRule fr = outer_face_rule(mesh, cell, face, so);
        for (auto [t, wt] : temporal_points(sp, to)) {
          sp.temporal_basis(t, psi);
          for (std::size_t m = 0; m < fr.points.size(); ++m) {
            if (ls.value(fr.points[m], t) >= 0.0) continue;
            sp.spatial_basis(cell, fr.points[m], N, G);
            add_nitsche_matrix(K, N, G, fr.normal, wt * fr.weights[m], beta, data.mu, psi, nsp,
                               nt);
          }
        }
      }
    }
    scatter_element(sp, sp.cell_active_nodes[ck], K, nullptr, trip, nullptr);
  }
  SpMat A(sp.n_st_dofs(), sp.n_st_dofs());
  A.setFromTriplets(trip.begin(), trip.end());
  return A;
}

namespace {

// monomial basis of total degree <= p on scaled aggregate coordinates
int n_monomials(int dim, int p) { return dim == 1 ? p + 1 : (p + 1) * (p + 2) / 2; }

void monomials(int dim, int p, const Coord& xi, double* m) {
  if (dim == 1) {
    m[0] = 1.0;
    m[1] = xi[0];
    if (p == 2) m[2] = xi[0] * xi[0];
    return;
  }
  m[0] = 1.0;
  m[1] = xi[0];
  m[2] = xi[1];
  if (p == 2) {
    m[3] = xi[0] * xi[0];
    m[4] = xi[0] * xi[1];
    m[5] = xi[1] * xi[1];
  }
}

}  // namespace

SpMat ghost_penalty(const AgFESpace& sp, const SlabClassification& cls, const AggregateMap* agg,
                    GhostKind kind, double gamma_g, int i_max) {
  if (sp.aggregated)
    throw std::invalid_argument("ghost_penalty: operates on the unconstrained active space");
  const CartesianMesh& mesh = *sp.mesh;
  const int nt = sp.n_temporal();
  const Eigen::MatrixXd Mt = temporal_mass(sp);
  const double h = mesh.max_h();
  Triplets trip;
  double N[9], Nn[9];

  auto scatter_patch = [&](const std::vector<int>& patch, const Eigen::MatrixXd& Ks) {
    for (std::size_t b = 0; b < patch.size(); ++b) {
      const int fb = sp.free_of_active[patch[b]];
      for (std::size_t a = 0; a < patch.size(); ++a) {
        const int fa = sp.free_of_active[patch[a]];
        if (Ks(b, a) == 0.0) continue;
        for (int j = 0; j < nt; ++j)
          for (int i = 0; i < nt; ++i)
            trip.emplace_back(sp.st_dof(fb, j), sp.st_dof(fa, i), Ks(b, a) * Mt(i, j));
      }
    }
  };

  if (kind == GhostKind::WeakAgfem || kind == GhostKind::Bulk) {
    if (!agg) throw std::invalid_argument("ghost_penalty: this kind needs an AggregateMap");
  }

  if (kind == GhostKind::WeakAgfem) {
    // deviation from the discrete extension, integrated over whole cut cells
    const AgFESpace ag = build_space(mesh, cls, *agg, sp.p, sp.q);
    for (std::size_t ck = 0; ck < sp.active_cell_ids.size(); ++ck) {
      const int cell = sp.active_cell_ids[ck];
      if (cls.status[cell] != CellStatus::Cut) continue;
      // patch: the cell's nodes plus the root-cell nodes behind constraints
      std::vector<int> patch = sp.cell_active_nodes[ck];
      std::map<int, int> pidx;
      for (std::size_t i = 0; i < patch.size(); ++i) pidx[patch[i]] = static_cast<int>(i);
      for (int an : sp.cell_active_nodes[ck])
        if (!ag.free_flag[an])
          for (const auto& [fd, w] : ag.constraints[an]) {
            (void)w;
            const int tn = ag.active_of_free[fd];
            if (pidx.emplace(tn, static_cast<int>(patch.size())).second) patch.push_back(tn);
          }
      Eigen::MatrixXd Ks = Eigen::MatrixXd::Zero(patch.size(), patch.size());
      Eigen::VectorXd r(patch.size());
      const CutQuadrature q = full_cell_rule(mesh, cell, 2 * sp.p);
      for (int m = 0; m < q.size(); ++m) {
        sp.spatial_basis(cell, q.points[m], N);
        r.setZero();
        const auto& tbl = sp.cell_active_nodes[ck];
        for (int a = 0; a < sp.n_local_spatial(); ++a) {
          const int an = tbl[a];
          if (ag.free_flag[an]) continue;  // deviation vanishes on well-posed nodes
          r[pidx[an]] += N[a];
          for (const auto& [fd, w] : ag.constraints[an]) r[pidx[ag.active_of_free[fd]]] -= w * N[a];
        }
        Ks += (gamma_g / (h * h)) * q.weights[m] * r * r.transpose();
      }
      scatter_patch(patch, Ks);
    }
  } else if (kind == GhostKind::Bulk) {
    // aggregate-wise L2 projection onto P_p, penalised on the cut members
    const int nm = n_monomials(mesh.dim, sp.p);
    for (const auto& [root, members] : agg->aggregates) {
      (void)root;
      bool has_cut = false;
      for (int c : members) has_cut = has_cut || cls.status[c] == CellStatus::Cut;
      if (!has_cut) continue;
      // scaled coordinates on the aggregate bounding box
      Coord lo{1e300, 1e300}, hi{-1e300, -1e300};
      for (int c : members)
        for (int d = 0; d < mesh.dim; ++d) {
          lo[d] = std::min(lo[d], mesh.cell_lo(c)[d]);
          hi[d] = std::max(hi[d], mesh.cell_hi(c)[d]);
        }
      auto scale = [&](const Coord& x) {
        Coord xi{0.0, 0.0};
        for (int d = 0; d < mesh.dim; ++d) xi[d] = (x[d] - lo[d]) / (hi[d] - lo[d]);
        return xi;
      };
      std::vector<int> patch;
      std::map<int, int> pidx;
      for (int c : members)
        for (int an : sp.cell_active_nodes[sp.active_cell_index[c]])
          if (pidx.emplace(an, static_cast<int>(patch.size())).second) patch.push_back(an);
      Eigen::MatrixXd Gm = Eigen::MatrixXd::Zero(nm, nm);
      Eigen::MatrixXd B = Eigen::MatrixXd::Zero(nm, patch.size());
      double mono[6];
      for (int c : members) {
        const CutQuadrature q = full_cell_rule(mesh, c, 2 * sp.p);
        for (int m = 0; m < q.size(); ++m) {
          monomials(mesh.dim, sp.p, scale(q.points[m]), mono);
          sp.spatial_basis(c, q.points[m], N);
          const auto& tbl = sp.cell_active_nodes[sp.active_cell_index[c]];
          for (int i = 0; i < nm; ++i) {
            for (int j = 0; j < nm; ++j) Gm(i, j) += q.weights[m] * mono[i] * mono[j];
            for (int a = 0; a < sp.n_local_spatial(); ++a)
              B(i, pidx[tbl[a]]) += q.weights[m] * mono[i] * N[a];
          }
        }
      }
      const Eigen::MatrixXd P = Gm.ldlt().solve(B);  // nm x patch
      Eigen::MatrixXd Ks = Eigen::MatrixXd::Zero(patch.size(), patch.size());
      Eigen::VectorXd r(patch.size());
      for (int c : members) {
        if (cls.status[c] != CellStatus::Cut) continue;
        const CutQuadrature q = full_cell_rule(mesh, c, 2 * sp.p);
        const auto& tbl = sp.cell_active_nodes[sp.active_cell_index[c]];
        for (int m = 0; m < q.size(); ++m) {
          monomials(mesh.dim, sp.p, scale(q.points[m]), mono);
          sp.spatial_basis(c, q.points[m], N);
          r.setZero();
          for (int a = 0; a < sp.n_local_spatial(); ++a) r[pidx[tbl[a]]] += N[a];
          for (std::size_t pc = 0; pc < patch.size(); ++pc)
            for (int i = 0; i < nm; ++i) r[pc] -= mono[i] * P(i, pc);
          Ks += (gamma_g / (h * h)) * q.weights[m] * r * r.transpose();
        }
      }
      scatter_patch(patch, Ks);
    }
  } else if (kind == GhostKind::Face) {
    if (i_max < 1 || i_max > 2)
      throw std::invalid_argument("ghost_penalty: face kind supports i_max in {1,2}");
    // interior faces of the active mesh with at least one cut side
    for (std::size_t ck = 0; ck < sp.active_cell_ids.size(); ++ck) {
      const int c = sp.active_cell_ids[ck];
      const auto ci = mesh.cell_multi_index(c);
      for (int axis = 0; axis < mesh.dim; ++axis) {
        auto nidx = ci;
        nidx[axis] += 1;
        if (nidx[axis] >= mesh.n_cells[axis]) continue;
        const int nb = mesh.cell_id(nidx);
        if (!cls.is_active(nb)) continue;
        if (cls.status[c] != CellStatus::Cut && cls.status[nb] != CellStatus::Cut) continue;
        const double h_f = mesh.dim == 1 ? mesh.h[0] : mesh.h[1 - axis];
        const FaceRule fr = outer_face_rule(mesh, c, 2 * axis + 1, 2 * sp.p);
        std::vector<int> patch = sp.cell_active_nodes[ck];
        std::map<int, int> pidx;
        for (std::size_t i = 0; i < patch.size(); ++i) pidx[patch[i]] = static_cast<int>(i);
        for (int an : sp.cell_active_nodes[sp.active_cell_index[nb]])
          if (pidx.emplace(an, static_cast<int>(patch.size())).second) patch.push_back(an);
        Eigen::MatrixXd Ks = Eigen::MatrixXd::Zero(patch.size(), patch.size());
        Eigen::VectorXd r(patch.size());
        Coord Gc[9], Gn[9];
        std::array<double, 3> Hc[9], Hn[9];
        for (std::size_t m = 0; m < fr.points.size(); ++m) {
          const Coord& x = fr.points[m];
          sp.spatial_basis(c, x, N, Gc, Hc);
          sp.spatial_basis(nb, x, Nn, Gn, Hn);
          const auto& tc = sp.cell_active_nodes[ck];
          const auto& tn = sp.cell_active_nodes[sp.active_cell_index[nb]];
          for (int der = 1; der <= i_max; ++der) {
            r.setZero();
            for (int a = 0; a < sp.n_local_spatial(); ++a) {
              const double vc = der == 1 ? Gc[a][axis] : Hc[a][axis == 0 ? 0 : 2];
              const double vn = der == 1 ? Gn[a][axis] : Hn[a][axis == 0 ? 0 : 2];
              r[pidx[tc[a]]] += vc;
              r[pidx[tn[a]]] -= vn;
            }
            Ks += gamma_g * h_f * fr.weights[m] * r * r.transpose();
          }
        }
        scatter_patch(patch, Ks);
      }
    }
  }

  SpMat S(sp.n_st_dofs(), sp.n_st_dofs());
  S.setFromTriplets(trip.begin(), trip.end());
  return S;
}

}  // namespace stfem
