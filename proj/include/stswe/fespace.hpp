#pragma once

// Scalar finite element spaces (continuous or broken Lagrange) on a space-time
// triangulation: global dof maps, nodal coordinates, tabulation through the
// affine reference map, interpolation and pointwise evaluation.

#include "stswe/basis.hpp"
#include "stswe/mesh.hpp"
#include "stswe/quadrature.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

namespace stswe {

enum class Continuity { Continuous, Broken };

struct SpaceConfig {
  int trial_degree = 2;     // p: zeta and u
  int sigma_degree = 1;     // p - 1, clamped to >= 1
  int test_degree = 2;      // r = p by default
  int quadrature_degree = 8;

  static SpaceConfig for_degree(int p, int r = -1) {
    if (p < 1) throw std::invalid_argument("SpaceConfig: trial degree >= 1");
    SpaceConfig c;
    c.trial_degree = p;
    c.sigma_degree = std::max(p - 1, 1);
    c.test_degree = r < 0 ? p : r;
    if (c.test_degree < p) throw std::invalid_argument("SpaceConfig: r >= p required");
    c.quadrature_degree = 2 * std::max(c.trial_degree, c.test_degree) + 2;
    return c;
  }

  int error_quadrature_degree() const { return std::max(10, 2 * trial_degree + 4); }
};

class FESpace {
public:
  const SpaceTimeMesh* mesh = nullptr;
  int degree = 1;
  Continuity continuity = Continuity::Continuous;
  std::vector<int> cell_dofs_flat;   // n_local * n_triangles
  std::vector<Point> dof_coords;

  int n_local() const { return (degree + 1) * (degree + 2) / 2; }
  int n_dofs() const { return static_cast<int>(dof_coords.size()); }
  const int* cell_dofs(int k) const { return cell_dofs_flat.data() + static_cast<std::size_t>(k) * n_local(); }
  const LagrangeBasis& basis() const { return LagrangeBasis::get(degree); }

  // Internal builder without the public degree cap (estimator enrichment
  // needs broken spaces up to degree r+2).
  static FESpace build(const SpaceTimeMesh& mesh, int degree, Continuity continuity) {
    if (degree < 1 || degree > 6) throw std::invalid_argument("FESpace: degree in [1,6]");
    FESpace s;
    s.mesh = &mesh;
    s.degree = degree;
    s.continuity = continuity;
    const auto& base = LagrangeBasis::get(degree);
    const int nloc = s.n_local();
    const int M = mesh.n_triangles();
    s.cell_dofs_flat.assign(static_cast<std::size_t>(nloc) * M, -1);

    auto ref_to_phys = [&](int k, double xi, double eta) {
      const auto& tv = mesh.triangles[k].v;
      const Point& p0 = mesh.vertices[tv[0]];
      const Point& p1 = mesh.vertices[tv[1]];
      const Point& p2 = mesh.vertices[tv[2]];
      return Point{p0.x + xi * (p1.x - p0.x) + eta * (p2.x - p0.x),
                   p0.t + xi * (p1.t - p0.t) + eta * (p2.t - p0.t)};
    };

    if (continuity == Continuity::Broken) {
      s.dof_coords.resize(static_cast<std::size_t>(nloc) * M);
      for (int k = 0; k < M; ++k)
        for (int l = 0; l < nloc; ++l) {
          const int g = k * nloc + l;
          s.cell_dofs_flat[g] = g;
          s.dof_coords[g] = ref_to_phys(k, base.nodes[l].first, base.nodes[l].second);
        }
      return s;
    }

    // Continuous: vertices, then (degree-1) dofs per mesh edge (ordered from
    // the lower global vertex), then per-triangle interior dofs.
    const int per_edge = degree - 1;
    const int n_interior = nloc - 3 - 3 * per_edge;
    const int edge_base = mesh.n_vertices();
    const int interior_base = edge_base + per_edge * mesh.n_edges();
    s.dof_coords.resize(interior_base + static_cast<std::size_t>(n_interior) * M);
    for (int v = 0; v < mesh.n_vertices(); ++v) s.dof_coords[v] = mesh.vertices[v];

    for (int k = 0; k < M; ++k) {
      const auto& tv = mesh.triangles[k].v;
      int* dofs = s.cell_dofs_flat.data() + static_cast<std::size_t>(k) * nloc;
      for (int i = 0; i < 3; ++i) dofs[i] = tv[i];
      for (int le = 0; le < 3; ++le) {
        const int ga = tv[le], gb = tv[(le + 1) % 3];
        const int e = mesh.triangle_edges[k][le];
        for (int i = 0; i < per_edge; ++i) {
          // local edge nodes run ga -> gb; canonical slots run min -> max
          const int slot = ga < gb ? i : per_edge - 1 - i;
          const int g = edge_base + e * per_edge + slot;
          const int l = 3 + le * per_edge + i;
          dofs[l] = g;
          s.dof_coords[g] = ref_to_phys(k, base.nodes[l].first, base.nodes[l].second);
        }
      }
      for (int i = 0; i < n_interior; ++i) {
        const int l = 3 + 3 * per_edge + i;
        const int g = interior_base + k * n_interior + i;
        dofs[l] = g;
        s.dof_coords[g] = ref_to_phys(k, base.nodes[l].first, base.nodes[l].second);
      }
    }
    return s;
  }
};

inline FESpace make_space(const SpaceTimeMesh& mesh, int degree, Continuity continuity) {
  if (degree < 1 || degree > 4)
    throw std::invalid_argument("make_space: unsupported degree (supported: 1..4)");
  return FESpace::build(mesh, degree, continuity);
}

// Basis values and physical (x,t) gradients on one triangle at reference points.
struct Tabulated {
  Eigen::MatrixXd val; // n_local x n_points
  Eigen::MatrixXd gx;  // d/dx
  Eigen::MatrixXd gt;  // d/dt
};

struct AffineMap {
  double j00, j01, j10, j11; // [dx/dxi dx/deta; dt/dxi dt/deta]
  double i00, i01, i10, i11; // inverse
  double det;
  Point origin;

  static AffineMap of(const SpaceTimeMesh& mesh, int k) {
    const auto& tv = mesh.triangles[k].v;
    const Point& p0 = mesh.vertices[tv[0]];
    const Point& p1 = mesh.vertices[tv[1]];
    const Point& p2 = mesh.vertices[tv[2]];
    AffineMap m;
    m.origin = p0;
    m.j00 = p1.x - p0.x;
    m.j01 = p2.x - p0.x;
    m.j10 = p1.t - p0.t;
    m.j11 = p2.t - p0.t;
    m.det = m.j00 * m.j11 - m.j01 * m.j10;
    m.i00 = m.j11 / m.det;
    m.i01 = -m.j01 / m.det;
    m.i10 = -m.j10 / m.det;
    m.i11 = m.j00 / m.det;
    return m;
  }
  Point to_phys(double xi, double eta) const {
    return Point{origin.x + j00 * xi + j01 * eta, origin.t + j10 * xi + j11 * eta};
  }
};

inline Tabulated tabulate(const FESpace& space, int triangle,
                          const std::vector<std::pair<double, double>>& ref_points) {
  const auto& base = space.basis();
  const int n = base.n_nodes();
  const int m = static_cast<int>(ref_points.size());
  Tabulated tab;
  tab.val.resize(n, m);
  tab.gx.resize(n, m);
  tab.gt.resize(n, m);
  const AffineMap map = AffineMap::of(*space.mesh, triangle);
  Eigen::VectorXd v(n), dxi(n), deta(n);
  for (int q = 0; q < m; ++q) {
    base.eval(ref_points[q].first, ref_points[q].second, v);
    base.eval_grad(ref_points[q].first, ref_points[q].second, dxi, deta);
    tab.val.col(q) = v;
    // grad_x = J^{-T} grad_xi
    tab.gx.col(q) = map.i00 * dxi + map.i10 * deta;
    tab.gt.col(q) = map.i01 * dxi + map.i11 * deta;
  }
  return tab;
}

struct FieldFunction {
  const FESpace* space = nullptr;
  Eigen::VectorXd coeffs;

  double eval_on_element(int k, double xi, double eta) const {
    const auto& base = space->basis();
    Eigen::VectorXd v(base.n_nodes());
    base.eval(xi, eta, v);
    const int* dofs = space->cell_dofs(k);
    double s = 0.0;
    for (int l = 0; l < base.n_nodes(); ++l) s += coeffs[dofs[l]] * v(l);
    return s;
  }

  double evaluate(double x, double t) const {
    const PointLocation loc = locate_point(*space->mesh, x, t);
    return eval_on_element(loc.triangle, loc.xi, loc.eta);
  }
};

inline FieldFunction interpolate(const std::function<double(double, double)>& f, const FESpace& space) {
  FieldFunction out;
  out.space = &space;
  out.coeffs.resize(space.n_dofs());
  for (int g = 0; g < space.n_dofs(); ++g) {
    const double v = f(space.dof_coords[g].x, space.dof_coords[g].t);
    if (!std::isfinite(v)) throw std::invalid_argument("interpolate: non-finite sample");
    out.coeffs[g] = v;
  }
  return out;
}

} // namespace stswe
