#pragma once

// The broken weak form of the space-time shallow water system in one spatial
// dimension: element kernels for B(U;.) - F(.), the Gateaux derivative B', and
// the broken test-space inner product (Gram), plus global assembly.
//
// Unknowns per element: zeta, u on the continuous degree-p space, sigma on the
// continuous degree-(p-1) space. Test triple (v,w,q) on the broken degree-r
// space, laid out component-major: [v | w | q] both locally and globally.
//
// Green's identity is applied to spatial derivatives only, so every edge term
// carries the spatial normal component n_x alone and edges on t = const lines
// contribute nothing. Boundary traces with prescribed data (zeta_hat, u_hat,
// sigma_hat per side) are substituted by the datum; SpatialOutflow edges drop
// the elevation term (weak zero elevation); all other traces stay unknown.

#include "stswe/fespace.hpp"
#include "stswe/problem.hpp"

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <array>
#include <vector>

namespace stswe {

struct TrialState {
  FieldFunction zeta, u, sigma;
};

struct GramSpec {
  bool diameter_scaled = true; // h_m^2 weight on gradient/divergence terms
};

namespace detail {
struct RefTab {
  Eigen::MatrixXd val, dxi, deta; // n_local x n_points

  static RefTab at(const LagrangeBasis& basis, const std::vector<std::pair<double, double>>& pts) {
    RefTab t;
    const int n = basis.n_nodes(), m = static_cast<int>(pts.size());
    t.val.resize(n, m);
    t.dxi.resize(n, m);
    t.deta.resize(n, m);
    Eigen::VectorXd v(n), dx(n), de(n);
    for (int q = 0; q < m; ++q) {
      basis.eval(pts[q].first, pts[q].second, v);
      basis.eval_grad(pts[q].first, pts[q].second, dx, de);
      t.val.col(q) = v;
      t.dxi.col(q) = dx;
      t.deta.col(q) = de;
    }
    return t;
  }
};
} // namespace detail

class Discretization {
public:
  const SpaceTimeMesh* mesh = nullptr;
  SpaceConfig config;
  FESpace scalar_space; // zeta and u
  FESpace sigma_space;
  FESpace test_space;   // broken

  int u_offset = 0, sigma_offset = 0;

  QuadratureRule rule;
  detail::RefTab scalar_vol, sigma_vol, test_vol;
  std::array<std::vector<std::pair<double, double>>, 3> edge_ref_pts;
  std::array<Eigen::MatrixXd, 3> scalar_edge_val, sigma_edge_val, test_edge_val;

  int n_trial() const { return 2 * scalar_space.n_dofs() + sigma_space.n_dofs(); }
  int n_test() const { return 3 * test_space.n_dofs(); }
  int n_local_trial() const { return 2 * scalar_space.n_local() + sigma_space.n_local(); }
  int n_local_test() const { return 3 * test_space.n_local(); }

  // Global trial indices of element k in local order [zeta | u | sigma].
  void trial_dofs(int k, std::vector<int>& out) const {
    const int nz = scalar_space.n_local(), ns = sigma_space.n_local();
    out.resize(2 * nz + ns);
    const int* zd = scalar_space.cell_dofs(k);
    const int* sd = sigma_space.cell_dofs(k);
    for (int l = 0; l < nz; ++l) {
      out[l] = zd[l];
      out[nz + l] = u_offset + zd[l];
    }
    for (int l = 0; l < ns; ++l) out[2 * nz + l] = sigma_offset + sd[l];
  }

  // Global test indices of element k in local order [v | w | q].
  void test_dofs(int k, std::vector<int>& out) const {
    const int nv = test_space.n_local(), N = test_space.n_dofs();
    out.resize(3 * nv);
    const int* td = test_space.cell_dofs(k);
    for (int l = 0; l < nv; ++l) {
      out[l] = td[l];
      out[nv + l] = N + td[l];
      out[2 * nv + l] = 2 * N + td[l];
    }
  }
};

inline Discretization make_discretization(const SpaceTimeMesh& mesh, const SpaceConfig& cfg) {
  Discretization d;
  d.mesh = &mesh;
  d.config = cfg;
  d.scalar_space = FESpace::build(mesh, cfg.trial_degree, Continuity::Continuous);
  d.sigma_space = FESpace::build(mesh, cfg.sigma_degree, Continuity::Continuous);
  d.test_space = FESpace::build(mesh, cfg.test_degree, Continuity::Broken);
  d.u_offset = d.scalar_space.n_dofs();
  d.sigma_offset = 2 * d.scalar_space.n_dofs();

  d.rule = QuadratureRule::triangle(cfg.quadrature_degree);
  std::vector<std::pair<double, double>> vol_pts(d.rule.n_points());
  for (int q = 0; q < d.rule.n_points(); ++q) vol_pts[q] = {d.rule.xi[q], d.rule.eta[q]};
  d.scalar_vol = detail::RefTab::at(d.scalar_space.basis(), vol_pts);
  d.sigma_vol = detail::RefTab::at(d.sigma_space.basis(), vol_pts);
  d.test_vol = detail::RefTab::at(d.test_space.basis(), vol_pts);

  for (int e = 0; e < 3; ++e) {
    auto& pts = d.edge_ref_pts[e];
    pts.resize(d.rule.n_edge_points());
    for (int i = 0; i < d.rule.n_edge_points(); ++i) {
      const double s = d.rule.s1d[i];
      if (e == 0) pts[i] = {s, 0.0};
      else if (e == 1) pts[i] = {1.0 - s, s};
      else pts[i] = {0.0, 1.0 - s};
    }
    d.scalar_edge_val[e] = detail::RefTab::at(d.scalar_space.basis(), pts).val;
    d.sigma_edge_val[e] = detail::RefTab::at(d.sigma_space.basis(), pts).val;
    d.test_edge_val[e] = detail::RefTab::at(d.test_space.basis(), pts).val;
  }
  return d;
}

inline TrialState zero_state(const Discretization& d) {
  TrialState s;
  s.zeta = FieldFunction{&d.scalar_space, Eigen::VectorXd::Zero(d.scalar_space.n_dofs())};
  s.u = FieldFunction{&d.scalar_space, Eigen::VectorXd::Zero(d.scalar_space.n_dofs())};
  s.sigma = FieldFunction{&d.sigma_space, Eigen::VectorXd::Zero(d.sigma_space.n_dofs())};
  return s;
}

struct ElementSystem {
  Eigen::MatrixXd gram;     // n_local_test x n_local_test
  Eigen::MatrixXd jac;      // n_local_test x n_local_trial
  Eigen::VectorXd residual; // B(U;.) - F(.) over local test dofs
};

enum AssembleWhat : unsigned { WantGram = 1u, WantJacobian = 2u, WantResidual = 4u };

// Element kernel. All three outputs share the field evaluations, so the
// solver requests them together.
inline void assemble_element(const Discretization& d, const ProblemSpec& spec, const TrialState& U,
                             int k, unsigned what, ElementSystem& out) {
  const int nz = d.scalar_space.n_local();
  const int ns = d.sigma_space.n_local();
  const int nv = d.test_space.n_local();
  const int ntr = 2 * nz + ns, nte = 3 * nv;

  const AffineMap map = AffineMap::of(*d.mesh, k);
  const ElementGeometry geo = element_geometry(*d.mesh, k);
  const double h2 = geo.diameter * geo.diameter;

  // physical gradients of the reference tabs
  const Eigen::MatrixXd Zgx = map.i00 * d.scalar_vol.dxi + map.i10 * d.scalar_vol.deta;
  const Eigen::MatrixXd Zgt = map.i01 * d.scalar_vol.dxi + map.i11 * d.scalar_vol.deta;
  const Eigen::MatrixXd Sgx = map.i00 * d.sigma_vol.dxi + map.i10 * d.sigma_vol.deta;
  const Eigen::MatrixXd Tgx = map.i00 * d.test_vol.dxi + map.i10 * d.test_vol.deta;
  const Eigen::MatrixXd Tgt = map.i01 * d.test_vol.dxi + map.i11 * d.test_vol.deta;
  const Eigen::MatrixXd& Zv = d.scalar_vol.val;
  const Eigen::MatrixXd& Sv = d.sigma_vol.val;
  const Eigen::MatrixXd& Tv = d.test_vol.val;

  // local trial coefficients
  Eigen::VectorXd zl(nz), ul(nz), sl(ns);
  {
    const int* zd = d.scalar_space.cell_dofs(k);
    const int* sd = d.sigma_space.cell_dofs(k);
    for (int l = 0; l < nz; ++l) {
      zl[l] = U.zeta.coeffs[zd[l]];
      ul[l] = U.u.coeffs[zd[l]];
    }
    for (int l = 0; l < ns; ++l) sl[l] = U.sigma.coeffs[sd[l]];
  }

  if (what & WantGram) {
    out.gram.setZero(nte, nte);
  }
  if (what & WantJacobian) out.jac.setZero(nte, ntr);
  // near Newton convergence the residual cancels to the roundoff of its term
  // scale, so it is accumulated in extended precision
  std::vector<long double> racc;
  if (what & WantResidual) racc.assign(nte, 0.0L);

  const double g = spec.params.g;
  const double mu = spec.params.mu;
  const double tau = spec.params.tau_bf;
  const bool lin = spec.linearized;

  auto v_rows = [&](int l) { return l; };
  auto w_rows = [&](int l) { return nv + l; };
  auto q_rows = [&](int l) { return 2 * nv + l; };

  auto dotl = [](const Eigen::MatrixXd& m, int col, const Eigen::VectorXd& v) {
    long double acc = 0.0L;
    for (int i = 0; i < v.size(); ++i) acc += static_cast<long double>(m(i, col)) * v[i];
    return acc;
  };

  for (int q = 0; q < d.rule.n_points(); ++q) {
    const double wq = d.rule.w[q] * map.det;
    const Point p = map.to_phys(d.rule.xi[q], d.rule.eta[q]);
    const double hb = spec.params.bathymetry(p.x);

    const long double zetaL = dotl(Zv, q, zl);
    const long double zeta_tL = dotl(Zgt, q, zl);
    const long double uL = dotl(Zv, q, ul);
    const long double u_xL = dotl(Zgx, q, ul);
    const long double u_tL = dotl(Zgt, q, ul);
    const long double sigL = dotl(Sv, q, sl);

    const double u = static_cast<double>(uL);
    const double u_x = static_cast<double>(u_xL);

    const long double HL = lin ? static_cast<long double>(hb) : zetaL + hb;
    const double H = static_cast<double>(HL);
    const long double fluxL = uL * HL; // mass flux uH (u h_b linearized)

    if (what & WantResidual) {
      const double sz = spec.params.continuity_source(p.x, p.t);
      const double f = spec.params.body_force(p.x, p.t);
      const long double momL = u_tL + (lin ? 0.0L : uL * u_xL) + tau * uL;
      for (int l = 0; l < nv; ++l) {
        racc[v_rows(l)] += wq * ((zeta_tL - sz) * Tv(l, q) - fluxL * Tgx(l, q));
        racc[w_rows(l)] += wq * ((momL - f) * Tv(l, q) + (mu * sigL - g * zetaL) * Tgx(l, q));
        racc[q_rows(l)] += wq * (sigL * Tv(l, q) + uL * Tgx(l, q));
      }
    }

    if (what & WantJacobian) {
      for (int l = 0; l < nv; ++l) {
        const double tv = wq * Tv(l, q), tgx = wq * Tgx(l, q);
        for (int c = 0; c < nz; ++c) {
          // continuity: d(zeta_t v - v_x uH)
          out.jac(v_rows(l), c) += tv * Zgt(c, q) - (lin ? 0.0 : tgx * u * Zv(c, q));
          out.jac(v_rows(l), nz + c) += -tgx * H * Zv(c, q);
          // momentum: d((u_t + u u_x + tau u) w - g zeta w_x)
          out.jac(w_rows(l), c) += -g * tgx * Zv(c, q);
          out.jac(w_rows(l), nz + c) +=
              tv * (Zgt(c, q) + tau * Zv(c, q) + (lin ? 0.0 : u * Zgx(c, q) + u_x * Zv(c, q)));
          // constitutive: d(u q_x)
          out.jac(q_rows(l), nz + c) += tgx * Zv(c, q);
        }
        for (int c = 0; c < ns; ++c) {
          out.jac(w_rows(l), 2 * nz + c) += mu * tgx * Sv(c, q);
          out.jac(q_rows(l), 2 * nz + c) += tv * Sv(c, q);
        }
      }
    }

    if (what & WantGram) {
      const double gw = wq * h2;
      for (int i = 0; i < nv; ++i)
        for (int j = 0; j <= i; ++j) {
          const double scalar_block =
              wq * Tv(i, q) * Tv(j, q) + gw * (Tgx(i, q) * Tgx(j, q) + Tgt(i, q) * Tgt(j, q));
          const double div_block = wq * Tv(i, q) * Tv(j, q) + gw * Tgx(i, q) * Tgx(j, q);
          out.gram(v_rows(i), v_rows(j)) += scalar_block;
          out.gram(w_rows(i), w_rows(j)) += scalar_block;
          out.gram(q_rows(i), q_rows(j)) += div_block;
        }
    }
  }
  if (what & WantGram) out.gram = Eigen::MatrixXd(out.gram.selfadjointView<Eigen::Lower>());

  // Edge terms: only the spatial normal component enters; edges on t = const
  // lines (InitialTime/FinalTime and interior horizontals) have n_x = 0.
  for (int le = 0; le < 3; ++le) {
    const double nx = geo.edge_normal[le].x;
    if (std::abs(nx) < 1e-14) continue;
    const int edge_id = d.mesh->triangle_edges[k][le];
    const std::int8_t tag = d.mesh->edge_tag[edge_id];

    // trace treatment on this edge
    bool gravity_trial = true, gravity_data = false;  // else: dropped (outflow)
    bool visc_trial = true, constit_trial = true;
    const ScalarFn* zeta_data = nullptr;
    const ScalarFn* u_data = nullptr;
    const ScalarFn* sigma_data = nullptr;
    if (tag == static_cast<std::int8_t>(BoundaryTag::SpatialInflow) ||
        tag == static_cast<std::int8_t>(BoundaryTag::SpatialOutflow)) {
      const Point& pa = d.mesh->vertices[d.mesh->triangles[k].v[le]];
      const SideCondition& side = spec.side_at(pa.x);
      if (tag == static_cast<std::int8_t>(BoundaryTag::SpatialOutflow)) {
        gravity_trial = false; // weak zero elevation
      } else if (side.zeta_hat) {
        gravity_trial = false;
        gravity_data = true;
        zeta_data = &*side.zeta_hat;
      }
      if (side.u_hat) {
        constit_trial = false;
        u_data = &*side.u_hat;
      }
      if (side.sigma_hat) {
        visc_trial = false;
        sigma_data = &*side.sigma_hat;
      }
    }

    const Eigen::MatrixXd& Tve = d.test_edge_val[le];
    const Eigen::MatrixXd& Zve = d.scalar_edge_val[le];
    const Eigen::MatrixXd& Sve = d.sigma_edge_val[le];
    const double len = geo.edge_length[le];

    for (int i = 0; i < d.rule.n_edge_points(); ++i) {
      const double wi = d.rule.w1d[i] * len;
      const auto rp = d.edge_ref_pts[le][i];
      const Point p = map.to_phys(rp.first, rp.second);
      const double hb = spec.params.bathymetry(p.x);

      const long double zetaL = dotl(Zve, i, zl);
      const long double uL = dotl(Zve, i, ul);
      const long double sigL = dotl(Sve, i, sl);
      const long double HL = lin ? static_cast<long double>(hb) : zetaL + hb;
      const double u = static_cast<double>(uL);
      const double H = static_cast<double>(HL);

      if (what & WantResidual) {
        const long double fluxL = uL * HL; // mass flux trace is always the unknown
        const long double g_tr = gravity_trial ? zetaL : (gravity_data ? (*zeta_data)(p.t) : 0.0L);
        const long double s_tr = visc_trial ? sigL : static_cast<long double>((*sigma_data)(p.t));
        const long double u_tr = constit_trial ? uL : static_cast<long double>((*u_data)(p.t));
        for (int l = 0; l < nv; ++l) {
          const long double tv = static_cast<long double>(wi) * nx * Tve(l, i);
          racc[v_rows(l)] += tv * fluxL;
          racc[w_rows(l)] += tv * (g * g_tr - mu * s_tr);
          racc[q_rows(l)] += -tv * u_tr;
        }
      }

      if (what & WantJacobian) {
        for (int l = 0; l < nv; ++l) {
          const double tv = wi * nx * Tve(l, i);
          for (int c = 0; c < nz; ++c) {
            if (!lin) out.jac(v_rows(l), c) += tv * u * Zve(c, i);
            out.jac(v_rows(l), nz + c) += tv * H * Zve(c, i);
            if (gravity_trial) out.jac(w_rows(l), c) += tv * g * Zve(c, i);
            if (constit_trial) out.jac(q_rows(l), nz + c) += -tv * Zve(c, i);
          }
          if (visc_trial)
            for (int c = 0; c < ns; ++c) out.jac(w_rows(l), 2 * nz + c) += -tv * mu * Sve(c, i);
        }
      }
    }
  }

  if (what & WantResidual) {
    out.residual.resize(nte);
    for (int l = 0; l < nte; ++l) out.residual[l] = static_cast<double>(racc[l]);
  }
}

// Second derivative of B contracted with a broken test function e (the error
// representer): D(i,j) = B''[phi_i, phi_j; e]. Only the quadratic terms of B
// contribute: the mass flux u*zeta (volume and edge) pairs zeta against u, and
// the convection u u_x pairs u against u. Symmetric; zero in linearized mode.
inline void curvature_matrix(const Discretization& d, const ProblemSpec& spec, int k,
                             const Eigen::VectorXd& e_loc, Eigen::MatrixXd& D) {
  const int nz = d.scalar_space.n_local();
  const int ns = d.sigma_space.n_local();
  const int nv = d.test_space.n_local();
  D.setZero(2 * nz + ns, 2 * nz + ns);
  if (spec.linearized) return;

  const AffineMap map = AffineMap::of(*d.mesh, k);
  const ElementGeometry geo = element_geometry(*d.mesh, k);
  const Eigen::MatrixXd Zgx = map.i00 * d.scalar_vol.dxi + map.i10 * d.scalar_vol.deta;
  const Eigen::MatrixXd Tgx = map.i00 * d.test_vol.dxi + map.i10 * d.test_vol.deta;
  const Eigen::MatrixXd& Zv = d.scalar_vol.val;
  const Eigen::MatrixXd& Tv = d.test_vol.val;

  const auto e_v = e_loc.segment(0, nv);
  const auto e_w = e_loc.segment(nv, nv);

  for (int q = 0; q < d.rule.n_points(); ++q) {
    const double wq = d.rule.w[q] * map.det;
    const double ev_x = Tgx.col(q).dot(e_v);
    const double ew = Tv.col(q).dot(e_w);
    for (int i = 0; i < nz; ++i)
      for (int j = 0; j < nz; ++j) {
        // -v_x (u zeta): cross term zeta_i x u_j
        const double m = -wq * ev_x * Zv(i, q) * Zv(j, q);
        D(i, nz + j) += m;
        D(nz + j, i) += m;
        // w (u u_x): u_i x u_j
        D(nz + i, nz + j) += wq * ew * (Zv(i, q) * Zgx(j, q) + Zgx(i, q) * Zv(j, q));
      }
  }
  for (int le = 0; le < 3; ++le) {
    const double nx = geo.edge_normal[le].x;
    if (std::abs(nx) < 1e-14) continue;
    const Eigen::MatrixXd& Tve = d.test_edge_val[le];
    const Eigen::MatrixXd& Zve = d.scalar_edge_val[le];
    const double len = geo.edge_length[le];
    for (int i = 0; i < d.rule.n_edge_points(); ++i) {
      const double wi = d.rule.w1d[i] * len * nx;
      const double ev = Tve.col(i).dot(e_v);
      for (int a = 0; a < nz; ++a)
        for (int b = 0; b < nz; ++b) {
          const double m = wi * ev * Zve(a, i) * Zve(b, i); // + v (u zeta) n_x
          D(a, nz + b) += m;
          D(nz + b, a) += m;
        }
    }
  }
}

// --- public operations ---------------------------------------------------

inline void require_same_mesh(const TrialState& U, const Discretization& d) {
  if (U.zeta.space->mesh != d.mesh || U.u.space->mesh != d.mesh || U.sigma.space->mesh != d.mesh)
    throw std::invalid_argument("trial state and discretization live on different meshes");
}

// B(U; phi_j) - F(phi_j) over all broken test dofs, component-major [v|w|q].
inline Eigen::VectorXd residual(const TrialState& U, const ProblemSpec& spec, const Discretization& d) {
  require_same_mesh(U, d);
  Eigen::VectorXd r = Eigen::VectorXd::Zero(d.n_test());
  ElementSystem sys;
  std::vector<int> tdofs;
  for (int k = 0; k < d.mesh->n_triangles(); ++k) {
    assemble_element(d, spec, U, k, WantResidual, sys);
    d.test_dofs(k, tdofs);
    for (int l = 0; l < d.n_local_test(); ++l) r[tdofs[l]] += sys.residual[l];
  }
  return r;
}

// F(phi_j). B vanishes at the zero state (every term carries a trial factor),
// so the load is minus the residual there.
inline Eigen::VectorXd load(const ProblemSpec& spec, const Discretization& d) {
  return -residual(zero_state(d), spec, d);
}

// Gateaux derivative B'((a,b,c); phi_j) as a sparse matrix, test x trial.
inline Eigen::SparseMatrix<double> jacobian(const TrialState& U, const ProblemSpec& spec,
                                            const Discretization& d) {
  require_same_mesh(U, d);
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(d.mesh->n_triangles()) * d.n_local_test() * d.n_local_trial());
  ElementSystem sys;
  std::vector<int> tdofs, udofs;
  for (int k = 0; k < d.mesh->n_triangles(); ++k) {
    assemble_element(d, spec, U, k, WantJacobian, sys);
    d.test_dofs(k, tdofs);
    d.trial_dofs(k, udofs);
    for (int i = 0; i < d.n_local_test(); ++i)
      for (int j = 0; j < d.n_local_trial(); ++j)
        if (sys.jac(i, j) != 0.0) trip.emplace_back(tdofs[i], udofs[j], sys.jac(i, j));
  }
  Eigen::SparseMatrix<double> J(d.n_test(), d.n_trial());
  J.setFromTriplets(trip.begin(), trip.end());
  return J;
}

// Element Gram matrix of the V inner product over the local test dofs.
inline Eigen::MatrixXd gram_matrix(const Discretization& d, int k, const GramSpec& gspec = {}) {
  const int nv = d.test_space.n_local();
  const AffineMap map = AffineMap::of(*d.mesh, k);
  const ElementGeometry geo = element_geometry(*d.mesh, k);
  const double h2 = gspec.diameter_scaled ? geo.diameter * geo.diameter : 1.0;
  const Eigen::MatrixXd Tgx = map.i00 * d.test_vol.dxi + map.i10 * d.test_vol.deta;
  const Eigen::MatrixXd Tgt = map.i01 * d.test_vol.dxi + map.i11 * d.test_vol.deta;
  const Eigen::MatrixXd& Tv = d.test_vol.val;
  Eigen::MatrixXd G = Eigen::MatrixXd::Zero(3 * nv, 3 * nv);
  for (int q = 0; q < d.rule.n_points(); ++q) {
    const double wq = d.rule.w[q] * map.det;
    for (int i = 0; i < nv; ++i)
      for (int j = 0; j <= i; ++j) {
        const double scalar_block =
            wq * (Tv(i, q) * Tv(j, q) + h2 * (Tgx(i, q) * Tgx(j, q) + Tgt(i, q) * Tgt(j, q)));
        const double div_block = wq * (Tv(i, q) * Tv(j, q) + h2 * Tgx(i, q) * Tgx(j, q));
        G(i, j) += scalar_block;
        G(nv + i, nv + j) += scalar_block;
        G(2 * nv + i, 2 * nv + j) += div_block;
      }
  }
  return G.selfadjointView<Eigen::Lower>();
}

// Standalone variant per the module interface: builds a throwaway context.
inline Eigen::MatrixXd gram_matrix(const SpaceTimeMesh& mesh, int element, const FESpace& test_space,
                                   const GramSpec& gspec = {}) {
  SpaceConfig cfg = SpaceConfig::for_degree(1, test_space.degree);
  Discretization d = make_discretization(mesh, cfg);
  return gram_matrix(d, element, gspec);
}

} // namespace stswe
