#pragma once

// Error norms of a discrete state against an exact solution: per-field L2 and
// H1(Omega_T), the H(div)-type norm for sigma (value + d/dx), and the combined
// trial-space norm. Integration uses a rule of degree max(10, 2p+4) so the
// quadrature error stays subdominant in rate measurements.

#include "stswe/forms.hpp"

#include <cmath>

namespace stswe {

struct ErrorNorms {
  double l2_zeta = 0, l2_u = 0, l2_sigma = 0;
  double h1_zeta = 0, h1_u = 0;
  double hdiv_sigma = 0;
  double u_norm = 0; // sqrt(h1_zeta^2 + h1_u^2 + hdiv_sigma^2)
};

inline ErrorNorms error_norms(const TrialState& U, const ExactSolution& exact, int quad_degree = -1) {
  const FESpace& zs = *U.zeta.space;
  const FESpace& ss = *U.sigma.space;
  const SpaceTimeMesh& mesh = *zs.mesh;
  if (quad_degree < 0) quad_degree = std::max(10, 2 * zs.degree + 4);
  const QuadratureRule rule = QuadratureRule::triangle(quad_degree);
  std::vector<std::pair<double, double>> pts(rule.n_points());
  for (int q = 0; q < rule.n_points(); ++q) pts[q] = {rule.xi[q], rule.eta[q]};
  const detail::RefTab ztab = detail::RefTab::at(zs.basis(), pts);
  const detail::RefTab stab = detail::RefTab::at(ss.basis(), pts);

  double l2z = 0, l2u = 0, l2s = 0, gz = 0, gu = 0, gs = 0;
  const int nz = zs.n_local(), ns = ss.n_local();
  Eigen::VectorXd zl(nz), ul(nz), sl(ns);
  for (int k = 0; k < mesh.n_triangles(); ++k) {
    const AffineMap map = AffineMap::of(mesh, k);
    const Eigen::MatrixXd Zgx = map.i00 * ztab.dxi + map.i10 * ztab.deta;
    const Eigen::MatrixXd Zgt = map.i01 * ztab.dxi + map.i11 * ztab.deta;
    const Eigen::MatrixXd Sgx = map.i00 * stab.dxi + map.i10 * stab.deta;
    const int* zd = zs.cell_dofs(k);
    const int* sd = ss.cell_dofs(k);
    for (int l = 0; l < nz; ++l) {
      zl[l] = U.zeta.coeffs[zd[l]];
      ul[l] = U.u.coeffs[zd[l]];
    }
    for (int l = 0; l < ns; ++l) sl[l] = U.sigma.coeffs[sd[l]];

    for (int q = 0; q < rule.n_points(); ++q) {
      const double wq = rule.w[q] * map.det;
      const Point p = map.to_phys(rule.xi[q], rule.eta[q]);
      const double ez = ztab.val.col(q).dot(zl) - exact.zeta(p.x, p.t);
      const double eu = ztab.val.col(q).dot(ul) - exact.u(p.x, p.t);
      const double es = stab.val.col(q).dot(sl) - exact.sigma(p.x, p.t);
      const double ezx = Zgx.col(q).dot(zl) - exact.zeta_x(p.x, p.t);
      const double ezt = Zgt.col(q).dot(zl) - exact.zeta_t(p.x, p.t);
      const double eux = Zgx.col(q).dot(ul) - exact.u_x(p.x, p.t);
      const double eut = Zgt.col(q).dot(ul) - exact.u_t(p.x, p.t);
      const double esx = Sgx.col(q).dot(sl) - exact.sigma_x(p.x, p.t);
      l2z += wq * ez * ez;
      l2u += wq * eu * eu;
      l2s += wq * es * es;
      gz += wq * (ezx * ezx + ezt * ezt);
      gu += wq * (eux * eux + eut * eut);
      gs += wq * esx * esx;
    }
  }
  ErrorNorms n;
  n.l2_zeta = std::sqrt(l2z);
  n.l2_u = std::sqrt(l2u);
  n.l2_sigma = std::sqrt(l2s);
  n.h1_zeta = std::sqrt(l2z + gz);
  n.h1_u = std::sqrt(l2u + gu);
  n.hdiv_sigma = std::sqrt(l2s + gs);
  n.u_norm = std::sqrt(l2z + gz + l2u + gu + l2s + gs);
  return n;
}

// L2(Omega) distance of two slice traces along a t = const line, by 1-D
// Gauss quadrature of the pointwise difference (slice-interface oracle).
inline double trace_l2_distance(const FieldFunction& a, const FieldFunction& b, double t,
                                Interval x_range, int n_panels = 64, int degree = 8) {
  std::vector<double> s, w;
  gauss_legendre_01(std::max(1, (degree + 1) / 2), s, w);
  double acc = 0.0;
  const double dx = x_range.length() / n_panels;
  for (int p = 0; p < n_panels; ++p)
    for (std::size_t i = 0; i < s.size(); ++i) {
      const double x = x_range.lo + (p + s[i]) * dx;
      const double diff = a.evaluate(x, t) - b.evaluate(x, t);
      acc += w[i] * dx * diff * diff;
    }
  return std::sqrt(acc);
}

} // namespace stswe
