#pragma once

// Quadrature on the reference triangle (0,0),(1,0),(0,1) via the conical
// product of Gauss-Legendre rules, plus the companion 1-D rule on [0,1] used
// for edge integrals. Weights on the triangle sum to 1/2.

#include <cmath>
#include <stdexcept>
#include <vector>

namespace stswe {

// Gauss-Legendre nodes/weights on [0,1], exact for degree <= 2n-1.
inline void gauss_legendre_01(int n, std::vector<double>& nodes, std::vector<double>& weights) {
  if (n < 1) throw std::invalid_argument("gauss_legendre_01: n >= 1 required");
  nodes.assign(n, 0.0);
  weights.assign(n, 0.0);
  const double pi = 3.14159265358979323846;
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(pi * (i + 0.75) / (n + 0.5)); // root of P_n on [-1,1]
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      // Legendre recurrence for P_n(x) and P_n'(x)
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    nodes[n - 1 - i] = 0.5 * (x + 1.0);
    nodes[i] = 0.5 * (1.0 - x);
    weights[i] = weights[n - 1 - i] = 0.5 * w;
  }
}

struct QuadratureRule {
  int exactness = 0;            // total polynomial degree integrated exactly
  std::vector<double> xi, eta, w; // triangle points/weights (sum w = 1/2)
  std::vector<double> s1d, w1d;   // edge rule on [0,1] (sum w1d = 1)

  int n_points() const { return static_cast<int>(w.size()); }
  int n_edge_points() const { return static_cast<int>(w1d.size()); }

  static QuadratureRule triangle(int degree) {
    if (degree < 0) throw std::invalid_argument("QuadratureRule: degree >= 0");
    QuadratureRule rule;
    rule.exactness = degree;
    // Duffy map (xi, eta) = (s(1-t), t): the extra (1-t) Jacobian raises the
    // t-direction degree by one, hence n such that 2n-1 >= degree+1.
    const int n = std::max(1, (degree + 3) / 2);
    std::vector<double> gs, gw;
    gauss_legendre_01(n, gs, gw);
    rule.xi.reserve(n * n);
    rule.eta.reserve(n * n);
    rule.w.reserve(n * n);
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) {
        rule.xi.push_back(gs[i] * (1.0 - gs[j]));
        rule.eta.push_back(gs[j]);
        rule.w.push_back(gw[i] * gw[j] * (1.0 - gs[j]));
      }
    gauss_legendre_01(std::max(1, (degree + 2) / 2), rule.s1d, rule.w1d);
    return rule;
  }
};

} // namespace stswe
