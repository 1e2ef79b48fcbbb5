#pragma once

// The benchmark problems (manufactured convergence case, lake at rest, tidal
// channel, dam break), series sampling, rate fitting, and the periodogram
// frequency estimate used by the tidal checks.

#include "stswe/problem.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace stswe {

// Smooth manufactured solution: zeta = cos(x-t), u = sin(x+t), sigma = cos(x+t)
// with sources closing the 1-D system. Nonlinear mode uses h_b = 0 (H = zeta);
// linearized mode uses constant h_b = 1 and the frozen operator.
inline ProblemSpec manufactured_case(double final_time = 0.5, double mu = 1e-5, double tau_bf = 1.0,
                                     bool linearized = false) {
  ProblemSpec spec;
  spec.name = linearized ? "manufactured_linear" : "manufactured";
  spec.linearized = linearized;
  spec.x_domain = Interval{0.0, 1.0};
  spec.t_domain = Interval{0.0, final_time};
  spec.params.mu = mu;
  spec.params.tau_bf = tau_bf;
  const double g = spec.params.g;
  const double hb = linearized ? 1.0 : 0.0;
  spec.params.bathymetry = [hb](double) { return hb; };

  ExactSolution ex;
  ex.zeta = [](double x, double t) { return std::cos(x - t); };
  ex.zeta_x = [](double x, double t) { return -std::sin(x - t); };
  ex.zeta_t = [](double x, double t) { return std::sin(x - t); };
  ex.u = [](double x, double t) { return std::sin(x + t); };
  ex.u_x = [](double x, double t) { return std::cos(x + t); };
  ex.u_t = [](double x, double t) { return std::cos(x + t); };
  ex.sigma = [](double x, double t) { return std::cos(x + t); };
  ex.sigma_x = [](double x, double t) { return -std::sin(x + t); };
  spec.exact = ex;

  if (linearized) {
    spec.params.continuity_source = [hb](double x, double t) {
      return std::sin(x - t) + hb * std::cos(x + t);
    };
    spec.params.body_force = [g, mu, tau_bf](double x, double t) {
      return std::cos(x + t) + tau_bf * std::sin(x + t) - g * std::sin(x - t) + mu * std::sin(x + t);
    };
  } else {
    spec.params.continuity_source = [](double x, double t) {
      return std::sin(x - t) + std::cos(2.0 * x);
    };
    spec.params.body_force = [g, mu, tau_bf](double x, double t) {
      return std::cos(x + t) + std::sin(x + t) * std::cos(x + t) + tau_bf * std::sin(x + t) -
             g * std::sin(x - t) + mu * std::sin(x + t);
    };
  }

  spec.zeta0 = [ex](double x) { return ex.zeta(x, 0.0); };
  spec.u0 = [ex](double x) { return ex.u(x, 0.0); };
  // elevation and velocity data on both lateral sides, read off the exact fields
  spec.left.designation = BoundaryTag::SpatialInflow;
  spec.left.zeta_hat = [ex](double t) { return ex.zeta(0.0, t); };
  spec.left.u_hat = [ex](double t) { return ex.u(0.0, t); };
  spec.right.designation = BoundaryTag::SpatialInflow;
  spec.right.zeta_hat = [ex](double t) { return ex.zeta(1.0, t); };
  spec.right.u_hat = [ex](double t) { return ex.u(1.0, t); };
  return spec;
}

// Note: the initial data of manufactured_case depends only on t=0 traces, so
// the same spec is reusable on sub-sliced time domains (slices provide their
// own initial data).

constexpr double tidal_alpha = 0.00014051891708;

// 10 km channel, 7 days of tidal forcing at the left end, closed wall at the
// right end (velocity datum zero, elevation free).
inline ProblemSpec tidal_case() {
  ProblemSpec spec;
  spec.name = "tidal";
  spec.x_domain = Interval{0.0, 10000.0};
  spec.t_domain = Interval{0.0, 604800.0};
  spec.params.mu = 25.0;
  spec.params.tau_bf = 0.01;
  spec.params.bathymetry = [](double) { return 10.0; };
  spec.left.designation = BoundaryTag::SpatialInflow;
  spec.left.zeta_hat = [](double t) { return 0.1 * std::cos(t * tidal_alpha); };
  spec.left.sigma_hat = [](double) { return 0.0; };
  spec.right.designation = BoundaryTag::SpatialInflow; // wall: no elevation datum
  spec.right.u_hat = [](double) { return 0.0; };
  return spec;
}

// 2 km channel, 10 m over 5 m reservoir separated at x = 1000 m, wall on the
// left, zero-elevation outflow on the right. T = 200 s.
inline ProblemSpec dambreak_case() {
  ProblemSpec spec;
  spec.name = "dambreak";
  spec.x_domain = Interval{0.0, 2000.0};
  spec.t_domain = Interval{0.0, 200.0};
  spec.params.mu = 1e-2;
  spec.params.tau_bf = 1.0;
  spec.zeta0 = [](double x) { return x <= 1000.0 ? 10.0 : 5.0; };
  spec.left.designation = BoundaryTag::SpatialInflow; // wall: elevation free
  spec.left.u_hat = [](double) { return 0.0; };
  spec.right.designation = BoundaryTag::SpatialOutflow; // weak zero elevation
  return spec;
}

// Lake at rest over a quartic bathymetry bump: still initial data, zero
// forcing, walls on both sides. The exact solution is identically zero.
inline ProblemSpec lake_case() {
  ProblemSpec spec;
  spec.name = "lake";
  spec.x_domain = Interval{0.0, 1.0};
  spec.t_domain = Interval{0.0, 10.0};
  spec.params.mu = 1e-5;
  spec.params.tau_bf = 1.0;
  spec.params.bathymetry = [](double x) {
    const double h0 = (x > 0.3 && x < 0.7)
                          ? 156.25 * (x - 0.3) * (x - 0.3) * (0.7 - x) * (0.7 - x)
                          : 0.0; // peak 0.25 at x = 0.5
    return 2.0 - h0;
  };
  spec.left.designation = BoundaryTag::SpatialInflow;
  spec.left.zeta_hat = [](double) { return 0.0; };
  spec.left.u_hat = [](double) { return 0.0; };
  spec.right.designation = BoundaryTag::SpatialOutflow;
  spec.right.u_hat = [](double) { return 0.0; };

  ExactSolution still;
  auto zero2 = [](double, double) { return 0.0; };
  still.zeta = still.zeta_x = still.zeta_t = zero2;
  still.u = still.u_x = still.u_t = zero2;
  still.sigma = still.sigma_x = zero2;
  spec.exact = still;
  return spec;
}

// Least-squares slope of log(error) against log(h).
inline double rate_fit(const std::vector<double>& h, const std::vector<double>& err) {
  if (h.size() != err.size() || h.size() < 3)
    throw std::invalid_argument("rate_fit: need at least 3 pairs");
  const int n = static_cast<int>(h.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (int i = 0; i < n; ++i) {
    if (!(h[i] > 0.0) || !(err[i] > 0.0))
      throw std::invalid_argument("rate_fit: values must be positive");
    const double x = std::log(h[i]), y = std::log(err[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

// Periodogram power at angular frequency omega.
inline double periodogram_power(const std::vector<double>& t, const std::vector<double>& y, double omega) {
  double c = 0, s = 0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    c += y[i] * std::cos(omega * t[i]);
    s += y[i] * std::sin(omega * t[i]);
  }
  return c * c + s * s;
}

// Dominant angular frequency: coarse DFT-bin scan refined by golden-section
// maximization (bin spacing over a 7-day window is far coarser than 1%).
inline double dominant_frequency(const std::vector<double>& t, const std::vector<double>& y) {
  if (t.size() < 8) throw std::invalid_argument("dominant_frequency: series too short");
  const double span = t.back() - t.front();
  const double dw = 2.0 * 3.14159265358979323846 / span;
  const int kmax = static_cast<int>(t.size()) / 2;
  int best_k = 1;
  double best_p = -1.0;
  for (int k = 1; k <= kmax; ++k) {
    const double p = periodogram_power(t, y, k * dw);
    if (p > best_p) {
      best_p = p;
      best_k = k;
    }
  }
  double lo = std::max(0.5 * dw, (best_k - 1) * dw), hi = (best_k + 1) * dw;
  const double gr = 0.61803398874989485;
  double a = hi - gr * (hi - lo), b = lo + gr * (hi - lo);
  double pa = periodogram_power(t, y, a), pb = periodogram_power(t, y, b);
  for (int iter = 0; iter < 200 && hi - lo > 1e-12 * dw; ++iter) {
    if (pa > pb) {
      hi = b;
      b = a;
      pb = pa;
      a = hi - gr * (hi - lo);
      pa = periodogram_power(t, y, a);
    } else {
      lo = a;
      a = b;
      pa = pb;
      b = lo + gr * (hi - lo);
      pb = periodogram_power(t, y, b);
    }
  }
  return 0.5 * (lo + hi);
}

// Indices of interior local maxima above a prominence floor.
inline std::vector<int> local_maxima(const std::vector<double>& y, double min_height) {
  std::vector<int> out;
  for (std::size_t i = 1; i + 1 < y.size(); ++i)
    if (y[i] > y[i - 1] && y[i] >= y[i + 1] && y[i] >= min_height) out.push_back(static_cast<int>(i));
  return out;
}

} // namespace stswe
