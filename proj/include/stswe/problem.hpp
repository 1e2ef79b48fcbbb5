#pragma once

// Physical parameters, boundary/initial data, and problem definitions for the
// viscous 1-D shallow water system in space-time form.

#include "stswe/mesh.hpp"

#include <functional>
#include <optional>
#include <stdexcept>
#include <string>

namespace stswe {

using ScalarFn = std::function<double(double)>;          // of x or of t
using SpaceTimeFn = std::function<double(double, double)>; // of (x, t)

struct PhysicalParams {
  double g = 9.81;      // gravitational acceleration [m/s^2]
  double mu = 0.0;      // depth-averaged turbulent viscosity
  double tau_bf = 0.0;  // linear bottom friction factor [1/s]
  ScalarFn bathymetry = [](double) { return 0.0; };            // h_b(x) [m]
  SpaceTimeFn body_force = [](double, double) { return 0.0; }; // f(x,t)
  SpaceTimeFn continuity_source = [](double, double) { return 0.0; }; // s_zeta (manufactured)

  void validate() const {
    if (!(g > 0.0)) throw std::invalid_argument("PhysicalParams: g > 0 required");
    if (mu < 0.0 || tau_bf < 0.0) throw std::invalid_argument("PhysicalParams: mu, tau_bf >= 0");
  }
};

// Weak boundary treatment of one lateral side. Traces with prescribed data are
// substituted into the Green's-identity edge terms and moved to the load;
// traces without data stay in the form as unknowns. SpatialOutflow drops the
// elevation edge term entirely (weak zero elevation).
struct SideCondition {
  BoundaryTag designation = BoundaryTag::SpatialInflow;
  std::optional<ScalarFn> zeta_hat;  // elevation datum, of t
  std::optional<ScalarFn> u_hat;     // velocity datum, of t
  std::optional<ScalarFn> sigma_hat; // stress datum, of t
};

// Exact solution with the derivatives needed for H1/U-norm errors and for
// manufactured-source verification.
struct ExactSolution {
  SpaceTimeFn zeta, zeta_x, zeta_t;
  SpaceTimeFn u, u_x, u_t;
  SpaceTimeFn sigma, sigma_x;
};

struct ProblemSpec {
  std::string name = "problem";
  PhysicalParams params;
  Interval x_domain{0.0, 1.0};
  Interval t_domain{0.0, 1.0};
  SideCondition left, right;
  ScalarFn zeta0 = [](double) { return 0.0; };
  ScalarFn u0 = [](double) { return 0.0; };
  bool linearized = false; // freeze convection, use H = h_b in the mass flux
  std::optional<ExactSolution> exact;

  void validate() const {
    params.validate();
    if (!x_domain.nonempty() || !t_domain.nonempty())
      throw std::invalid_argument("ProblemSpec: empty domain");
  }

  const SideCondition& side_at(double x) const {
    const double mid = 0.5 * (x_domain.lo + x_domain.hi);
    return x < mid ? left : right;
  }
};

} // namespace stswe
