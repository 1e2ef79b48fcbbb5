#pragma once

// Energy-norm error indicators, Dörfler marking, and the adaptive
// solve - estimate - mark - refine loop.

#include "stswe/norms.hpp"
#include "stswe/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numeric>
#include <string>
#include <vector>

namespace stswe {

struct IndicatorField {
  Eigen::VectorXd eta; // per-element indicator, >= 0

  double total() const { return std::sqrt(eta.squaredNorm()); }
};

inline IndicatorField indicators(const ErrorRepresenter& rep) {
  IndicatorField f;
  f.eta = rep.element_norm2.cwiseMax(0.0).cwiseSqrt();
  return f;
}

// Minimal-cardinality bulk set: greedy by descending eta, ties broken by the
// lower element index, chasing theta^2 of the squared total.
inline std::vector<int> dorfler_mark(const IndicatorField& ind, double theta) {
  if (!(theta > 0.0) || theta > 1.0) throw std::invalid_argument("dorfler_mark: theta in (0,1]");
  const int n = static_cast<int>(ind.eta.size());
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (ind.eta[a] != ind.eta[b]) return ind.eta[a] > ind.eta[b];
    return a < b;
  });
  double total2 = 0.0;
  for (int k : order) total2 += ind.eta[k] * ind.eta[k]; // same summation order as the scan
  // relative slack absorbs summation roundoff for exactly-tied indicators
  const double target = theta * theta * total2 * (1.0 - 1e-12);
  std::vector<int> marked;
  double acc = 0.0;
  for (int k : order) {
    if (acc >= target || ind.eta[k] == 0.0) break;
    marked.push_back(k);
    acc += ind.eta[k] * ind.eta[k];
  }
  std::sort(marked.begin(), marked.end());
  return marked;
}

struct AdaptConfig {
  double theta = 0.5;
  int max_refinements = 8;
  double stop_tolerance = 0.0; // stop once the global estimate falls below
  long dof_budget = 0;         // stop once trial dofs reach this (0 = none)
};

struct StepRow {
  int refine_step = 0;
  int n_elements = 0;
  long n_dofs = 0;
  double estimate = 0.0;
  double err_l2_zeta = std::numeric_limits<double>::quiet_NaN();
  double err_l2_u = std::numeric_limits<double>::quiet_NaN();
  double err_l2_sigma = std::numeric_limits<double>::quiet_NaN();
  double err_u = std::numeric_limits<double>::quiet_NaN();
  int newton_iters = 0;
};

struct RunRecord {
  std::string case_name;
  std::vector<std::pair<std::string, std::string>> params; // metadata echo
  std::vector<StepRow> rows;
};

// Nodal interpolation of a state onto a bisected mesh, using the refinement
// provenance to evaluate on the correct parent element.
inline TrialState transfer_state(const TrialState& old_state, const Discretization& old_d,
                                 const SpaceTimeMesh& new_mesh, const Discretization& new_d) {
  TrialState out = zero_state(new_d);
  auto move_field = [&](const FieldFunction& src, FieldFunction& dst, const FESpace& dst_space) {
    const auto& basis = dst_space.basis();
    for (int k = 0; k < new_mesh.n_triangles(); ++k) {
      const int parent = new_mesh.parent_element[k];
      const AffineMap pmap = AffineMap::of(*old_d.mesh, parent);
      const int* dofs = dst_space.cell_dofs(k);
      const AffineMap cmap = AffineMap::of(new_mesh, k);
      for (int l = 0; l < dst_space.n_local(); ++l) {
        const Point p = cmap.to_phys(basis.nodes[l].first, basis.nodes[l].second);
        const double dx = p.x - pmap.origin.x, dt = p.t - pmap.origin.t;
        const double xi = pmap.i00 * dx + pmap.i01 * dt;
        const double eta = pmap.i10 * dx + pmap.i11 * dt;
        dst.coeffs[dofs[l]] = src.eval_on_element(parent, xi, eta);
      }
    }
  };
  move_field(old_state.zeta, out.zeta, new_d.scalar_space);
  move_field(old_state.u, out.u, new_d.scalar_space);
  move_field(old_state.sigma, out.sigma, new_d.sigma_space);
  return out;
}

// Dual norm of the residual over an enriched broken test space (degree
// r + enrichment): the fine-space surrogate of the true energy error used to
// measure estimator effectivity.
inline double energy_error_surrogate(const TrialState& U, const ProblemSpec& spec,
                                     const SpaceTimeMesh& mesh, SpaceConfig cfg, int enrichment = 2) {
  cfg.test_degree += enrichment;
  cfg.quadrature_degree = 2 * std::max(cfg.trial_degree, cfg.test_degree) + 2;
  const Discretization fine = make_discretization(mesh, cfg);
  TrialState V; // same coefficients viewed through the enriched context
  V.zeta = FieldFunction{&fine.scalar_space, U.zeta.coeffs};
  V.u = FieldFunction{&fine.scalar_space, U.u.coeffs};
  V.sigma = FieldFunction{&fine.sigma_space, U.sigma.coeffs};
  ElementSystem sys;
  double acc = 0.0;
  for (int k = 0; k < mesh.n_triangles(); ++k) {
    assemble_element(fine, spec, V, k, WantGram | WantResidual, sys);
    Eigen::LLT<Eigen::MatrixXd> llt(sys.gram);
    if (llt.info() != Eigen::Success)
      throw SolverFailure("energy_error_surrogate: Gram factorization failed");
    acc += sys.residual.dot(llt.solve(sys.residual));
  }
  return std::sqrt(std::max(0.0, acc));
}

struct AdaptResult {
  RunRecord record;
  std::shared_ptr<const SpaceTimeMesh> mesh;
  std::shared_ptr<const Discretization> disc;
  TrialState state;
  ErrorRepresenter rep;
  IndicatorField ind;
};

inline AdaptResult adapt_loop(const ProblemSpec& spec, SpaceTimeMesh initial_mesh,
                              const SpaceConfig& space_cfg, const AdaptConfig& acfg,
                              const NewtonConfig& ncfg = {}) {
  spec.validate();
  AdaptResult result;
  result.record.case_name = spec.name;

  auto mesh = std::make_shared<const SpaceTimeMesh>(std::move(initial_mesh));
  auto disc = std::make_shared<const Discretization>(make_discretization(*mesh, space_cfg));
  Constraints con = apply_initial_conditions(*disc, spec);
  TrialState guess = initial_state(*disc, spec);

  for (int step = 0;; ++step) {
    NewtonResult sol;
    try {
      sol = newton_solve(std::move(guess), spec, *disc, con, ncfg);
    } catch (const NonConvergence& e) {
      throw SolverFailure("adapt_loop: solver failed at refinement step " + std::to_string(step) +
                          ": " + e.what());
    }

    StepRow row;
    row.refine_step = step;
    row.n_elements = mesh->n_triangles();
    row.n_dofs = disc->n_trial();
    row.estimate = sol.rep.global_norm;
    row.newton_iters = sol.iterations;
    if (spec.exact) {
      const ErrorNorms e = error_norms(sol.state, *spec.exact, space_cfg.error_quadrature_degree());
      row.err_l2_zeta = e.l2_zeta;
      row.err_l2_u = e.l2_u;
      row.err_l2_sigma = e.l2_sigma;
      row.err_u = e.u_norm;
    }
    result.record.rows.push_back(row);

    result.ind = indicators(sol.rep);
    const bool budget_hit = acfg.dof_budget > 0 && disc->n_trial() >= acfg.dof_budget;
    if (step >= acfg.max_refinements || sol.rep.global_norm <= acfg.stop_tolerance || budget_hit) {
      result.state = std::move(sol.state);
      result.rep = std::move(sol.rep);
      break;
    }

    const std::vector<int> marked = dorfler_mark(result.ind, acfg.theta);
    auto finer = std::make_shared<const SpaceTimeMesh>(bisect(*mesh, marked));
    auto finer_disc = std::make_shared<const Discretization>(make_discretization(*finer, space_cfg));
    Constraints finer_con = apply_initial_conditions(*finer_disc, spec);
    guess = transfer_state(sol.state, *disc, *finer, *finer_disc);
    enforce_constraints(guess, finer_con, *finer_disc);
    mesh = std::move(finer);
    disc = std::move(finer_disc);
    con = std::move(finer_con);
  }
  result.mesh = mesh;
  result.disc = disc;
  return result;
}

} // namespace stswe
