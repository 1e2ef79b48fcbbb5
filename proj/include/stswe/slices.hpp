#pragma once

// Sequential time-slice driver: partition (t0,T) into slabs, solve each with
// the previous slab's terminal trace as initial condition (pointwise nodal
// evaluation), optionally adapting each slab.

#include "stswe/adapt.hpp"

#include <memory>
#include <optional>
#include <stdexcept>
#include <vector>

namespace stswe {

struct SliceConfig {
  std::vector<double> boundaries;      // t0 < t1 < ... < tS
  int nx = 1, nt = 1;                  // fresh structured mesh per slice
  std::optional<AdaptConfig> adapt;    // when set, each slice runs the adaptive loop

  static SliceConfig equal(Interval t_domain, int n_slices, int nx, int nt) {
    if (n_slices < 1) throw std::invalid_argument("SliceConfig: n_slices >= 1");
    SliceConfig c;
    c.nx = nx;
    c.nt = nt;
    c.boundaries.resize(n_slices + 1);
    for (int k = 0; k <= n_slices; ++k)
      c.boundaries[k] = t_domain.lo + t_domain.length() * (static_cast<double>(k) / n_slices);
    return c;
  }

  void validate() const {
    if (boundaries.size() < 2) throw std::invalid_argument("SliceConfig: need at least one slice");
    for (std::size_t i = 1; i < boundaries.size(); ++i)
      if (!(boundaries[i] > boundaries[i - 1]))
        throw std::invalid_argument("SliceConfig: boundaries must increase strictly");
  }
};

struct SliceResult {
  Interval t_range;
  AdaptResult solution; // single solve when no adaptivity (record of length 1)
};

inline std::vector<SliceResult> run_slices(const ProblemSpec& spec, const SliceConfig& scfg,
                                           const SpaceConfig& space_cfg, const NewtonConfig& ncfg = {}) {
  scfg.validate();
  spec.validate();
  std::vector<SliceResult> out;
  const int S = static_cast<int>(scfg.boundaries.size()) - 1;
  out.reserve(S);

  // Keep previous slice alive for the interface evaluation.
  std::shared_ptr<const Discretization> prev_disc;
  TrialState prev_state;

  for (int s = 0; s < S; ++s) {
    ProblemSpec slice_spec = spec;
    slice_spec.t_domain = Interval{scfg.boundaries[s], scfg.boundaries[s + 1]};
    slice_spec.name = spec.name + "_slice" + std::to_string(s);
    if (s > 0) {
      // Terminal trace of the previous slab, sampled at the new nodes. The
      // captured discretization pointer pins the previous slice's spaces.
      const double t_if = scfg.boundaries[s];
      const FieldFunction zeta_prev = prev_state.zeta;
      const FieldFunction u_prev = prev_state.u;
      const auto keep = prev_disc;
      slice_spec.zeta0 = [zeta_prev, t_if, keep](double x) { return zeta_prev.evaluate(x, t_if); };
      slice_spec.u0 = [u_prev, t_if, keep](double x) { return u_prev.evaluate(x, t_if); };
    }

    SpaceTimeMesh mesh = build_structured(spec.x_domain, slice_spec.t_domain, scfg.nx, scfg.nt,
                                          spec.left.designation, spec.right.designation);
    AdaptConfig acfg = scfg.adapt.value_or(AdaptConfig{0.5, 0, 0.0, 0});
    if (!scfg.adapt) acfg.max_refinements = 0;

    SliceResult sr;
    sr.t_range = slice_spec.t_domain;
    try {
      sr.solution = adapt_loop(slice_spec, std::move(mesh), space_cfg, acfg, ncfg);
    } catch (const SolverFailure& e) {
      throw SolverFailure("run_slices: slice " + std::to_string(s) + ": " + e.what());
    }
    prev_disc = sr.solution.disc;
    prev_state = sr.solution.state;
    out.push_back(std::move(sr));
  }
  return out;
}

// Aggregated L2 errors over the union of slices (slices tile Omega_T).
struct SliceErrors {
  double l2_zeta = 0, l2_u = 0, l2_sigma = 0, u_norm = 0;
  long n_dofs = 0;
};

inline SliceErrors aggregate_errors(const std::vector<SliceResult>& slices, const ExactSolution& exact,
                                    int quad_degree) {
  SliceErrors agg;
  double z2 = 0, u2 = 0, s2 = 0, U2 = 0;
  for (const auto& s : slices) {
    const ErrorNorms e = error_norms(s.solution.state, exact, quad_degree);
    z2 += e.l2_zeta * e.l2_zeta;
    u2 += e.l2_u * e.l2_u;
    s2 += e.l2_sigma * e.l2_sigma;
    U2 += e.u_norm * e.u_norm;
    agg.n_dofs += s.solution.record.rows.back().n_dofs;
  }
  agg.l2_zeta = std::sqrt(z2);
  agg.l2_u = std::sqrt(u2);
  agg.l2_sigma = std::sqrt(s2);
  agg.u_norm = std::sqrt(U2);
  return agg;
}

// Matched-budget comparison of the full space-time and slice drivers. The
// budget is the size of one solve (the quantity the slice approach keeps low):
// each slice adapts until its own system reaches the full run's dof count.
struct ComparisonRow {
  long budget = 0;               // per-solve dof budget
  long dofs_full = 0;            // full space-time system size
  long dofs_slices_max = 0;      // largest single slice system
  long dofs_slices_total = 0;
  double err_zeta_full = 0, err_u_full = 0;
  double err_zeta_slices = 0, err_u_slices = 0;
};

struct ComparisonTable {
  std::vector<ComparisonRow> rows;
  RunRecord full_record;
};

inline ComparisonTable compare_full_vs_slices(const ProblemSpec& spec, int full_nx, int full_nt,
                                              int n_slices, int slice_nx, int slice_nt,
                                              const SpaceConfig& space_cfg, const AdaptConfig& acfg,
                                              const NewtonConfig& ncfg = {}) {
  if (!spec.exact) throw std::invalid_argument("compare_full_vs_slices: exact solution required");
  ComparisonTable table;

  // Full space-time adaptive run; its per-step dof counts become the budgets.
  SpaceTimeMesh full_mesh = build_structured(spec.x_domain, spec.t_domain, full_nx, full_nt,
                                             spec.left.designation, spec.right.designation);
  AdaptResult full = adapt_loop(spec, std::move(full_mesh), space_cfg, acfg, ncfg);
  table.full_record = full.record;

  for (const StepRow& row : full.record.rows) {
    ComparisonRow c;
    c.budget = row.n_dofs;
    c.dofs_full = row.n_dofs;
    c.err_zeta_full = row.err_l2_zeta;
    c.err_u_full = row.err_l2_u;

    SliceConfig scfg = SliceConfig::equal(spec.t_domain, n_slices, slice_nx, slice_nt);
    AdaptConfig per_slice = acfg;
    per_slice.dof_budget = row.n_dofs;
    per_slice.max_refinements = 64; // budget-limited
    scfg.adapt = per_slice;
    const auto slices = run_slices(spec, scfg, space_cfg, ncfg);
    const SliceErrors se = aggregate_errors(slices, *spec.exact, space_cfg.error_quadrature_degree());
    for (const auto& s : slices)
      c.dofs_slices_max = std::max(c.dofs_slices_max, s.solution.record.rows.back().n_dofs);
    c.dofs_slices_total = se.n_dofs;
    c.err_zeta_slices = se.l2_zeta;
    c.err_u_slices = se.l2_u;
    table.rows.push_back(c);
  }
  return table;
}

} // namespace stswe
