#pragma once

// Newton solver for the mixed saddle-point system via static
// condensation through the block-diagonal Gram: element-wise Riesz solves
// e_K = G_K^{-1} (F_K - B_K(U)) give the error representer, and the condensed
// normal system B'^T G^{-1} B' dU = B'^T G^{-1} (F - B(U)) gives the trial
// update on unconstrained dofs. A full saddle assembly is kept as a testing
// oracle. Initial conditions are applied strongly on the t = t0 trace.

#include "stswe/forms.hpp"

#include <Eigen/Cholesky>
#include <Eigen/IterativeLinearSolvers>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace stswe {

struct SolverFailure : std::runtime_error {
  explicit SolverFailure(const std::string& what) : std::runtime_error(what) {}
};

struct NonConvergence : std::runtime_error {
  std::vector<double> residual_history;
  NonConvergence(const std::string& what, std::vector<double> history)
      : std::runtime_error(what), residual_history(std::move(history)) {}
};

enum class LinearSolver { DirectSparse, ConjugateGradient };

struct NewtonConfig {
  double abs_tol = 1e-14;
  double rel_tol = 1e-12;
  int max_iter = 20;
  LinearSolver linear = LinearSolver::DirectSparse;
  int max_halvings = 8;
  // Include the second-derivative term B''[.,.;e] in the condensed matrix
  // (true Newton on the mixed system). Without it the iteration is
  // Gauss-Newton, which converges only linearly when the representer stays
  // large (under-resolved shocks); with it active too early the indefinite
  // curvature produces erratic steps. newton_solve switches it on once the
  // monitor has dropped below curvature_threshold relative to its initial
  // value. Ignored in CG mode, which needs SPD.
  bool use_curvature = true;
  double curvature_threshold = 1e-3;
};

// Strong initial conditions: every zeta/u trial dof whose node sits on the
// t = t0 boundary is fixed to the interpolated value; sigma carries none.
struct Constraints {
  std::vector<char> constrained; // per trial dof
  Eigen::VectorXd values;        // full-length, zero on free dofs
  int n_free = 0;
  std::vector<int> free_index;   // trial dof -> condensed index or -1
};

inline Constraints apply_initial_conditions(const Discretization& d, const ProblemSpec& spec) {
  Constraints c;
  const int n = d.n_trial();
  c.constrained.assign(n, 0);
  c.values = Eigen::VectorXd::Zero(n);
  const double t0 = spec.t_domain.lo;
  const double tol = 1e-12 * std::max(1.0, std::abs(spec.t_domain.length()));
  for (int g = 0; g < d.scalar_space.n_dofs(); ++g) {
    if (std::abs(d.scalar_space.dof_coords[g].t - t0) > tol) continue;
    const double x = d.scalar_space.dof_coords[g].x;
    const double z = spec.zeta0(x), u = spec.u0(x);
    if (!std::isfinite(z) || !std::isfinite(u))
      throw std::invalid_argument("apply_initial_conditions: non-finite initial datum");
    c.constrained[g] = 1;
    c.values[g] = z;
    c.constrained[d.u_offset + g] = 1;
    c.values[d.u_offset + g] = u;
  }
  c.free_index.assign(n, -1);
  for (int g = 0; g < n; ++g)
    if (!c.constrained[g]) c.free_index[g] = c.n_free++;
  return c;
}

// Writes the constrained values into a state (after transfer between meshes).
inline void enforce_constraints(TrialState& U, const Constraints& con, const Discretization& d) {
  const int nz = d.scalar_space.n_dofs();
  for (int g = 0; g < d.n_trial(); ++g) {
    if (!con.constrained[g]) continue;
    if (g < nz) U.zeta.coeffs[g] = con.values[g];
    else if (g < 2 * nz) U.u.coeffs[g - d.u_offset] = con.values[g];
    else U.sigma.coeffs[g - d.sigma_offset] = con.values[g];
  }
}

// Initial guess: zeta0/u0 extended constantly in time, sigma zero.
inline TrialState initial_state(const Discretization& d, const ProblemSpec& spec) {
  TrialState s = zero_state(d);
  for (int g = 0; g < d.scalar_space.n_dofs(); ++g) {
    const double x = d.scalar_space.dof_coords[g].x;
    s.zeta.coeffs[g] = spec.zeta0(x);
    s.u.coeffs[g] = spec.u0(x);
  }
  return s;
}

// Riesz representer of the residual on the broken test space, with per-element
// V-norm^2 (the squared error indicators).
struct ErrorRepresenter {
  FieldFunction e_zeta, e_u, e_sigma; // broken test-space fields
  Eigen::VectorXd element_norm2;
  double global_norm = 0.0;
};

struct StepResult {
  Eigen::VectorXd delta;  // full trial length; zero on constrained dofs
  ErrorRepresenter rep;   // representer at the input state
  double rho = 0.0;       // l2 norm of the condensed gradient B'^T G^{-1} (F - B)
  double decrement = 0.0; // Newton decrement sqrt(b^T A^{-1} b): distance-to-solution estimate
};

inline StepResult condensed_step(const TrialState& U, const ProblemSpec& spec, const Discretization& d,
                                 const Constraints& con, const NewtonConfig& cfg = {}) {
  require_same_mesh(U, d);
  const int M = d.mesh->n_triangles();
  const int nv = d.test_space.n_local();
  const int Nv = d.test_space.n_dofs();

  StepResult out;
  out.rep.e_zeta = FieldFunction{&d.test_space, Eigen::VectorXd::Zero(Nv)};
  out.rep.e_u = FieldFunction{&d.test_space, Eigen::VectorXd::Zero(Nv)};
  out.rep.e_sigma = FieldFunction{&d.test_space, Eigen::VectorXd::Zero(Nv)};
  out.rep.element_norm2.setZero(M);

  const bool curvature =
      cfg.use_curvature && !spec.linearized && cfg.linear == LinearSolver::DirectSparse;

  Eigen::VectorXd b = Eigen::VectorXd::Zero(con.n_free);
  std::vector<Eigen::Triplet<double>> trip, trip_curv;
  trip.reserve(static_cast<std::size_t>(M) * d.n_local_trial() * d.n_local_trial());
  if (curvature) trip_curv.reserve(trip.capacity());

  ElementSystem sys;
  Eigen::MatrixXd D;
  std::vector<int> udofs;
  for (int k = 0; k < M; ++k) {
    assemble_element(d, spec, U, k, WantGram | WantJacobian | WantResidual, sys);
    Eigen::LLT<Eigen::MatrixXd> llt(sys.gram);
    if (llt.info() != Eigen::Success)
      throw SolverFailure("condensed_step: Gram factorization failed on element " + std::to_string(k));

    const Eigen::VectorXd e_loc = llt.solve(-sys.residual); // G^{-1} (F - B)
    out.rep.element_norm2[k] = e_loc.dot(-sys.residual);    // e^T G e
    const int* td = d.test_space.cell_dofs(k);
    for (int l = 0; l < nv; ++l) {
      out.rep.e_zeta.coeffs[td[l]] = e_loc[l];
      out.rep.e_u.coeffs[td[l]] = e_loc[nv + l];
      out.rep.e_sigma.coeffs[td[l]] = e_loc[2 * nv + l];
    }

    const Eigen::MatrixXd Linv_J = llt.matrixL().solve(sys.jac);
    const Eigen::MatrixXd A_loc = Linv_J.transpose() * Linv_J; // J^T G^{-1} J
    const Eigen::VectorXd b_loc = sys.jac.transpose() * e_loc; // J^T G^{-1} (F - B)
    if (curvature) curvature_matrix(d, spec, k, e_loc, D);

    d.trial_dofs(k, udofs);
    for (int i = 0; i < d.n_local_trial(); ++i) {
      const int gi = con.free_index[udofs[i]];
      if (gi < 0) continue;
      b[gi] += b_loc[i];
      for (int j = 0; j < d.n_local_trial(); ++j) {
        const int gj = con.free_index[udofs[j]];
        if (gj < 0) continue;
        trip.emplace_back(gi, gj, A_loc(i, j));
        if (curvature && D(i, j) != 0.0) trip_curv.emplace_back(gi, gj, -D(i, j));
      }
    }
  }
  out.rep.global_norm = std::sqrt(std::max(0.0, out.rep.element_norm2.sum()));
  out.rho = b.norm();

  Eigen::SparseMatrix<double> A(con.n_free, con.n_free);
  A.setFromTriplets(trip.begin(), trip.end());

  auto diagnose_and_throw = [&]() {
    // report the worst-conditioned element Gram alongside the failure
    int worst = -1;
    double worst_cond = 0.0;
    ElementSystem probe;
    for (int k = 0; k < M; ++k) {
      assemble_element(d, spec, U, k, WantGram, probe);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(probe.gram);
      const double cond = es.eigenvalues().maxCoeff() / std::max(es.eigenvalues().minCoeff(), 1e-300);
      if (cond > worst_cond) {
        worst_cond = cond;
        worst = k;
      }
    }
    throw SolverFailure("condensed_step: singular condensed system (worst Gram condition " +
                        std::to_string(worst_cond) + " on element " + std::to_string(worst) + ")");
  };

  Eigen::VectorXd x(con.n_free);
  if (cfg.linear == LinearSolver::DirectSparse) {
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(A);
    if (solver.info() != Eigen::Success) diagnose_and_throw();
    x = solver.solve(b); // Gauss-Newton step
    if (curvature) {
      // true Newton matrix A - D: accepted only when it factors, points
      // downhill, and is not wildly longer than the Gauss-Newton step (far
      // from the solution the indefinite curvature produces erratic steps)
      Eigen::SparseMatrix<double> Dm(con.n_free, con.n_free);
      Dm.setFromTriplets(trip_curv.begin(), trip_curv.end());
      const Eigen::SparseMatrix<double> H = A + Dm;
      Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> newton(H);
      if (newton.info() == Eigen::Success) {
        const Eigen::VectorXd xn = newton.solve(b);
        // unpivoted LDLT of an indefinite matrix can be silently inaccurate
        const bool accurate = (H * xn - b).norm() <= 1e-8 * b.norm() + 1e-300;
        if (accurate && b.dot(xn) > 0.0 && xn.norm() <= 10.0 * x.norm()) x = xn;
      }
    }
  } else {
    Eigen::ConjugateGradient<Eigen::SparseMatrix<double>, Eigen::Lower | Eigen::Upper,
                             Eigen::DiagonalPreconditioner<double>>
        cg(A);
    cg.setTolerance(1e-14);
    cg.setMaxIterations(20 * con.n_free);
    x = cg.solve(b);
    if (cg.info() != Eigen::Success)
      throw SolverFailure("condensed_step: CG did not converge");
  }

  out.decrement = std::sqrt(std::max(0.0, b.dot(x)));
  out.delta = Eigen::VectorXd::Zero(d.n_trial());
  for (int g = 0; g < d.n_trial(); ++g)
    if (con.free_index[g] >= 0) out.delta[g] = x[con.free_index[g]];
  return out;
}

// Reference path: the uncondensed linearized saddle system
//   [ G   B' ] [ e  ]   [ F - B(U) ]
//   [ B'^T D ] [ dU ] = [    0     ]
// assembled globally and solved with sparse LU (D is the curvature block when
// the config enables it, zero otherwise). Testing oracle only.
inline Eigen::VectorXd full_saddle_step(const TrialState& U, const ProblemSpec& spec,
                                        const Discretization& d, const Constraints& con,
                                        const NewtonConfig& cfg = {}) {
  const int M = d.mesh->n_triangles();
  const int Nt = d.n_test();
  const int n = Nt + con.n_free;
  const bool curvature = cfg.use_curvature && !spec.linearized;
  std::vector<Eigen::Triplet<double>> trip;
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);

  ElementSystem sys;
  Eigen::MatrixXd D;
  std::vector<int> tdofs, udofs;
  for (int k = 0; k < M; ++k) {
    assemble_element(d, spec, U, k, WantGram | WantJacobian | WantResidual, sys);
    d.test_dofs(k, tdofs);
    d.trial_dofs(k, udofs);
    const int nte = d.n_local_test();
    for (int i = 0; i < nte; ++i) {
      rhs[tdofs[i]] += -sys.residual[i];
      for (int j = 0; j < nte; ++j) trip.emplace_back(tdofs[i], tdofs[j], sys.gram(i, j));
      for (int j = 0; j < d.n_local_trial(); ++j) {
        const int gj = con.free_index[udofs[j]];
        if (gj < 0) continue;
        trip.emplace_back(tdofs[i], Nt + gj, sys.jac(i, j));
        trip.emplace_back(Nt + gj, tdofs[i], sys.jac(i, j));
      }
    }
    if (curvature) {
      Eigen::LLT<Eigen::MatrixXd> llt(sys.gram);
      const Eigen::VectorXd e_loc = llt.solve(-sys.residual);
      curvature_matrix(d, spec, k, e_loc, D);
      for (int i = 0; i < d.n_local_trial(); ++i) {
        const int gi = con.free_index[udofs[i]];
        if (gi < 0) continue;
        for (int j = 0; j < d.n_local_trial(); ++j) {
          const int gj = con.free_index[udofs[j]];
          if (gj >= 0 && D(i, j) != 0.0) trip.emplace_back(Nt + gi, Nt + gj, D(i, j));
        }
      }
    }
  }
  Eigen::SparseMatrix<double> K(n, n);
  K.setFromTriplets(trip.begin(), trip.end());
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu(K);
  if (lu.info() != Eigen::Success) throw SolverFailure("full_saddle_step: factorization failed");
  const Eigen::VectorXd sol = lu.solve(rhs);

  Eigen::VectorXd delta = Eigen::VectorXd::Zero(d.n_trial());
  for (int g = 0; g < d.n_trial(); ++g)
    if (con.free_index[g] >= 0) delta[g] = sol[Nt + con.free_index[g]];
  return delta;
}

struct NewtonHistoryRow {
  int iteration = 0;
  double representer_norm = 0.0; // estimator eta at this iterate
  double rho = 0.0;              // condensed-gradient norm
  int halvings = 0;
};

struct NewtonResult {
  TrialState state;
  ErrorRepresenter rep;
  int iterations = 0;
  bool converged = false;
  double rho_rel = 0.0;       // final rho relative to the first iterate's
  double decrement_rel = 0.0; // final Newton decrement relative to the state size
  std::vector<NewtonHistoryRow> history;
};

inline void axpy_state(TrialState& U, double alpha, const Eigen::VectorXd& delta, const Discretization& d) {
  const int nz = d.scalar_space.n_dofs();
  U.zeta.coeffs += alpha * delta.segment(0, nz);
  U.u.coeffs += alpha * delta.segment(d.u_offset, nz);
  U.sigma.coeffs += alpha * delta.segment(d.sigma_offset, d.sigma_space.n_dofs());
}

// Newton iteration with step-halving on monitor increase. Convergence when
// the condensed-gradient norm falls below abs_tol, or below rel_tol times its
// value at the first iterate, or when the Newton decrement (the estimated
// distance to the stationary point) falls below abs_tol relative to the state.
inline NewtonResult newton_solve(TrialState U0, const ProblemSpec& spec, const Discretization& d,
                                 const Constraints& con, const NewtonConfig& cfg = {}) {
  NewtonResult res;
  res.state = std::move(U0);
  auto state_scale = [&] {
    return 1.0 + std::sqrt(res.state.zeta.coeffs.squaredNorm() + res.state.u.coeffs.squaredNorm() +
                           res.state.sigma.coeffs.squaredNorm());
  };

  NewtonConfig gauss = cfg;
  gauss.use_curvature = false;
  StepResult step = condensed_step(res.state, spec, d, con, gauss);
  bool step_has_curvature = false;
  const double rho0 = step.rho;
  res.history.push_back({0, step.rep.global_norm, step.rho, 0});
  if (rho0 <= cfg.abs_tol || step.decrement <= cfg.abs_tol * state_scale()) {
    res.rep = std::move(step.rep);
    res.converged = true;
    res.rho_rel = 0.0;
    res.decrement_rel = step.decrement / state_scale();
    return res;
  }

  std::vector<double> rho_hist{rho0};
  for (int it = 1; it <= cfg.max_iter; ++it) {
    const bool want_curvature = cfg.use_curvature && step.rho <= cfg.curvature_threshold * rho0;
    if (want_curvature != step_has_curvature) { // re-solve at the gate flip
      step = condensed_step(res.state, spec, d, con, want_curvature ? cfg : gauss);
      step_has_curvature = want_curvature;
    }
    double alpha = 1.0;
    int halvings = 0;
    StepResult next;
    TrialState trial;
    for (;;) {
      trial = res.state;
      axpy_state(trial, alpha, step.delta, d);
      next = condensed_step(trial, spec, d, con, want_curvature ? cfg : gauss);
      if (next.rho <= step.rho * (1.0 + 1e-12) || halvings >= cfg.max_halvings) break;
      alpha *= 0.5;
      ++halvings;
    }
    const double step_size = alpha * step.delta.lpNorm<Eigen::Infinity>();
    const double state_size = res.state.zeta.coeffs.lpNorm<Eigen::Infinity>() +
                              res.state.u.coeffs.lpNorm<Eigen::Infinity>();
    res.state = std::move(trial);
    res.iterations = it;
    res.history.push_back({it, next.rep.global_norm, next.rho, halvings});
    rho_hist.push_back(next.rho);
    step = std::move(next);
    step_has_curvature = want_curvature;
    if (step.rho <= std::max(cfg.abs_tol, cfg.rel_tol * rho0) ||
        step.decrement <= cfg.abs_tol * state_scale()) {
      res.converged = true;
      break;
    }
    if (step_size <= 1e-15 * (1.0 + state_size)) { // double precision exhausted
      res.converged = true;
      break;
    }
  }
  res.rep = std::move(step.rep);
  res.rho_rel = step.rho / rho0;
  res.decrement_rel = step.decrement / state_scale();
  if (!res.converged)
    throw NonConvergence("newton_solve: no convergence in " + std::to_string(cfg.max_iter) +
                             " iterations (rho_rel " + std::to_string(res.rho_rel) + ")",
                         rho_hist);
  return res;
}

} // namespace stswe
