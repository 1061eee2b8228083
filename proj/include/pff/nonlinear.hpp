#pragma once

// Newton iteration combined with a primal-dual active set method for the
// irreversibility constraint phi <= phi_old, with backtracking line search.
//
// Residual convention: R = A(U), so the multiplier estimate is
// lambda = -B^{-1} R with B the lumped phi mass.

#include <cmath>
#include <iostream>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "pff/fespace.hpp"
#include "pff/krylov.hpp"
#include "pff/mesh.hpp"
#include "pff/mg.hpp"
#include "pff/operator.hpp"

namespace pff {

struct NewtonConfig {
  double tol = 1e-7;
  int max_newton = 50;
  double omega = 0.5;
  int l_max = 10;
  /// c0 = c0_factor * G_c / l where phi_i == phi_old_i.
  double c0_factor = 100.0;
  /// Indicator values within tie_factor * c0 of zero count as ties, which
  /// keeps round-off in an exactly balanced residual out of the set.
  double tie_factor = 1e-15;
  /// phi - phi_old above this counts as infeasible and forces the DoF active.
  double feasibility_tol = 1e-12;

  void validate() const {
    if (!(tol > 0)) throw std::invalid_argument("NewtonConfig: tolerance must be positive");
    if (max_newton < 1) throw std::invalid_argument("NewtonConfig: max_newton must be >= 1");
    if (!(omega > 0 && omega <= 1)) throw std::invalid_argument("NewtonConfig: omega must lie in (0, 1]");
    if (l_max < 1) throw std::invalid_argument("NewtonConfig: l_max must be >= 1");
  }
};

struct SolverConfig {
  NewtonConfig newton;
  GmresConfig gmres;
  MgConfig mg;
  DirichletSpec dirichlet;
  int threads = 1;
  bool verbose = false;
};

/// Row-sum lumped phi mass. With constraints, constrained rows are folded
/// into their masters and keep their own lumped value.
inline Vector lumped_mass_diag(const DofMap& map, const ConstraintSet* constraints = nullptr) {
  Vector b(map.n_dofs_phi(), 0.0);
  for (const auto& c : map.cells)
    for (int node : c.nodes) b[static_cast<std::size_t>(node)] += 0.25 * c.h * c.h;
  if (constraints) {
    Vector folded = b;
    constraints->condense(folded);
    for (std::size_t i = 0; i < b.size(); ++i)
      if (!constraints->is_constrained(i)) b[i] = folded[i];
  }
  return b;
}

inline double active_constant(double lambda, double phi, double phi_old, double c0) {
  const double d = phi - phi_old;
  if (std::abs(d) <= 1e-14) return c0;
  return 2.0 * std::abs(lambda / d);
}

/// lambda_i + c_i (phi_i - phi_old_i) > tie, ties inactive.
inline bool is_active(double lambda, double c, double phi, double phi_old, double tie = 0.0) {
  return lambda + c * (phi - phi_old) > tie;
}

/// Active phi DoFs from the structurally condensed residual. DoFs carrying
/// a Dirichlet or hanging constraint are never active. A DoF above phi_old
/// by more than feasibility_tol is always active, also when its multiplier
/// estimate vanishes and the adaptive c would be zero.
inline std::vector<int> compute_active_set(const Vector& residual_phi, const Vector& B_diag, const Vector& phi,
                                           const Vector& phi_old, double c0, const ConstraintSet* structural = nullptr,
                                           double tie = 0.0, double feasibility_tol = 1e-12) {
  std::vector<int> active;
  for (std::size_t i = 0; i < phi.size(); ++i) {
    if (structural && structural->is_constrained(i)) continue;
    const double lambda = -residual_phi[i] / B_diag[i];
    const double c = active_constant(lambda, phi[i], phi_old[i], c0);
    if (is_active(lambda, c, phi[i], phi_old[i], tie) || phi[i] - phi_old[i] > feasibility_tol)
      active.push_back(static_cast<int>(i));
  }
  return active;
}

struct NewtonStep {
  int k = 0;
  double residual = 0.0;  // ||R~|| before the step
  std::size_t n_active = 0;
  bool active_changed = true;
  int gmres_iterations = 0;
  double gmres_true_residual = 0.0;
  int line_search_steps = 0;
  double accepted_residual = 0.0;
  bool line_search_failed = false;
};

struct NewtonResult {
  bool converged = false;
  int newton_iterations = 0;  // linear solves performed
  int gmres_iterations = 0;
  double final_residual = 0.0;
  std::vector<NewtonStep> log;
  std::vector<int> active_set;
  Vector lambda;
  std::string message;
  std::vector<MgLevelInfo> mg_levels;  // from the last step, uu then phiphi

  double average_gmres() const {
    return newton_iterations > 0 ? static_cast<double>(gmres_iterations) / newton_iterations : 0.0;
  }
};

inline void write_newton_log(std::ostream& out, const NewtonResult& r) {
  out << "k,residual,n_active,active_changed,gmres_iterations,gmres_true_residual,line_search_steps,accepted_residual,"
         "line_search_failed\n";
  out.precision(10);
  for (const auto& s : r.log)
    out << s.k << ',' << s.residual << ',' << s.n_active << ',' << s.active_changed << ',' << s.gmres_iterations << ','
        << s.gmres_true_residual << ',' << s.line_search_steps << ',' << s.accepted_residual << ','
        << s.line_search_failed << '\n';
}

/// Solves for state.U with phi <= state.phi_old; state.phi_tilde is the
/// frozen phi in the degradation and pressure terms.
inline NewtonResult newton_pdas_solve(const QuadMesh& mesh, const DofMap& map, const MaterialParams& params, State& state,
                                      const SolverConfig& cfg) {
  cfg.newton.validate();
  cfg.gmres.validate();
  cfg.mg.validate();
  params.validate();
  const std::size_t n = map.n_nodes();
  if (state.U.phi.size() != n || state.phi_tilde.size() != n || state.phi_old.size() != n)
    throw std::invalid_argument("newton_pdas_solve: state size mismatch");

  const BlockConstraints structural = build_constraints(mesh, map, cfg.dirichlet);
  structural.u.distribute(state.U.u);
  structural.phi.distribute(state.U.phi);
  const Vector B = lumped_mass_diag(map, &structural.phi);
  const double c0 = cfg.newton.c0_factor * params.G_c / params.length_scale;

  FractureOperator op(map, params);
  op.set_threads(cfg.threads);
  MgHierarchy hier(mesh, map, params, cfg.threads);

  NewtonResult res;
  res.lambda.assign(n, 0.0);
  std::vector<int> previous;
  bool have_previous = false;
  BlockConstraints step;

  auto residual_with = [&](const BlockVector& U, const BlockConstraints& c) {
    op.set_state(U, state.phi_tilde);
    op.set_constraints(c.u, c.phi);
    return op.residual();
  };

  for (int k = 0;; ++k) {
    const BlockVector R = residual_with(state.U, structural);
    const std::vector<int> active = compute_active_set(R.phi, B, state.U.phi, state.phi_old, c0, &structural.phi,
                                                         cfg.newton.tie_factor * c0, cfg.newton.feasibility_tol);
    BlockVector Rt = R;
    for (int a : active) Rt.phi[static_cast<std::size_t>(a)] = 0.0;
    const double rnorm = norm(Rt);
    if (!std::isfinite(rnorm)) {
      res.message = "non-finite residual";
      break;
    }
    NewtonStep log;
    log.k = k;
    log.residual = rnorm;
    log.n_active = active.size();
    log.active_changed = !have_previous || active != previous;
    res.final_residual = rnorm;
    res.active_set = active;
    if (!log.active_changed && rnorm <= cfg.newton.tol) {
      res.converged = true;
      res.log.push_back(log);
      break;
    }
    if (k >= cfg.newton.max_newton) {
      res.message = "maximum number of Newton iterations reached";
      res.log.push_back(log);
      break;
    }
    previous = active;
    have_previous = true;

    step = build_constraints(mesh, map, cfg.dirichlet, active, state.U.phi, state.phi_old);
    const BlockVector Rs = residual_with(state.U, step);
    BlockVector dU0(n);
    step.u.distribute(dU0.u);
    step.phi.distribute(dU0.phi);
    BlockVector rhs = op.jacobian_vmult_raw(dU0);
    axpy(1.0, Rs, rhs);
    scale(-1.0, rhs);

    hier.update(state.U, state.phi_tilde, step);
    const BlockMultigrid mg_u(hier, Block::uu, cfg.mg);
    const BlockMultigrid mg_phi(hier, Block::phiphi, cfg.mg);
    const BlockPreconditioner P(mg_u, mg_phi);
    res.mg_levels = mg_u.levels();
    res.mg_levels.insert(res.mg_levels.end(), mg_phi.levels().begin(), mg_phi.levels().end());
    const auto J = [&](const BlockVector& x) { return op.jacobian_vmult(x); };
    const GmresResult<BlockVector> lin = gmres_solve(J, P, rhs, cfg.gmres);
    log.gmres_iterations = lin.iterations;
    log.gmres_true_residual = lin.true_residual;
    res.gmres_iterations += lin.iterations;
    ++res.newton_iterations;
    if (!lin.converged) {
      res.message = "linear solver did not converge";
      res.log.push_back(log);
      break;
    }
    BlockVector dU = lin.x;
    step.u.distribute(dU.u);
    step.phi.distribute(dU.phi);

    // backtracking on ||R~|| with the step's active set zeroed
    const double r_old = norm(Rs);
    BlockVector trial;
    double r_new = std::numeric_limits<double>::infinity();
    double damping = 1.0;
    for (int l = 0; l <= cfg.newton.l_max; ++l) {
      trial = state.U;
      axpy(damping, dU, trial);
      r_new = norm(residual_with(trial, step));
      log.line_search_steps = l;
      if (r_new < r_old) break;
      if (l == cfg.newton.l_max) {
        log.line_search_failed = true;
        if (cfg.verbose) std::cerr << "warning: line search accepted the maximal damping at step " << k << '\n';
        break;
      }
      damping *= cfg.newton.omega;
    }
    log.accepted_residual = r_new;
    state.U = trial;
    res.log.push_back(log);
    if (cfg.verbose)
      std::cerr << "newton " << k << ": |R~| " << rnorm << ", active " << active.size() << ", gmres " << lin.iterations
                << ", line search " << log.line_search_steps << '\n';
  }
  // multiplier on the final active set, zero elsewhere
  const BlockVector Rn = residual_with(state.U, structural);
  for (int a : res.active_set) res.lambda[static_cast<std::size_t>(a)] = -Rn.phi[static_cast<std::size_t>(a)] / B[static_cast<std::size_t>(a)];
  return res;
}

}  // namespace pff
