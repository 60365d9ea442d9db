#pragma once

#include <memory>
#include <string>
#include <variant>

#include "gfanm/structcov.hpp"

namespace gfanm {

/// ADMM settings. Tolerances apply to the problem after the measurement
/// has been normalized to unit Euclidean norm.
struct SolverSettings {
  double penalty = 1.0;
  int max_iter = 50000;
  double eps_abs = 1e-7;
  double eps_rel = 1e-6;
  double over_relaxation = 1.6;
  int adapt_interval = 50;
  double adapt_ratio = 10.0;
  double adapt_factor = 2.0;
  int objective_window = 100;
};

void validate(const SolverSettings& settings);

struct Noiseless {};

/// Atomic-norm SDP over the atoms of subspace->filter().
///   noiseless:   min 1/2 (tau + tr Sigma)                     s.t. [tau s*; s Sigma] >= 0, Sigma structured, s = x
///   regularized: min 1/2 ||x - s||^2 + lambda (tau + tr Sigma) s.t. the same cone and structure
struct AnmProblem {
  std::shared_ptr<const StructuredSubspace> subspace;
  CVector x;
  std::variant<Noiseless, double> regularization = Noiseless{};
  SolverSettings settings{};

  bool noiseless() const { return std::holds_alternative<Noiseless>(regularization); }
};

struct AnmSolution {
  double tau = 0.0;
  CVector s_tilde;
  CMatrix sigma;
  double objective = 0.0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  int iterations = 0;
  bool converged = false;
  double final_penalty = 0.0;
  /// Smallest objective seen over the last objective_window iterations.
  double window_best_objective = 0.0;
};

/// Frobenius-nearest positive semidefinite matrix.
CMatrix psd_project(const CMatrix& m);

/// [[tau, s*], [s, Sigma]].
CMatrix bordered_matrix(double tau, const CVector& s, const CMatrix& sigma);

AnmSolution solve_noiseless(const AnmProblem& problem);
AnmSolution solve_regularized(const AnmProblem& problem);
AnmSolution solve(const AnmProblem& problem);

struct KktReport {
  double min_bordered_eigenvalue = 0.0;
  double bordered_tolerance = 0.0;
  double constraint_residual = 0.0;
  double constraint_tolerance = 0.0;
  double objective = 0.0;
  bool feasible = false;
};

KktReport kkt_report(const AnmSolution& solution, const AnmProblem& problem);

/// One-line human-readable solver summary.
std::string summary_line(const AnmSolution& solution);

}  // namespace gfanm
