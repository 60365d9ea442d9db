#include "gfanm/conic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <limits>

namespace gfanm {

void validate(const SolverSettings& s) {
  if (!(s.penalty > 0.0) || !(s.eps_abs > 0.0) || !(s.eps_rel > 0.0)) {
    throw Error(Errc::invalid_input, "solver penalty and tolerances must be positive");
  }
  if (s.max_iter < 1 || s.adapt_interval < 1 || s.objective_window < 1) {
    throw Error(Errc::invalid_input, "solver iteration counts must be positive");
  }
  if (!(s.over_relaxation >= 1.0 && s.over_relaxation <= 1.8)) {
    throw Error(Errc::invalid_input, "over-relaxation must lie in [1, 1.8]");
  }
  if (!(s.adapt_ratio > 1.0) || !(s.adapt_factor > 1.0)) {
    throw Error(Errc::invalid_input, "penalty adaptation ratio and factor must exceed 1");
  }
}

CMatrix psd_project(const CMatrix& m) {
  if (m.rows() != m.cols()) throw Error(Errc::shape_mismatch, "psd_project needs a square matrix");
  const CMatrix sym = 0.5 * (m + m.adjoint());
  Eigen::SelfAdjointEigenSolver<CMatrix> es(sym);
  const RVector& ev = es.eigenvalues();
  Eigen::Index first = 0;
  while (first < ev.size() && ev(first) <= 0.0) ++first;
  const Eigen::Index k = ev.size() - first;
  if (k == 0) return CMatrix::Zero(m.rows(), m.cols());
  const auto v = es.eigenvectors().rightCols(k);
  return v * ev.tail(k).asDiagonal() * v.adjoint();
}

CMatrix bordered_matrix(double tau, const CVector& s, const CMatrix& sigma) {
  const Eigen::Index n = s.size();
  if (sigma.rows() != n || sigma.cols() != n) {
    throw Error(Errc::shape_mismatch, "bordered matrix: Sigma and s sizes differ");
  }
  CMatrix m(n + 1, n + 1);
  m(0, 0) = tau;
  m.block(1, 0, n, 1) = s;
  m.block(0, 1, 1, n) = s.adjoint();
  m.bottomRightCorner(n, n) = sigma;
  return m;
}

namespace {

void check_problem(const AnmProblem& p) {
  if (!p.subspace) throw Error(Errc::invalid_input, "problem has no structured subspace");
  if (p.x.size() != p.subspace->n()) {
    throw Error(Errc::shape_mismatch, "measurement length must equal the filter size");
  }
  validate(p.settings);
}

/// ADMM on the normalized problem (||x|| = 1)
///   min  q/2 ||x - s||^2 + (tau + tr Sigma(v))   s.t.  M(tau, s, v) = Z,  Z >= 0
/// where q = 0 with s pinned to x in the noiseless case. Sigma(v) ranges
/// over the structured subspace so every iterate satisfies the equality
/// constraint exactly.
class AdmmSolver {
 public:
  AdmmSolver(const StructuredSubspace& sub, const CVector& x, bool free_s, double q,
             const SolverSettings& settings)
      : sub_(sub), x_(x), free_s_(free_s), q_(q), settings_(settings), n_(sub.n()) {
    trace_coords_ = sub_.coordinates(CMatrix::Identity(n_, n_));
  }

  AnmSolution run() {
    const Eigen::Index big = n_ + 1;
    CMatrix z = CMatrix::Zero(big, big);
    CMatrix u = CMatrix::Zero(big, big);
    double rho = settings_.penalty;
    const double alpha = settings_.over_relaxation;
    const double nvar = 1.0 + (free_s_ ? 2.0 * n_ : 0.0) + sub_.dim();
    std::deque<double> window;

    AnmSolution sol;
    double tau = 0.0;
    CVector s = x_;
    RVector v = RVector::Zero(sub_.dim());
    CMatrix sigma;
    for (int it = 1; it <= settings_.max_iter; ++it) {
      const CMatrix w = z - u;
      tau = w(0, 0).real() - 1.0 / rho;
      if (free_s_) {
        const CVector ws = 0.5 * (w.block(1, 0, n_, 1) + w.block(0, 1, 1, n_).adjoint());
        s = (q_ * x_ + 2.0 * rho * ws) / (q_ + 2.0 * rho);
      }
      v = sub_.coordinates(w.bottomRightCorner(n_, n_)) - trace_coords_ / rho;
      sigma = sub_.synthesize(v);
      const CMatrix m = bordered_matrix(tau, s, sigma);

      const CMatrix relaxed = alpha * m + (1.0 - alpha) * z;
      const CMatrix z_old = z;
      z = psd_project(relaxed + u);
      u += relaxed - z;

      const double r_pri = (m - z).norm();
      const double r_dual = rho * adjoint_norm(z - z_old);
      const double eps_pri = static_cast<double>(big) * settings_.eps_abs +
                             settings_.eps_rel * std::max(m.norm(), z.norm());
      const double eps_dual = std::sqrt(nvar) * settings_.eps_abs +
                              settings_.eps_rel * rho * adjoint_norm(u);

      window.push_back(r_pri <= eps_pri ? objective(tau, s, sigma)
                                        : std::numeric_limits<double>::infinity());
      if (static_cast<int>(window.size()) > settings_.objective_window) window.pop_front();

      sol.iterations = it;
      sol.primal_residual = r_pri;
      sol.dual_residual = r_dual;
      if (r_pri <= eps_pri && r_dual <= eps_dual) {
        sol.converged = true;
        break;
      }
      if (it % settings_.adapt_interval == 0) {
        const double ratio = (r_pri / eps_pri) / std::max(r_dual / eps_dual, 1e-300);
        if (ratio > settings_.adapt_ratio) {
          rho *= settings_.adapt_factor;
          u /= settings_.adapt_factor;
        } else if (ratio < 1.0 / settings_.adapt_ratio) {
          rho /= settings_.adapt_factor;
          u *= settings_.adapt_factor;
        }
      }
    }
    restore_feasibility(tau, s, sigma);
    sol.tau = tau;
    sol.s_tilde = s;
    sol.sigma = sigma;
    sol.objective = objective(tau, s, sigma);
    sol.final_penalty = rho;
    sol.window_best_objective =
        std::min(sol.objective, *std::min_element(window.begin(), window.end()));
    return sol;
  }

 private:
  double objective(double tau, const CVector& s, const CMatrix& sigma) const {
    const double linear = tau + sigma.trace().real();
    return free_s_ ? 0.5 * q_ * (x_ - s).squaredNorm() + linear : 0.5 * linear;
  }

  // The ADMM iterate satisfies the cone constraint only up to the primal
  // residual. Shifting (tau, Sigma) by delta * (1, P), with P the
  // controllability Gramian (which always lies in the structured subspace),
  // restores positive semidefiniteness without leaving the subspace.
  void restore_feasibility(double& tau, const CVector& s, CMatrix& sigma) const {
    const CMatrix m = bordered_matrix(tau, s, sigma);
    Eigen::SelfAdjointEigenSolver<CMatrix> es(m, Eigen::EigenvaluesOnly);
    const double mu = es.eigenvalues()(0);
    if (mu >= 0.0) return;
    const CMatrix gram = sub_.project(controllability_gramian(sub_.filter()));
    Eigen::SelfAdjointEigenSolver<CMatrix> gs(gram, Eigen::EigenvaluesOnly);
    const double floor = std::min(1.0, gs.eigenvalues()(0));
    if (!(floor > 0.0)) return;
    // a little beyond -mu so rounding in the reassembled matrix stays >= 0
    const double delta = -mu * (1.0 + 1e-6) / floor;
    tau += delta;
    sigma += delta * gram;
  }

  // norm of the adjoint of (tau, s, v) -> M applied to a bordered-size matrix
  double adjoint_norm(const CMatrix& d) const {
    double acc = std::norm(d(0, 0).real());
    if (free_s_) {
      const CVector ds = d.block(1, 0, n_, 1) + d.block(0, 1, 1, n_).adjoint();
      acc += ds.squaredNorm();
    }
    acc += sub_.coordinates(d.bottomRightCorner(n_, n_)).squaredNorm();
    return std::sqrt(acc);
  }

  const StructuredSubspace& sub_;
  const CVector& x_;
  bool free_s_;
  double q_;
  SolverSettings settings_;
  int n_;
  RVector trace_coords_;
};

AnmSolution trivial_solution(int n) {
  AnmSolution sol;
  sol.s_tilde = CVector::Zero(n);
  sol.sigma = CMatrix::Zero(n, n);
  sol.converged = true;
  return sol;
}

void rescale(AnmSolution& sol, double c) {
  sol.tau *= c;
  sol.s_tilde *= c;
  sol.sigma *= c;
}

}  // namespace

AnmSolution solve_noiseless(const AnmProblem& problem) {
  check_problem(problem);
  if (!problem.noiseless()) throw Error(Errc::invalid_input, "problem carries a lambda");
  const int n = problem.subspace->n();
  const double c = problem.x.norm();
  if (c == 0.0) return trivial_solution(n);

  const CVector xn = problem.x / c;
  AdmmSolver admm(*problem.subspace, xn, false, 0.0, problem.settings);
  AnmSolution sol = admm.run();
  sol.objective *= c;
  sol.window_best_objective *= c;
  rescale(sol, c);
  return sol;
}

AnmSolution solve_regularized(const AnmProblem& problem) {
  check_problem(problem);
  if (problem.noiseless()) throw Error(Errc::invalid_input, "regularized solve needs lambda");
  const double lambda = std::get<double>(problem.regularization);
  if (!(lambda > 0.0)) throw Error(Errc::invalid_input, "lambda must be positive");
  const int n = problem.subspace->n();
  const double c = problem.x.norm();
  if (c <= 2.0 * lambda) {
    // the dual atomic norm of x is at most ||x||, so s = 0 is optimal
    AnmSolution sol = trivial_solution(n);
    sol.objective = sol.window_best_objective = 0.5 * c * c;
    return sol;
  }

  // x -> x/c maps lambda -> lambda/c; dividing the objective by lambda/c
  // leaves weight c/lambda on the fidelity term
  const CVector xn = problem.x / c;
  const double lam_n = lambda / c;
  AdmmSolver admm(*problem.subspace, xn, true, 1.0 / lam_n, problem.settings);
  AnmSolution sol = admm.run();
  // normalized objective is f(c X') / (c lambda)
  sol.objective *= c * lambda;
  sol.window_best_objective *= c * lambda;
  rescale(sol, c);
  return sol;
}

AnmSolution solve(const AnmProblem& problem) {
  return problem.noiseless() ? solve_noiseless(problem) : solve_regularized(problem);
}

KktReport kkt_report(const AnmSolution& solution, const AnmProblem& problem) {
  check_problem(problem);
  KktReport rep;
  const CMatrix m = bordered_matrix(solution.tau, solution.s_tilde, solution.sigma);
  Eigen::SelfAdjointEigenSolver<CMatrix> es(0.5 * (m + m.adjoint()), Eigen::EigenvaluesOnly);
  rep.min_bordered_eigenvalue = es.eigenvalues()(0);
  const double trace = solution.sigma.trace().real();
  rep.bordered_tolerance = -1e-6 * (1.0 + solution.tau + trace);
  rep.constraint_residual =
      constraint_residual(problem.subspace->filter(), solution.sigma).cwiseAbs().maxCoeff();
  rep.constraint_tolerance =
      1e-6 * (1.0 + (solution.sigma.size() ? solution.sigma.cwiseAbs().maxCoeff() : 0.0));
  if (problem.noiseless()) {
    rep.objective = 0.5 * (solution.tau + trace);
  } else {
    const double lambda = std::get<double>(problem.regularization);
    rep.objective = 0.5 * (problem.x - solution.s_tilde).squaredNorm() +
                    lambda * (solution.tau + trace);
  }
  rep.feasible = rep.min_bordered_eigenvalue >= rep.bordered_tolerance &&
                 rep.constraint_residual <= rep.constraint_tolerance;
  return rep;
}

std::string summary_line(const AnmSolution& s) {
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "admm %s iters=%d obj=%.10g r_pri=%.3e r_dual=%.3e rho=%.3g tau=%.6g",
                s.converged ? "converged" : "UNCONVERGED", s.iterations, s.objective,
                s.primal_residual, s.dual_residual, s.final_penalty, s.tau);
  return buf;
}

}  // namespace gfanm
