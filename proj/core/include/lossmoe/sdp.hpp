#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "lossmoe/npa.hpp"

namespace lossmoe {

/// One nonzero of a constraint matrix in SDPA block notation. Block 0 is the
/// PSD block, block 1 the diagonal (LP) block. Indices are 0-based and
/// row <= col inside the PSD block; LP entries use row == col.
struct SdpaEntry {
  int block = 0;
  int row = 0;
  int col = 0;
  double value = 0.0;
};

/// Standard SDPA primal form:
///   minimize c^T x  subject to  sum_i F_i x_i - F_0 >= 0 (blockwise PSD).
struct SdpaProblem {
  int num_vars = 0;
  int psd_dim = 0;
  int lp_dim = 0;
  std::vector<double> c;
  std::vector<std::vector<SdpaEntry>> F;  // F[0] constant, F[i] for x_i
};

/// Writes the sparse ".dat-s" format (1-based indices, PSD block first and a
/// negative-size diagonal block when lp_dim > 0).
void write_sdpa(const SdpaProblem& problem, std::ostream& out);
SdpaProblem read_sdpa(std::istream& in);

/// Moment problem in SDPA form, variables = moment ids. The maximized
/// objective becomes min -objective; equalities become paired inequalities.
SdpaProblem to_sdpa(const MomentProblem& problem);

enum class SolveStatus { Optimal, NearOptimal, Infeasible, Unbounded, NumericalLimit };

std::string to_string(SolveStatus status);
bool converged(SolveStatus status);

struct SolverSettings {
  double tol = 1e-8;         ///< relative primal/dual feasibility and gap
  double near_tol = 1e-6;    ///< threshold for NearOptimal when tol is missed
  int max_iter = 100;
  double pad = 1e-6;         ///< default certified-bound padding
  bool trace = false;        ///< per-iteration log on stderr
  int max_vars = 9000;       ///< dense Schur complement size limit
};

struct SolveReport {
  double value = 0.0;                  ///< maximized objective
  SolveStatus status = SolveStatus::NumericalLimit;
  double primal_residual = 0.0;        ///< relative
  double dual_residual = 0.0;          ///< relative
  double gap = 0.0;                    ///< relative duality gap
  int iterations = 0;
  double wall_time = 0.0;              ///< seconds
  std::vector<double> moments;         ///< one value per moment variable
};

/// Raw SDPA-form solution.
struct SdpaSolution {
  SolveStatus status = SolveStatus::NumericalLimit;
  double primal_objective = 0.0;  ///< c^T x
  double dual_objective = 0.0;    ///< F_0 . Y
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  double gap = 0.0;
  int iterations = 0;
  std::vector<double> x;
};

/// Primal-dual interior-point method (HKM direction, Mehrotra
/// predictor-corrector) for an SDPA-form problem.
SdpaSolution solve_sdpa(const SdpaProblem& problem,
                        const SolverSettings& settings = {});

/// Maximizes the moment problem's objective. Equalities are eliminated by
/// substitution before the conic solve; contradictory equalities are reported
/// as Infeasible.
SolveReport solve(const MomentProblem& problem,
                  const SolverSettings& settings = {});

/// Same as solve(); kept as the moment-level entry point.
inline SolveReport solve_value(const MomentProblem& problem,
                               const SolverSettings& settings = {}) {
  return solve(problem, settings);
}

/// Values of all moments of words with at most one symbol per party,
/// keyed by the word's string form.
std::map<std::string, double> first_order_moments(const MomentProblem& problem,
                                                  const SolveReport& report);

/// value + pad. Refuses (throws ValidationError) on non-converged reports, and
/// on NearOptimal reports whose pad does not cover the residuals.
double certified_upper(const SolveReport& report, double pad = 1e-6);

}  // namespace lossmoe
