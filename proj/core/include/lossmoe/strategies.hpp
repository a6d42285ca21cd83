#pragma once

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "lossmoe/bloch_bases.hpp"
#include "lossmoe/npa.hpp"

namespace lossmoe {

/// Per-input measurement of one attacker: operators for outcomes 0, 1 and
/// no answer.
using Instrument = std::array<Eigen::MatrixXcd, 3>;

/// Pure state on V (referee qubit) x A x B with local measurements. The state
/// index is v * (dim_a * dim_b) + i * dim_b + j.
struct ExplicitStrategy {
  Eigen::VectorXcd state;
  int dim_a = 1;
  int dim_b = 1;
  std::vector<Instrument> alice;
  std::vector<Instrument> bob;

  /// Throws ValidationError on unnormalized states (1e-12), non-PSD
  /// elements (1e-10), or incomplete measurements (1e-10).
  void validate() const;
};

struct RoundOutcomeProbs {
  double p_correct = 0.0;
  double p_wrong = 0.0;
  double p_no_photon = 0.0;
  double p_abort = 0.0;

  /// p_correct / (1 - p_no_photon); NaN if they never answer.
  double conditional_correct() const;
};

RoundOutcomeProbs evaluate(const ExplicitStrategy& strategy,
                           const MeasurementFamily& family);

/// Referee qubit cos(pi/8)|0> + sin(pi/8)|1>, both attackers always answer 0.
ExplicitStrategy optimal_bb84();

/// Guess a basis x~ uniformly, prepare the referee qubit in |answer(x~)_x~>,
/// and answer only if x = x~. answers defaults to all zeros.
ExplicitStrategy uniform_guess(const MeasurementFamily& family,
                               std::span<const int> answers = {});

/// Best always-answer strategy found: referee qubit plus a fixed answer per
/// input. e_star is the largest per-input error rate.
struct AlwaysAnswer {
  ExplicitStrategy strategy;
  std::vector<int> answers;
  Eigen::Vector3d bloch;
  double e_star = 0.0;
};

/// Exact for a given answer assignment (smallest spherical cap through the
/// answer states); assignments are enumerated for m <= 12 and searched
/// greedily from a fixed seed above that.
AlwaysAnswer best_always_answer(const MeasurementFamily& family);

/// Plays the always-answer strategy with probability p and the matching
/// uniform guess otherwise, as one block-diagonal explicit strategy.
ExplicitStrategy mixed_strategy(const MeasurementFamily& family, double p);

struct MixedPoint {
  double p = 0.0;
  double p_err = 0.0;
  double p_ans = 0.0;
};

/// p_ans = p + (1 - p)/m, p_err = p e* / p_ans.
std::vector<MixedPoint> mixed_curve(const MeasurementFamily& family,
                                    std::span<const double> grid);

/// Bloch vector of a pure qubit state.
Eigen::Vector3d bloch_vector(const Ket& ket);

/// <psi| S^T T |psi> (real part) for every variable of the problem; no-answer
/// symbols are evaluated directly.
std::vector<double> strategy_moments(const ExplicitStrategy& strategy,
                                     const MomentProblem& problem);

/// Largest violation of the problem's constraints by the given moments
/// (equalities count |lhs|, inequalities max(lhs, 0)).
double max_violation(const MomentProblem& problem, std::span<const double> moments);

}  // namespace lossmoe
