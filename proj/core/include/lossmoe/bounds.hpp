#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "lossmoe/bloch_bases.hpp"
#include "lossmoe/games.hpp"
#include "lossmoe/npa.hpp"

namespace lossmoe {

struct CurveSample {
  double p_err = 0.0;
  double p_ans = 0.0;  ///< certified upper bound on the answering probability
};

/// p_ans upper bounds sampled on a p_err grid, plus the game they came from.
struct SecurityCurve {
  std::vector<CurveSample> samples;
  Level level = Level::L2;
  Variant variant = Variant::QpvStrict;
  int m = 2;
  int m_theta = 2;
  int m_phi = 1;
  double xi = 0.0;

  /// p_err strictly increasing, p_ans nondecreasing within 1e-6.
  void validate() const;
  double max_p_ans() const;
};

/// Slack used when comparing curve values against a target p_ans.
inline constexpr double kCurveTolerance = 1e-6;

enum class Flavor { Bb84, MBasis };

Flavor parse_flavor(std::string_view text);
std::string to_string(Flavor flavor);

/// Smallest p_err with p_ans_upper(p_err) >= eta, linearly interpolated
/// between grid points. conservative moves the result one local grid step
/// down (never below the first sample), which stays below the true minimum
/// of any monotone curve through the samples. Throws OutOfRange when eta
/// exceeds the curve.
double perr_star(const SecurityCurve& curve, double eta, bool conservative = false);

/// w(eta) = 1 - p_err*(eta).
double extract_w(const SecurityCurve& curve, double eta, bool conservative = false);

/// 1/m + (m-1)/m * max_{x != x'} max_{a,a'} |<a_x|a'_x'>|.
double tomamichel_bound(const MeasurementFamily& family);

/// n0 * log2(1 + 2/delta).
double delta_net_size_log2(double delta, int n0);

/// log2(ceil(4 / (c (eta*Delta + s)^(1/3) - 2))) * 2^(2q+2) with
/// (c, s) = (2^(2/3), 2) for bb84 and (2^(1/3), 4) for m_basis.
double rounding_size(int q, double eta, double delta, Flavor flavor);

/// Binary entropy in bits, 0 at both endpoints.
double binary_entropy(double p);

/// log2 of the bad-function count bound minus log2(2^(-2^n)):
///   (h(beta) + beta log2 m - 1) 2^(2n) + (2^(n+1) + 1) k + 2^n.
/// Evaluated after dividing by 2^(2n), so no intermediate exceeds 2^64.
double counting_margin(int n, double k, int m, double beta);

/// The two-basis form: (h(beta) - 1) 2^(2n) + (2^(n+1) + 1) k + 2^n.
double counting_margin_bb84(int n, double k, double beta = 0.25);

/// Smallest eta with w(eta) + shift + Delta <= 1 on the relaxed curve, where
/// shift is the extra response-rate allowance (the curve's xi by default).
/// Every larger eta also satisfies it since w is nonincreasing. Throws
/// InfeasibleParameters when no sampled eta qualifies.
double eta_threshold(const SecurityCurve& relaxed, double delta,
                     std::optional<double> shift = std::nullopt);

/// w~(eta): the relaxed curve's w plus the xi allowance, capped at 1.
double w_tilde(const SecurityCurve& relaxed, double eta);

/// 0.25 for bb84; 0.15 for m = 3 and 0.13 for m = 5. Other m need an
/// explicit beta (ParameterError).
double default_beta(Flavor flavor, int m);
/// 0.013 for bb84, 0.009 for m_basis.
double default_delta(Flavor flavor);

/// beta * (1 - (w~ + Delta)). Throws InfeasibleParameters if w~ + Delta > 1.
double attacker_error_lower_bound(double beta, double delta, double w_tilde_at_eta);

struct BoundInputs {
  int n = 10;
  int q = 0;
  double eta = 1.0;
  std::optional<double> delta;
  double xi = 0.005;
  Flavor flavor = Flavor::Bb84;
  int m = 2;
  int m_theta = 2;
  int m_phi = 1;
  std::optional<double> beta;
  bool integer_k = false;  ///< use ceil(k) in the counting margin
};

struct BoundReport {
  int n = 0;
  int q = 0;
  double eta = 0.0;
  double delta = 0.0;
  double xi = 0.0;
  Flavor flavor = Flavor::Bb84;
  int m = 2;
  int m_theta = 2;
  int m_phi = 1;
  double k = 0.0;
  double beta = 0.0;
  bool beta_is_default = true;
  double w_tilde = 0.0;
  double eta_threshold = 0.0;
  double counting_margin_log2 = 0.0;
  double error_lower_bound = 0.0;
  bool qubit_condition = false;  ///< q <= n/2 - 5
  bool secure = false;           ///< margin < 0 and the qubit condition

  /// Flat key=value lines, every input echoed.
  std::string to_text() const;
};

/// Evaluates the full pipeline against a relaxed curve. Refuses
/// (InfeasibleParameters) when eta lies below the curve's threshold.
BoundReport make_report(const BoundInputs& in, const SecurityCurve& relaxed);

}  // namespace lossmoe
