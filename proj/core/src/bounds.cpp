#include "lossmoe/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "lossmoe/error.hpp"

namespace lossmoe {

namespace {

std::size_t first_reaching(const SecurityCurve& curve, double eta) {
  const auto& s = curve.samples;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i].p_ans >= eta - kCurveTolerance) return i;
  }
  char buf[160];
  std::snprintf(buf, sizeof buf, "eta = %.6g is above the largest p_ans on the curve (%.6g)", eta,
                curve.max_p_ans());
  throw OutOfRange(buf);
}

}  // namespace

void SecurityCurve::validate() const {
  if (samples.empty()) throw ValidationError("security curve has no samples");
  for (std::size_t i = 1; i < samples.size(); ++i) {
    if (!(samples[i].p_err > samples[i - 1].p_err)) {
      throw ValidationError("security curve p_err values must be strictly increasing");
    }
    if (samples[i].p_ans < samples[i - 1].p_ans - kCurveTolerance) {
      char buf[160];
      std::snprintf(buf, sizeof buf, "p_ans decreases between p_err = %.6g and %.6g",
                    samples[i - 1].p_err, samples[i].p_err);
      throw ValidationError(buf);
    }
  }
}

double SecurityCurve::max_p_ans() const {
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& s : samples) best = std::max(best, s.p_ans);
  return best;
}

Flavor parse_flavor(std::string_view text) {
  if (text == "bb84") return Flavor::Bb84;
  if (text == "m_basis" || text == "m-basis") return Flavor::MBasis;
  throw ParameterError("unknown flavor '" + std::string(text) + "' (expected bb84 or m_basis)");
}

std::string to_string(Flavor flavor) {
  return flavor == Flavor::Bb84 ? "bb84" : "m_basis";
}

double perr_star(const SecurityCurve& curve, double eta, bool conservative) {
  curve.validate();
  const auto& s = curve.samples;
  const std::size_t i = first_reaching(curve, eta);
  if (i == 0) return s[0].p_err;
  const double rise = s[i].p_ans - s[i - 1].p_ans;
  const double t = rise > 0.0 ? std::clamp((eta - s[i - 1].p_ans) / rise, 0.0, 1.0) : 1.0;
  const double step = s[i].p_err - s[i - 1].p_err;
  double p = s[i - 1].p_err + t * step;
  if (conservative) p = std::max(s[0].p_err, p - step);
  return p;
}

double extract_w(const SecurityCurve& curve, double eta, bool conservative) {
  return 1.0 - perr_star(curve, eta, conservative);
}

double tomamichel_bound(const MeasurementFamily& family) {
  const std::size_t m = family.size();
  double c = 0.0;
  for (std::size_t x = 0; x < m; ++x)
    for (std::size_t xp = 0; xp < m; ++xp) {
      if (x == xp) continue;
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) c = std::max(c, std::abs(family.overlap(a, x, b, xp)));
    }
  const double dm = double(m);
  return 1.0 / dm + (dm - 1.0) / dm * c;
}

double delta_net_size_log2(double delta, int n0) {
  if (!(delta > 0.0)) throw ParameterError("net radius must be positive");
  if (n0 < 1) throw ParameterError("net dimension must be at least 1");
  return n0 * std::log2(1.0 + 2.0 / delta);
}

double rounding_size(int q, double eta, double delta, Flavor flavor) {
  if (q < 0) throw ParameterError("q must be nonnegative");
  if (!(eta > 0.0 && eta <= 1.0)) throw ParameterError("eta must lie in (0, 1]");
  if (!(delta > 0.0)) throw ParameterError("Delta must be positive");
  // cbrt(4) cbrt(2 + u) - 2 = 2 (cbrt(1 + u/2) - 1), and likewise
  // cbrt(2) cbrt(4 + u) - 2 = 2 (cbrt(1 + u/4) - 1); written without the
  // cancellation so tiny eta * Delta stays positive.
  const double shift = flavor == Flavor::Bb84 ? 2.0 : 4.0;
  const double den = 2.0 * std::expm1(std::log1p(eta * delta / shift) / 3.0);
  if (!(den > 0.0)) {
    throw InfeasibleParameters("rounding size undefined: eta * Delta too small");
  }
  const double count = std::ceil(4.0 / den);
  return std::ldexp(std::log2(count), 2 * q + 2);
}

double binary_entropy(double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw ParameterError("entropy argument must lie in [0, 1]");
  if (p == 0.0 || p == 1.0) return 0.0;
  return -p * std::log2(p) - (1.0 - p) * std::log2(1.0 - p);
}

double counting_margin(int n, double k, int m, double beta) {
  if (!(beta > 0.0 && beta < 0.5)) throw ParameterError("beta must lie in (0, 1/2)");
  if (n < 1 || n > 64) throw ParameterError("n must lie in [1, 64]");
  if (m < 1) throw ParameterError("m must be positive");
  if (!(k >= 0.0)) throw ParameterError("k must be nonnegative");
  // Everything divided by 2^(2n).
  const double lead = binary_entropy(beta) + beta * std::log2(double(m)) - 1.0;
  const double rounding = (std::ldexp(1.0, -n + 1) + std::ldexp(1.0, -2 * n)) * k;
  const double target = std::ldexp(1.0, -n);
  return std::ldexp(lead + rounding + target, 2 * n);
}

double counting_margin_bb84(int n, double k, double beta) {
  return counting_margin(n, k, 1, beta);
}

double w_tilde(const SecurityCurve& relaxed, double eta) {
  return std::min(1.0, extract_w(relaxed, eta) + relaxed.xi);
}

double eta_threshold(const SecurityCurve& relaxed, double delta, std::optional<double> shift) {
  if (!(delta > 0.0)) throw ParameterError("Delta must be positive");
  relaxed.validate();
  const double extra = shift.value_or(relaxed.xi);
  // w + extra + Delta <= 1  <=>  p_err*(eta) >= Delta + extra.
  const double target = delta + extra;
  auto ok = [&](double eta) { return perr_star(relaxed, eta) >= target - 1e-12; };
  double lo = relaxed.samples.front().p_ans;
  double hi = relaxed.max_p_ans();
  if (ok(lo)) return lo;
  if (!ok(hi)) {
    throw InfeasibleParameters("no eta on the curve satisfies w~(eta) + Delta <= 1");
  }
  for (int it = 0; it < 200 && hi - lo > 1e-12; ++it) {
    const double mid = 0.5 * (lo + hi);
    (ok(mid) ? hi : lo) = mid;
  }
  return hi;
}

double default_beta(Flavor flavor, int m) {
  if (flavor == Flavor::Bb84) return 0.25;
  if (m == 3) return 0.15;
  if (m == 5) return 0.13;
  throw ParameterError("no default beta for m = " + std::to_string(m) + "; pass beta explicitly");
}

double default_delta(Flavor flavor) { return flavor == Flavor::Bb84 ? 0.013 : 0.009; }

double attacker_error_lower_bound(double beta, double delta, double w_tilde_at_eta) {
  const double slack = 1.0 - (w_tilde_at_eta + delta);
  if (slack < 0.0) throw InfeasibleParameters("w~(eta) + Delta exceeds 1");
  return beta * slack;
}

BoundReport make_report(const BoundInputs& in, const SecurityCurve& relaxed) {
  if (relaxed.variant != Variant::QpvRelaxed) {
    throw ParameterError("bounds need a relaxed-variant curve");
  }
  if (std::abs(relaxed.xi - in.xi) > 1e-12) {
    throw ParameterError("curve xi does not match the requested xi");
  }
  if (in.n < 1 || in.n > 64) throw ParameterError("n must lie in [1, 64]");
  BoundReport r;
  r.n = in.n;
  r.q = in.q;
  r.eta = in.eta;
  r.delta = in.delta.value_or(default_delta(in.flavor));
  r.xi = in.xi;
  r.flavor = in.flavor;
  r.m = in.m;
  r.m_theta = in.m_theta;
  r.m_phi = in.m_phi;
  r.beta_is_default = !in.beta.has_value();
  r.beta = in.beta ? *in.beta : default_beta(in.flavor, in.m);

  r.eta_threshold = eta_threshold(relaxed, r.delta);
  if (in.eta < r.eta_threshold) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "eta = %.6g is below the threshold %.6g for this configuration",
                  in.eta, r.eta_threshold);
    throw InfeasibleParameters(buf);
  }
  r.w_tilde = w_tilde(relaxed, in.eta);
  r.k = rounding_size(in.q, in.eta, r.delta, in.flavor);
  const double k = in.integer_k ? std::ceil(r.k) : r.k;
  r.counting_margin_log2 = in.flavor == Flavor::Bb84
                               ? counting_margin_bb84(in.n, k, r.beta)
                               : counting_margin(in.n, k, in.m, r.beta);
  r.error_lower_bound = attacker_error_lower_bound(r.beta, r.delta, r.w_tilde);
  r.qubit_condition = 2 * in.q <= in.n - 10;
  r.secure = r.counting_margin_log2 < 0.0 && r.qubit_condition;
  return r;
}

std::string BoundReport::to_text() const {
  std::string out;
  char buf[128];
  auto line = [&](const char* key, double v) {
    std::snprintf(buf, sizeof buf, "%s=%.10g\n", key, v);
    out += buf;
  };
  line("n", n);
  line("q", q);
  line("eta", eta);
  line("delta", delta);
  line("xi", xi);
  out += "flavor=" + to_string(flavor) + "\n";
  line("m", m);
  line("m_theta", m_theta);
  line("m_phi", m_phi);
  line("beta", beta);
  out += std::string("beta_source=") + (beta_is_default ? "default" : "override") + "\n";
  line("eta_threshold", eta_threshold);
  line("w_tilde", w_tilde);
  line("k", k);
  line("counting_margin_log2", counting_margin_log2);
  line("error_lower_bound", error_lower_bound);
  out += std::string("qubit_condition=") + (qubit_condition ? "true" : "false") + "\n";
  out += std::string("secure=") + (secure ? "true" : "false") + "\n";
  return out;
}

}  // namespace lossmoe
