// Acceptance run: one pass/fail line per criterion. With an argument N only
// criterion N runs; the exit status is nonzero if any criterion run failed.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "../common/dense_oracle.hpp"
#include "lossmoe/bounds.hpp"
#include "lossmoe/error.hpp"
#include "lossmoe/region.hpp"
#include "lossmoe/strategies.hpp"

using namespace lossmoe;

namespace {

// Pinned tolerances.
constexpr double kCrossing = 0.1464, kCrossingTol = 0.002, kCrossingSeconds = 120;
constexpr double kCapTol = 0.01, kCapSeconds = 300;
constexpr double kSandwichGap = 0.01, kSandwichPStep = 0.02;
constexpr double kOrderingSlack = 1e-6, kOrderingStop = 0.15, kOrderingStep = 0.005;
constexpr double kTomamichel = 0.85355, kTomamichelTol = 1e-4, kPwinSlack = 1e-3;
constexpr double kQkdPerr = 0.2929, kQkdPwin = 0.7071, kQkdTol = 0.002, kQkdSeconds = 60;
constexpr double kXi = 0.005, kEtaTol = 0.01, kThresholdGridStep = 0.002;
constexpr double kFeasTol = 1e-8, kSdpSlack = 1e-6, kLevelSlack = 1e-6;
constexpr int kLevelSamples = 10;
constexpr int kOracleWords = 1000;
constexpr double kOracleTol = 1e-10;

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Config {
  int mt, mp;
  std::string name() const {
    const int m = discretize_bases(mt, mp).size();
    return "(" + std::to_string(m) + "," + std::to_string(mt) + "," + std::to_string(mp) + ")";
  }
};
const std::vector<Config> kConfigs = {{2, 1}, {2, 2}, {3, 2}};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(double v, int digits = 6) {
  std::ostringstream os;
  os.precision(digits);
  os << v;
  return os.str();
}

SweepConfig base(int mt, int mp, Variant v = Variant::QpvStrict, double xi = 0.0) {
  SweepConfig c;
  c.m_theta = mt;
  c.m_phi = mp;
  c.variant = v;
  c.xi = xi;
  return c;
}

double value_at(SweepConfig c, double p_err) {
  const auto row = solve_point(c, p_err);
  if (!converged(row.status)) throw Error("solver failed at p_err=" + fmt(p_err));
  return row.p_ans_upper;
}

Outcome criterion1() {
  const auto t0 = std::chrono::steady_clock::now();
  auto c = base(2, 1);
  c.level = Level::L2;
  const auto r = find_pwin(c);
  const double t = seconds_since(t0);
  const bool ok = std::abs(r.p_err_star - kCrossing) <= kCrossingTol && t <= kCrossingSeconds;
  return {ok, "p_err*=" + fmt(r.p_err_star) + " target " + fmt(kCrossing) + "+-" +
                  fmt(kCrossingTol) + ", " + fmt(t, 3) + " s (limit " + fmt(kCrossingSeconds) +
                  ")"};
}

Outcome criterion2() {
  const auto t0 = std::chrono::steady_clock::now();
  bool ok = true;
  std::string d;
  for (const auto& cfg : kConfigs) {
    const auto c = base(cfg.mt, cfg.mp);
    const double v = value_at(c, 0.0);
    const double target = 1.0 / c.m();
    ok = ok && std::abs(v - target) <= kCapTol;
    d += cfg.name() + " " + to_string(c.effective_level()) + ": " + fmt(v) + " vs " +
         fmt(target) + "; ";
  }
  const double t = seconds_since(t0);
  ok = ok && t <= kCapSeconds;
  return {ok, d + fmt(t, 3) + " s (limit " + fmt(kCapSeconds) + ")"};
}

Outcome criterion3() {
  auto c = base(2, 1);
  c.level = Level::L2;
  std::vector<double> p;
  for (int i = 0; i * kSandwichPStep <= 1.0 + 1e-12; ++i) p.push_back(i * kSandwichPStep);
  const auto rows = strategy_gap(c, p);
  double worst = -INFINITY;
  double at = 0.0;
  bool converged_all = true;
  for (const auto& r : rows) {
    converged_all = converged_all && converged(r.status);
    if (r.gap() > worst) {
      worst = r.gap();
      at = r.p_err;
    }
  }
  return {converged_all && worst <= kSandwichGap,
          "max gap " + fmt(worst) + " at p_err=" + fmt(at) + " (limit " + fmt(kSandwichGap) +
              ")"};
}

Outcome criterion4() {
  auto two = base(2, 1);
  auto three = base(2, 2);
  two.level = three.level = Level::L2;
  two.p_err_stop = three.p_err_stop = kOrderingStop;
  two.p_err_step = three.p_err_step = kOrderingStep;
  const auto a = run_sweep(two);
  const auto b = run_sweep(three);
  double worst = -INFINITY;
  double at = 0.0;
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    const double diff = b.rows[i].p_ans_upper - a.rows[i].p_ans_upper;
    if (std::isnan(diff)) return {false, "solver failure at p_err=" + fmt(a.rows[i].p_err)};
    if (diff > worst) {
      worst = diff;
      at = a.rows[i].p_err;
    }
  }
  return {worst <= kOrderingSlack,
          "max (3,2,2) - BB84 = " + fmt(worst) + " at p_err=" + fmt(at) + " over " +
              std::to_string(a.rows.size()) + " points"};
}

Outcome criterion5() {
  const double bb84 = tomamichel_bound(bb84_family());
  bool ok = std::abs(bb84 - kTomamichel) <= kTomamichelTol;
  std::string d = "BB84 analytic " + fmt(bb84) + "; ";
  for (const auto& cfg : kConfigs) {
    const auto r = find_pwin(base(cfg.mt, cfg.mp));
    ok = ok && r.p_win <= r.tomamichel + kPwinSlack;
    d += cfg.name() + " p_win " + fmt(r.p_win) + " <= " + fmt(r.tomamichel) + "; ";
  }
  return {ok, d};
}

Outcome criterion6() {
  const auto t0 = std::chrono::steady_clock::now();
  auto c = base(2, 1, Variant::Qkd);
  c.level = Level::L1;
  const auto r = find_pwin(c);
  const double t = seconds_since(t0);
  const bool ok = std::abs(r.p_err_star - kQkdPerr) <= kQkdTol &&
                  std::abs(r.p_win - kQkdPwin) <= kQkdTol && t <= kQkdSeconds;
  return {ok, "p_err*=" + fmt(r.p_err_star) + " p_win=" + fmt(r.p_win) + ", " + fmt(t, 3) +
                  " s"};
}

Outcome criterion7() {
  struct Target {
    Config cfg;
    double delta;
    double eta;
  };
  const std::vector<Target> targets = {{{2, 1}, 0.013, 0.509}, {{2, 2}, 0.009, 0.36},
                                       {{3, 2}, 0.009, 0.34}};
  bool ok = true;
  std::string d;
  for (const auto& t : targets) {
    auto c = base(t.cfg.mt, t.cfg.mp, Variant::QpvRelaxed, kXi);
    c.p_err_step = kThresholdGridStep;
    c.p_err_stop = t.delta + kXi + 2 * kThresholdGridStep;
    const auto curve = run_sweep(c).curve(c);
    const double eta = eta_threshold(curve, t.delta);
    ok = ok && std::abs(eta - t.eta) <= kEtaTol;
    d += t.cfg.name() + " eta0=" + fmt(eta, 4) + " target " + fmt(t.eta) + "; ";
  }
  return {ok, d};
}

Outcome criterion8() {
  bool ok = true;
  std::string d;
  for (double eta : {0.51, 1.0}) {
    const double k = rounding_size(0, eta, 0.013, Flavor::Bb84);
    const double margin = counting_margin_bb84(10, k, 0.25);
    ok = ok && margin < 0.0;
    d += "eta=" + fmt(eta) + " k=" + fmt(k) + " margin=" + fmt(margin) + "; ";
  }
  double prev = -INFINITY;
  bool inc_k = true, inc_b = true;
  for (double k = 0.0; k <= 5000.0; k += 25.0) {
    const double v = counting_margin_bb84(10, k, 0.25);
    inc_k = inc_k && v > prev;
    prev = v;
  }
  prev = -INFINITY;
  for (double b = 0.005; b < 0.5; b += 0.005) {
    const double v = counting_margin_bb84(10, 40.0, b);
    inc_b = inc_b && v > prev;
    prev = v;
  }
  ok = ok && inc_k && inc_b;
  return {ok, d + "increasing in k: " + (inc_k ? "yes" : "no") +
                  ", in beta: " + (inc_b ? "yes" : "no")};
}

Outcome criterion9() {
  bool ok = true;
  std::string d;

  // Built-in strategies against their relaxations.
  double worst_violation = 0.0, worst_excess = -INFINITY;
  auto check = [&](const ExplicitStrategy& s, const MeasurementFamily& f, double p_err) {
    for (auto v : {Variant::QpvStrict, Variant::QpvRelaxed}) {
      const GameSpec spec{f, v, p_err, v == Variant::QpvRelaxed ? kXi : 0.0};
      const auto problem = assemble(spec, f.size() <= 3 ? Level::L2 : Level::L1AB);
      const auto y = strategy_moments(s, problem);
      const auto r = solve(problem);
      if (!converged(r.status)) throw Error("solver failed in strategy check");
      worst_violation = std::max(worst_violation, max_violation(problem, y));
      worst_excess = std::max(worst_excess, problem.objective().evaluate(y) - r.value);
    }
  };
  check(optimal_bb84(), bb84_family(), evaluate(optimal_bb84(), bb84_family()).p_wrong + 1e-12);
  for (const auto& cfg : kConfigs) {
    const auto f = discretize_bases(cfg.mt, cfg.mp);
    check(uniform_guess(f), f, 0.0);
    const std::vector<double> p = {0.5};
    check(mixed_strategy(f, 0.5), f, mixed_curve(f, p)[0].p_err + 1e-12);
  }
  ok = worst_violation <= kFeasTol && worst_excess <= kSdpSlack;
  d += "strategy violation " + fmt(worst_violation) + ", objective - SDP " + fmt(worst_excess) +
       "; ";

  // Level monotonicity on seeded random samples.
  std::mt19937 rng(20240917);
  std::uniform_real_distribution<double> perr(0.0, 0.2);
  std::uniform_int_distribution<int> which(0, 1);
  double worst_order = -INFINITY;
  for (int i = 0; i < kLevelSamples; ++i) {
    const Config cfg = which(rng) ? Config{2, 2} : Config{2, 1};
    const double p = perr(rng);
    std::map<Level, double> v;
    for (Level l : {Level::L1, Level::L1AB, Level::L2}) {
      auto c = base(cfg.mt, cfg.mp);
      c.level = l;
      c.solver.pad = 0.0;
      v[l] = value_at(c, p);
    }
    worst_order = std::max({worst_order, v[Level::L2] - v[Level::L1AB],
                            v[Level::L1AB] - v[Level::L1]});
  }
  ok = ok && worst_order <= kLevelSlack;
  d += "worst level inversion " + fmt(worst_order) + "; ";

  // Emitted curves.
  int violations = 0;
  for (const auto& cfg : {Config{2, 1}, Config{2, 2}}) {
    for (auto v : {Variant::QpvStrict, Variant::QpvRelaxed}) {
      auto c = base(cfg.mt, cfg.mp, v, v == Variant::QpvRelaxed ? kXi : 0.0);
      c.p_err_step = 0.01;
      const auto r = run_sweep(c);
      violations += r.monotonicity_violation.has_value() || r.failures > 0;
    }
  }
  ok = ok && violations == 0;
  d += "non-monotone curves " + std::to_string(violations);
  return {ok, d};
}

Outcome criterion10() {
  std::mt19937 rng(99);
  int zero_words = 0, checked = 0, bad = 0;
  double worst = 0.0;
  for (auto [da, db] : {std::pair{2, 4}, {4, 2}}) {
    const auto model = oracle::random_model(da, db, 3, rng);
    for (int i = 0; i < kOracleWords / 2; ++i) {
      const Monomial w = oracle::random_word(7, 3, rng);
      const Monomial c = canonicalize(w);
      const auto mw = model.evaluate(w);
      double err = (mw - model.evaluate(c)).cwiseAbs().maxCoeff();
      if (c.is_zero()) {
        ++zero_words;
        err = mw.cwiseAbs().maxCoeff();
      }
      // Rewrites with the same canonical form evaluate identically.
      const Monomial r = oracle::random_rewrite(w, rng);
      if (canonicalize(r) == c) {
        err = std::max(err, (model.evaluate(r) - mw).cwiseAbs().maxCoeff());
      } else {
        ++bad;
      }
      worst = std::max(worst, err);
      ++checked;
    }
  }
  return {worst <= kOracleTol && bad == 0,
          std::to_string(checked) + " words, " + std::to_string(zero_words) +
              " canonically zero, max deviation " + fmt(worst) + ", rewrite mismatches " +
              std::to_string(bad)};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::function<Outcome()>> criteria = {
      criterion1, criterion2, criterion3, criterion4, criterion5,
      criterion6, criterion7, criterion8, criterion9, criterion10};
  std::vector<int> run;
  if (argc > 1) {
    const int n = std::atoi(argv[1]);
    if (n < 1 || n > static_cast<int>(criteria.size())) {
      std::fprintf(stderr, "usage: %s [1-10]\n", argv[0]);
      return 2;
    }
    run.push_back(n);
  } else {
    for (int i = 1; i <= static_cast<int>(criteria.size()); ++i) run.push_back(i);
  }
  bool all = true;
  for (int n : run) {
    Outcome o;
    try {
      o = criteria[n - 1]();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    all = all && o.pass;
    std::printf("criterion %d: %s %s\n", n, o.pass ? "PASS" : "FAIL", o.detail.c_str());
    std::fflush(stdout);
  }
  return all ? 0 : 1;
}
