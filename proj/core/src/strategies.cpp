#include "lossmoe/strategies.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "lossmoe/error.hpp"

namespace lossmoe {

namespace {

using Eigen::MatrixXcd;
using Eigen::VectorXcd;

MatrixXcd projector_onto(int dim, int index) {
  MatrixXcd p = MatrixXcd::Zero(dim, dim);
  p(index, index) = 1.0;
  return p;
}

/// <psi| I_V (x) OA (x) OB |psi>.
Complex expectation(const ExplicitStrategy& s, const MatrixXcd& va, const MatrixXcd& oa,
                    const MatrixXcd& ob) {
  const int da = s.dim_a;
  const int db = s.dim_b;
  Complex total = 0.0;
  for (int v = 0; v < 2; ++v) {
    for (int w = 0; w < 2; ++w) {
      if (va(v, w) == Complex(0.0)) continue;
      // Psi_v(i, j) = psi[v*da*db + i*db + j] (row-major blocks)
      Eigen::Map<const Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>
          pv(s.state.data() + v * da * db, da, db);
      Eigen::Map<const Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>
          pw(s.state.data() + w * da * db, da, db);
      // sum_{ij,kl} conj(pv(i,j)) oa(i,k) ob(j,l) pw(k,l)
      total += va(v, w) * (pv.conjugate().cwiseProduct(oa * pw * ob.transpose())).sum();
    }
  }
  return total;
}

Ket ket_from_bloch(const Eigen::Vector3d& r) {
  const double theta = std::acos(std::clamp(r.z(), -1.0, 1.0));
  const double phi = std::atan2(r.y(), r.x());
  Ket k;
  k << Complex(std::cos(theta / 2.0), 0.0), std::polar(std::sin(theta / 2.0), phi);
  return k;
}

double min_alignment(const Eigen::Vector3d& r, const std::vector<Eigen::Vector3d>& s) {
  double worst = std::numeric_limits<double>::infinity();
  for (const auto& v : s) worst = std::min(worst, r.dot(v));
  return worst;
}

/// max over unit r of min_x r.s_x. The optimum of a smallest enclosing cap is
/// fixed by at most three points: a point, a pair midpoint, or a triple's
/// circumcenter direction.
std::pair<double, Eigen::Vector3d> best_cap(const std::vector<Eigen::Vector3d>& s) {
  double best = -std::numeric_limits<double>::infinity();
  Eigen::Vector3d arg = s.front();
  auto consider = [&](Eigen::Vector3d r) {
    const double nrm = r.norm();
    if (nrm < 1e-12) return;
    r /= nrm;
    const double val = min_alignment(r, s);
    if (val > best + 1e-15) {
      best = val;
      arg = r;
    }
  };
  const std::size_t m = s.size();
  for (std::size_t i = 0; i < m; ++i) {
    consider(s[i]);
    for (std::size_t j = i + 1; j < m; ++j) {
      consider(s[i] + s[j]);
      for (std::size_t k = j + 1; k < m; ++k) {
        const Eigen::Vector3d nrm = (s[j] - s[i]).cross(s[k] - s[i]);
        consider(nrm);
        consider(-nrm);
      }
    }
  }
  return {best, arg};
}

std::vector<Eigen::Vector3d> answer_vectors(const MeasurementFamily& family,
                                            const std::vector<int>& answers) {
  std::vector<Eigen::Vector3d> s;
  s.reserve(family.size());
  for (std::size_t x = 0; x < family.size(); ++x) {
    s.push_back(bloch_vector(family.basis(x).ket(answers[x])));
  }
  return s;
}

ExplicitStrategy always_answer_strategy(const Ket& referee, const std::vector<int>& answers) {
  ExplicitStrategy s;
  s.dim_a = 1;
  s.dim_b = 1;
  s.state = referee;
  const MatrixXcd one = MatrixXcd::Identity(1, 1);
  const MatrixXcd zero = MatrixXcd::Zero(1, 1);
  for (int a : answers) {
    Instrument inst{zero, zero, zero};
    inst[a] = one;
    s.alice.push_back(inst);
    s.bob.push_back(inst);
  }
  return s;
}

}  // namespace

void ExplicitStrategy::validate() const {
  const int dim = 2 * dim_a * dim_b;
  if (state.size() != dim) throw ValidationError("strategy state has the wrong dimension");
  if (std::abs(state.squaredNorm() - 1.0) > 1e-12) {
    throw ValidationError("strategy state is not normalized");
  }
  if (alice.size() != bob.size() || alice.empty()) {
    throw ValidationError("strategy needs one instrument per input for each party");
  }
  auto check = [](const std::vector<Instrument>& insts, int d) {
    for (const auto& inst : insts) {
      MatrixXcd sum = MatrixXcd::Zero(d, d);
      for (const auto& e : inst) {
        if (e.rows() != d || e.cols() != d) {
          throw ValidationError("measurement operator has the wrong dimension");
        }
        if ((e - e.adjoint()).cwiseAbs().maxCoeff() > 1e-10) {
          throw ValidationError("measurement operator is not Hermitian");
        }
        Eigen::SelfAdjointEigenSolver<MatrixXcd> es(e, Eigen::EigenvaluesOnly);
        if (es.eigenvalues().minCoeff() < -1e-10) {
          throw ValidationError("measurement operator is not PSD");
        }
        sum += e;
      }
      if ((sum - MatrixXcd::Identity(d, d)).cwiseAbs().maxCoeff() > 1e-10) {
        throw ValidationError("measurement is not complete");
      }
    }
  };
  check(alice, dim_a);
  check(bob, dim_b);
}

double RoundOutcomeProbs::conditional_correct() const {
  const double answered = 1.0 - p_no_photon;
  if (answered <= 0.0) return std::numeric_limits<double>::quiet_NaN();
  return p_correct / answered;
}

RoundOutcomeProbs evaluate(const ExplicitStrategy& strategy, const MeasurementFamily& family) {
  strategy.validate();
  const std::size_t m = family.size();
  if (strategy.alice.size() != m) {
    throw ValidationError("strategy and measurement family disagree on the number of inputs");
  }
  RoundOutcomeProbs out;
  const MatrixXcd id2 = MatrixXcd::Identity(2, 2);
  for (std::size_t x = 0; x < m; ++x) {
    const auto& A = strategy.alice[x];
    const auto& B = strategy.bob[x];
    for (int a = 0; a < 3; ++a) {
      for (int b = 0; b < 3; ++b) {
        if (a != b) {
          out.p_abort += expectation(strategy, id2, A[a], B[b]).real();
        } else if (a == kNoAnswer) {
          out.p_no_photon += expectation(strategy, id2, A[a], B[b]).real();
        } else {
          const MatrixXcd v_ok = family.projector(a, x);
          const MatrixXcd v_bad = family.projector(1 - a, x);
          out.p_correct += expectation(strategy, v_ok, A[a], B[b]).real();
          out.p_wrong += expectation(strategy, v_bad, A[a], B[b]).real();
        }
      }
    }
  }
  const double inv = 1.0 / double(m);
  out.p_correct *= inv;
  out.p_wrong *= inv;
  out.p_no_photon *= inv;
  out.p_abort *= inv;
  return out;
}

Eigen::Vector3d bloch_vector(const Ket& ket) {
  const Complex c = std::conj(ket(0)) * ket(1);
  return {2.0 * c.real(), 2.0 * c.imag(), std::norm(ket(0)) - std::norm(ket(1))};
}

ExplicitStrategy optimal_bb84() {
  const double t = std::numbers::pi / 8.0;
  Ket psi;
  psi << Complex(std::cos(t), 0.0), Complex(std::sin(t), 0.0);
  return always_answer_strategy(psi, {0, 0});
}

ExplicitStrategy uniform_guess(const MeasurementFamily& family, std::span<const int> answers) {
  const int m = static_cast<int>(family.size());
  std::vector<int> ans(answers.begin(), answers.end());
  if (ans.empty()) ans.assign(m, 0);
  if (static_cast<int>(ans.size()) != m) {
    throw ParameterError("uniform_guess: one answer per input expected");
  }
  ExplicitStrategy s;
  s.dim_a = m;
  s.dim_b = m;
  s.state = VectorXcd::Zero(2 * m * m);
  const double amp = 1.0 / std::sqrt(double(m));
  for (int g = 0; g < m; ++g) {
    const Ket& k = family.basis(g).ket(ans[g]);
    for (int v = 0; v < 2; ++v) s.state(v * m * m + g * m + g) = amp * k(v);
  }
  for (int x = 0; x < m; ++x) {
    const MatrixXcd hit = projector_onto(m, x);
    const MatrixXcd zero = MatrixXcd::Zero(m, m);
    Instrument inst{zero, zero, MatrixXcd::Identity(m, m) - hit};
    inst[ans[x]] = hit;
    s.alice.push_back(inst);
    s.bob.push_back(inst);
  }
  return s;
}

AlwaysAnswer best_always_answer(const MeasurementFamily& family) {
  const std::size_t m = family.size();
  std::vector<int> best_answers(m, 0);
  double best_align = -std::numeric_limits<double>::infinity();
  Eigen::Vector3d best_r = Eigen::Vector3d::UnitZ();

  auto score = [&](const std::vector<int>& answers) {
    return best_cap(answer_vectors(family, answers));
  };
  auto offer = [&](const std::vector<int>& answers) {
    auto [val, r] = score(answers);
    if (val > best_align + 1e-15) {
      best_align = val;
      best_r = r;
      best_answers = answers;
    }
    return val;
  };

  if (m <= 12) {
    std::vector<int> answers(m);
    for (std::uint32_t mask = 0; mask < (1u << m); ++mask) {
      for (std::size_t x = 0; x < m; ++x) answers[x] = (mask >> x) & 1u;
      offer(answers);
    }
  } else {
    std::mt19937 rng(12345);
    for (int restart = 0; restart < 32; ++restart) {
      std::vector<int> answers(m);
      for (auto& a : answers) a = static_cast<int>(rng() & 1u);
      double cur = offer(answers);
      for (bool improved = true; improved;) {
        improved = false;
        for (std::size_t x = 0; x < m; ++x) {
          answers[x] ^= 1;
          const double val = score(answers).first;
          if (val > cur + 1e-12) {
            cur = val;
            offer(answers);
            improved = true;
          } else {
            answers[x] ^= 1;
          }
        }
      }
    }
  }

  AlwaysAnswer out;
  out.answers = best_answers;
  out.bloch = best_r;
  out.strategy = always_answer_strategy(ket_from_bloch(best_r), best_answers);
  double e_star = 0.0;
  const Ket k = ket_from_bloch(best_r);
  for (std::size_t x = 0; x < m; ++x) {
    const double err = std::norm(family.basis(x).ket(1 - best_answers[x]).dot(k));
    e_star = std::max(e_star, err);
  }
  out.e_star = e_star;
  return out;
}

ExplicitStrategy mixed_strategy(const MeasurementFamily& family, double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw ParameterError("mixing weight must lie in [0, 1]");
  const AlwaysAnswer aa = best_always_answer(family);
  const ExplicitStrategy s1 = aa.strategy;
  const ExplicitStrategy s2 = uniform_guess(family, aa.answers);
  ExplicitStrategy s;
  s.dim_a = s1.dim_a + s2.dim_a;
  s.dim_b = s1.dim_b + s2.dim_b;
  const int da = s.dim_a, db = s.dim_b;
  s.state = VectorXcd::Zero(2 * da * db);
  for (int v = 0; v < 2; ++v) {
    for (int i = 0; i < s1.dim_a; ++i)
      for (int j = 0; j < s1.dim_b; ++j)
        s.state(v * da * db + i * db + j) =
            std::sqrt(p) * s1.state(v * s1.dim_a * s1.dim_b + i * s1.dim_b + j);
    for (int i = 0; i < s2.dim_a; ++i)
      for (int j = 0; j < s2.dim_b; ++j)
        s.state(v * da * db + (s1.dim_a + i) * db + s1.dim_b + j) =
            std::sqrt(1.0 - p) * s2.state(v * s2.dim_a * s2.dim_b + i * s2.dim_b + j);
  }
  auto stack = [](const std::vector<Instrument>& x1, const std::vector<Instrument>& x2,
                  int d1, int d2) {
    std::vector<Instrument> out(x1.size());
    for (std::size_t x = 0; x < x1.size(); ++x)
      for (int o = 0; o < 3; ++o) {
        MatrixXcd e = MatrixXcd::Zero(d1 + d2, d1 + d2);
        e.topLeftCorner(d1, d1) = x1[x][o];
        e.bottomRightCorner(d2, d2) = x2[x][o];
        out[x][o] = e;
      }
    return out;
  };
  s.alice = stack(s1.alice, s2.alice, s1.dim_a, s2.dim_a);
  s.bob = stack(s1.bob, s2.bob, s1.dim_b, s2.dim_b);
  return s;
}

std::vector<MixedPoint> mixed_curve(const MeasurementFamily& family, std::span<const double> grid) {
  const double m = double(family.size());
  const double e_star = best_always_answer(family).e_star;
  std::vector<MixedPoint> out;
  out.reserve(grid.size());
  for (double p : grid) {
    if (!(p >= 0.0 && p <= 1.0)) throw ParameterError("mixing weight must lie in [0, 1]");
    MixedPoint pt;
    pt.p = p;
    pt.p_ans = p + (1.0 - p) / m;
    pt.p_err = p * e_star / pt.p_ans;
    out.push_back(pt);
  }
  return out;
}

std::vector<double> strategy_moments(const ExplicitStrategy& strategy,
                                     const MomentProblem& problem) {
  strategy.validate();
  const MatrixXcd id2 = MatrixXcd::Identity(2, 2);
  std::vector<double> out(problem.num_variables());
  for (std::size_t v = 0; v < out.size(); ++v) {
    MatrixXcd oa = MatrixXcd::Identity(strategy.dim_a, strategy.dim_a);
    MatrixXcd ob = MatrixXcd::Identity(strategy.dim_b, strategy.dim_b);
    for (const auto& sym : problem.variable(static_cast<int>(v)).word()) {
      const auto& insts = sym.party == Party::A ? strategy.alice : strategy.bob;
      if (sym.input >= insts.size()) {
        throw ValidationError("strategy has fewer inputs than the moment problem");
      }
      const MatrixXcd& e = insts[sym.input][sym.outcome];
      if (sym.party == Party::A) {
        oa = oa * e;
      } else {
        ob = ob * e;
      }
    }
    out[v] = expectation(strategy, id2, oa, ob).real();
  }
  return out;
}

double max_violation(const MomentProblem& problem, std::span<const double> moments) {
  double worst = 0.0;
  for (const auto& c : problem.constraints()) {
    const double lhs = c.form.evaluate(moments);
    worst = std::max(worst, c.sense == Sense::Equal ? std::abs(lhs) : std::max(lhs, 0.0));
  }
  return worst;
}

}  // namespace lossmoe
