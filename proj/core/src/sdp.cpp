#include "lossmoe/sdp.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cmath>
#include <iomanip>
#include <istream>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>

#include "lossmoe/error.hpp"

namespace lossmoe {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

constexpr double kInf = std::numeric_limits<double>::infinity();

struct PsdTerm {
  int i;
  int j;
  double v;
};

struct LpTerm {
  int l;
  double v;
};

/// Column-oriented copy of an SdpaProblem for the interior-point loop.
struct Compiled {
  int m = 0;
  int n = 0;
  int L = 0;
  VectorXd c;
  MatrixXd F0;
  VectorXd F0l;
  std::vector<std::vector<PsdTerm>> psd;
  std::vector<std::vector<LpTerm>> lp;
};

Compiled compile_problem(const SdpaProblem& p) {
  Compiled out;
  out.m = p.num_vars;
  out.n = p.psd_dim;
  out.L = p.lp_dim;
  if (static_cast<int>(p.c.size()) != p.num_vars ||
      static_cast<int>(p.F.size()) != p.num_vars + 1) {
    throw ValidationError("SDPA problem: inconsistent sizes");
  }
  out.c = Eigen::Map<const VectorXd>(p.c.data(), p.num_vars);
  out.F0 = MatrixXd::Zero(out.n, out.n);
  out.F0l = VectorXd::Zero(out.L);
  out.psd.resize(out.m);
  out.lp.resize(out.m);
  for (int k = 0; k <= out.m; ++k) {
    for (const auto& e : p.F[k]) {
      if (e.block == 0) {
        int i = std::min(e.row, e.col);
        int j = std::max(e.row, e.col);
        if (i < 0 || j >= out.n) throw ValidationError("SDPA entry out of range");
        if (k == 0) {
          out.F0(i, j) += e.value;
          if (i != j) out.F0(j, i) += e.value;
        } else {
          out.psd[k - 1].push_back({i, j, e.value});
        }
      } else if (e.block == 1) {
        if (e.row != e.col || e.row < 0 || e.row >= out.L) {
          throw ValidationError("SDPA LP entry out of range");
        }
        if (k == 0) {
          out.F0l(e.row) += e.value;
        } else {
          out.lp[k - 1].push_back({e.row, e.value});
        }
      } else {
        throw ValidationError("SDPA entry in unknown block");
      }
    }
  }
  return out;
}

// sum_k z_k F_k
void apply(const Compiled& P, const VectorXd& z, MatrixXd& S, VectorXd& s) {
  S.setZero(P.n, P.n);
  s.setZero(P.L);
  for (int k = 0; k < P.m; ++k) {
    const double zk = z(k);
    if (zk == 0.0) continue;
    for (const auto& t : P.psd[k]) {
      S(t.i, t.j) += t.v * zk;
      if (t.i != t.j) S(t.j, t.i) += t.v * zk;
    }
    for (const auto& t : P.lp[k]) s(t.l) += t.v * zk;
  }
}

// F_k . (M, w) for every k; M is read as given (need not be symmetric).
VectorXd adjoint(const Compiled& P, const MatrixXd& M, const VectorXd& w) {
  VectorXd out(P.m);
  for (int k = 0; k < P.m; ++k) {
    double acc = 0.0;
    for (const auto& t : P.psd[k]) {
      acc += t.i == t.j ? t.v * M(t.i, t.i) : t.v * (M(t.i, t.j) + M(t.j, t.i));
    }
    for (const auto& t : P.lp[k]) acc += t.v * w(t.l);
    out(k) = acc;
  }
  return out;
}

// Largest alpha in (0, inf] with X + alpha dX >= 0, given X = L L^T.
double max_step(const Eigen::LLT<MatrixXd>& chol, const MatrixXd& dX) {
  if (dX.rows() == 0) return kInf;
  MatrixXd T = chol.matrixL().solve(dX);
  T = chol.matrixL().solve(T.transpose().eval()).transpose().eval();
  T = (0.5 * (T + T.transpose())).eval();
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(T, Eigen::EigenvaluesOnly);
  const double lmin = es.eigenvalues()(0);
  return lmin < 0.0 ? -1.0 / lmin : kInf;
}

double max_step_lp(const VectorXd& x, const VectorXd& dx) {
  double a = kInf;
  for (int l = 0; l < x.size(); ++l) {
    if (dx(l) < 0.0) a = std::min(a, -x(l) / dx(l));
  }
  return a;
}

struct Direction {
  VectorXd dz;
  MatrixXd dX;
  MatrixXd dY;
  VectorXd dxl;
  VectorXd dyl;
};

}  // namespace

std::string to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::Optimal: return "optimal";
    case SolveStatus::NearOptimal: return "near_optimal";
    case SolveStatus::Infeasible: return "infeasible";
    case SolveStatus::Unbounded: return "unbounded";
    case SolveStatus::NumericalLimit: return "numerical_limit";
  }
  return "unknown";
}

bool converged(SolveStatus status) {
  return status == SolveStatus::Optimal || status == SolveStatus::NearOptimal;
}

SdpaSolution solve_sdpa(const SdpaProblem& problem, const SolverSettings& settings) {
  const Compiled P = compile_problem(problem);
  const int m = P.m;
  const int n = P.n;
  const int L = P.L;
  const int dim = n + L;

  SdpaSolution sol;
  sol.x.assign(m, 0.0);
  if (dim == 0) {
    sol.status = P.c.cwiseAbs().maxCoeff() > 0.0 ? SolveStatus::Unbounded
                                                 : SolveStatus::Optimal;
    return sol;
  }

  const double normF0 = std::sqrt(P.F0.squaredNorm() + P.F0l.squaredNorm());
  const double normc = P.c.norm();
  double maxF = 0.0;
  for (int k = 0; k < m; ++k) {
    for (const auto& t : P.psd[k]) maxF = std::max(maxF, std::abs(t.v));
    for (const auto& t : P.lp[k]) maxF = std::max(maxF, std::abs(t.v));
  }
  // Starting point scaled to the data, in the spirit of SDPA's lambda*.
  const double lambda = std::max({10.0, 10.0 * normF0 / std::sqrt(double(dim)),
                                  10.0 * normc / std::max(maxF, 1e-12)});

  VectorXd z = VectorXd::Zero(m);
  MatrixXd X = lambda * MatrixXd::Identity(n, n);
  MatrixXd Y = lambda * MatrixXd::Identity(n, n);
  VectorXd xl = VectorXd::Constant(L, lambda);
  VectorXd yl = VectorXd::Constant(L, lambda);

  MatrixXd S(n, n);
  VectorXd s(L);
  MatrixXd B(m, m);
  MatrixXd W(n, n);

  struct Snapshot {
    double score = kInf;
    double pinf = 0, dinf = 0, gap = 0, pobj = 0, dobj = 0;
    VectorXd z;
  } best;

  int stalls = 0;
  int it = 0;
  SolveStatus status = SolveStatus::NumericalLimit;
  double pinf = 0.0, dinf = 0.0, gap = 0.0, pobj = 0.0, dobj = 0.0;

  for (;; ++it) {
    apply(P, z, S, s);
    const MatrixXd Pm = S - P.F0 - X;
    const VectorXd Pl = s - P.F0l - xl;
    const VectorXd d = P.c - adjoint(P, Y, yl);
    pobj = P.c.dot(z);
    dobj = (P.F0.cwiseProduct(Y)).sum() + P.F0l.dot(yl);
    pinf = std::sqrt(Pm.squaredNorm() + Pl.squaredNorm()) / (1.0 + normF0);
    dinf = d.norm() / (1.0 + normc);
    gap = std::abs(pobj - dobj) / (1.0 + std::abs(pobj) + std::abs(dobj));
    const double score = std::max({pinf, dinf, gap});
    if (settings.trace) {
      std::fprintf(stderr, "%3d pobj %+.8e dobj %+.8e pinf %.2e dinf %.2e gap %.2e\n",
                   it, pobj, dobj, pinf, dinf, gap);
    }
    if (score < best.score) {
      best = {score, pinf, dinf, gap, pobj, dobj, z};
    }
    if (pinf < settings.tol && dinf < settings.tol && gap < settings.tol) {
      status = SolveStatus::Optimal;
      break;
    }
    // Divergence of one side certifies infeasibility of the other.
    const double ynorm = std::sqrt(Y.squaredNorm() + yl.squaredNorm());
    if (ynorm > 1e10 * lambda && dinf < 1e-6 && dobj > 1e8 * (1.0 + std::abs(pobj))) {
      status = SolveStatus::Infeasible;
      break;
    }
    if (z.norm() > 1e10 * (1.0 + lambda) && pinf < 1e-6 &&
        -pobj > 1e8 * (1.0 + std::abs(dobj))) {
      status = SolveStatus::Unbounded;
      break;
    }
    if (it >= settings.max_iter) break;

    const double mu = ((X.cwiseProduct(Y)).sum() + xl.dot(yl)) / dim;

    Eigen::LLT<MatrixXd> cholX(X);
    Eigen::LLT<MatrixXd> cholY(Y);
    if (cholX.info() != Eigen::Success || cholY.info() != Eigen::Success) break;
    const MatrixXd Xinv = cholX.solve(MatrixXd::Identity(n, n));
    const VectorXd ratio = yl.cwiseQuotient(xl);

    // Schur complement B_kl = tr(F_k X^-1 F_l Y) + sum F_k[l] F_l[l] y/x.
    for (int k = 0; k < m; ++k) {
      W.setZero();
      for (const auto& t : P.psd[k]) {
        W.noalias() += t.v * Xinv.col(t.i) * Y.row(t.j);
        if (t.i != t.j) W.noalias() += t.v * Xinv.col(t.j) * Y.row(t.i);
      }
      for (int l = k; l < m; ++l) {
        double acc = 0.0;
        for (const auto& t : P.psd[l]) {
          acc += t.i == t.j ? t.v * W(t.i, t.i) : t.v * (W(t.j, t.i) + W(t.i, t.j));
        }
        B(k, l) = acc;
      }
    }
    if (L > 0) {
      for (int k = 0; k < m; ++k) {
        for (const auto& a : P.lp[k]) {
          for (int l = k; l < m; ++l) {
            for (const auto& b : P.lp[l]) {
              if (a.l == b.l) B(k, l) += a.v * b.v * ratio(a.l);
            }
          }
        }
      }
    }
    for (int k = 0; k < m; ++k)
      for (int l = 0; l < k; ++l) B(k, l) = B(l, k);

    // Jacobi-scaled Cholesky; near the optimum B loses definiteness to
    // rounding, so retry with a growing ridge and refine against B.
    const VectorXd scale = B.diagonal().cwiseMax(1e-300).cwiseSqrt().cwiseInverse();
    const MatrixXd Bs = scale.asDiagonal() * B * scale.asDiagonal();
    Eigen::LLT<MatrixXd> cholB(Bs);
    bool ridged = false;
    for (double ridge = 1e-14; cholB.info() != Eigen::Success && ridge < 1e-4; ridge *= 100) {
      MatrixXd Breg = Bs;
      Breg.diagonal().array() += ridge;
      cholB.compute(Breg);
      ridged = true;
    }
    if (cholB.info() != Eigen::Success) break;
    if (ridged && settings.trace) std::fprintf(stderr, "schur complement regularized\n");
    auto schur_solve = [&](const VectorXd& rhs) {
      VectorXd x = scale.cwiseProduct(cholB.solve(scale.cwiseProduct(rhs)));
      if (ridged) {
        for (int r = 0; r < 3; ++r) {
          const VectorXd res = rhs - B * x;
          x += scale.cwiseProduct(cholB.solve(scale.cwiseProduct(res)));
        }
      }
      return x;
    };

    const MatrixXd XinvPY = Xinv * Pm * Y;
    auto direction = [&](double target, const MatrixXd* K, const VectorXd* Kl) {
      MatrixXd R = target * Xinv - Y;
      if (K) R.noalias() -= Xinv * (*K);
      VectorXd Rl = (target * xl.cwiseInverse() - yl);
      if (Kl) Rl -= Kl->cwiseQuotient(xl);
      const MatrixXd G = R - XinvPY;
      const VectorXd Gl = Rl - Pl.cwiseProduct(ratio);
      const VectorXd rhs = adjoint(P, G, Gl) - d;
      Direction dir;
      dir.dz = schur_solve(rhs);
      MatrixXd FS(n, n);
      VectorXd fs(L);
      apply(P, dir.dz, FS, fs);
      dir.dX = FS + Pm;
      dir.dX = (0.5 * (dir.dX + dir.dX.transpose())).eval();
      dir.dY = R - Xinv * dir.dX * Y;
      dir.dY = (0.5 * (dir.dY + dir.dY.transpose())).eval();
      dir.dxl = fs + Pl;
      dir.dyl = Rl - dir.dxl.cwiseProduct(ratio);
      return dir;
    };

    const Direction pred = direction(0.0, nullptr, nullptr);
    const double ap = std::min(1.0, std::min(max_step(cholX, pred.dX),
                                             max_step_lp(xl, pred.dxl)));
    const double ad = std::min(1.0, std::min(max_step(cholY, pred.dY),
                                             max_step_lp(yl, pred.dyl)));
    const double mu_aff =
        (((X + ap * pred.dX).cwiseProduct(Y + ad * pred.dY)).sum() +
         (xl + ap * pred.dxl).dot(yl + ad * pred.dyl)) / dim;
    double sigma = std::pow(std::max(mu_aff, 0.0) / mu, 3);
    sigma = std::clamp(sigma, 0.0, 1.0);
    if (pinf > 1e-3 || dinf > 1e-3) sigma = std::max(sigma, 0.1);

    const MatrixXd K = pred.dX * pred.dY;
    const VectorXd Kl = pred.dxl.cwiseProduct(pred.dyl);
    const Direction corr = direction(sigma * mu, &K, &Kl);

    const double gamma = 0.95;
    double a_p = std::min(max_step(cholX, corr.dX), max_step_lp(xl, corr.dxl));
    double a_d = std::min(max_step(cholY, corr.dY), max_step_lp(yl, corr.dyl));
    a_p = std::min(1.0, gamma * a_p);
    a_d = std::min(1.0, gamma * a_d);

    z += a_p * corr.dz;
    X += a_p * corr.dX;
    xl += a_p * corr.dxl;
    Y += a_d * corr.dY;
    yl += a_d * corr.dyl;

    if (std::max(a_p, a_d) < 1e-8) {
      if (++stalls >= 3) break;
    } else {
      stalls = 0;
    }
  }

  sol.iterations = it;
  if (status == SolveStatus::Optimal || status == SolveStatus::Infeasible ||
      status == SolveStatus::Unbounded) {
    sol.status = status;
    sol.x.assign(z.data(), z.data() + m);
    sol.primal_objective = pobj;
    sol.dual_objective = dobj;
    sol.primal_residual = pinf;
    sol.dual_residual = dinf;
    sol.gap = gap;
    return sol;
  }
  sol.status = best.score < settings.near_tol ? SolveStatus::NearOptimal
                                              : SolveStatus::NumericalLimit;
  if (best.z.size() == m) sol.x.assign(best.z.data(), best.z.data() + m);
  sol.primal_objective = best.pobj;
  sol.dual_objective = best.dobj;
  sol.primal_residual = best.pinf;
  sol.dual_residual = best.dinf;
  sol.gap = best.gap;
  return sol;
}

// ---------------------------------------------------------------------------
// Moment problems

namespace {

constexpr double kCoefTol = 1e-12;

/// Gaussian substitution of linear equalities over moment variables. Every
/// eliminated variable is kept as an affine form over the free ones.
class Eliminator {
 public:
  explicit Eliminator(int num_vars) : expr_(num_vars) {}

  /// Adds form == 0. Returns false if it contradicts earlier rows.
  bool add(const LinearForm& row) {
    LinearForm r = substitute(row);
    if (r.terms.empty()) return std::abs(r.constant) <= 1e-9;
    auto pivot = std::max_element(
        r.terms.begin(), r.terms.end(), [](const auto& x, const auto& y) {
          return std::abs(x.second) < std::abs(y.second) ||
                 (std::abs(x.second) == std::abs(y.second) && x.first < y.first);
        });
    const int p = pivot->first;
    const double cp = pivot->second;
    LinearForm e;
    for (const auto& [v, c] : r.terms)
      if (v != p) e.terms.emplace_back(v, -c / cp);
    e.constant = -r.constant / cp;
    for (int v : order_) {
      auto& ev = *expr_[v];
      auto hit = std::find_if(ev.terms.begin(), ev.terms.end(),
                              [p](const auto& t) { return t.first == p; });
      if (hit == ev.terms.end()) continue;
      const double coef = hit->second;
      ev.terms.erase(hit);
      ev.add(e, coef);
      clean(ev);
    }
    expr_[p] = std::move(e);
    order_.push_back(p);
    return true;
  }

  LinearForm substitute(const LinearForm& f) const {
    LinearForm out;
    out.constant = f.constant;
    for (const auto& [v, c] : f.terms) {
      if (expr_[v]) {
        out.add(*expr_[v], c);
      } else {
        out.add(v, c);
      }
    }
    clean(out);
    return out;
  }

  LinearForm variable(int v) const {
    if (expr_[v]) return *expr_[v];
    LinearForm f;
    f.add(v, 1.0);
    return f;
  }

  bool eliminated(int v) const { return expr_[v].has_value(); }

 private:
  static void clean(LinearForm& f) {
    std::erase_if(f.terms, [](const auto& t) { return std::abs(t.second) < kCoefTol; });
  }

  std::vector<std::optional<LinearForm>> expr_;
  std::vector<int> order_;
};

bool same_form(const LinearForm& a, const LinearForm& b) {
  if (a.terms.size() != b.terms.size()) return false;
  if (std::abs(a.constant - b.constant) > 1e-10) return false;
  for (std::size_t k = 0; k < a.terms.size(); ++k) {
    if (a.terms[k].first != b.terms[k].first ||
        std::abs(a.terms[k].second - b.terms[k].second) > 1e-10) {
      return false;
    }
  }
  return true;
}

LinearForm gram_form(const MomentProblem& problem, const Eliminator& elim,
                     std::size_t i, std::size_t j) {
  const int v = problem.gram_entry(i, j);
  return v < 0 ? LinearForm{} : elim.variable(v);
}

/// Exact facial reduction of the Gram block. A row whose diagonal is forced
/// to zero is a zero vector; two rows with G_ii = G_jj = G_ij identically are
/// the same vector. Both facts follow from PSD plus the equalities, so the
/// implied row equalities are added and the redundant rows dropped.
/// Returns false on a contradiction.
bool reduce_face(const MomentProblem& problem, Eliminator& elim,
                 std::vector<std::size_t>& rows) {
  for (bool changed = true; changed;) {
    changed = false;
    std::vector<LinearForm> diag;
    diag.reserve(rows.size());
    for (std::size_t r : rows) diag.push_back(gram_form(problem, elim, r, r));

    std::vector<char> drop(rows.size(), 0);
    for (std::size_t a = 0; a < rows.size(); ++a) {
      if (!diag[a].terms.empty() || std::abs(diag[a].constant) > 1e-10) continue;
      for (std::size_t r : rows) {
        if (!elim.add(gram_form(problem, elim, rows[a], r))) return false;
      }
      drop[a] = 1;
      changed = true;
    }
    for (std::size_t a = 0; a < rows.size(); ++a) {
      if (drop[a]) continue;
      for (std::size_t b = a + 1; b < rows.size(); ++b) {
        if (drop[b] || !same_form(diag[a], diag[b])) continue;
        const LinearForm off = gram_form(problem, elim, rows[a], rows[b]);
        if (!same_form(off, elim.substitute(diag[a]))) continue;
        for (std::size_t r : rows) {
          LinearForm row = gram_form(problem, elim, rows[a], r);
          row.add(gram_form(problem, elim, rows[b], r), -1.0);
          if (!elim.add(row)) return false;
        }
        drop[b] = 1;
        changed = true;
      }
    }
    std::vector<std::size_t> kept;
    for (std::size_t a = 0; a < rows.size(); ++a)
      if (!drop[a]) kept.push_back(rows[a]);
    rows = std::move(kept);
  }
  return true;
}

}  // namespace

SolveReport solve(const MomentProblem& problem, const SolverSettings& settings) {
  const auto start = std::chrono::steady_clock::now();
  SolveReport report;
  auto finish = [&]() {
    report.wall_time = std::chrono::duration<double>(
                           std::chrono::steady_clock::now() - start).count();
    return report;
  };

  const int N = static_cast<int>(problem.num_variables());
  Eliminator elim(N);
  for (const auto& row : problem.constraints()) {
    if (row.sense == Sense::Equal && !elim.add(row.form)) {
      report.status = SolveStatus::Infeasible;
      return finish();
    }
  }
  std::vector<std::size_t> rows(problem.psd_dimension());
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
  if (!reduce_face(problem, elim, rows)) {
    report.status = SolveStatus::Infeasible;
    return finish();
  }

  std::vector<LinearForm> ineq;
  for (const auto& row : problem.constraints()) {
    if (row.sense != Sense::LessEqual) continue;
    LinearForm r = elim.substitute(row.form);
    if (r.terms.empty()) {
      if (r.constant > 1e-9) {
        report.status = SolveStatus::Infeasible;
        return finish();
      }
      continue;
    }
    ineq.push_back(std::move(r));
  }
  const LinearForm objective = elim.substitute(problem.objective());

  const std::size_t n = rows.size();
  std::vector<std::vector<LinearForm>> gram(n, std::vector<LinearForm>(n));
  std::vector<char> used(N, 0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) {
      gram[i][j] = gram_form(problem, elim, rows[i], rows[j]);
      for (const auto& t : gram[i][j].terms) used[t.first] = 1;
    }
  for (const auto& r : ineq)
    for (const auto& t : r.terms) used[t.first] = 1;
  for (const auto& t : objective.terms) {
    if (!used[t.first]) {
      report.status = SolveStatus::Unbounded;
      return finish();
    }
  }
  std::vector<int> index(N, -1);
  std::vector<int> free_vars;
  for (int v = 0; v < N; ++v) {
    if (!elim.eliminated(v) && used[v]) {
      index[v] = static_cast<int>(free_vars.size());
      free_vars.push_back(v);
    }
  }

  SdpaProblem sp;
  sp.num_vars = static_cast<int>(free_vars.size());
  sp.psd_dim = static_cast<int>(n);
  sp.lp_dim = static_cast<int>(ineq.size());
  sp.c.assign(sp.num_vars, 0.0);
  sp.F.assign(sp.num_vars + 1, {});
  for (const auto& [v, c] : objective.terms) sp.c[index[v]] = -c;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) {
      const int r = static_cast<int>(i);
      const int cidx = static_cast<int>(j);
      for (const auto& [u, c] : gram[i][j].terms) {
        sp.F[index[u] + 1].push_back({0, r, cidx, c});
      }
      if (gram[i][j].constant != 0.0) {
        sp.F[0].push_back({0, r, cidx, -gram[i][j].constant});
      }
    }
  for (std::size_t l = 0; l < ineq.size(); ++l) {
    const int li = static_cast<int>(l);
    for (const auto& [u, c] : ineq[l].terms) {
      sp.F[index[u] + 1].push_back({1, li, li, -c});
    }
    if (ineq[l].constant != 0.0) sp.F[0].push_back({1, li, li, ineq[l].constant});
  }

  if (settings.trace) {
    std::fprintf(stderr, "reduced problem: psd %d (of %zu), vars %d (of %d), lp %d\n",
                 sp.psd_dim, problem.psd_dimension(), sp.num_vars, N, sp.lp_dim);
  }
  if (sp.num_vars > settings.max_vars) {
    throw ParameterError("moment problem too large: " + std::to_string(sp.num_vars) +
                         " free moments after reduction (limit " +
                         std::to_string(settings.max_vars) + "); use a lower level");
  }
  const SdpaSolution sol = solve_sdpa(sp, settings);
  report.status = sol.status;
  report.iterations = sol.iterations;
  report.primal_residual = sol.primal_residual;
  report.dual_residual = sol.dual_residual;
  report.gap = sol.gap;

  std::vector<double> free_values(N, 0.0);
  for (std::size_t k = 0; k < free_vars.size(); ++k) free_values[free_vars[k]] = sol.x[k];
  report.moments.resize(N);
  for (int v = 0; v < N; ++v) report.moments[v] = elim.variable(v).evaluate(free_values);
  if (objective.terms.empty()) {
    // Constant objective: any feasible point is optimal.
    if (converged(sol.status)) {
      report.status = SolveStatus::Optimal;
      report.gap = 0.0;
    }
    report.value = objective.constant;
    return finish();
  }
  // Average of the two objectives; they agree to the reported gap.
  report.value = objective.constant - 0.5 * (sol.primal_objective + sol.dual_objective);
  return finish();
}

std::map<std::string, double> first_order_moments(const MomentProblem& problem,
                                                  const SolveReport& report) {
  std::map<std::string, double> out;
  for (std::size_t v = 0; v < problem.num_variables(); ++v) {
    const auto& w = problem.variable(static_cast<int>(v)).word();
    int na = 0, nb = 0;
    for (const auto& s : w) (s.party == Party::A ? na : nb)++;
    if (na <= 1 && nb <= 1 && v < report.moments.size()) {
      out[problem.variable(static_cast<int>(v)).to_string()] = report.moments[v];
    }
  }
  return out;
}

double certified_upper(const SolveReport& report, double pad) {
  if (!(pad >= 0.0) || !std::isfinite(pad)) {
    throw ParameterError("certified_upper: pad must be finite and >= 0");
  }
  if (report.status == SolveStatus::Optimal) return report.value + pad;
  if (report.status == SolveStatus::NearOptimal) {
    const double residual =
        std::max({report.primal_residual, report.dual_residual, report.gap}) *
        (1.0 + std::abs(report.value));
    if (pad < residual) {
      throw ValidationError("certified_upper: pad does not cover solver residuals");
    }
    return report.value + pad;
  }
  throw ValidationError("certified_upper: solve status is " + to_string(report.status));
}

// ---------------------------------------------------------------------------
// SDPA sparse format

SdpaProblem to_sdpa(const MomentProblem& problem) {
  SdpaProblem sp;
  const int N = static_cast<int>(problem.num_variables());
  const std::size_t n = problem.psd_dimension();
  sp.num_vars = N;
  sp.psd_dim = static_cast<int>(n);
  sp.c.assign(N, 0.0);
  sp.F.assign(N + 1, {});
  for (const auto& [v, c] : problem.objective().terms) sp.c[v] = -c;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) {
      const int v = problem.gram_entry(i, j);
      if (v >= 0) sp.F[v + 1].push_back({0, int(i), int(j), 1.0});
    }
  int l = 0;
  auto emit = [&](const LinearForm& f, double sign) {
    // sign * f >= 0
    for (const auto& [v, c] : f.terms) sp.F[v + 1].push_back({1, l, l, sign * c});
    if (f.constant != 0.0) sp.F[0].push_back({1, l, l, -sign * f.constant});
    ++l;
  };
  for (const auto& row : problem.constraints()) {
    emit(row.form, -1.0);
    if (row.sense == Sense::Equal) emit(row.form, 1.0);
  }
  sp.lp_dim = l;
  return sp;
}

void write_sdpa(const SdpaProblem& p, std::ostream& out) {
  out << "* lossmoe moment relaxation\n";
  out << p.num_vars << "\n";
  out << (p.lp_dim > 0 ? 2 : 1) << "\n";
  out << p.psd_dim;
  if (p.lp_dim > 0) out << " " << -p.lp_dim;
  out << "\n";
  out << std::setprecision(17);
  for (int k = 0; k < p.num_vars; ++k) out << (k ? " " : "") << p.c[k];
  out << "\n";
  for (int k = 0; k <= p.num_vars; ++k) {
    for (const auto& e : p.F[k]) {
      if (e.value == 0.0) continue;
      out << k << " " << e.block + 1 << " " << e.row + 1 << " " << e.col + 1
          << " " << e.value << "\n";
    }
  }
}

SdpaProblem read_sdpa(std::istream& in) {
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '*' || line[0] == '"') continue;
    for (char& ch : line) {
      if (ch == ',' || ch == '{' || ch == '}' || ch == '(' || ch == ')') ch = ' ';
    }
    lines.push_back(line);
  }
  std::istringstream body([&] {
    std::string all;
    for (const auto& l : lines) all += l + "\n";
    return all;
  }());
  SdpaProblem p;
  int nblocks = 0;
  if (!(body >> p.num_vars >> nblocks) || p.num_vars < 0 || nblocks < 1 ||
      nblocks > 2) {
    throw ValidationError("read_sdpa: expected one PSD block and an optional LP block");
  }
  std::vector<int> sizes(nblocks);
  for (auto& s : sizes) body >> s;
  if (sizes[0] <= 0 || (nblocks == 2 && sizes[1] >= 0)) {
    throw ValidationError("read_sdpa: unsupported block structure");
  }
  p.psd_dim = sizes[0];
  p.lp_dim = nblocks == 2 ? -sizes[1] : 0;
  p.c.resize(p.num_vars);
  for (auto& c : p.c) {
    if (!(body >> c)) throw ValidationError("read_sdpa: truncated cost vector");
  }
  p.F.assign(p.num_vars + 1, {});
  int k, b, i, j;
  double v;
  while (body >> k >> b >> i >> j >> v) {
    if (k < 0 || k > p.num_vars || b < 1 || b > nblocks) {
      throw ValidationError("read_sdpa: entry out of range");
    }
    p.F[k].push_back({b - 1, i - 1, j - 1, v});
  }
  if (!body.eof()) throw ValidationError("read_sdpa: malformed entry");
  return p;
}

}  // namespace lossmoe
