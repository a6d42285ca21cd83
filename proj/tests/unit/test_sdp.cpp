#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>

#include <random>
#include <sstream>

#include "lossmoe/error.hpp"
#include "lossmoe/games.hpp"
#include "lossmoe/sdp.hpp"

using namespace lossmoe;

namespace {

const PartyAlphabet kLossyBb84{2, {0, 1, kNoAnswer}};

MomentProblem trivial_problem() {
  MomentProblem p(build_basis(Level::L1, kLossyBb84, kLossyBb84), kLossyBb84, kLossyBb84,
                  OutcomeHandling::Explicit);
  SymbolicForm obj;
  obj.add(1.0, Monomial{});
  p.set_objective(obj);
  return p;
}

}  // namespace

TEST(SolveSdpa, LargestEigenvalue) {
  // min t  s.t.  t I - A >= 0  has value lambda_max(A).
  std::mt19937 rng(3);
  std::normal_distribution<double> g;
  const int n = 6;
  Eigen::MatrixXd a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = g(rng);
  a = (0.5 * (a + a.transpose())).eval();
  SdpaProblem sp;
  sp.num_vars = 1;
  sp.psd_dim = n;
  sp.c = {1.0};
  sp.F.resize(2);
  for (int i = 0; i < n; ++i) {
    sp.F[1].push_back({0, i, i, 1.0});
    for (int j = i; j < n; ++j) sp.F[0].push_back({0, i, j, a(i, j)});
  }
  const auto sol = solve_sdpa(sp);
  ASSERT_EQ(sol.status, SolveStatus::Optimal);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a);
  EXPECT_NEAR(sol.primal_objective, es.eigenvalues().maxCoeff(), 1e-7);
}

TEST(SolveSdpa, MixedPsdAndLinearBlocks) {
  // min x1 + x2  s.t. [[x1, 1], [1, x2]] >= 0, x1 >= 1, x2 >= 2.
  SdpaProblem sp;
  sp.num_vars = 2;
  sp.psd_dim = 2;
  sp.lp_dim = 2;
  sp.c = {1.0, 1.0};
  sp.F.resize(3);
  sp.F[0] = {{0, 0, 1, -1.0}, {1, 0, 0, 1.0}, {1, 1, 1, 2.0}};
  sp.F[1] = {{0, 0, 0, 1.0}, {1, 0, 0, 1.0}};
  sp.F[2] = {{0, 1, 1, 1.0}, {1, 1, 1, 1.0}};
  const auto sol = solve_sdpa(sp);
  ASSERT_EQ(sol.status, SolveStatus::Optimal);
  EXPECT_NEAR(sol.primal_objective, 3.0, 1e-7);
  EXPECT_NEAR(sol.x[0], 1.0, 1e-6);
  EXPECT_NEAR(sol.x[1], 2.0, 1e-6);
}

TEST(Solve, TrivialObjective) {
  const auto r = solve(trivial_problem());
  EXPECT_EQ(r.status, SolveStatus::Optimal);
  EXPECT_NEAR(r.value, 1.0, 1e-9);
}

TEST(Solve, ContradictoryEqualitiesAreInfeasible) {
  auto p = trivial_problem();
  SymbolicConstraint c;
  c.lhs.add(1.0, Monomial{});
  c.sense = Sense::Equal;
  p.add_constraint(c);  // <1> = 0 against the pinned <1> = 1
  EXPECT_EQ(solve(p).status, SolveStatus::Infeasible);
}

TEST(Solve, Bb84StrictLevel1ZeroError) {
  GameSpec spec{bb84_family(), Variant::QpvStrict, 0.0};
  const auto r = solve(assemble(spec, Level::L1));
  ASSERT_TRUE(converged(r.status));
  EXPECT_NEAR(r.value, 0.5, 1e-4);
}

TEST(Solve, Bb84Level2Crossing) {
  GameSpec spec{bb84_family(), Variant::QpvStrict, 0.1464};
  const auto r = solve(assemble(spec, Level::L2));
  ASSERT_TRUE(converged(r.status));
  EXPECT_NEAR(r.value, 1.0, 1e-3);
}

TEST(Solve, GramMatrixOfSolutionIsPsd) {
  for (double p_err : {0.0, 0.05, 0.1}) {
    GameSpec spec{bb84_family(), Variant::QpvRelaxed, p_err, 0.005};
    const auto problem = assemble(spec, Level::L2);
    const auto r = solve(problem);
    ASSERT_TRUE(converged(r.status));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(problem.gram_matrix(r.moments));
    EXPECT_GE(es.eigenvalues().minCoeff(), -1e-6) << p_err;
    EXPECT_NEAR(problem.objective().evaluate(r.moments), r.value, 1e-6);
  }
}

TEST(Solve, Deterministic) {
  GameSpec spec{discretize_bases(2, 2), Variant::QpvStrict, 0.05};
  const auto problem = assemble(spec, Level::L2);
  const auto a = solve(problem);
  const auto b = solve(problem);
  EXPECT_NEAR(a.value, b.value, 1e-7);
}

TEST(Solve, FirstOrderMoments) {
  GameSpec spec{bb84_family(), Variant::QpvStrict, 0.0};
  const auto problem = assemble(spec, Level::L1);
  const auto r = solve(problem);
  const auto m = first_order_moments(problem, r);
  ASSERT_TRUE(m.count("1"));
  EXPECT_NEAR(m.at("1"), 1.0, 1e-9);
  for (const auto& [word, value] : m) EXPECT_TRUE(std::isfinite(value)) << word;
}

TEST(CertifiedUpper, Padding) {
  SolveReport r;
  r.value = 0.5;
  r.status = SolveStatus::Optimal;
  EXPECT_DOUBLE_EQ(certified_upper(r), 0.5 + 1e-6);
  EXPECT_DOUBLE_EQ(certified_upper(r, 0.0), 0.5);
  EXPECT_LT(certified_upper(r, 1e-6), certified_upper(r, 1e-5));
  EXPECT_THROW(certified_upper(r, -1.0), ParameterError);
}

TEST(CertifiedUpper, NearOptimalNeedsPadCoveringResiduals) {
  SolveReport r;
  r.value = 0.5;
  r.status = SolveStatus::NearOptimal;
  r.primal_residual = 1e-5;
  EXPECT_THROW(certified_upper(r, 1e-6), ValidationError);
  EXPECT_NEAR(certified_upper(r, 1e-4), 0.5001, 1e-12);
}

TEST(CertifiedUpper, RefusesFailedSolves) {
  SolveReport r;
  r.value = 0.5;
  for (auto s : {SolveStatus::Infeasible, SolveStatus::Unbounded, SolveStatus::NumericalLimit}) {
    r.status = s;
    EXPECT_THROW(certified_upper(r), ValidationError);
  }
}

TEST(Sdpa, RoundTrip) {
  GameSpec spec{bb84_family(), Variant::QpvRelaxed, 0.05, 0.005};
  const auto sp = to_sdpa(assemble(spec, Level::L1));
  std::stringstream ss;
  write_sdpa(sp, ss);
  const auto back = read_sdpa(ss);
  EXPECT_EQ(back.num_vars, sp.num_vars);
  EXPECT_EQ(back.psd_dim, sp.psd_dim);
  EXPECT_EQ(back.lp_dim, sp.lp_dim);
  ASSERT_EQ(back.c.size(), sp.c.size());
  for (std::size_t i = 0; i < sp.c.size(); ++i) EXPECT_EQ(back.c[i], sp.c[i]);
  ASSERT_EQ(back.F.size(), sp.F.size());
  for (std::size_t k = 0; k < sp.F.size(); ++k) {
    ASSERT_EQ(back.F[k].size(), sp.F[k].size()) << k;
    for (std::size_t e = 0; e < sp.F[k].size(); ++e) {
      EXPECT_EQ(back.F[k][e].block, sp.F[k][e].block);
      EXPECT_EQ(back.F[k][e].row, sp.F[k][e].row);
      EXPECT_EQ(back.F[k][e].col, sp.F[k][e].col);
      EXPECT_EQ(back.F[k][e].value, sp.F[k][e].value);
    }
  }
}

TEST(Sdpa, ExportedProblemSolvesToSameValue) {
  GameSpec spec{bb84_family(), Variant::QpvStrict, 0.05};
  const auto problem = assemble(spec, Level::L1);
  const auto direct = solve(problem);
  const auto sol = solve_sdpa(to_sdpa(problem));
  ASSERT_TRUE(converged(sol.status));
  EXPECT_NEAR(-sol.primal_objective, direct.value, 1e-5);
}

TEST(Sdpa, ReadRejectsGarbage) {
  std::stringstream ss("not a problem");
  EXPECT_THROW(read_sdpa(ss), ValidationError);
}

TEST(Solve, SizeGuard) {
  GameSpec spec{discretize_bases(2, 2), Variant::QpvRelaxed, 0.05, 0.005};
  SolverSettings s;
  s.max_vars = 10;
  EXPECT_THROW(solve(assemble(spec, Level::L1AB), s), ParameterError);
}
