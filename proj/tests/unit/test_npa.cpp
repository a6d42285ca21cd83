#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>

#include <random>
#include <set>

#include "../common/dense_oracle.hpp"
#include "lossmoe/error.hpp"
#include "lossmoe/npa.hpp"

using namespace lossmoe;

namespace {

OperatorSymbol A(int x, int a) {
  return {Party::A, static_cast<std::uint16_t>(x), static_cast<std::uint8_t>(a)};
}
OperatorSymbol B(int x, int b) {
  return {Party::B, static_cast<std::uint16_t>(x), static_cast<std::uint8_t>(b)};
}

const PartyAlphabet kLossyBb84{2, {0, 1, kNoAnswer}};

}  // namespace

TEST(Canonicalize, Idempotence) {
  EXPECT_EQ(canonicalize(Monomial{A(0, 0), A(0, 0)}), (Monomial{A(0, 0)}));
}

TEST(Canonicalize, Orthogonality) {
  EXPECT_TRUE(canonicalize(Monomial{A(0, 0), A(0, 1)}).is_zero());
  EXPECT_TRUE(canonicalize(Monomial{B(1, 2), B(1, 0)}).is_zero());
}

TEST(Canonicalize, Commutation) {
  EXPECT_EQ(canonicalize(Monomial{B(0, 1), A(1, 0)}), (Monomial{A(1, 0), B(0, 1)}));
  // Alice symbols keep their order.
  EXPECT_EQ(canonicalize(Monomial{A(1, 0), B(0, 0), A(0, 1)}),
            (Monomial{A(1, 0), A(0, 1), B(0, 0)}));
}

TEST(Canonicalize, ZeroAfterCommuting) {
  EXPECT_TRUE(canonicalize(Monomial{A(0, 0), B(1, 1), A(0, 1)}).is_zero());
  EXPECT_EQ(canonicalize(Monomial{A(0, 0), B(1, 1), A(0, 0)}), (Monomial{A(0, 0), B(1, 1)}));
}

TEST(Canonicalize, IdempotentOnRandomWords) {
  std::mt19937 rng(7);
  for (int i = 0; i < 2000; ++i) {
    const Monomial w = oracle::random_word(6, 3, rng);
    const Monomial c = canonicalize(w);
    EXPECT_EQ(canonicalize(c), c) << w.to_string();
    if (!c.is_zero()) {
      bool seen_b = false;
      for (const auto& s : c.word()) {
        if (s.party == Party::B) seen_b = true;
        EXPECT_FALSE(seen_b && s.party == Party::A) << c.to_string();
      }
    }
  }
}

TEST(Canonicalize, MatchesDenseOperators) {
  std::mt19937 rng(11);
  const auto model = oracle::random_model(2, 4, 2, rng);
  for (int i = 0; i < 300; ++i) {
    const Monomial w = oracle::random_word(6, 2, rng);
    const Monomial c = canonicalize(w);
    const Eigen::MatrixXcd mw = model.evaluate(w);
    EXPECT_LT((mw - model.evaluate(c)).cwiseAbs().maxCoeff(), 1e-10) << w.to_string();
  }
}

TEST(MomentKey, AdjointPairsShareKey) {
  const Monomial w{A(0, 0), A(1, 1), B(0, 1)};
  EXPECT_EQ(moment_key(w), moment_key(w.adjoint()));
}

TEST(BuildBasis, Counts) {
  EXPECT_EQ(build_basis(Level::L1, kLossyBb84, kLossyBb84).size(), 13u);
  EXPECT_EQ(build_basis(Level::L1AB, kLossyBb84, kLossyBb84).size(), 49u);

  // Oracle: count surviving length-2 words per party directly from the
  // projector rules: equal symbols collapse, same input different outcome
  // vanishes, everything else is a new word.
  const auto syms = alphabet_symbols(Party::A, kLossyBb84);
  int same_party = 0;
  for (const auto& s : syms)
    for (const auto& t : syms)
      if (s.input != t.input) ++same_party;
  const std::size_t expected = 13 + 36 + 2 * same_party;
  EXPECT_EQ(build_basis(Level::L2, kLossyBb84, kLossyBb84).size(), expected);
  EXPECT_EQ(expected, 85u);
}

TEST(BuildBasis, StartsWithIdentityAndIsDuplicateFree) {
  for (Level l : {Level::L1, Level::L1AB, Level::L2}) {
    const auto basis = build_basis(l, kLossyBb84, kLossyBb84);
    ASSERT_FALSE(basis.empty());
    EXPECT_TRUE(basis.front().is_identity());
    std::set<Monomial> seen;
    for (const auto& w : basis) EXPECT_TRUE(seen.insert(canonicalize(w)).second);
  }
}

TEST(Level, ParseAndPrint) {
  EXPECT_EQ(parse_level("1"), Level::L1);
  EXPECT_EQ(parse_level("1+AB"), Level::L1AB);
  EXPECT_EQ(parse_level("2"), Level::L2);
  EXPECT_EQ(to_string(Level::L1AB), "1+AB");
  EXPECT_THROW(parse_level("3"), ParameterError);
}

TEST(MomentProblem, OrthogonalMomentsAreConstantZero) {
  auto p = build_moment_problem(build_basis(Level::L1, kLossyBb84, kLossyBb84), kLossyBb84,
                                kLossyBb84);
  EXPECT_FALSE(p.find_variable(moment_key(Monomial{A(0, 0), A(0, 1)})).has_value());
  const auto& basis = p.basis();
  std::size_t i0 = 0, i1 = 0;
  for (std::size_t i = 0; i < basis.size(); ++i) {
    if (basis[i] == Monomial{A(0, 0)}) i0 = i;
    if (basis[i] == Monomial{A(0, 1)}) i1 = i;
  }
  ASSERT_NE(i0, i1);
  EXPECT_EQ(p.gram_entry(i0, i1), -1);
  EXPECT_EQ(p.gram_entry(i1, i0), -1);
}

TEST(MomentProblem, GramSymmetricAndPinned) {
  auto p = build_moment_problem(build_basis(Level::L2, kLossyBb84, kLossyBb84), kLossyBb84,
                                kLossyBb84);
  EXPECT_EQ(p.gram_entry(0, 0), 0);
  for (std::size_t i = 0; i < p.psd_dimension(); ++i)
    for (std::size_t j = 0; j < p.psd_dimension(); ++j)
      EXPECT_EQ(p.gram_entry(i, j), p.gram_entry(j, i));
  ASSERT_FALSE(p.constraints().empty());
  EXPECT_EQ(p.constraints()[0].label, "normalization");
}

TEST(MomentProblem, CompletenessOfFirstInput) {
  for (Level l : {Level::L1, Level::L1AB, Level::L2}) {
    auto p = build_moment_problem(build_basis(l, kLossyBb84, kLossyBb84), kLossyBb84,
                                  kLossyBb84);
    LinearForm expected;
    for (int a = 0; a < 3; ++a) expected.add(p.moment(Monomial{A(0, a)}));
    expected.add(0, -1.0);
    bool found = false;
    for (const auto& c : p.constraints()) {
      if (c.sense != Sense::Equal || c.label != "completeness") continue;
      found = found || (c.form.terms == expected.terms && c.form.constant == expected.constant);
    }
    EXPECT_TRUE(found) << to_string(l);
  }
}

TEST(MomentProblem, EliminatedMatchesDenseModel) {
  // Moments of a real quantum model satisfy every structural constraint in
  // both outcome treatments, and give a PSD Gram matrix.
  std::mt19937 rng(5);
  const auto model = oracle::random_model(2, 2, 2, rng);
  Eigen::VectorXcd psi(4);
  std::normal_distribution<double> g;
  for (int i = 0; i < 4; ++i) psi(i) = {g(rng), g(rng)};
  psi.normalize();
  const PartyAlphabet answers{2, {0, 1}};
  for (bool eliminated : {false, true}) {
    auto basis = eliminated ? build_basis(Level::L2, answers, answers)
                            : build_basis(Level::L2, kLossyBb84, kLossyBb84);
    MomentProblem p(std::move(basis), kLossyBb84, kLossyBb84,
                    eliminated ? OutcomeHandling::Eliminated : OutcomeHandling::Explicit);
    std::vector<double> y(p.num_variables());
    for (std::size_t v = 0; v < y.size(); ++v) {
      y[v] = psi.dot(model.evaluate(p.variable(static_cast<int>(v))) * psi).real();
    }
    for (const auto& c : p.constraints()) {
      const double val = c.form.evaluate(y);
      if (c.sense == Sense::Equal) {
        EXPECT_NEAR(val, 0.0, 1e-10) << c.label;
      } else {
        EXPECT_LE(val, 1e-10) << c.label;
      }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(p.gram_matrix(y));
    EXPECT_GE(es.eigenvalues().minCoeff(), -1e-10);
  }
}
