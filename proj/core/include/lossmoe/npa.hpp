#pragma once

#include <Eigen/Dense>

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace lossmoe {

enum class Party : std::uint8_t { A = 0, B = 1 };

/// Outcome index of the "no photon" answer. Answers 0 and 1 are the bit values.
inline constexpr std::uint8_t kNoAnswer = 2;

/// A projector A_a^x or B_b^y of one attacker.
struct OperatorSymbol {
  Party party = Party::A;
  std::uint16_t input = 0;
  std::uint8_t outcome = 0;

  auto operator<=>(const OperatorSymbol&) const = default;
};

std::string to_string(const OperatorSymbol& symbol);

/// A word in projector symbols. The empty word is the identity; a separate
/// flag marks the zero operator.
class Monomial {
 public:
  Monomial() = default;
  explicit Monomial(std::vector<OperatorSymbol> word);
  Monomial(std::initializer_list<OperatorSymbol> word);

  static Monomial zero();

  bool is_zero() const { return zero_; }
  bool is_identity() const { return !zero_ && word_.empty(); }
  std::size_t length() const { return word_.size(); }
  const std::vector<OperatorSymbol>& word() const { return word_; }

  /// Formal adjoint: every generator is self-adjoint, so this reverses the word.
  Monomial adjoint() const;
  /// Concatenation without simplification.
  Monomial operator*(const Monomial& rhs) const;

  bool contains_no_answer() const;
  std::string to_string() const;

  auto operator<=>(const Monomial&) const = default;

 private:
  std::vector<OperatorSymbol> word_;
  bool zero_ = false;
};

/// Normal form under the projector relations: Bob symbols commute to the
/// right of Alice symbols (stable order within a party), adjacent equal
/// symbols merge, and adjacent symbols with equal party and input but
/// different outcome annihilate.
Monomial canonicalize(const Monomial& word);

/// Key identifying <w> in a real moment matrix: the smaller of the canonical
/// word and its canonical adjoint.
Monomial moment_key(const Monomial& word);

enum class Level { L1, L1AB, L2 };

Level parse_level(std::string_view text);
std::string to_string(Level level);

/// Inputs and outcome labels available to one party.
struct PartyAlphabet {
  std::uint16_t inputs = 0;
  std::vector<std::uint8_t> outcomes;
};

std::vector<OperatorSymbol> alphabet_symbols(Party party,
                                             const PartyAlphabet& alphabet);

/// Monomial list for the requested hierarchy level. L1 is {1} plus single
/// symbols, L1+AB adds Alice-Bob products and L2 adds every canonical length-2
/// word. The result is duplicate free and starts with the identity.
std::vector<Monomial> build_basis(Level level, const PartyAlphabet& alice,
                                  const PartyAlphabet& bob);

/// Sparse affine form sum_i c_i y_i + constant over moment variable ids.
struct LinearForm {
  std::vector<std::pair<int, double>> terms;  // sorted by id, no zeros
  double constant = 0.0;

  void add(int var, double coefficient);
  void add(const LinearForm& other, double scale = 1.0);
  double evaluate(std::span<const double> values) const;
  bool is_constant() const { return terms.empty(); }
};

enum class Sense { Equal, LessEqual };

/// form (== | <=) 0.
struct LinearConstraint {
  LinearForm form;
  Sense sense = Sense::LessEqual;
  std::string label;
};

/// A real-weighted sum of words, compiled against a moment problem later.
struct SymbolicForm {
  std::vector<std::pair<double, Monomial>> terms;
  double constant = 0.0;

  SymbolicForm& add(double coefficient, Monomial word);
};

/// lhs (== | <=) rhs.
struct SymbolicConstraint {
  SymbolicForm lhs;
  Sense sense = Sense::LessEqual;
  SymbolicForm rhs;
  std::string label;
};

/// How the "no photon" outcome enters the moment matrix.
enum class OutcomeHandling {
  /// No-answer projectors appear in the basis and completeness equalities are
  /// emitted. The moment matrix is then singular by construction.
  Explicit,
  /// The basis holds only answer projectors; A_noans^x is expanded as
  /// 1 - A_0^x - A_1^x wherever it occurs.
  Eliminated,
};

/// Moment-matrix relaxation: one scalar variable per distinct moment <S^T T>,
/// a PSD Gram matrix over the basis, and linear constraints over the moments.
/// Variable 0 is <1> and is pinned to 1.
class MomentProblem {
 public:
  MomentProblem(std::vector<Monomial> basis, PartyAlphabet alice,
                PartyAlphabet bob, OutcomeHandling handling,
                bool completeness = true);

  std::size_t psd_dimension() const { return basis_.size(); }
  std::size_t num_variables() const { return variables_.size(); }
  const std::vector<Monomial>& basis() const { return basis_; }
  const Monomial& variable(int id) const { return variables_.at(id); }
  OutcomeHandling outcome_handling() const { return handling_; }
  const PartyAlphabet& alphabet(Party party) const {
    return party == Party::A ? alice_ : bob_;
  }

  /// Variable id of Gram entry (i, j); -1 for the constant 0.
  int gram_entry(std::size_t i, std::size_t j) const {
    return gram_[i * basis_.size() + j];
  }

  /// Variable id of a moment key, if it is part of the relaxation.
  std::optional<int> find_variable(const Monomial& key) const;

  /// <word> as a linear form over the variables. Throws ValidationError when
  /// the moment is not representable at this level.
  LinearForm moment(const Monomial& word) const;
  std::optional<LinearForm> try_moment(const Monomial& word) const;
  LinearForm compile(const SymbolicForm& form) const;

  void set_objective(const SymbolicForm& objective);
  void add_constraint(const SymbolicConstraint& constraint);
  void add_constraint(LinearConstraint constraint);

  /// The objective is maximized.
  const LinearForm& objective() const { return objective_; }
  const std::vector<LinearConstraint>& constraints() const {
    return constraints_;
  }

  /// Dense Gram matrix for given variable values.
  Eigen::MatrixXd gram_matrix(std::span<const double> values) const;

 private:
  void add_completeness_rows();

  std::vector<Monomial> basis_;
  PartyAlphabet alice_;
  PartyAlphabet bob_;
  OutcomeHandling handling_;
  std::vector<Monomial> variables_;
  std::map<Monomial, int> index_;
  std::vector<int> gram_;
  LinearForm objective_;
  std::vector<LinearConstraint> constraints_;
};

/// Builds the problem for a basis from build_basis. The outcome handling is
/// inferred: any no-answer symbol in the basis selects Explicit.
MomentProblem build_moment_problem(std::vector<Monomial> basis,
                                   const PartyAlphabet& alice,
                                   const PartyAlphabet& bob,
                                   bool completeness = true);

}  // namespace lossmoe
