#include "lossmoe/npa.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "lossmoe/error.hpp"

namespace lossmoe {

namespace {

constexpr double kDropTol = 1e-15;

bool same_measurement(const OperatorSymbol& a, const OperatorSymbol& b) {
  return a.party == b.party && a.input == b.input;
}

// Reduces one party's subword with a stack: equal neighbours merge,
// orthogonal neighbours kill the word.
bool reduce_party(const std::vector<OperatorSymbol>& in,
                  std::vector<OperatorSymbol>& out) {
  for (const OperatorSymbol& s : in) {
    if (!out.empty() && same_measurement(out.back(), s)) {
      if (out.back().outcome == s.outcome) continue;
      return false;
    }
    out.push_back(s);
  }
  return true;
}

}  // namespace

std::string to_string(const OperatorSymbol& symbol) {
  std::ostringstream os;
  os << (symbol.party == Party::A ? 'A' : 'B') << '[' << symbol.input << ':';
  if (symbol.outcome == kNoAnswer) {
    os << "none";
  } else {
    os << static_cast<int>(symbol.outcome);
  }
  os << ']';
  return os.str();
}

Monomial::Monomial(std::vector<OperatorSymbol> word) : word_(std::move(word)) {}

Monomial::Monomial(std::initializer_list<OperatorSymbol> word) : word_(word) {}

Monomial Monomial::zero() {
  Monomial m;
  m.zero_ = true;
  return m;
}

Monomial Monomial::adjoint() const {
  if (zero_) return zero();
  return Monomial(std::vector<OperatorSymbol>(word_.rbegin(), word_.rend()));
}

Monomial Monomial::operator*(const Monomial& rhs) const {
  if (zero_ || rhs.zero_) return zero();
  std::vector<OperatorSymbol> w = word_;
  w.insert(w.end(), rhs.word_.begin(), rhs.word_.end());
  return Monomial(std::move(w));
}

bool Monomial::contains_no_answer() const {
  return std::any_of(word_.begin(), word_.end(), [](const OperatorSymbol& s) {
    return s.outcome == kNoAnswer;
  });
}

std::string Monomial::to_string() const {
  if (zero_) return "0";
  if (word_.empty()) return "1";
  std::string out;
  for (const auto& s : word_) out += lossmoe::to_string(s);
  return out;
}

Monomial canonicalize(const Monomial& word) {
  if (word.is_zero()) return Monomial::zero();
  std::vector<OperatorSymbol> alice;
  std::vector<OperatorSymbol> bob;
  for (const auto& s : word.word()) {
    (s.party == Party::A ? alice : bob).push_back(s);
  }
  std::vector<OperatorSymbol> out;
  out.reserve(word.length());
  if (!reduce_party(alice, out)) return Monomial::zero();
  std::vector<OperatorSymbol> bob_out;
  if (!reduce_party(bob, bob_out)) return Monomial::zero();
  out.insert(out.end(), bob_out.begin(), bob_out.end());
  return Monomial(std::move(out));
}

Monomial moment_key(const Monomial& word) {
  Monomial c = canonicalize(word);
  if (c.is_zero()) return c;
  Monomial r = canonicalize(c.adjoint());
  return std::min(c, r);
}

Level parse_level(std::string_view text) {
  if (text == "1" || text == "L1") return Level::L1;
  if (text == "1+AB" || text == "L1+AB" || text == "1AB") return Level::L1AB;
  if (text == "2" || text == "L2") return Level::L2;
  throw ParameterError("unknown hierarchy level '" + std::string(text) +
                       "' (expected 1, 1+AB or 2)");
}

std::string to_string(Level level) {
  switch (level) {
    case Level::L1:
      return "1";
    case Level::L1AB:
      return "1+AB";
    case Level::L2:
      return "2";
  }
  return "?";
}

std::vector<OperatorSymbol> alphabet_symbols(Party party,
                                             const PartyAlphabet& alphabet) {
  std::vector<OperatorSymbol> out;
  for (std::uint16_t x = 0; x < alphabet.inputs; ++x)
    for (std::uint8_t o : alphabet.outcomes) out.push_back({party, x, o});
  return out;
}

std::vector<Monomial> build_basis(Level level, const PartyAlphabet& alice,
                                  const PartyAlphabet& bob) {
  const auto sa = alphabet_symbols(Party::A, alice);
  const auto sb = alphabet_symbols(Party::B, bob);

  std::vector<Monomial> basis;
  std::set<Monomial> seen;
  auto push = [&](const Monomial& w) {
    Monomial c = canonicalize(w);
    if (c.is_zero()) return;
    if (seen.insert(c).second) basis.push_back(std::move(c));
  };

  push(Monomial{});
  for (const auto& s : sa) push(Monomial{s});
  for (const auto& s : sb) push(Monomial{s});
  if (level == Level::L1) return basis;

  for (const auto& a : sa)
    for (const auto& b : sb) push(Monomial{a, b});
  if (level == Level::L1AB) return basis;

  auto push_length2 = [&](const std::vector<OperatorSymbol>& left,
                          const std::vector<OperatorSymbol>& right) {
    for (const auto& l : left)
      for (const auto& r : right) {
        Monomial c = canonicalize(Monomial{l, r});
        if (!c.is_zero() && c.length() == 2) push(c);
      }
  };
  push_length2(sa, sa);
  push_length2(sb, sb);
  return basis;
}

void LinearForm::add(int var, double coefficient) {
  auto it = std::lower_bound(
      terms.begin(), terms.end(), var,
      [](const std::pair<int, double>& t, int v) { return t.first < v; });
  if (it != terms.end() && it->first == var) {
    it->second += coefficient;
    if (std::abs(it->second) <= kDropTol) terms.erase(it);
  } else if (std::abs(coefficient) > kDropTol) {
    terms.insert(it, {var, coefficient});
  }
}

void LinearForm::add(const LinearForm& other, double scale) {
  for (const auto& [var, c] : other.terms) add(var, scale * c);
  constant += scale * other.constant;
}

double LinearForm::evaluate(std::span<const double> values) const {
  double total = constant;
  for (const auto& [var, c] : terms) total += c * values[var];
  return total;
}

SymbolicForm& SymbolicForm::add(double coefficient, Monomial word) {
  terms.emplace_back(coefficient, std::move(word));
  return *this;
}

MomentProblem::MomentProblem(std::vector<Monomial> basis, PartyAlphabet alice,
                             PartyAlphabet bob, OutcomeHandling handling,
                             bool completeness)
    : basis_(std::move(basis)),
      alice_(std::move(alice)),
      bob_(std::move(bob)),
      handling_(handling) {
  if (basis_.empty() || !basis_.front().is_identity()) {
    throw ValidationError("moment basis must start with the identity");
  }
  for (const auto& w : basis_) {
    if (w.is_zero() || canonicalize(w) != w) {
      throw ValidationError("moment basis entry " + w.to_string() +
                            " is not canonical");
    }
    if (handling_ == OutcomeHandling::Eliminated && w.contains_no_answer()) {
      throw ValidationError(
          "no-answer symbols are implicit when outcomes are eliminated");
    }
  }
  {
    std::set<Monomial> unique(basis_.begin(), basis_.end());
    if (unique.size() != basis_.size()) {
      throw ValidationError("moment basis contains duplicates");
    }
  }

  const std::size_t n = basis_.size();
  gram_.assign(n * n, -1);
  for (std::size_t i = 0; i < n; ++i) {
    const Monomial left = basis_[i].adjoint();
    for (std::size_t j = i; j < n; ++j) {
      Monomial key = moment_key(left * basis_[j]);
      int id = -1;
      if (!key.is_zero()) {
        auto [it, inserted] =
            index_.emplace(key, static_cast<int>(variables_.size()));
        if (inserted) variables_.push_back(std::move(key));
        id = it->second;
      }
      gram_[i * n + j] = id;
      gram_[j * n + i] = id;
    }
  }

  LinearConstraint pin;
  pin.form.add(0, 1.0);
  pin.form.constant = -1.0;
  pin.sense = Sense::Equal;
  pin.label = "normalization";
  constraints_.push_back(std::move(pin));

  if (completeness && handling_ == OutcomeHandling::Explicit) {
    add_completeness_rows();
  }
}

std::optional<int> MomentProblem::find_variable(const Monomial& key) const {
  auto it = index_.find(key);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::optional<LinearForm> MomentProblem::try_moment(const Monomial& word) const {
  Monomial c = canonicalize(word);
  LinearForm out;
  if (c.is_zero()) return out;

  if (handling_ == OutcomeHandling::Eliminated) {
    const auto& w = c.word();
    auto it = std::find_if(w.begin(), w.end(), [](const OperatorSymbol& s) {
      return s.outcome == kNoAnswer;
    });
    if (it != w.end()) {
      const auto pos = static_cast<std::size_t>(it - w.begin());
      auto with = [&](std::optional<std::uint8_t> outcome) {
        std::vector<OperatorSymbol> v;
        v.reserve(w.size());
        for (std::size_t k = 0; k < w.size(); ++k) {
          if (k != pos) {
            v.push_back(w[k]);
          } else if (outcome) {
            v.push_back({w[k].party, w[k].input, *outcome});
          }
        }
        return Monomial(std::move(v));
      };
      auto identity_part = try_moment(with(std::nullopt));
      if (!identity_part) return std::nullopt;
      out.add(*identity_part);
      for (std::uint8_t o : alphabet(it->party).outcomes) {
        if (o == kNoAnswer) continue;
        auto part = try_moment(with(o));
        if (!part) return std::nullopt;
        out.add(*part, -1.0);
      }
      return out;
    }
  }

  Monomial key = moment_key(c);
  auto id = find_variable(key);
  if (!id) return std::nullopt;
  out.add(*id, 1.0);
  return out;
}

LinearForm MomentProblem::moment(const Monomial& word) const {
  auto form = try_moment(word);
  if (!form) {
    throw ValidationError("moment <" + word.to_string() +
                          "> is not representable at this level");
  }
  return *form;
}

LinearForm MomentProblem::compile(const SymbolicForm& form) const {
  LinearForm out;
  out.constant = form.constant;
  for (const auto& [c, word] : form.terms) out.add(moment(word), c);
  return out;
}

void MomentProblem::set_objective(const SymbolicForm& objective) {
  objective_ = compile(objective);
}

void MomentProblem::add_constraint(const SymbolicConstraint& constraint) {
  LinearConstraint row;
  row.form = compile(constraint.lhs);
  row.form.add(compile(constraint.rhs), -1.0);
  row.sense = constraint.sense;
  row.label = constraint.label;
  add_constraint(std::move(row));
}

void MomentProblem::add_constraint(LinearConstraint constraint) {
  constraints_.push_back(std::move(constraint));
}

Eigen::MatrixXd MomentProblem::gram_matrix(std::span<const double> values) const {
  if (values.size() != variables_.size()) {
    throw ValidationError("gram_matrix: wrong number of moment values");
  }
  const std::size_t n = basis_.size();
  Eigen::MatrixXd g(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const int id = gram_[i * n + j];
      g(i, j) = id < 0 ? 0.0 : values[id];
    }
  return g;
}

void MomentProblem::add_completeness_rows() {
  std::set<std::pair<std::vector<std::pair<int, double>>, double>> seen;
  const std::size_t n = basis_.size();
  for (Party party : {Party::A, Party::B}) {
    const PartyAlphabet& alpha = alphabet(party);
    for (std::uint16_t x = 0; x < alpha.inputs; ++x) {
      for (std::size_t i = 0; i < n; ++i) {
        const Monomial left = basis_[i].adjoint();
        for (std::size_t j = i; j < n; ++j) {
          auto base = try_moment(left * basis_[j]);
          if (!base) continue;
          LinearForm row;
          row.add(*base, -1.0);
          bool representable = true;
          for (std::uint8_t o : alpha.outcomes) {
            auto part = try_moment(left * Monomial{{party, x, o}} * basis_[j]);
            if (!part) {
              representable = false;
              break;
            }
            row.add(*part);
          }
          if (!representable || row.terms.empty()) continue;
          if (!seen.emplace(row.terms, row.constant).second) continue;
          LinearConstraint c;
          c.form = std::move(row);
          c.sense = Sense::Equal;
          c.label = "completeness";
          constraints_.push_back(std::move(c));
        }
      }
    }
  }
}

MomentProblem build_moment_problem(std::vector<Monomial> basis,
                                   const PartyAlphabet& alice,
                                   const PartyAlphabet& bob,
                                   bool completeness) {
  const bool explicit_outcomes =
      std::any_of(basis.begin(), basis.end(),
                  [](const Monomial& w) { return w.contains_no_answer(); });
  return MomentProblem(std::move(basis), alice, bob,
                       explicit_outcomes ? OutcomeHandling::Explicit
                                         : OutcomeHandling::Eliminated,
                       completeness);
}

}  // namespace lossmoe
