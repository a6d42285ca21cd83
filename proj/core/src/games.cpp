#include "lossmoe/games.hpp"

#include <cmath>

#include "lossmoe/error.hpp"

namespace lossmoe {

namespace {

constexpr std::uint8_t kAnswers[] = {0, 1};
constexpr std::uint8_t kAllOutcomes[] = {0, 1, kNoAnswer};

std::string pair_label(std::string_view kind, std::size_t x, std::size_t xp) {
  return std::string(kind) + "(" + std::to_string(x) + "," + std::to_string(xp) + ")";
}

/// sum_a <A_a^x B_a^x>: the probability of answering on input x.
void add_answer_mass(SymbolicForm& form, std::size_t x, double scale) {
  for (auto a : kAnswers) form.add(scale, symbol(Party::A, x, a) * symbol(Party::B, x, a));
}

MomentProblem assemble_with(const GameSpec& spec, Level level, bool explicit_outcomes) {
  spec.validate();
  PartyAlphabet alpha = game_alphabet(spec);
  PartyAlphabet basis_alpha = alpha;
  if (!explicit_outcomes) basis_alpha.outcomes = {0, 1};
  MomentProblem problem(build_basis(level, basis_alpha, basis_alpha), alpha, alpha,
                        explicit_outcomes ? OutcomeHandling::Explicit
                                          : OutcomeHandling::Eliminated);
  problem.set_objective(objective_p_ans(spec));
  if (spec.variant != Variant::Qkd) {
    for (const auto& c : abort_constraints(spec)) problem.add_constraint(c);
  }
  for (const auto& c : perr_constraints_v1(spec)) problem.add_constraint(c);
  if (spec.prop2_enabled()) {
    for (const auto& c : perr_constraints_v2(spec)) problem.add_constraint(c);
  }
  return problem;
}

}  // namespace

Variant parse_variant(std::string_view text) {
  if (text == "strict") return Variant::QpvStrict;
  if (text == "relaxed") return Variant::QpvRelaxed;
  if (text == "qkd") return Variant::Qkd;
  throw ParameterError("unknown variant '" + std::string(text) +
                       "' (expected strict, relaxed or qkd)");
}

std::string to_string(Variant variant) {
  switch (variant) {
    case Variant::QpvStrict: return "strict";
    case Variant::QpvRelaxed: return "relaxed";
    case Variant::Qkd: return "qkd";
  }
  return "unknown";
}

bool GameSpec::prop2_enabled() const {
  if (variant == Variant::Qkd) return false;
  return use_prop2.value_or(inputs() >= 3);
}

void GameSpec::validate() const {
  if (!(p_err >= 0.0 && p_err <= 1.0)) {
    throw ParameterError("p_err must lie in [0, 1]");
  }
  if (!(xi >= 0.0) || !std::isfinite(xi)) throw ParameterError("xi must be >= 0");
  if (variant == Variant::Qkd && inputs() != 2) {
    throw ParameterError("the QKD game is defined for two bases only");
  }
  if (variant == Variant::Qkd && use_prop2.value_or(false)) {
    throw ParameterError("the second error inequality applies to QPV games only");
  }
}

MeasurementFamily bb84_family() { return discretize_bases(2, 1); }

PartyAlphabet game_alphabet(const GameSpec& spec) {
  return PartyAlphabet{static_cast<std::uint16_t>(spec.inputs()), {0, 1, kNoAnswer}};
}

Monomial symbol(Party party, std::size_t input, std::uint8_t outcome) {
  return Monomial{{party, static_cast<std::uint16_t>(input), outcome}};
}

SymbolicForm objective_p_ans(const GameSpec& spec) {
  SymbolicForm form;
  const std::size_t m = spec.inputs();
  for (std::size_t x = 0; x < m; ++x) add_answer_mass(form, x, 1.0 / double(m));
  return form;
}

std::vector<SymbolicConstraint> abort_constraints(const GameSpec& spec) {
  std::vector<SymbolicConstraint> out;
  if (spec.variant == Variant::Qkd) return out;
  const bool strict = spec.variant == Variant::QpvStrict;
  for (std::size_t x = 0; x < spec.inputs(); ++x) {
    for (auto a : kAllOutcomes) {
      for (auto b : kAllOutcomes) {
        if (a == b) continue;
        SymbolicConstraint c;
        c.lhs.add(1.0, symbol(Party::A, x, a) * symbol(Party::B, x, b));
        c.sense = strict ? Sense::Equal : Sense::LessEqual;
        c.rhs.constant = strict ? 0.0 : spec.xi;
        c.label = "abort(" + std::to_string(x) + ")";
        out.push_back(std::move(c));
      }
    }
  }
  return out;
}

std::vector<SymbolicConstraint> perr_constraints_v1(const GameSpec& spec) {
  std::vector<SymbolicConstraint> out;
  const std::size_t m = spec.inputs();
  if (spec.variant == Variant::Qkd) {
    // The printed inequality is not symmetric in (x, x'): one row per ordered pair.
    for (std::size_t x = 0; x < m; ++x) {
      for (std::size_t xp = 0; xp < m; ++xp) {
        if (x == xp) continue;
        SymbolicConstraint c;
        for (auto e : kAnswers)
          for (auto b : kAnswers) {
            c.lhs.add(coeff_prop1(e, x, b, xp, spec.family),
                      symbol(Party::A, x, e) * symbol(Party::B, xp, b));
            c.rhs.add(spec.p_err, symbol(Party::A, xp, e) * symbol(Party::B, xp, b));
          }
        c.label = pair_label("perr_qkd", x, xp);
        out.push_back(std::move(c));
      }
    }
    return out;
  }
  for (std::size_t x = 0; x < m; ++x) {
    for (std::size_t xp = x + 1; xp < m; ++xp) {
      SymbolicConstraint c;
      for (auto a : kAnswers)
        for (auto b : kAnswers)
          c.lhs.add(coeff_prop1(a, x, b, xp, spec.family),
                    symbol(Party::A, x, a) * symbol(Party::B, xp, b));
      add_answer_mass(c.rhs, x, spec.p_err);
      add_answer_mass(c.rhs, xp, spec.p_err);
      if (spec.variant == Variant::QpvRelaxed) {
        // p_err * sum_a 4 xi
        c.rhs.constant = spec.p_err * 2.0 * 4.0 * spec.xi;
      }
      c.label = pair_label("perr_v1", x, xp);
      out.push_back(std::move(c));
    }
  }
  return out;
}

std::vector<SymbolicConstraint> perr_constraints_v2(const GameSpec& spec) {
  std::vector<SymbolicConstraint> out;
  if (spec.variant == Variant::Qkd) return out;
  const std::size_t m = spec.inputs();
  for (std::size_t x = 0; x < m; ++x) {
    for (std::size_t xp = x + 1; xp < m; ++xp) {
      SymbolicConstraint c;
      Prop2Coefficients k;
      for (auto a : kAnswers)
        for (auto b : kAnswers) {
          k = coeff_prop2(a, x, b, xp, spec.family);
          c.lhs.add(k.lhs, symbol(Party::A, x, a) * symbol(Party::B, xp, b));
        }
      add_answer_mass(c.rhs, x, spec.p_err * k.rhs_x);
      add_answer_mass(c.rhs, xp, spec.p_err * k.rhs_xp);
      if (spec.variant == Variant::QpvRelaxed) {
        // Same relaxation as v1: each weighted answer mass gains 4 xi.
        c.rhs.constant = spec.p_err * 4.0 * spec.xi * (k.rhs_x + k.rhs_xp);
      }
      c.label = pair_label("perr_v2", x, xp);
      out.push_back(std::move(c));
    }
  }
  return out;
}

MomentProblem assemble(const GameSpec& spec, Level level) {
  return assemble_with(spec, level, false);
}

MomentProblem assemble_explicit(const GameSpec& spec, Level level) {
  return assemble_with(spec, level, true);
}

}  // namespace lossmoe
