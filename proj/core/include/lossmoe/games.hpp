#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "lossmoe/bloch_bases.hpp"
#include "lossmoe/npa.hpp"

namespace lossmoe {

enum class Variant { QpvStrict, QpvRelaxed, Qkd };

Variant parse_variant(std::string_view text);
std::string to_string(Variant variant);

/// One lossy monogamy-of-entanglement game. In the QKD variant party A plays
/// Eve and party B Bob's device.
struct GameSpec {
  MeasurementFamily family;
  Variant variant = Variant::QpvStrict;
  double p_err = 0.0;
  double xi = 0.0;
  /// Unset selects the default: on for m >= 3 QPV games, off otherwise.
  std::optional<bool> use_prop2;

  std::size_t inputs() const { return family.size(); }
  bool prop2_enabled() const;
  /// Throws ParameterError on p_err outside [0, 1], negative xi, or a QKD
  /// game that is not over two bases.
  void validate() const;
};

/// Computational and Hadamard bases, in the discretization's order
/// (Hadamard first, computational last).
MeasurementFamily bb84_family();

/// {0, 1, no answer} for each of the family's inputs.
PartyAlphabet game_alphabet(const GameSpec& spec);

/// The operator A_a^x (or B_b^x).
Monomial symbol(Party party, std::size_t input, std::uint8_t outcome);

SymbolicForm objective_p_ans(const GameSpec& spec);
std::vector<SymbolicConstraint> abort_constraints(const GameSpec& spec);
std::vector<SymbolicConstraint> perr_constraints_v1(const GameSpec& spec);
std::vector<SymbolicConstraint> perr_constraints_v2(const GameSpec& spec);

/// NPA relaxation at the given level plus every constraint active for the
/// variant. The basis carries only answer projectors (the no-answer projector
/// is expanded as 1 - A_0 - A_1); the relaxation is the same as with explicit
/// no-answer rows and completeness equalities.
MomentProblem assemble(const GameSpec& spec, Level level);

/// Same relaxation with the no-answer projectors and completeness equalities
/// carried explicitly.
MomentProblem assemble_explicit(const GameSpec& spec, Level level);

}  // namespace lossmoe
