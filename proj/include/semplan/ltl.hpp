// Co-safe LTL formulas over named perception predicates.
//
// Grammar (precedence, tightest first: `!`/`F`, `U`, `&`, `|`):
//
//   formula := or
//   or      := and ('|' and)*
//   and     := until ('&' until)*
//   until   := unary ('U' until)?          right associative
//   unary   := '!' unary | 'F' unary | primary
//   primary := 'true' | IDENT | '(' formula ')'
//
// Negation is only allowed directly on an atom. `F phi` is stored as
// `true U phi`.

#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace semplan {

enum class FormulaKind { True, Atom, Not, And, Or, Until };

struct Formula {
  FormulaKind kind = FormulaKind::True;
  std::string atom;               // Atom and Not only
  std::vector<Formula> children;  // And/Or: 2, Until: {lhs, rhs}

  static Formula make_true() { return {}; }
  static Formula make_atom(std::string name);
  static Formula make_not(std::string name);
  static Formula make_and(Formula lhs, Formula rhs);
  static Formula make_or(Formula lhs, Formula rhs);
  static Formula make_until(Formula lhs, Formula rhs);
  static Formula make_eventually(Formula f) { return make_until(make_true(), std::move(f)); }

  bool operator==(const Formula&) const = default;

  /// Fully parenthesized rendering, re-parseable by parse_cosafe_ltl.
  std::string to_string() const;

  /// Sorted set of atom names appearing in the formula.
  std::set<std::string> atoms() const;
};

class LtlParseError : public std::runtime_error {
 public:
  LtlParseError(const std::string& what, int line, int column);
  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_;
  int column_;
};

/// Parses `text`. When `known_atoms` is given, every atom must be a member.
Formula parse_cosafe_ltl(std::string_view text,
                         const std::optional<std::set<std::string>>& known_atoms = std::nullopt);

}  // namespace semplan
