#pragma once

// Floating-point evaluation of symbolic cost bounds such as
// "2*n*(1 + log(4/3, n))".
//
//   expr   ::= term {('+' | '-') term}
//   term   ::= factor {('*' | '/') factor}
//   factor ::= '-' factor | number | ident | ident '(' expr {',' expr} ')' | '(' expr ')'
//
// Functions: log(b, x), ln(x), floor(x), ceil(x).

#include <map>
#include <string>
#include <string_view>

#include "phl/rational.hpp"

namespace phl {

/// Comparisons against an evaluated bound are relaxed by this much in the
/// bound's favor.
inline constexpr double kBoundSlack = 1e-9;

/// Throws ParseError / UnboundVariable on malformed text and DomainError for
/// a logarithm outside its domain or a division by zero.
double eval_bound(std::string_view text, const std::map<std::string, Rational>& env = {});

inline bool within_bound(const Rational& value, double bound) {
  return to_double(value) <= bound + kBoundSlack;
}

}  // namespace phl
