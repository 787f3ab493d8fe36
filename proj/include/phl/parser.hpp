#pragma once

// Concrete syntax for .phl programs.
//
//   seq    ::= store [';;' seq]
//            | 'let' binder ':=' seq 'in' seq
//            | 'if' seq 'then' seq 'else' seq
//            | 'rec' binder binder+ ':=' seq
//   store  ::= or ['<-' or]
//   or     ::= and {'||' and}
//   and    ::= cmp {'&&' cmp}
//   cmp    ::= cons [('<' | '<=' | '=') cons]
//   cons   ::= add ['::' cons]
//   add    ::= mul {('+' | '-') mul}
//   mul    ::= unary {('*' | '/') unary}
//   unary  ::= '-' unary | '!' unary | app
//   app    ::= (prim atom^arity | atom) {atom}
//   atom   ::= int | decimal | int '/' int 'r' | 'true' | 'false' | '()' | ident
//            | '(' seq ')' | '(' seq ',' seq ')' | '[' [seq {',' seq}] ']'
//            | 'match' seq 'with' 'inl' binder '=>' seq '|' 'inr' binder '=>' seq 'end'
//   prim   ::= tick | fork | ChooseUniform | ChooseWeighted | fst | snd | inl | inr
//            | Free | not | head | tail | length            (arity 1)
//            | AllocN | Xchg | FAA | range | ChooseRange      (arity 2)
//            | CmpXchg                                      (arity 3)
//
// Sugar: `let x := a in b` is (rec _ x := b) a; `a ;; b` is let _ := a in b;
// `rec f x y := e` curries; `ChooseRange a b` is ChooseUniform (range a b);
// a list literal whose elements are all values is a list value, otherwise
// a chain of '::' ending in []. Likewise a closed `rec`, a pair of values and
// inl/inr of a value are parsed as values. A '-' directly applied to a
// numeric literal folds into a negative literal. Comments run from "//" to end of line.

#include <optional>
#include <string>
#include <string_view>

#include "phl/syntax.hpp"

namespace phl {

/// Parses a closed program. Throws ParseError / UnboundVariable.
ExprPtr parse_program(std::string_view text);

std::string pretty(const ExprPtr& e);
std::string pretty(const Value& v);

/// Replaces the bound expression of the outermost `let name := ...` chain.
/// Throws std::invalid_argument if no top-level let binds `name`.
ExprPtr override_let(const ExprPtr& program, const std::string& name, const ExprPtr& replacement);

}  // namespace phl
