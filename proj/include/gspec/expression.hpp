#pragma once

#include <string_view>

#include "gspec/algebra.hpp"

namespace gspec {

/// Parses a complex-valued expression in the variable t and samples it on the kind's grid.
///
/// Grammar (precedence low to high, ^ is right-associative):
///   expr   := term (('+' | '-') term)*
///   term   := unary (('*' | '/') unary)*
///   unary  := '-' unary | '+' unary | power
///   power  := atom ('^' unary)?
///   atom   := number | 'i' | 't' | 'pi' | call | '(' expr ')'
///   call   := (exp|sin|cos|abs|sqrt|conj|re|im) '(' expr ')' | indicator '(' expr ',' expr ')'
///
/// indicator(a, b) is 1 where a < t < b (real parts) and 0 elsewhere.
/// Matrix kinds accept only t-free expressions, yielding c times the identity.
AlgebraElement parse_expression(std::string_view text, const AlgebraKind& kind);

} // namespace gspec
