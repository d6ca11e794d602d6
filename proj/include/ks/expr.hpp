#pragma once

#include <string_view>

#include "ks/errors.hpp"
#include "ks/ray.hpp"

namespace ks {

// Parses one ray-component expression into a complex value.
//
// Grammar (precedence low to high):
//   expr    := term (('+' | '-') term)*
//   term    := factor (('*' | '/') factor)*
//   factor  := ('-' | '+') factor | primary
//   primary := number | 'i' | 'w' | 'sqrt' '(' expr ')' | '(' expr ')'
//   number  := digits ['.' digits] [('e'|'E') ['+'|'-'] digits]
//
// 'i' is the imaginary unit and 'w' the principal cube root of unity
// exp(2*pi*i/3).  'sqrt' requires a non-negative real argument.  Decimal
// and exponent forms are read as exact digit strings scaled by powers of
// ten, so a flexed catalog written with decimal literals round-trips.
// Whitespace is allowed anywhere between tokens.
//
// Throws ParseError (with the byte offset of the offending character) for
// malformed input and EvalError for division by zero or sqrt of a value
// that is negative or has a nonzero imaginary part.
ComplexScalar parse_component(std::string_view text);

}  // namespace ks
