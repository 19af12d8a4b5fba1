#pragma once

#include "fioindex/symbol.hpp"

#include <random>
#include <stdexcept>
#include <string>

namespace fioindex {

/// Parse failure with the byte offset of the offending token.
class ExpressionError : public std::runtime_error {
 public:
  ExpressionError(const std::string& what, std::size_t pos)
      : std::runtime_error(what + " at offset " + std::to_string(pos)), pos_(pos) {}
  std::size_t position() const { return pos_; }

 private:
  std::size_t pos_;
};

/// Builds a symbol from the expression grammar (see README):
///
///   expr    := term (('+' | '-') term)*
///   term    := unary (('*' | '/') unary)*
///   unary   := ('+' | '-') unary | power
///   power   := primary ('^' unary)?
///   primary := number | 'x' | 'xi' | 'pi' | 'i' | func '(' expr ')' | '(' expr ')'
///   func    := sin | cos | exp | log | sqrt | atan | arctan | abs | chi
///
/// The result carries exact jets. `order` is the declared symbol order.
Symbol parse_symbol(const std::string& text, double order = 0, bool vanishes_near_zero_section = false);

/// Random order-zero symbol, band-limited in x (|Fourier mode| <= bandwidth)
/// and analytic in a strip of half-width >= 2 around real xi, written in the
/// expression grammar. The hbar-coefficients of star products then grow like
/// (bandwidth / 2)^n, which the default ladder resolves for bandwidth 1.
std::string random_symbol_expression(std::mt19937_64& rng, int bandwidth = 1, int terms = 3);

}  // namespace fioindex
