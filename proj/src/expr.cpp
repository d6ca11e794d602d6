#include "ks/expr.hpp"

#include <cctype>
#include <cmath>
#include <complex>
#include <string>

namespace ks {
namespace {

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  std::complex<double> run() {
    std::complex<double> value = parse_expr();
    skip_ws();
    if (pos_ != text_.size()) {
      fail("unexpected trailing input");
    }
    return value;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw ParseError("byte " + std::to_string(pos_) + ": " + what);
  }

  void skip_ws() {
    while (pos_ < text_.size() &&
           std::isspace(static_cast<unsigned char>(text_[pos_]))) {
      ++pos_;
    }
  }

  bool eat(char c) {
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  char peek() {
    skip_ws();
    return pos_ < text_.size() ? text_[pos_] : '\0';
  }

  std::complex<double> parse_expr() {
    std::complex<double> value = parse_term();
    for (;;) {
      if (eat('+')) {
        value += parse_term();
      } else if (eat('-')) {
        value -= parse_term();
      } else {
        return value;
      }
    }
  }

  std::complex<double> parse_term() {
    std::complex<double> value = parse_factor();
    for (;;) {
      if (eat('*')) {
        value *= parse_factor();
      } else if (eat('/')) {
        const std::complex<double> d = parse_factor();
        if (std::abs(d) == 0.0) {
          throw EvalError("division by zero");
        }
        value /= d;
      } else {
        return value;
      }
    }
  }

  std::complex<double> parse_factor() {
    if (eat('-')) return -parse_factor();
    if (eat('+')) return parse_factor();
    return parse_primary();
  }

  std::complex<double> parse_primary() {
    const char c = peek();
    if (c == '(') {
      ++pos_;
      std::complex<double> value = parse_expr();
      if (!eat(')')) fail("expected ')'");
      return value;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      return parse_number();
    }
    if (std::isalpha(static_cast<unsigned char>(c))) {
      return parse_name();
    }
    fail(text_.empty() ? "empty expression" : "expected a value");
  }

  std::complex<double> parse_number() {
    const size_t start = pos_;
    while (pos_ < text_.size() &&
           std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
      ++pos_;
    }
    bool saw_digits = pos_ > start;
    if (pos_ < text_.size() && text_[pos_] == '.') {
      ++pos_;
      const size_t frac_start = pos_;
      while (pos_ < text_.size() &&
             std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
        ++pos_;
      }
      saw_digits = saw_digits || pos_ > frac_start;
    }
    if (!saw_digits) fail("malformed number");
    if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
      const size_t mark = pos_;
      ++pos_;
      if (pos_ < text_.size() && (text_[pos_] == '+' || text_[pos_] == '-')) {
        ++pos_;
      }
      const size_t exp_start = pos_;
      while (pos_ < text_.size() &&
             std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
        ++pos_;
      }
      if (pos_ == exp_start) {
        // Not an exponent after all (e.g. "2e" would be malformed, but the
        // grammar has no identifier that starts with a digit, so report it).
        pos_ = mark;
        fail("malformed exponent");
      }
    }
    const std::string token(text_.substr(start, pos_ - start));
    try {
      return std::complex<double>(std::stod(token), 0.0);
    } catch (const std::exception&) {
      pos_ = start;
      fail("number out of range");
    }
  }

  std::complex<double> parse_name() {
    const size_t start = pos_;
    while (pos_ < text_.size() &&
           std::isalpha(static_cast<unsigned char>(text_[pos_]))) {
      ++pos_;
    }
    const std::string_view name = text_.substr(start, pos_ - start);
    if (name == "i") {
      return std::complex<double>(0.0, 1.0);
    }
    if (name == "w") {
      return std::complex<double>(-0.5, std::sqrt(3.0) / 2.0);
    }
    if (name == "sqrt") {
      if (!eat('(')) fail("expected '(' after sqrt");
      const std::complex<double> arg = parse_expr();
      if (!eat(')')) fail("expected ')'");
      if (std::abs(arg.imag()) > 1e-12 * (1.0 + std::abs(arg.real()))) {
        throw EvalError("sqrt of a non-real value");
      }
      if (arg.real() < 0.0) {
        throw EvalError("sqrt of a negative value");
      }
      return std::complex<double>(std::sqrt(arg.real()), 0.0);
    }
    pos_ = start;
    fail("unknown name '" + std::string(name) + "'");
  }

  std::string_view text_;
  size_t pos_ = 0;
};

}  // namespace

ComplexScalar parse_component(std::string_view text) {
  Parser parser(text);
  return ComplexScalar{parser.run(), std::string(text)};
}

}  // namespace ks
