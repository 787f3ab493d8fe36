#include "phl/bound_expr.hpp"

#include <cctype>
#include <cmath>
#include <vector>

#include "phl/error.hpp"

namespace phl {
namespace {

class BoundParser {
 public:
  BoundParser(std::string_view text, const std::map<std::string, Rational>& env)
      : text_(text), env_(env) {}

  double run() {
    const double v = expr();
    skip_space();
    if (pos_ != text_.size()) fail("unexpected '" + std::string(1, text_[pos_]) + "'");
    return v;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const { throw ParseError(msg, 1, pos_ + 1); }

  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_space();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!accept(c)) fail(std::string("expected '") + c + "'");
  }

  double expr() {
    double v = term();
    for (;;) {
      if (accept('+')) {
        v += term();
      } else if (accept('-')) {
        v -= term();
      } else {
        return v;
      }
    }
  }

  double term() {
    double v = factor();
    for (;;) {
      if (accept('*')) {
        v *= factor();
      } else if (accept('/')) {
        const double d = factor();
        if (d == 0) throw DomainError("division by zero in bound expression");
        v /= d;
      } else {
        return v;
      }
    }
  }

  double factor() {
    if (accept('-')) return -factor();
    if (accept('(')) {
      const double v = expr();
      expect(')');
      return v;
    }
    skip_space();
    if (pos_ >= text_.size()) fail("unexpected end of bound expression");
    const char c = text_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return identifier();
    fail("unexpected '" + std::string(1, c) + "'");
  }

  double number() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isdigit(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '.')) {
      ++pos_;
    }
    try {
      return to_double(parse_rational(text_.substr(start, pos_ - start)));
    } catch (const std::invalid_argument&) {
      pos_ = start;
      fail("malformed number");
    }
  }

  double identifier() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) {
      ++pos_;
    }
    const std::string name(text_.substr(start, pos_ - start));
    if (!accept('(')) {
      auto it = env_.find(name);
      if (it == env_.end()) throw UnboundVariable(name, 1, start + 1);
      return to_double(it->second);
    }
    std::vector<double> args{expr()};
    while (accept(',')) args.push_back(expr());
    expect(')');
    auto arity = [&](std::size_t n) {
      if (args.size() != n) {
        pos_ = start;
        fail(name + " takes " + std::to_string(n) + " argument(s)");
      }
    };
    if (name == "log") {
      arity(2);
      const double base = args[0];
      const double x = args[1];
      if (base <= 0 || base == 1) throw DomainError("log base must be positive and not 1");
      if (x <= 0) throw DomainError("log of a non-positive value");
      return std::log(x) / std::log(base);
    }
    if (name == "ln") {
      arity(1);
      if (args[0] <= 0) throw DomainError("log of a non-positive value");
      return std::log(args[0]);
    }
    if (name == "floor") {
      arity(1);
      return std::floor(args[0]);
    }
    if (name == "ceil") {
      arity(1);
      return std::ceil(args[0]);
    }
    pos_ = start;
    fail("unknown function '" + name + "'");
  }

  std::string_view text_;
  const std::map<std::string, Rational>& env_;
  std::size_t pos_ = 0;
};

}  // namespace

double eval_bound(std::string_view text, const std::map<std::string, Rational>& env) {
  return BoundParser(text, env).run();
}

}  // namespace phl
