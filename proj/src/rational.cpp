#include "phl/rational.hpp"

#include <algorithm>
#include <cctype>
#include <stdexcept>

namespace phl {

std::string to_fraction_string(const Rational& r) {
  return r.get_num().get_str() + "/" + r.get_den().get_str();
}

std::string to_short_string(const Rational& r) { return r.get_str(); }

namespace {

bool all_digits(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s) {
    if (!std::isdigit(static_cast<unsigned char>(c))) return false;
  }
  return true;
}

}  // namespace

Rational parse_rational(std::string_view text) {
  std::string_view body = text;
  bool negative = false;
  if (!body.empty() && (body.front() == '-' || body.front() == '+')) {
    negative = body.front() == '-';
    body.remove_prefix(1);
  }
  Rational result;
  if (auto slash = body.find('/'); slash != std::string_view::npos) {
    auto num = body.substr(0, slash);
    auto den = body.substr(slash + 1);
    if (!all_digits(num) || !all_digits(den)) {
      throw std::invalid_argument("malformed rational '" + std::string(text) + "'");
    }
    mpz_class d{std::string(den)};
    if (d == 0) throw std::invalid_argument("zero denominator in '" + std::string(text) + "'");
    result = Rational(mpz_class(std::string(num)), d);
  } else if (auto dot = body.find('.'); dot != std::string_view::npos) {
    auto whole = body.substr(0, dot);
    auto frac = body.substr(dot + 1);
    if (!all_digits(whole) || !all_digits(frac)) {
      throw std::invalid_argument("malformed decimal '" + std::string(text) + "'");
    }
    mpz_class scale;
    mpz_ui_pow_ui(scale.get_mpz_t(), 10, frac.size());
    result = Rational(mpz_class(std::string(whole)) * scale + mpz_class(std::string(frac)), scale);
  } else {
    if (!all_digits(body)) {
      throw std::invalid_argument("malformed rational '" + std::string(text) + "'");
    }
    result = Rational(mpz_class(std::string(body)));
  }
  result.canonicalize();
  if (negative) result = -result;
  return result;
}

std::string terminating_decimal(const Rational& r) {
  mpz_class den = r.get_den();
  unsigned twos = 0;
  unsigned fives = 0;
  while (mpz_divisible_ui_p(den.get_mpz_t(), 2)) {
    den /= 2;
    ++twos;
  }
  while (mpz_divisible_ui_p(den.get_mpz_t(), 5)) {
    den /= 5;
    ++fives;
  }
  if (den != 1) return {};
  const unsigned digits = std::max(1u, std::max(twos, fives));
  mpz_class scale;
  mpz_ui_pow_ui(scale.get_mpz_t(), 10, digits);
  mpz_class scaled = abs(r.get_num()) * (scale / r.get_den());
  std::string s = scaled.get_str();
  if (s.size() <= digits) s.insert(0, digits + 1 - s.size(), '0');
  s.insert(s.size() - digits, ".");
  // Trim trailing zeros but keep one digit after the point.
  while (s.back() == '0' && s[s.size() - 2] != '.') s.pop_back();
  return (r < 0 ? "-" : "") + s;
}

}  // namespace phl
