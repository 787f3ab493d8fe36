#pragma once

#include <gmpxx.h>

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <string_view>

namespace phl {

/// Exact arbitrary-precision rational. Always kept in canonical form.
using Rational = mpq_class;

inline Rational make_rational(std::int64_t num, std::int64_t den = 1) {
  Rational r(mpz_class(static_cast<long>(num)), mpz_class(static_cast<long>(den)));
  r.canonicalize();
  return r;
}

/// "num/den" with the denominator always present ("2/1", "-1/3").
std::string to_fraction_string(const Rational& r);

/// Shortest exact spelling: "2", "-1/3".
std::string to_short_string(const Rational& r);

/// Accepts "n", "n/d" and finite decimals ("0.25", "-1.5"). Throws
/// std::invalid_argument on malformed input or a zero denominator.
Rational parse_rational(std::string_view text);

/// Some(decimal) when the expansion terminates ("0.5", "2.0"), empty otherwise.
std::string terminating_decimal(const Rational& r);

inline double to_double(const Rational& r) { return r.get_d(); }

inline std::size_t hash_rational(const Rational& r) {
  // mpz hashing via the canonical string is slow; limbs are enough.
  auto limbs = [](const mpz_class& z) {
    std::size_t h = static_cast<std::size_t>(mpz_sgn(z.get_mpz_t()) + 1);
    const std::size_t n = mpz_size(z.get_mpz_t());
    for (std::size_t i = 0; i < n; ++i) {
      h = h * 0x9E3779B97F4A7C15ULL + mpz_getlimbn(z.get_mpz_t(), static_cast<mp_size_t>(i));
    }
    return h;
  };
  return limbs(r.get_num()) * 31 + limbs(r.get_den());
}

inline std::size_t hash_combine(std::size_t seed, std::size_t v) {
  return seed ^ (v + 0x9E3779B97F4A7C15ULL + (seed << 6) + (seed >> 2));
}

}  // namespace phl
