#pragma once

#include <gmpxx.h>

#include <cctype>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace lxm {

using Rational = mpq_class;
using Integer = mpz_class;

// Accepts "-12", "3/4", "-6/8" (reduced on the way in). Rejects decimals,
// exponents, empty strings and zero denominators.
inline Rational parse_rational(std::string_view text) {
  if (text.empty()) throw std::invalid_argument("empty rational");
  auto digits_ok = [](std::string_view s, bool allow_sign) {
    if (s.empty()) return false;
    std::size_t k = 0;
    if (allow_sign && (s[0] == '-' || s[0] == '+')) k = 1;
    if (k == s.size()) return false;
    for (; k < s.size(); ++k)
      if (!std::isdigit(static_cast<unsigned char>(s[k]))) return false;
    return true;
  };
  auto slash = text.find('/');
  std::string num(text.substr(0, slash));
  std::string den = slash == std::string_view::npos ? "1" : std::string(text.substr(slash + 1));
  if (!digits_ok(num, true) || !digits_ok(den, false))
    throw std::invalid_argument("malformed rational: " + std::string(text));
  if (num[0] == '+') num.erase(0, 1);
  Integer d(den);
  if (d == 0) throw std::invalid_argument("zero denominator: " + std::string(text));
  Rational r{Integer(num), d};
  r.canonicalize();
  return r;
}

inline std::string to_string(const Rational& r) {
  if (r.get_den() == 1) return r.get_num().get_str();
  return r.get_num().get_str() + "/" + r.get_den().get_str();
}

inline Rational pow(const Rational& base, unsigned long e) {
  Rational out;
  mpz_pow_ui(out.get_num_mpz_t(), base.get_num_mpz_t(), e);
  mpz_pow_ui(out.get_den_mpz_t(), base.get_den_mpz_t(), e);
  out.canonicalize();
  return out;
}

// Total bits in numerator and denominator; used as a growth telemetry.
inline std::size_t bit_length(const Rational& r) {
  return mpz_sizeinbase(r.get_num_mpz_t(), 2) + mpz_sizeinbase(r.get_den_mpz_t(), 2);
}

inline Rational abs(const Rational& r) { return r < 0 ? Rational(-r) : r; }

using Vec = std::vector<Rational>;

inline Rational sum(const Vec& v) {
  Rational s = 0;
  for (const auto& x : v) s += x;
  return s;
}

inline Rational product(const Vec& v) {
  Rational s = 1;
  for (const auto& x : v) s *= x;
  return s;
}

}  // namespace lxm
