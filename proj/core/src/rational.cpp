#include "qosmc/rational.hpp"

#include <cctype>

#include "qosmc/error.hpp"

namespace qosmc {

Rational parse_decimal(std::string_view text) {
  std::string digits;
  std::size_t fraction_digits = 0;
  bool seen_point = false;
  for (char ch : text) {
    if (ch == '.') {
      if (seen_point) throw Error("malformed decimal literal '" + std::string(text) + "'");
      seen_point = true;
    } else if (std::isdigit(static_cast<unsigned char>(ch))) {
      digits.push_back(ch);
      if (seen_point) ++fraction_digits;
    } else {
      throw Error("malformed decimal literal '" + std::string(text) + "'");
    }
  }
  if (digits.empty()) throw Error("malformed decimal literal '" + std::string(text) + "'");

  mpz_class numerator(digits, 10);
  mpz_class denominator;
  mpz_ui_pow_ui(denominator.get_mpz_t(), 10, fraction_digits);
  Rational value(numerator, denominator);
  value.canonicalize();
  return value;
}

bool is_terminating_decimal(const Rational& value) {
  mpz_class d = value.get_den();
  while (mpz_divisible_ui_p(d.get_mpz_t(), 2)) d /= 2;
  while (mpz_divisible_ui_p(d.get_mpz_t(), 5)) d /= 5;
  return d == 1;
}

std::string to_decimal(const Rational& value) {
  if (!is_terminating_decimal(value)) return value.get_str();

  mpz_class num = abs(value.get_num());
  mpz_class den = value.get_den();
  std::string sign = value < 0 ? "-" : "";
  mpz_class integral = num / den;
  mpz_class rest = num % den;
  std::string out = sign + integral.get_str();
  if (rest == 0) return out;
  out.push_back('.');
  while (rest != 0) {
    rest *= 10;
    mpz_class digit = rest / den;
    out += digit.get_str();
    rest %= den;
  }
  return out;
}

}  // namespace qosmc
