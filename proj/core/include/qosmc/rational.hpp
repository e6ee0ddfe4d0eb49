#pragma once

#include <gmpxx.h>

#include <string>
#include <string_view>

namespace qosmc {

using Rational = mpq_class;

// Parses "12", "0.5", ".01" (no sign, no exponent) exactly.
Rational parse_decimal(std::string_view text);

// Exact decimal rendering when the denominator divides a power of ten,
// "n/d" otherwise.
std::string to_decimal(const Rational& value);

bool is_terminating_decimal(const Rational& value);

}  // namespace qosmc
