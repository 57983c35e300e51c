#pragma once

// Exact integer and rational arithmetic.
//
// BigInt and BigRational are thin aliases over GMP's C++ classes. gmpxx keeps
// every mpq_class result in lowest terms with a positive denominator, which is
// the only invariant the rest of the library relies on.

#include <gmpxx.h>

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace mochis {

using BigInt = mpz_class;
using BigRational = mpq_class;

// binom(a, b); zero when b < 0 or b > a.
BigInt binomial(long a, long b);

BigInt factorial(unsigned long n);

// base^exp for a non-negative exponent.
BigInt pow(const BigInt& base, unsigned long exp);
BigRational pow(const BigRational& base, unsigned long exp);

BigRational make_rational(const BigInt& num, const BigInt& den);

// Least common multiple of the denominators.
BigInt common_denominator(const std::vector<BigRational>& values);

// "num/den" in lowest terms, or "num" for integers.
std::string to_string(const BigRational& q);
std::string to_string(const BigInt& z);

// Accepts "7", "-3/4", "0.125", "1e-3". Decimals are converted exactly.
// Throws InvalidArgument on malformed input or a zero denominator.
BigRational parse_rational(std::string_view text);

// Nearest double. Values beyond double range saturate to +-inf.
double to_double(const BigRational& q);

// Table of binom(m, t) for 0 <= t <= m <= max_m, row-major in m.
class BinomialTable {
 public:
  explicit BinomialTable(int max_m);

  const BigInt& operator()(int m, int t) const { return rows_[m][t]; }
  int max_m() const { return static_cast<int>(rows_.size()) - 1; }

 private:
  std::vector<std::vector<BigInt>> rows_;
};

}  // namespace mochis
