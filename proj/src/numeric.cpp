#include "mochis/numeric.hpp"

#include <cctype>
#include <cmath>
#include <limits>

#include "mochis/error.hpp"

namespace mochis {

BigInt binomial(long a, long b) {
  if (a < 0 || b < 0 || b > a) return 0;
  BigInt out;
  mpz_bin_uiui(out.get_mpz_t(), static_cast<unsigned long>(a), static_cast<unsigned long>(b));
  return out;
}

BigInt factorial(unsigned long n) {
  BigInt out;
  mpz_fac_ui(out.get_mpz_t(), n);
  return out;
}

BigInt pow(const BigInt& base, unsigned long exp) {
  BigInt out;
  mpz_pow_ui(out.get_mpz_t(), base.get_mpz_t(), exp);
  return out;
}

BigRational pow(const BigRational& base, unsigned long exp) {
  BigRational out;
  mpz_pow_ui(out.get_num_mpz_t(), base.get_num_mpz_t(), exp);
  mpz_pow_ui(out.get_den_mpz_t(), base.get_den_mpz_t(), exp);
  // base is canonical, so num^e / den^e is already in lowest terms.
  return out;
}

BigRational make_rational(const BigInt& num, const BigInt& den) {
  if (den == 0) throw InvalidArgument("rational with zero denominator");
  BigRational q(num, den);
  q.canonicalize();
  return q;
}

BigInt common_denominator(const std::vector<BigRational>& values) {
  BigInt d = 1;
  for (const auto& v : values) {
    mpz_lcm(d.get_mpz_t(), d.get_mpz_t(), v.get_den_mpz_t());
  }
  return d;
}

std::string to_string(const BigInt& z) { return z.get_str(); }

std::string to_string(const BigRational& q) {
  if (q.get_den() == 1) return q.get_num().get_str();
  return q.get_num().get_str() + "/" + q.get_den().get_str();
}

namespace {

bool all_digits(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s) {
    if (!std::isdigit(static_cast<unsigned char>(c))) return false;
  }
  return true;
}

BigInt parse_integer(std::string_view s, std::string_view whole) {
  bool negative = false;
  if (!s.empty() && (s.front() == '+' || s.front() == '-')) {
    negative = s.front() == '-';
    s.remove_prefix(1);
  }
  if (!all_digits(s)) throw InvalidArgument("not a number: '" + std::string(whole) + "'");
  BigInt z(std::string(s), 10);
  return negative ? BigInt(-z) : z;
}

}  // namespace

BigRational parse_rational(std::string_view text) {
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.front()))) text.remove_prefix(1);
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back()))) text.remove_suffix(1);
  if (text.empty()) throw InvalidArgument("empty number");

  if (auto slash = text.find('/'); slash != std::string_view::npos) {
    BigInt num = parse_integer(text.substr(0, slash), text);
    BigInt den = parse_integer(text.substr(slash + 1), text);
    if (den == 0) throw InvalidArgument("zero denominator: '" + std::string(text) + "'");
    return make_rational(num, den);
  }

  std::string_view mantissa = text;
  long exponent = 0;
  if (auto e = text.find_first_of("eE"); e != std::string_view::npos) {
    mantissa = text.substr(0, e);
    BigInt ez = parse_integer(text.substr(e + 1), text);
    if (!ez.fits_slong_p() || std::abs(ez.get_si()) > 4000) {
      throw InvalidArgument("exponent out of range: '" + std::string(text) + "'");
    }
    exponent = ez.get_si();
  }

  bool negative = false;
  if (!mantissa.empty() && (mantissa.front() == '+' || mantissa.front() == '-')) {
    negative = mantissa.front() == '-';
    mantissa.remove_prefix(1);
  }
  std::string digits;
  long frac_len = 0;
  if (auto dot = mantissa.find('.'); dot != std::string_view::npos) {
    std::string_view ip = mantissa.substr(0, dot);
    std::string_view fp = mantissa.substr(dot + 1);
    if ((ip.empty() && fp.empty()) || (!ip.empty() && !all_digits(ip)) || (!fp.empty() && !all_digits(fp))) {
      throw InvalidArgument("not a number: '" + std::string(text) + "'");
    }
    digits = std::string(ip) + std::string(fp);
    frac_len = static_cast<long>(fp.size());
  } else {
    if (!all_digits(mantissa)) throw InvalidArgument("not a number: '" + std::string(text) + "'");
    digits = std::string(mantissa);
  }

  BigRational q(BigInt(digits, 10));
  long shift = exponent - frac_len;
  if (shift > 0) q *= BigRational(pow(BigInt(10), static_cast<unsigned long>(shift)));
  if (shift < 0) q /= BigRational(pow(BigInt(10), static_cast<unsigned long>(-shift)));
  q.canonicalize();
  return negative ? BigRational(-q) : q;
}

double to_double(const BigRational& q) {
  const mpz_srcptr num = q.get_num_mpz_t();
  const mpz_srcptr den = q.get_den_mpz_t();
  const int sign = mpz_sgn(num);
  if (sign == 0) return 0.0;
  // Quotient with at least 65 significant bits plus a sticky bit, rounded to
  // 53 bits half-to-even: correctly rounded for any operand sizes.
  long shift = 66 - (static_cast<long>(mpz_sizeinbase(num, 2)) - static_cast<long>(mpz_sizeinbase(den, 2)));
  BigInt a = abs(q.get_num());
  BigInt b = q.get_den();
  if (shift > 0) a <<= static_cast<mp_bitcnt_t>(shift);
  if (shift < 0) b <<= static_cast<mp_bitcnt_t>(-shift);
  BigInt quotient;
  BigInt remainder;
  mpz_tdiv_qr(quotient.get_mpz_t(), remainder.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
  quotient <<= 1;
  shift += 1;
  if (remainder != 0) quotient += 1;
  const long drop = static_cast<long>(mpz_sizeinbase(quotient.get_mpz_t(), 2)) - 53;
  BigInt top = quotient >> static_cast<mp_bitcnt_t>(drop);
  const BigInt rest = quotient - (top << static_cast<mp_bitcnt_t>(drop));
  const BigInt half = BigInt(1) << static_cast<mp_bitcnt_t>(drop - 1);
  if (rest > half || (rest == half && mpz_odd_p(top.get_mpz_t()))) top += 1;
  long e = drop - shift;
  if (e > std::numeric_limits<int>::max() / 2) e = std::numeric_limits<int>::max() / 2;
  if (e < std::numeric_limits<int>::min() / 2) e = std::numeric_limits<int>::min() / 2;
  const double magnitude = std::ldexp(top.get_d(), static_cast<int>(e));
  return sign < 0 ? -magnitude : magnitude;
}

BinomialTable::BinomialTable(int max_m) {
  rows_.resize(static_cast<size_t>(max_m) + 1);
  for (int m = 0; m <= max_m; ++m) {
    auto& row = rows_[static_cast<size_t>(m)];
    row.resize(static_cast<size_t>(m) + 1);
    row[0] = 1;
    row[static_cast<size_t>(m)] = 1;
    for (int t = 1; t < m; ++t) {
      row[static_cast<size_t>(t)] = rows_[static_cast<size_t>(m - 1)][static_cast<size_t>(t - 1)] +
                                    rows_[static_cast<size_t>(m - 1)][static_cast<size_t>(t)];
    }
  }
}

}  // namespace mochis
