#include <random>

#include "doctest.h"
#include "mochis/error.hpp"
#include "mochis/numeric.hpp"
#include "mochis/poly.hpp"

using namespace mochis;

namespace {

BigInt pascal_binomial(int a, int b) {
  std::vector<std::vector<BigInt>> t(static_cast<size_t>(a) + 1);
  for (int i = 0; i <= a; ++i) {
    t[i].assign(static_cast<size_t>(i) + 1, 1);
    for (int j = 1; j < i; ++j) t[i][j] = t[i - 1][j - 1] + t[i - 1][j];
  }
  return t[a][b];
}

TruncatedPoly2<BigRational> random_poly2(std::mt19937_64& rng, int dx, int dy) {
  std::uniform_int_distribution<int> num(-9, 9);
  std::uniform_int_distribution<int> den(1, 5);
  TruncatedPoly2<BigRational> p(dx, dy);
  for (int i = 0; i <= dx; ++i) {
    for (int j = 0; j <= dy; ++j) p(i, j) = make_rational(num(rng), den(rng));
  }
  return p;
}

}  // namespace

TEST_CASE("binomial coefficients") {
  CHECK(binomial(4, 2) == 6);
  CHECK(binomial(7, 0) == 1);
  CHECK(binomial(0, 0) == 1);
  CHECK(binomial(52, 5) == 2598960);
  CHECK(binomial(52, 5) == pascal_binomial(52, 5));
  CHECK(binomial(5, -1) == 0);
  CHECK(binomial(5, 6) == 0);
  for (int a = 0; a <= 30; ++a) {
    for (int b = 0; b <= a; ++b) CHECK(binomial(a, b) == pascal_binomial(a, b));
  }
}

TEST_CASE("binomial table matches binomial") {
  BinomialTable table(40);
  for (int m = 0; m <= 40; ++m) {
    for (int t = 0; t <= m; ++t) CHECK(table(m, t) == binomial(m, t));
  }
}

TEST_CASE("rationals stay in lowest terms") {
  BigRational a = make_rational(6, -4);
  CHECK(a.get_num() == -3);
  CHECK(a.get_den() == 2);
  BigRational b = a * make_rational(4, 3);
  CHECK(to_string(b) == "-2");
  CHECK_THROWS_AS(make_rational(1, 0), InvalidArgument);
}

TEST_CASE("parse_rational") {
  CHECK(parse_rational("7") == 7);
  CHECK(parse_rational("-3/4") == make_rational(-3, 4));
  CHECK(parse_rational("0.125") == make_rational(1, 8));
  CHECK(parse_rational("1e-3") == make_rational(1, 1000));
  CHECK(parse_rational(" 2.5E2 ") == 250);
  CHECK(parse_rational(".5") == make_rational(1, 2));
  CHECK(parse_rational("6/4") == make_rational(3, 2));
  CHECK_THROWS_AS(parse_rational(""), InvalidArgument);
  CHECK_THROWS_AS(parse_rational("abc"), InvalidArgument);
  CHECK_THROWS_AS(parse_rational("1/0"), InvalidArgument);
  CHECK_THROWS_AS(parse_rational("1.2.3"), InvalidArgument);
}

TEST_CASE("to_double is accurate for huge operands") {
  CHECK(to_double(make_rational(1, 3)) == doctest::Approx(1.0 / 3.0).epsilon(1e-16));
  BigInt big = pow(BigInt(10), 400);
  CHECK(to_double(BigRational(big + 1, big * 3)) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  CHECK(to_double(BigRational(-7, 2)) == -3.5);
  CHECK(to_double(BigRational(0)) == 0.0);
}

TEST_CASE("to_double rounds to nearest") {
  // IEEE division of exactly representable operands is correctly rounded.
  for (long p = -60; p <= 60; ++p) {
    for (long q = 1; q <= 60; ++q) {
      CHECK(to_double(make_rational(p, q)) == static_cast<double>(p) / static_cast<double>(q));
    }
  }
  const long big = (1L << 53) + 1;
  CHECK(to_double(BigRational(big)) == 9007199254740992.0);
  CHECK(to_double(BigRational((1L << 53) + 3)) == 9007199254740996.0);
  CHECK(to_double(make_rational(BigInt(big) * 3, 3)) == 9007199254740992.0);
}

TEST_CASE("poly2_mul hand expansions") {
  TruncatedPoly2<BigRational> a(1, 0);
  a(0, 0) = 1;
  a(1, 0) = 1;
  TruncatedPoly2<BigRational> b(0, 1);
  b(0, 0) = 1;
  b(0, 1) = 1;
  auto c = poly2_mul(a, b, 1, 1);
  CHECK(c(0, 0) == 1);
  CHECK(c(1, 0) == 1);
  CHECK(c(0, 1) == 1);
  CHECK(c(1, 1) == 1);

  TruncatedPoly2<BigRational> geo(3, 0);
  for (int j = 0; j <= 3; ++j) geo(j, 0) = 1;
  auto sq = poly2_mul(geo, geo, 3, 0);
  for (int j = 0; j <= 3; ++j) CHECK(sq(j, 0) == j + 1);

  std::mt19937_64 rng(7);
  auto r = random_poly2(rng, 3, 2);
  CHECK(poly2_mul(r, TruncatedPoly2<BigRational>::one(3, 2), 3, 2) == r);
}

TEST_CASE("poly2_mul is associative on random inputs") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 5; ++trial) {
    auto a = random_poly2(rng, 3, 3);
    auto b = random_poly2(rng, 3, 3);
    auto c = random_poly2(rng, 3, 3);
    CHECK(poly2_mul(poly2_mul(a, b, 3, 3), c, 3, 3) == poly2_mul(a, poly2_mul(b, c, 3, 3), 3, 3));
  }
}

TEST_CASE("product_tree agrees with a sequential fold") {
  std::mt19937_64 rng(3);
  std::vector<TruncatedPoly2<BigRational>> polys;
  for (int i = 0; i < 3; ++i) polys.push_back(random_poly2(rng, 2, 2));
  auto fold = poly2_mul(poly2_mul(polys[0], polys[1], 2, 2), polys[2], 2, 2);
  CHECK(product_tree(polys, 2, 2) == fold);

  std::vector<TruncatedPoly2<BigRational>> reversed(polys.rbegin(), polys.rend());
  CHECK(product_tree(reversed, 2, 2) == fold);

  CHECK(product_tree(std::vector{polys[0]}, 2, 2) == polys[0]);
  CHECK_THROWS_AS(product_tree(std::vector<TruncatedPoly2<BigRational>>{}, 2, 2), InvalidArgument);

  std::vector<TruncatedPoly2<BigRational>> same(5, polys[1]);
  auto mul = [](const TruncatedPoly2<BigRational>& x, const TruncatedPoly2<BigRational>& y) {
    return poly2_mul(x, y, 2, 2);
  };
  CHECK(product_tree(same, 2, 2) == power_by_squaring(polys[1], 5, TruncatedPoly2<BigRational>::one(2, 2), mul));
}

TEST_CASE("binomial-weighted product equals rational product rescaled") {
  // If A(s,t) = t! a(s,t) then (A *_binom B)(s,m) = m! (a * b)(s,m).
  std::mt19937_64 rng(5);
  const int n = 3;
  const int M = 4;
  std::uniform_int_distribution<int> coef(-6, 6);
  TruncatedPoly2<BigInt> A(n, M);
  TruncatedPoly2<BigInt> B(n, M);
  TruncatedPoly2<BigRational> a(n, M);
  TruncatedPoly2<BigRational> b(n, M);
  for (int s = 0; s <= n; ++s) {
    for (int t = 0; t <= M; ++t) {
      A(s, t) = coef(rng);
      B(s, t) = coef(rng);
      a(s, t) = BigRational(A(s, t)) / BigRational(factorial(t));
      b(s, t) = BigRational(B(s, t)) / BigRational(factorial(t));
    }
  }
  BinomialTable binom(M);
  auto full = poly2_mul_binomial(A, B, n, M, binom);
  auto ref = poly2_mul(a, b, n, M);
  auto row = poly2_mul_binomial_row(A, B, n, M, binom);
  for (int s = 0; s <= n; ++s) {
    for (int m = 0; m <= M; ++m) CHECK(BigRational(full(s, m)) == ref(s, m) * BigRational(factorial(m)));
  }
  for (int m = 0; m <= M; ++m) CHECK(row[m] == full(n, m));
}

TEST_CASE("Kronecker product equals schoolbook") {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 10; ++trial) {
    const int deg = 1 + trial * 3;
    TruncatedPoly1<BigInt> a(deg);
    TruncatedPoly1<BigInt> b(deg);
    for (int i = 0; i <= deg; ++i) {
      a[i] = pow(BigInt(static_cast<long>(rng() % 1000)), static_cast<unsigned long>(rng() % 9));
      b[i] = BigInt(static_cast<long>(rng() % 50));
    }
    if (trial % 3 == 0) b[deg / 2] = 0;
    CHECK(poly1_mul_kronecker(a, b, deg).coeffs() == poly1_mul(a, b, deg).coeffs());
  }
  TruncatedPoly1<BigInt> neg(2);
  neg[0] = 1;
  neg[1] = -2;
  neg[2] = 1;
  CHECK(poly1_mul_kronecker(neg, neg, 2).coeffs() == poly1_mul(neg, neg, 2).coeffs());
}
