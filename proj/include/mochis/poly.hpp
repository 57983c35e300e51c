#pragma once

// Dense truncated power series in one and two variables, exact coefficient
// rings only (BigInt, BigRational). Products never round; truncation simply
// drops terms above the requested degrees.

#include <algorithm>
#include <cstddef>
#include <utility>
#include <vector>

#include "mochis/error.hpp"
#include "mochis/numeric.hpp"

namespace mochis {

template <class T>
class TruncatedPoly1 {
 public:
  explicit TruncatedPoly1(int max_deg = 0) : coeffs_(static_cast<size_t>(max_deg) + 1, T(0)) {
    if (max_deg < 0) throw InvalidArgument("negative truncation degree");
  }

  int max_deg() const { return static_cast<int>(coeffs_.size()) - 1; }
  T& operator[](int i) { return coeffs_[static_cast<size_t>(i)]; }
  const T& operator[](int i) const { return coeffs_[static_cast<size_t>(i)]; }
  const std::vector<T>& coeffs() const { return coeffs_; }

  friend bool operator==(const TruncatedPoly1& a, const TruncatedPoly1& b) { return a.coeffs_ == b.coeffs_; }

 private:
  std::vector<T> coeffs_;
};

// coeffs are indexed (deg_x, deg_y), x-major.
template <class T>
class TruncatedPoly2 {
 public:
  TruncatedPoly2(int max_deg_x = 0, int max_deg_y = 0)
      : max_deg_x_(max_deg_x), max_deg_y_(max_deg_y),
        coeffs_(static_cast<size_t>(max_deg_x + 1) * static_cast<size_t>(max_deg_y + 1), T(0)) {
    if (max_deg_x < 0 || max_deg_y < 0) throw InvalidArgument("negative truncation degree");
  }

  static TruncatedPoly2 one(int max_deg_x, int max_deg_y) {
    TruncatedPoly2 p(max_deg_x, max_deg_y);
    p(0, 0) = 1;
    return p;
  }

  int max_deg_x() const { return max_deg_x_; }
  int max_deg_y() const { return max_deg_y_; }

  T& operator()(int i, int j) { return coeffs_[index(i, j)]; }
  const T& operator()(int i, int j) const { return coeffs_[index(i, j)]; }

  // Coefficient with implicit zeros beyond the truncation.
  T coeff(int i, int j) const {
    if (i < 0 || j < 0 || i > max_deg_x_ || j > max_deg_y_) return T(0);
    return (*this)(i, j);
  }

  // Same polynomial re-truncated at (max_deg_x, max_deg_y); new slots are zero.
  TruncatedPoly2 truncated(int max_deg_x, int max_deg_y) const {
    TruncatedPoly2 out(max_deg_x, max_deg_y);
    for (int i = 0; i <= std::min(max_deg_x, max_deg_x_); ++i) {
      for (int j = 0; j <= std::min(max_deg_y, max_deg_y_); ++j) out(i, j) = (*this)(i, j);
    }
    return out;
  }

  friend bool operator==(const TruncatedPoly2& a, const TruncatedPoly2& b) {
    return a.max_deg_x_ == b.max_deg_x_ && a.max_deg_y_ == b.max_deg_y_ && a.coeffs_ == b.coeffs_;
  }

 private:
  size_t index(int i, int j) const {
    return static_cast<size_t>(i) * static_cast<size_t>(max_deg_y_ + 1) + static_cast<size_t>(j);
  }

  int max_deg_x_;
  int max_deg_y_;
  std::vector<T> coeffs_;
};

// Truncated Cauchy product.
template <class T>
TruncatedPoly1<T> poly1_mul(const TruncatedPoly1<T>& a, const TruncatedPoly1<T>& b, int max_deg) {
  TruncatedPoly1<T> out(max_deg);
  const int da = std::min(a.max_deg(), max_deg);
  for (int i = 0; i <= da; ++i) {
    if (a[i] == 0) continue;
    const int db = std::min(b.max_deg(), max_deg - i);
    for (int j = 0; j <= db; ++j) out[i + j] += a[i] * b[j];
  }
  return out;
}

// Truncated bivariate Cauchy product; coefficients agree with the full product
// up to (max_deg_x, max_deg_y) provided both inputs are truncated at or above
// those degrees.
template <class T>
TruncatedPoly2<T> poly2_mul(const TruncatedPoly2<T>& a, const TruncatedPoly2<T>& b, int max_deg_x, int max_deg_y) {
  TruncatedPoly2<T> out(max_deg_x, max_deg_y);
  for (int ax = 0; ax <= std::min(a.max_deg_x(), max_deg_x); ++ax) {
    for (int ay = 0; ay <= std::min(a.max_deg_y(), max_deg_y); ++ay) {
      const T& ca = a(ax, ay);
      if (ca == 0) continue;
      for (int bx = 0; bx <= std::min(b.max_deg_x(), max_deg_x - ax); ++bx) {
        for (int by = 0; by <= std::min(b.max_deg_y(), max_deg_y - ay); ++by) {
          out(ax + bx, ay + by) += ca * b(bx, by);
        }
      }
    }
  }
  return out;
}

// Product in which the y-direction is an exponential (binomial) convolution:
//   out(s, m) = sum_{s1+s2=s} sum_{t} binom(m, t) a(s1, t) b(s2, m - t).
// If a(s, t) = t! [x^s y^t] A and likewise for b, then out(s, m) = m! [x^s y^m] AB,
// which keeps integer-valued series integral.
inline TruncatedPoly2<BigInt> poly2_mul_binomial(const TruncatedPoly2<BigInt>& a, const TruncatedPoly2<BigInt>& b,
                                                 int max_deg_x, int max_deg_y, const BinomialTable& binom) {
  TruncatedPoly2<BigInt> out(max_deg_x, max_deg_y);
  BigInt acc;
  for (int s = 0; s <= max_deg_x; ++s) {
    for (int m = 0; m <= max_deg_y; ++m) {
      BigInt& target = out(s, m);
      for (int t = 0; t <= m; ++t) {
        if (t > a.max_deg_y() || m - t > b.max_deg_y()) continue;
        acc = 0;
        for (int s1 = 0; s1 <= s; ++s1) {
          if (s1 > a.max_deg_x() || s - s1 > b.max_deg_x()) continue;
          const BigInt& ca = a(s1, t);
          const BigInt& cb = b(s - s1, m - t);
          if (ca == 0 || cb == 0) continue;
          mpz_addmul(acc.get_mpz_t(), ca.get_mpz_t(), cb.get_mpz_t());
        }
        if (acc != 0) mpz_addmul(target.get_mpz_t(), binom(m, t).get_mpz_t(), acc.get_mpz_t());
      }
    }
  }
  return out;
}

// Only the x^row slice of poly2_mul_binomial, returned as a y-series.
inline std::vector<BigInt> poly2_mul_binomial_row(const TruncatedPoly2<BigInt>& a, const TruncatedPoly2<BigInt>& b,
                                                  int row, int max_deg_y, const BinomialTable& binom) {
  std::vector<BigInt> out(static_cast<size_t>(max_deg_y) + 1);
  BigInt acc;
  for (int m = 0; m <= max_deg_y; ++m) {
    for (int t = 0; t <= m; ++t) {
      if (t > a.max_deg_y() || m - t > b.max_deg_y()) continue;
      acc = 0;
      for (int s1 = 0; s1 <= row; ++s1) {
        if (s1 > a.max_deg_x() || row - s1 > b.max_deg_x()) continue;
        const BigInt& ca = a(s1, t);
        const BigInt& cb = b(row - s1, m - t);
        if (ca == 0 || cb == 0) continue;
        mpz_addmul(acc.get_mpz_t(), ca.get_mpz_t(), cb.get_mpz_t());
      }
      if (acc != 0) mpz_addmul(out[static_cast<size_t>(m)].get_mpz_t(), binom(m, t).get_mpz_t(), acc.get_mpz_t());
    }
  }
  return out;
}

// Exact truncated product of non-negative integer series by Kronecker
// substitution: both series are packed into single integers with slots wide
// enough that no product coefficient carries into its neighbour, multiplied
// once by GMP, and unpacked. Falls back to schoolbook if any coefficient is
// negative.
inline TruncatedPoly1<BigInt> poly1_mul_kronecker(const TruncatedPoly1<BigInt>& a, const TruncatedPoly1<BigInt>& b,
                                                   int max_deg) {
  const int la = std::min(a.max_deg(), max_deg) + 1;
  const int lb = std::min(b.max_deg(), max_deg) + 1;
  size_t bits_a = 1;
  size_t bits_b = 1;
  for (int i = 0; i < la; ++i) {
    if (sgn(a[i]) < 0) return poly1_mul(a, b, max_deg);
    bits_a = std::max(bits_a, mpz_sizeinbase(a[i].get_mpz_t(), 2));
  }
  for (int i = 0; i < lb; ++i) {
    if (sgn(b[i]) < 0) return poly1_mul(a, b, max_deg);
    bits_b = std::max(bits_b, mpz_sizeinbase(b[i].get_mpz_t(), 2));
  }
  size_t terms = static_cast<size_t>(std::min(la, lb));
  size_t slot_bits = bits_a + bits_b + 1;
  while (terms > 0) {
    ++slot_bits;
    terms >>= 1u;
  }
  const size_t slot = (slot_bits + GMP_NUMB_BITS - 1) / GMP_NUMB_BITS;

  auto pack = [slot](const TruncatedPoly1<BigInt>& poly, int len) {
    std::vector<mp_limb_t> limbs(slot * static_cast<size_t>(len), 0);
    for (int i = 0; i < len; ++i) {
      const mpz_srcptr z = poly[i].get_mpz_t();
      const size_t n = mpz_size(z);
      const mp_limb_t* src = mpz_limbs_read(z);
      std::copy(src, src + n, limbs.begin() + static_cast<std::ptrdiff_t>(slot * static_cast<size_t>(i)));
    }
    BigInt out;
    mp_limb_t* dst = mpz_limbs_write(out.get_mpz_t(), static_cast<mp_size_t>(limbs.size()));
    std::copy(limbs.begin(), limbs.end(), dst);
    mp_size_t used = static_cast<mp_size_t>(limbs.size());
    while (used > 0 && dst[used - 1] == 0) --used;
    mpz_limbs_finish(out.get_mpz_t(), used);
    return out;
  };

  const BigInt pa = pack(a, la);
  const BigInt pb = pack(b, lb);
  BigInt product;
  mpz_mul(product.get_mpz_t(), pa.get_mpz_t(), pb.get_mpz_t());

  TruncatedPoly1<BigInt> out(max_deg);
  const size_t total = mpz_size(product.get_mpz_t());
  const mp_limb_t* limbs = mpz_limbs_read(product.get_mpz_t());
  for (int i = 0; i <= max_deg; ++i) {
    const size_t begin = slot * static_cast<size_t>(i);
    if (begin >= total) break;
    const size_t n = std::min(slot, total - begin);
    mpz_t view;
    mpz_roinit_n(view, limbs + begin, static_cast<mp_size_t>(n));
    out[i] = BigInt(view);
  }
  return out;
}

// Balanced binary product tree. Exact arithmetic makes the result identical
// to a left fold; the tree only keeps operand sizes balanced.
template <class P, class Mul>
P product_tree(std::vector<P> factors, Mul&& mul) {
  if (factors.empty()) throw InvalidArgument("product_tree of an empty list");
  while (factors.size() > 1) {
    std::vector<P> next;
    next.reserve((factors.size() + 1) / 2);
    for (size_t i = 0; i + 1 < factors.size(); i += 2) next.push_back(mul(factors[i], factors[i + 1]));
    if (factors.size() % 2 == 1) next.push_back(std::move(factors.back()));
    factors = std::move(next);
  }
  return std::move(factors.front());
}

template <class T>
TruncatedPoly2<T> product_tree(std::vector<TruncatedPoly2<T>> polys, int max_deg_x, int max_deg_y) {
  if (polys.empty()) throw InvalidArgument("product_tree of an empty list");
  if (polys.size() == 1) return polys.front().truncated(max_deg_x, max_deg_y);
  return product_tree(std::move(polys), [&](const TruncatedPoly2<T>& a, const TruncatedPoly2<T>& b) {
    return poly2_mul(a, b, max_deg_x, max_deg_y);
  });
}

// base^exp by repeated squaring under an arbitrary associative product.
template <class P, class Mul>
P power_by_squaring(P base, unsigned exp, const P& identity, Mul&& mul) {
  P result = identity;
  bool have = false;
  while (exp > 0) {
    if (exp & 1u) {
      result = have ? mul(result, base) : base;
      have = true;
    }
    exp >>= 1u;
    if (exp > 0) base = mul(base, base);
  }
  return result;
}

}  // namespace mochis
