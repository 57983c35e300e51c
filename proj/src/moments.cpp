#include "mochis/moments.hpp"

#include <algorithm>
#include <map>
#include <sstream>

#include "mochis/error.hpp"

namespace mochis {

WeightVector WeightVector::ones(int k) {
  if (k < 1) throw InvalidArgument("weight vector needs k >= 1");
  return WeightVector(std::vector<BigRational>(static_cast<size_t>(k), BigRational(1)));
}

WeightVector WeightVector::from_integers(const std::vector<long>& values) {
  WeightVector w;
  w.entries.reserve(values.size());
  for (long v : values) w.entries.emplace_back(v);
  return w;
}

WeightVector WeightVector::parse(std::string_view csv) {
  WeightVector w;
  size_t start = 0;
  while (start <= csv.size()) {
    size_t comma = csv.find(',', start);
    if (comma == std::string_view::npos) comma = csv.size();
    w.entries.push_back(parse_rational(csv.substr(start, comma - start)));
    start = comma + 1;
  }
  return w;
}

BigRational WeightVector::max_abs() const {
  BigRational best = 0;
  for (const auto& e : entries) best = std::max(best, BigRational(abs(e)));
  return best;
}

bool WeightVector::all_zero() const {
  return std::all_of(entries.begin(), entries.end(), [](const BigRational& e) { return e == 0; });
}

bool WeightVector::has_negative() const {
  return std::any_of(entries.begin(), entries.end(), [](const BigRational& e) { return e < 0; });
}

bool WeightVector::all_equal() const {
  return std::all_of(entries.begin(), entries.end(), [&](const BigRational& e) { return e == entries.front(); });
}

int WeightVector::count_unit() const {
  return static_cast<int>(std::count(entries.begin(), entries.end(), BigRational(1)));
}

std::string WeightVector::to_string() const {
  std::string out;
  for (size_t i = 0; i < entries.size(); ++i) {
    if (i) out += ',';
    out += mochis::to_string(entries[i]);
  }
  return out;
}

StatisticSpec StatisticSpec::discrete(int n, int p, WeightVector weights) {
  StatisticSpec s;
  s.mode = Mode::discrete;
  s.n = n;
  s.p = p;
  s.weights = std::move(weights);
  return s;
}

StatisticSpec StatisticSpec::continuous(int p, WeightVector weights) {
  StatisticSpec s;
  s.mode = Mode::continuous;
  s.p = p;
  s.weights = std::move(weights);
  return s;
}

void StatisticSpec::validate() const {
  if (k() < 1) throw InvalidArgument("statistic needs at least one weight (k >= 1)");
  if (p < 1) throw InvalidArgument("p must be a positive integer, got " + std::to_string(p));
  if (mode == Mode::discrete && n < 0) throw InvalidArgument("n must be >= 0, got " + std::to_string(n));
  if (weights.all_zero()) throw InvalidArgument("all weights are zero (degenerate statistic)");
  if (!allow_negative_weights && weights.has_negative()) {
    throw InvalidArgument("negative weights are only allowed for raw moment queries");
  }
}

std::string StatisticSpec::describe() const {
  std::ostringstream os;
  if (mode == Mode::discrete) {
    os << "discrete(n=" << n << ")";
  } else {
    os << "continuous";
  }
  os << " k=" << k() << " p=" << p << " w=(" << weights.to_string() << ")";
  return os.str();
}

bool is_degenerate(const StatisticSpec& spec) {
  if (spec.weights.all_zero()) return true;
  if (spec.mode == Mode::discrete) {
    if (spec.n == 0) return true;
    return spec.weights.all_equal() && (spec.p == 1 || spec.n == 1);
  }
  return spec.weights.all_equal() && (spec.p == 1 || spec.k() == 1);
}

BigRational MomentSequence::raw(int m) const {
  return values.at(static_cast<size_t>(m)) * pow(scale, static_cast<unsigned long>(m));
}

BigRational statistic_scale(const StatisticSpec& spec) {
  if (spec.weights.all_zero()) throw InvalidArgument("all weights are zero (degenerate statistic)");
  BigRational scale = spec.weights.max_abs();
  if (spec.mode == Mode::discrete && spec.n > 0) {
    scale *= BigRational(pow(BigInt(spec.n), static_cast<unsigned long>(spec.p)));
  }
  return scale;
}

TruncatedPoly2<BigRational> bin_series(int n, int M, int p, const BigRational& w) {
  if (n < 0 || M < 0) throw InvalidArgument("bin_series needs n, M >= 0");
  TruncatedPoly2<BigRational> g(n, M);
  g(0, 0) = 1;
  for (int s = 1; s <= n; ++s) {
    const BigRational base = BigRational(pow(BigInt(s), static_cast<unsigned long>(p))) * w;
    BigRational term = 1;  // (s^p w)^t / t!
    for (int t = 0; t <= M; ++t) {
      if (t > 0) term = term * base / BigRational(t);
      g(s, t) = term;
    }
  }
  return g;
}

namespace {

void require_mode(const StatisticSpec& spec, Mode mode, const char* what) {
  if (spec.mode != mode) throw InvalidArgument(std::string(what) + " called with the wrong statistic mode");
}

// Integer numerators a_i with w_i = a_i / d for the common denominator d.
struct ScaledWeights {
  BigInt denominator;
  std::map<BigInt, int> multiplicity;  // a_i -> count, ordered for determinism
};

ScaledWeights scale_weights(const WeightVector& w) {
  ScaledWeights out;
  out.denominator = common_denominator(w.entries);
  for (const auto& e : w.entries) {
    BigRational scaled = e * BigRational(out.denominator);
    out.multiplicity[scaled.get_num()] += 1;
  }
  return out;
}

// t! [x^s y^t] G(x, a y) = s^{pt} a^t, with the empty bin contributing 1 at (0,0).
TruncatedPoly2<BigInt> bin_series_exponential(int n, int M, int p, const BigInt& a) {
  TruncatedPoly2<BigInt> g(n, M);
  g(0, 0) = 1;
  for (int s = 1; s <= n; ++s) {
    const BigInt base = pow(BigInt(s), static_cast<unsigned long>(p)) * a;
    BigInt term = 1;
    for (int t = 0; t <= M; ++t) {
      if (t > 0) term *= base;
      g(s, t) = term;
    }
  }
  return g;
}

// Multiply by (1 - x)^{-times}: repeated prefix sums along x.
void multiply_by_geometric(TruncatedPoly2<BigInt>& poly, int times) {
  for (int r = 0; r < times; ++r) {
    for (int s = 1; s <= poly.max_deg_x(); ++s) {
      for (int t = 0; t <= poly.max_deg_y(); ++t) poly(s, t) += poly(s - 1, t);
    }
  }
}

}  // namespace

MomentSequence discrete_moments(const StatisticSpec& spec, int M) {
  require_mode(spec, Mode::discrete, "discrete_moments");
  if (M < 0) throw InvalidArgument("number of moments must be >= 0");
  StatisticSpec checked = spec;
  checked.validate();

  const int n = spec.n;
  const BigRational scale = statistic_scale(spec);
  const ScaledWeights sw = scale_weights(spec.weights);
  const BinomialTable binom(M);
  auto mul = [&](const TruncatedPoly2<BigInt>& a, const TruncatedPoly2<BigInt>& b) {
    return poly2_mul_binomial(a, b, n, M, binom);
  };

  int zero_bins = 0;
  struct Group {
    BigInt a;
    int count;
  };
  std::vector<Group> groups;
  for (const auto& [a, count] : sw.multiplicity) {
    if (a == 0) {
      zero_bins = count;
    } else {
      groups.push_back({a, count});
    }
  }

  // Split the product into two halves so that the last multiplication only
  // has to produce the x^n row.
  std::vector<TruncatedPoly2<BigInt>> left;
  std::vector<TruncatedPoly2<BigInt>> right;
  const auto identity = TruncatedPoly2<BigInt>::one(n, M);
  if (groups.size() == 1) {
    const auto base = bin_series_exponential(n, M, spec.p, groups[0].a);
    left.push_back(groups[0].count > 1 ? power_by_squaring(base, static_cast<unsigned>(groups[0].count - 1), identity, mul)
                                       : identity);
    right.push_back(base);
  } else {
    for (size_t i = 0; i < groups.size(); ++i) {
      auto factor = power_by_squaring(bin_series_exponential(n, M, spec.p, groups[i].a),
                                      static_cast<unsigned>(groups[i].count), identity, mul);
      (i < groups.size() / 2 ? left : right).push_back(std::move(factor));
    }
  }
  auto lhs = product_tree(std::move(left), mul);
  multiply_by_geometric(lhs, zero_bins);
  const auto rhs = product_tree(std::move(right), mul);
  const std::vector<BigInt> row = poly2_mul_binomial_row(lhs, rhs, n, M, binom);

  // row[m] = m! [x^n y^m] prod_i G(x, a_i y); divide by |D_{n,k}| d^m scale^m.
  const BigInt count = binomial(n + spec.k() - 1, spec.k() - 1);
  const BigRational unit = BigRational(sw.denominator) * scale;
  MomentSequence out{spec, scale, {}};
  out.values.reserve(static_cast<size_t>(M) + 1);
  BigRational unit_pow = 1;
  for (int m = 0; m <= M; ++m) {
    if (m > 0) unit_pow *= unit;
    out.values.push_back(BigRational(row[static_cast<size_t>(m)]) / (BigRational(count) * unit_pow));
  }
  return out;
}

MomentSequence continuous_moments(const StatisticSpec& spec, int M) {
  require_mode(spec, Mode::continuous, "continuous_moments");
  if (M < 0) throw InvalidArgument("number of moments must be >= 0");
  StatisticSpec checked = spec;
  checked.validate();

  const int k = spec.k();
  const int p = spec.p;
  const BigRational scale = statistic_scale(spec);
  const ScaledWeights sw = scale_weights(spec.weights);

  // (pi)!/i! is an integer, so each factor Q_p(a x) has integer coefficients.
  std::vector<BigInt> q_base(static_cast<size_t>(M) + 1);
  q_base[0] = 1;
  for (int i = 1; i <= M; ++i) {
    // (pi)!/i! = ((p(i-1))!/(i-1)!) * (p(i-1)+1)...(pi) / i
    BigInt v = q_base[static_cast<size_t>(i - 1)];
    for (int j = p * (i - 1) + 1; j <= p * i; ++j) v *= j;
    mpz_divexact_ui(v.get_mpz_t(), v.get_mpz_t(), static_cast<unsigned long>(i));
    q_base[static_cast<size_t>(i)] = v;
  }

  auto mul = [M](const TruncatedPoly1<BigInt>& a, const TruncatedPoly1<BigInt>& b) {
    return poly1_mul_kronecker(a, b, M);
  };
  TruncatedPoly1<BigInt> identity(M);
  identity[0] = 1;

  std::vector<TruncatedPoly1<BigInt>> factors;
  for (const auto& [a, count] : sw.multiplicity) {
    if (a == 0) continue;  // Q_p(0) = 1
    TruncatedPoly1<BigInt> q(M);
    BigInt a_pow = 1;
    for (int i = 0; i <= M; ++i) {
      if (i > 0) a_pow *= a;
      q[i] = q_base[static_cast<size_t>(i)] * a_pow;
    }
    factors.push_back(power_by_squaring(std::move(q), static_cast<unsigned>(count), identity, mul));
  }
  const auto product = product_tree(std::move(factors), mul);

  // E(stat^m) = (k-1)! m! / (pm+k-1)! [x^m] prod_j Q_p(w_j x)
  const BigInt k_fact = factorial(static_cast<unsigned long>(k - 1));
  const BigRational unit = BigRational(sw.denominator) * scale;
  MomentSequence out{spec, scale, {}};
  out.values.reserve(static_cast<size_t>(M) + 1);
  BigRational unit_pow = 1;
  BigInt m_fact = 1;
  for (int m = 0; m <= M; ++m) {
    if (m > 0) {
      unit_pow *= unit;
      m_fact *= m;
    }
    const BigInt denom = factorial(static_cast<unsigned long>(p * m + k - 1));
    BigRational value(product[m] * k_fact * m_fact, denom);
    value.canonicalize();
    out.values.push_back(value / unit_pow);
  }
  return out;
}

MomentSequence compute_moments(const StatisticSpec& spec, int M) {
  return spec.mode == Mode::discrete ? discrete_moments(spec, M) : continuous_moments(spec, M);
}

BigRational moment_decay_limit(const StatisticSpec& spec) {
  require_mode(spec, Mode::continuous, "moment_decay_limit");
  if (spec.p < 2) throw InvalidArgument("moment decay limit requires p >= 2");
  if (spec.k() < 2) throw InvalidArgument("moment decay limit requires k >= 2");
  for (const auto& w : spec.weights.entries) {
    if (w < 0 || w > 1) throw InvalidArgument("moment decay limit requires weights in [0,1]");
  }
  const int k = spec.k();
  return make_rational(factorial(static_cast<unsigned long>(k - 1)) * spec.weights.count_unit(),
                       pow(BigInt(spec.p), static_cast<unsigned long>(k - 1)));
}

BigRational statistic_value(const StatisticSpec& spec, const std::vector<long>& parts) {
  if (static_cast<int>(parts.size()) != spec.k()) throw InvalidArgument("configuration length differs from k");
  BigRational total = 0;
  for (int j = 0; j < spec.k(); ++j) {
    total += spec.weights[j] * BigRational(pow(BigInt(parts[static_cast<size_t>(j)]), static_cast<unsigned long>(spec.p)));
  }
  return total;
}

}  // namespace mochis
