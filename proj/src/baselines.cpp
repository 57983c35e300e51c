#include "mochis/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <utility>

#include <boost/math/special_functions/bessel.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "mochis/error.hpp"
#include "mochis/oracle.hpp"

namespace mochis {

namespace {

void require_clean(const std::vector<double>& v, const char* name) {
  for (double e : v) {
    if (std::isnan(e)) throw InvalidArgument(std::string(name) + " contains NaN");
  }
}

TestResult baseline_result(const char* test, double statistic, double p_value, Side side, const char* method,
                           double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidArgument("alpha must lie in (0, 1)");
  TestResult r;
  r.test = test;
  r.raw_statistic = statistic;
  r.p_value = std::clamp(p_value, 0.0, 1.0);
  r.side = side;
  r.method = method;
  r.alpha = alpha;
  r.reject = r.p_value <= alpha;
  return r;
}

// Sorted CDF values of the sample under the null.
std::vector<double> transformed(const std::vector<double>& z, const NullCdf& null_cdf) {
  if (z.empty()) throw InvalidArgument("one-sample test needs at least one observation");
  std::vector<double> u;
  u.reserve(z.size());
  for (double v : z) u.push_back(null_cdf(v));
  std::sort(u.begin(), u.end());
  return u;
}

// P(all visited lattice points satisfy |i n - j m| < d) over monotone paths
// from (0,0) to (m,n), each path equally likely.
double ks_paths_within(long m, long n, long d) {
  std::vector<double> row(static_cast<size_t>(n) + 1, 0.0);
  const auto inside = [&](long i, long j) { return std::abs(i * n - j * m) < d; };
  for (long i = 0; i <= m; ++i) {
    for (long j = 0; j <= n; ++j) {
      if (!inside(i, j)) {
        row[static_cast<size_t>(j)] = 0.0;
        continue;
      }
      if (i == 0 && j == 0) {
        row[0] = 1.0;
        continue;
      }
      // Probability-normalised step weights keep values bounded.
      const double from_up = i > 0 ? row[static_cast<size_t>(j)] * static_cast<double>(m - i + 1) : 0.0;
      const double from_left = j > 0 ? row[static_cast<size_t>(j) - 1] * static_cast<double>(n - j + 1) : 0.0;
      row[static_cast<size_t>(j)] = (from_up + from_left) / static_cast<double>(m + n - i - j + 1);
    }
  }
  return row[static_cast<size_t>(n)];
}

struct MannWhitneyTable {
  std::vector<double> cdf;       // P(U <= u)
  std::vector<double> survival;  // P(U >= u)
};

const MannWhitneyTable& mann_whitney_table(int n, int k) {
  static std::mutex mutex;
  static std::map<std::pair<int, int>, MannWhitneyTable> cache;
  std::lock_guard<std::mutex> lock(mutex);
  auto it = cache.find({n, k});
  if (it != cache.end()) return it->second;
  const Pmf pmf = mann_whitney_pmf(n, k);
  const long top = static_cast<long>(n) * (k - 1);
  std::vector<BigRational> mass(static_cast<size_t>(top) + 1, BigRational(0));
  for (const auto& atom : pmf.atoms()) mass[static_cast<size_t>(atom.value.get_num().get_si())] = atom.probability;
  MannWhitneyTable table;
  table.cdf.resize(mass.size());
  table.survival.resize(mass.size());
  BigRational running = 0;
  for (size_t u = 0; u < mass.size(); ++u) {
    running += mass[u];
    table.cdf[u] = to_double(running);
  }
  running = 0;
  for (size_t u = mass.size(); u-- > 0;) {
    running += mass[u];
    table.survival[u] = to_double(running);
  }
  return cache.emplace(std::make_pair(n, k), std::move(table)).first->second;
}

double normal_upper(double z) { return 0.5 * std::erfc(z / std::numbers::sqrt2); }

}  // namespace

double kolmogorov_survival(double lambda) {
  if (!(lambda > 0.0)) return 1.0;
  if (lambda < 0.2) return 1.0;
  double sum = 0.0;
  double sign = 1.0;
  for (int j = 1; j <= 200; ++j) {
    const double term = std::exp(-2.0 * j * j * lambda * lambda);
    sum += sign * term;
    if (term < 1e-17) break;
    sign = -sign;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

double cvm_limit_cdf(double x) {
  if (!(x > 0.0)) return 0.0;
  double total = 0.0;
  for (int k = 0; k < 1000; ++k) {
    const double u = std::exp(std::lgamma(k + 0.5) - std::lgamma(k + 1.0)) / (std::pow(std::numbers::pi, 1.5) *
                                                                              std::sqrt(x));
    const double y = 4.0 * k + 1.0;
    const double q = y * y / (16.0 * x);
    const double term = u * std::sqrt(y) * std::exp(-q) * boost::math::cyl_bessel_k(0.25, q);
    total += term;
    if (std::abs(term) < 1e-12) break;
  }
  return std::clamp(total, 0.0, 1.0);
}

TestResult ks_two_sample(const std::vector<double>& x, const std::vector<double>& y, double alpha) {
  if (x.empty() || y.empty()) throw InvalidArgument("Kolmogorov-Smirnov needs two non-empty samples");
  require_clean(x, "x");
  require_clean(y, "y");
  std::vector<double> xs = x;
  std::vector<double> ys = y;
  std::sort(xs.begin(), xs.end());
  std::sort(ys.begin(), ys.end());
  const long m = static_cast<long>(xs.size());
  const long n = static_cast<long>(ys.size());
  long i = 0;
  long j = 0;
  long widest = 0;  // max |i n - j m| after each tie group
  while (i < m || j < n) {
    const double t = (j >= n || (i < m && xs[static_cast<size_t>(i)] <= ys[static_cast<size_t>(j)]))
                         ? xs[static_cast<size_t>(i)]
                         : ys[static_cast<size_t>(j)];
    while (i < m && xs[static_cast<size_t>(i)] == t) ++i;
    while (j < n && ys[static_cast<size_t>(j)] == t) ++j;
    widest = std::max(widest, std::abs(i * n - j * m));
  }
  const double D = static_cast<double>(widest) / static_cast<double>(m * n);
  if (widest == 0) return baseline_result("ks-two-sample", 0.0, 1.0, Side::two_sided, "exact", alpha);
  if (m * n <= kKsExactLimit) {
    const double p = 1.0 - ks_paths_within(m, n, widest);
    return baseline_result("ks-two-sample", D, p, Side::two_sided, "exact", alpha);
  }
  const double en = std::sqrt(static_cast<double>(m) * n / static_cast<double>(m + n));
  const double p = kolmogorov_survival((en + 0.12 + 0.11 / en) * D);
  return baseline_result("ks-two-sample", D, p, Side::two_sided, "asymptotic", alpha);
}

TestResult cvm_two_sample(const std::vector<double>& x, const std::vector<double>& y, double alpha) {
  if (x.empty() || y.empty()) throw InvalidArgument("Cramer-von Mises needs two non-empty samples");
  require_clean(x, "x");
  require_clean(y, "y");
  const size_t nx = x.size();
  const size_t ny = y.size();
  const size_t N = nx + ny;
  std::vector<std::pair<double, int>> all;
  all.reserve(N);
  for (double v : x) all.emplace_back(v, 0);
  for (double v : y) all.emplace_back(v, 1);
  std::sort(all.begin(), all.end());
  // Mid-ranks for ties.
  std::vector<double> rx;
  std::vector<double> ry;
  for (size_t a = 0; a < N;) {
    size_t b = a;
    while (b < N && all[b].first == all[a].first) ++b;
    const double rank = (static_cast<double>(a + 1) + static_cast<double>(b)) / 2.0;
    for (size_t c = a; c < b; ++c) (all[c].second == 0 ? rx : ry).push_back(rank);
    a = b;
  }
  double u = 0.0;
  for (size_t i = 0; i < nx; ++i) u += nx * std::pow(rx[i] - static_cast<double>(i + 1), 2);
  for (size_t j = 0; j < ny; ++j) u += ny * std::pow(ry[j] - static_cast<double>(j + 1), 2);
  const double dnx = static_cast<double>(nx);
  const double dny = static_cast<double>(ny);
  const double dN = static_cast<double>(N);
  const double k = dnx * dny;
  const double T = u / (k * dN) - (4.0 * k - 1.0) / (6.0 * dN);
  const double et = (1.0 + 1.0 / dN) / 6.0;
  const double vt = (dN + 1.0) * (4.0 * k * dN - 3.0 * (dnx * dnx + dny * dny) - 2.0 * k) / (45.0 * dN * dN * 4.0 * k);
  const double tn = 1.0 / 6.0 + (T - et) / std::sqrt(45.0 * vt);
  const double p = tn < 0.003 ? 1.0 : 1.0 - cvm_limit_cdf(tn);
  return baseline_result("cvm-two-sample", T, p, Side::right, "asymptotic", alpha);
}

TestResult mann_whitney_counts(const std::vector<long>& counts, double alpha) {
  if (counts.size() < 2) throw InvalidArgument("Mann-Whitney needs a non-empty x sample");
  const int k = static_cast<int>(counts.size());
  long n = 0;
  long U = 0;
  for (int j = 0; j < k; ++j) {
    if (counts[static_cast<size_t>(j)] < 0) throw InvalidArgument("bin counts must be non-negative");
    n += counts[static_cast<size_t>(j)];
    U += counts[static_cast<size_t>(j)] * (k - 1 - j);
  }
  if (n == 0) {
    auto r = baseline_result("mann-whitney", 0.0, 1.0, Side::two_sided, "exact", alpha);
    r.k = k;
    return r;
  }
  TestResult r;
  if (n * static_cast<long>(k) <= kMannWhitneyExactLimit) {
    const auto& table = mann_whitney_table(static_cast<int>(n), k);
    const double p = std::min(1.0, 2.0 * std::min(table.cdf[static_cast<size_t>(U)], table.survival[static_cast<size_t>(U)]));
    r = baseline_result("mann-whitney", static_cast<double>(U), p, Side::two_sided, "exact", alpha);
  } else {
    const double m = static_cast<double>(k - 1);
    const double dn = static_cast<double>(n);
    const double mean = m * dn / 2.0;
    const double sd = std::sqrt(m * dn * (m + dn + 1.0) / 12.0);
    const double excess = std::max(0.0, std::abs(static_cast<double>(U) - mean) - 0.5);
    const double p = std::min(1.0, 2.0 * normal_upper(excess / sd));
    r = baseline_result("mann-whitney", static_cast<double>(U), p, Side::two_sided, "asymptotic", alpha);
  }
  r.k = k;
  r.n = static_cast<int>(n);
  return r;
}

TestResult mann_whitney(const std::vector<double>& x, const std::vector<double>& y, double alpha,
                        std::uint64_t seed) {
  auto r = mann_whitney_counts(two_sample_spacings(x, y, seed), alpha);
  r.seed = seed;
  return r;
}

TestResult ks_one_sample(const std::vector<double>& z, const NullCdf& null_cdf, double alpha) {
  const auto u = transformed(z, null_cdf);
  const double N = static_cast<double>(u.size());
  double D = 0.0;
  for (size_t i = 0; i < u.size(); ++i) {
    D = std::max({D, (i + 1.0) / N - u[i], u[i] - i / N});
  }
  const double sn = std::sqrt(N);
  const double p = kolmogorov_survival((sn + 0.12 + 0.11 / sn) * D);
  auto r = baseline_result("ks-one-sample", D, p, Side::two_sided, "asymptotic", alpha);
  r.k = static_cast<int>(u.size()) + 1;
  return r;
}

TestResult cvm_one_sample(const std::vector<double>& z, const NullCdf& null_cdf, double alpha) {
  const auto u = transformed(z, null_cdf);
  const double N = static_cast<double>(u.size());
  double W = 1.0 / (12.0 * N);
  for (size_t i = 0; i < u.size(); ++i) W += std::pow(u[i] - (2.0 * i + 1.0) / (2.0 * N), 2);
  const double modified = (W - 0.4 / N + 0.6 / (N * N)) * (1.0 + 1.0 / N);
  const double p = 1.0 - cvm_limit_cdf(modified);
  auto r = baseline_result("cvm-one-sample", W, p, Side::right, "asymptotic", alpha);
  r.k = static_cast<int>(u.size()) + 1;
  return r;
}

TestResult chi2_uniformity(const std::vector<double>& z, const NullCdf& null_cdf, int bins, double alpha) {
  const auto u = transformed(z, null_cdf);
  const long N = static_cast<long>(u.size());
  if (bins == 0) bins = std::max(2, static_cast<int>(std::floor(std::sqrt(static_cast<double>(N)))));
  if (bins < 2) throw InvalidArgument("chi-squared test needs at least two bins");
  std::vector<long> observed(static_cast<size_t>(bins), 0);
  for (double v : u) {
    const int cell = std::min(bins - 1, static_cast<int>(std::floor(v * bins)));
    ++observed[static_cast<size_t>(cell)];
  }
  const double expected = static_cast<double>(N) / bins;
  double chi2 = 0.0;
  for (long o : observed) chi2 += std::pow(o - expected, 2) / expected;
  const double p = boost::math::gamma_q((bins - 1) / 2.0, chi2 / 2.0);
  auto r = baseline_result("chi2-uniformity", chi2, p, Side::right, "asymptotic", alpha);
  r.k = static_cast<int>(N) + 1;
  return r;
}

}  // namespace mochis
