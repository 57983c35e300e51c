#include "mochis/stattest.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <sstream>

#include <boost/math/distributions/normal.hpp>

#include "mochis/error.hpp"

namespace mochis {

std::string to_string(Side side) {
  switch (side) {
    case Side::left:
      return "left";
    case Side::right:
      return "right";
    case Side::two_sided:
      return "two-sided";
  }
  return "right";
}

std::string to_string(Method method) {
  switch (method) {
    case Method::automatic:
      return "auto";
    case Method::exact_moments:
      return "exact-moments";
    case Method::clt:
      return "clt";
    case Method::oracle_pmf:
      return "oracle-pmf";
  }
  return "auto";
}

Side parse_side(std::string_view text) {
  if (text == "left") return Side::left;
  if (text == "right") return Side::right;
  if (text == "two-sided" || text == "two" || text == "both") return Side::two_sided;
  throw InvalidArgument("unknown side '" + std::string(text) + "' (expected left, right or two-sided)");
}

Method parse_method(std::string_view text) {
  if (text == "auto") return Method::automatic;
  if (text == "exact-moments") return Method::exact_moments;
  if (text == "clt") return Method::clt;
  if (text == "oracle-pmf") return Method::oracle_pmf;
  throw InvalidArgument("unknown method '" + std::string(text) + "' (expected auto, exact-moments, clt or oracle-pmf)");
}

double combine_tails(double left, double right, Side side) {
  left = std::clamp(left, 0.0, 1.0);
  right = std::clamp(right, 0.0, 1.0);
  switch (side) {
    case Side::left:
      return left;
    case Side::right:
      return right;
    case Side::two_sided:
      return std::min(1.0, 2.0 * std::min(left, right));
  }
  return right;
}

// ---- spacing construction -------------------------------------------------

std::vector<long> two_sample_spacings(const std::vector<double>& x, const std::vector<double>& y,
                                      std::uint64_t seed) {
  if (x.empty()) throw InvalidArgument("two-sample spacings need at least one x value");
  struct Item {
    double value;
    std::uint64_t key;
    std::size_t index;
    bool is_x;
  };
  Rng rng(seed);
  std::vector<Item> items;
  items.reserve(x.size() + y.size());
  for (double v : x) {
    if (std::isnan(v)) throw InvalidArgument("x contains NaN");
    items.push_back({v, rng.next_u64(), items.size(), true});
  }
  for (double v : y) {
    if (std::isnan(v)) throw InvalidArgument("y contains NaN");
    items.push_back({v, rng.next_u64(), items.size(), false});
  }
  std::sort(items.begin(), items.end(), [](const Item& a, const Item& b) {
    if (a.value != b.value) return a.value < b.value;
    if (a.key != b.key) return a.key < b.key;
    return a.index < b.index;
  });
  std::vector<long> counts(x.size() + 1, 0);
  std::size_t bin = 0;
  for (const auto& item : items) {
    if (item.is_x) {
      ++bin;
    } else {
      ++counts[bin];
    }
  }
  return counts;
}

namespace {

double parse_double(std::string_view token, const std::string& context) {
  std::string s(token);
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size() || errno == ERANGE || !std::isfinite(v)) {
    throw InvalidArgument(context + ": not a finite number: '" + s + "'");
  }
  return v;
}

std::vector<double> parse_number_list(std::string_view text, const std::string& context) {
  std::vector<double> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t comma = text.find(',', start);
    if (comma == std::string_view::npos) comma = text.size();
    out.push_back(parse_double(text.substr(start, comma - start), context));
    start = comma + 1;
  }
  return out;
}

}  // namespace

NullCdf NullCdf::uniform() { return NullCdf{}; }

NullCdf NullCdf::normal(double mu, double sigma) {
  if (!std::isfinite(mu) || !(sigma > 0) || !std::isfinite(sigma)) {
    throw InvalidArgument("normal null needs a finite mean and a positive standard deviation");
  }
  NullCdf f;
  f.family_ = Family::normal;
  f.a_ = mu;
  f.b_ = sigma;
  return f;
}

NullCdf NullCdf::exponential(double rate) {
  if (!(rate > 0) || !std::isfinite(rate)) throw InvalidArgument("exponential null needs a positive rate");
  NullCdf f;
  f.family_ = Family::exponential;
  f.a_ = rate;
  return f;
}

NullCdf NullCdf::table(std::vector<std::pair<double, double>> points) {
  if (points.size() < 2) throw InvalidArgument("a CDF table needs at least two points");
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto& [x, F] = points[i];
    if (!std::isfinite(x) || !(F >= 0.0 && F <= 1.0)) throw InvalidArgument("CDF table values must lie in [0,1]");
    if (i > 0 && !(x > points[i - 1].first)) throw InvalidArgument("CDF table abscissae must increase strictly");
    if (i > 0 && F < points[i - 1].second) throw InvalidArgument("CDF table must be non-decreasing");
  }
  if (points.front().second != 0.0 || points.back().second != 1.0) {
    throw InvalidArgument("CDF table must start at 0 and end at 1");
  }
  NullCdf f;
  f.family_ = Family::table;
  f.points_ = std::move(points);
  return f;
}

NullCdf NullCdf::parse(std::string_view text) {
  const std::string context = "null spec '" + std::string(text) + "'";
  if (text == "uniform") return uniform();
  const auto colon = text.find(':');
  const std::string_view family = text.substr(0, colon);
  const std::string_view args = colon == std::string_view::npos ? std::string_view{} : text.substr(colon + 1);
  if (family == "normal") {
    if (args.empty()) return normal(0.0, 1.0);
    const auto v = parse_number_list(args, context);
    if (v.size() != 2) throw InvalidArgument(context + ": expected normal:mu,sigma");
    return normal(v[0], v[1]);
  }
  if (family == "exp") {
    if (args.empty()) return exponential(1.0);
    const auto v = parse_number_list(args, context);
    if (v.size() != 1) throw InvalidArgument(context + ": expected exp:lambda");
    return exponential(v[0]);
  }
  if (family == "table") {
    const std::string path(args);
    std::ifstream in(path);
    if (!in) throw InvalidArgument("cannot open CDF table '" + path + "'");
    std::vector<std::pair<double, double>> points;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      std::istringstream fields(line);
      std::string xs;
      std::string fs;
      if (!(fields >> xs)) continue;
      const std::string where = path + ":" + std::to_string(line_no);
      if (!(fields >> fs)) throw InvalidArgument(where + ": expected two columns");
      points.emplace_back(parse_double(xs, where), parse_double(fs, where));
    }
    return table(std::move(points));
  }
  throw InvalidArgument(context + ": expected uniform, normal:mu,sigma, exp:lambda or table:<path>");
}

double NullCdf::operator()(double z) const {
  if (std::isnan(z)) throw InvalidArgument("sample contains NaN");
  switch (family_) {
    case Family::uniform:
      if (z < 0.0 || z > 1.0) throw InvalidArgument("value " + std::to_string(z) + " outside the uniform support [0,1]");
      return z;
    case Family::normal:
      return 0.5 * std::erfc(-(z - a_) / (b_ * std::sqrt(2.0)));
    case Family::exponential:
      if (z < 0.0) throw InvalidArgument("value " + std::to_string(z) + " outside the exponential support");
      return -std::expm1(-a_ * z);
    case Family::table: {
      if (z < points_.front().first || z > points_.back().first) {
        throw InvalidArgument("value " + std::to_string(z) + " outside the CDF table range");
      }
      auto hi = std::lower_bound(points_.begin(), points_.end(), z,
                                 [](const auto& p, double v) { return p.first < v; });
      if (hi->first == z) return hi->second;
      auto lo = hi - 1;
      const double t = (z - lo->first) / (hi->first - lo->first);
      return lo->second + t * (hi->second - lo->second);
    }
  }
  return z;
}

double NullCdf::quantile(double u) const {
  if (!(u >= 0.0 && u <= 1.0)) throw InvalidArgument("quantile level must lie in [0,1]");
  switch (family_) {
    case Family::uniform:
      return u;
    case Family::normal:
      if (u == 0.0 || u == 1.0) throw InvalidArgument("normal quantile at 0 or 1 is infinite");
      return boost::math::quantile(boost::math::normal_distribution<double>(a_, b_), u);
    case Family::exponential:
      if (u == 1.0) throw InvalidArgument("exponential quantile at 1 is infinite");
      return -std::log1p(-u) / a_;
    case Family::table: {
      auto hi = std::lower_bound(points_.begin(), points_.end(), u,
                                 [](const auto& p, double v) { return p.second < v; });
      if (hi == points_.begin()) return hi->first;
      auto lo = hi - 1;
      if (hi->second == lo->second) return lo->first;
      const double t = (u - lo->second) / (hi->second - lo->second);
      return lo->first + t * (hi->first - lo->first);
    }
  }
  return u;
}

std::string NullCdf::describe() const {
  std::ostringstream os;
  os.precision(17);
  switch (family_) {
    case Family::uniform:
      return "uniform";
    case Family::normal:
      os << "normal:" << a_ << "," << b_;
      return os.str();
    case Family::exponential:
      os << "exp:" << a_;
      return os.str();
    case Family::table:
      os << "table(" << points_.size() << " points)";
      return os.str();
  }
  return "uniform";
}

std::vector<double> one_sample_spacings(const std::vector<double>& z, const NullCdf& null_cdf) {
  if (z.empty()) throw InvalidArgument("one-sample spacings need at least one observation");
  std::vector<double> u;
  u.reserve(z.size());
  for (double v : z) u.push_back(null_cdf(v));
  std::sort(u.begin(), u.end());
  std::vector<double> gaps;
  gaps.reserve(u.size() + 1);
  double prev = 0.0;
  for (double v : u) {
    gaps.push_back(v - prev);
    prev = v;
  }
  gaps.push_back(1.0 - prev);
  return gaps;
}

// ---- null distributions ---------------------------------------------------

namespace {

template <class T>
class Cache {
 public:
  template <class Make>
  const T& get(const std::string& key, Make&& make) {
    {
      std::lock_guard<std::mutex> lock(mutex_);
      auto it = entries_.find(key);
      if (it != entries_.end()) return *it->second;
    }
    auto value = std::make_unique<T>(make());
    std::lock_guard<std::mutex> lock(mutex_);
    auto [it, inserted] = entries_.emplace(key, std::move(value));
    return *it->second;
  }

 private:
  std::mutex mutex_;
  std::map<std::string, std::unique_ptr<T>> entries_;
};

Cache<CdfEstimate>& cdf_cache() {
  static Cache<CdfEstimate> cache;
  return cache;
}

Cache<Pmf>& pmf_cache() {
  static Cache<Pmf> cache;
  return cache;
}

Cache<CltStandardization>& clt_cache() {
  static Cache<CltStandardization> cache;
  return cache;
}

WeightVector resolve_weights(const WeightVector& weights, int k) {
  if (weights.size() == 0) return WeightVector::ones(k);
  if (weights.size() != k) {
    throw InvalidArgument("weights have length " + std::to_string(weights.size()) + " but the statistic has k = " +
                          std::to_string(k) + " bins");
  }
  return weights;
}

// Conservative moment workload limit for the exact-moments path.
constexpr double kMomentWorkload = 4.0e8;

}  // namespace

const CdfEstimate& null_cdf_estimate(const StatisticSpec& spec, int M) {
  return cdf_cache().get(spec.describe() + "|M=" + std::to_string(M),
                         [&] { return reconstruct_cdf(compute_moments(spec, M), M); });
}

const Pmf& null_pmf(const StatisticSpec& spec, long cap) {
  const BigInt size = binomial(spec.n + spec.k() - 1, spec.k() - 1);
  if (size > cap) {
    throw SizeError("oracle pmf needs " + to_string(size) + " compositions, above the cap of " + std::to_string(cap));
  }
  return pmf_cache().get(spec.describe(), [&] { return exact_pmf(spec, cap); });
}

Method select_method(const StatisticSpec& spec, int M, long pmf_cap) {
  if (binomial(spec.n + spec.k() - 1, spec.k() - 1) <= pmf_cap) return Method::oracle_pmf;
  const double workload = std::pow(spec.n + 1.0, 2) * std::pow(M + 1.0, 2);
  if (workload <= kMomentWorkload) return Method::exact_moments;
  return Method::clt;
}

// ---- tests ----------------------------------------------------------------

TestResult two_sample_test(const std::vector<double>& x, const std::vector<double>& y,
                           const TwoSampleOptions& options) {
  return two_sample_test_counts(two_sample_spacings(x, y, options.seed), options);
}

TestResult two_sample_test_counts(const std::vector<long>& counts, const TwoSampleOptions& options) {
  if (counts.empty()) throw InvalidArgument("two-sample test needs k >= 1 bins");
  if (!(options.alpha > 0.0 && options.alpha < 1.0)) throw InvalidArgument("alpha must lie in (0, 1)");
  const int k = static_cast<int>(counts.size());
  long n = 0;
  for (long c : counts) {
    if (c < 0) throw InvalidArgument("bin counts must be non-negative");
    n += c;
  }
  auto spec = StatisticSpec::discrete(static_cast<int>(n), options.p, resolve_weights(options.weights, k));
  spec.validate();
  const int M = options.M > 0 ? options.M : kDefaultTwoSampleMoments;

  TestResult r;
  r.test = "spacing-two-sample";
  r.side = options.side;
  r.alpha = options.alpha;
  r.seed = options.seed;
  r.k = k;
  r.n = static_cast<int>(n);
  const BigRational stat = statistic_value(spec, counts);
  const BigRational scale = statistic_scale(spec);
  const BigRational normalized = stat / scale;
  r.raw_statistic = to_double(stat);
  r.normalized_statistic = to_double(normalized);
  r.exact_statistic = to_string(stat);

  Method method = options.method == Method::automatic ? select_method(spec, M, options.pmf_cap) : options.method;
  if (is_degenerate(spec)) {
    r.method = to_string(Method::oracle_pmf);
    r.p_value = 1.0;
    r.warnings.push_back("statistic is constant under the null; p-value 1 by convention");
    r.reject = false;
    return r;
  }
  r.method = to_string(method);

  double left = 1.0;
  double right = 1.0;
  switch (method) {
    case Method::oracle_pmf: {
      const Pmf& pmf = null_pmf(spec, options.pmf_cap);
      left = to_double(pmf.cdf(stat));
      right = to_double(pmf.survival_at_least(stat));
      r.certified_error = 0.0;
      break;
    }
    case Method::exact_moments: {
      const CdfEstimate& est = null_cdf_estimate(spec, M);
      // Evaluate half a lattice step away from the observed value, off the support.
      const BigRational eps = est.lattice_step() / 2;
      left = est.cdf(normalized + eps);
      right = est.at_least(normalized - eps);
      r.moments_used = M;
      r.certified_error = est.error_bound();
      break;
    }
    case Method::clt: {
      const double z = clt_standardization(spec).z(r.raw_statistic);
      left = 0.5 * std::erfc(-z / std::sqrt(2.0));
      right = 0.5 * std::erfc(z / std::sqrt(2.0));
      r.certified_error = 1.0;
      if (k < 20) r.warnings.push_back("normal approximation requested with k < 20");
      break;
    }
    case Method::automatic:
      throw InvariantViolation("method selection left 'auto' unresolved");
  }
  r.p_value = combine_tails(left, right, options.side);
  r.reject = r.p_value <= options.alpha;
  return r;
}

TestResult one_sample_test(const std::vector<double>& z, const NullCdf& null_cdf, const OneSampleOptions& options) {
  return one_sample_test_gaps(one_sample_spacings(z, null_cdf), options);
}

TestResult one_sample_test_gaps(const std::vector<double>& gaps, const OneSampleOptions& options) {
  if (gaps.size() < 2) throw InvalidArgument("one-sample test needs at least one observation (k >= 2)");
  if (!(options.alpha > 0.0 && options.alpha < 1.0)) throw InvalidArgument("alpha must lie in (0, 1)");
  double total = 0.0;
  for (double g : gaps) {
    if (!(g >= 0.0)) throw InvalidArgument("gaps must be non-negative");
    total += g;
  }
  if (std::abs(total - 1.0) > 1e-9) throw InvalidArgument("gaps must sum to 1");
  const int k = static_cast<int>(gaps.size());
  auto spec = StatisticSpec::continuous(options.p, resolve_weights(options.weights, k));
  spec.validate();
  const int M = options.M > 0 ? options.M : kDefaultOneSampleMoments;

  TestResult r;
  r.test = "spacing-one-sample";
  r.side = options.side;
  r.alpha = options.alpha;
  r.k = k;
  r.n = k - 1;
  r.raw_statistic = statistic_value_double(spec, gaps);
  const double scale = to_double(statistic_scale(spec));
  const double normalized = std::clamp(r.raw_statistic / scale, 0.0, 1.0);
  r.normalized_statistic = normalized;
  r.method = to_string(Method::exact_moments);
  if (is_degenerate(spec)) {
    r.p_value = 1.0;
    r.warnings.push_back("statistic is constant under the null; p-value 1 by convention");
    return r;
  }
  if (const auto exact = single_gap_cdf(spec)) {
    const double F = (*exact)(normalized);
    r.method = "exact";
    r.certified_error = 0.0;
    r.p_value = combine_tails(F, 1.0 - F, options.side);
    r.reject = r.p_value <= options.alpha;
    return r;
  }
  const CdfEstimate& est = null_cdf_estimate(spec, M);
  const BigRational s(normalized);
  r.moments_used = M;
  r.certified_error = est.error_bound();
  r.p_value = combine_tails(est.cdf(s), est.at_least(s), options.side);
  r.reject = r.p_value <= options.alpha;
  return r;
}

// ---- normal approximation ---------------------------------------------------

double CltStandardization::z(double statistic) const {
  return (statistic - mu * weight_sum) / (sigma * std::sqrt(weight_square_sum));
}

CltStandardization clt_standardization(const StatisticSpec& spec) {
  if (spec.mode != Mode::discrete) throw InvalidArgument("the normal approximation applies to discrete statistics");
  for (const auto& w : spec.weights.entries) {
    if (w <= 0) throw InvalidArgument("the normal approximation needs strictly positive weights");
  }
  const int k = spec.k();
  const auto& base = clt_cache().get("n=" + std::to_string(spec.n) + ",k=" + std::to_string(k) + ",p=" +
                                         std::to_string(spec.p),
                                     [&] {
                                       const auto seq = discrete_moments(
                                           StatisticSpec::discrete(spec.n, spec.p, WeightVector::ones(k)), 2);
                                       const BigRational mean = seq.raw(1);
                                       const BigRational var = seq.raw(2) - mean * mean;
                                       CltStandardization s;
                                       s.mu = to_double(mean / k);
                                       s.sigma = std::sqrt(to_double(var / k));
                                       return s;
                                     });
  if (!(base.sigma > 0)) throw InvalidArgument("statistic has zero variance under the null");
  CltStandardization out = base;
  BigRational sum = 0;
  BigRational sum_sq = 0;
  for (const auto& w : spec.weights.entries) {
    sum += w;
    sum_sq += w * w;
  }
  out.weight_sum = to_double(sum);
  out.weight_square_sum = to_double(sum_sq);
  return out;
}

double clt_pvalue(const StatisticSpec& spec, double statistic, Side side) {
  const double z = clt_standardization(spec).z(statistic);
  return combine_tails(0.5 * std::erfc(-z / std::sqrt(2.0)), 0.5 * std::erfc(z / std::sqrt(2.0)), side);
}

// ---- sample input -----------------------------------------------------------

std::vector<double> parse_sample(std::string_view text, std::string_view source) {
  std::vector<double> out;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    ++line_no;
    std::istringstream fields{std::string(text.substr(start, end - start))};
    std::string token;
    while (fields >> token) {
      out.push_back(parse_double(token, std::string(source) + ":" + std::to_string(line_no)));
    }
    start = end + 1;
  }
  return out;
}

std::vector<double> read_sample(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidArgument("cannot open sample file '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_sample(buffer.str(), path);
}

}  // namespace mochis
