#pragma once

// Hypothesis tests built on spacing statistics.
//
// two-sample: the n values of y are dropped into the k = |x| + 1 bins cut by
//   the order statistics of x; under H0 the bin counts are uniform on D_{n,k}.
// one-sample: the k = N + 1 gaps of 0 <= F(z_(1)) <= ... <= F(z_(N)) <= 1 are
//   uniform on the simplex under H0.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "mochis/moments.hpp"
#include "mochis/oracle.hpp"
#include "mochis/reconstruct.hpp"

namespace mochis {

enum class Side { left, right, two_sided };
enum class Method { automatic, exact_moments, clt, oracle_pmf };

std::string to_string(Side side);
std::string to_string(Method method);
Side parse_side(std::string_view text);
Method parse_method(std::string_view text);

struct TestResult {
  std::string test;  // e.g. "spacing-two-sample", "ks-two-sample"
  double raw_statistic = 0.0;
  // Statistic divided by its scale; absent for baselines without a [0,1] range.
  std::optional<double> normalized_statistic;
  // Exact rational value when the statistic is exactly representable.
  std::optional<std::string> exact_statistic;
  double p_value = 1.0;
  Side side = Side::right;
  std::string method;  // exact-moments | clt | oracle-pmf | exact | asymptotic
  int moments_used = 0;
  double certified_error = 0.0;
  std::uint64_t seed = 0;
  double alpha = 0.05;
  bool reject = false;
  int k = 0;
  int n = 0;
  std::vector<std::string> warnings;

  friend bool operator==(const TestResult&, const TestResult&) = default;
};

// Combines one-sided tail probabilities under the chosen alternative.
double combine_tails(double left, double right, Side side);

// ---- spacing construction -------------------------------------------------

// Counts of y between consecutive order statistics of x (with sentinels at
// -inf and +inf). Equal values are ordered by a permutation drawn from seed.
std::vector<long> two_sample_spacings(const std::vector<double>& x, const std::vector<double>& y,
                                      std::uint64_t seed);

class NullCdf {
 public:
  enum class Family { uniform, normal, exponential, table };

  static NullCdf uniform();
  static NullCdf normal(double mu, double sigma);
  static NullCdf exponential(double rate);
  // Piecewise-linear CDF through (x_i, F_i); x strictly increasing, F
  // non-decreasing from 0 to 1.
  static NullCdf table(std::vector<std::pair<double, double>> points);
  // "uniform", "normal:mu,sigma", "exp:lambda" or "table:<path>" (two columns).
  static NullCdf parse(std::string_view text);

  // Throws InvalidArgument for points outside the support.
  double operator()(double z) const;
  double quantile(double u) const;
  Family family() const { return family_; }
  std::string describe() const;

 private:
  Family family_ = Family::uniform;
  double a_ = 0.0;
  double b_ = 1.0;
  std::vector<std::pair<double, double>> points_;
};

// k = N + 1 gaps of the transformed, sorted sample padded with 0 and 1.
std::vector<double> one_sample_spacings(const std::vector<double>& z, const NullCdf& null_cdf);

// ---- null distributions ---------------------------------------------------

constexpr int kDefaultTwoSampleMoments = 200;
constexpr int kDefaultOneSampleMoments = 400;

// Cached reconstruction of the null law; thread-safe, shared across calls.
const CdfEstimate& null_cdf_estimate(const StatisticSpec& spec, int M);
const Pmf& null_pmf(const StatisticSpec& spec, long cap = kDefaultPmfCap);

// ---- tests ----------------------------------------------------------------

struct TwoSampleOptions {
  int p = 2;
  WeightVector weights;  // empty means 1_k
  Side side = Side::right;
  Method method = Method::automatic;
  int M = 0;  // 0 selects kDefaultTwoSampleMoments
  double alpha = 0.05;
  std::uint64_t seed = 0;
  long pmf_cap = kDefaultPmfCap;
};

struct OneSampleOptions {
  int p = 2;
  WeightVector weights;  // empty means 1_k
  Side side = Side::right;
  int M = 0;  // 0 selects kDefaultOneSampleMoments
  double alpha = 0.05;
};

// Method actually used by the automatic selection for this statistic.
Method select_method(const StatisticSpec& spec, int M, long pmf_cap = kDefaultPmfCap);

TestResult two_sample_test(const std::vector<double>& x, const std::vector<double>& y,
                           const TwoSampleOptions& options);
// Same test on precomputed bin counts.
TestResult two_sample_test_counts(const std::vector<long>& counts, const TwoSampleOptions& options);

TestResult one_sample_test(const std::vector<double>& z, const NullCdf& null_cdf, const OneSampleOptions& options);
// Same test on precomputed gaps (summing to 1).
TestResult one_sample_test_gaps(const std::vector<double>& gaps, const OneSampleOptions& options);

// ---- normal approximation ---------------------------------------------------

struct CltStandardization {
  double mu = 0.0;     // k^{-1} E ||S||_{p,1}^p
  double sigma = 0.0;  // sqrt(k^{-1} Var ||S||_{p,1}^p)
  double weight_sum = 0.0;
  double weight_square_sum = 0.0;

  double z(double statistic) const;
};

// Requires strictly positive weights.
CltStandardization clt_standardization(const StatisticSpec& spec);
double clt_pvalue(const StatisticSpec& spec, double statistic, Side side);

// Reads whitespace/newline separated decimals; errors name the offending line.
std::vector<double> read_sample(const std::string& path);
std::vector<double> parse_sample(std::string_view text, std::string_view source = "<input>");

}  // namespace mochis
