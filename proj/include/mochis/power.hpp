#pragma once

// Power studies: alternative samplers, seeded replicate loops, ROC curves,
// the heteroskedasticity objective for choosing (p, w), a coordinate-descent
// weight search and Bonferroni ensembles.
//
// Two-sample design: x holds k - 1 draws from F = N(0, 1), y holds n draws
// from the alternative G. One-sample design: k inter-arrival times drawn from
// the alternative are normalised to sum 1 and their first k - 1 partial sums
// form the sample, tested against the uniform null.

#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "mochis/stattest.hpp"

namespace mochis {

enum class Design { one_sample, two_sample };

struct AlternativeSpec {
  enum class Family { null, scale, location, location_scale, mixture, erlang, hyperexp, spiked };

  Family family = Family::null;
  double mu = 0.0;
  double sigma = 1.0;
  int shape = 1;               // erlang
  double cv2 = 1.0;            // hyperexp, squared coefficient of variation >= 1
  double spike_minus = 1.0;    // spiked: mean of the k - 1 ordinary gaps
  double spike_plus = 1.0;     // spiked: mean of the single spike
  std::vector<double> mixture_weights;
  std::vector<AlternativeSpec> components;

  // null | scale:s | loc:m | locscale:m,s | erlang:r | hyperexp:c | spiked:a,b
  // | mix:w1@<alt>;w2@<alt>...
  static AlternativeSpec parse(std::string_view text);
  std::string describe() const;
  // True when the family can generate data for the design.
  bool supports(Design design) const;

  friend bool operator==(const AlternativeSpec&, const AlternativeSpec&) = default;
};

struct Sample {
  std::vector<double> x;  // two-sample reference (or the one-sample data)
  std::vector<double> y;  // two-sample comparison, empty for one-sample
};

Sample draw_sample(Design design, const AlternativeSpec& alt, int k, int n, Rng& rng);

enum class TestKind { spacing, ks, cvm, mann_whitney, chi2, ensemble };

struct TestConfig {
  TestKind kind = TestKind::spacing;
  int p = 2;
  WeightVector weights;  // empty means 1_k
  Side side = Side::right;
  Method method = Method::automatic;
  int M = 0;
  int chi2_bins = 0;
  std::vector<TestConfig> members;  // ensemble members, each run at alpha / |members|

  // "spacing", "ks", "cvm", "mw", "chi2"; baseline options keep defaults.
  static TestConfig parse(std::string_view name);
  std::string name() const;
};

// One test on one data set; seed breaks ties in spacing-based tests.
TestResult run_test(const TestConfig& config, Design design, const Sample& sample, double alpha, std::uint64_t seed);

// Bonferroni ensemble: p = min(1, |configs| min_i p_i).
TestResult ensemble_test(const std::vector<TestConfig>& configs, const std::vector<double>& x,
                         const std::vector<double>& y, double alpha, std::uint64_t seed);

// p-values[c][r] of config c on replicate r. Replicate r uses
// Rng(derive_seed(seed, r)) for data and ties, and every config sees the same
// data. Threads are capped by MOCHIS_THREADS; output does not depend on them.
std::vector<std::vector<double>> simulate_pvalues(const std::vector<TestConfig>& configs, Design design,
                                                  const AlternativeSpec& alt, int k, int n, long replicates,
                                                  std::uint64_t seed);

struct PowerEstimate {
  double power = 0.0;
  double standard_error = 0.0;
  double alpha = 0.05;
  long replicates = 0;
  std::uint64_t seed = 0;
};

PowerEstimate power_from_pvalues(const std::vector<double>& p_values, double alpha, std::uint64_t seed);
PowerEstimate estimate_power(const TestConfig& config, Design design, const AlternativeSpec& alt, int k, int n,
                             long replicates, double alpha, std::uint64_t seed);

// Power at each alpha, computed from one shared set of p-values.
std::vector<PowerEstimate> roc_from_pvalues(const std::vector<double>& p_values, const std::vector<double>& alphas,
                                            std::uint64_t seed);
std::vector<PowerEstimate> roc_curve(const TestConfig& config, Design design, const AlternativeSpec& alt, int k,
                                     int n, long replicates, const std::vector<double>& alphas, std::uint64_t seed);

// Null probability that ||S_{n,k}||^p_{p,w} falls outside the interval spanned
// by the limits of the statistic as the scale ratio goes to 0 and to infinity,
// averaged over N_0 ~ Bin(k - 1, F0) (bin of the collapsed y sample) and
// N_inf ~ Bin(n, F0) (y values escaping to -inf).
BigRational heteroskedastic_objective(int p, const WeightVector& w, int n, int k, const BigRational& F0,
                                      long pmf_cap = 100000000000L);

enum class WeightTemplate { symmetric, monotone, free };

struct WeightSearchConfig {
  int k = 10;
  WeightTemplate shape = WeightTemplate::symmetric;
  // Allowed coordinate values; empty means {0, 1/10, ..., 1}.
  std::vector<BigRational> values;
  std::vector<WeightVector> starts;  // extra starting points
  int random_starts = 3;
  int max_sweeps = 25;
};

struct SearchResult {
  int p = 1;
  WeightVector weights;
  double objective = 0.0;
  long evaluations = 0;
};

using Objective = std::function<double(int p, const WeightVector& w)>;

// Coordinate descent over the template from seeded random and supplied
// starts, for every p in p_grid; degenerate (constant) statistics are skipped.
SearchResult search_parameters(const Objective& objective, const std::vector<int>& p_grid,
                               const WeightSearchConfig& config, std::uint64_t seed);

// Worker count for replicate loops: MOCHIS_THREADS if set, else the hardware.
int worker_count();

}  // namespace mochis
