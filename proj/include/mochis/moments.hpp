#pragma once

// Exact moment sequences of generalized spacing statistics
//
//   discrete:    ||S_{n,k}||^p_{p,w} = sum_j w_j S_j^p,  S uniform on weak compositions of n into k parts
//   continuous:  ||S_k||^p_{p,w}     = sum_j w_j S_j^p,  S uniform on the simplex (spacings of k-1 uniforms)
//
// Moments are returned for the statistic divided by its scale (max|w| n^p,
// resp. max|w|), so that with non-negative weights they describe a law on [0,1].

#include <string>
#include <string_view>
#include <vector>

#include "mochis/numeric.hpp"
#include "mochis/poly.hpp"

namespace mochis {

struct WeightVector {
  std::vector<BigRational> entries;

  WeightVector() = default;
  explicit WeightVector(std::vector<BigRational> values) : entries(std::move(values)) {}

  static WeightVector ones(int k);
  static WeightVector from_integers(const std::vector<long>& values);
  // Comma-separated list of rationals/decimals, e.g. "1,1/2,0.25".
  static WeightVector parse(std::string_view csv);

  int size() const { return static_cast<int>(entries.size()); }
  const BigRational& operator[](int i) const { return entries[static_cast<size_t>(i)]; }

  BigRational max_abs() const;
  bool all_zero() const;
  bool has_negative() const;
  bool all_equal() const;
  // W_w: how many entries are exactly 1.
  int count_unit() const;

  std::string to_string() const;

  friend bool operator==(const WeightVector&, const WeightVector&) = default;
};

enum class Mode { discrete, continuous };

struct StatisticSpec {
  Mode mode = Mode::continuous;
  int n = 0;  // number of balls, discrete mode only
  int p = 2;
  WeightVector weights;
  // Raw moment queries may use signed weights; anything that reconstructs a
  // distribution on [0,1] requires non-negative ones.
  bool allow_negative_weights = false;

  static StatisticSpec discrete(int n, int p, WeightVector weights);
  static StatisticSpec continuous(int p, WeightVector weights);

  int k() const { return weights.size(); }
  bool is_discrete() const { return mode == Mode::discrete; }

  // Throws InvalidArgument describing the first violated constraint.
  void validate() const;

  std::string describe() const;

  friend bool operator==(const StatisticSpec&, const StatisticSpec&) = default;
};

// True when the statistic is almost surely constant under the null.
bool is_degenerate(const StatisticSpec& spec);

struct MomentSequence {
  StatisticSpec spec;
  BigRational scale;
  // values[m] = E[(statistic / scale)^m], m = 0..M
  std::vector<BigRational> values;

  int max_order() const { return static_cast<int>(values.size()) - 1; }
  // Unnormalised moment E[statistic^m].
  BigRational raw(int m) const;
};

// max|w| n^p (discrete) or max|w| (continuous); max|w| when n = 0.
BigRational statistic_scale(const StatisticSpec& spec);

// Per-bin factor G(x, w y) = 1 + sum_{s>=1} sum_{t>=0} s^{pt} (w y)^t / t! x^s,
// truncated at (n, M). Includes the empty-bin term 0^0 = 1.
TruncatedPoly2<BigRational> bin_series(int n, int M, int p, const BigRational& w);

MomentSequence discrete_moments(const StatisticSpec& spec, int M);
MomentSequence continuous_moments(const StatisticSpec& spec, int M);
// Dispatches on spec.mode.
MomentSequence compute_moments(const StatisticSpec& spec, int M);

// lim_{m->inf} m^{k-1} E(stat^m) = (k-1)! W_w / p^{k-1} for the continuous
// statistic with p >= 2, k >= 2 and weights in [0,1].
BigRational moment_decay_limit(const StatisticSpec& spec);

// Exact value of sum_j w_j s_j^p for one configuration.
BigRational statistic_value(const StatisticSpec& spec, const std::vector<long>& parts);

}  // namespace mochis
