#pragma once

// Ground truth for small instances: exhaustive enumeration of D_{n,k}, the
// exact pmf recursion over bins, the Mann-Whitney count recursion, and seeded
// samplers for Monte-Carlo cross-checks.

#include <cstdint>
#include <functional>
#include <random>
#include <utility>
#include <vector>

#include "mochis/moments.hpp"
#include "mochis/numeric.hpp"

namespace mochis {

using Composition = std::vector<long>;

// Calls visit once for every weak composition of n into k parts, in
// decreasing lexicographic order: (n,0,..,0) first, (0,..,0,n) last.
void for_each_composition(int n, int k, const std::function<void(const Composition&)>& visit);
std::vector<Composition> enumerate_compositions(int n, int k);

// Exact finite distribution; atoms sorted by value, probabilities positive and
// summing to exactly 1.
class Pmf {
 public:
  struct Atom {
    BigRational value;
    BigRational probability;
  };

  Pmf() = default;
  // Merges duplicate values, drops zero masses and checks the total.
  static Pmf from_weights(std::vector<std::pair<BigRational, BigRational>> weighted);

  const std::vector<Atom>& atoms() const { return atoms_; }
  size_t size() const { return atoms_.size(); }

  BigRational total() const;
  BigRational probability_of(const BigRational& value) const;
  BigRational cdf(const BigRational& x) const;             // P(X <= x)
  BigRational survival_at_least(const BigRational& x) const;  // P(X >= x)
  BigRational moment(int m) const;                         // E X^m
  // Smallest gap between consecutive atoms; 0 for a single atom.
  BigRational mesh() const;

  friend bool operator==(const Pmf&, const Pmf&);

 private:
  std::vector<Atom> atoms_;
};

bool operator==(const Pmf::Atom& a, const Pmf::Atom& b);

constexpr long kDefaultPmfCap = 1000000;

// Pmf of the statistic by listing every composition.
Pmf enumeration_pmf(const StatisticSpec& spec, long cap = kDefaultPmfCap);

// Pmf of the statistic by a recursion over bins indexed by (balls used,
// integer-scaled partial value). Throws SizeError when binom(n+k-1,k-1) > cap.
Pmf exact_pmf(const StatisticSpec& spec, long cap = kDefaultPmfCap);

// Pmf of sum_j (k-j) S_j via N_{n,k}(u) = N_{n-1,k}(u) + N_{n,k-1}(u-n).
Pmf mann_whitney_pmf(int n, int k);

// std::mt19937_64 with hand-rolled variates; the engine is fully specified
// by the standard, the library distributions are not.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed), engine_(seed) {}

  std::uint64_t seed() const { return seed_; }
  std::uint64_t next_u64();
  double uniform();                       // [0, 1), 53-bit
  double uniform_open();                  // (0, 1)
  std::uint64_t below(std::uint64_t bound);  // uniform on {0, ..., bound-1}
  double normal();
  double exponential(double rate = 1.0);

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

// Independent seed for replicate `index` of a run seeded with `seed`.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index);

Composition sample_composition(int n, int k, Rng& rng);
std::vector<double> sample_spacings(int k, Rng& rng);

// Floating-point value of sum_j w_j s_j^p.
double statistic_value_double(const StatisticSpec& spec, const std::vector<double>& parts);

struct MonteCarloMoments {
  std::vector<double> values;           // empirical E[(stat/scale)^m]
  std::vector<double> standard_errors;  // per-moment standard error
  long replicates = 0;
};

MonteCarloMoments monte_carlo_moments(const StatisticSpec& spec, int M, long reps, Rng& rng);

}  // namespace mochis
