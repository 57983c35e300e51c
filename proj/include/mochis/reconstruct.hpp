#pragma once

// Distribution recovery from exact moments on [0,1].
//
// With M moments the estimator is the law of J/M where J | X ~ Binomial(M, X):
//   c_j = binom(M, j) (-1)^{M-j} (delta^{M-j} mu)_j,   F(x) = sum_{j <= Mx} c_j.
// Differences are formed in exact integers over a common denominator, so the
// only rounding happens when a finished cumulative sum is converted to double.

#include <functional>
#include <optional>
#include <vector>

#include "mochis/moments.hpp"
#include "mochis/numeric.hpp"

namespace mochis {

enum class DistributionKind { continuous, discrete };

struct ContinuousProfile {
  double f_sup = 10.0;      // sup of the density
  double fprime_sup = 0.0;  // sup of |density'|
};

struct DiscreteProfile {
  long support_size = 2;
  double mesh = 1.0;  // smallest gap between support points
};

// (f_sup + 2 fprime_sup + 2) / (M + 1)
double error_bound(const ContinuousProfile& profile, int M);
// 2 exp(-2 M eps^2) + (support_size - 2) exp(-2 M h^2), valid off the eps-fattened support.
double error_bound(const DiscreteProfile& profile, int M, double epsilon);

// Envelope constant used when no density profile is supplied: C = 12.
constexpr double kDefaultBoundConstant = 12.0;
// Smallest M with C / (M + 1) <= target.
int default_moment_count(double target_error, double bound_constant = kDefaultBoundConstant);

class CdfEstimate {
 public:
  const MomentSequence& moments() const { return moments_; }
  int M() const { return M_; }
  DistributionKind kind() const { return kind_; }
  double error_bound() const { return error_bound_; }
  // Lattice spacing of the normalised statistic (discrete kind), 0 otherwise.
  const BigRational& lattice_step() const { return lattice_step_; }

  // Bernstein masses c_0..c_M.
  const std::vector<double>& masses() const { return masses_; }
  // F at the grid points j/M.
  const std::vector<double>& cumulative() const { return cumulative_; }

  // F(x) = sum_{j/M <= x} c_j, clamped to 0 below 0 and 1 from 1 on.
  double cdf(const BigRational& x) const;
  double cdf(double x) const;
  // sum_{j/M >= x} c_j = 1 - F(x^-), computed without cancellation.
  double at_least(const BigRational& x) const;

  // Replaces the certificate, e.g. with one built from a known density or support.
  void set_error_bound(double bound) { error_bound_ = bound; }

  friend CdfEstimate reconstruct_cdf(const MomentSequence& moments, int M);

// Closed-form CDF of the normalised continuous statistic when it depends on a
// single gap (k = 2, or one nonzero weight). Such statistics can have an
// unbounded density, so reconstruct_cdf certifies them against this function
// by the exact sup distance instead of C/(M+1). Empty for other specs.
std::optional<std::function<double(double)>> single_gap_cdf(const StatisticSpec& spec);

 private:
  MomentSequence moments_;
  int M_ = 0;
  DistributionKind kind_ = DistributionKind::continuous;
  double error_bound_ = 1.0;
  BigRational lattice_step_ = 0;
  std::vector<double> masses_;
  std::vector<double> cumulative_;  // cumulative_[j] = sum_{i <= j} c_i
  std::vector<double> survival_;    // survival_[j] = sum_{i >= j} c_i
};

// Throws InvariantViolation if any difference (-1)^r (delta^r mu)_j is negative,
// InvalidArgument if M exceeds the available moments. The default certificate
// is C/(M+1) with C = 12 for continuous statistics and the lattice form of the
// discrete bound (clipped to 1) for discrete ones.
CdfEstimate reconstruct_cdf(const MomentSequence& moments, int M);

// Closed-form CDF of the normalised continuous statistic when it depends on a
// single gap (k = 2, or one nonzero weight). Such statistics can have an
// unbounded density, so reconstruct_cdf certifies them against this function
// by the exact sup distance instead of C/(M+1). Empty for other specs.
std::optional<std::function<double(double)>> single_gap_cdf(const StatisticSpec& spec);

// Spacing of the lattice carrying the normalised discrete statistic:
// 1 / (max|a_i| n^p) where w_i = a_i / d.
BigRational lattice_step(const StatisticSpec& spec);

enum class QuantileSide { lower, upper };

// lower: inf{x : F(x) >= q};  upper: sup{x : F(x) <= q}, both on the grid {j/M}.
double quantile(const CdfEstimate& estimate, double q, QuantileSide side = QuantileSide::lower);

// (k-1) W_w / p^{k-1}: coefficient of (1-x)^{k-2} in the density near x = 1.
BigRational tail_leading_coefficient(const StatisticSpec& spec);

// True when every (-1)^r (delta^r mu)_j, r + j <= M, is non-negative.
bool is_completely_monotone(const std::vector<BigRational>& moments);

}  // namespace mochis
