#pragma once

// Classical comparators: Kolmogorov-Smirnov, Cramer-von Mises, Mann-Whitney
// and Pearson's chi-squared. All report two-sided (KS, MW) or upper-tail
// (CvM, chi-squared) p-values in a TestResult with method "exact" or
// "asymptotic".

#include <cstdint>
#include <vector>

#include "mochis/stattest.hpp"

namespace mochis {

// Exact lattice-path p-value when |x| |y| <= kKsExactLimit, else the
// Stephens-corrected Kolmogorov limit.
constexpr long kKsExactLimit = 10000;
TestResult ks_two_sample(const std::vector<double>& x, const std::vector<double>& y, double alpha = 0.05);

// Anderson (1962) T with the finite-sample mean/variance adjustment and the
// limiting Cramer-von Mises law.
TestResult cvm_two_sample(const std::vector<double>& x, const std::vector<double>& y, double alpha = 0.05);

// U = #{(i, j) : y_j < x_i}; ties are resolved by the seeded order used for
// spacings, so U equals sum_j (k-j) S_j. Exact when |y| (|x| + 1) <= limit,
// else normal with continuity correction.
constexpr long kMannWhitneyExactLimit = 2500;
TestResult mann_whitney(const std::vector<double>& x, const std::vector<double>& y, double alpha = 0.05,
                        std::uint64_t seed = 0);
// Same test on spacing counts.
TestResult mann_whitney_counts(const std::vector<long>& counts, double alpha = 0.05);

TestResult ks_one_sample(const std::vector<double>& z, const NullCdf& null_cdf, double alpha = 0.05);
TestResult cvm_one_sample(const std::vector<double>& z, const NullCdf& null_cdf, double alpha = 0.05);
// bins = 0 selects max(2, floor(sqrt(N))) equiprobable cells.
TestResult chi2_uniformity(const std::vector<double>& z, const NullCdf& null_cdf, int bins = 0,
                           double alpha = 0.05);

// P(K > lambda) for the Kolmogorov distribution.
double kolmogorov_survival(double lambda);
// Limiting CDF of the Cramer-von Mises statistic.
double cvm_limit_cdf(double x);

}  // namespace mochis
