#include <cmath>

#include "doctest.h"
#include "mochis/error.hpp"
#include "mochis/oracle.hpp"
#include "mochis/reconstruct.hpp"

using namespace mochis;

namespace {

MomentSequence fixture(std::vector<BigRational> values) {
  return MomentSequence{StatisticSpec::continuous(1, WeightVector::ones(1)), BigRational(1), std::move(values)};
}

MomentSequence uniform_moments(int M) {
  std::vector<BigRational> v;
  for (int m = 0; m <= M; ++m) v.push_back(make_rational(1, m + 1));
  return fixture(v);
}

}  // namespace

TEST_CASE("error bounds") {
  CHECK(error_bound(ContinuousProfile{1.0, 0.0}, 50) == doctest::Approx(3.0 / 51.0));
  CHECK(error_bound(DiscreteProfile{2, 0.5}, 500, 0.1) == doctest::Approx(2.0 * std::exp(-10.0)));
  const double small = error_bound(ContinuousProfile{4.0, 1.0}, 40);
  const double large = error_bound(ContinuousProfile{4.0, 1.0}, 400);
  CHECK(large == doctest::Approx(small * 41.0 / 401.0));
  CHECK_THROWS_AS(error_bound(ContinuousProfile{-1.0, 0.0}, 10), InvalidArgument);
  CHECK_THROWS_AS(error_bound(DiscreteProfile{3, 0.1}, 10, 0.06), InvalidArgument);
  CHECK_THROWS_AS(error_bound(ContinuousProfile{1.0, 0.0}, 0), InvalidArgument);
  CHECK(default_moment_count(0.05) == 239);
}

TEST_CASE("uniform moments reconstruct the identity within the certificate") {
  const auto est = reconstruct_cdf(uniform_moments(50), 50);
  double worst = 0.0;
  for (int i = 0; i <= 1000; ++i) {
    const double x = i / 1000.0;
    worst = std::max(worst, std::abs(est.cdf(x) - x));
  }
  CHECK(worst <= 3.0 / 51.0);
  CHECK(est.cdf(1.0) == 1.0);
  CHECK(est.cdf(-0.1) == 0.0);
  for (int j = 0; j <= 50; ++j) CHECK(est.masses()[j] == doctest::Approx(1.0 / 51.0));
}

TEST_CASE("point masses") {
  std::vector<BigRational> at_one(21, BigRational(1));
  const auto one = reconstruct_cdf(fixture(at_one), 20);
  for (int i = 0; i < 100; ++i) CHECK(one.cdf(i / 100.0) == 0.0);
  CHECK(one.cdf(1.0) == 1.0);
  CHECK(quantile(one, 0.99) == 1.0);

  std::vector<BigRational> at_zero(21, BigRational(0));
  at_zero[0] = 1;
  const auto zero = reconstruct_cdf(fixture(at_zero), 20);
  for (int i = 0; i <= 100; ++i) CHECK(zero.cdf(i / 100.0) == 1.0);
}

TEST_CASE("Hausdorff violations are rejected") {
  // mu_2 > mu_1 is impossible on [0,1].
  CHECK_THROWS_AS(reconstruct_cdf(fixture({1, make_rational(1, 3), make_rational(1, 2)}), 2), InvariantViolation);
  CHECK_THROWS_AS(reconstruct_cdf(uniform_moments(5), 6), InvalidArgument);
  CHECK(is_completely_monotone(uniform_moments(30).values));
  CHECK(!is_completely_monotone({1, make_rational(1, 3), make_rational(1, 2)}));
}

TEST_CASE("quantiles") {
  const auto est = reconstruct_cdf(uniform_moments(100), 100);
  CHECK(std::abs(quantile(est, 0.5) - 0.5) <= error_bound(ContinuousProfile{1.0, 0.0}, 100));
  CHECK(quantile(est, 0.5, QuantileSide::upper) >= quantile(est, 0.5, QuantileSide::lower));
  CHECK(quantile(est, 1e-9) == 0.0);
  CHECK_THROWS_AS(quantile(est, 1.0), InvalidArgument);
}

TEST_CASE("discrete recovery off the support") {
  const auto spec = StatisticSpec::discrete(4, 2, WeightVector::ones(3));
  const Pmf pmf = exact_pmf(spec);
  const BigRational scale = statistic_scale(spec);
  const int M = 400;
  const auto est = reconstruct_cdf(discrete_moments(spec, M), M);
  const BigRational mesh = pmf.mesh() / scale;
  const double eps = 0.96 * to_double(mesh) / 2;
  const double bound = error_bound(DiscreteProfile{static_cast<long>(pmf.size()), to_double(mesh)}, M, eps);
  CHECK(bound < 0.2);
  for (const auto& atom : pmf.atoms()) {
    const BigRational x = atom.value / scale + mesh / 2;
    CHECK(std::abs(est.cdf(x) - to_double(pmf.cdf(atom.value))) <= bound);
  }
  CHECK(est.kind() == DistributionKind::discrete);
  CHECK(est.lattice_step() == make_rational(1, 16));
}

TEST_CASE("support floor of Greenwood") {
  // k = 2 is excluded: its density 1/sqrt(2x-1) is unbounded at the floor.
  for (int k = 3; k <= 5; ++k) {
    const auto est = reconstruct_cdf(continuous_moments(StatisticSpec::continuous(2, WeightVector::ones(k)), 200), 200);
    // The statistic is at least 1/k on the simplex.
    for (int i = 0; i < 100; ++i) {
      const double x = (1.0 / k) * i / 100.0;
      CHECK(est.cdf(x) <= est.error_bound());
    }
  }
}

TEST_CASE("Greenwood laws are ordered in k") {
  std::vector<CdfEstimate> est;
  for (int k = 2; k <= 5; ++k) {
    est.push_back(reconstruct_cdf(continuous_moments(StatisticSpec::continuous(2, WeightVector::ones(k)), 150), 150));
  }
  for (size_t i = 0; i + 1 < est.size(); ++i) {
    const double slack = est[i].error_bound() + est[i + 1].error_bound();
    for (int g = 0; g <= 200; ++g) CHECK(est[i + 1].cdf(g / 200.0) >= est[i].cdf(g / 200.0) - slack);
  }
}

TEST_CASE("tail leading coefficient") {
  CHECK(tail_leading_coefficient(StatisticSpec::continuous(2, WeightVector::ones(4))) == make_rational(3, 2));
  CHECK(tail_leading_coefficient(StatisticSpec::continuous(2, WeightVector::parse("1,1/2"))) == make_rational(1, 2));
  for (int k = 2; k <= 8; ++k) {
    CHECK(tail_leading_coefficient(StatisticSpec::continuous(2, WeightVector::ones(k))) ==
          make_rational(binomial(k, 2), pow(BigInt(2), k - 2)));
  }
  CHECK_THROWS_AS(tail_leading_coefficient(StatisticSpec::continuous(2, WeightVector::parse("1/2,1/2"))),
                  InvalidArgument);
}
