#include <cmath>
#include <cstdlib>

#include "doctest.h"
#include "mochis/error.hpp"
#include "mochis/power.hpp"

using namespace mochis;

namespace {

// Brute force over (N_inf, N_0, S) triples.
BigRational triple_enumeration(int p, const WeightVector& w, int n, int k, const BigRational& F0) {
  const auto spec = StatisticSpec::discrete(n, p, w);
  const auto comps = enumerate_compositions(n, k);
  const BigRational each = make_rational(1, binomial(n + k - 1, k - 1));
  const auto bin = [&](int trials, int j) -> BigRational {
    return BigRational(binomial(trials, j)) * pow(F0, static_cast<unsigned long>(j)) *
           pow(BigRational(1 - F0), static_cast<unsigned long>(trials - j));
  };
  BigRational total = 0;
  for (int a = 0; a <= n; ++a) {
    std::vector<long> spread(static_cast<size_t>(k), 0);
    spread[0] += a;
    spread[static_cast<size_t>(k) - 1] += n - a;
    const BigRational s_inf = statistic_value(spec, spread);
    for (int b = 0; b < k; ++b) {
      std::vector<long> point(static_cast<size_t>(k), 0);
      point[static_cast<size_t>(b)] = n;
      const BigRational s_zero = statistic_value(spec, point);
      const BigRational lo = std::min(s_inf, s_zero);
      const BigRational hi = std::max(s_inf, s_zero);
      for (const auto& c : comps) {
        const BigRational v = statistic_value(spec, c);
        if (v < lo || v > hi) total += bin(n, a) * bin(k - 1, b) * each;
      }
    }
  }
  return total;
}

}  // namespace

TEST_CASE("alternative specifications") {
  CHECK(AlternativeSpec::parse("scale:2").sigma == 2.0);
  CHECK(AlternativeSpec::parse("loc:1").mu == 1.0);
  CHECK(AlternativeSpec::parse("erlang:4").shape == 4);
  const auto mix = AlternativeSpec::parse("mix:1@scale:2;3@loc:1");
  CHECK(mix.mixture_weights == std::vector<double>{0.25, 0.75});
  for (const char* text : {"null", "scale:2", "loc:-1.5", "locscale:1,3", "erlang:3", "hyperexp:4", "spiked:1,10",
                           "mix:0.5@scale:2;0.5@loc:1"}) {
    CHECK(AlternativeSpec::parse(AlternativeSpec::parse(text).describe()) == AlternativeSpec::parse(text));
  }
  for (const char* bad : {"scale:0", "scale:", "loc:x", "erlang:1.5", "hyperexp:0.5", "gamma:2", "mix:", "null:1"}) {
    CHECK_THROWS_AS(AlternativeSpec::parse(bad), InvalidArgument);
  }
  CHECK(AlternativeSpec::parse("scale:2").supports(Design::two_sample));
  CHECK(!AlternativeSpec::parse("scale:2").supports(Design::one_sample));
  CHECK(AlternativeSpec::parse("erlang:2").supports(Design::one_sample));
}

TEST_CASE("samplers") {
  Rng rng(1);
  const auto two = draw_sample(Design::two_sample, AlternativeSpec::parse("loc:5"), 10, 30, rng);
  CHECK(two.x.size() == 9);
  CHECK(two.y.size() == 30);
  double mean = 0.0;
  for (double v : two.y) mean += v / 30.0;
  CHECK(mean > 4.0);
  for (const char* alt : {"null", "erlang:3", "hyperexp:4", "spiked:1,20"}) {
    const auto one = draw_sample(Design::one_sample, AlternativeSpec::parse(alt), 10, 0, rng);
    CHECK(one.x.size() == 9);
    CHECK(std::is_sorted(one.x.begin(), one.x.end()));
    CHECK(one.x.front() >= 0.0);
    CHECK(one.x.back() <= 1.0);
  }
  CHECK_THROWS_AS(draw_sample(Design::one_sample, AlternativeSpec::parse("scale:2"), 10, 0, rng), InvalidArgument);

  // Erlang(r) inter-arrivals have squared coefficient of variation 1/r.
  Rng r2(9);
  const auto erl = AlternativeSpec::parse("erlang:4");
  double s = 0.0;
  double ss = 0.0;
  const int reps = 20000;
  for (int i = 0; i < reps; ++i) {
    const auto d = draw_sample(Design::one_sample, erl, 2, 0, r2);
    s += d.x[0];
    ss += d.x[0] * d.x[0];
  }
  // First of two normalised Erlang(4) gaps is Beta(4, 4): variance 1/36.
  CHECK(s / reps == doctest::Approx(0.5).epsilon(0.02));
  CHECK(ss / reps - std::pow(s / reps, 2) == doctest::Approx(1.0 / 36.0).epsilon(0.05));
}

TEST_CASE("power under the null matches the level") {
  TestConfig c;
  const auto e = estimate_power(c, Design::two_sample, AlternativeSpec::parse("null"), 5, 10, 2000, 0.05, 3);
  CHECK(std::abs(e.power - 0.05) <= 3.0 * std::sqrt(0.05 * 0.95 / 2000) + 0.01);
  CHECK(e.standard_error == doctest::Approx(std::sqrt(e.power * (1 - e.power) / 2000)));
  CHECK(e.replicates == 2000);
}

TEST_CASE("separated samples give power one for Mann-Whitney") {
  const auto e = estimate_power(TestConfig::parse("mw"), Design::two_sample, AlternativeSpec::parse("loc:50"), 10,
                                30, 200, 0.05, 1);
  CHECK(e.power == 1.0);
}

TEST_CASE("a single replicate gives power zero or one") {
  const auto e = estimate_power(TestConfig::parse("ks"), Design::two_sample, AlternativeSpec::parse("scale:2"), 10,
                                30, 1, 0.05, 4);
  CHECK((e.power == 0.0 || e.power == 1.0));
  CHECK_THROWS_AS(estimate_power(TestConfig::parse("ks"), Design::two_sample, AlternativeSpec::parse("null"), 10, 30,
                                 0, 0.05, 4),
                  InvalidArgument);
}

TEST_CASE("results do not depend on the worker count") {
  std::vector<TestConfig> configs{TestConfig{}, TestConfig::parse("ks"), TestConfig::parse("mw")};
  const auto alt = AlternativeSpec::parse("scale:2");
  setenv("MOCHIS_THREADS", "1", 1);
  const auto serial = simulate_pvalues(configs, Design::two_sample, alt, 6, 12, 64, 77);
  setenv("MOCHIS_THREADS", "4", 1);
  const auto parallel = simulate_pvalues(configs, Design::two_sample, alt, 6, 12, 64, 77);
  unsetenv("MOCHIS_THREADS");
  CHECK(serial == parallel);
  CHECK(simulate_pvalues(configs, Design::two_sample, alt, 6, 12, 64, 78) != serial);
}

TEST_CASE("ROC curves") {
  TestConfig g;
  g.side = Side::left;
  const std::vector<double> alphas{0.0, 0.05, 0.1, 0.5, 1.0};
  const auto curve = roc_curve(g, Design::one_sample, AlternativeSpec::parse("erlang:3"), 10, 0, 300, alphas, 2);
  REQUIRE(curve.size() == alphas.size());
  for (size_t i = 1; i < curve.size(); ++i) CHECK(curve[i].power >= curve[i - 1].power);
  CHECK(curve.back().power == 1.0);

  const auto null_curve = roc_curve(TestConfig::parse("ks"), Design::two_sample, AlternativeSpec::parse("null"), 10,
                                    30, 1000, {0.1, 0.3, 0.5, 0.7}, 5);
  for (const auto& e : null_curve) CHECK(std::abs(e.power - e.alpha) <= 3.0 * std::sqrt(e.alpha * (1 - e.alpha) / 1000) + 0.02);
}

TEST_CASE("ensembles apply a Bonferroni split") {
  Rng rng(8);
  std::vector<double> x(9);
  std::vector<double> y(30);
  for (auto& v : x) v = rng.normal();
  for (auto& v : y) v = 2.0 * rng.normal();
  TestConfig scale;
  scale.p = 1;
  scale.weights = WeightVector::parse("1,1/5,1/10,0,0,0,0,1/10,1/5,1");
  TwoSampleOptions o;
  o.p = 1;
  o.weights = scale.weights;
  o.seed = 5;
  const auto plain = two_sample_test(x, y, o);
  const auto single = ensemble_test({scale}, x, y, 0.05, 5);
  CHECK(single.p_value == plain.p_value);
  CHECK(single.reject == plain.reject);
  const auto twice = ensemble_test({scale, scale}, x, y, 0.05, 5);
  CHECK(twice.p_value == doctest::Approx(std::min(1.0, 2.0 * plain.p_value)));
  CHECK(twice.reject == (plain.p_value <= 0.025));
  CHECK_THROWS_AS(ensemble_test({}, x, y, 0.05, 5), InvalidArgument);
}

TEST_CASE("heteroskedasticity objective equals triple enumeration") {
  const BigRational half(1, 2);
  CHECK(heteroskedastic_objective(2, WeightVector::parse("0,0,0"), 3, 3, half) == 0);
  CHECK(heteroskedastic_objective(2, WeightVector::parse("1,1"), 2, 2, half) ==
        triple_enumeration(2, WeightVector::parse("1,1"), 2, 2, half));
  for (int n = 1; n <= 5; ++n) {
    for (int k = 2; k <= 4; ++k) {
      for (int p = 1; p <= 2; ++p) {
        for (const char* w : {"1,1/2,1,1/3", "1,0,0,1", "1,2,3,4", "1/2,1,1,1/2"}) {
          const auto full = WeightVector::parse(w);
          const WeightVector cut(std::vector<BigRational>(full.entries.begin(), full.entries.begin() + k));
          for (const BigRational& F0 : {half, BigRational(1, 3)}) {
            CHECK(heteroskedastic_objective(p, cut, n, k, F0) == triple_enumeration(p, cut, n, k, F0));
          }
        }
      }
    }
  }
  const auto w = WeightVector::parse("1,1/5,1/2,0");
  const WeightVector reversed(std::vector<BigRational>(w.entries.rbegin(), w.entries.rend()));
  CHECK(heteroskedastic_objective(1, w, 6, 4, half) == heteroskedastic_objective(1, reversed, 6, 4, half));
  CHECK_THROWS_AS(heteroskedastic_objective(1, w, 6, 4, BigRational(0)), InvalidArgument);
  CHECK_THROWS_AS(heteroskedastic_objective(1, w, 6, 4, half, 10), SizeError);
}

TEST_CASE("weight search") {
  WeightSearchConfig single;
  single.k = 3;
  single.values = {BigRational(1)};
  single.random_starts = 0;
  const auto one = search_parameters([](int, const WeightVector&) { return 0.5; }, {2}, single, 1);
  CHECK(one.p == 2);
  CHECK(one.weights == WeightVector::ones(3));
  CHECK(one.objective == 0.5);

  WeightSearchConfig free;
  free.k = 4;
  free.shape = WeightTemplate::free;
  const auto first = search_parameters([](int, const WeightVector& w) { return to_double(w[0]); }, {1, 2}, free, 3);
  CHECK(first.weights[0] == 0);
  CHECK(!is_degenerate(StatisticSpec::continuous(first.p, first.weights)));

  WeightSearchConfig monotone;
  monotone.k = 5;
  monotone.shape = WeightTemplate::monotone;
  const auto m = search_parameters([](int, const WeightVector& w) { return to_double(w[4] - w[0]); }, {1}, monotone, 2);
  for (int i = 0; i + 1 < 5; ++i) CHECK(m.weights[i] >= m.weights[i + 1]);
  CHECK(m.objective == -1.0);

  const auto a = search_parameters([](int p, const WeightVector& w) { return to_double(w[1]) + p; }, {1, 2}, free, 9);
  const auto b = search_parameters([](int p, const WeightVector& w) { return to_double(w[1]) + p; }, {1, 2}, free, 9);
  CHECK(a.weights == b.weights);
  CHECK(a.p == 1);
  CHECK_THROWS_AS(search_parameters([](int, const WeightVector&) { return 0.0; }, {}, free, 1), InvalidArgument);
}

TEST_CASE("search matches or beats reference weights on the k=10, n=30 objective") {
  const BigRational half(1, 2);
  const auto objective = [&](int p, const WeightVector& w) {
    return to_double(heteroskedastic_objective(p, w, 30, 10, half));
  };
  const auto reference_weights = WeightVector::parse("1,1/5,1/10,0,0,0,0,1/10,1/5,1");
  const double reference = objective(1, reference_weights);
  CHECK(reference > 0.0);
  WeightSearchConfig config;
  config.k = 10;
  const auto best = search_parameters(objective, {1, 2}, config, 1);
  CHECK(best.objective <= reference);
  CHECK(best.objective == doctest::Approx(objective(best.p, best.weights)));
  for (int i = 0; i < 5; ++i) CHECK(best.weights[i] == best.weights[9 - i]);
}
