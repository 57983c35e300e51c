#include "mochis/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "mochis/error.hpp"

namespace mochis {

void for_each_composition(int n, int k, const std::function<void(const Composition&)>& visit) {
  if (n < 0 || k < 1) throw InvalidArgument("compositions need n >= 0 and k >= 1");
  Composition parts(static_cast<size_t>(k), 0);
  // parts[0..k-2] free, the last part takes the remainder.
  std::function<void(int, long)> rec = [&](int j, long left) {
    if (j == k - 1) {
      parts[static_cast<size_t>(j)] = left;
      visit(parts);
      return;
    }
    for (long s = left; s >= 0; --s) {
      parts[static_cast<size_t>(j)] = s;
      rec(j + 1, left - s);
    }
  };
  rec(0, n);
}

std::vector<Composition> enumerate_compositions(int n, int k) {
  std::vector<Composition> out;
  for_each_composition(n, k, [&](const Composition& c) { out.push_back(c); });
  return out;
}

bool operator==(const Pmf::Atom& a, const Pmf::Atom& b) {
  return a.value == b.value && a.probability == b.probability;
}

bool operator==(const Pmf& a, const Pmf& b) { return a.atoms_ == b.atoms_; }

Pmf Pmf::from_weights(std::vector<std::pair<BigRational, BigRational>> weighted) {
  std::sort(weighted.begin(), weighted.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  Pmf pmf;
  BigRational total = 0;
  for (auto& [value, prob] : weighted) {
    if (prob < 0) throw InvariantViolation("negative probability mass");
    total += prob;
    if (prob == 0) continue;
    if (!pmf.atoms_.empty() && pmf.atoms_.back().value == value) {
      pmf.atoms_.back().probability += prob;
    } else {
      pmf.atoms_.push_back({std::move(value), std::move(prob)});
    }
  }
  if (total != 1) throw InvariantViolation("pmf masses sum to " + to_string(total) + ", not 1");
  return pmf;
}

BigRational Pmf::total() const {
  BigRational t = 0;
  for (const auto& a : atoms_) t += a.probability;
  return t;
}

BigRational Pmf::probability_of(const BigRational& value) const {
  auto it = std::lower_bound(atoms_.begin(), atoms_.end(), value,
                             [](const Atom& a, const BigRational& v) { return a.value < v; });
  return (it != atoms_.end() && it->value == value) ? it->probability : BigRational(0);
}

BigRational Pmf::cdf(const BigRational& x) const {
  BigRational t = 0;
  for (const auto& a : atoms_) {
    if (a.value > x) break;
    t += a.probability;
  }
  return t;
}

BigRational Pmf::survival_at_least(const BigRational& x) const {
  BigRational t = 0;
  for (const auto& a : atoms_) {
    if (a.value >= x) t += a.probability;
  }
  return t;
}

BigRational Pmf::moment(int m) const {
  BigRational t = 0;
  for (const auto& a : atoms_) t += a.probability * pow(a.value, static_cast<unsigned long>(m));
  return t;
}

BigRational Pmf::mesh() const {
  if (atoms_.size() < 2) return 0;
  BigRational best = atoms_[1].value - atoms_[0].value;
  for (size_t i = 2; i < atoms_.size(); ++i) best = std::min(best, BigRational(atoms_[i].value - atoms_[i - 1].value));
  return best;
}

namespace {

void check_cap(const StatisticSpec& spec, long cap) {
  if (spec.mode != Mode::discrete) throw InvalidArgument("pmf oracles need a discrete statistic");
  if (spec.n < 0 || spec.k() < 1) throw InvalidArgument("pmf oracles need n >= 0 and k >= 1");
  if (spec.p < 1) throw InvalidArgument("p must be a positive integer");
  const BigInt size = binomial(spec.n + spec.k() - 1, spec.k() - 1);
  if (size > cap) {
    throw SizeError("|D_{n,k}| = " + to_string(size) + " exceeds the oracle cap of " + std::to_string(cap));
  }
}

}  // namespace

Pmf enumeration_pmf(const StatisticSpec& spec, long cap) {
  check_cap(spec, cap);
  std::map<BigRational, long> counts;
  long total = 0;
  for_each_composition(spec.n, spec.k(), [&](const Composition& c) {
    ++counts[statistic_value(spec, c)];
    ++total;
  });
  std::vector<std::pair<BigRational, BigRational>> weighted;
  for (const auto& [value, count] : counts) weighted.emplace_back(value, make_rational(count, total));
  return Pmf::from_weights(std::move(weighted));
}

Pmf exact_pmf(const StatisticSpec& spec, long cap) {
  check_cap(spec, cap);
  const int n = spec.n;
  const int k = spec.k();
  const BigInt d = common_denominator(spec.weights.entries);

  // Integer contribution a_i s^p of s balls in bin i, in units of 1/d.
  std::vector<std::vector<BigInt>> contrib(static_cast<size_t>(k), std::vector<BigInt>(static_cast<size_t>(n) + 1));
  BigInt lo = 0;
  BigInt hi = 0;
  for (int i = 0; i < k; ++i) {
    const BigInt a = BigRational(spec.weights[i] * d).get_num();
    BigInt bin_lo = 0;
    BigInt bin_hi = 0;
    for (int s = 0; s <= n; ++s) {
      contrib[i][s] = a * pow(BigInt(s), static_cast<unsigned long>(spec.p));
      bin_lo = std::min(bin_lo, contrib[i][s]);
      bin_hi = std::max(bin_hi, contrib[i][s]);
    }
    lo += bin_lo;
    hi += bin_hi;
  }
  const BigInt size = binomial(n + k - 1, k - 1);
  const BigInt range = hi - lo + 1;

  std::vector<std::pair<BigRational, BigRational>> weighted;
  const bool dense = size < BigInt(1) << 62 && range * (n + 1) <= 20000000;
  if (dense) {
    // counts[b][v - lo]: ways to place b balls into the bins seen so far with
    // partial value v.
    const long width = range.get_si();
    const long offset = -lo.get_si();
    std::vector<std::uint64_t> counts(static_cast<size_t>(n + 1) * static_cast<size_t>(width), 0);
    std::vector<std::uint64_t> next(counts.size(), 0);
    auto at = [width](std::vector<std::uint64_t>& c, long b, long v) -> std::uint64_t& {
      return c[static_cast<size_t>(b) * static_cast<size_t>(width) + static_cast<size_t>(v)];
    };
    at(counts, 0, offset) = 1;
    for (int i = 0; i < k; ++i) {
      std::fill(next.begin(), next.end(), 0);
      std::vector<long> step(static_cast<size_t>(n) + 1);
      for (int s = 0; s <= n; ++s) step[static_cast<size_t>(s)] = contrib[i][s].get_si();
      const bool last = i == k - 1;
      for (long b = 0; b <= n; ++b) {
        for (long v = 0; v < width; ++v) {
          const std::uint64_t c = at(counts, b, v);
          if (c == 0) continue;
          for (long s = last ? n - b : 0; s <= n - b; ++s) at(next, b + s, v + step[static_cast<size_t>(s)]) += c;
        }
      }
      std::swap(counts, next);
    }
    for (long v = 0; v < width; ++v) {
      const std::uint64_t c = at(counts, n, v);
      if (c == 0) continue;
      weighted.emplace_back(BigRational(BigInt(v - offset), d),
                            BigRational(BigInt(static_cast<unsigned long>(c)), size));
    }
  } else {
    std::vector<std::map<BigInt, BigInt>> counts(static_cast<size_t>(n) + 1);
    counts[0][0] = 1;
    for (int i = 0; i < k; ++i) {
      std::vector<std::map<BigInt, BigInt>> next(static_cast<size_t>(n) + 1);
      const bool last = i == k - 1;
      for (int b = 0; b <= n; ++b) {
        for (const auto& [v, c] : counts[static_cast<size_t>(b)]) {
          for (int s = last ? n - b : 0; s <= n - b; ++s) next[static_cast<size_t>(b + s)][v + contrib[i][s]] += c;
        }
      }
      counts = std::move(next);
    }
    for (const auto& [v, c] : counts[static_cast<size_t>(n)]) weighted.emplace_back(BigRational(v, d), BigRational(c, size));
  }
  for (auto& [value, prob] : weighted) {
    value.canonicalize();
    prob.canonicalize();
  }
  return Pmf::from_weights(std::move(weighted));
}

Pmf mann_whitney_pmf(int n, int k) {
  if (n < 0 || k < 1) throw InvalidArgument("mann_whitney_pmf needs n >= 0 and k >= 1");
  // table[j][u] = N_{j,kk}(u) for the current number of bins kk; max U is n(k-1).
  const size_t width = static_cast<size_t>(n) * static_cast<size_t>(k - 1) + 1;
  std::vector<std::vector<BigInt>> table(static_cast<size_t>(n) + 1, std::vector<BigInt>(width, 0));
  for (int j = 0; j <= n; ++j) table[static_cast<size_t>(j)][0] = 1;  // kk = 1
  for (int kk = 2; kk <= k; ++kk) {
    std::vector<std::vector<BigInt>> next(static_cast<size_t>(n) + 1, std::vector<BigInt>(width, 0));
    next[0][0] = 1;
    for (int j = 1; j <= n; ++j) {
      for (size_t u = 0; u < width; ++u) {
        BigInt c = next[static_cast<size_t>(j - 1)][u];
        if (u >= static_cast<size_t>(j)) c += table[static_cast<size_t>(j)][u - static_cast<size_t>(j)];
        next[static_cast<size_t>(j)][u] = c;
      }
    }
    table = std::move(next);
  }
  const BigInt size = binomial(n + k - 1, k - 1);
  std::vector<std::pair<BigRational, BigRational>> weighted;
  for (size_t u = 0; u < width; ++u) {
    const BigInt& c = table[static_cast<size_t>(n)][u];
    if (c != 0) weighted.emplace_back(BigRational(static_cast<long>(u)), make_rational(c, size));
  }
  return Pmf::from_weights(std::move(weighted));
}

std::uint64_t Rng::next_u64() { return engine_(); }

double Rng::uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

double Rng::uniform_open() {
  return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

std::uint64_t Rng::below(std::uint64_t bound) {
  if (bound == 0) throw InvalidArgument("Rng::below needs a positive bound");
  // Rejection keeps the draw exactly uniform.
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t x = next_u64();
  while (x >= limit) x = next_u64();
  return x % bound;
}

double Rng::normal() {
  if (have_spare_) {
    have_spare_ = false;
    return spare_;
  }
  // Marsaglia polar method.
  double u = 0.0;
  double v = 0.0;
  double s = 0.0;
  do {
    u = 2.0 * uniform() - 1.0;
    v = 2.0 * uniform() - 1.0;
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  const double f = std::sqrt(-2.0 * std::log(s) / s);
  spare_ = v * f;
  have_spare_ = true;
  return u * f;
}

double Rng::exponential(double rate) {
  if (!(rate > 0)) throw InvalidArgument("exponential rate must be positive");
  return -std::log(uniform_open()) / rate;
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  // splitmix64 finaliser over a Weyl step.
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

Composition sample_composition(int n, int k, Rng& rng) {
  if (n < 0 || k < 1) throw InvalidArgument("sample_composition needs n >= 0 and k >= 1");
  // Stars and bars: choose k-1 bar slots among n+k-1 by selection sampling.
  Composition parts(static_cast<size_t>(k), 0);
  long slots = n + k - 1;
  long bars = k - 1;
  size_t bin = 0;
  while (slots > 0) {
    if (static_cast<long>(rng.below(static_cast<std::uint64_t>(slots))) < bars) {
      --bars;
      ++bin;
    } else {
      ++parts[bin];
    }
    --slots;
  }
  return parts;
}

std::vector<double> sample_spacings(int k, Rng& rng) {
  if (k < 1) throw InvalidArgument("sample_spacings needs k >= 1");
  std::vector<double> cuts(static_cast<size_t>(k - 1));
  for (auto& c : cuts) c = rng.uniform();
  std::sort(cuts.begin(), cuts.end());
  std::vector<double> gaps(static_cast<size_t>(k));
  double prev = 0.0;
  for (int j = 0; j < k - 1; ++j) {
    gaps[static_cast<size_t>(j)] = cuts[static_cast<size_t>(j)] - prev;
    prev = cuts[static_cast<size_t>(j)];
  }
  gaps[static_cast<size_t>(k - 1)] = 1.0 - prev;
  return gaps;
}

double statistic_value_double(const StatisticSpec& spec, const std::vector<double>& parts) {
  if (static_cast<int>(parts.size()) != spec.k()) throw InvalidArgument("configuration length differs from k");
  double total = 0.0;
  for (int j = 0; j < spec.k(); ++j) {
    total += to_double(spec.weights[j]) * std::pow(parts[static_cast<size_t>(j)], spec.p);
  }
  return total;
}

MonteCarloMoments monte_carlo_moments(const StatisticSpec& spec, int M, long reps, Rng& rng) {
  if (reps < 1) throw InvalidArgument("monte_carlo_moments needs reps >= 1");
  if (M < 0) throw InvalidArgument("number of moments must be >= 0");
  const double scale = to_double(statistic_scale(spec));
  std::vector<double> sum(static_cast<size_t>(M) + 1, 0.0);
  std::vector<double> sum_sq(static_cast<size_t>(M) + 1, 0.0);
  std::vector<double> parts;
  for (long r = 0; r < reps; ++r) {
    if (spec.mode == Mode::discrete) {
      const Composition c = sample_composition(spec.n, spec.k(), rng);
      parts.assign(c.begin(), c.end());
    } else {
      parts = sample_spacings(spec.k(), rng);
    }
    const double x = statistic_value_double(spec, parts) / scale;
    double term = 1.0;
    for (int m = 0; m <= M; ++m) {
      sum[static_cast<size_t>(m)] += term;
      sum_sq[static_cast<size_t>(m)] += term * term;
      term *= x;
    }
  }
  MonteCarloMoments out;
  out.replicates = reps;
  for (int m = 0; m <= M; ++m) {
    const double mean = sum[static_cast<size_t>(m)] / static_cast<double>(reps);
    const double var = std::max(0.0, sum_sq[static_cast<size_t>(m)] / static_cast<double>(reps) - mean * mean);
    out.values.push_back(mean);
    out.standard_errors.push_back(reps > 1 ? std::sqrt(var / static_cast<double>(reps - 1)) : 0.0);
  }
  return out;
}

}  // namespace mochis
