#include "mochis/power.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <map>
#include <sstream>
#include <thread>

#include "mochis/baselines.hpp"
#include "mochis/error.hpp"

namespace mochis {

// ---- alternatives -----------------------------------------------------------

namespace {

std::vector<double> parse_numbers(std::string_view args, std::string_view context, size_t expected) {
  std::vector<double> out;
  std::size_t start = 0;
  while (start <= args.size() && !args.empty()) {
    std::size_t comma = args.find(',', start);
    if (comma == std::string_view::npos) comma = args.size();
    const std::string token(args.substr(start, comma - start));
    char* end = nullptr;
    const double v = std::strtod(token.c_str(), &end);
    if (token.empty() || end != token.c_str() + token.size() || !std::isfinite(v)) {
      throw InvalidArgument("alternative '" + std::string(context) + "': not a number: '" + token + "'");
    }
    out.push_back(v);
    start = comma + 1;
  }
  if (out.size() != expected) {
    throw InvalidArgument("alternative '" + std::string(context) + "': expected " + std::to_string(expected) +
                          " parameter(s)");
  }
  return out;
}

std::string format_number(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

AlternativeSpec AlternativeSpec::parse(std::string_view text) {
  AlternativeSpec alt;
  const auto colon = text.find(':');
  const std::string_view family = text.substr(0, colon);
  const std::string_view args = colon == std::string_view::npos ? std::string_view{} : text.substr(colon + 1);
  if (family == "null") {
    if (!args.empty()) throw InvalidArgument("alternative 'null' takes no parameters");
    return alt;
  }
  if (family == "scale") {
    alt.family = Family::scale;
    alt.sigma = parse_numbers(args, text, 1)[0];
  } else if (family == "loc" || family == "location") {
    alt.family = Family::location;
    alt.mu = parse_numbers(args, text, 1)[0];
  } else if (family == "locscale") {
    alt.family = Family::location_scale;
    const auto v = parse_numbers(args, text, 2);
    alt.mu = v[0];
    alt.sigma = v[1];
  } else if (family == "erlang") {
    alt.family = Family::erlang;
    const double r = parse_numbers(args, text, 1)[0];
    if (r < 1 || r != std::floor(r) || r > 1000) throw InvalidArgument("erlang shape must be an integer in [1, 1000]");
    alt.shape = static_cast<int>(r);
  } else if (family == "hyperexp") {
    alt.family = Family::hyperexp;
    alt.cv2 = parse_numbers(args, text, 1)[0];
    if (!(alt.cv2 >= 1.0)) throw InvalidArgument("hyperexponential needs cv2 >= 1");
  } else if (family == "spiked") {
    alt.family = Family::spiked;
    const auto v = parse_numbers(args, text, 2);
    alt.spike_minus = v[0];
    alt.spike_plus = v[1];
    if (!(alt.spike_minus > 0) || !(alt.spike_plus > 0)) throw InvalidArgument("spiked means must be positive");
  } else if (family == "mix") {
    alt.family = Family::mixture;
    std::size_t start = 0;
    double total = 0.0;
    while (start < args.size()) {
      std::size_t semi = args.find(';', start);
      if (semi == std::string_view::npos) semi = args.size();
      const std::string_view part = args.substr(start, semi - start);
      const auto at = part.find('@');
      if (at == std::string_view::npos) throw InvalidArgument("mixture component needs weight@alternative");
      const double w = parse_numbers(part.substr(0, at), text, 1)[0];
      if (!(w > 0)) throw InvalidArgument("mixture weights must be positive");
      alt.mixture_weights.push_back(w);
      alt.components.push_back(parse(part.substr(at + 1)));
      total += w;
      start = semi + 1;
    }
    if (alt.components.empty()) throw InvalidArgument("mixture needs at least one component");
    for (auto& w : alt.mixture_weights) w /= total;
  } else {
    throw InvalidArgument("unknown alternative '" + std::string(text) +
                          "' (expected null, scale:s, loc:m, locscale:m,s, erlang:r, hyperexp:c, spiked:a,b or mix:...)");
  }
  if (!(alt.sigma > 0)) throw InvalidArgument("scale parameter must be positive");
  return alt;
}

std::string AlternativeSpec::describe() const {
  switch (family) {
    case Family::null:
      return "null";
    case Family::scale:
      return "scale:" + format_number(sigma);
    case Family::location:
      return "loc:" + format_number(mu);
    case Family::location_scale:
      return "locscale:" + format_number(mu) + "," + format_number(sigma);
    case Family::erlang:
      return "erlang:" + std::to_string(shape);
    case Family::hyperexp:
      return "hyperexp:" + format_number(cv2);
    case Family::spiked:
      return "spiked:" + format_number(spike_minus) + "," + format_number(spike_plus);
    case Family::mixture: {
      std::string out = "mix:";
      for (size_t i = 0; i < components.size(); ++i) {
        if (i > 0) out += ";";
        out += format_number(mixture_weights[i]) + "@" + components[i].describe();
      }
      return out;
    }
  }
  return "null";
}

bool AlternativeSpec::supports(Design design) const {
  switch (family) {
    case Family::null:
      return true;
    case Family::scale:
    case Family::location:
    case Family::location_scale:
      return design == Design::two_sample;
    case Family::erlang:
    case Family::hyperexp:
    case Family::spiked:
      return design == Design::one_sample;
    case Family::mixture:
      return std::all_of(components.begin(), components.end(), [&](const auto& c) { return c.supports(design); });
  }
  return false;
}

namespace {

const AlternativeSpec& pick_component(const AlternativeSpec& alt, Rng& rng) {
  if (alt.family != AlternativeSpec::Family::mixture) return alt;
  const double u = rng.uniform();
  double acc = 0.0;
  for (size_t i = 0; i < alt.components.size(); ++i) {
    acc += alt.mixture_weights[i];
    if (u < acc) return pick_component(alt.components[i], rng);
  }
  return pick_component(alt.components.back(), rng);
}

double draw_comparison(const AlternativeSpec& alt, Rng& rng) {
  const AlternativeSpec& c = pick_component(alt, rng);
  const double z = rng.normal();
  switch (c.family) {
    case AlternativeSpec::Family::scale:
      return c.sigma * z;
    case AlternativeSpec::Family::location:
      return c.mu + z;
    case AlternativeSpec::Family::location_scale:
      return c.mu + c.sigma * z;
    default:
      return z;
  }
}

double draw_interarrival(const AlternativeSpec& alt, Rng& rng) {
  const AlternativeSpec& c = pick_component(alt, rng);
  switch (c.family) {
    case AlternativeSpec::Family::erlang: {
      double t = 0.0;
      for (int i = 0; i < c.shape; ++i) t += rng.exponential(1.0);
      return t;
    }
    case AlternativeSpec::Family::hyperexp: {
      const double p1 = 0.5 * (1.0 + std::sqrt((c.cv2 - 1.0) / (c.cv2 + 1.0)));
      return rng.uniform() < p1 ? rng.exponential(2.0 * p1) : rng.exponential(2.0 * (1.0 - p1));
    }
    default:
      return rng.exponential(1.0);
  }
}

}  // namespace

Sample draw_sample(Design design, const AlternativeSpec& alt, int k, int n, Rng& rng) {
  if (k < 2) throw InvalidArgument("power studies need k >= 2");
  if (n < 0) throw InvalidArgument("n must be non-negative");
  if (!alt.supports(design)) {
    throw InvalidArgument("alternative '" + alt.describe() + "' does not apply to the " +
                          (design == Design::one_sample ? "one-sample" : "two-sample") + " design");
  }
  Sample s;
  if (design == Design::two_sample) {
    s.x.resize(static_cast<size_t>(k) - 1);
    for (auto& v : s.x) v = rng.normal();
    s.y.resize(static_cast<size_t>(n));
    for (auto& v : s.y) v = draw_comparison(alt, rng);
    return s;
  }
  std::vector<double> t(static_cast<size_t>(k));
  if (alt.family == AlternativeSpec::Family::spiked) {
    for (auto& v : t) v = rng.exponential(1.0 / alt.spike_minus);
    t[rng.below(static_cast<std::uint64_t>(k))] = rng.exponential(1.0 / alt.spike_plus);
  } else {
    for (auto& v : t) v = draw_interarrival(alt, rng);
  }
  double total = 0.0;
  for (double v : t) total += v;
  double acc = 0.0;
  s.x.resize(static_cast<size_t>(k) - 1);
  for (size_t i = 0; i + 1 < t.size(); ++i) {
    acc += t[i];
    s.x[i] = std::min(1.0, acc / total);
  }
  return s;
}

// ---- test configurations ----------------------------------------------------

TestConfig TestConfig::parse(std::string_view name) {
  TestConfig c;
  if (name == "spacing") {
    c.kind = TestKind::spacing;
  } else if (name == "ks") {
    c.kind = TestKind::ks;
  } else if (name == "cvm") {
    c.kind = TestKind::cvm;
  } else if (name == "mw") {
    c.kind = TestKind::mann_whitney;
  } else if (name == "chi2") {
    c.kind = TestKind::chi2;
  } else {
    throw InvalidArgument("unknown test '" + std::string(name) + "' (expected spacing, ks, cvm, mw or chi2)");
  }
  return c;
}

std::string TestConfig::name() const {
  switch (kind) {
    case TestKind::spacing:
      return "spacing";
    case TestKind::ks:
      return "ks";
    case TestKind::cvm:
      return "cvm";
    case TestKind::mann_whitney:
      return "mw";
    case TestKind::chi2:
      return "chi2";
    case TestKind::ensemble:
      return "ensemble";
  }
  return "spacing";
}

TestResult run_test(const TestConfig& config, Design design, const Sample& sample, double alpha, std::uint64_t seed) {
  const bool two = design == Design::two_sample;
  const NullCdf uniform = NullCdf::uniform();
  switch (config.kind) {
    case TestKind::spacing:
      if (two) {
        TwoSampleOptions o;
        o.p = config.p;
        o.weights = config.weights;
        o.side = config.side;
        o.method = config.method;
        o.M = config.M;
        o.alpha = alpha;
        o.seed = seed;
        return two_sample_test(sample.x, sample.y, o);
      } else {
        OneSampleOptions o;
        o.p = config.p;
        o.weights = config.weights;
        o.side = config.side;
        o.M = config.M;
        o.alpha = alpha;
        return one_sample_test(sample.x, uniform, o);
      }
    case TestKind::ks:
      return two ? ks_two_sample(sample.x, sample.y, alpha) : ks_one_sample(sample.x, uniform, alpha);
    case TestKind::cvm:
      return two ? cvm_two_sample(sample.x, sample.y, alpha) : cvm_one_sample(sample.x, uniform, alpha);
    case TestKind::mann_whitney:
      if (!two) throw InvalidArgument("Mann-Whitney is a two-sample test");
      return mann_whitney(sample.x, sample.y, alpha, seed);
    case TestKind::chi2:
      if (two) throw InvalidArgument("the chi-squared uniformity test is a one-sample test");
      return chi2_uniformity(sample.x, uniform, config.chi2_bins, alpha);
    case TestKind::ensemble: {
      if (config.members.empty()) throw InvalidArgument("an ensemble needs at least one member");
      const double m = static_cast<double>(config.members.size());
      TestResult r;
      r.test = "ensemble";
      r.method = "bonferroni";
      r.side = Side::two_sided;
      r.alpha = alpha;
      r.seed = seed;
      double smallest = 1.0;
      for (const auto& member : config.members) {
        const TestResult sub = run_test(member, design, sample, alpha / m, seed);
        smallest = std::min(smallest, sub.p_value);
        r.certified_error = std::max(r.certified_error, sub.certified_error);
        r.k = sub.k;
        r.n = sub.n;
        for (const auto& w : sub.warnings) r.warnings.push_back(member.name() + ": " + w);
      }
      r.raw_statistic = smallest;
      r.p_value = std::min(1.0, m * smallest);
      r.reject = r.p_value <= alpha;
      return r;
    }
  }
  throw InvariantViolation("unhandled test kind");
}

TestResult ensemble_test(const std::vector<TestConfig>& configs, const std::vector<double>& x,
                         const std::vector<double>& y, double alpha, std::uint64_t seed) {
  TestConfig ensemble;
  ensemble.kind = TestKind::ensemble;
  ensemble.members = configs;
  return run_test(ensemble, Design::two_sample, Sample{x, y}, alpha, seed);
}

// ---- replicate loops --------------------------------------------------------

int worker_count() {
  int hardware = static_cast<int>(std::thread::hardware_concurrency());
  if (hardware < 1) hardware = 1;
  if (const char* env = std::getenv("MOCHIS_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v >= 1) return static_cast<int>(std::min<long>(v, 256));
  }
  return hardware;
}

std::vector<std::vector<double>> simulate_pvalues(const std::vector<TestConfig>& configs, Design design,
                                                  const AlternativeSpec& alt, int k, int n, long replicates,
                                                  std::uint64_t seed) {
  if (replicates < 1) throw InvalidArgument("replicates must be at least 1");
  if (configs.empty()) throw InvalidArgument("no tests to simulate");
  if (!alt.supports(design)) {
    throw InvalidArgument("alternative '" + alt.describe() + "' does not apply to this design");
  }
  std::vector<std::vector<double>> out(configs.size(), std::vector<double>(static_cast<size_t>(replicates)));
  const auto run_one = [&](long r) {
    const std::uint64_t s = derive_seed(seed, static_cast<std::uint64_t>(r));
    Rng rng(s);
    const Sample sample = draw_sample(design, alt, k, n, rng);
    for (size_t c = 0; c < configs.size(); ++c) {
      out[c][static_cast<size_t>(r)] = run_test(configs[c], design, sample, 0.05, s).p_value;
    }
  };
  // The first replicate fills the null caches before workers start.
  run_one(0);
  const int workers = static_cast<int>(std::min<long>(worker_count(), replicates - 1));
  if (workers <= 1) {
    for (long r = 1; r < replicates; ++r) run_one(r);
    return out;
  }
  std::vector<std::exception_ptr> errors(static_cast<size_t>(workers));
  std::vector<std::thread> threads;
  for (int t = 0; t < workers; ++t) {
    threads.emplace_back([&, t] {
      try {
        for (long r = 1 + t; r < replicates; r += workers) run_one(r);
      } catch (...) {
        errors[static_cast<size_t>(t)] = std::current_exception();
      }
    });
  }
  for (auto& th : threads) th.join();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

PowerEstimate power_from_pvalues(const std::vector<double>& p_values, double alpha, std::uint64_t seed) {
  if (p_values.empty()) throw InvalidArgument("no p-values");
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw InvalidArgument("alpha must lie in [0, 1]");
  long hits = 0;
  for (double p : p_values) hits += p <= alpha ? 1 : 0;
  PowerEstimate e;
  e.replicates = static_cast<long>(p_values.size());
  e.power = static_cast<double>(hits) / static_cast<double>(e.replicates);
  e.standard_error = std::sqrt(e.power * (1.0 - e.power) / static_cast<double>(e.replicates));
  e.alpha = alpha;
  e.seed = seed;
  return e;
}

PowerEstimate estimate_power(const TestConfig& config, Design design, const AlternativeSpec& alt, int k, int n,
                             long replicates, double alpha, std::uint64_t seed) {
  return power_from_pvalues(simulate_pvalues({config}, design, alt, k, n, replicates, seed)[0], alpha, seed);
}

std::vector<PowerEstimate> roc_from_pvalues(const std::vector<double>& p_values, const std::vector<double>& alphas,
                                            std::uint64_t seed) {
  std::vector<PowerEstimate> out;
  out.reserve(alphas.size());
  for (double a : alphas) out.push_back(power_from_pvalues(p_values, a, seed));
  return out;
}

std::vector<PowerEstimate> roc_curve(const TestConfig& config, Design design, const AlternativeSpec& alt, int k,
                                     int n, long replicates, const std::vector<double>& alphas, std::uint64_t seed) {
  return roc_from_pvalues(simulate_pvalues({config}, design, alt, k, n, replicates, seed)[0], alphas, seed);
}

// ---- heteroskedasticity objective -------------------------------------------

BigRational heteroskedastic_objective(int p, const WeightVector& w, int n, int k, const BigRational& F0,
                                      long pmf_cap) {
  if (k < 2) throw InvalidArgument("objective needs k >= 2");
  if (w.size() != k) throw InvalidArgument("weights must have length k");
  if (!(F0 > 0 && F0 < 1)) throw InvalidArgument("F0 must lie in (0, 1)");
  if (w.all_zero()) return 0;
  const auto spec = StatisticSpec::discrete(n, p, w);
  spec.validate();
  if (is_degenerate(spec)) return 0;
  const Pmf& pmf = null_pmf(spec, pmf_cap);
  const auto& atoms = pmf.atoms();
  std::vector<BigRational> below(atoms.size() + 1, BigRational(0));  // below[i] = P(atoms before i)
  for (size_t i = 0; i < atoms.size(); ++i) below[i + 1] = below[i] + atoms[i].probability;
  const auto outside = [&](const BigRational& lo, const BigRational& hi) -> BigRational {
    const auto first = std::lower_bound(atoms.begin(), atoms.end(), lo,
                                        [](const Pmf::Atom& a, const BigRational& v) { return a.value < v; });
    const auto past = std::upper_bound(atoms.begin(), atoms.end(), hi,
                                       [](const BigRational& v, const Pmf::Atom& a) { return v < a.value; });
    return below[static_cast<size_t>(first - atoms.begin())] + (1 - below[static_cast<size_t>(past - atoms.begin())]);
  };
  const auto binomial_pmf = [&](int trials) {
    std::vector<BigRational> out(static_cast<size_t>(trials) + 1);
    const BigRational q = 1 - F0;
    for (int j = 0; j <= trials; ++j) {
      out[static_cast<size_t>(j)] = BigRational(binomial(trials, j)) * pow(F0, static_cast<unsigned long>(j)) *
                                    pow(q, static_cast<unsigned long>(trials - j));
    }
    return out;
  };
  const auto escape = binomial_pmf(n);
  const auto collapse = binomial_pmf(k - 1);
  const BigRational np = pow(BigRational(n), static_cast<unsigned long>(p));
  BigRational total = 0;
  for (int a = 0; a <= n; ++a) {
    const BigRational spread = w[0] * pow(BigRational(a), static_cast<unsigned long>(p)) +
                               w[k - 1] * pow(BigRational(n - a), static_cast<unsigned long>(p));
    BigRational inner = 0;
    for (int b = 0; b <= k - 1; ++b) {
      const BigRational point = w[b] * np;
      const auto& lo = std::min(point, spread);
      const auto& hi = std::max(point, spread);
      inner += collapse[static_cast<size_t>(b)] * outside(lo, hi);
    }
    total += escape[static_cast<size_t>(a)] * inner;
  }
  total.canonicalize();
  return total;
}

// ---- weight search ----------------------------------------------------------

namespace {

struct SearchSpace {
  const WeightSearchConfig& config;
  std::vector<BigRational> values;

  int coordinates() const {
    return config.shape == WeightTemplate::symmetric ? (config.k + 1) / 2 : config.k;
  }

  WeightVector expand(const std::vector<int>& c) const {
    std::vector<BigRational> w(static_cast<size_t>(config.k));
    for (int i = 0; i < config.k; ++i) {
      const int j = config.shape == WeightTemplate::symmetric ? std::min(i, config.k - 1 - i) : i;
      w[static_cast<size_t>(i)] = values[static_cast<size_t>(c[static_cast<size_t>(j)])];
    }
    return WeightVector(std::move(w));
  }

  bool admissible(const std::vector<int>& c) const {
    if (config.shape != WeightTemplate::monotone) return true;
    for (size_t i = 0; i + 1 < c.size(); ++i) {
      if (values[static_cast<size_t>(c[i])] < values[static_cast<size_t>(c[i + 1])]) return false;
    }
    return true;
  }

  // Index coordinates of a supplied weight vector, or empty if off the grid.
  std::vector<int> locate(const WeightVector& w) const {
    if (w.size() != config.k) return {};
    std::vector<int> c(static_cast<size_t>(coordinates()));
    for (int j = 0; j < coordinates(); ++j) {
      const auto it = std::find(values.begin(), values.end(), w[j]);
      if (it == values.end()) return {};
      c[static_cast<size_t>(j)] = static_cast<int>(it - values.begin());
    }
    if (!(expand(c) == w)) return {};
    return c;
  }
};

}  // namespace

SearchResult search_parameters(const Objective& objective, const std::vector<int>& p_grid,
                               const WeightSearchConfig& config, std::uint64_t seed) {
  if (p_grid.empty()) throw InvalidArgument("p grid is empty");
  if (config.k < 1) throw InvalidArgument("weight search needs k >= 1");
  SearchSpace space{config, config.values};
  if (space.values.empty()) {
    for (int i = 0; i <= 10; ++i) space.values.push_back(make_rational(i, 10));
  }
  std::sort(space.values.begin(), space.values.end());
  space.values.erase(std::unique(space.values.begin(), space.values.end()), space.values.end());
  const int dims = space.coordinates();
  const int levels = static_cast<int>(space.values.size());

  SearchResult best;
  bool found = false;
  std::map<std::pair<int, std::vector<int>>, double> memo;
  const auto evaluate = [&](int p, const std::vector<int>& c, double& value) {
    if (!space.admissible(c)) return false;
    const WeightVector w = space.expand(c);
    if (is_degenerate(StatisticSpec::continuous(p, w))) return false;
    auto [it, inserted] = memo.try_emplace({p, c}, 0.0);
    if (inserted) {
      it->second = objective(p, w);
      ++best.evaluations;
    }
    value = it->second;
    if (!found || value < best.objective) {
      found = true;
      best.objective = value;
      best.p = p;
      best.weights = w;
    }
    return true;
  };

  Rng rng(seed);
  for (int p : p_grid) {
    std::vector<std::vector<int>> starts;
    for (const auto& w : config.starts) {
      auto c = space.locate(w);
      if (!c.empty()) starts.push_back(std::move(c));
    }
    starts.push_back(std::vector<int>(static_cast<size_t>(dims), levels - 1));
    for (int r = 0; r < config.random_starts; ++r) {
      std::vector<int> c(static_cast<size_t>(dims));
      for (auto& v : c) v = static_cast<int>(rng.below(static_cast<std::uint64_t>(levels)));
      if (config.shape == WeightTemplate::monotone) std::sort(c.rbegin(), c.rend());
      starts.push_back(std::move(c));
    }
    for (auto current : starts) {
      double current_value = 0.0;
      if (!evaluate(p, current, current_value)) continue;
      for (int sweep = 0; sweep < config.max_sweeps; ++sweep) {
        bool improved = false;
        for (int j = 0; j < dims; ++j) {
          for (int v = 0; v < levels; ++v) {
            if (v == current[static_cast<size_t>(j)]) continue;
            auto candidate = current;
            candidate[static_cast<size_t>(j)] = v;
            double value = 0.0;
            if (evaluate(p, candidate, value) && value < current_value) {
              current = std::move(candidate);
              current_value = value;
              improved = true;
            }
          }
        }
        if (!improved) break;
      }
    }
  }
  if (!found) throw InvalidArgument("every point of the search grid gives a constant statistic");
  return best;
}

}  // namespace mochis
