#include "mochis/cli.hpp"

#include <array>
#include <charconv>
#include <chrono>
#include <optional>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "mochis/baselines.hpp"
#include "mochis/error.hpp"
#include "mochis/power.hpp"
#include "mochis/reconstruct.hpp"

#ifndef MOCHIS_VERSION
#define MOCHIS_VERSION "0.1.0"
#endif

namespace mochis::cli {

using Json = nlohmann::ordered_json;

std::string version() { return MOCHIS_VERSION; }

namespace {

Json result_to_json(const TestResult& r) {
  Json j;
  j["test"] = r.test;
  j["raw_statistic"] = r.raw_statistic;
  j["normalized_statistic"] = r.normalized_statistic ? Json(*r.normalized_statistic) : Json(nullptr);
  j["exact_statistic"] = r.exact_statistic ? Json(*r.exact_statistic) : Json(nullptr);
  j["p_value"] = r.p_value;
  j["side"] = to_string(r.side);
  j["method"] = r.method;
  j["moments_used"] = r.moments_used;
  j["certified_error"] = r.certified_error;
  j["seed"] = r.seed;
  j["alpha"] = r.alpha;
  j["reject"] = r.reject;
  j["k"] = r.k;
  j["n"] = r.n;
  j["warnings"] = r.warnings;
  return j;
}

Json spec_to_json(const StatisticSpec& spec) {
  Json j;
  j["mode"] = spec.is_discrete() ? "discrete" : "continuous";
  j["n"] = spec.is_discrete() ? Json(spec.n) : Json(nullptr);
  j["k"] = spec.k();
  j["p"] = spec.p;
  Json w = Json::array();
  for (const auto& e : spec.weights.entries) w.push_back(to_string(e));
  j["weights"] = w;
  return j;
}

Json cdf_to_json(const CdfEstimate& est, const Json& source, const std::optional<std::string>& at,
                 const std::optional<double>& quantile_level) {
  if (at.has_value() == quantile_level.has_value()) throw InvalidArgument("give exactly one of --at or --quantile");
  Json r;
  r["source"] = source;
  r["M"] = est.M();
  r["kind"] = est.kind() == DistributionKind::discrete ? "discrete" : "continuous";
  if (at) {
    const BigRational x = parse_rational(*at);
    r["at"] = to_string(x);
    r["value"] = est.cdf(x);
  } else {
    r["quantile"] = *quantile_level;
    r["value"] = mochis::quantile(est, *quantile_level);
  }
  r["error_bound"] = est.error_bound();
  return r;
}

Json moments_to_json(const MomentSequence& seq) {
  Json j;
  j["spec"] = spec_to_json(seq.spec);
  j["scale"] = to_string(seq.scale);
  Json list = Json::array();
  for (size_t m = 0; m < seq.values.size(); ++m) {
    Json row;
    row["m"] = m;
    row["exact"] = to_string(seq.values[m]);
    row["decimal"] = to_double(seq.values[m]);
    list.push_back(row);
  }
  j["moments"] = list;
  return j;
}

Json estimate_to_json(const PowerEstimate& e) {
  Json j;
  j["alpha"] = e.alpha;
  j["power"] = e.power;
  j["standard_error"] = e.standard_error;
  return j;
}

std::vector<double> parse_list(const std::string& csv, const char* what) {
  std::vector<double> out;
  std::stringstream ss(csv);
  std::string token;
  while (std::getline(ss, token, ',')) {
    try {
      size_t used = 0;
      out.push_back(std::stod(token, &used));
      if (used != token.size()) throw std::invalid_argument(token);
    } catch (const std::exception&) {
      throw InvalidArgument(std::string(what) + ": not a number: '" + token + "'");
    }
  }
  if (out.empty()) throw InvalidArgument(std::string(what) + " is empty");
  return out;
}

// Flags describing a statistic, shared by moments and cdf.
struct SpecFlags {
  std::string mode = "discrete";
  int n = -1;
  int k = 0;
  int p = 2;
  std::string weights;

  void attach(CLI::App& app) {
    app.add_option("--mode", mode, "discrete or continuous")->check(CLI::IsMember({"discrete", "continuous"}));
    app.add_option("--n", n, "number of balls (discrete mode)");
    app.add_option("--k", k, "number of bins (implied by --weights)");
    app.add_option("--p", p, "exponent p >= 1");
    app.add_option("--weights", weights, "comma-separated weights, default all ones");
  }

  StatisticSpec build() const { return build_spec(mode, n, k, p, weights); }
};

struct Envelope {
  std::string command;
  std::optional<std::uint64_t> seed;
  Json result;
};

Design resolve_design(const std::string& flag, const AlternativeSpec& alt) {
  if (flag == "one") return Design::one_sample;
  if (flag == "two") return Design::two_sample;
  if (alt.supports(Design::two_sample)) return Design::two_sample;
  return Design::one_sample;
}

// Flags of a power or ROC experiment.
struct ExperimentFlags {
  std::string alt = "null";
  std::string design;
  std::string test = "spacing";
  int k = 10;
  int n = 30;
  int p = 2;
  std::string weights;
  std::string side = "right";
  std::string method = "auto";
  int M = 0;
  long replicates = 1000;
  std::uint64_t seed = 0;
  std::string baselines;
  std::string format = "json";

  void attach(CLI::App& app) {
    app.add_option("--alt", alt, "alternative: null, scale:s, loc:m, locscale:m,s, erlang:r, hyperexp:c, spiked:a,b");
    app.add_option("--design", design, "one or two (default inferred from --alt)")
        ->check(CLI::IsMember({"one", "two"}));
    app.add_option("--test", test, "primary test: spacing, ks, cvm, mw or chi2");
    app.add_option("--k", k, "bins (reference sample size + 1)");
    app.add_option("--n", n, "comparison sample size (two-sample design)");
    app.add_option("--p", p, "exponent of the spacing statistic");
    app.add_option("--weights", weights, "spacing weights, default all ones");
    app.add_option("--side", side, "left, right or two-sided");
    app.add_option("--method", method, "auto, exact-moments, clt or oracle-pmf");
    app.add_option("-M,--M,--num-moments", M, "moments for reconstruction (0 = default)");
    app.add_option("--replicates", replicates, "Monte-Carlo replicates");
    app.add_option("--seed", seed, "base seed");
    app.add_option("--baselines", baselines, "comma-separated: ks, cvm, mw, chi2");
    app.add_option("--format", format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
  }

  std::vector<TestConfig> configs() const {
    std::vector<TestConfig> out;
    TestConfig primary = TestConfig::parse(test);
    primary.p = p;
    if (!weights.empty()) primary.weights = WeightVector::parse(weights);
    primary.side = parse_side(side);
    primary.method = parse_method(method);
    primary.M = M;
    out.push_back(primary);
    if (!baselines.empty()) {
      std::stringstream ss(baselines);
      std::string name;
      while (std::getline(ss, name, ',')) {
        if (name == "spacing") throw InvalidArgument("unknown baseline 'spacing' (expected ks, cvm, mw or chi2)");
        try {
          out.push_back(TestConfig::parse(name));
        } catch (const InvalidArgument&) {
          throw InvalidArgument("unknown baseline '" + name + "' (expected ks, cvm, mw or chi2)");
        }
      }
    }
    return out;
  }

  void validate(Design d, const std::vector<TestConfig>& configs) const {
    if (replicates < 1) throw InvalidArgument("--replicates must be at least 1");
    for (const auto& c : configs) {
      if (d == Design::one_sample && c.kind == TestKind::mann_whitney) {
        throw InvalidArgument("mw needs the two-sample design");
      }
      if (d == Design::two_sample && c.kind == TestKind::chi2) {
        throw InvalidArgument("chi2 needs the one-sample design");
      }
    }
  }

  Json manifest(Design d, const AlternativeSpec& a) const {
    Json j;
    j["design"] = d == Design::one_sample ? "one-sample" : "two-sample";
    j["alternative"] = a.describe();
    j["k"] = k;
    j["n"] = d == Design::one_sample ? Json(nullptr) : Json(n);
    j["replicates"] = replicates;
    j["seed"] = seed;
    j["replicate_seed"] = "derive_seed(seed, r), r = 0..replicates-1";
    return j;
  }
};

// Shortest text that parses back to the same double.
std::string csv_number(double v) {
  std::array<char, 32> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

}  // namespace

std::string test_result_json(const TestResult& result) { return result_to_json(result).dump(); }

std::string moments_json(const StatisticSpec& spec, int M) { return moments_to_json(compute_moments(spec, M)).dump(); }

StatisticSpec build_spec(const std::string& mode, int n, int k, int p, const std::string& weights) {
  WeightVector w;
  if (!weights.empty()) {
    w = WeightVector::parse(weights);
    if (k != 0 && k != w.size()) {
      throw InvalidArgument("--k " + std::to_string(k) + " does not match " + std::to_string(w.size()) + " weights");
    }
  } else {
    if (k < 1) throw InvalidArgument("give --k or --weights");
    w = WeightVector::ones(k);
  }
  StatisticSpec spec;
  if (mode == "discrete") {
    if (n < 0) throw InvalidArgument("discrete mode needs --n >= 0");
    spec = StatisticSpec::discrete(n, p, w);
  } else if (mode == "continuous") {
    spec = StatisticSpec::continuous(p, w);
  } else {
    throw InvalidArgument("unknown mode '" + mode + "' (expected discrete or continuous)");
  }
  spec.validate();
  return spec;
}

std::string cdf_json(const StatisticSpec& spec, int M, const std::optional<std::string>& at,
                     const std::optional<double>& quantile_level) {
  if (M < 0) throw InvalidArgument("-M must be non-negative");
  if (M == 0) M = spec.is_discrete() ? kDefaultTwoSampleMoments : kDefaultOneSampleMoments;
  const auto est = reconstruct_cdf(compute_moments(spec, M), M);
  return cdf_to_json(est, spec_to_json(spec), at, quantile_level).dump();
}

std::string one_sample_json(const std::vector<double>& sample, const std::string& null_spec,
                            const OneSampleOptions& options) {
  const NullCdf null_cdf = NullCdf::parse(null_spec);
  auto r = result_to_json(one_sample_test(sample, null_cdf, options));
  r["null"] = null_cdf.describe();
  return r.dump();
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Exact moments, distributions and hypothesis tests for spacing statistics", "mochis"};
  app.require_subcommand(1);
  bool timing = false;
  app.add_flag("--timing", timing, "record wall-clock time in the envelope");
  app.set_version_flag("--version", version());

  SpecFlags moment_flags;
  int moment_count = 1;
  std::string moment_format = "json";
  auto* moments = app.add_subcommand("moments", "exact moments of the normalised statistic");
  moment_flags.attach(*moments);
  moments->add_option("-M,--M,--num-moments", moment_count, "highest moment order");
  moments->add_option("--format", moment_format, "json or csv")->check(CLI::IsMember({"json", "csv"}));

  SpecFlags cdf_flags;
  int cdf_M = 0;
  std::string fixture;
  std::optional<std::string> at;
  std::optional<double> quantile_level;
  auto* cdf = app.add_subcommand("cdf", "reconstructed CDF value or quantile");
  cdf_flags.attach(*cdf);
  cdf->add_option("-M,--M,--num-moments", cdf_M, "moments used (0 = default)");
  cdf->add_option("--fixture", fixture, "use a built-in moment fixture instead of a statistic")
      ->check(CLI::IsMember({"uniform"}));
  auto* at_opt = cdf->add_option("--at", at, "evaluation point on the normalised scale (decimal or p/q)");
  auto* q_opt = cdf->add_option("--quantile", quantile_level, "quantile level in (0,1)");
  at_opt->excludes(q_opt);

  std::string x_path;
  std::string y_path;
  int t2_p = 2;
  std::string t2_weights;
  std::string t2_side = "right";
  std::string t2_method = "auto";
  int t2_M = 0;
  double t2_alpha = 0.05;
  std::uint64_t t2_seed = 0;
  auto* test2 = app.add_subcommand("test2", "two-sample spacing test");
  test2->add_option("--x", x_path, "reference sample file (k - 1 values)")->required();
  test2->add_option("--y", y_path, "comparison sample file (n values)")->required();
  test2->add_option("--p", t2_p, "exponent p");
  test2->add_option("--weights", t2_weights, "weights of length k, default all ones");
  test2->add_option("--side", t2_side, "left, right or two-sided");
  test2->add_option("--method", t2_method, "auto, exact-moments, clt or oracle-pmf");
  test2->add_option("-M,--M,--num-moments", t2_M, "moments for exact-moments (0 = default)");
  test2->add_option("--alpha", t2_alpha, "significance level");
  test2->add_option("--seed", t2_seed, "seed for tie breaking");

  std::string sample_path;
  std::string null_spec = "uniform";
  int t1_p = 2;
  std::string t1_weights;
  std::string t1_side = "right";
  int t1_M = 0;
  double t1_alpha = 0.05;
  auto* test1 = app.add_subcommand("test1", "one-sample spacing test");
  test1->add_option("--sample", sample_path, "sample file (N values)")->required();
  test1->add_option("--null", null_spec, "uniform, normal:mu,sigma, exp:lambda or table:<path>");
  test1->add_option("--p", t1_p, "exponent p");
  test1->add_option("--weights", t1_weights, "weights of length N + 1, default all ones");
  test1->add_option("--side", t1_side, "left, right or two-sided");
  test1->add_option("-M,--M,--num-moments", t1_M, "moments (0 = default)");
  test1->add_option("--alpha", t1_alpha, "significance level");

  ExperimentFlags power_flags;
  double power_alpha = 0.05;
  auto* power = app.add_subcommand("power", "Monte-Carlo power at one level");
  power_flags.attach(*power);
  power->add_option("--alpha", power_alpha, "significance level");

  ExperimentFlags roc_flags;
  std::string alphas = "0,0.01,0.02,0.05,0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9,1";
  auto* roc = app.add_subcommand("roc", "Monte-Carlo power over a grid of levels");
  roc_flags.attach(*roc);
  roc->add_option("--alphas", alphas, "comma-separated levels");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  const auto start = std::chrono::steady_clock::now();
  Envelope env;
  std::string csv;
  try {
    if (moments->parsed()) {
      env.command = "moments";
      if (moment_count < 0) throw InvalidArgument("-M must be non-negative");
      const auto spec = moment_flags.build();
      const auto seq = compute_moments(spec, moment_count);
      if (moment_format == "csv") {
        csv = "m,exact,decimal\n";
        for (size_t m = 0; m < seq.values.size(); ++m) {
          csv += std::to_string(m) + "," + to_string(seq.values[m]) + "," + csv_number(to_double(seq.values[m])) + "\n";
        }
      }
      env.result = moments_to_json(seq);
    } else if (cdf->parsed()) {
      env.command = "cdf";
      if (fixture == "uniform") {
        const int M = cdf_M > 0 ? cdf_M : 50;
        std::vector<BigRational> values;
        for (int m = 0; m <= M; ++m) values.push_back(make_rational(1, m + 1));
        const auto est =
            reconstruct_cdf(MomentSequence{StatisticSpec::continuous(1, WeightVector::ones(1)), 1, values}, M);
        env.result = cdf_to_json(est, "uniform fixture", at, quantile_level);
      } else {
        env.result = Json::parse(cdf_json(cdf_flags.build(), cdf_M, at, quantile_level));
      }
    } else if (test2->parsed()) {
      env.command = "test2";
      env.seed = t2_seed;
      TwoSampleOptions o;
      o.p = t2_p;
      if (!t2_weights.empty()) o.weights = WeightVector::parse(t2_weights);
      o.side = parse_side(t2_side);
      o.method = parse_method(t2_method);
      o.M = t2_M;
      o.alpha = t2_alpha;
      o.seed = t2_seed;
      env.result = result_to_json(two_sample_test(read_sample(x_path), read_sample(y_path), o));
    } else if (test1->parsed()) {
      env.command = "test1";
      OneSampleOptions o;
      o.p = t1_p;
      if (!t1_weights.empty()) o.weights = WeightVector::parse(t1_weights);
      o.side = parse_side(t1_side);
      o.M = t1_M;
      o.alpha = t1_alpha;
      env.result = Json::parse(one_sample_json(read_sample(sample_path), null_spec, o));
    } else {
      const bool is_power = power->parsed();
      const ExperimentFlags& f = is_power ? power_flags : roc_flags;
      env.command = is_power ? "power" : "roc";
      env.seed = f.seed;
      const auto alt = AlternativeSpec::parse(f.alt);
      const Design design = resolve_design(f.design, alt);
      const auto configs = f.configs();
      f.validate(design, configs);
      const std::vector<double> levels = is_power ? std::vector<double>{power_alpha} : parse_list(alphas, "--alphas");
      for (double a : levels) {
        if (!(a >= 0.0 && a <= 1.0)) throw InvalidArgument("levels must lie in [0, 1]");
      }
      const auto pvalues = simulate_pvalues(configs, design, alt, f.k, f.n, f.replicates, f.seed);
      Json r = f.manifest(design, alt);
      Json tests = Json::array();
      csv = "test,alpha,power,se\n";
      for (size_t c = 0; c < configs.size(); ++c) {
        Json t;
        t["test"] = configs[c].name();
        const auto curve = roc_from_pvalues(pvalues[c], levels, f.seed);
        if (is_power) {
          t["power"] = curve[0].power;
          t["standard_error"] = curve[0].standard_error;
          t["alpha"] = curve[0].alpha;
        } else {
          Json points = Json::array();
          for (const auto& e : curve) points.push_back(estimate_to_json(e));
          t["curve"] = points;
        }
        for (const auto& e : curve) {
          csv += configs[c].name() + "," + csv_number(e.alpha) + "," + csv_number(e.power) + "," +
                 csv_number(e.standard_error) + "\n";
        }
        tests.push_back(t);
      }
      r["tests"] = tests;
      if (f.format != "csv") csv.clear();
      env.result = r;
    }
  } catch (const InvalidArgument& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const SizeError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const InvariantViolation& e) {
    err << "internal error: " << e.what() << "\n";
    return kExitInternal;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }

  if (!csv.empty()) {
    out << csv;
    return kExitOk;
  }
  Json envelope;
  envelope["command"] = env.command;
  envelope["version"] = version();
  envelope["seed"] = env.seed ? Json(*env.seed) : Json(nullptr);
  envelope["result"] = env.result;
  if (timing) {
    Json t;
    t["seconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    envelope["timing"] = t;
  } else {
    envelope["timing"] = nullptr;
  }
  out << envelope.dump(2) << "\n";
  return kExitOk;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args, out, err);
}

}  // namespace mochis::cli
