#include <cstdio>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "mochis/cli.hpp"
#include "mochis/oracle.hpp"

using namespace mochis;
using Json = nlohmann::ordered_json;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(const std::vector<std::string>& args) {
  std::ostringstream out;
  std::ostringstream err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

Json result(const Run& r) {
  REQUIRE(r.code == 0);
  return Json::parse(r.out)["result"];
}

std::string write_file(const std::string& name, const std::string& text) {
  std::ofstream f(name);
  f << text;
  return name;
}

}  // namespace

TEST_CASE("moments command prints exact rationals") {
  const auto d = result(run({"moments", "--mode", "discrete", "--n", "2", "--k", "2", "--p", "2", "--weights", "1,1",
                             "-M", "1"}));
  CHECK(d["scale"] == "4");
  CHECK(d["moments"][1]["exact"] == "5/6");
  // The raw mean 10/3 is the normalised mean times the scale.
  CHECK(parse_rational(d["moments"][1]["exact"].get<std::string>()) * parse_rational(d["scale"].get<std::string>()) ==
        make_rational(10, 3));
  const auto c = result(run({"moments", "--mode", "continuous", "--k", "2", "--p", "2", "-M", "1"}));
  CHECK(c["moments"][1]["exact"] == "2/3");
  CHECK(c["moments"][1]["decimal"].get<double>() == doctest::Approx(2.0 / 3.0));
  const auto zero = result(run({"moments", "--mode", "continuous", "--k", "3", "-M", "0"}));
  CHECK(zero["moments"].size() == 1);
  CHECK(zero["moments"][0]["exact"] == "1");

  const auto csv = run({"moments", "--mode", "continuous", "--k", "2", "-M", "2", "--format", "csv"});
  CHECK(csv.code == 0);
  CHECK(csv.out == "m,exact,decimal\n0,1,1\n1,2/3,0.6666666666666666\n2,7/15,0.4666666666666667\n");
}

TEST_CASE("invalid specifications exit with code 2") {
  CHECK(run({"moments", "--mode", "discrete", "--k", "2"}).code == 2);
  CHECK(run({"moments", "--mode", "continuous", "--k", "2", "--weights", "1,1,1"}).code == 2);
  CHECK(run({"moments", "--mode", "continuous", "--weights", "1,-1"}).code == 2);
  CHECK(run({"moments", "--mode", "sideways", "--k", "2"}).code == 2);
  CHECK(run({"frobnicate"}).code == 2);
  CHECK(run({}).code == 2);
  const auto bad = run({"moments", "--mode", "continuous", "--k", "2", "--p", "0"});
  CHECK(bad.code == 2);
  CHECK(!bad.err.empty());
  CHECK(run({"--help"}).code == 0);
}

TEST_CASE("cdf command") {
  const auto g = result(run({"cdf", "--mode", "continuous", "--k", "3", "--p", "2", "--at", "0.3"}));
  CHECK(g["value"].get<double>() >= 0.0);
  CHECK(g["value"].get<double>() <= 1.0);
  CHECK(g["error_bound"].get<double>() > 0.0);
  const auto one = result(run({"cdf", "--mode", "continuous", "--k", "3", "--at", "1"}));
  CHECK(one["value"] == 1.0);
  const auto q = result(run({"cdf", "--fixture", "uniform", "-M", "50", "--quantile", "0.5"}));
  CHECK(std::abs(q["value"].get<double>() - 0.5) <= q["error_bound"].get<double>());
  CHECK(run({"cdf", "--fixture", "uniform"}).code == 2);
  CHECK(run({"cdf", "--fixture", "uniform", "--quantile", "1.5"}).code == 2);
  CHECK(run({"cdf", "--fixture", "uniform", "--at", "0.5", "--quantile", "0.5"}).code == 2);
}

TEST_CASE("test2 matches the oracle and is reproducible") {
  const auto x = write_file("cli_x.txt", "0.12\n0.47\n0.81\n");
  const auto y = write_file("cli_y.txt", "0.05 0.10 0.15\n0.20\n0.95\n");
  const std::vector<std::string> args{"test2", "--x", x, "--y", y, "--p", "2", "--seed", "3"};
  const auto first = run(args);
  const auto r = result(first);
  CHECK(r["method"] == "oracle-pmf");
  const auto spec = StatisticSpec::discrete(5, 2, WeightVector::ones(4));
  const Pmf pmf = exact_pmf(spec);
  CHECK(r["exact_statistic"] == "9");
  CHECK(r["p_value"].get<double>() == doctest::Approx(to_double(pmf.survival_at_least(9))));
  CHECK(run(args).out == first.out);

  const auto moments = result(run({"test2", "--x", x, "--y", y, "--method", "exact-moments", "-M", "300"}));
  CHECK(std::abs(moments["p_value"].get<double>() - r["p_value"].get<double>()) <=
        moments["certified_error"].get<double>());

  const auto empty = write_file("cli_empty.txt", "");
  const auto e = result(run({"test2", "--x", x, "--y", empty}));
  CHECK(e["raw_statistic"] == 0.0);
  CHECK(e["p_value"] == 1.0);

  const auto broken = write_file("cli_bad.txt", "0.1\n0.2\nzero\n");
  const auto bad = run({"test2", "--x", x, "--y", broken});
  CHECK(bad.code == 2);
  CHECK(bad.err.find("cli_bad.txt:3") != std::string::npos);
  CHECK(run({"test2", "--x", x}).code == 2);
  CHECK(run({"test2", "--x", x, "--y", y, "--weights", "1,1"}).code == 2);
  CHECK(run({"test2", "--x", x, "--y", y, "--method", "oracle-pmf", "--weights", "1,1,1,1", "--p", "2"}).code == 0);
  for (const char* f : {"cli_x.txt", "cli_y.txt", "cli_empty.txt", "cli_bad.txt"}) std::remove(f);
}

TEST_CASE("test1 command") {
  const auto grid = write_file("cli_grid.txt", "0.1 0.2 0.3 0.4 0.5 0.6 0.7 0.8 0.9\n");
  const auto r = result(run({"test1", "--sample", grid, "--side", "left"}));
  CHECK(r["p_value"].get<double>() <= r["certified_error"].get<double>());
  CHECK(r["null"] == "uniform");
  CHECK(run({"test1", "--sample", grid, "--null", "normal:a,b"}).code == 2);
  CHECK(run({"test1", "--sample", grid, "--null", "exp:2"}).code == 0);
  const auto outside = write_file("cli_out.txt", "1.5\n");
  CHECK(run({"test1", "--sample", outside}).code == 2);
  std::remove("cli_grid.txt");
  std::remove("cli_out.txt");
}

TEST_CASE("power and roc commands") {
  const auto single = result(run({"power", "--alt", "scale:2", "--k", "6", "--n", "10", "--replicates", "1",
                                  "--seed", "9", "--baselines", "ks,cvm,mw"}));
  REQUIRE(single["tests"].size() == 4);
  for (const auto& t : single["tests"]) {
    const double p = t["power"].get<double>();
    CHECK((p == 0.0 || p == 1.0));
  }
  CHECK(single["seed"] == 9);
  CHECK(single["design"] == "two-sample");
  CHECK(run({"power", "--baselines", "ks,bogus"}).code == 2);
  CHECK(run({"power", "--alt", "erlang:2", "--baselines", "mw"}).code == 2);
  CHECK(run({"power", "--alt", "warp:9"}).code == 2);

  const auto csv = run({"roc", "--alt", "erlang:3", "--k", "5", "--side", "left", "--replicates", "50", "--baselines",
                        "chi2", "--alphas", "0.1,1", "--format", "csv"});
  REQUIRE(csv.code == 0);
  std::istringstream lines(csv.out);
  std::string line;
  std::getline(lines, line);
  CHECK(line == "test,alpha,power,se");
  int rows = 0;
  while (std::getline(lines, line)) ++rows;
  CHECK(rows == 4);
  CHECK(csv.out.find("spacing,1,1,0") != std::string::npos);
}

TEST_CASE("envelopes are deterministic and round-trip") {
  const std::vector<std::string> args{"power", "--alt", "loc:1", "--k", "5", "--n", "8", "--replicates", "20",
                                      "--seed", "4"};
  const auto a = run(args);
  const auto b = run(args);
  CHECK(a.out == b.out);
  const auto env = Json::parse(a.out);
  CHECK(env.dump(2) + "\n" == a.out);
  CHECK(env["command"] == "power");
  CHECK(env["version"] == cli::version());
  CHECK(env["seed"] == 4);
  CHECK(env["timing"].is_null());
  const auto timed = Json::parse(run({"--timing", "moments", "--mode", "continuous", "--k", "2", "-M", "1"}).out);
  CHECK(timed["timing"]["seconds"].get<double>() >= 0.0);
  CHECK(timed["seed"].is_null());
}

TEST_CASE("payload helpers match the envelope") {
  const auto spec = StatisticSpec::discrete(2, 2, WeightVector::ones(2));
  const auto env = Json::parse(run({"moments", "--mode", "discrete", "--n", "2", "--k", "2", "-M", "3"}).out);
  CHECK(Json::parse(cli::moments_json(spec, 3)) == env["result"]);
}
