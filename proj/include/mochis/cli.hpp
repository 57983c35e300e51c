#pragma once

// Command-line front end and the JSON payloads it shares with the bindings.
//
//   mochis [--timing] <moments|cdf|test2|test1|power|roc> [flags]
//
// Every command prints an envelope {command, version, seed, result, timing};
// timing stays null unless --timing is given so that output is reproducible.
// Exit codes: 0 success, 2 usage or input error, 3 internal invariant failure.

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "mochis/moments.hpp"
#include "mochis/stattest.hpp"

namespace mochis::cli {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitInternal = 3;

std::string version();

// Statistic from the moments/cdf flags: weights default to ones(k); n is
// required (>= 0) in discrete mode and ignored in continuous mode.
StatisticSpec build_spec(const std::string& mode, int n, int k, int p, const std::string& weights);

// Payloads as JSON text (the "result" member of the envelope).
std::string test_result_json(const TestResult& result);
std::string moments_json(const StatisticSpec& spec, int M);
// M = 0 selects the default moment count; exactly one of at / quantile_level is given.
std::string cdf_json(const StatisticSpec& spec, int M, const std::optional<std::string>& at,
                     const std::optional<double>& quantile_level);
std::string one_sample_json(const std::vector<double>& sample, const std::string& null_spec,
                            const OneSampleOptions& options);

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace mochis::cli
