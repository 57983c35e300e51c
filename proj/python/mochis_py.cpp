#include <Python.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <string>
#include <vector>

#include "mochis/cli.hpp"
#include "mochis/error.hpp"
#include "mochis/moments.hpp"
#include "mochis/stattest.hpp"

namespace py = pybind11;

namespace {

py::object json_loads(const std::string& text) { return py::module_::import("json").attr("loads")(text); }

py::int_ to_pyint(const mochis::BigInt& v) {
  const std::string digits = v.get_str(10);
  return py::reinterpret_steal<py::int_>(PyLong_FromString(digits.c_str(), nullptr, 10));
}

// Weights as "a,b,c" text: accepts a string or a sequence whose items print as
// integers, decimals or p/q (int, str, fractions.Fraction).
std::string weight_text(const py::object& weights) {
  if (weights.is_none()) return "";
  if (py::isinstance<py::str>(weights)) return weights.cast<std::string>();
  std::string out;
  for (const auto& item : weights) {
    if (!out.empty()) out += ",";
    out += py::str(item).cast<std::string>();
  }
  return out;
}

mochis::WeightVector weight_vector(const py::object& weights) {
  const std::string text = weight_text(weights);
  return text.empty() ? mochis::WeightVector{} : mochis::WeightVector::parse(text);
}

py::list moment_pairs(const mochis::StatisticSpec& spec, int M) {
  if (M < 0) throw mochis::InvalidArgument("M must be non-negative");
  mochis::MomentSequence seq;
  {
    py::gil_scoped_release release;
    seq = mochis::compute_moments(spec, M);
  }
  py::list out;
  for (int m = 0; m <= M; ++m) {
    const mochis::BigRational raw = seq.raw(m);
    out.append(py::make_tuple(to_pyint(raw.get_num()), to_pyint(raw.get_den())));
  }
  return out;
}

}  // namespace

PYBIND11_MODULE(_mochis, m) {
  m.doc() = "Exact moments, distributions and hypothesis tests for spacing statistics";
  m.attr("__version__") = mochis::cli::version();

  static py::exception<mochis::InvalidArgument> invalid(m, "InvalidArgument", PyExc_ValueError);
  static py::exception<mochis::SizeError> size(m, "SizeError", PyExc_ValueError);
  static py::exception<mochis::InvariantViolation> invariant(m, "InvariantViolation", PyExc_RuntimeError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const mochis::InvalidArgument& e) {
      invalid(e.what());
    } catch (const mochis::SizeError& e) {
      size(e.what());
    } catch (const mochis::InvariantViolation& e) {
      invariant(e.what());
    }
  });

  m.def(
      "two_sample_test",
      [](const std::vector<double>& x, const std::vector<double>& y, int p, const py::object& weights,
         const std::string& side, const std::string& method, int M, double alpha, std::uint64_t seed) {
        mochis::TwoSampleOptions o;
        o.p = p;
        o.weights = weight_vector(weights);
        o.side = mochis::parse_side(side);
        o.method = mochis::parse_method(method);
        o.M = M;
        o.alpha = alpha;
        o.seed = seed;
        std::string payload;
        {
          py::gil_scoped_release release;
          payload = mochis::cli::test_result_json(mochis::two_sample_test(x, y, o));
        }
        return json_loads(payload);
      },
      py::arg("x"), py::arg("y"), py::arg("p") = 2, py::arg("weights") = py::none(), py::arg("side") = "right",
      py::arg("method") = "auto", py::arg("M") = 0, py::arg("alpha") = 0.05, py::arg("seed") = 0,
      "Two-sample spacing test; returns the same mapping as the test2 command's result.");

  m.def(
      "one_sample_test",
      [](const std::vector<double>& sample, const std::string& null, int p, const py::object& weights,
         const std::string& side, int M, double alpha) {
        mochis::OneSampleOptions o;
        o.p = p;
        o.weights = weight_vector(weights);
        o.side = mochis::parse_side(side);
        o.M = M;
        o.alpha = alpha;
        std::string payload;
        {
          py::gil_scoped_release release;
          payload = mochis::cli::one_sample_json(sample, null, o);
        }
        return json_loads(payload);
      },
      py::arg("sample"), py::arg("null") = "uniform", py::arg("p") = 2, py::arg("weights") = py::none(),
      py::arg("side") = "right", py::arg("M") = 0, py::arg("alpha") = 0.05,
      "One-sample spacing test; returns the same mapping as the test1 command's result.");

  m.def(
      "discrete_moments",
      [](int n, int k, int p, const py::object& weights, int M) {
        return moment_pairs(mochis::cli::build_spec("discrete", n, k, p, weight_text(weights)), M);
      },
      py::arg("n"), py::arg("k") = 0, py::arg("p") = 2, py::arg("weights") = py::none(), py::arg("M") = 1,
      "Raw moments E[S^m], m = 0..M, as (numerator, denominator) pairs.");

  m.def(
      "continuous_moments",
      [](int k, int p, const py::object& weights, int M) {
        return moment_pairs(mochis::cli::build_spec("continuous", 0, k, p, weight_text(weights)), M);
      },
      py::arg("k") = 0, py::arg("p") = 2, py::arg("weights") = py::none(), py::arg("M") = 1,
      "Raw moments E[T^m], m = 0..M, as (numerator, denominator) pairs.");

  m.def(
      "reconstruct_cdf",
      [](const std::string& mode, int n, int k, int p, const py::object& weights, int M, const py::object& at,
         std::optional<double> quantile) {
        const auto spec = mochis::cli::build_spec(mode, n, k, p, weight_text(weights));
        std::optional<std::string> point;
        if (!at.is_none()) point = py::str(at).cast<std::string>();
        std::string payload;
        {
          py::gil_scoped_release release;
          payload = mochis::cli::cdf_json(spec, M, point, quantile);
        }
        return json_loads(payload);
      },
      py::arg("mode"), py::arg("n") = -1, py::arg("k") = 0, py::arg("p") = 2, py::arg("weights") = py::none(),
      py::arg("M") = 0, py::kw_only(), py::arg("at") = py::none(), py::arg("quantile") = py::none(),
      "Reconstructed CDF value (at=) or quantile (quantile=); same mapping as the cdf command's result.");
}
