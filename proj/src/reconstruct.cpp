#include "mochis/reconstruct.hpp"

#include <algorithm>
#include <cmath>

#include "mochis/error.hpp"

namespace mochis {

double error_bound(const ContinuousProfile& profile, int M) {
  if (M < 1) throw InvalidArgument("error bound needs M >= 1");
  if (!(profile.f_sup >= 0) || !(profile.fprime_sup >= 0)) {
    throw InvalidArgument("density bounds must be non-negative");
  }
  return (profile.f_sup + 2.0 * profile.fprime_sup + 2.0) / (M + 1.0);
}

double error_bound(const DiscreteProfile& profile, int M, double epsilon) {
  if (M < 1) throw InvalidArgument("error bound needs M >= 1");
  if (profile.support_size < 1) throw InvalidArgument("support must contain at least one point");
  if (!(profile.mesh > 0)) throw InvalidArgument("support mesh must be positive");
  if (!(epsilon > 0) || !(epsilon < profile.mesh / 2)) throw InvalidArgument("epsilon must lie in (0, mesh/2)");
  const double interior = static_cast<double>(std::max<long>(profile.support_size - 2, 0));
  return 2.0 * std::exp(-2.0 * M * epsilon * epsilon) + interior * std::exp(-2.0 * M * profile.mesh * profile.mesh);
}

int default_moment_count(double target_error, double bound_constant) {
  if (!(target_error > 0)) throw InvalidArgument("target error must be positive");
  return std::max(1, static_cast<int>(std::ceil(bound_constant / target_error - 1.0)));
}

BigRational lattice_step(const StatisticSpec& spec) {
  if (spec.mode != Mode::discrete) throw InvalidArgument("lattice_step needs a discrete statistic");
  const BigInt d = common_denominator(spec.weights.entries);
  const BigRational top = spec.weights.max_abs() * d;
  BigInt units = top.get_num();
  if (spec.n > 0) units *= pow(BigInt(spec.n), static_cast<unsigned long>(spec.p));
  return make_rational(1, units);
}

bool is_completely_monotone(const std::vector<BigRational>& moments) {
  std::vector<BigRational> diff = moments;
  while (!diff.empty()) {
    for (const auto& v : diff) {
      if (v < 0) return false;
    }
    for (size_t j = 0; j + 1 < diff.size(); ++j) diff[j] -= diff[j + 1];
    diff.pop_back();
  }
  return true;
}

namespace {

// floor(M x) for rational x, clamped to [-1, M].
long grid_floor(const BigRational& x, int M) {
  BigRational scaled = x * M;
  BigInt f;
  mpz_fdiv_q(f.get_mpz_t(), scaled.get_num_mpz_t(), scaled.get_den_mpz_t());
  if (f < 0) return -1;
  if (f > M) return M;
  return f.get_si();
}

// ceil(M x) for rational x, clamped to [0, M + 1].
long grid_ceil(const BigRational& x, int M) {
  BigRational scaled = x * M;
  BigInt c;
  mpz_cdiv_q(c.get_mpz_t(), scaled.get_num_mpz_t(), scaled.get_den_mpz_t());
  if (c < 0) return 0;
  if (c > M + 1) return M + 1;
  return c.get_si();
}

}  // namespace

CdfEstimate reconstruct_cdf(const MomentSequence& moments, int M) {
  if (M < 1) throw InvalidArgument("reconstruction needs M >= 1");
  if (M > moments.max_order()) {
    throw InvalidArgument("requested M = " + std::to_string(M) + " but only " + std::to_string(moments.max_order()) +
                          " moments are available");
  }
  if (moments.values[0] != 1) throw InvariantViolation("moment sequence does not start with 1");

  std::vector<BigRational> used(moments.values.begin(), moments.values.begin() + M + 1);
  const BigInt D = common_denominator(used);
  std::vector<BigInt> diff(static_cast<size_t>(M) + 1);
  for (int m = 0; m <= M; ++m) {
    const BigRational scaled = used[static_cast<size_t>(m)] * D;
    diff[static_cast<size_t>(m)] = scaled.get_num();
    if (diff[static_cast<size_t>(m)] < 0) throw InvariantViolation("negative moment: not a law on [0,1]");
  }
  // After pass r, diff[j] = (-1)^r (delta^r mu)_j D for j <= M - r; entry j is
  // last touched in pass M - j, so it ends as the difference needed for c_j.
  for (int r = 1; r <= M; ++r) {
    for (int j = 0; j <= M - r; ++j) {
      auto& cell = diff[static_cast<size_t>(j)];
      cell -= diff[static_cast<size_t>(j) + 1];
      if (sgn(cell) < 0) {
        throw InvariantViolation("moments violate the Hausdorff condition at order " + std::to_string(r) +
                                 ", index " + std::to_string(j));
      }
    }
  }

  CdfEstimate est;
  est.moments_ = moments;
  est.M_ = M;
  est.kind_ = moments.spec.mode == Mode::discrete ? DistributionKind::discrete : DistributionKind::continuous;
  std::vector<BigInt> numerators(static_cast<size_t>(M) + 1);
  BigInt row = 1;  // binom(M, j)
  for (int j = 0; j <= M; ++j) {
    if (j > 0) {
      row *= M - j + 1;
      mpz_divexact_ui(row.get_mpz_t(), row.get_mpz_t(), static_cast<unsigned long>(j));
    }
    numerators[static_cast<size_t>(j)] = row * diff[static_cast<size_t>(j)];
  }

  est.masses_.resize(static_cast<size_t>(M) + 1);
  est.cumulative_.resize(static_cast<size_t>(M) + 1);
  est.survival_.resize(static_cast<size_t>(M) + 1);
  BigInt running = 0;
  for (int j = 0; j <= M; ++j) {
    est.masses_[static_cast<size_t>(j)] = to_double(BigRational(numerators[static_cast<size_t>(j)], D));
    running += numerators[static_cast<size_t>(j)];
    est.cumulative_[static_cast<size_t>(j)] = to_double(make_rational(running, D));
  }
  if (running != D) throw InvariantViolation("Bernstein masses do not sum to 1");
  running = 0;
  for (int j = M; j >= 0; --j) {
    running += numerators[static_cast<size_t>(j)];
    est.survival_[static_cast<size_t>(j)] = to_double(make_rational(running, D));
  }

  if (est.kind_ == DistributionKind::discrete) {
    est.lattice_step_ = lattice_step(moments.spec);
    const double h = to_double(est.lattice_step_);
    const BigRational points = BigRational(1) / est.lattice_step_ + 1;
    DiscreteProfile profile{static_cast<long>(std::min(to_double(points), 9.0e18)), h};
    est.error_bound_ = std::min(1.0, error_bound(profile, M, 0.49 * h));
  } else if (const auto exact = single_gap_cdf(moments.spec)) {
    // The estimate is constant on [j/M, (j+1)/M) and F is continuous and non-decreasing.
    double sup = 0.0;
    for (int j = 0; j <= M; ++j) {
      const double c = est.cumulative_[static_cast<size_t>(j)];
      sup = std::max(sup, std::abs(c - (*exact)(static_cast<double>(j) / M)));
      if (j < M) sup = std::max(sup, std::abs(c - (*exact)(static_cast<double>(j + 1) / M)));
    }
    est.error_bound_ = std::min(1.0, sup + 1e-6);
  } else {
    est.error_bound_ = std::min(1.0, kDefaultBoundConstant / (M + 1.0));
  }
  return est;
}

std::optional<std::function<double(double)>> single_gap_cdf(const StatisticSpec& spec) {
  if (spec.mode != Mode::continuous || spec.weights.all_zero()) return std::nullopt;
  std::vector<double> w;
  int nonzero = 0;
  for (const auto& e : spec.weights.entries) {
    if (e < 0) return std::nullopt;
    if (e != 0) ++nonzero;
    w.push_back(to_double(e / spec.weights.max_abs()));
  }
  const int k = spec.k();
  const double p = spec.p;
  if (nonzero == 1) {
    // The normalised statistic is g^p with g ~ Beta(1, k-1).
    return [p, k](double x) {
      if (x <= 0.0) return 0.0;
      if (x >= 1.0) return 1.0;
      return -std::expm1((k - 1) * std::log1p(-std::pow(x, 1.0 / p)));
    };
  }
  if (k != 2) return std::nullopt;
  // x(u) = w1 u^p + w2 (1-u)^p with u uniform: convex, so {x(u) <= x} is an interval.
  const double a = w[0];
  const double b = w[1];
  auto value = [a, b, p](double u) { return a * std::pow(u, p) + b * std::pow(1.0 - u, p); };
  double lo = 0.0;
  double hi = 1.0;
  for (int it = 0; it < 200; ++it) {
    const double m1 = lo + (hi - lo) / 3.0;
    const double m2 = hi - (hi - lo) / 3.0;
    if (value(m1) <= value(m2)) {
      hi = m2;
    } else {
      lo = m1;
    }
  }
  const double star = 0.5 * (lo + hi);
  return [value, star](double x) {
    if (x < value(star)) return 0.0;
    // Left end: x(u) decreases on [0, star].
    double left = 0.0;
    if (value(0.0) > x) {
      double l = 0.0;
      double r = star;
      for (int it = 0; it < 100; ++it) {
        const double m = 0.5 * (l + r);
        (value(m) > x ? l : r) = m;
      }
      left = r;
    }
    double right = 1.0;
    if (value(1.0) > x) {
      double l = star;
      double r = 1.0;
      for (int it = 0; it < 100; ++it) {
        const double m = 0.5 * (l + r);
        (value(m) <= x ? l : r) = m;
      }
      right = l;
    }
    return std::clamp(right - left, 0.0, 1.0);
  };
}

double CdfEstimate::cdf(const BigRational& x) const {
  const long j = grid_floor(x, M_);
  if (j < 0) return 0.0;
  return cumulative_[static_cast<size_t>(j)];
}

double CdfEstimate::cdf(double x) const {
  if (std::isnan(x)) throw InvalidArgument("cdf evaluated at NaN");
  if (x < 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  return cdf(BigRational(x));
}

double CdfEstimate::at_least(const BigRational& x) const {
  const long j = grid_ceil(x, M_);
  if (j > M_) return 0.0;
  return survival_[static_cast<size_t>(j)];
}

double quantile(const CdfEstimate& estimate, double q, QuantileSide side) {
  if (!(q > 0.0 && q < 1.0)) throw InvalidArgument("quantile level must lie in (0, 1)");
  const auto& cumulative = estimate.cumulative();
  auto it = side == QuantileSide::lower ? std::lower_bound(cumulative.begin(), cumulative.end(), q)
                                        : std::upper_bound(cumulative.begin(), cumulative.end(), q);
  if (it == cumulative.end()) return 1.0;
  return static_cast<double>(it - cumulative.begin()) / estimate.M();
}

BigRational tail_leading_coefficient(const StatisticSpec& spec) {
  if (spec.mode != Mode::continuous) throw InvalidArgument("tail coefficient needs a continuous statistic");
  if (spec.k() < 2) throw InvalidArgument("tail coefficient needs k >= 2");
  for (const auto& w : spec.weights.entries) {
    if (w < 0 || w > 1) throw InvalidArgument("tail coefficient needs weights in [0,1]");
  }
  const int unit = spec.weights.count_unit();
  if (unit == 0) throw InvalidArgument("tail coefficient needs at least one weight equal to 1");
  return make_rational(BigInt(spec.k() - 1) * unit, pow(BigInt(spec.p), static_cast<unsigned long>(spec.k() - 1)));
}

}  // namespace mochis
