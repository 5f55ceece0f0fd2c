#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "idla/core.hpp"
#include "idla/rng.hpp"
#include "idla/stats.hpp"

namespace idla::tails {

/// Inputs of the Bernoulli-difference tail bounds: mu = E[M] - E[L] >= 0,
/// threshold xi, slack c >= 0, kappa > 1 from the per-variable mean cap, and
/// s2 = sum of squared Bernoulli means of L.
struct TailBoundInput {
  double mu = 0.0;
  double xi = 0.0;
  double c = 0.0;
  double kappa = 2.0;
  double s2 = 0.0;

  void validate_lower() const {
    if (!(mu >= 0.0)) throw_precondition("InvalidInput: mu must be >= 0, got " + std::to_string(mu));
    if (!(c >= 0.0)) throw_precondition("InvalidInput: c must be >= 0, got " + std::to_string(c));
    if (!(kappa > 1.0))
      throw_precondition("InvalidInput: kappa must be > 1, got " + std::to_string(kappa));
    if (!(s2 >= 0.0)) throw_precondition("InvalidInput: s2 must be >= 0, got " + std::to_string(s2));
  }
  void validate_upper() const {
    if (!(mu >= 0.0)) throw_precondition("InvalidInput: mu must be >= 0, got " + std::to_string(mu));
    if (!(s2 >= 0.0)) throw_precondition("InvalidInput: s2 must be >= 0, got " + std::to_string(s2));
  }
};

inline constexpr double kUpperLambdaMax = 0.6931471805599453;  // log 2

/// Lower tail exponent: P(W < xi) <= exp(-λ(mu-xi-c) + (λ²/2)(mu + κ s2)).
inline double lower_tail_log_bound(const TailBoundInput& in, double lambda) {
  in.validate_lower();
  if (!(lambda >= 0.0))
    throw_precondition("InvalidInput: lambda must be >= 0, got " + std::to_string(lambda));
  return -lambda * (in.mu - in.xi - in.c) +
         0.5 * lambda * lambda * (in.mu + in.kappa * in.s2);
}

/// exp of the exponent, clamped to [0,1] (the raw expression may exceed 1,
/// in which case the bound is vacuous).
inline double lower_tail_bound(const TailBoundInput& in, double lambda) {
  return std::exp(std::min(0.0, lower_tail_log_bound(in, lambda)));
}

/// Upper tail exponent, valid for λ in [0, log 2]:
/// P(W >= xi, A) <= exp(-λ(xi-mu) + λ²(mu + 4 s2)).
inline double upper_tail_log_bound(const TailBoundInput& in, double lambda) {
  in.validate_upper();
  if (!(lambda >= 0.0 && lambda <= kUpperLambdaMax + 1e-15))
    throw_precondition("LambdaOutOfRange: lambda must lie in [0, log 2], got " +
                       std::to_string(lambda));
  return -lambda * (in.xi - in.mu) + lambda * lambda * (in.mu + 4.0 * in.s2);
}

inline double upper_tail_bound(const TailBoundInput& in, double lambda) {
  return std::exp(std::min(0.0, upper_tail_log_bound(in, lambda)));
}

enum class Tail { lower, upper };

struct OptimizedBound {
  double lambda = 0.0;
  double log_bound = 0.0;  // exact optimized exponent
  double bound = 1.0;      // exp(log_bound) clamped to [0, 1]
};

/// Minimizes the quadratic exponent in λ. Lower tail: λ* = max(0, a/b) with
/// a = mu-xi-c, b = mu + κ s2. Upper tail: λ* = clamp(a/(2b), 0, log 2) with
/// a = xi-mu, b = mu + 4 s2. A vanishing curvature term degenerates to
/// (λ*, bound) = (0, 1).
inline OptimizedBound optimize_lambda(const TailBoundInput& in, Tail which) {
  OptimizedBound out;
  if (which == Tail::lower) {
    in.validate_lower();
    const double a = in.mu - in.xi - in.c;
    const double b = in.mu + in.kappa * in.s2;
    if (b <= 0.0 || a <= 0.0) return out;  // vacuous: bound 1 at λ = 0
    out.lambda = a / b;
    out.log_bound = -0.5 * a * a / b;
  } else {
    in.validate_upper();
    const double a = in.xi - in.mu;
    const double b = in.mu + 4.0 * in.s2;
    if (b <= 0.0 || a <= 0.0) return out;
    out.lambda = std::min(a / (2.0 * b), kUpperLambdaMax);
    out.log_bound = -out.lambda * a + out.lambda * out.lambda * b;
  }
  out.bound = std::exp(std::min(0.0, out.log_bound));
  return out;
}

/// Explicit Bernoulli specification of the independent sums M and L.
struct BernoulliSpec {
  std::vector<double> m_probs;
  std::vector<double> l_probs;

  double mu() const {
    double s = 0.0;
    for (double p : m_probs) s += p;
    for (double q : l_probs) s -= q;
    return s;
  }
  double s2() const {
    double s = 0.0;
    for (double q : l_probs) s += q * q;
    return s;
  }
  double max_l_prob() const {
    double m = 0.0;
    for (double q : l_probs) m = std::max(m, q);
    return m;
  }
};

struct ValidationResult {
  double empirical_freq = 0.0;
  double analytic_bound = 1.0;
  double lambda = 0.0;
  double se = 0.0;
  bool holds = false;
  std::int64_t trials = 0;
};

/// Monte Carlo check of bound dominance on the extremal coupling W = M - L - c
/// (lower) or W = M - L with the side event always on (upper). Refuses
/// parameter sets that violate the hypotheses: mu < 0, or a Bernoulli mean of
/// L at or above (kappa-1)/kappa.
inline ValidationResult validate_bound(const BernoulliSpec& spec, double xi, double c,
                                       double kappa, Tail which, std::int64_t trials,
                                       std::uint64_t seed) {
  TailBoundInput in;
  in.mu = spec.mu();
  in.xi = xi;
  in.c = c;
  in.kappa = kappa;
  in.s2 = spec.s2();
  if (in.mu < 0.0) throw_precondition("InvalidInput: hypothesis E[M] >= E[L] fails (mu < 0)");
  if (which == Tail::lower && !(spec.max_l_prob() < (kappa - 1.0) / kappa))
    throw_precondition("InvalidInput: hypothesis sup E[Y_i] < (kappa-1)/kappa fails");

  const OptimizedBound opt = optimize_lambda(in, which);
  std::int64_t hits = 0;
  RandomSource rng(seed, 0);
  for (std::int64_t t = 0; t < trials; ++t) {
    std::int64_t m = 0, l = 0;
    for (double p : spec.m_probs) m += rng.bernoulli(p);
    for (double q : spec.l_probs) l += rng.bernoulli(q);
    const double w = static_cast<double>(m - l) - (which == Tail::lower ? c : 0.0);
    if (which == Tail::lower ? (w < xi) : (w >= xi)) ++hits;
  }
  ValidationResult out;
  out.trials = trials;
  out.empirical_freq = static_cast<double>(hits) / static_cast<double>(trials);
  out.analytic_bound = opt.bound;
  out.lambda = opt.lambda;
  out.se = stats::binomial_se(out.empirical_freq, trials);
  out.holds = out.empirical_freq <= out.analytic_bound + 3.0 * out.se;
  return out;
}

}  // namespace idla::tails
