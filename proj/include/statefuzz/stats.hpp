// Copyright 2026 The Statefuzz Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Sample statistics for comparing campaigns: mean with a 95% confidence
// interval and Welch's unequal-variance t-test. Student-t probabilities are
// integrated numerically from the density with adaptive Simpson quadrature.

#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <numeric>
#include <span>

#include "statefuzz/error.hpp"

namespace statefuzz::stats {

inline double mean(std::span<const double> xs) {
  if (xs.empty()) throw InsufficientSampleError("mean of an empty sample");
  return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

// Unbiased (n - 1) sample variance.
inline double variance(std::span<const double> xs) {
  if (xs.size() < 2) throw InsufficientSampleError("variance needs at least two values");
  const double m = mean(xs);
  double ss = 0;
  for (double x : xs) ss += (x - m) * (x - m);
  return ss / static_cast<double>(xs.size() - 1);
}

inline double t_density(double x, double df) {
  const double log_norm =
      std::lgamma((df + 1) / 2) - std::lgamma(df / 2) - 0.5 * std::log(df * M_PI);
  return std::exp(log_norm - (df + 1) / 2 * std::log1p(x * x / df));
}

namespace detail {

inline double simpson(const std::function<double(double)>& f, double a, double b, double fa,
                      double fm, double fb, double whole, double tol, int depth) {
  const double m = (a + b) / 2;
  const double lm = (a + m) / 2;
  const double rm = (m + b) / 2;
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = (m - a) / 6 * (fa + 4 * flm + fm);
  const double right = (b - m) / 6 * (fm + 4 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::fabs(delta) <= 15 * tol) return left + right + delta / 15;
  return simpson(f, a, m, fa, flm, fm, left, tol / 2, depth - 1) +
         simpson(f, m, b, fm, frm, fb, right, tol / 2, depth - 1);
}

}  // namespace detail

// Adaptive Simpson quadrature of f over [a, b].
inline double integrate(const std::function<double(double)>& f, double a, double b,
                        double tol = 1e-13, int max_depth = 48) {
  if (a == b) return 0;
  const double fa = f(a);
  const double fb = f(b);
  const double fm = f((a + b) / 2);
  const double whole = (b - a) / 6 * (fa + 4 * fm + fb);
  return detail::simpson(f, a, b, fa, fm, fb, whole, tol, max_depth);
}

// P(T > x) for x >= 0. Beyond x = 1 the tail is integrated over u = 1/t,
// which keeps the interval finite; the substituted integrand is
// f(1/u) / u^2 = C df^((df+1)/2) u^(df-1) / (1 + df u^2)^((df+1)/2).
inline double t_upper_tail(double x, double df) {
  if (std::isinf(x)) return 0;
  if (x < 1 || df < 1) {
    return 0.5 - integrate([df](double t) { return t_density(t, df); }, 0, x);
  }
  const double log_norm =
      std::lgamma((df + 1) / 2) - std::lgamma(df / 2) - 0.5 * std::log(df * M_PI);
  const double half = (df + 1) / 2;
  auto substituted = [&](double u) {
    if (u == 0) return df == 1 ? std::exp(log_norm) : 0.0;
    return std::exp(log_norm + half * std::log(df) + (df - 1) * std::log(u) -
                    half * std::log1p(df * u * u));
  };
  return integrate(substituted, 0, 1 / x);
}

inline double t_cdf(double x, double df) {
  if (!(df > 0)) throw InsufficientSampleError("t distribution needs positive degrees of freedom");
  if (std::isnan(x)) return x;
  return x >= 0 ? 1 - t_upper_tail(x, df) : t_upper_tail(-x, df);
}

// Inverse CDF by bisection.
inline double t_quantile(double p, double df) {
  if (!(p > 0 && p < 1)) throw InsufficientSampleError("t quantile needs 0 < p < 1");
  if (p == 0.5) return 0;
  if (p < 0.5) return -t_quantile(1 - p, df);
  double hi = 1;
  while (t_cdf(hi, df) < p) hi *= 2;
  double lo = 0;
  for (int i = 0; i < 200 && hi - lo > 1e-13 * hi; ++i) {
    const double mid = (lo + hi) / 2;
    (t_cdf(mid, df) < p ? lo : hi) = mid;
  }
  return (lo + hi) / 2;
}

struct WelchResult {
  double t = 0;
  double df = 0;
  double p = 1;            // two-sided
  double p_greater = 0.5;  // one-sided, alternative mean(a) > mean(b)
  bool degenerate = false;
};

inline WelchResult welch_t_test(std::span<const double> a, std::span<const double> b) {
  if (a.size() < 2 || b.size() < 2) {
    throw InsufficientSampleError("welch t-test needs at least two values per sample");
  }
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  const double ma = mean(a);
  const double mb = mean(b);
  const double qa = variance(a) / na;
  const double qb = variance(b) / nb;
  WelchResult r;
  if (qa + qb == 0) {
    r.degenerate = true;
    r.df = na + nb - 2;
    if (ma == mb) {
      r.t = 0;
      r.p = 1;
      r.p_greater = 0.5;
    } else {
      r.t = ma > mb ? std::numeric_limits<double>::infinity() : -std::numeric_limits<double>::infinity();
      r.p = 0;
      r.p_greater = ma > mb ? 0 : 1;
    }
    return r;
  }
  r.t = (ma - mb) / std::sqrt(qa + qb);
  r.df = (qa + qb) * (qa + qb) / (qa * qa / (na - 1) + qb * qb / (nb - 1));
  const double tail = t_upper_tail(std::fabs(r.t), r.df);
  r.p = std::min(1.0, 2 * tail);
  r.p_greater = r.t >= 0 ? tail : 1 - tail;
  return r;
}

struct Interval {
  double mean = 0;
  double half_width = 0;
};

inline Interval confidence_interval_95(std::span<const double> xs) {
  if (xs.size() < 2) throw InsufficientSampleError("confidence interval needs at least two values");
  const double n = static_cast<double>(xs.size());
  const double s = std::sqrt(variance(xs));
  return {mean(xs), t_quantile(0.975, n - 1) * s / std::sqrt(n)};
}

}  // namespace statefuzz::stats
