// Copyright 2026 The regperturb Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#ifndef REGPERTURB_FDIST_HPP_
#define REGPERTURB_FDIST_HPP_

#include <cmath>
#include <limits>

#include "regperturb/error.hpp"

namespace regperturb {

namespace detail {

// Continued fraction for I_x(a, b), modified Lentz. Converges quickly for
// x < (a+1)/(a+b+2); the caller uses the symmetry I_x(a,b) = 1 - I_{1-x}(b,a)
// otherwise.
inline double BetaContinuedFraction(double a, double b, double x) {
  constexpr int kMaxIterations = 100000;
  constexpr double kEps = 1e-16;
  constexpr double kTiny = 1e-300;
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIterations; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) break;
  }
  return h;
}

// x^a (1-x)^b / (a B(a,b)), the prefactor shared by both tails.
inline double BetaPrefactor(double a, double b, double x) {
  const double log_beta = std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
  return std::exp(a * std::log(x) + b * std::log1p(-x) - log_beta) / a;
}

}  // namespace detail

// Regularized incomplete beta I_x(a, b) and its complement, each evaluated
// on the side where the continued fraction is accurate so that small upper
// tails do not cancel.
inline double RegularizedBeta(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0) || !(x >= 0.0 && x <= 1.0)) {
    throw Error(ErrorCode::kInvalidParameters, "I_x(a,b) needs a,b > 0, x in [0,1]");
  }
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return detail::BetaPrefactor(a, b, x) * detail::BetaContinuedFraction(a, b, x);
  }
  return 1.0 - detail::BetaPrefactor(b, a, 1.0 - x) *
                   detail::BetaContinuedFraction(b, a, 1.0 - x);
}

inline double RegularizedBetaComplement(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0) || !(x >= 0.0 && x <= 1.0)) {
    throw Error(ErrorCode::kInvalidParameters, "I_x(a,b) needs a,b > 0, x in [0,1]");
  }
  if (x == 0.0) return 1.0;
  if (x == 1.0) return 0.0;
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return 1.0 - detail::BetaPrefactor(a, b, x) *
                     detail::BetaContinuedFraction(a, b, x);
  }
  return detail::BetaPrefactor(b, a, 1.0 - x) *
         detail::BetaContinuedFraction(b, a, 1.0 - x);
}

namespace detail {

inline void CheckDegreesOfFreedom(double df1, double df2) {
  if (!(df1 > 0.0) || !(df2 > 0.0) || !std::isfinite(df1) || !std::isfinite(df2)) {
    throw Error(ErrorCode::kInvalidParameters, "F degrees of freedom must be positive");
  }
}

}  // namespace detail

// P(F <= f) for F ~ F(df1, df2).
inline double FCdf(double f, double df1, double df2) {
  detail::CheckDegreesOfFreedom(df1, df2);
  if (std::isnan(f)) {
    throw Error(ErrorCode::kInvalidParameters, "F value is NaN");
  }
  if (f <= 0.0) return 0.0;
  if (std::isinf(f)) return 1.0;
  const double x = df1 * f / (df1 * f + df2);
  return RegularizedBeta(df1 / 2.0, df2 / 2.0, x);
}

// P(F > f).
inline double FSurvival(double f, double df1, double df2) {
  detail::CheckDegreesOfFreedom(df1, df2);
  if (std::isnan(f)) {
    throw Error(ErrorCode::kInvalidParameters, "F value is NaN");
  }
  if (f <= 0.0) return 1.0;
  if (std::isinf(f)) return 0.0;
  const double x = df1 * f / (df1 * f + df2);
  return RegularizedBetaComplement(df1 / 2.0, df2 / 2.0, x);
}

// Upper-alpha quantile: the f with P(F > f) = alpha.
//
// Bisection in the beta variable x = df1 f / (df1 f + df2) on [0, 1], where
// the survival function is monotone and bounded, then mapped back.
inline double FQuantile(double df1, double df2, double alpha) {
  detail::CheckDegreesOfFreedom(df1, df2);
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw Error(ErrorCode::kInvalidParameters, "alpha must lie in (0, 1)");
  }
  const double a = df1 / 2.0;
  const double b = df2 / 2.0;
  double lo = 0.0;
  double hi = 1.0;
  for (int iter = 0; iter < 200; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (RegularizedBetaComplement(a, b, mid) > alpha) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  const double x = 0.5 * (lo + hi);
  return df2 * x / (df1 * (1.0 - x));
}

}  // namespace regperturb

#endif  // REGPERTURB_FDIST_HPP_
