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
#ifndef REGPERTURB_NOISE_HPP_
#define REGPERTURB_NOISE_HPP_

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <sstream>
#include <string>

#include <Eigen/Dense>

#include "regperturb/dataset.hpp"
#include "regperturb/error.hpp"
#include "regperturb/ols.hpp"
#include "regperturb/seed.hpp"

namespace regperturb {

// Recipe for one perturbation of the response:
//
//   eps = a|e|/(1+b) * (e/|e| + sqrt(b) u/|u|)
//
// where e is the OLS residual and u is a random direction orthogonal to the
// design columns and to e. a = -2 keeps coefficients, t-values and R^2
// unchanged for every b; b trades closeness to the original for masking.
struct NoiseSpec {
  double a = -2.0;
  double b = 1.0;
  std::uint64_t seed = 0;
  // nullopt: required iff every original response is positive.
  std::optional<bool> positivity_required;
  int max_retries = 100;

  void Validate() const {
    if (!(a != 0.0) || !std::isfinite(a)) {
      throw Error(ErrorCode::kInvalidParameters, "noise parameter a must be nonzero");
    }
    if (!(b >= 0.0) || !std::isfinite(b)) {
      throw Error(ErrorCode::kInvalidParameters, "noise parameter b must be >= 0");
    }
    if (max_retries < 1) {
      throw Error(ErrorCode::kInvalidParameters, "max_retries must be positive");
    }
  }
};

struct PerturbedRelease {
  Eigen::VectorXd y_perturbed;
  // positivity_required is always resolved here.
  NoiseSpec spec;
  int retries_used = 0;
  double achieved_r_squared = 0.0;
  Eigen::VectorXd achieved_t_values;
  Eigen::VectorXd achieved_beta;
  double correlation_with_original = 0.0;
  double min_value = 0.0;
};

// i.i.d. standard normal components.
inline Eigen::VectorXd DrawDirection(Eigen::Index n, Rng& stream) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = normal(stream);
  return v;
}

// Relative size below which u is treated as lying in span{X, e}.
inline constexpr double kDegenerateDirectionTolerance = 1e-8;

// True when the residual is zero up to rounding: |e| <= 64 eps |y|.
inline bool HasDegenerateResidual(const RegressionFit& fit) {
  const double n = static_cast<double>(fit.residual.size());
  const double y_norm_sq = fit.tss + n * fit.y_bar * fit.y_bar;
  const double limit = 64.0 * std::numeric_limits<double>::epsilon();
  return !(fit.rss > limit * limit * y_norm_sq);
}

// u = (I - X(X'X)^-1 X' - ee'/|e|^2) v.
inline Eigen::VectorXd Orthogonalize(const RegressionFit& fit,
                                     const Dataset& data,
                                     const Eigen::VectorXd& v) {
  if (HasDegenerateResidual(fit)) {
    throw Error(ErrorCode::kDegenerateFit, "residual vector is zero");
  }
  const Eigen::VectorXd& e = fit.residual;
  Eigen::VectorXd u = ApplyResidualProjector(fit, data, v);
  u -= e * (e.dot(u) / fit.rss);
  // Second pass: restores orthogonality lost to cancellation when v is
  // close to span{X, e}. Idempotent in exact arithmetic.
  u = fit.solver->Annihilate(u);
  u -= e * (e.dot(u) / fit.rss);
  if (!(u.norm() > kDegenerateDirectionTolerance * v.norm())) {
    throw Error(ErrorCode::kDegenerateDirection,
                "direction lies in the span of the design and residual");
  }
  return u;
}

// For b == 0 the u term vanishes and `u` is not read (may be empty).
inline Eigen::VectorXd MakeNoise(const RegressionFit& fit,
                                 const Eigen::VectorXd& u, double a, double b) {
  if (!(a != 0.0) || !(b >= 0.0)) {
    throw Error(ErrorCode::kInvalidParameters, "need a != 0 and b >= 0");
  }
  if (HasDegenerateResidual(fit)) {
    throw Error(ErrorCode::kDegenerateFit, "residual vector is zero");
  }
  const double e_norm = fit.residual_norm();
  const double scale = a / (1.0 + b);
  // a|e|/(1+b) * e/|e| == a/(1+b) * e.
  Eigen::VectorXd eps = scale * fit.residual;
  if (b > 0.0) {
    if (u.size() != fit.residual.size()) {
      throw Error(ErrorCode::kDimensionMismatch, "direction has wrong length");
    }
    const double u_norm = u.norm();
    if (!(u_norm > 0.0)) {
      throw Error(ErrorCode::kZeroDirection, "direction u is zero");
    }
    eps += (scale * e_norm * std::sqrt(b) / u_norm) * u;
  }
  return eps;
}

inline bool AllPositive(const Eigen::VectorXd& y) {
  return y.size() > 0 && y.minCoeff() > 0.0;
}

// Fits OLS on `data` and draws candidates until one satisfies the
// positivity policy. Attempt k draws v from the stream (seed, k), so the
// accepted release is the same however many attempts precede it.
inline PerturbedRelease Perturb(const Dataset& data, const RegressionFit& fit,
                                NoiseSpec spec) {
  spec.Validate();
  if (!spec.positivity_required) {
    spec.positivity_required = AllPositive(data.response());
  }
  const bool need_positive = *spec.positivity_required;
  const Eigen::VectorXd& y = data.response();

  std::optional<Eigen::VectorXd> accepted;
  int accepted_attempt = 0;
  double best_min = -std::numeric_limits<double>::infinity();
  int evaluated = 0;
  // b == 0 has no randomness, one attempt decides.
  const int attempts = spec.b > 0.0 ? spec.max_retries + 1 : 1;
  for (int attempt = 0; attempt < attempts; ++attempt) {
    Eigen::VectorXd u;
    if (spec.b > 0.0) {
      Rng stream = MakeStream(spec.seed, {static_cast<std::uint64_t>(attempt)});
      const Eigen::VectorXd v = DrawDirection(data.rows(), stream);
      try {
        u = Orthogonalize(fit, data, v);
      } catch (const Error& err) {
        if (err.code() == ErrorCode::kDegenerateDirection) continue;
        throw;
      }
    }
    Eigen::VectorXd candidate = y + MakeNoise(fit, u, spec.a, spec.b);
    ++evaluated;
    const double lowest = candidate.minCoeff();
    if (lowest > best_min) best_min = lowest;
    if (!need_positive || lowest > 0.0) {
      accepted = std::move(candidate);
      accepted_attempt = attempt;
      break;
    }
  }

  if (!accepted) {
    if (evaluated == 0) {
      throw Error(ErrorCode::kDegenerateDirection,
                  "every drawn direction was degenerate");
    }
    std::ostringstream msg;
    msg.precision(17);
    msg << "no positive release after " << evaluated
        << " candidate(s); best min=" << best_min;
    throw PositivityError(msg.str(), best_min, evaluated);
  }

  PerturbedRelease release;
  release.spec = spec;
  release.retries_used = accepted_attempt;
  const RegressionFit refit = Refit(fit, data.WithResponse(*accepted));
  release.achieved_r_squared = refit.r_squared;
  release.achieved_t_values = refit.t_values;
  release.achieved_beta = refit.beta_hat;
  release.correlation_with_original = PearsonCorrelation(y, *accepted);
  release.min_value = accepted->minCoeff();
  release.y_perturbed = std::move(*accepted);
  return release;
}

inline PerturbedRelease Perturb(const Dataset& data, const NoiseSpec& spec) {
  spec.Validate();
  return Perturb(data, FitOls(data), spec);
}

}  // namespace regperturb

#endif  // REGPERTURB_NOISE_HPP_
