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
#ifndef REGPERTURB_SYNTH_HPP_
#define REGPERTURB_SYNTH_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "regperturb/csv.hpp"
#include "regperturb/dataset.hpp"
#include "regperturb/error.hpp"
#include "regperturb/format.hpp"
#include "regperturb/ols.hpp"
#include "regperturb/seed.hpp"

namespace regperturb {

struct SynthColumn {
  std::string name;
  ColumnKind kind = ColumnKind::kContinuous;
  // Target moments. For dummies `mean` is the rate of ones; `sd` is only
  // used by the realized-moment check.
  double mean = 0.0;
  double sd = 1.0;
  // Continuous columns are normal truncated below at `lower`.
  double lower = 0.0;
  // Effect on the response per standard deviation of this column.
  double coefficient = 0.0;
};

struct SynthSpec {
  Eigen::Index n = 1320;
  std::vector<SynthColumn> columns;
  std::string response_name = "price";
  double response_mean = 0.0;
  double response_sd = 1.0;
  // When set, the error scale is solved for so that the fitted R^2 of the
  // generated data equals this value.
  std::optional<double> target_r_squared;
  // Error standard deviation relative to the signal standard deviation;
  // used only when target_r_squared is unset.
  double error_scale = 0.0;
  std::uint64_t seed = 0;
};

// Hedonic price data shaped like a ward-level sample of newly built
// detached houses: 13 regressors plus price in yen.
inline SynthSpec HousingSynthSpec(Eigen::Index n = 1320, double target_r2 = 0.78,
                                  std::uint64_t seed = 0) {
  using K = ColumnKind;
  SynthSpec spec;
  spec.n = n;
  spec.seed = seed;
  spec.target_r_squared = target_r2;
  spec.response_name = "price";
  spec.response_mean = 72431491.0;
  spec.response_sd = 25539447.0;
  spec.columns = {
      {"station_minutes", K::kContinuous, 10.60, 4.83, 0.0, -0.15},
      {"bus", K::kDummy, 0.07, 0.26, 0.0, -0.06},
      {"site_area", K::kContinuous, 88.56, 25.48, 0.0, 0.45},
      {"floor_area", K::kContinuous, 98.94, 20.06, 0.0, 0.35},
      {"leased_land", K::kDummy, 0.03, 0.17, 0.0, -0.10},
      {"coverage_ratio", K::kContinuous, 54.18, 7.70, 0.0, 0.02},
      {"floor_area_ratio", K::kContinuous, 141.43, 47.10, 0.0, 0.10},
      {"shinjuku_minutes", K::kContinuous, 18.72, 5.29, 0.0, -0.12},
      {"shibuya_minutes", K::kContinuous, 14.86, 6.01, 0.0, -0.10},
      {"yokohama_minutes", K::kContinuous, 44.30, 10.99, 0.0, -0.05},
      {"tokyo_minutes", K::kContinuous, 34.09, 4.90, 0.0, -0.05},
      {"road_width", K::kContinuous, 5.80, 2.25, 0.0, 0.05},
      {"south_road", K::kDummy, 0.28, 0.45, 0.0, 0.06},
  };
  return spec;
}

namespace detail {

inline double StdNormalPdf(double x) {
  return std::exp(-0.5 * x * x) / std::sqrt(2.0 * 3.14159265358979323846);
}

inline double StdNormalUpperTail(double x) { return 0.5 * std::erfc(x / std::sqrt(2.0)); }

struct Moments {
  double mean;
  double sd;
};

inline Moments LowerTruncatedMoments(double mu, double sigma, double lower) {
  if (!std::isfinite(lower)) return {mu, sigma};
  const double alpha = (lower - mu) / sigma;
  const double lambda = StdNormalPdf(alpha) / StdNormalUpperTail(alpha);
  const double var = sigma * sigma * (1.0 + alpha * lambda - lambda * lambda);
  return {mu + sigma * lambda, std::sqrt(std::max(var, 0.0))};
}

// Parameters (mu, sigma) of the parent normal whose truncation to
// [lower, inf) has the requested mean and standard deviation.
inline Moments SolveParentNormal(const SynthColumn& col) {
  if (!std::isfinite(col.lower)) return {col.mean, col.sd};
  if (!(col.mean > col.lower) || !(col.sd < col.mean - col.lower)) {
    throw Error(ErrorCode::kInvalidSpec,
                "column '" + col.name + "': mean/sd not attainable above the lower bound");
  }
  double mu = col.mean;
  double sigma = col.sd;
  for (int iter = 0; iter < 2000; ++iter) {
    const Moments m = LowerTruncatedMoments(mu, sigma, col.lower);
    const double mean_err = col.mean - m.mean;
    const double sd_ratio = col.sd / m.sd;
    mu += mean_err;
    sigma *= sd_ratio;
    if (std::abs(mean_err) <= 1e-12 * std::abs(col.mean) + 1e-300 &&
        std::abs(sd_ratio - 1.0) <= 1e-12) {
      return {mu, sigma};
    }
    if (!std::isfinite(mu) || !(sigma > 0.0)) break;
  }
  throw Error(ErrorCode::kInvalidSpec,
              "column '" + col.name + "': truncated normal moments did not converge");
}

inline double SampleSd(const Eigen::VectorXd& x) {
  const double mean = x.mean();
  return std::sqrt((x.array() - mean).square().sum() / static_cast<double>(x.size() - 1));
}

inline bool WithinMoments(const Eigen::VectorXd& x, double mean, double sd, double tolerance) {
  return std::abs(x.mean() - mean) <= tolerance * std::abs(mean) &&
         std::abs(SampleSd(x) - sd) <= tolerance * std::abs(sd);
}

}  // namespace detail

// Realized moments are checked against the targets from this many rows on.
inline constexpr Eigen::Index kMomentCheckRows = 1000;
inline constexpr double kMomentTolerance = 0.05;
inline constexpr std::uint64_t kMaxColumnRedraws = 64;

struct MomentDeviation {
  std::string column;
  double target_mean;
  double realized_mean;
  double target_sd;
  double realized_sd;
};

// Columns (including the response) whose realized mean or sd is off by more
// than `tolerance` relative to the target.
inline std::vector<MomentDeviation> CheckRealizedMoments(const Dataset& data,
                                                          const SynthSpec& spec,
                                                          double tolerance = kMomentTolerance) {
  std::vector<MomentDeviation> out;
  auto check = [&](const std::string& name, const Eigen::VectorXd& x, double mean,
                   double sd) {
    if (!detail::WithinMoments(x, mean, sd, tolerance)) {
      out.push_back({name, mean, x.mean(), sd, detail::SampleSd(x)});
    }
  };
  for (std::size_t j = 0; j < spec.columns.size(); ++j) {
    const auto& col = spec.columns[j];
    check(col.name, data.design().col(static_cast<Eigen::Index>(j) + 1), col.mean, col.sd);
  }
  check(spec.response_name, data.response(), spec.response_mean, spec.response_sd);
  return out;
}

inline void ValidateSynthSpec(const SynthSpec& spec) {
  if (spec.columns.empty()) {
    throw Error(ErrorCode::kInvalidSpec, "synthetic spec needs at least one column");
  }
  if (spec.n <= static_cast<Eigen::Index>(spec.columns.size()) + 1) {
    throw Error(ErrorCode::kInvalidSpec, "n must exceed the number of parameters");
  }
  if (!(spec.response_sd > 0.0)) {
    throw Error(ErrorCode::kInvalidSpec, "response sd must be positive");
  }
  if (spec.target_r_squared &&
      !(*spec.target_r_squared > 0.0 && *spec.target_r_squared <= 1.0)) {
    throw Error(ErrorCode::kInvalidSpec, "target R^2 must lie in (0, 1]");
  }
  if (!(spec.error_scale >= 0.0)) {
    throw Error(ErrorCode::kInvalidSpec, "error scale must be >= 0");
  }
  for (const auto& col : spec.columns) {
    if (col.kind == ColumnKind::kDummy) {
      if (!(col.mean > 0.0 && col.mean < 1.0)) {
        throw Error(ErrorCode::kInvalidSpec, "dummy '" + col.name + "' rate must be in (0,1)");
      }
    } else if (!(col.sd > 0.0)) {
      throw Error(ErrorCode::kInvalidSpec, "column '" + col.name + "' sd must be positive");
    }
  }
}

// Regressors are drawn independently, each from its own stream. Dummies get
// exactly round(rate * n) ones at random rows so their means hit the target.
// The response is signal + sigma * z with Gaussian z, affinely mapped to the
// target response mean and sd (which leaves R^2 unchanged); sigma is found
// by bisection when a target R^2 is given.
inline Dataset GenerateSynthetic(const SynthSpec& spec) {
  ValidateSynthSpec(spec);
  const Eigen::Index n = spec.n;
  const auto p = static_cast<Eigen::Index>(spec.columns.size());
  Eigen::MatrixXd regressors(n, p);
  Eigen::VectorXd signal = Eigen::VectorXd::Zero(n);

  for (Eigen::Index j = 0; j < p; ++j) {
    const SynthColumn& col = spec.columns[static_cast<std::size_t>(j)];
    if (col.kind == ColumnKind::kDummy) {
      Rng stream = MakeStream(spec.seed, {1, static_cast<std::uint64_t>(j)});
      const auto ones = static_cast<Eigen::Index>(std::llround(col.mean * static_cast<double>(n)));
      std::vector<Eigen::Index> all(static_cast<std::size_t>(n));
      std::iota(all.begin(), all.end(), Eigen::Index{0});
      std::shuffle(all.begin(), all.end(), stream);
      regressors.col(j).setZero();
      for (Eigen::Index i = 0; i < ones; ++i) {
        regressors(all[static_cast<std::size_t>(i)], j) = 1.0;
      }
    } else {
      const detail::Moments parent = detail::SolveParentNormal(col);
      // At n >= 1000 a column outside the moment tolerance is redrawn from
      // the next substream; sampling error alone trips the check now and then.
      for (std::uint64_t attempt = 0; attempt < kMaxColumnRedraws; ++attempt) {
        Rng column_stream =
            MakeStream(spec.seed, {1, static_cast<std::uint64_t>(j), attempt});
        std::normal_distribution<double> normal(parent.mean, parent.sd);
        for (Eigen::Index i = 0; i < n; ++i) {
          double x = normal(column_stream);
          while (x < col.lower) x = normal(column_stream);
          regressors(i, j) = x;
        }
        if (n < kMomentCheckRows ||
            detail::WithinMoments(regressors.col(j), col.mean, col.sd, kMomentTolerance)) {
          break;
        }
      }
    }
    const double sd = col.kind == ColumnKind::kDummy
                          ? std::sqrt(col.mean * (1.0 - col.mean))
                          : col.sd;
    signal += (col.coefficient / sd) * (regressors.col(j).array() - col.mean).matrix();
  }

  Rng error_stream = MakeStream(spec.seed, {2});
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd z(n);
  for (Eigen::Index i = 0; i < n; ++i) z(i) = normal(error_stream);

  std::vector<std::string> names;
  for (const auto& col : spec.columns) names.push_back(col.name);
  Eigen::MatrixXd design(n, p + 1);
  design.col(0).setOnes();
  design.rightCols(p) = regressors;
  const LeastSquares solver(design);

  const Eigen::VectorXd s_c = (signal.array() - signal.mean()).matrix();
  const Eigen::VectorXd z_c = (z.array() - z.mean()).matrix();
  const double sig_ss = s_c.squaredNorm();
  const double cross = s_c.dot(z_c);
  const double z_ss = z_c.squaredNorm();
  // The signal lies in col(X), so only z contributes to the residual.
  const double z_resid = solver.ResidualSumOfSquares(z);
  auto r_squared = [&](double sigma) {
    const double tss = sig_ss + 2.0 * sigma * cross + sigma * sigma * z_ss;
    return 1.0 - sigma * sigma * z_resid / tss;
  };

  const double signal_sd = std::sqrt(sig_ss / static_cast<double>(n - 1));
  double sigma = spec.error_scale * signal_sd;
  if (spec.target_r_squared) {
    const double target = *spec.target_r_squared;
    if (!(signal_sd > 0.0)) {
      throw Error(ErrorCode::kInvalidSpec, "all coefficients are zero; R^2 is not controllable");
    }
    if (target < 1.0) {
      double lo = 0.0;
      double hi = signal_sd;
      int expand = 0;
      while (r_squared(hi) > target) {
        hi *= 2.0;
        if (++expand > 200) {
          throw Error(ErrorCode::kInvalidSpec, "target R^2 is below the attainable range");
        }
      }
      for (int iter = 0; iter < 200; ++iter) {
        const double mid = 0.5 * (lo + hi);
        if (r_squared(mid) > target) {
          lo = mid;
        } else {
          hi = mid;
        }
      }
      sigma = 0.5 * (lo + hi);
    } else {
      sigma = 0.0;
    }
  }

  Eigen::VectorXd raw = signal + sigma * z;
  const double raw_sd = detail::SampleSd(raw);
  if (!(raw_sd > 0.0)) {
    throw Error(ErrorCode::kInvalidSpec, "generated response is constant");
  }
  Eigen::VectorXd response =
      (spec.response_mean + spec.response_sd * (raw.array() - raw.mean()) / raw_sd).matrix();

  Dataset data = Dataset::FromRegressors(regressors, std::move(response), std::move(names),
                                         spec.response_name);
  if (n >= kMomentCheckRows) {
    const auto off = CheckRealizedMoments(data, spec, kMomentTolerance);
    if (!off.empty()) {
      throw Error(ErrorCode::kInvalidSpec,
                  "column '" + off.front().column + "' realized mean " +
                      FormatDouble(off.front().realized_mean) + " / sd " +
                      FormatDouble(off.front().realized_sd) + " is more than 5% off target");
    }
  }
  return data;
}

}  // namespace regperturb

#endif  // REGPERTURB_SYNTH_HPP_
