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
#ifndef REGPERTURB_CALIBRATION_HPP_
#define REGPERTURB_CALIBRATION_HPP_

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <iterator>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <Eigen/Dense>

#include "regperturb/chow.hpp"
#include "regperturb/dataset.hpp"
#include "regperturb/error.hpp"
#include "regperturb/fdist.hpp"
#include "regperturb/format.hpp"
#include "regperturb/noise.hpp"
#include "regperturb/ols.hpp"
#include "regperturb/seed.hpp"

namespace regperturb {

// Which fit the per-trial noise is built from.
enum class PerturbationScope {
  // Perturb the full dataset, then compare original and perturbed responses
  // on a random subsample. This is what a user of a published release sees.
  kFullData,
  // Fit and perturb the subsample itself. With a = -2 the subsample
  // coefficients are then preserved exactly and every F is 0.
  kSubsample,
};

struct CalibrationPlan {
  std::vector<double> q_grid = {0.05, 0.10, 0.20, 0.30, 0.40,
                                0.50, 0.60, 0.70, 0.80, 0.90};
  std::vector<double> b_grid = {0.5, 0.6, 0.7, 0.8, 0.9, 1.0, 1.1,
                                1.2, 1.3, 1.4, 1.5, 2.0, 2.5};
  int trials = 1000;
  double alpha = 0.05;
  double a = -2.0;
  std::uint64_t master_seed = 0;
  PerturbationScope scope = PerturbationScope::kFullData;
  // Reuse subsample t of grid column q for every b.
  bool share_subsamples_across_b = false;
  std::optional<bool> positivity_required;
  int max_retries = 100;
  // Worker threads; results do not depend on this.
  unsigned workers = 1;
};

inline Eigen::Index SubsampleSize(double q, Eigen::Index n) {
  return static_cast<Eigen::Index>(std::floor(q * static_cast<double>(n) + 1e-9));
}

inline void ValidatePlan(const CalibrationPlan& plan, Eigen::Index n,
                         Eigen::Index k) {
  if (plan.q_grid.empty() || plan.b_grid.empty()) {
    throw Error(ErrorCode::kInvalidParameters, "q and b grids must be nonempty");
  }
  if (plan.trials < 1) {
    throw Error(ErrorCode::kInvalidParameters, "trials must be >= 1");
  }
  if (!(plan.alpha > 0.0 && plan.alpha < 1.0)) {
    throw Error(ErrorCode::kInvalidParameters, "alpha must lie in (0, 1)");
  }
  if (!(plan.a != 0.0) || !std::isfinite(plan.a)) {
    throw Error(ErrorCode::kInvalidParameters, "a must be nonzero");
  }
  for (double b : plan.b_grid) {
    if (!(b >= 0.0) || !std::isfinite(b)) {
      throw Error(ErrorCode::kInvalidParameters, "b grid values must be >= 0");
    }
  }
  for (double q : plan.q_grid) {
    if (!(q > 0.0 && q <= 1.0)) {
      throw Error(ErrorCode::kInvalidParameters, "q must lie in (0, 1]");
    }
    const Eigen::Index m = SubsampleSize(q, n);
    if (m <= 2 * k) {
      throw Error(ErrorCode::kInsufficientData,
                  "q=" + FormatShortest(q) + " gives " + std::to_string(m) +
                      " rows, need more than 2(p+1)=" + std::to_string(2 * k));
    }
  }
}

inline constexpr std::array<double, 5> kPercentileLevels = {0.05, 0.10, 0.50,
                                                            0.90, 0.95};

struct CalibrationCell {
  int trials = 0;
  int accepted = 0;
  // Trials where perturbation or the Chow test raised an error; they count
  // as not accepted and are excluded from the percentiles.
  int failed = 0;
  std::map<ErrorCode, int> failure_codes;
  double acceptance = 0.0;
  // Nearest-rank percentiles of F at kPercentileLevels.
  std::array<double, 5> f_percentiles{};
};

struct CalibrationReport {
  std::vector<double> b_grid;
  std::vector<double> q_grid;
  std::vector<Eigen::Index> subsample_sizes;
  std::vector<double> critical_values;  // per q
  double alpha = 0.05;
  double a = -2.0;
  int trials = 0;
  // cells[b_index][q_index]
  std::vector<std::vector<CalibrationCell>> cells;
  // Minimal grid b with acceptance >= 1 - alpha, per q.
  std::vector<std::optional<double>> b_star_per_q;
  std::optional<double> recommended_b;

  const CalibrationCell& cell(std::size_t b_index, std::size_t q_index) const {
    return cells.at(b_index).at(q_index);
  }
};

// Nearest rank: the ceil(level * N)-th smallest value.
inline std::array<double, 5> NearestRankPercentiles(std::vector<double> values) {
  std::array<double, 5> out{};
  if (values.empty()) {
    out.fill(std::numeric_limits<double>::quiet_NaN());
    return out;
  }
  std::sort(values.begin(), values.end());
  const auto count = static_cast<double>(values.size());
  for (std::size_t i = 0; i < kPercentileLevels.size(); ++i) {
    auto rank = static_cast<std::size_t>(std::ceil(kPercentileLevels[i] * count - 1e-9));
    rank = std::clamp<std::size_t>(rank, 1, values.size());
    out[i] = values[rank - 1];
  }
  return out;
}

// Uniform sample of m distinct rows, in increasing order.
inline std::vector<Eigen::Index> DrawSubsample(Eigen::Index n, Eigen::Index m,
                                               Rng& stream) {
  std::vector<Eigen::Index> all(static_cast<std::size_t>(n));
  std::iota(all.begin(), all.end(), Eigen::Index{0});
  std::vector<Eigen::Index> rows;
  rows.reserve(static_cast<std::size_t>(m));
  std::sample(all.begin(), all.end(), std::back_inserter(rows), m, stream);
  return rows;
}

// Maximum of b* over q: the smallest grid value adequate for every examined
// subsample fraction.
inline double RecommendB(const CalibrationReport& report) {
  if (report.b_star_per_q.empty()) {
    throw Error(ErrorCode::kNoAdequateB, "calibration report is empty");
  }
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t qi = 0; qi < report.b_star_per_q.size(); ++qi) {
    const auto& b_star = report.b_star_per_q[qi];
    if (!b_star) {
      const std::string q =
          qi < report.q_grid.size() ? FormatShortest(report.q_grid[qi]) : "?";
      throw Error(ErrorCode::kNoAdequateB,
                  "no grid b reaches the target acceptance at q=" + q);
    }
    worst = std::max(worst, *b_star);
  }
  return worst;
}

namespace detail {

inline std::optional<double> MinimalPassingB(const CalibrationReport& report,
                                             std::size_t q_index) {
  std::optional<double> best;
  const double target = (1.0 - report.alpha) * report.trials - 1e-9;
  for (std::size_t bi = 0; bi < report.b_grid.size(); ++bi) {
    if (report.cells[bi][q_index].accepted >= target) {
      if (!best || report.b_grid[bi] < *best) best = report.b_grid[bi];
    }
  }
  return best;
}

}  // namespace detail

// Monte-Carlo sweep over (b, q): for each trial draw a subsample of
// floor(q n) rows, generate a perturbed response with parameters (a, b), and
// Chow-test the original against the perturbed regression on that subsample.
//
// Streams are keyed by (master_seed, purpose, b_index, q_index, trial), and
// perturbation retries extend the key with the retry index, so any trial
// can be replayed on its own and the report does not depend on `workers`.
inline CalibrationReport RunCalibration(const Dataset& data,
                                        const CalibrationPlan& plan) {
  const Eigen::Index n = data.rows();
  const Eigen::Index k = data.parameters();
  ValidatePlan(plan, n, k);

  CalibrationReport report;
  report.b_grid = plan.b_grid;
  report.q_grid = plan.q_grid;
  report.alpha = plan.alpha;
  report.a = plan.a;
  report.trials = plan.trials;
  for (double q : plan.q_grid) {
    const Eigen::Index m = SubsampleSize(q, n);
    report.subsample_sizes.push_back(m);
    report.critical_values.push_back(
        FQuantile(static_cast<double>(k), static_cast<double>(2 * m - 2 * k),
                  plan.alpha));
  }

  const RegressionFit full_fit = FitOls(data);
  const std::size_t nb = plan.b_grid.size();
  const std::size_t nq = plan.q_grid.size();
  const auto nt = static_cast<std::size_t>(plan.trials);
  const double nan = std::numeric_limits<double>::quiet_NaN();
  // NaN marks a failed trial.
  std::vector<double> f_values(nb * nq * nt, nan);
  std::vector<ErrorCode> failure(nb * nq * nt, ErrorCode::kInvalidParameters);

  auto run_trial = [&](std::size_t bi, std::size_t qi, std::size_t t) {
    const Eigen::Index m = report.subsample_sizes[qi];
    const std::uint64_t b_key =
        plan.share_subsamples_across_b ? std::numeric_limits<std::uint64_t>::max() : bi;
    Rng sub_stream = MakeStream(
        plan.master_seed,
        {static_cast<std::uint64_t>(StreamPurpose::kSubsample), b_key, qi, t});
    const std::vector<Eigen::Index> rows = DrawSubsample(n, m, sub_stream);

    NoiseSpec spec;
    spec.a = plan.a;
    spec.b = plan.b_grid[bi];
    spec.seed = DeriveSeed(plan.master_seed,
                           {static_cast<std::uint64_t>(StreamPurpose::kNoise), bi, qi, t});
    spec.positivity_required = plan.positivity_required;
    spec.max_retries = plan.max_retries;

    const Dataset sub = data.SelectRows(rows);
    Eigen::VectorXd perturbed(m);
    if (plan.scope == PerturbationScope::kFullData) {
      const PerturbedRelease release = Perturb(data, full_fit, spec);
      for (Eigen::Index r = 0; r < m; ++r) {
        perturbed(r) = release.y_perturbed(rows[static_cast<std::size_t>(r)]);
      }
    } else {
      perturbed = Perturb(sub, spec).y_perturbed;
    }
    return ChowStatistic(sub.design(), sub.response(), sub.design(), perturbed).f_value;
  };

  const std::size_t total = f_values.size();
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (std::size_t idx = next.fetch_add(1); idx < total; idx = next.fetch_add(1)) {
      const std::size_t t = idx % nt;
      const std::size_t qi = (idx / nt) % nq;
      const std::size_t bi = idx / (nt * nq);
      try {
        f_values[idx] = run_trial(bi, qi, t);
      } catch (const Error& err) {
        f_values[idx] = nan;
        failure[idx] = err.code();
      }
    }
  };
  const unsigned workers = std::max(1u, plan.workers);
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  report.cells.assign(nb, std::vector<CalibrationCell>(nq));
  for (std::size_t bi = 0; bi < nb; ++bi) {
    for (std::size_t qi = 0; qi < nq; ++qi) {
      CalibrationCell& cell = report.cells[bi][qi];
      cell.trials = plan.trials;
      std::vector<double> finite;
      finite.reserve(nt);
      const double critical = report.critical_values[qi];
      for (std::size_t t = 0; t < nt; ++t) {
        const std::size_t idx = (bi * nq + qi) * nt + t;
        const double f = f_values[idx];
        if (std::isnan(f)) {
          ++cell.failed;
          ++cell.failure_codes[failure[idx]];
          continue;
        }
        finite.push_back(f);
        if (f < critical) ++cell.accepted;
      }
      cell.acceptance = static_cast<double>(cell.accepted) / plan.trials;
      cell.f_percentiles = NearestRankPercentiles(std::move(finite));
    }
  }
  for (std::size_t qi = 0; qi < nq; ++qi) {
    report.b_star_per_q.push_back(detail::MinimalPassingB(report, qi));
  }
  const bool all_found = std::all_of(report.b_star_per_q.begin(),
                                     report.b_star_per_q.end(),
                                     [](const auto& b) { return b.has_value(); });
  if (all_found) report.recommended_b = RecommendB(report);
  return report;
}

// Rows b, columns q, acceptance fractions with three decimals.
inline std::string AcceptanceTableCsv(const CalibrationReport& report) {
  std::string out = "b\\q";
  for (double q : report.q_grid) out += "," + FormatFixed(q, 2);
  out += '\n';
  for (std::size_t bi = 0; bi < report.b_grid.size(); ++bi) {
    out += FormatShortest(report.b_grid[bi]);
    for (std::size_t qi = 0; qi < report.q_grid.size(); ++qi) {
      out += "," + FormatFixed(report.cells[bi][qi].acceptance, 3);
    }
    out += '\n';
  }
  return out;
}

// Long format, one row per (b, q), backing an F-versus-b plot.
inline std::string PercentileTableCsv(const CalibrationReport& report) {
  std::string out =
      "b,q,subsample,critical_value,trials,accepted,failed,acceptance,"
      "f_p05,f_p10,f_p50,f_p90,f_p95\n";
  for (std::size_t bi = 0; bi < report.b_grid.size(); ++bi) {
    for (std::size_t qi = 0; qi < report.q_grid.size(); ++qi) {
      const CalibrationCell& c = report.cells[bi][qi];
      out += FormatShortest(report.b_grid[bi]) + "," +
             FormatShortest(report.q_grid[qi]) + "," +
             std::to_string(report.subsample_sizes[qi]) + "," +
             FormatDouble(report.critical_values[qi]) + "," +
             std::to_string(c.trials) + "," + std::to_string(c.accepted) + "," +
             std::to_string(c.failed) + "," + FormatFixed(c.acceptance, 3);
      for (double f : c.f_percentiles) out += "," + FormatDouble(f);
      out += '\n';
    }
  }
  return out;
}

inline std::string CalibrationSummary(const CalibrationReport& report) {
  std::string out;
  out += "alpha=" + FormatShortest(report.alpha) + "\n";
  out += "a=" + FormatShortest(report.a) + "\n";
  out += "trials=" + std::to_string(report.trials) + "\n";
  int failed = 0;
  std::map<ErrorCode, int> codes;
  for (const auto& row : report.cells) {
    for (const auto& c : row) {
      failed += c.failed;
      for (const auto& [code, count] : c.failure_codes) codes[code] += count;
    }
  }
  out += "failed_trials=" + std::to_string(failed) + "\n";
  for (const auto& [code, count] : codes) {
    out += "failures." + std::string(ErrorCodeName(code)) + "=" +
           std::to_string(count) + "\n";
  }
  for (std::size_t qi = 0; qi < report.q_grid.size(); ++qi) {
    const auto& b_star = report.b_star_per_q[qi];
    out += "b_star.q" + FormatShortest(report.q_grid[qi]) + "=" +
           (b_star ? FormatShortest(*b_star) : std::string("none")) + "\n";
  }
  out += "recommended_b=" +
         (report.recommended_b ? FormatShortest(*report.recommended_b)
                               : std::string("none")) +
         "\n";
  return out;
}

}  // namespace regperturb

#endif  // REGPERTURB_CALIBRATION_HPP_
