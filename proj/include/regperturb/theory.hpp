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
#ifndef REGPERTURB_THEORY_HPP_
#define REGPERTURB_THEORY_HPP_

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "regperturb/dataset.hpp"
#include "regperturb/error.hpp"
#include "regperturb/format.hpp"
#include "regperturb/noise.hpp"
#include "regperturb/ols.hpp"

namespace regperturb {

// Closed-form effect of a perturbation with parameters (a, b) on a fit
// whose coefficient of determination is `r_squared_original`.
struct TheoryPrediction {
  double a = 0.0;
  double b = 0.0;
  double r_squared_original = 0.0;
  // Common ratio t~_j / t_j over all coefficients.
  double t_scale = 1.0;
  double r_squared_perturbed = 0.0;
  // corr(y, y + eps).
  double correlation = 0.0;
};

inline TheoryPrediction Predict(double a, double b, double r2) {
  if (!(a != 0.0) || !(b >= 0.0) || !(r2 >= 0.0 && r2 < 1.0) ||
      !std::isfinite(a) || !std::isfinite(b)) {
    throw Error(ErrorCode::kInvalidParameters,
                "need a != 0, b >= 0 and 0 <= R^2 < 1");
  }
  const double quad = a * (a + 2.0);
  const double dof_scale = 1.0 + b + quad;
  if (!(dof_scale > 0.0)) {
    // RSS of the release would be <= 0: no real t-values.
    throw Error(ErrorCode::kUndefinedScale,
                "1 + b + a(a+2) must be positive");
  }
  const double dev_scale = 1.0 + b + quad * (1.0 - r2);
  TheoryPrediction p;
  p.a = a;
  p.b = b;
  p.r_squared_original = r2;
  p.t_scale = std::sqrt((1.0 + b) / dof_scale);
  p.r_squared_perturbed = (1.0 + b) * r2 / dev_scale;
  p.correlation = (1.0 + b + a * (1.0 - r2)) /
                  (std::sqrt(1.0 + b) * std::sqrt(dev_scale));
  return p;
}

// Both roots of a(a+2) = b + 1, i.e. a = -1 +/- sqrt(b+2). Each scales all
// t-values by 1/sqrt(2) and maps R^2 to R^2/(2-R^2), which a data user can
// invert.
inline std::pair<double, double> ReducedAccuracyParams(double b) {
  if (!(b > 0.0) || !std::isfinite(b)) {
    throw Error(ErrorCode::kInvalidParameters, "reduced accuracy needs b > 0");
  }
  const double root = std::sqrt(b + 2.0);
  return {-1.0 + root, -1.0 - root};
}

struct VerificationCheck {
  std::string name;
  double expected = 0.0;
  double observed = 0.0;
  double abs_deviation = 0.0;
  double rel_deviation = 0.0;
  bool passed = false;
};

struct VerificationReport {
  TheoryPrediction prediction;
  std::vector<VerificationCheck> checks;
  double tolerance = 0.0;
  bool passed = false;

  double max_rel_deviation() const {
    double worst = 0.0;
    for (const auto& c : checks) worst = std::max(worst, c.rel_deviation);
    return worst;
  }

  // Flat key=value lines, stable key order.
  std::string ToKeyValue() const;
};

namespace detail {

inline VerificationCheck MakeCheck(std::string name, double expected,
                                   double observed, double tol) {
  VerificationCheck c;
  c.name = std::move(name);
  c.expected = expected;
  c.observed = observed;
  c.abs_deviation = std::abs(observed - expected);
  c.rel_deviation = expected != 0.0 ? c.abs_deviation / std::abs(expected)
                                    : c.abs_deviation;
  c.passed = c.rel_deviation <= tol;
  return c;
}

}  // namespace detail

inline std::string VerificationReport::ToKeyValue() const {
  std::string out;
  auto line = [&out](const std::string& key, const std::string& value) {
    out += key;
    out += '=';
    out += value;
    out += '\n';
  };
  line("status", passed ? "pass" : "fail");
  line("tolerance", FormatDouble(tolerance));
  line("a", FormatDouble(prediction.a));
  line("b", FormatDouble(prediction.b));
  line("predicted.t_scale", FormatDouble(prediction.t_scale));
  line("predicted.r_squared", FormatDouble(prediction.r_squared_perturbed));
  line("predicted.correlation", FormatDouble(prediction.correlation));
  line("max_rel_deviation", FormatDouble(max_rel_deviation()));
  for (const auto& c : checks) {
    const std::string prefix = "check." + c.name + ".";
    line(prefix + "expected", FormatDouble(c.expected));
    line(prefix + "observed", FormatDouble(c.observed));
    line(prefix + "abs_dev", FormatDouble(c.abs_deviation));
    line(prefix + "rel_dev", FormatDouble(c.rel_deviation));
    line(prefix + "status", c.passed ? "pass" : "fail");
  }
  return out;
}

// Refits the released response and compares it with the closed forms.
inline VerificationReport VerifyRelease(const Dataset& data,
                                        const Eigen::VectorXd& released,
                                        double a, double b, double tol) {
  if (released.size() != data.rows()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "release has " + std::to_string(released.size()) +
                    " rows, original has " + std::to_string(data.rows()));
  }
  const RegressionFit original = FitOls(data);
  const RegressionFit perturbed = Refit(original, data.WithResponse(released));

  VerificationReport report;
  report.tolerance = tol;
  report.prediction = Predict(a, b, original.r_squared);
  const TheoryPrediction& pred = report.prediction;

  using detail::MakeCheck;
  report.checks.push_back(MakeCheck("mean", original.y_bar, perturbed.y_bar, tol));
  for (Eigen::Index j = 0; j < original.beta_hat.size(); ++j) {
    report.checks.push_back(MakeCheck("beta." + std::to_string(j),
                                      original.beta_hat(j),
                                      perturbed.beta_hat(j), tol));
  }
  for (Eigen::Index j = 0; j < original.t_values.size(); ++j) {
    report.checks.push_back(MakeCheck("t." + std::to_string(j),
                                      pred.t_scale * original.t_values(j),
                                      perturbed.t_values(j), tol));
  }
  report.checks.push_back(MakeCheck("r_squared", pred.r_squared_perturbed,
                                    perturbed.r_squared, tol));
  report.checks.push_back(MakeCheck("correlation", pred.correlation,
                                    PearsonCorrelation(data.response(), released),
                                    tol));
  report.passed = std::all_of(report.checks.begin(), report.checks.end(),
                              [](const auto& c) { return c.passed; });
  return report;
}

inline VerificationReport VerifyRelease(const Dataset& data,
                                        const PerturbedRelease& release,
                                        double tol) {
  return VerifyRelease(data, release.y_perturbed, release.spec.a,
                       release.spec.b, tol);
}

// corr(y, y + eps) for a = -2 over r2 in {0.4, 0.6, 0.8} and
// b in {0, 0.25, ..., 2.0}.
struct CorrelationTable {
  std::vector<double> r_squared_rows;
  std::vector<double> b_columns;
  // values[row][col]
  std::vector<std::vector<double>> values;

  // CSV with cells rounded to `digits` decimals.
  std::string ToCsv(int digits = 2) const {
    std::string out = "r2\\b";
    for (double b : b_columns) out += "," + FormatFixed(b, 2);
    out += '\n';
    for (std::size_t r = 0; r < r_squared_rows.size(); ++r) {
      out += FormatFixed(r_squared_rows[r], 1);
      for (double v : values[r]) out += "," + FormatFixed(v, digits);
      out += '\n';
    }
    return out;
  }
};

inline CorrelationTable MakeCorrelationTable(
    double a = -2.0, std::vector<double> r2_rows = {0.4, 0.6, 0.8},
    std::vector<double> b_cols = {0.0, 0.25, 0.5, 0.75, 1.0, 1.25, 1.5, 1.75,
                                  2.0}) {
  CorrelationTable table;
  table.r_squared_rows = std::move(r2_rows);
  table.b_columns = std::move(b_cols);
  for (double r2 : table.r_squared_rows) {
    std::vector<double> row;
    row.reserve(table.b_columns.size());
    for (double b : table.b_columns) row.push_back(Predict(a, b, r2).correlation);
    table.values.push_back(std::move(row));
  }
  return table;
}

}  // namespace regperturb

#endif  // REGPERTURB_THEORY_HPP_
