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
#ifndef REGPERTURB_CHOW_HPP_
#define REGPERTURB_CHOW_HPP_

#include <algorithm>
#include <limits>
#include <string>

#include <Eigen/Dense>

#include "regperturb/error.hpp"
#include "regperturb/fdist.hpp"
#include "regperturb/ols.hpp"

namespace regperturb {

// Classical sum-of-squares Chow test: do two groups sharing the same design
// columns follow one coefficient vector?
//
//   F = ((RSS_pooled - RSS_1 - RSS_2) / k) / ((RSS_1 + RSS_2) / (n1 + n2 - 2k))
//
// with k = p + 1 parameters.
struct ChowResult {
  double f_value = 0.0;
  int df1 = 0;
  int df2 = 0;
  double critical_value = 0.0;
  bool accepted = false;
  double rss_first = 0.0;
  double rss_second = 0.0;
  double rss_pooled = 0.0;
};

// F statistic only; critical_value and accepted are left unset. Used where
// the critical value is shared by many tests.
inline ChowResult ChowStatistic(const Eigen::MatrixXd& x1, const Eigen::VectorXd& y1,
                                const Eigen::MatrixXd& x2, const Eigen::VectorXd& y2) {
  if (x1.cols() != x2.cols()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "designs have " + std::to_string(x1.cols()) + " and " +
                    std::to_string(x2.cols()) + " columns");
  }
  if (x1.rows() != y1.size() || x2.rows() != y2.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "design and response lengths differ");
  }
  const Eigen::Index k = x1.cols();
  const Eigen::Index n1 = x1.rows();
  const Eigen::Index n2 = x2.rows();
  ChowResult result;
  result.df1 = static_cast<int>(k);
  result.df2 = static_cast<int>(n1 + n2 - 2 * k);
  if (result.df2 <= 0 || n1 < k || n2 < k) {
    throw Error(ErrorCode::kInsufficientData,
                "Chow test needs n1 + n2 > 2(p+1) and each group >= p+1 rows");
  }

  result.rss_first = LeastSquares(x1).ResidualSumOfSquares(y1);
  result.rss_second = LeastSquares(x2).ResidualSumOfSquares(y2);

  Eigen::MatrixXd pooled_x(n1 + n2, k);
  pooled_x << x1, x2;
  Eigen::VectorXd pooled_y(n1 + n2);
  pooled_y << y1, y2;
  result.rss_pooled = LeastSquares(pooled_x).ResidualSumOfSquares(pooled_y);

  const double separate = result.rss_first + result.rss_second;
  // The pooled fit is a constrained version of the separate fits, so the
  // numerator is >= 0 up to rounding.
  const double gain = std::max(0.0, result.rss_pooled - separate);
  if (gain == 0.0) {
    result.f_value = 0.0;
  } else if (!(separate > 0.0)) {
    result.f_value = std::numeric_limits<double>::infinity();
  } else {
    result.f_value = (gain / result.df1) / (separate / result.df2);
  }
  return result;
}

inline ChowResult ChowTest(const Eigen::MatrixXd& x1, const Eigen::VectorXd& y1,
                           const Eigen::MatrixXd& x2, const Eigen::VectorXd& y2,
                           double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw Error(ErrorCode::kInvalidParameters, "alpha must lie in (0, 1)");
  }
  ChowResult result = ChowStatistic(x1, y1, x2, y2);
  result.critical_value = FQuantile(result.df1, result.df2, alpha);
  result.accepted = result.f_value < result.critical_value;
  return result;
}

}  // namespace regperturb

#endif  // REGPERTURB_CHOW_HPP_
