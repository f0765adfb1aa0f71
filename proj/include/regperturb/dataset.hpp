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
#ifndef REGPERTURB_DATASET_HPP_
#define REGPERTURB_DATASET_HPP_

#include <cmath>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "regperturb/error.hpp"

namespace regperturb {

// A regression problem: design matrix with a leading intercept column and a
// response vector. Immutable once built; every factory validates shape,
// finiteness and the intercept column.
//
// Full column rank is not checked here since it needs a factorization;
// FitOls reports kRankDeficient instead.
class Dataset {
 public:
  // `design` must already contain the intercept as column 0.
  static Dataset Create(Eigen::MatrixXd design, Eigen::VectorXd response,
                        std::vector<std::string> column_names,
                        std::string response_name) {
    const Eigen::Index n = design.rows();
    const Eigen::Index k = design.cols();
    if (response.size() != n) {
      throw Error(ErrorCode::kDimensionMismatch,
                  "response has " + std::to_string(response.size()) +
                      " rows, design has " + std::to_string(n));
    }
    if (static_cast<Eigen::Index>(column_names.size()) != k) {
      throw Error(ErrorCode::kDimensionMismatch,
                  "expected " + std::to_string(k) + " column names, got " +
                      std::to_string(column_names.size()));
    }
    if (k < 1) {
      throw Error(ErrorCode::kInvalidSpec, "design needs an intercept column");
    }
    if (n <= k) {
      throw Error(ErrorCode::kInsufficientData,
                  "need more rows than parameters (n=" + std::to_string(n) +
                      ", p+1=" + std::to_string(k) + ")");
    }
    for (Eigen::Index i = 0; i < n; ++i) {
      if (design(i, 0) != 1.0) {
        throw Error(ErrorCode::kInvalidSpec,
                    "first design column must be all ones (row " +
                        std::to_string(i + 1) + ")");
      }
    }
    if (!design.allFinite() || !response.allFinite()) {
      throw Error(ErrorCode::kNonFiniteValue, "dataset contains non-finite values");
    }
    return Dataset(std::move(design), std::move(response),
                   std::move(column_names), std::move(response_name));
  }

  // Prepends the intercept column to `regressors` (n x p).
  static Dataset FromRegressors(const Eigen::MatrixXd& regressors,
                                Eigen::VectorXd response,
                                std::vector<std::string> regressor_names,
                                std::string response_name) {
    Eigen::MatrixXd design(regressors.rows(), regressors.cols() + 1);
    design.col(0).setOnes();
    design.rightCols(regressors.cols()) = regressors;
    std::vector<std::string> names;
    names.reserve(regressor_names.size() + 1);
    names.emplace_back("(intercept)");
    for (auto& name : regressor_names) names.push_back(std::move(name));
    return Create(std::move(design), std::move(response), std::move(names),
                  std::move(response_name));
  }

  const Eigen::MatrixXd& design() const { return design_; }
  const Eigen::VectorXd& response() const { return response_; }
  const std::vector<std::string>& column_names() const { return column_names_; }
  const std::string& response_name() const { return response_name_; }

  Eigen::Index rows() const { return design_.rows(); }
  // p + 1, including the intercept.
  Eigen::Index parameters() const { return design_.cols(); }

  // Same design, different response (e.g. a perturbed release).
  Dataset WithResponse(Eigen::VectorXd response) const {
    return Create(design_, std::move(response), column_names_, response_name_);
  }

  Dataset SelectRows(std::span<const Eigen::Index> rows) const {
    const auto m = static_cast<Eigen::Index>(rows.size());
    Eigen::MatrixXd design(m, design_.cols());
    Eigen::VectorXd response(m);
    for (Eigen::Index r = 0; r < m; ++r) {
      const Eigen::Index src = rows[static_cast<std::size_t>(r)];
      if (src < 0 || src >= design_.rows()) {
        throw Error(ErrorCode::kDimensionMismatch, "row index out of range");
      }
      design.row(r) = design_.row(src);
      response(r) = response_(src);
    }
    return Create(std::move(design), std::move(response), column_names_,
                  response_name_);
  }

 private:
  Dataset(Eigen::MatrixXd design, Eigen::VectorXd response,
          std::vector<std::string> column_names, std::string response_name)
      : design_(std::move(design)),
        response_(std::move(response)),
        column_names_(std::move(column_names)),
        response_name_(std::move(response_name)) {}

  Eigen::MatrixXd design_;
  Eigen::VectorXd response_;
  std::vector<std::string> column_names_;
  std::string response_name_;
};

}  // namespace regperturb

#endif  // REGPERTURB_DATASET_HPP_
