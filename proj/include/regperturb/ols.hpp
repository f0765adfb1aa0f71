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
#ifndef REGPERTURB_OLS_HPP_
#define REGPERTURB_OLS_HPP_

#include <cmath>
#include <limits>
#include <memory>
#include <string>

#include <Eigen/Dense>

#include "regperturb/dataset.hpp"
#include "regperturb/error.hpp"

namespace regperturb {

// Column-pivoted Householder QR of a full-column-rank design, X P = Q R.
//
// Besides solving least squares problems this keeps an explicit thin
// orthonormal basis Q of col(X), so the residual maker I - X(X'X)^-1 X'
// can be applied as w - Q(Q'w) without ever forming an n x n matrix.
class LeastSquares {
 public:
  explicit LeastSquares(const Eigen::MatrixXd& design) : qr_(design) {
    const Eigen::Index n = design.rows();
    const Eigen::Index k = design.cols();
    if (n < k || k == 0) {
      throw Error(ErrorCode::kInsufficientData,
                  "least squares needs at least as many rows as columns");
    }
    // Pivoting makes |R_ii| nonincreasing, so the first and last entries
    // bound the spectrum of the factor diagonal.
    const auto& r = qr_.matrixQR();
    const double largest = std::abs(r(0, 0));
    const double smallest = std::abs(r(k - 1, k - 1));
    const double threshold = static_cast<double>(n) *
                             std::numeric_limits<double>::epsilon() * largest;
    if (!(largest > 0.0) || smallest < threshold) {
      throw Error(ErrorCode::kRankDeficient,
                  "design matrix is numerically rank deficient");
    }
    basis_ = qr_.householderQ() * Eigen::MatrixXd::Identity(n, k);
  }

  Eigen::Index rows() const { return basis_.rows(); }
  Eigen::Index cols() const { return basis_.cols(); }

  Eigen::VectorXd Solve(const Eigen::VectorXd& response) const {
    CheckLength(response);
    return qr_.solve(response);
  }

  // (I - X(X'X)^-1 X') w.
  Eigen::VectorXd Annihilate(const Eigen::VectorXd& w) const {
    CheckLength(w);
    return w - basis_ * (basis_.transpose() * w);
  }

  // Diagonal of (X'X)^-1 in the original column order.
  Eigen::VectorXd InverseGramDiagonal() const {
    const Eigen::Index k = cols();
    const auto r = qr_.matrixQR().topLeftCorner(k, k).triangularView<Eigen::Upper>();
    const Eigen::MatrixXd r_inv = r.solve(Eigen::MatrixXd::Identity(k, k));
    // (X'X)^-1 = P R^-1 R^-T P'.
    Eigen::VectorXd diag(k);
    const auto& perm = qr_.colsPermutation().indices();
    for (Eigen::Index i = 0; i < k; ++i) {
      diag(perm(i)) = r_inv.row(i).squaredNorm();
    }
    return diag;
  }

  double ResidualSumOfSquares(const Eigen::VectorXd& response) const {
    return Annihilate(response).squaredNorm();
  }

  const Eigen::MatrixXd& basis() const { return basis_; }

 private:
  void CheckLength(const Eigen::VectorXd& v) const {
    if (v.size() != rows()) {
      throw Error(ErrorCode::kDimensionMismatch,
                  "vector has length " + std::to_string(v.size()) +
                      ", expected " + std::to_string(rows()));
    }
  }

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr_;
  Eigen::MatrixXd basis_;
};

struct RegressionFit {
  Eigen::VectorXd beta_hat;
  Eigen::VectorXd y_hat;
  Eigen::VectorXd residual;
  double rss = 0.0;
  double tss = 0.0;
  double r_squared = 0.0;
  // sqrt(n-p-1) * beta_j / (sqrt(d_j) * |e|). Infinite or NaN when rss == 0.
  Eigen::VectorXd t_values;
  Eigen::VectorXd xtx_inv_diag;
  double y_bar = 0.0;
  // Residual degrees of freedom n - p - 1.
  Eigen::Index dof = 0;
  // Factorization of the design; shared so fits stay cheap to copy.
  std::shared_ptr<const LeastSquares> solver;

  double residual_norm() const { return std::sqrt(rss); }
};

inline RegressionFit FitOls(const Dataset& data,
                            std::shared_ptr<const LeastSquares> solver) {
  const Eigen::VectorXd& y = data.response();
  const Eigen::Index n = data.rows();
  const Eigen::Index k = data.parameters();

  RegressionFit fit;
  fit.y_bar = y.mean();
  fit.tss = (y.array() - fit.y_bar).matrix().squaredNorm();
  if (!(fit.tss > 0.0)) {
    throw Error(ErrorCode::kConstantResponse, "response is constant");
  }

  fit.solver = std::move(solver);
  fit.beta_hat = fit.solver->Solve(y);
  fit.residual = fit.solver->Annihilate(y);
  fit.y_hat = y - fit.residual;
  fit.rss = fit.residual.squaredNorm();
  fit.r_squared = 1.0 - fit.rss / fit.tss;
  fit.dof = n - k;
  fit.xtx_inv_diag = fit.solver->InverseGramDiagonal();

  const double scale =
      std::sqrt(static_cast<double>(fit.dof)) / std::sqrt(fit.rss);
  fit.t_values = scale * fit.beta_hat.array() / fit.xtx_inv_diag.array().sqrt();
  return fit;
}

inline RegressionFit FitOls(const Dataset& data) {
  return FitOls(data, std::make_shared<const LeastSquares>(data.design()));
}

// Refit a new response on a design that was already factorized.
inline RegressionFit Refit(const RegressionFit& fit, const Dataset& data) {
  if (!fit.solver || fit.solver->rows() != data.rows() ||
      fit.solver->cols() != data.parameters()) {
    throw Error(ErrorCode::kDimensionMismatch, "fit does not match dataset");
  }
  return FitOls(data, fit.solver);
}

inline Eigen::VectorXd ApplyResidualProjector(const RegressionFit& fit,
                                              const Dataset& data,
                                              const Eigen::VectorXd& w) {
  if (w.size() != data.rows() || !fit.solver ||
      fit.solver->rows() != data.rows()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "vector length does not match the fitted dataset");
  }
  return fit.solver->Annihilate(w);
}

inline double PearsonCorrelation(const Eigen::VectorXd& x,
                                 const Eigen::VectorXd& y) {
  if (x.size() != y.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "correlation of unequal lengths");
  }
  const Eigen::ArrayXd dx = x.array() - x.mean();
  const Eigen::ArrayXd dy = y.array() - y.mean();
  return (dx * dy).sum() /
         std::sqrt(dx.square().sum() * dy.square().sum());
}

}  // namespace regperturb

#endif  // REGPERTURB_OLS_HPP_
