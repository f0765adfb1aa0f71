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
#include <cstring>
#include <vector>

#include <gtest/gtest.h>

#include "regperturb/ols.hpp"
#include "test_support.hpp"

namespace regperturb {
namespace {

using testing::DenseProjector;
using testing::ExactNormalEquations;
using testing::RandomInstance;
using testing::RelativeError;
using testing::VectorL;

Dataset SmallLine() {
  Eigen::MatrixXd x(5, 1);
  x << 0, 1, 2, 3, 4;
  Eigen::VectorXd y(5);
  y << 1, 2, 2, 4, 4;
  return Dataset::FromRegressors(x, y, {"x"}, "y");
}

TEST(FitOls, MatchesExactNormalEquations) {
  const Dataset data = SmallLine();
  const RegressionFit fit = FitOls(data);
  const auto exact = ExactNormalEquations(data.design(), data.response());
  ASSERT_EQ(fit.beta_hat.size(), 2);
  for (Eigen::Index j = 0; j < 2; ++j) {
    EXPECT_LE(RelativeError(fit.beta_hat(j), testing::ToDouble(exact[std::size_t(j)])), 1e-12);
  }
  EXPECT_NEAR(fit.beta_hat(0), 1.0, 1e-12);
  EXPECT_NEAR(fit.beta_hat(1), 0.8, 1e-12);
}

TEST(FitOls, RandomInstancesMatchExactOracle) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const Dataset data = RandomInstance(40, 4, seed);
    const RegressionFit fit = FitOls(data);
    const auto exact = ExactNormalEquations(data.design(), data.response());
    for (Eigen::Index j = 0; j < fit.beta_hat.size(); ++j) {
      EXPECT_LE(RelativeError(fit.beta_hat(j), testing::ToDouble(exact[std::size_t(j)])),
                1e-10);
    }
  }
}

TEST(FitOls, PerfectFitHasZeroResidual) {
  Eigen::MatrixXd x(6, 1);
  x << 0, 1, 2, 3, 4, 5;
  const Eigen::VectorXd y = (3.0 + 2.0 * x.col(0).array()).matrix();
  const RegressionFit fit = FitOls(Dataset::FromRegressors(x, y, {"x"}, "y"));
  EXPECT_LE(fit.residual.norm(), 1e-12);
  EXPECT_NEAR(fit.r_squared, 1.0, 1e-12);
}

TEST(FitOls, InterceptOnly) {
  Eigen::MatrixXd design = Eigen::MatrixXd::Ones(4, 1);
  Eigen::VectorXd y(4);
  y << 2, 4, 6, 12;
  const RegressionFit fit = FitOls(Dataset::Create(design, y, {"(intercept)"}, "y"));
  EXPECT_NEAR(fit.beta_hat(0), 6.0, 1e-12);
  EXPECT_NEAR(fit.r_squared, 0.0, 1e-12);
}

TEST(FitOls, FitInvariantsOnRandomInstances) {
  for (std::uint64_t seed = 10; seed < 40; ++seed) {
    std::mt19937_64 gen(seed);
    const auto n = std::uniform_int_distribution<Eigen::Index>(20, 200)(gen);
    const auto p = std::uniform_int_distribution<Eigen::Index>(1, 10)(gen);
    const Dataset data = RandomInstance(n, p, seed);
    const RegressionFit fit = FitOls(data);
    const Eigen::MatrixXd& x = data.design();
    const Eigen::VectorXd& y = data.response();
    EXPECT_LE((x.transpose() * fit.residual).norm(), 1e-9 * x.norm() * y.norm());
    EXPECT_LE((fit.y_hat + fit.residual - y).norm(), 1e-12 * y.norm());
    EXPECT_NEAR(fit.r_squared, 1.0 - fit.rss / fit.tss, 1e-15);
    const double corr = PearsonCorrelation(y, fit.y_hat);
    EXPECT_NEAR(corr * corr, fit.r_squared, 1e-9);
  }
}

TEST(FitOls, TValuesUseSquareRootOfInverseGramDiagonal) {
  const Dataset data = RandomInstance(50, 3, 77);
  const RegressionFit fit = FitOls(data);
  const Eigen::MatrixXd gram_inv =
      (data.design().transpose() * data.design()).inverse();
  const double scale = std::sqrt(double(fit.dof)) / fit.residual_norm();
  for (Eigen::Index j = 0; j < fit.beta_hat.size(); ++j) {
    EXPECT_LE(RelativeError(fit.xtx_inv_diag(j), gram_inv(j, j)), 1e-10);
    const double expected = scale * fit.beta_hat(j) / std::sqrt(gram_inv(j, j));
    EXPECT_LE(RelativeError(fit.t_values(j), expected), 1e-10);
  }
}

TEST(FitOls, IsBitwiseDeterministic) {
  const Dataset data = RandomInstance(120, 6, 3);
  const RegressionFit first = FitOls(data);
  const RegressionFit second = FitOls(data);
  EXPECT_EQ(std::memcmp(first.beta_hat.data(), second.beta_hat.data(),
                        sizeof(double) * std::size_t(first.beta_hat.size())),
            0);
  EXPECT_EQ(std::memcmp(first.t_values.data(), second.t_values.data(),
                        sizeof(double) * std::size_t(first.t_values.size())),
            0);
  EXPECT_EQ(first.r_squared, second.r_squared);
}

TEST(FitOls, RejectsCollinearDesign) {
  Eigen::MatrixXd x(6, 2);
  x << 0, 0, 1, 2, 2, 4, 3, 6, 4, 8, 5, 10;
  Eigen::VectorXd y(6);
  y << 1, 3, 2, 5, 4, 6;
  const Dataset data = Dataset::FromRegressors(x, y, {"x", "twice_x"}, "y");
  try {
    FitOls(data);
    FAIL() << "expected RankDeficient";
  } catch (const Error& err) {
    EXPECT_EQ(err.code(), ErrorCode::kRankDeficient);
  }
}

TEST(FitOls, RejectsConstantResponse) {
  Eigen::MatrixXd x(4, 1);
  x << 0, 1, 2, 3;
  const Dataset data = Dataset::FromRegressors(x, Eigen::VectorXd::Constant(4, 7.0), {"x"}, "y");
  try {
    FitOls(data);
    FAIL() << "expected ConstantResponse";
  } catch (const Error& err) {
    EXPECT_EQ(err.code(), ErrorCode::kConstantResponse);
  }
}

TEST(Dataset, RejectsInvalidShapes) {
  Eigen::MatrixXd design = Eigen::MatrixXd::Ones(3, 2);
  design(0, 1) = 2.0;
  EXPECT_THROW(Dataset::Create(design, Eigen::VectorXd::Ones(2), {"(intercept)", "x"}, "y"),
               Error);
  Eigen::MatrixXd no_intercept = Eigen::MatrixXd::Random(5, 2);
  EXPECT_THROW(Dataset::Create(no_intercept, Eigen::VectorXd::Ones(5), {"a", "b"}, "y"), Error);
  Eigen::MatrixXd square = Eigen::MatrixXd::Ones(2, 2);
  EXPECT_THROW(Dataset::Create(square, Eigen::VectorXd::Ones(2), {"(intercept)", "x"}, "y"),
               Error);
}

TEST(ResidualProjector, AnnihilatesDesignColumns) {
  const Dataset data = RandomInstance(30, 3, 5);
  const RegressionFit fit = FitOls(data);
  for (Eigen::Index j = 0; j < data.parameters(); ++j) {
    const Eigen::VectorXd col = data.design().col(j);
    EXPECT_LE(ApplyResidualProjector(fit, data, col).norm(), 1e-12 * col.norm());
  }
}

TEST(ResidualProjector, IsIdempotentOnResidual) {
  const Dataset data = RandomInstance(30, 3, 6);
  const RegressionFit fit = FitOls(data);
  const Eigen::VectorXd again = ApplyResidualProjector(fit, data, fit.residual);
  EXPECT_LE((again - fit.residual).norm(), 1e-12 * fit.residual.norm());
}

TEST(ResidualProjector, MatchesDenseOracle) {
  const Dataset data = RandomInstance(20, 3, 7);
  const RegressionFit fit = FitOls(data);
  std::mt19937_64 gen(99);
  std::normal_distribution<double> normal;
  for (int rep = 0; rep < 5; ++rep) {
    Eigen::VectorXd w(20);
    for (auto& v : w) v = normal(gen);
    const VectorL oracle = DenseProjector(data.design()) * w.cast<long double>();
    const Eigen::VectorXd got = ApplyResidualProjector(fit, data, w);
    EXPECT_LE((got - oracle.cast<double>()).norm(), 1e-12 * w.norm());
  }
}

TEST(ResidualProjector, RejectsWrongLength) {
  const Dataset data = RandomInstance(20, 2, 8);
  const RegressionFit fit = FitOls(data);
  try {
    ApplyResidualProjector(fit, data, Eigen::VectorXd::Ones(19));
    FAIL() << "expected DimensionMismatch";
  } catch (const Error& err) {
    EXPECT_EQ(err.code(), ErrorCode::kDimensionMismatch);
  }
}

}  // namespace
}  // namespace regperturb
