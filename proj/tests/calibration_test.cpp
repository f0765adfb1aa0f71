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
#include <set>

#include <gtest/gtest.h>

#include "regperturb/calibration.hpp"
#include "regperturb/synth.hpp"
#include "test_support.hpp"

namespace regperturb {
namespace {

using testing::RandomInstance;

CalibrationPlan SmallPlan() {
  CalibrationPlan plan;
  plan.q_grid = {0.3, 0.6};
  plan.b_grid = {0.5, 1.0, 2.0};
  plan.trials = 40;
  plan.master_seed = 17;
  return plan;
}

TEST(Calibration, FullSampleAcceptsEverything) {
  const Dataset data = RandomInstance(120, 4, 1);
  for (PerturbationScope scope : {PerturbationScope::kFullData, PerturbationScope::kSubsample}) {
    CalibrationPlan plan = SmallPlan();
    plan.q_grid = {1.0};
    plan.scope = scope;
    const CalibrationReport report = RunCalibration(data, plan);
    for (std::size_t bi = 0; bi < plan.b_grid.size(); ++bi) {
      EXPECT_EQ(report.cell(bi, 0).acceptance, 1.0);
      EXPECT_EQ(report.cell(bi, 0).failed, 0);
    }
  }
}

TEST(Calibration, SubsampleScopeWithMinusTwoIsExact) {
  // Perturbing the subsample's own fit with a = -2 leaves its regression intact.
  const Dataset data = RandomInstance(200, 3, 2);
  CalibrationPlan plan = SmallPlan();
  plan.scope = PerturbationScope::kSubsample;
  const CalibrationReport report = RunCalibration(data, plan);
  for (std::size_t bi = 0; bi < plan.b_grid.size(); ++bi) {
    for (std::size_t qi = 0; qi < plan.q_grid.size(); ++qi) {
      EXPECT_EQ(report.cell(bi, qi).acceptance, 1.0);
      EXPECT_LT(report.cell(bi, qi).f_percentiles[4], 1e-9);
    }
  }
}

TEST(Calibration, ReproducibleAcrossRunsAndWorkers) {
  const Dataset data = RandomInstance(150, 3, 3);
  CalibrationPlan plan = SmallPlan();
  const CalibrationReport first = RunCalibration(data, plan);
  const CalibrationReport second = RunCalibration(data, plan);
  plan.workers = 4;
  const CalibrationReport threaded = RunCalibration(data, plan);
  for (const CalibrationReport* other : {&second, &threaded}) {
    EXPECT_EQ(AcceptanceTableCsv(first), AcceptanceTableCsv(*other));
    EXPECT_EQ(PercentileTableCsv(first), PercentileTableCsv(*other));
    EXPECT_EQ(CalibrationSummary(first), CalibrationSummary(*other));
  }
}

TEST(Calibration, SeedChangesResults) {
  const Dataset data = RandomInstance(150, 3, 4);
  CalibrationPlan plan = SmallPlan();
  const std::string base = PercentileTableCsv(RunCalibration(data, plan));
  plan.master_seed = 18;
  EXPECT_NE(base, PercentileTableCsv(RunCalibration(data, plan)));
}

TEST(Calibration, SharedSubsamplesAreReusedAcrossB) {
  const Dataset data = RandomInstance(150, 3, 5);
  CalibrationPlan plan = SmallPlan();
  plan.share_subsamples_across_b = true;
  EXPECT_NO_THROW(RunCalibration(data, plan));
  Rng s0 = MakeStream(plan.master_seed, {1, std::numeric_limits<std::uint64_t>::max(), 0, 0});
  Rng s1 = MakeStream(plan.master_seed, {1, std::numeric_limits<std::uint64_t>::max(), 0, 0});
  EXPECT_EQ(DrawSubsample(150, 45, s0), DrawSubsample(150, 45, s1));
}

TEST(Calibration, PercentilesAreOrderedAndMedianFallsWithB) {
  const Dataset data = GenerateSynthetic(HousingSynthSpec(600, 0.78, 3));
  CalibrationPlan plan;
  plan.q_grid = {0.2};
  plan.b_grid = {0.5, 1.0, 1.5, 2.0, 2.5};
  plan.trials = 300;
  plan.master_seed = 8;
  const CalibrationReport report = RunCalibration(data, plan);
  double previous_median = std::numeric_limits<double>::infinity();
  for (std::size_t bi = 0; bi < plan.b_grid.size(); ++bi) {
    const auto& pct = report.cell(bi, 0).f_percentiles;
    for (std::size_t i = 1; i < pct.size(); ++i) EXPECT_LE(pct[i - 1], pct[i]);
    EXPECT_LE(pct[2], previous_median) << "b=" << plan.b_grid[bi];
    previous_median = pct[2];
  }
}

TEST(Calibration, RejectsTooSmallSubsample) {
  const Dataset data = RandomInstance(100, 5, 6);
  CalibrationPlan plan = SmallPlan();
  plan.q_grid = {0.1};
  try {
    RunCalibration(data, plan);
    FAIL() << "expected InsufficientData";
  } catch (const Error& err) {
    EXPECT_EQ(err.code(), ErrorCode::kInsufficientData);
  }
  plan.q_grid = {0.13};
  EXPECT_NO_THROW(ValidatePlan(plan, 100, 6));
  plan.trials = 0;
  EXPECT_THROW(ValidatePlan(plan, 100, 6), Error);
}

TEST(Calibration, FailedTrialsAreCounted) {
  Eigen::MatrixXd x(12, 1);
  Eigen::VectorXd y(12);
  for (int i = 0; i < 12; ++i) {
    x(i, 0) = i;
    y(i) = 100.0 - 8.0 * i + ((i % 2 == 0) ? 1.0 : -1.0);
  }
  y(11) = 60.0;
  const Dataset data = Dataset::FromRegressors(x, y, {"x"}, "price");
  CalibrationPlan plan;
  plan.q_grid = {1.0};
  plan.b_grid = {0.0};
  plan.trials = 5;
  plan.positivity_required = true;
  const CalibrationReport report = RunCalibration(data, plan);
  const CalibrationCell& cell = report.cell(0, 0);
  EXPECT_EQ(cell.failed, 5);
  EXPECT_EQ(cell.accepted, 0);
  EXPECT_EQ(cell.failure_codes.at(ErrorCode::kPositivityUnachievable), 5);
  EXPECT_FALSE(report.recommended_b.has_value());
  EXPECT_NE(CalibrationSummary(report).find("failures.PositivityUnachievable=5"),
            std::string::npos);
}

CalibrationReport ReportWithBStars(std::vector<std::optional<double>> stars) {
  CalibrationReport report;
  report.q_grid.assign(stars.size(), 0.1);
  report.b_star_per_q = std::move(stars);
  return report;
}

TEST(RecommendB, TakesMaximumOverQ) {
  EXPECT_DOUBLE_EQ(RecommendB(ReportWithBStars({0.9, 1.0, 1.1})), 1.1);
  EXPECT_DOUBLE_EQ(RecommendB(ReportWithBStars({1.0, 1.0, 1.0})), 1.0);
}

TEST(RecommendB, MissingBStarIsReported) {
  try {
    RecommendB(ReportWithBStars({std::nullopt, 1.0}));
    FAIL() << "expected NoAdequateB";
  } catch (const Error& err) {
    EXPECT_EQ(err.code(), ErrorCode::kNoAdequateB);
  }
  EXPECT_THROW(RecommendB(ReportWithBStars({})), Error);
}

TEST(RecommendB, MinimalPassingBUsesAlphaThreshold) {
  CalibrationReport report;
  report.alpha = 0.05;
  report.trials = 100;
  report.b_grid = {0.5, 1.0, 1.5};
  report.q_grid = {0.2};
  report.cells = {{CalibrationCell{.accepted = 94}}, {CalibrationCell{.accepted = 95}},
                  {CalibrationCell{.accepted = 100}}};
  EXPECT_EQ(detail::MinimalPassingB(report, 0), 1.0);
}

TEST(NearestRank, PicksCeilingRank) {
  std::vector<double> values;
  for (int i = 100; i >= 1; --i) values.push_back(i);
  const auto pct = NearestRankPercentiles(values);
  EXPECT_EQ(pct[0], 5.0);
  EXPECT_EQ(pct[1], 10.0);
  EXPECT_EQ(pct[2], 50.0);
  EXPECT_EQ(pct[3], 90.0);
  EXPECT_EQ(pct[4], 95.0);
  EXPECT_TRUE(std::isnan(NearestRankPercentiles({})[2]));
  EXPECT_EQ(NearestRankPercentiles({3.0})[0], 3.0);
}

TEST(DrawSubsample, DistinctRowsInRange) {
  Rng s = MakeStream(3, {});
  const auto rows = DrawSubsample(50, 20, s);
  ASSERT_EQ(rows.size(), 20u);
  const std::set<Eigen::Index> unique(rows.begin(), rows.end());
  EXPECT_EQ(unique.size(), 20u);
  EXPECT_GE(*unique.begin(), 0);
  EXPECT_LT(*unique.rbegin(), 50);
}

TEST(Calibration, TableLayout) {
  const Dataset data = RandomInstance(150, 3, 7);
  const CalibrationReport report = RunCalibration(data, SmallPlan());
  const std::string table = AcceptanceTableCsv(report);
  EXPECT_EQ(table.substr(0, table.find('\n')), "b\\q,0.30,0.60");
  const std::string pct = PercentileTableCsv(report);
  EXPECT_EQ(pct.substr(0, pct.find('\n')),
            "b,q,subsample,critical_value,trials,accepted,failed,acceptance,"
            "f_p05,f_p10,f_p50,f_p90,f_p95");
}

}  // namespace
}  // namespace regperturb
