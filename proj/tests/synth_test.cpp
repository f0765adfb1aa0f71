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
#include <gtest/gtest.h>

#include "regperturb/synth.hpp"

namespace regperturb {
namespace {

TEST(Synthetic, HousingShape) {
  const Dataset data = GenerateSynthetic(HousingSynthSpec(1320, 0.78, 1));
  EXPECT_EQ(data.rows(), 1320);
  EXPECT_EQ(data.parameters(), 14);
  EXPECT_EQ(data.response_name(), "price");
  EXPECT_EQ(data.column_names()[1], "station_minutes");
}

TEST(Synthetic, HitsTargetRSquared) {
  for (std::uint64_t seed : {1u, 7u, 42u}) {
    const double r2 = FitOls(GenerateSynthetic(HousingSynthSpec(1320, 0.78, seed))).r_squared;
    EXPECT_GE(r2, 0.76);
    EXPECT_LE(r2, 0.80);
  }
}

TEST(Synthetic, ZeroErrorScaleIsNoiseless) {
  SynthSpec spec = HousingSynthSpec(500, 0.78, 2);
  spec.target_r_squared.reset();
  spec.error_scale = 0.0;
  EXPECT_NEAR(FitOls(GenerateSynthetic(spec)).r_squared, 1.0, 1e-12);
}

TEST(Synthetic, MomentsWithinTolerance) {
  const SynthSpec spec = HousingSynthSpec(1320, 0.78, 3);
  const Dataset data = GenerateSynthetic(spec);
  EXPECT_TRUE(CheckRealizedMoments(data, spec, 0.05).empty());
  EXPECT_NEAR(data.response().mean(), 72431491.0, 0.05 * 72431491.0);
  const Eigen::VectorXd bus = data.design().col(2);
  EXPECT_NEAR(bus.mean(), 0.07, 0.0035);
  for (double v : bus) EXPECT_TRUE(v == 0.0 || v == 1.0);
  for (Eigen::Index j = 1; j < data.parameters(); ++j) {
    EXPECT_GE(data.design().col(j).minCoeff(), 0.0) << data.column_names()[std::size_t(j)];
  }
}

TEST(Synthetic, IsDeterministic) {
  const Dataset a = GenerateSynthetic(HousingSynthSpec(300, 0.7, 9));
  const Dataset b = GenerateSynthetic(HousingSynthSpec(300, 0.7, 9));
  const Dataset c = GenerateSynthetic(HousingSynthSpec(300, 0.7, 10));
  EXPECT_EQ(a.design(), b.design());
  EXPECT_EQ(a.response(), b.response());
  EXPECT_NE(a.response(), c.response());
}

TEST(Synthetic, RejectsInvalidSpecs) {
  SynthSpec spec = HousingSynthSpec(1320, 0.78, 1);
  spec.target_r_squared = 1.5;
  EXPECT_THROW(GenerateSynthetic(spec), Error);
  spec = HousingSynthSpec(10, 0.78, 1);
  EXPECT_THROW(GenerateSynthetic(spec), Error);
  spec = HousingSynthSpec(1320, 0.78, 1);
  spec.columns[0].sd = -1.0;
  EXPECT_THROW(GenerateSynthetic(spec), Error);
}

}  // namespace
}  // namespace regperturb
