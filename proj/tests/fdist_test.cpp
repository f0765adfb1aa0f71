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
#include <cmath>

#include <boost/math/distributions/fisher_f.hpp>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/special_functions/beta.hpp>
#include <gtest/gtest.h>

#include "golden.hpp"
#include "regperturb/fdist.hpp"

namespace regperturb {
namespace {

TEST(FQuantile, GoldenCriticalValue) {
  EXPECT_NEAR(FQuantile(14, 500, 0.05), testing::kGoldenCriticalF, 0.005);
}

TEST(FQuantile, OneDegreeOfFreedomApproachesSquaredNormal) {
  const boost::math::normal normal;
  const double z = boost::math::quantile(normal, 0.975);
  EXPECT_NEAR(FQuantile(1, 1e7, 0.05), z * z, 1e-5);
  EXPECT_NEAR(FQuantile(1, 1e7, 0.05), 3.8415, 1e-4);
}

TEST(FQuantile, RoundTripsThroughSurvival) {
  for (double df1 : {1.0, 2.0, 5.0, 14.0, 30.0}) {
    for (double df2 : {3.0, 20.0, 500.0, 5000.0}) {
      for (double alpha : {0.001, 0.01, 0.05, 0.5, 0.9}) {
        const double q = FQuantile(df1, df2, alpha);
        EXPECT_NEAR(FSurvival(q, df1, df2), alpha, 1e-9)
            << df1 << "," << df2 << "," << alpha;
        EXPECT_NEAR(FCdf(q, df1, df2), 1.0 - alpha, 1e-9);
      }
    }
  }
}

TEST(FQuantile, MatchesReferenceImplementation) {
  for (double df1 : {1.0, 3.0, 14.0, 50.0}) {
    for (double df2 : {2.0, 10.0, 500.0}) {
      for (double alpha : {0.01, 0.05, 0.2}) {
        const boost::math::fisher_f dist(df1, df2);
        const double expected = boost::math::quantile(boost::math::complement(dist, alpha));
        EXPECT_NEAR(FQuantile(df1, df2, alpha), expected, 1e-6 * std::max(1.0, expected));
      }
    }
  }
}

TEST(FCdf, MatchesReferenceImplementation) {
  for (double df1 : {1.0, 4.0, 14.0}) {
    for (double df2 : {5.0, 100.0, 500.0}) {
      const boost::math::fisher_f dist(df1, df2);
      for (double f : {0.01, 0.5, 1.0, 1.71, 3.0, 10.0}) {
        EXPECT_NEAR(FCdf(f, df1, df2), boost::math::cdf(dist, f), 1e-12);
        EXPECT_NEAR(FSurvival(f, df1, df2),
                    boost::math::cdf(boost::math::complement(dist, f)), 1e-12);
      }
    }
  }
  EXPECT_EQ(FCdf(0.0, 3, 4), 0.0);
}

TEST(RegularizedBeta, MatchesReferenceImplementation) {
  for (double a : {0.5, 1.0, 2.5, 7.0, 250.0}) {
    for (double b : {0.5, 3.0, 40.0}) {
      for (double x : {0.0, 0.01, 0.3, 0.5, 0.77, 0.99, 1.0}) {
        EXPECT_NEAR(RegularizedBeta(a, b, x), boost::math::ibeta(a, b, x), 1e-12);
        EXPECT_NEAR(RegularizedBetaComplement(a, b, x), boost::math::ibetac(a, b, x), 1e-12);
      }
    }
  }
}

TEST(FQuantile, RejectsInvalidParameters) {
  EXPECT_THROW(FQuantile(0, 10, 0.05), Error);
  EXPECT_THROW(FQuantile(3, -1, 0.05), Error);
  EXPECT_THROW(FQuantile(3, 10, 0.0), Error);
  EXPECT_THROW(FQuantile(3, 10, 1.0), Error);
  EXPECT_EQ(FCdf(-1.0, 3, 10), 0.0);
  EXPECT_THROW(FCdf(1.0, 0, 10), Error);
}

}  // namespace
}  // namespace regperturb
