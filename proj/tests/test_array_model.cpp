// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "test_util.hpp"

using namespace iqloc;
using std::numbers::pi;

TEST(ArrayModel, LocationsAreSymmetricUnitStep)
{
    for (int n = 1; n <= 9; ++n)
    {
        const ArrayConfig cfg = ArrayConfig::ula(n);
        double sum = 0.0;
        for (int k = 0; k < n; ++k)
        {
            EXPECT_DOUBLE_EQ(cfg.locations[k], -0.5 * (n - 1) + k);
            sum += cfg.locations[k];
        }
        EXPECT_NEAR(sum, 0.0, 1e-15);
    }
    EXPECT_THROW(ArrayConfig::ula(0), DimensionMismatch);
    EXPECT_THROW(ArrayConfig::ula(4, 0.0), DimensionMismatch);
}

TEST(ArrayModel, SteeringVectorBroadside)
{
    const Eigen::VectorXcd a = steering_vector(ArrayConfig::ula(2, 0.5), pi / 2);
    EXPECT_NEAR(std::abs(a(0) - cx(1 / std::sqrt(2.0), 0)), 0.0, 1e-15);
    EXPECT_NEAR(std::abs(a(1) - cx(1 / std::sqrt(2.0), 0)), 0.0, 1e-15);
}

TEST(ArrayModel, SingleElement)
{
    const ArrayConfig cfg = ArrayConfig::ula(1);
    for (double ang : {0.0, 0.7, 2.0, pi})
    {
        EXPECT_NEAR(std::abs(steering_vector(cfg, ang)(0) - 1.0), 0.0, 1e-15);
        EXPECT_EQ(std::abs(steering_derivative(cfg, ang)(0)), 0.0);
    }
}

TEST(ArrayModel, SteeringVectorMatchesScalarLoop)
{
    const ArrayConfig cfg = ArrayConfig::ula(4, 0.5);
    const Eigen::VectorXcd a = steering_vector(cfg, pi / 3);
    const double x[] = {-1.5, -0.5, 0.5, 1.5};
    for (int k = 0; k < 4; ++k)
    {
        const cx expect = 0.5 * std::exp(cx(0.0, -pi * x[k] / 2.0));
        EXPECT_LT(std::abs(a(k) - expect), 1e-15);
    }
}

TEST(ArrayModel, DerivativeVanishesAtEndfire)
{
    const ArrayConfig cfg = ArrayConfig::ula(6, 0.4);
    EXPECT_LT(steering_derivative(cfg, 0.0).norm(), 1e-15);
    EXPECT_LT(steering_derivative(cfg, pi).norm(), 1e-15);
}

TEST(ArrayModel, DerivativeBroadsideExample)
{
    const Eigen::VectorXcd k = steering_derivative(ArrayConfig::ula(2, 0.5), pi / 2);
    const double s = 1 / std::sqrt(2.0);
    EXPECT_LT(std::abs(k(0) - cx(0.0, -0.5 * pi * s)), 1e-15);
    EXPECT_LT(std::abs(k(1) - cx(0.0, 0.5 * pi * s)), 1e-15);
}

TEST(ArrayModelProperty, UnitNormAndConjugateSymmetry)
{
    CounterRng rng(11, {1});
    for (int i = 0; i < 500; ++i)
    {
        const int n = 1 + static_cast<int>(rng.below(64));
        const ArrayConfig cfg = ArrayConfig::ula(n, rng.uniform(0.1, 2.0));
        const double ang = rng.uniform(-2 * pi, 2 * pi);
        const Eigen::VectorXcd a = steering_vector(cfg, ang);
        ASSERT_NEAR(a.norm(), 1.0, 1e-12);
        for (int k = 0; k < n; ++k)
            ASSERT_LT(std::abs(a(k) - std::conj(a(n - 1 - k))), 1e-12);
    }
}

TEST(ArrayModelProperty, DerivativeMatchesCentralDifference)
{
    CounterRng rng(12, {1});
    const double h = 1e-6;
    for (int i = 0; i < 100; ++i)
    {
        const ArrayConfig cfg = ArrayConfig::ula(2 + static_cast<int>(rng.below(31)), rng.uniform(0.2, 1.0));
        const double ang = rng.uniform(0.05, pi - 0.05);
        const Eigen::VectorXcd fd = (steering_vector(cfg, ang + h) - steering_vector(cfg, ang - h)) / (2 * h);
        const Eigen::VectorXcd k = steering_derivative(cfg, ang);
        ASSERT_LT((fd - k).norm() / k.norm(), 1e-5) << "draw " << i;
    }
}

TEST(ArrayModel, EighteenBeamAngles)
{
    const auto ang = beam_angles(18, {pi / 4, 3 * pi / 4});
    ASSERT_EQ(ang.size(), 18u);
    for (int l = 1; l <= 18; ++l)
        EXPECT_NEAR(ang[l - 1], pi / 4 + pi * (l - 1) / (2.0 * 17), 1e-15);
}

TEST(ArrayModel, SingleBeamPointsAtMidpoint)
{
    const ArrayConfig cfg = ArrayConfig::ula(8);
    const BeamformerSet set = make_directional_beamformer(cfg, 1, {0.0, pi});
    ASSERT_EQ(set.matrix.cols(), 1);
    EXPECT_LT((set.matrix.col(0) - steering_vector(cfg, pi / 2)).norm(), 1e-15);
}

TEST(ArrayModel, ColumnNormsAndFrobenius)
{
    const ArrayConfig cfg = ArrayConfig::ula(64);
    const BeamformerSet set = make_directional_beamformer(cfg, 18, {pi / 4, 3 * pi / 4}, 1.0);
    EXPECT_EQ(set.n_beams, 18);
    EXPECT_EQ(set.beam_power, 1.0);
    for (int l = 0; l < 18; ++l)
        EXPECT_NEAR(set.matrix.col(l).squaredNorm(), 1.0 / 18, 1e-12);
    EXPECT_NEAR(set.matrix.squaredNorm(), 1.0, 1e-12);
}

TEST(ArrayModel, ConfiguredBeamPowerIsCarried)
{
    const BeamformerSet set = make_directional_beamformer(ArrayConfig::ula(16), 4, {0.5, 2.5}, 2.5);
    EXPECT_EQ(set.beam_power, 2.5);
    EXPECT_NEAR(set.matrix.squaredNorm(), 1.0, 1e-12);
}
