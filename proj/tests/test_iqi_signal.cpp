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

#include <chrono>
#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "test_util.hpp"

using namespace iqloc;
using std::numbers::pi;

TEST(IqiSignal, MatchedCoefficients)
{
    const IqiCoefficients c = iqi_coefficients({});
    EXPECT_EQ(c.alpha_t, cx(1.0));
    EXPECT_EQ(c.alpha_r, cx(1.0));
    EXPECT_EQ(c.beta_t, cx(0.0));
    EXPECT_EQ(c.beta_r, cx(0.0));
}

TEST(IqiSignal, TransmitAlphaExample)
{
    const IqiCoefficients c = iqi_coefficients({0.5, pi / 6, 0.0, 0.0});
    EXPECT_NEAR(c.alpha_t.real(), 1.1495, 5e-5);
    EXPECT_NEAR(c.alpha_t.imag(), 0.3750, 5e-5);
}

TEST(IqiSignal, ReceivePhaseSigns)
{
    const IqiCoefficients c = iqi_coefficients({0.0, 0.0, 0.0, pi / 2});
    EXPECT_LT(std::abs(c.alpha_r - cx(0.5, -0.5)), 1e-15);
    EXPECT_LT(std::abs(c.beta_r - cx(0.5, -0.5)), 1e-15);
}

TEST(IqiSignal, RejectsInvalidImbalance)
{
    EXPECT_THROW(iqi_coefficients({-1.0, 0.0, 0.0, 0.0}), InvalidImbalance);
    EXPECT_THROW(iqi_coefficients({0.0, 0.0, -1.2, 0.0}), InvalidImbalance);
    EXPECT_THROW(iqi_coefficients({0.0, NAN, 0.0, 0.0}), InvalidImbalance);
    SignalConfig cfg;
    EXPECT_THROW(transmit_symbol_energy(cfg, {-1.0, 0, 0, 0}), InvalidImbalance);
    EXPECT_THROW(noise_variance(cfg, {0, 0, -1.0, 0}, 1.0), InvalidImbalance);
    EXPECT_THROW(correlation_constants(cfg, {-3.0, 0, 0, 0}), InvalidImbalance);
}

TEST(IqiSignal, SymbolEnergy)
{
    SignalConfig cfg;
    cfg.symbol_energy_baseband = 2.0;
    EXPECT_DOUBLE_EQ(transmit_symbol_energy(cfg, {}), 2.0);
    EXPECT_NEAR(transmit_symbol_energy(cfg, {1.0, 0, 0, 0}), 0.4 * 2.0, 1e-15);
    EXPECT_NEAR(transmit_symbol_energy(cfg, {-1.0 + 1e-9, 0, 0, 0}), 4.0, 1e-8);
}

TEST(IqiSignal, NoiseVariance)
{
    SignalConfig cfg;
    cfg.noise_psd = 3e-21;
    EXPECT_DOUBLE_EQ(noise_variance(cfg, {}, 1.0), 3e-21);
    EXPECT_NEAR(noise_variance(cfg, {0, 0, 0.5, 0}, 1.0), 1.625 * 3e-21, 1e-33);
}

TEST(IqiSignal, NoiseVarianceIsQuadraticInEpsR)
{
    // Third differences of a quadratic vanish; the second difference is the
    // constant 2 a h^2 with a = N_0 sigma_b^2 / 2.
    SignalConfig cfg;
    cfg.noise_psd = 1.0;
    const double h = 0.1, beam = 1.7;
    auto f = [&](double e) { return noise_variance(cfg, {0, 0, e, 0.3}, beam); };
    CounterRng rng(5, {2});
    for (int i = 0; i < 100; ++i)
    {
        const double e = rng.uniform(-0.5, 0.2);
        const double d2 = f(e + 2 * h) - 2 * f(e + h) + f(e);
        const double d3 = f(e + 3 * h) - 3 * f(e + 2 * h) + 3 * f(e + h) - f(e);
        EXPECT_NEAR(d2, 2 * (0.5 * beam) * h * h, 1e-12);
        EXPECT_NEAR(d3, 0.0, 1e-12);
        EXPECT_NEAR(noise_variance_deps_r(cfg, {0, 0, e, 0}, beam), (f(e + 1e-6) - f(e - 1e-6)) / 2e-6, 1e-8);
    }
}

TEST(IqiSignalProperty, CoefficientIdentities)
{
    CounterRng rng(21, {1});
    SignalConfig cfg;
    const auto start = std::chrono::steady_clock::now();
    for (int i = 0; i < 1000; ++i)
    {
        const IqiParams p = test::random_iqi(rng, 0.9, pi);
        const IqiCoefficients c = iqi_coefficients(p);
        const double mt = p.m_t(), mr = p.m_r();
        ASSERT_LT(std::abs(c.alpha_t + c.beta_t - 1.0), 1e-12);
        ASSERT_LT(std::abs(c.alpha_r + std::conj(c.beta_r) - 1.0), 1e-12);
        ASSERT_NEAR(std::norm(c.alpha_t) + std::norm(c.beta_t), 0.5 * (1 + mt * mt), 1e-12);
        ASSERT_NEAR(std::norm(c.alpha_r) + std::norm(c.beta_r), 0.5 * (1 + mr * mr), 1e-12);
        ASSERT_LT(std::abs(c.alpha_t * c.beta_t - 0.25 * (1.0 - std::polar(mt * mt, 2 * p.psi_t))), 1e-12);
        ASSERT_NEAR(transmit_symbol_energy(cfg, p), 2 * cfg.symbol_energy_baseband / (1 + mt * mt), 1e-12);
        ASSERT_LE(transmit_symbol_energy(cfg, p), 2 * cfg.symbol_energy_baseband);
    }
    EXPECT_LT(std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count(), 1.0);
}

TEST(IqiSignalProperty, SymbolEnergyDecreasesForPositiveEps)
{
    SignalConfig cfg;
    double prev = transmit_symbol_energy(cfg, {});
    for (int i = 1; i <= 100; ++i)
    {
        const double e = 0.01 * i;
        const double es = transmit_symbol_energy(cfg, {e, 0.2, 0, 0});
        ASSERT_LT(es, prev);
        prev = es;
    }
}

TEST(IqiSignal, CorrelationConstantExamples)
{
    SignalConfig cfg;
    cfg.n_pilots = 16;
    const CorrelationConstants c0 = correlation_constants(cfg, {});
    EXPECT_EQ(std::abs(c0.c_tt), 0.0);
    EXPECT_DOUBLE_EQ(c0.c_hh, 16.0);
    EXPECT_DOUBLE_EQ(correlation_constants(cfg, {0.5, 0, 0, 0}).c_hh, 26.0);
}

TEST(IqiSignalProperty, DerivativeMomentsShareScale)
{
    CounterRng rng(22, {1});
    SignalConfig cfg;
    const double scale = 4 * pi * pi * cfg.eff_bandwidth_sq;
    for (int i = 0; i < 1000; ++i)
    {
        const CorrelationConstants c = correlation_constants(cfg, test::random_iqi(rng));
        ASSERT_NEAR(c.c_dhh / c.c_hh, scale, 1e-12 * scale);
        ASSERT_LT(std::abs(c.c_dtt / c.c_tt - scale), 1e-12 * scale);
    }
}

TEST(IqiSignal, EffectiveBandwidthConventions)
{
    EXPECT_DOUBLE_EQ(eff_bandwidth_sq(6.0, EffBandwidthConvention::ThirdOfSquare), 12.0);
    EXPECT_DOUBLE_EQ(eff_bandwidth_sq(6.0, EffBandwidthConvention::FlatSpectrum), 3.0);
    const SignalConfig s = SignalConfig::from_bandwidth(125e6, 16, 1e-20);
    EXPECT_DOUBLE_EQ(s.symbol_duration, 8e-9);
    EXPECT_DOUBLE_EQ(s.observation_time(), 16 * 8e-9);
    EXPECT_DOUBLE_EQ(s.eff_bandwidth_sq, 125e6 * 125e6 / 3.0);
    EXPECT_THROW(SignalConfig::from_bandwidth(125e6, 0, 1e-20), ConfigError);
}

namespace
{
    // `scale` bounds rounding in moments that vanish identically.
    void expect_within_se(const oracle::MomentStat &m, cx expect, double k, double scale, const char *what)
    {
        EXPECT_LE(std::abs(m.mean.real() - expect.real()), k * m.se_re + 1e-12 * scale) << what;
        EXPECT_LE(std::abs(m.mean.imag() - expect.imag()), k * m.se_im + 1e-12 * scale) << what;
    }
}

// 10^5 symbols through the oracle's time-domain integration.
TEST(IqiSignal, CorrelationConstantsAgreeWithMonteCarlo)
{
    const PulseShape pulse = PulseShape::gaussian(1.0);
    SignalConfig cfg;
    cfg.n_pilots = 4;
    cfg.symbol_duration = 1.0;
    cfg.eff_bandwidth_sq = pulse.eff_bandwidth_sq();
    const IqiParams p{0.35, -0.4, 0.0, 0.0};
    const oracle::SignalMoments mc = oracle::signal_moments_mc(p, pulse, cfg.n_pilots, 16, 25000, 7);
    const CorrelationConstants c = correlation_constants(cfg, p);
    expect_within_se(mc.c_hh, c.c_hh, 3.0, std::abs(c.c_hh), "c_hh");
    expect_within_se(mc.c_tt, c.c_tt, 3.0, std::abs(c.c_hh), "c_tt");
    expect_within_se(mc.c_dhh, c.c_dhh, 3.0, std::abs(c.c_hh), "c_dhh");
    expect_within_se(mc.c_dtt, c.c_dtt, 3.0, std::abs(c.c_hh), "c_dtt");
    expect_within_se(mc.cross_h, 0.0, 3.0, std::abs(c.c_hh), "cross_h");
    expect_within_se(mc.cross_b, 0.0, 3.0, std::abs(c.c_hh), "cross_b");
}

TEST(IqiSignal, ImbalanceDerivativeMomentsMatchDefinition)
{
    // e = exp(j psi_T) (s - s*) / 2 with E[s s^H] = 1, E[s s^T] = 0 per symbol.
    SignalConfig cfg;
    cfg.n_pilots = 5;
    const IqiParams p{0.2, 0.3, 0, 0};
    const ImbalanceDerivativeMoments m = imbalance_derivative_moments(cfg, p);
    const IqiCoefficients c = iqi_coefficients(p);
    const cx ej = std::polar(1.0, p.psi_t);
    // e = ej/2 s - ej/2 s*; s_T = a s + b s*
    const cx ea = 0.5 * ej, eb = -0.5 * ej;
    EXPECT_NEAR(m.e_h, 5 * (std::norm(ea) + std::norm(eb)), 1e-12);
    EXPECT_LT(std::abs(m.e_b - 5.0 * (2.0 * ea * eb)), 1e-12);
    EXPECT_LT(std::abs(m.se_h - 5.0 * (c.alpha_t * std::conj(ea) + c.beta_t * std::conj(eb))), 1e-12);
    EXPECT_LT(std::abs(m.se_b - 5.0 * (c.alpha_t * eb + c.beta_t * ea)), 1e-12);
}
