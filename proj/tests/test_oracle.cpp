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
using namespace iqloc::oracle;
using std::numbers::pi;

namespace
{
    PilotEnsemble random_ensemble(const OracleScenario &scn, std::uint64_t seed)
    {
        CounterRng rng(seed, {0xE5});
        return {draw_qpsk(rng, scn.n_beams(), scn.signal.n_pilots), seed};
    }

    OracleScenario single_antenna(const IqiParams &iqi = {})
    {
        OracleScenario scn;
        scn.rx = ArrayConfig::ula(1);
        scn.tx = ArrayConfig::ula(1);
        scn.W = Eigen::MatrixXcd::Ones(1, 1);
        scn.F = Eigen::MatrixXcd::Ones(1, 1);
        scn.signal.symbol_duration = 1.0;
        scn.signal.n_pilots = 3;
        scn.signal.noise_psd = 1.0;
        scn.signal.bandwidth = 1.0;
        scn.channel = {0.7, 2.1, 0.37, 1.0, 0.0};
        scn.iqi = iqi;
        return scn;
    }

    // Plain loops over time, beams and symbols; no kernel or helper reuse.
    Eigen::MatrixXcd straight_line_mean(const OracleScenario &scn, const Eigen::MatrixXcd &sym, const TimeGrid &grid,
                                        bool with_beta_r = true)
    {
        const double mt = 1.0 + scn.iqi.eps_t, mr = 1.0 + scn.iqi.eps_r;
        const cx at = 0.5 * (1.0 + mt * std::exp(cx(0, scn.iqi.psi_t)));
        const cx bt = 0.5 * (1.0 - mt * std::exp(cx(0, scn.iqi.psi_t)));
        const cx ar = 0.5 * (1.0 + mr * std::exp(cx(0, -scn.iqi.psi_r)));
        const cx br = 0.5 * (1.0 - mr * std::exp(cx(0, scn.iqi.psi_r)));
        const double es = 2.0 * scn.signal.symbol_energy_baseband / (1.0 + mt * mt);
        const int nr = scn.rx.n_elements, nt = scn.tx.n_elements, nb = scn.n_beams(), ns = scn.signal.n_pilots;
        const double amp = std::sqrt(es * nr * nt);
        std::vector<cx> ar_vec(nr), at_vec(nt);
        for (int k = 0; k < nr; ++k)
            ar_vec[k] = std::exp(cx(0, -2 * pi * scn.rx.spacing_ratio * std::cos(scn.channel.phi_r) * (k - 0.5 * (nr - 1)))) /
                        std::sqrt(double(nr));
        for (int k = 0; k < nt; ++k)
            at_vec[k] = std::exp(cx(0, -2 * pi * scn.tx.spacing_ratio * std::cos(scn.channel.phi_t) * (k - 0.5 * (nt - 1)))) /
                        std::sqrt(double(nt));
        const cx gamma(scn.channel.gamma_re, scn.channel.gamma_im);
        Eigen::MatrixXcd mu(nb, grid.n);
        for (int i = 0; i < grid.n; ++i)
        {
            const double t = grid.t0 + i * grid.dt;
            // scalar a_T^H F s_T(t - tau)
            cx tx = 0.0;
            for (int l = 0; l < nb; ++l)
            {
                cx s = 0.0;
                for (int n = 0; n < ns; ++n)
                    s += sym(l, n) * scn.pulse.value(t - scn.channel.tau - n * scn.signal.symbol_duration);
                const cx st = at * s + bt * std::conj(s);
                cx aF = 0.0;
                for (int k = 0; k < nt; ++k)
                    aF += std::conj(at_vec[k]) * scn.F(k, l);
                tx += aF * st;
            }
            for (int q = 0; q < nb; ++q)
            {
                cx wa = 0.0;
                for (int k = 0; k < nr; ++k)
                    wa += std::conj(scn.W(k, q)) * ar_vec[k];
                const cx ro = gamma * wa * tx;
                mu(q, i) = amp * (ar * ro + (with_beta_r ? br * std::conj(ro) : cx(0.0)));
            }
        }
        return mu;
    }
}

TEST(Oracle, SingleAntennaMatchedMean)
{
    const OracleScenario scn = single_antenna();
    const TimeGrid grid = scn.grid();
    const PilotEnsemble ens = random_ensemble(scn, 1);
    const Eigen::MatrixXcd mu = mean_function(scn, ens, grid);
    for (int i = 0; i < grid.n; ++i)
    {
        cx s = 0.0;
        for (int n = 0; n < scn.signal.n_pilots; ++n)
            s += ens.symbols(0, n) * scn.pulse.value(grid.time(i) - scn.channel.tau - n);
        ASSERT_LT(std::abs(mu(0, i) - std::sqrt(scn.signal.symbol_energy_baseband) * s), 1e-14);
    }
}

TEST(Oracle, ReceiveImageVanishesWithoutReceiveImbalance)
{
    OracleScenario scn = random_small_scenario(70, 1);
    scn.iqi.eps_r = 0.0;
    scn.iqi.psi_r = 0.0;
    const TimeGrid grid = scn.grid();
    const PilotEnsemble ens = random_ensemble(scn, 2);
    const Eigen::MatrixXcd a = mean_function(scn, ens, grid);
    const Eigen::MatrixXcd b = straight_line_mean(scn, ens.symbols, grid, false);
    EXPECT_LT((a - b).norm(), 1e-12 * b.norm());
}

TEST(OracleProperty, MeanMatchesStraightLineImplementation)
{
    for (std::uint64_t i = 0; i < 20; ++i)
    {
        const OracleScenario scn = random_small_scenario(71, i);
        const TimeGrid grid = scn.grid();
        const PilotEnsemble ens = random_ensemble(scn, i);
        const Eigen::MatrixXcd a = mean_function(scn, ens, grid);
        const Eigen::MatrixXcd b = straight_line_mean(scn, ens.symbols, grid);
        ASSERT_LT((a - b).cwiseAbs().maxCoeff(), 1e-12 * b.cwiseAbs().maxCoeff()) << "scenario " << i;
    }
}

TEST(OracleProperty, DerivativesMatchCentralDifferences)
{
    const double h = 1e-6;
    for (std::uint64_t i = 0; i < 20; ++i)
    {
        const OracleScenario scn = random_small_scenario(72, i);
        const TimeGrid grid = scn.grid();
        const PilotEnsemble ens = random_ensemble(scn, i);
        const DerivativeBundle b = derivative_bundle(scn, ens, grid);
        const double mu_norm = mean_function(scn, ens, grid).norm();
        for (int x = 0; x < kNumParams; ++x)
        {
            const Param p = static_cast<Param>(x);
            OracleScenario lo = scn, hi = scn;
            set_param(lo, p, get_param(scn, p) - h);
            set_param(hi, p, get_param(scn, p) + h);
            // E_s depends on eps_T; the model holds it fixed, so pin it
            // through the baseband energy when differencing eps_T.
            if (p == Param::EpsT)
            {
                const double m0 = scn.iqi.m_t();
                for (OracleScenario *s : {&lo, &hi})
                {
                    const double m = s->iqi.m_t();
                    s->signal.symbol_energy_baseband = scn.signal.symbol_energy_baseband * (1 + m * m) / (1 + m0 * m0);
                }
            }
            const Eigen::MatrixXcd fd = (mean_function(hi, ens, grid) - mean_function(lo, ens, grid)) / (2 * h);
            const double dn = b.d[x].norm();
            if (dn < 1e-12 * mu_norm)
                ASSERT_LT(fd.norm(), 1e-6 * mu_norm) << kParamNames[x];
            else
                ASSERT_LT((fd - b.d[x]).norm() / dn, 1e-4) << kParamNames[x] << " scenario " << i;
        }
    }
}

// d mu / d psi_T = j m_T amp (alpha_R e - beta_R e*), where amp e is the
// eps_T derivative seen by a matched receiver.
TEST(OracleProperty, PsiTDerivativeRelation)
{
    for (std::uint64_t i = 0; i < 20; ++i)
    {
        const OracleScenario scn = random_small_scenario(73, i);
        OracleScenario plain = scn;
        plain.iqi.eps_r = plain.iqi.psi_r = 0.0;
        const TimeGrid grid = scn.grid();
        const PilotEnsemble ens = random_ensemble(scn, i);
        const DerivativeBundle b = derivative_bundle(scn, ens, grid);
        const Eigen::MatrixXcd e = derivative_bundle(plain, ens, grid).d[idx(Param::EpsT)];
        const IqiCoefficients c = iqi_coefficients(scn.iqi);
        const Eigen::MatrixXcd expect_eps = c.alpha_r * e + c.beta_r * e.conjugate();
        const Eigen::MatrixXcd expect_psi = cx(0.0, scn.iqi.m_t()) * (c.alpha_r * e - c.beta_r * e.conjugate());
        const double scale = 1.0 + e.cwiseAbs().maxCoeff();
        ASSERT_LT((b.d[idx(Param::EpsT)] - expect_eps).cwiseAbs().maxCoeff(), 1e-14 * scale);
        ASSERT_LT((b.d[idx(Param::PsiT)] - expect_psi).cwiseAbs().maxCoeff(), 1e-14 * scale);
        ASSERT_LT((derivative_bundle(plain, ens, grid).d[idx(Param::PsiT)] - cx(0.0, scn.iqi.m_t()) * e)
                      .cwiseAbs()
                      .maxCoeff(),
                  1e-14 * scale);
    }
}

// At psi_T = pi/2 the imbalance derivative of the pilot is (j/2)(s - s*).
TEST(Oracle, ImbalanceDerivativeFactorAtQuarterTurn)
{
    const OracleScenario scn = single_antenna({0.3, pi / 2, 0.0, 0.0});
    const TimeGrid grid = scn.grid();
    const PilotEnsemble ens = random_ensemble(scn, 3);
    const DerivativeBundle b = derivative_bundle(scn, ens, grid);
    const double mt = scn.iqi.m_t();
    const double amp = std::sqrt(2.0 / (1 + mt * mt));
    for (int i = 0; i < grid.n; ++i)
    {
        cx s = 0.0;
        for (int n = 0; n < scn.signal.n_pilots; ++n)
            s += ens.symbols(0, n) * scn.pulse.value(grid.time(i) - scn.channel.tau - n);
        const cx expect = amp * cx(0.0, 0.5) * (s - std::conj(s));
        ASSERT_LT(std::abs(b.d[idx(Param::EpsT)](0, i) - expect), 1e-14);
    }
}

TEST(Oracle, GridTooCoarse)
{
    OracleScenario scn = random_small_scenario(74, 0);
    scn.oversampling = 3;
    EXPECT_THROW(scn.grid(), GridTooCoarse);
    EXPECT_THROW(quadrature_fim(scn), GridTooCoarse);
    EXPECT_THROW(make_time_grid(scn.pulse, 2, 2, 0.0), GridTooCoarse);
}

TEST(Oracle, RejectsTooFewDraws)
{
    EXPECT_THROW(numeric_fim(random_small_scenario(74, 1), {99, 1, 256, 1}), ConfigError);
}

TEST(Oracle, ZeroGainEntriesVanish)
{
    OracleScenario scn = random_small_scenario(75, 2);
    scn.channel.gamma_re = scn.channel.gamma_im = 0.0;
    const NumericFim mc = numeric_fim(scn, {1000, 5, 256, 1});
    for (int r = 0; r < kNumParams; ++r)
        for (int c = 0; c < kNumParams; ++c)
        {
            if ((r == 3 || r == 4) && (c == 3 || c == 4))
                continue;
            const double v = mc.fim.matrix(r, c) - (r == 5 && c == 5 ? mc.fim.noise_term : 0.0);
            EXPECT_LE(std::abs(v), 3 * mc.standard_error(r, c) + 1e-15) << kParamNames[r] << "," << kParamNames[c];
        }
}

TEST(Oracle, MatchedTinyScenarioWithinThreeStandardErrors)
{
    OracleScenario scn = random_small_scenario(76, 0);
    scn.rx = ArrayConfig::ula(2);
    scn.tx = ArrayConfig::ula(2);
    CounterRng rng(76, {1});
    scn.W = test::random_complex(rng, 2, 1) * 0.5;
    scn.F = test::random_complex(rng, 2, 1) * 0.5;
    scn.iqi = {};
    const NumericFim mc = numeric_fim(scn, {10000, 11, 256, 0});
    const Fim9 cf = closed_form_fim(scn);
    for (int r = 0; r < kNumParams; ++r)
        for (int c = r; c < kNumParams; ++c)
            EXPECT_LE(std::abs(z_score(cf.matrix, mc.fim.matrix(r, c), mc.standard_error(r, c), r, c)), 3.0)
                << kParamNames[r] << "," << kParamNames[c];
}

TEST(Oracle, StandardErrorHalvesWithFourTimesTheDraws)
{
    const OracleScenario scn = random_small_scenario(77, 3);
    const NumericFim a = numeric_fim(scn, {2000, 3, 256, 0});
    const NumericFim b = numeric_fim(scn, {8000, 3, 256, 0});
    std::vector<double> ratios;
    for (int r = 0; r < kNumParams; ++r)
        for (int c = r; c < kNumParams; ++c)
            if (a.standard_error(r, c) > 0.0)
                ratios.push_back(b.standard_error(r, c) / a.standard_error(r, c));
    ASSERT_FALSE(ratios.empty());
    std::sort(ratios.begin(), ratios.end());
    const double median = ratios[ratios.size() / 2];
    EXPECT_NEAR(median, 0.5, 0.05);
}

TEST(Oracle, MonteCarloIsSymmetricAndThreadIndependent)
{
    const OracleScenario scn = random_small_scenario(78, 4);
    const NumericFim one = numeric_fim(scn, {3000, 9, 256, 1});
    const NumericFim many = numeric_fim(scn, {3000, 9, 256, 4});
    EXPECT_EQ(one.fim.matrix, Matrix9d(one.fim.matrix.transpose()));
    for (int r = 0; r < kNumParams; ++r)
        for (int c = 0; c < kNumParams; ++c)
        {
            EXPECT_TRUE(bit_equal(one.fim.matrix(r, c), many.fim.matrix(r, c)));
            EXPECT_TRUE(bit_equal(one.standard_error(r, c), many.standard_error(r, c)));
        }
    EXPECT_EQ(one.seed, 9u);
    EXPECT_EQ(one.n_draws, 3000);
}

// The response basis reproduces the per-draw information exactly.
TEST(OracleProperty, ResponseBasisMatchesDirectRealization)
{
    for (std::uint64_t i = 0; i < 5; ++i)
    {
        const OracleScenario scn = random_small_scenario(79, i);
        const TimeGrid grid = scn.grid();
        const ResponseBasis rb = response_basis(scn, grid);
        const PilotEnsemble ens = random_ensemble(scn, i);
        const DerivativeBundle b = derivative_bundle(scn, ens, grid);
        const Matrix9d direct = realization_fim(b, grid.dt, rb.sigma2);
        const Eigen::VectorXd c = symbol_coordinates(ens.symbols);
        Matrix9d via;
        for (int x = 0; x < kNumParams; ++x)
            for (int y = 0; y < kNumParams; ++y)
            {
                const Eigen::VectorXcd gx = rb.rows[x].transpose() * c.cast<cx>();
                const Eigen::VectorXcd gy = rb.rows[y].transpose() * c.cast<cx>();
                via(x, y) = gx.dot(gy).real() * rb.dt / rb.sigma2;
            }
        const double scale = test::max_abs(direct);
        ASSERT_LT(test::max_abs(Matrix9d(via - direct)), 1e-12 * scale) << "scenario " << i;
    }
}

TEST(OracleProperty, QuadratureMatchesClosedForm)
{
    for (std::uint64_t i = 0; i < 10; ++i)
    {
        const OracleScenario scn = random_small_scenario(80, i);
        const NumericFim q = quadrature_fim(scn);
        const Fim9 cf = closed_form_fim(scn);
        EXPECT_EQ(q.fim.noise_term, cf.noise_term);
        for (int r = 0; r < kNumParams; ++r)
            for (int c = r; c < kNumParams; ++c)
                ASSERT_LT(relative_error(cf.matrix, q.fim.matrix(r, c), r, c), 1e-6)
                    << kParamNames[r] << "," << kParamNames[c] << " scenario " << i;
    }
}

TEST(Pulse, GaussianIsUnitEnergyWithNegligibleTail)
{
    const PulseShape p = PulseShape::gaussian(2.0);
    EXPECT_LT(p.truncation_loss(), 1e-6);
    double e = 0.0, d = 0.0;
    const double dt = 2.0 / 256;
    for (double t = -p.half_support(); t <= p.half_support(); t += dt)
    {
        e += p.value(t) * p.value(t) * dt;
        d += p.derivative(t) * p.derivative(t) * dt;
    }
    EXPECT_NEAR(e, 1.0, 1e-12);
    EXPECT_NEAR(d / (4 * pi * pi), p.eff_bandwidth_sq(), 1e-12 * p.eff_bandwidth_sq());
}

// The truncated sinc is renormalized to unit energy; the energy of the ideal
// pulse beyond +-8 symbols is reported, not hidden.
TEST(Pulse, TruncatedSincIsRenormalized)
{
    const PulseShape p = PulseShape::truncated_sinc(1.0);
    EXPECT_GT(p.truncation_loss(), 1e-3);
    EXPECT_LT(p.truncation_loss(), 0.05);
    double e = 0.0;
    const double dt = 1.0 / 1024;
    for (double t = -p.half_support(); t <= p.half_support(); t += dt)
        e += p.value(t) * p.value(t) * dt;
    EXPECT_NEAR(e, 1.0, 1e-6);
    // nearly flat spectrum on [-1/2, 1/2]: W_eff^2 close to 1/12
    EXPECT_NEAR(p.eff_bandwidth_sq(), 1.0 / 12.0, 0.01);
}

// With the kinked truncated sinc the grid sums converge algebraically, so
// this check uses the coarser tolerance the quadrature can deliver.
TEST(Oracle, SincPulseQuadratureConverges)
{
    SmallScenarioOptions opts;
    opts.pulse = PulseKind::TruncatedSinc;
    const OracleScenario scn = random_small_scenario(81, 0, opts);
    const Fim9 cf = closed_form_fim(scn);
    auto worst = [&](int oversampling)
    {
        OracleScenario s = scn;
        s.oversampling = oversampling;
        const NumericFim q = quadrature_fim(s);
        double w = 0.0;
        for (int r = 0; r < kNumParams; ++r)
            for (int c = r; c < kNumParams; ++c)
                w = std::max(w, std::abs(q.fim.matrix(r, c) - cf.matrix(r, c)) /
                                    std::sqrt(cf.matrix(r, r) * cf.matrix(c, c)));
        return w;
    };
    const double w8 = worst(8), w32 = worst(32);
    EXPECT_LT(w32, w8);
    EXPECT_LT(w32, 1e-5);
}
