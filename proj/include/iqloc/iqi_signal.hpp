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

#ifndef IQLOC_IQI_SIGNAL_HPP
#define IQLOC_IQI_SIGNAL_HPP

#include <cmath>
#include <complex>
#include <numbers>

#include "iqloc/errors.hpp"

namespace iqloc
{
    using cx = std::complex<double>;

    // Amplitude (eps) and phase (psi, radians) imbalance on both link ends.
    struct IqiParams
    {
        double eps_t = 0.0;
        double psi_t = 0.0;
        double eps_r = 0.0;
        double psi_r = 0.0;

        double m_t() const { return 1.0 + eps_t; }
        double m_r() const { return 1.0 + eps_r; }

        void validate() const
        {
            if (!std::isfinite(eps_t) || !std::isfinite(psi_t) || !std::isfinite(eps_r) || !std::isfinite(psi_r))
                throw InvalidImbalance("IqiParams: non-finite imbalance parameter");
            if (eps_t <= -1.0)
                throw InvalidImbalance("IqiParams: eps_t must be > -1");
            if (eps_r <= -1.0)
                throw InvalidImbalance("IqiParams: eps_r must be > -1");
        }
    };

    struct IqiCoefficients
    {
        cx alpha_t, beta_t, alpha_r, beta_r;
    };

    // s_T = alpha_T s + beta_T s*,  r = alpha_R r_f + beta_R r_f*.
    // Note the opposite phase signs in the receive pair.
    inline IqiCoefficients iqi_coefficients(const IqiParams &p)
    {
        p.validate();
        const cx et = std::polar(p.m_t(), p.psi_t);
        IqiCoefficients c;
        c.alpha_t = 0.5 * (1.0 + et);
        c.beta_t = 0.5 * (1.0 - et);
        c.alpha_r = 0.5 * (1.0 + std::polar(p.m_r(), -p.psi_r));
        c.beta_r = 0.5 * (1.0 - std::polar(p.m_r(), p.psi_r));
        return c;
    }

    // Partial derivatives of the receive coefficients.
    struct ReceiveCoefficientDerivatives
    {
        cx dalpha_deps, dbeta_deps, dalpha_dpsi, dbeta_dpsi;
    };

    inline ReceiveCoefficientDerivatives receive_coefficient_derivatives(const IqiParams &p)
    {
        p.validate();
        const cx em = std::polar(1.0, -p.psi_r);
        const cx ep = std::polar(1.0, p.psi_r);
        const cx j(0.0, 1.0);
        return {0.5 * em, -0.5 * ep, -0.5 * j * p.m_r() * em, -0.5 * j * p.m_r() * ep};
    }

    enum class EffBandwidthConvention
    {
        ThirdOfSquare, // W^2 / 3, the value used for the published figures
        FlatSpectrum,  // W^2 / 12, second moment of a flat unit-energy spectrum on [-W/2, W/2]
    };

    inline double eff_bandwidth_sq(double bandwidth, EffBandwidthConvention conv)
    {
        return conv == EffBandwidthConvention::ThirdOfSquare ? bandwidth * bandwidth / 3.0
                                                              : bandwidth * bandwidth / 12.0;
    }

    inline double dbm_per_hz_to_watts_per_hz(double dbm_hz) { return std::pow(10.0, (dbm_hz - 30.0) / 10.0); }

    struct SignalConfig
    {
        double symbol_energy_baseband = 1.0; // E_t
        int n_pilots = 16;                   // N_s
        double symbol_duration = 8e-9;       // T_s
        double noise_psd = 1e-20;            // N_0
        double bandwidth = 125e6;            // W
        double eff_bandwidth_sq = 125e6 * 125e6 / 3.0;

        double observation_time() const { return n_pilots * symbol_duration; }

        void validate() const
        {
            if (!(symbol_energy_baseband > 0.0) || n_pilots < 1 || !(symbol_duration > 0.0) || !(noise_psd > 0.0) ||
                !(bandwidth > 0.0) || !(eff_bandwidth_sq > 0.0))
                throw ConfigError("SignalConfig: all fields must be strictly positive");
        }

        // T_s defaults to 1/W.
        static SignalConfig from_bandwidth(double bandwidth, int n_pilots, double noise_psd,
                                           EffBandwidthConvention conv = EffBandwidthConvention::ThirdOfSquare,
                                           double symbol_energy = 1.0)
        {
            SignalConfig cfg;
            cfg.symbol_energy_baseband = symbol_energy;
            cfg.n_pilots = n_pilots;
            cfg.symbol_duration = 1.0 / bandwidth;
            cfg.noise_psd = noise_psd;
            cfg.bandwidth = bandwidth;
            cfg.eff_bandwidth_sq = iqloc::eff_bandwidth_sq(bandwidth, conv);
            cfg.validate();
            return cfg;
        }
    };

    // E_s = 2 E_t / (1 + m_T^2)
    inline double transmit_symbol_energy(const SignalConfig &cfg, const IqiParams &p)
    {
        p.validate();
        const double m = p.m_t();
        return 2.0 * cfg.symbol_energy_baseband / (1.0 + m * m);
    }

    // sigma_z^2 = N_0 (1 + m_R^2) sigma_b^2 / 2
    inline double noise_variance(const SignalConfig &cfg, const IqiParams &p, double beam_power)
    {
        p.validate();
        const double m = p.m_r();
        return 0.5 * cfg.noise_psd * (1.0 + m * m) * beam_power;
    }

    inline double noise_variance_deps_r(const SignalConfig &cfg, const IqiParams &p, double beam_power)
    {
        p.validate();
        return cfg.noise_psd * p.m_r() * beam_power;
    }

    // Integrated second moments of the impaired pilot s_T(t - tau), each a
    // multiple of the N_B x N_B identity:
    //   c_hh  = int E[s_T s_T^H],     c_tt  = int E[s_T s_T^T],
    //   c_dhh = int E[ds_T ds_T^H],   c_dtt = int E[ds_T ds_T^T]   (d = d/dtau).
    // Derivative moments are the base moments scaled by 4 pi^2 W_eff^2; the
    // mixed moments int E[ds_T s_T^H] and int E[ds_T s_T^T] vanish.
    struct CorrelationConstants
    {
        double c_hh = 0.0;
        cx c_tt;
        double c_dhh = 0.0;
        cx c_dtt;
    };

    inline CorrelationConstants correlation_constants(const SignalConfig &cfg, const IqiParams &p)
    {
        p.validate();
        const double m = p.m_t();
        const double ns = cfg.n_pilots;
        const double scale = 4.0 * std::numbers::pi * std::numbers::pi * cfg.eff_bandwidth_sq;
        CorrelationConstants c;
        c.c_hh = 0.5 * (1.0 + m * m) * ns;
        c.c_tt = 0.5 * (1.0 - std::polar(m * m, 2.0 * p.psi_t)) * ns;
        c.c_dhh = scale * c.c_hh;
        c.c_dtt = scale * c.c_tt;
        return c;
    }

    // Moments involving e(t) = ds_T/deps_T = exp(j psi_T) (s - s*) / 2:
    //   e_h  = int E[e e^H],    e_b  = int E[e e^T],
    //   se_h = int E[s_T e^H],  se_b = int E[s_T e^T].
    struct ImbalanceDerivativeMoments
    {
        double e_h = 0.0;
        cx e_b;
        double se_h = 0.0;
        cx se_b;
    };

    inline ImbalanceDerivativeMoments imbalance_derivative_moments(const SignalConfig &cfg, const IqiParams &p)
    {
        p.validate();
        const double ns = cfg.n_pilots;
        const cx e2 = std::polar(1.0, 2.0 * p.psi_t);
        ImbalanceDerivativeMoments mom;
        mom.e_h = 0.5 * ns;
        mom.e_b = -0.5 * e2 * ns;
        mom.se_h = 0.5 * p.m_t() * ns;
        mom.se_b = -0.5 * p.m_t() * e2 * ns;
        return mom;
    }
}

#endif
