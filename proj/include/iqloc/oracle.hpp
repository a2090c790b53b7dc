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

#ifndef IQLOC_ORACLE_HPP
#define IQLOC_ORACLE_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <vector>

#include <Eigen/Dense>

#include "iqloc/array_model.hpp"
#include "iqloc/errors.hpp"
#include "iqloc/fim_core.hpp"
#include "iqloc/iqi_signal.hpp"
#include "iqloc/parallel.hpp"
#include "iqloc/pulse.hpp"
#include "iqloc/rng.hpp"

// Numerical reference for the channel FIM. Everything here is evaluated from
// the time-domain signal model: pilots are shaped by an explicit pulse,
// delayed by fractional-delay evaluation, impaired, beamformed and combined,
// and the information integral is a Riemann sum over a uniform time grid.
// Nothing in this file uses the closed-form moments or gain scalars of
// fim_core.hpp; only the parameter ordering and container types are shared.

namespace iqloc::oracle
{
    struct TimeGrid
    {
        double t0 = 0.0;
        double dt = 1.0;
        int n = 0;

        double time(int k) const { return t0 + k * dt; }
    };

    // Uniform grid aligned to t = 0 with T_s / oversampling spacing, covering
    // every delayed pulse of an n_pilots block for delays in [0, tau_max].
    inline TimeGrid make_time_grid(const PulseShape &pulse, int n_pilots, int oversampling, double tau_max)
    {
        if (oversampling < 4)
            throw GridTooCoarse("oracle: oversampling must be at least 4 samples per symbol");
        if (n_pilots < 1 || !(tau_max >= 0.0))
            throw ConfigError("oracle: invalid pilot count or delay");
        const double ts = pulse.symbol_duration();
        TimeGrid g;
        g.dt = ts / oversampling;
        const int pad = (pulse.truncation() + 1) * oversampling;
        const int last = static_cast<int>(std::ceil(((n_pilots - 1) * ts + tau_max) / g.dt)) + pad;
        g.t0 = -pad * g.dt;
        g.n = last + pad + 1;
        return g;
    }

    struct OracleScenario
    {
        ArrayConfig rx = ArrayConfig::ula(2);
        ArrayConfig tx = ArrayConfig::ula(2);
        Eigen::MatrixXcd W; // N_R x N_B
        Eigen::MatrixXcd F; // N_T x N_B
        double beam_power = 1.0;
        SignalConfig signal;
        ChannelParams channel;
        IqiParams iqi;
        PulseShape pulse = PulseShape::gaussian(1.0);
        int oversampling = 16;

        int n_beams() const { return static_cast<int>(W.cols()); }

        void validate() const
        {
            if (W.rows() != rx.n_elements || F.rows() != tx.n_elements || W.cols() != F.cols() || W.cols() < 1)
                throw DimensionMismatch("OracleScenario: beamformer shapes do not match the arrays");
            if (std::abs(pulse.symbol_duration() - signal.symbol_duration) > 1e-12 * signal.symbol_duration)
                throw ConfigError("OracleScenario: pulse and signal symbol durations differ");
            signal.validate();
            iqi.validate();
        }

        // The same link as seen by the closed form, with W_eff^2 taken from
        // the pulse actually used here.
        LinkModel link() const
        {
            LinkModel l;
            l.rx = rx;
            l.tx = tx;
            l.W = BeamformerSet{W, n_beams(), beam_power};
            l.F = BeamformerSet{F, n_beams(), beam_power};
            l.signal = signal;
            l.signal.eff_bandwidth_sq = pulse.eff_bandwidth_sq();
            return l;
        }

        TimeGrid grid() const
        {
            return make_time_grid(pulse, signal.n_pilots, oversampling, std::max(0.0, channel.tau) + signal.symbol_duration);
        }
    };

    // Pilot block: N_B x N_s symbols.
    struct PilotEnsemble
    {
        Eigen::MatrixXcd symbols;
        std::uint64_t seed = 0;
    };

    // Unit-energy QPSK, independent real and imaginary parts.
    inline Eigen::MatrixXcd draw_qpsk(CounterRng &rng, int n_beams, int n_pilots)
    {
        const double a = std::sqrt(0.5);
        Eigen::MatrixXcd s(n_beams, n_pilots);
        for (int n = 0; n < n_pilots; ++n)
            for (int l = 0; l < n_beams; ++l)
            {
                const std::uint64_t bits = rng.next_u64();
                s(l, n) = cx((bits & 1) ? a : -a, (bits & 2) ? a : -a);
            }
        return s;
    }

    struct DerivativeBundle
    {
        std::array<Eigen::MatrixXcd, kNumParams> d; // each N_B x T, parameter order of Param
    };

    namespace detail
    {
        // Symbol-independent pieces of the model at one scenario.
        struct Kernel
        {
            Eigen::MatrixXd pulses;  // N_s x T, p(t - tau - n T_s)
            Eigen::MatrixXd dpulses; // N_s x T, p'(t - tau - n T_s)
            cx alpha_t, beta_t, alpha_r, beta_r;
            cx dalpha_t_dpsi, dbeta_t_dpsi;
            double amp = 0.0; // sqrt(E_s N_R N_T)
            double m_t = 1.0, m_r = 1.0, psi_t = 0.0, psi_r = 0.0;
            cx gamma;
            Eigen::VectorXcd u, ud, v, vd; // W^H a_R, W^H k_R, F^H a_T, F^H k_T
        };

        inline Kernel make_kernel(const OracleScenario &scn, const TimeGrid &grid)
        {
            scn.validate();
            if (scn.oversampling < 4)
                throw GridTooCoarse("oracle: oversampling must be at least 4 samples per symbol");
            Kernel k;
            const int ns = scn.signal.n_pilots;
            const double ts = scn.signal.symbol_duration;
            k.pulses.resize(ns, grid.n);
            k.dpulses.resize(ns, grid.n);
            for (int n = 0; n < ns; ++n)
                for (int i = 0; i < grid.n; ++i)
                {
                    const double t = grid.time(i) - scn.channel.tau - n * ts;
                    k.pulses(n, i) = scn.pulse.value(t);
                    k.dpulses(n, i) = scn.pulse.derivative(t);
                }

            const IqiParams &p = scn.iqi;
            k.m_t = 1.0 + p.eps_t;
            k.m_r = 1.0 + p.eps_r;
            k.psi_t = p.psi_t;
            k.psi_r = p.psi_r;
            const cx et = std::polar(k.m_t, p.psi_t);
            k.alpha_t = 0.5 * (1.0 + et);
            k.beta_t = 0.5 * (1.0 - et);
            k.alpha_r = 0.5 * (1.0 + std::polar(k.m_r, -p.psi_r));
            k.beta_r = 0.5 * (1.0 - std::polar(k.m_r, p.psi_r));
            k.dalpha_t_dpsi = 0.5 * cx(0.0, 1.0) * et;
            k.dbeta_t_dpsi = -k.dalpha_t_dpsi;

            const double es = 2.0 * scn.signal.symbol_energy_baseband / (1.0 + k.m_t * k.m_t);
            k.amp = std::sqrt(es * scn.rx.n_elements * scn.tx.n_elements);
            k.gamma = scn.channel.gamma();
            k.u = scn.W.adjoint() * steering_vector(scn.rx, scn.channel.phi_r);
            k.ud = scn.W.adjoint() * steering_derivative(scn.rx, scn.channel.phi_r);
            k.v = scn.F.adjoint() * steering_vector(scn.tx, scn.channel.phi_t);
            k.vd = scn.F.adjoint() * steering_derivative(scn.tx, scn.channel.phi_t);
            return k;
        }

        // alpha_R x + beta_R x*, scaled by sqrt(E_s N_R N_T)
        inline Eigen::MatrixXcd receive(const Kernel &k, const Eigen::MatrixXcd &x)
        {
            return k.amp * (k.alpha_r * x + k.beta_r * x.conjugate());
        }

        inline Eigen::MatrixXcd mean(const Kernel &k, const Eigen::MatrixXcd &symbols)
        {
            const Eigen::MatrixXcd s = symbols * k.pulses;
            const Eigen::MatrixXcd st = k.alpha_t * s + k.beta_t * s.conjugate();
            const Eigen::MatrixXcd ro = k.gamma * k.u * (k.v.adjoint() * st);
            return receive(k, ro);
        }

        inline DerivativeBundle bundle(const Kernel &k, const Eigen::MatrixXcd &symbols)
        {
            const cx j(0.0, 1.0);
            const Eigen::MatrixXcd s = symbols * k.pulses;
            const Eigen::MatrixXcd ds = symbols * k.dpulses;
            const Eigen::MatrixXcd st = k.alpha_t * s + k.beta_t * s.conjugate();
            const Eigen::MatrixXcd dst = k.alpha_t * ds + k.beta_t * ds.conjugate();
            const Eigen::RowVectorXcd xs = k.v.adjoint() * st;

            const Eigen::MatrixXcd ro = k.gamma * k.u * xs;
            const Eigen::MatrixXcd b = k.u * xs;
            const Eigen::MatrixXcd p_r = k.gamma * k.ud * xs;
            const Eigen::MatrixXcd p_t = k.gamma * k.u * (k.vd.adjoint() * st);
            const Eigen::MatrixXcd r_dot = -k.gamma * k.u * (k.v.adjoint() * dst);
            const Eigen::MatrixXcd e = 0.5 * std::polar(1.0, k.psi_t) * (s - s.conjugate());
            const Eigen::MatrixXcd r_e = k.gamma * k.u * (k.v.adjoint() * e);
            const Eigen::MatrixXcd s_psi = k.dalpha_t_dpsi * s + k.dbeta_t_dpsi * s.conjugate();
            const Eigen::MatrixXcd r_psi = k.gamma * k.u * (k.v.adjoint() * s_psi);

            const cx em = std::polar(1.0, -k.psi_r);
            const cx ep = std::polar(1.0, k.psi_r);

            DerivativeBundle out;
            out.d[idx(Param::PhiR)] = receive(k, p_r);
            out.d[idx(Param::PhiT)] = receive(k, p_t);
            out.d[idx(Param::Tau)] = receive(k, r_dot);
            out.d[idx(Param::GammaRe)] = receive(k, b);
            out.d[idx(Param::GammaIm)] = receive(k, j * b);
            out.d[idx(Param::EpsR)] = 0.5 * k.amp * (em * ro - ep * ro.conjugate());
            out.d[idx(Param::EpsT)] = receive(k, r_e);
            out.d[idx(Param::PsiR)] = -0.5 * j * k.m_r * k.amp * (em * ro + ep * ro.conjugate());
            out.d[idx(Param::PsiT)] = receive(k, r_psi);
            return out;
        }

        inline double noise_variance(const OracleScenario &scn)
        {
            const double m = 1.0 + scn.iqi.eps_r;
            return 0.5 * scn.signal.noise_psd * (1.0 + m * m) * scn.beam_power;
        }

        inline double noise_term(const OracleScenario &scn)
        {
            const double m = 1.0 + scn.iqi.eps_r;
            const double g = 1.0 + m * m;
            const double nb = scn.n_beams();
            return 2.0 * m * m * nb * nb * scn.signal.n_pilots * scn.signal.symbol_duration / (g * g);
        }
    }

    inline Eigen::MatrixXcd mean_function(const OracleScenario &scn, const PilotEnsemble &ens, const TimeGrid &grid)
    {
        return detail::mean(detail::make_kernel(scn, grid), ens.symbols);
    }

    inline DerivativeBundle derivative_bundle(const OracleScenario &scn, const PilotEnsemble &ens, const TimeGrid &grid)
    {
        return detail::bundle(detail::make_kernel(scn, grid), ens.symbols);
    }

    // Channel parameter or imbalance parameter by index, for finite differences.
    inline double get_param(const OracleScenario &scn, Param p)
    {
        switch (p)
        {
        case Param::PhiR: return scn.channel.phi_r;
        case Param::PhiT: return scn.channel.phi_t;
        case Param::Tau: return scn.channel.tau;
        case Param::GammaRe: return scn.channel.gamma_re;
        case Param::GammaIm: return scn.channel.gamma_im;
        case Param::EpsR: return scn.iqi.eps_r;
        case Param::EpsT: return scn.iqi.eps_t;
        case Param::PsiR: return scn.iqi.psi_r;
        case Param::PsiT: return scn.iqi.psi_t;
        }
        return 0.0;
    }

    inline void set_param(OracleScenario &scn, Param p, double value)
    {
        switch (p)
        {
        case Param::PhiR: scn.channel.phi_r = value; break;
        case Param::PhiT: scn.channel.phi_t = value; break;
        case Param::Tau: scn.channel.tau = value; break;
        case Param::GammaRe: scn.channel.gamma_re = value; break;
        case Param::GammaIm: scn.channel.gamma_im = value; break;
        case Param::EpsR: scn.iqi.eps_r = value; break;
        case Param::EpsT: scn.iqi.eps_t = value; break;
        case Param::PsiR: scn.iqi.psi_r = value; break;
        case Param::PsiT: scn.iqi.psi_t = value; break;
        }
    }

    // Information of one pilot realization:
    //   J_xy = (dt / sigma_z^2) Re sum_t dmu_x(t)^H dmu_y(t).
    // The noise-covariance term is not included.
    inline Matrix9d realization_fim(const DerivativeBundle &b, double dt, double sigma2)
    {
        Matrix9d J;
        for (int x = 0; x < kNumParams; ++x)
            for (int y = x; y < kNumParams; ++y)
            {
                const double v = (b.d[x].conjugate().cwiseProduct(b.d[y])).sum().real() * dt / sigma2;
                J(x, y) = v;
                J(y, x) = v;
            }
        return J;
    }

    // Derivative responses to each real coordinate of the pilot block. The
    // model is real-linear in the symbols, so for coordinates c (real and
    // imaginary parts of every symbol) dmu_x = sum_k c_k G_x[k].
    struct ResponseBasis
    {
        int dim = 0;                                   // 2 N_B N_s
        std::array<Eigen::MatrixXcd, kNumParams> rows; // dim x (N_B T), row-major flattened
        double dt = 0.0;
        double sigma2 = 1.0;
    };

    inline ResponseBasis response_basis(const OracleScenario &scn, const TimeGrid &grid)
    {
        const detail::Kernel k = detail::make_kernel(scn, grid);
        const int nb = scn.n_beams();
        const int ns = scn.signal.n_pilots;
        ResponseBasis rb;
        rb.dim = 2 * nb * ns;
        rb.dt = grid.dt;
        rb.sigma2 = detail::noise_variance(scn);
        for (auto &r : rb.rows)
            r.resize(rb.dim, static_cast<Eigen::Index>(nb) * grid.n);
        Eigen::MatrixXcd sym = Eigen::MatrixXcd::Zero(nb, ns);
        for (int n = 0; n < ns; ++n)
            for (int l = 0; l < nb; ++l)
                for (int part = 0; part < 2; ++part)
                {
                    const int row = 2 * (n * nb + l) + part;
                    sym(l, n) = part == 0 ? cx(1.0, 0.0) : cx(0.0, 1.0);
                    const DerivativeBundle b = detail::bundle(k, sym);
                    for (int x = 0; x < kNumParams; ++x)
                        for (int t = 0; t < grid.n; ++t)
                            for (int q = 0; q < nb; ++q)
                                rb.rows[x](row, static_cast<Eigen::Index>(t) * nb + q) = b.d[x](q, t);
                    sym(l, n) = 0.0;
                }
        return rb;
    }

    // Real coordinates of a pilot block in ResponseBasis order.
    inline Eigen::VectorXd symbol_coordinates(const Eigen::MatrixXcd &symbols)
    {
        const int nb = static_cast<int>(symbols.rows());
        const int ns = static_cast<int>(symbols.cols());
        Eigen::VectorXd c(2 * nb * ns);
        for (int n = 0; n < ns; ++n)
            for (int l = 0; l < nb; ++l)
            {
                c(2 * (n * nb + l)) = symbols(l, n).real();
                c(2 * (n * nb + l) + 1) = symbols(l, n).imag();
            }
        return c;
    }

    struct NumericFim
    {
        Fim9 fim;
        Matrix9d standard_error = Matrix9d::Zero();
        long n_draws = 0;
        std::uint64_t seed = 0;
    };

    // Expectation over pilots taken analytically. With E[s s^H] = I and
    // E[s s^T] = 0 the real coordinates are white with variance 1/2, so
    //   E[J] = (1/2) sum_k (dt / sigma_z^2) Re <G_x[k], G_y[k]>.
    inline NumericFim quadrature_fim(const OracleScenario &scn)
    {
        const ResponseBasis rb = response_basis(scn, scn.grid());
        NumericFim out;
        for (int x = 0; x < kNumParams; ++x)
            for (int y = x; y < kNumParams; ++y)
            {
                const double v =
                    0.5 * (rb.rows[x].conjugate().cwiseProduct(rb.rows[y])).sum().real() * rb.dt / rb.sigma2;
                out.fim.matrix(x, y) = v;
                out.fim.matrix(y, x) = v;
            }
        out.fim.noise_term = detail::noise_term(scn);
        out.fim.matrix(idx(Param::EpsR), idx(Param::EpsR)) += out.fim.noise_term;
        return out;
    }

    struct MonteCarloOptions
    {
        long n_draws = 10000;
        std::uint64_t seed = 1;
        int chunk_size = 256;
        unsigned threads = 0; // 0: thread_count()
    };

    // Monte Carlo average of the per-realization information over QPSK pilot
    // draws. Draws are grouped in fixed-size chunks, each with its own RNG
    // stream; chunk sums are reduced in chunk order, so the result does not
    // depend on the thread count.
    inline NumericFim numeric_fim(const OracleScenario &scn, const MonteCarloOptions &opts)
    {
        if (opts.n_draws < 100)
            throw ConfigError("numeric_fim: n_draws must be at least 100");
        if (opts.chunk_size < 1)
            throw ConfigError("numeric_fim: chunk_size must be positive");

        const ResponseBasis rb = response_basis(scn, scn.grid());
        const int nb = scn.n_beams();
        const int ns = scn.signal.n_pilots;

        // Q_xy = (dt / sigma^2) Re(conj(G_x) G_y^T); per draw J_xy = c^T Q_xy c.
        constexpr int kPairs = kNumParams * (kNumParams + 1) / 2;
        std::array<Eigen::MatrixXd, kPairs> Q;
        std::array<std::pair<int, int>, kPairs> pairs;
        {
            int q = 0;
            for (int x = 0; x < kNumParams; ++x)
                for (int y = x; y < kNumParams; ++y, ++q)
                {
                    pairs[q] = {x, y};
                    Q[q] = (rb.rows[x].conjugate() * rb.rows[y].transpose()).real() * (rb.dt / rb.sigma2);
                    Q[q] = linalg::symmetrize(Q[q]);
                }
        }

        auto draw_values = [&](CounterRng &rng, std::array<double, kPairs> &vals)
        {
            const Eigen::VectorXd c = symbol_coordinates(draw_qpsk(rng, nb, ns));
            for (int q = 0; q < kPairs; ++q)
                vals[q] = c.dot(Q[q] * c);
        };

        // Shift by the first realization for a stable variance estimate.
        std::array<double, kPairs> shift{};
        {
            CounterRng rng(opts.seed, {0});
            draw_values(rng, shift);
        }

        const long n_chunks = (opts.n_draws + opts.chunk_size - 1) / opts.chunk_size;
        struct ChunkSums
        {
            std::array<CompensatedSum, kPairs> s1, s2;
        };
        std::vector<ChunkSums> chunks(static_cast<std::size_t>(n_chunks));
        parallel_for(
            static_cast<std::size_t>(n_chunks),
            [&](std::size_t ci)
            {
                CounterRng rng(opts.seed, {static_cast<std::uint64_t>(ci)});
                const long begin = static_cast<long>(ci) * opts.chunk_size;
                const long end = std::min<long>(opts.n_draws, begin + opts.chunk_size);
                std::array<double, kPairs> vals;
                ChunkSums &cs = chunks[ci];
                for (long d = begin; d < end; ++d)
                {
                    draw_values(rng, vals);
                    for (int q = 0; q < kPairs; ++q)
                    {
                        const double v = vals[q] - shift[q];
                        cs.s1[q].add(v);
                        cs.s2[q].add(v * v);
                    }
                }
            },
            opts.threads);

        NumericFim out;
        out.n_draws = opts.n_draws;
        out.seed = opts.seed;
        const double n = static_cast<double>(opts.n_draws);
        for (int q = 0; q < kPairs; ++q)
        {
            CompensatedSum s1, s2;
            for (const auto &cs : chunks)
            {
                s1.add(cs.s1[q].value());
                s2.add(cs.s2[q].value());
            }
            const double mean_shifted = s1.value() / n;
            const double var = std::max(0.0, (s2.value() - n * mean_shifted * mean_shifted) / (n - 1.0));
            const auto [x, y] = pairs[q];
            out.fim.matrix(x, y) = out.fim.matrix(y, x) = shift[q] + mean_shifted;
            out.standard_error(x, y) = out.standard_error(y, x) = std::sqrt(var / n);
        }
        out.fim.noise_term = detail::noise_term(scn);
        out.fim.matrix(idx(Param::EpsR), idx(Param::EpsR)) += out.fim.noise_term;
        return out;
    }

    // Closed-form FIM of the same scenario, for comparison.
    inline Fim9 closed_form_fim(const OracleScenario &scn)
    {
        return channel_fim(scn.link(), scn.channel, scn.iqi);
    }

    struct MomentStat
    {
        cx mean;
        double se_re = 0.0;
        double se_im = 0.0;
    };

    // Integrated pilot moments of a single stream at zero delay, estimated by
    // Monte Carlo: int s_T s_T^*, int s_T s_T, int s_T' s_T'^*, int s_T' s_T',
    // and the cross moments int s_T' s_T^* and int s_T' s_T.
    struct SignalMoments
    {
        MomentStat c_hh, c_tt, c_dhh, c_dtt, cross_h, cross_b;
        long n_draws = 0;
    };

    inline SignalMoments signal_moments_mc(const IqiParams &p, const PulseShape &pulse, int n_pilots, int oversampling,
                                           long n_draws, std::uint64_t seed)
    {
        p.validate();
        const TimeGrid grid = make_time_grid(pulse, n_pilots, oversampling, 0.0);
        const double ts = pulse.symbol_duration();
        Eigen::MatrixXd P(grid.n, n_pilots), D(grid.n, n_pilots);
        for (int i = 0; i < grid.n; ++i)
            for (int n = 0; n < n_pilots; ++n)
            {
                P(i, n) = pulse.value(grid.time(i) - n * ts);
                D(i, n) = pulse.derivative(grid.time(i) - n * ts);
            }
        const cx et = std::polar(1.0 + p.eps_t, p.psi_t);
        const cx at = 0.5 * (1.0 + et);
        const cx bt = 0.5 * (1.0 - et);

        constexpr int kStats = 6;
        std::array<CompensatedSum, 2 * kStats> s1, s2;
        CounterRng rng(seed, {0x5157});
        for (long d = 0; d < n_draws; ++d)
        {
            const Eigen::VectorXcd sym = draw_qpsk(rng, 1, n_pilots).transpose();
            const Eigen::VectorXcd s = P * sym;
            const Eigen::VectorXcd ds = D * sym;
            const Eigen::VectorXcd st = at * s + bt * s.conjugate();
            const Eigen::VectorXcd dst = at * ds + bt * ds.conjugate();
            const std::array<cx, kStats> v = {
                st.dot(st) * grid.dt,
                (st.array() * st.array()).sum() * grid.dt,
                dst.dot(dst) * grid.dt,
                (dst.array() * dst.array()).sum() * grid.dt,
                st.dot(dst) * grid.dt, // sum dst * conj(st)
                (dst.array() * st.array()).sum() * grid.dt,
            };
            for (int k = 0; k < kStats; ++k)
            {
                s1[2 * k].add(v[k].real());
                s2[2 * k].add(v[k].real() * v[k].real());
                s1[2 * k + 1].add(v[k].imag());
                s2[2 * k + 1].add(v[k].imag() * v[k].imag());
            }
        }
        const double n = static_cast<double>(n_draws);
        auto stat = [&](int k)
        {
            MomentStat m;
            const double re = s1[2 * k].value() / n;
            const double im = s1[2 * k + 1].value() / n;
            m.mean = cx(re, im);
            m.se_re = std::sqrt(std::max(0.0, (s2[2 * k].value() / n - re * re) / (n - 1.0)));
            m.se_im = std::sqrt(std::max(0.0, (s2[2 * k + 1].value() / n - im * im) / (n - 1.0)));
            return m;
        };
        SignalMoments out;
        out.c_hh = stat(0);
        out.c_tt = stat(1);
        out.c_dhh = stat(2);
        out.c_dtt = stat(3);
        out.cross_h = stat(4);
        out.cross_b = stat(5);
        out.n_draws = n_draws;
        return out;
    }

    struct SmallScenarioOptions
    {
        int max_elements = 8;
        int max_beams = 4;
        int max_pilots = 4;
        double eps_max = 0.5;
        double psi_max = std::numbers::pi / 6.0;
        PulseKind pulse = PulseKind::Gaussian;
        int oversampling = 16;
    };

    // Random scenario with small dimensions, arbitrary complex beamformers
    // and normalized time (T_s = 1, N_0 = 1).
    inline OracleScenario random_small_scenario(std::uint64_t seed, std::uint64_t index,
                                                const SmallScenarioOptions &opts = {})
    {
        CounterRng rng(seed, {0x0AC1E, index});
        auto randint = [&](int lo, int hi) { return lo + static_cast<int>(rng.below(static_cast<std::uint64_t>(hi - lo + 1))); };
        OracleScenario scn;
        scn.rx = ArrayConfig::ula(randint(1, opts.max_elements), rng.uniform(0.3, 0.7));
        scn.tx = ArrayConfig::ula(randint(1, opts.max_elements), rng.uniform(0.3, 0.7));
        const int nb = randint(1, opts.max_beams);
        auto random_matrix = [&](int rows)
        {
            Eigen::MatrixXcd M(rows, nb);
            for (int c = 0; c < nb; ++c)
                for (int r = 0; r < rows; ++r)
                    M(r, c) = cx(rng.normal(), rng.normal());
            return Eigen::MatrixXcd(M / std::sqrt(2.0 * rows * nb));
        };
        scn.W = random_matrix(scn.rx.n_elements);
        scn.F = random_matrix(scn.tx.n_elements);
        scn.beam_power = 1.0;
        scn.oversampling = opts.oversampling;
        scn.pulse = opts.pulse == PulseKind::Gaussian ? PulseShape::gaussian(1.0) : PulseShape::truncated_sinc(1.0);
        scn.signal.symbol_energy_baseband = 1.0;
        scn.signal.n_pilots = randint(1, opts.max_pilots);
        scn.signal.symbol_duration = 1.0;
        scn.signal.bandwidth = 1.0;
        scn.signal.noise_psd = 1.0;
        scn.signal.eff_bandwidth_sq = scn.pulse.eff_bandwidth_sq();
        scn.channel.phi_r = rng.uniform(0.2, std::numbers::pi - 0.2);
        scn.channel.phi_t = rng.uniform(0.2, 2.0 * std::numbers::pi - 0.2);
        scn.channel.tau = rng.uniform(0.05, 2.0);
        const double g = rng.uniform(0.5, 1.5);
        const double th = rng.uniform(-std::numbers::pi, std::numbers::pi);
        scn.channel.gamma_re = g * std::cos(th);
        scn.channel.gamma_im = g * std::sin(th);
        scn.iqi.eps_t = rng.uniform(-opts.eps_max, opts.eps_max);
        scn.iqi.eps_r = rng.uniform(-opts.eps_max, opts.eps_max);
        scn.iqi.psi_t = rng.uniform(-opts.psi_max, opts.psi_max);
        scn.iqi.psi_r = rng.uniform(-opts.psi_max, opts.psi_max);
        return scn;
    }
}

#endif
