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

#ifndef IQLOC_FIM_CORE_HPP
#define IQLOC_FIM_CORE_HPP

#include <array>
#include <cmath>
#include <complex>
#include <string_view>

#include <Eigen/Dense>

#include "iqloc/array_model.hpp"
#include "iqloc/errors.hpp"
#include "iqloc/iqi_signal.hpp"
#include "iqloc/linalg.hpp"

namespace iqloc
{
    // Channel parameter order used by every 9x9 matrix in the library.
    enum class Param : int
    {
        PhiR = 0,
        PhiT,
        Tau,
        GammaRe,
        GammaIm,
        EpsR,
        EpsT,
        PsiR,
        PsiT,
    };

    inline constexpr int kNumParams = 9;
    inline constexpr std::array<std::string_view, kNumParams> kParamNames = {
        "phi_r", "phi_t", "tau", "gamma_re", "gamma_im", "eps_r", "eps_t", "psi_r", "psi_t"};

    constexpr int idx(Param p) { return static_cast<int>(p); }

    using Matrix9d = Eigen::Matrix<double, 9, 9>;
    using Matrix5d = Eigen::Matrix<double, 5, 5>;
    using Matrix3d = Eigen::Matrix3d;

    struct ChannelParams
    {
        double phi_r = 0.0; // DOA
        double phi_t = 0.0; // DOD
        double tau = 0.0;   // TOA, seconds
        double gamma_re = 0.0;
        double gamma_im = 0.0;

        cx gamma() const { return {gamma_re, gamma_im}; }
        double gamma_abs() const { return std::hypot(gamma_re, gamma_im); }
        double theta() const { return std::atan2(gamma_im, gamma_re); }
    };

    // Quadratic forms of one link end, with M the beamformer of that end
    // (F at the transmitter, W at the receiver), a the steering vector and
    // k its angle derivative:
    //   aa   = a^H M M^H a     ka   = k^H M M^H a     kk   = k^H M M^H k
    //   aa_c = a^H M M^T a*    ka_c = k^H M M^T a*    kk_c = k^H M M^T k*
    struct SideGains
    {
        cx aa, ka, kk, aa_c, ka_c, kk_c;
    };

    struct BeamGainTerms
    {
        SideGains tx;
        SideGains rx;
    };

    inline SideGains side_gains(const Eigen::MatrixXcd &M, const Eigen::VectorXcd &a, const Eigen::VectorXcd &k)
    {
        // u = M^H a, ud = M^H k; every form is an inner product of these.
        const Eigen::VectorXcd u = M.adjoint() * a;
        const Eigen::VectorXcd ud = M.adjoint() * k;
        SideGains g;
        g.aa = u.squaredNorm();
        g.ka = ud.dot(u);
        g.kk = ud.squaredNorm();
        g.aa_c = u.dot(u.conjugate());
        g.ka_c = ud.dot(u.conjugate());
        g.kk_c = ud.dot(ud.conjugate());
        return g;
    }

    inline BeamGainTerms beam_gain_terms(const BeamformerSet &F, const BeamformerSet &W, const ArrayConfig &tx,
                                         const ArrayConfig &rx, const ChannelParams &ch)
    {
        if (F.matrix.rows() != tx.n_elements || W.matrix.rows() != rx.n_elements)
            throw DimensionMismatch("beam_gain_terms: beamformer rows must equal the array element counts");
        if (F.matrix.cols() != W.matrix.cols())
            throw DimensionMismatch("beam_gain_terms: transmit and receive beam counts differ");
        BeamGainTerms t;
        t.tx = side_gains(F.matrix, steering_vector(tx, ch.phi_t), steering_derivative(tx, ch.phi_t));
        t.rx = side_gains(W.matrix, steering_vector(rx, ch.phi_r), steering_derivative(rx, ch.phi_r));
        return t;
    }

    // Scalars shared by every closed-form entry:
    //   eta = E_s N_R N_T N_s / (4 sigma_z^2), g = 1 + m^2,
    //   w_R = 1 - m_R^2 exp(-2j psi_R),  w_T = 1 - m_T^2 exp(2j psi_T),
    //   gamma = |gamma| exp(j theta).
    struct FimContext
    {
        double eta = 0.0;
        double g_r = 2.0;
        double g_t = 2.0;
        cx w_r;
        cx w_t;
        double gamma_abs = 0.0;
        double theta = 0.0;
        int n_beams = 1;

        cx gamma() const { return std::polar(gamma_abs, theta); }
    };

    inline FimContext make_fim_context(const SignalConfig &cfg, const IqiParams &p, const ChannelParams &ch, int n_rx,
                                       int n_tx, int n_beams, double beam_power)
    {
        p.validate();
        cfg.validate();
        const double es = transmit_symbol_energy(cfg, p);
        const double sz2 = noise_variance(cfg, p, beam_power);
        FimContext ctx;
        ctx.eta = es * n_rx * n_tx * cfg.n_pilots / (4.0 * sz2);
        ctx.g_r = 1.0 + p.m_r() * p.m_r();
        ctx.g_t = 1.0 + p.m_t() * p.m_t();
        ctx.w_r = 1.0 - std::polar(p.m_r() * p.m_r(), -2.0 * p.psi_r);
        ctx.w_t = 1.0 - std::polar(p.m_t() * p.m_t(), 2.0 * p.psi_t);
        ctx.gamma_abs = ch.gamma_abs();
        ctx.theta = ch.theta();
        ctx.n_beams = n_beams;
        return ctx;
    }

    // Channel-parameter FIM. `matrix` includes the noise-covariance term of the
    // (eps_R, eps_R) entry, which is also reported separately.
    struct Fim9
    {
        Matrix9d matrix = Matrix9d::Zero();
        double noise_term = 0.0;
    };

    namespace detail
    {
        // Every derivative of the noiseless mean is a sum of two rank-one terms
        //   coef * q * (b^H x(t)),
        // q a receive-side vector (W^H a_R or W^H k_R, optionally conjugated),
        // b a transmit-side vector (F^H a_T or F^H k_T, optionally conjugated),
        // x(t) one of s_T, e = ds_T/deps_T or ds_T/dtau, optionally conjugated.
        enum class Vec
        {
            A,
            K
        };
        enum class Sig
        {
            S,
            E,
            D
        };
        struct VecRef
        {
            Vec v;
            bool conj;
        };
        struct SigRef
        {
            Sig s;
            bool conj;
        };
        struct Term
        {
            cx coef;
            VecRef q;
            VecRef b;
            SigRef x;
        };
        using Deriv = std::array<Term, 2>;

        // x^H y for x, y drawn from {a, k} mapped through the side's beamformer.
        inline cx inner(const SideGains &g, VecRef x, VecRef y)
        {
            auto herm = [&](Vec p, Vec q) -> cx
            {
                if (p == Vec::A && q == Vec::A)
                    return g.aa;
                if (p == Vec::K && q == Vec::K)
                    return g.kk;
                return p == Vec::K ? g.ka : std::conj(g.ka);
            };
            auto bil = [&](Vec p, Vec q) -> cx
            {
                if (p == Vec::A && q == Vec::A)
                    return g.aa_c;
                if (p == Vec::K && q == Vec::K)
                    return g.kk_c;
                return g.ka_c;
            };
            if (!x.conj && !y.conj)
                return herm(x.v, y.v);
            if (x.conj && y.conj)
                return std::conj(herm(x.v, y.v));
            if (!x.conj)
                return bil(x.v, y.v);
            return std::conj(bil(x.v, y.v));
        }

        struct MomentTable
        {
            CorrelationConstants c;
            ImbalanceDerivativeMoments e;

            // int E[z y^H] and int E[z y^T] for unconjugated signals
            cx herm(Sig z, Sig y) const
            {
                if (z == Sig::S && y == Sig::S)
                    return c.c_hh;
                if (z == Sig::D && y == Sig::D)
                    return c.c_dhh;
                if (z == Sig::E && y == Sig::E)
                    return e.e_h;
                if ((z == Sig::S && y == Sig::E) || (z == Sig::E && y == Sig::S))
                    return e.se_h;
                return 0.0;
            }
            cx bil(Sig z, Sig y) const
            {
                if (z == Sig::S && y == Sig::S)
                    return c.c_tt;
                if (z == Sig::D && y == Sig::D)
                    return c.c_dtt;
                if (z == Sig::E && y == Sig::E)
                    return e.e_b;
                if ((z == Sig::S && y == Sig::E) || (z == Sig::E && y == Sig::S))
                    return e.se_b;
                return 0.0;
            }
            // int E[z y^H] with conjugation flags applied
            cx moment(SigRef z, SigRef y) const
            {
                if (!z.conj && !y.conj)
                    return herm(z.s, y.s);
                if (z.conj && y.conj)
                    return std::conj(herm(z.s, y.s));
                if (!z.conj)
                    return bil(z.s, y.s);
                return std::conj(bil(z.s, y.s));
            }
        };

        inline std::array<Deriv, kNumParams> mean_derivatives(const FimContext &ctx, const IqiParams &p)
        {
            const IqiCoefficients k = iqi_coefficients(p);
            const ReceiveCoefficientDerivatives dk = receive_coefficient_derivatives(p);
            const cx g = ctx.gamma();
            const cx gc = std::conj(g);
            const cx j(0.0, 1.0);
            const VecRef a{Vec::A, false}, ac{Vec::A, true}, kv{Vec::K, false}, kc{Vec::K, true};
            const SigRef s{Sig::S, false}, sc{Sig::S, true};
            const SigRef e{Sig::E, false}, ec{Sig::E, true};
            const SigRef d{Sig::D, false}, dc{Sig::D, true};

            std::array<Deriv, kNumParams> out;
            out[idx(Param::PhiR)] = {Term{k.alpha_r * g, kv, a, s}, Term{k.beta_r * gc, kc, ac, sc}};
            out[idx(Param::PhiT)] = {Term{k.alpha_r * g, a, kv, s}, Term{k.beta_r * gc, ac, kc, sc}};
            out[idx(Param::Tau)] = {Term{k.alpha_r * g, a, a, d}, Term{k.beta_r * gc, ac, ac, dc}};
            out[idx(Param::GammaRe)] = {Term{k.alpha_r, a, a, s}, Term{k.beta_r, ac, ac, sc}};
            out[idx(Param::GammaIm)] = {Term{j * k.alpha_r, a, a, s}, Term{-j * k.beta_r, ac, ac, sc}};
            out[idx(Param::EpsR)] = {Term{dk.dalpha_deps * g, a, a, s}, Term{dk.dbeta_deps * gc, ac, ac, sc}};
            out[idx(Param::EpsT)] = {Term{k.alpha_r * g, a, a, e}, Term{k.beta_r * gc, ac, ac, ec}};
            out[idx(Param::PsiR)] = {Term{dk.dalpha_dpsi * g, a, a, s}, Term{dk.dbeta_dpsi * gc, ac, ac, sc}};
            // ds_T/dpsi_T = j m_T ds_T/deps_T
            const double mt = p.m_t();
            out[idx(Param::PsiT)] = {Term{j * mt * k.alpha_r * g, a, a, e}, Term{-j * mt * k.beta_r * gc, ac, ac, ec}};
            return out;
        }
    }

    // Closed-form channel FIM. Each entry is
    //   J_xy = (4 eta / N_s) Re sum_{i,j} conj(c_i) c_j (q_i^H q_j) (b_j^H b_i) M(x_j, x_i),
    // summed over the rank-one terms of dmu/dx and dmu/dy, with M the
    // integrated pilot moments. Entries pairing a delay-derivative signal with a
    // non-derivative signal vanish identically. The (eps_R, eps_R) entry also
    // carries the noise-covariance term 2 m_R^2 N_B^2 T_0 / g_R^2.
    inline Fim9 assemble_fim(const FimContext &ctx, const BeamGainTerms &terms, const IqiParams &p,
                             const SignalConfig &cfg)
    {
        p.validate();
        cfg.validate();
        if (ctx.n_beams < 1)
            throw DimensionMismatch("assemble_fim: n_beams must be >= 1");

        detail::MomentTable mom{correlation_constants(cfg, p), imbalance_derivative_moments(cfg, p)};
        const auto derivs = detail::mean_derivatives(ctx, p);
        const double scale = 4.0 * ctx.eta / cfg.n_pilots;

        Fim9 fim;
        for (int r = 0; r < kNumParams; ++r)
        {
            for (int c = r; c < kNumParams; ++c)
            {
                cx acc = 0.0;
                for (const auto &ti : derivs[static_cast<std::size_t>(r)])
                    for (const auto &tj : derivs[static_cast<std::size_t>(c)])
                        acc += std::conj(ti.coef) * tj.coef * detail::inner(terms.rx, ti.q, tj.q) *
                               detail::inner(terms.tx, tj.b, ti.b) * mom.moment(tj.x, ti.x);
                fim.matrix(r, c) = scale * acc.real();
                fim.matrix(c, r) = fim.matrix(r, c);
            }
        }

        const double mr = p.m_r();
        const double gr = 1.0 + mr * mr;
        const double nb = ctx.n_beams;
        fim.noise_term = 2.0 * mr * mr * nb * nb * cfg.observation_time() / (gr * gr);
        fim.matrix(idx(Param::EpsR), idx(Param::EpsR)) += fim.noise_term;
        return fim;
    }

    enum class NuisanceSolve
    {
        Strict, // LDLT on the equilibrated block; throws above max_condition
        Pseudo, // generalized Schur complement, rank deficiency projected out
    };

    struct SchurOptions
    {
        double max_condition = 1e12;
        NuisanceSolve solve = NuisanceSolve::Strict;
    };

    // Schur complement J_G - J_GN J_N^- J_GN^T of the leading K x K block.
    // In Pseudo mode J_N^- is a generalized inverse; the result is the
    // equivalent FIM whenever the columns of J_GN^T lie in the range of J_N,
    // which holds for any PSD J.
    template <int K, int N>
    Eigen::Matrix<double, K, K> schur_complement(const Eigen::Matrix<double, N, N> &J, const SchurOptions &opts,
                                                 int *nuisance_rank = nullptr)
    {
        static_assert(K > 0 && K < N);
        const Eigen::MatrixXd JG = J.template topLeftCorner<K, K>();
        const Eigen::MatrixXd JGN = J.template topRightCorner<K, N - K>();
        const Eigen::MatrixXd JN = J.template bottomRightCorner<N - K, N - K>();

        Eigen::MatrixXd X; // J_N^-1 J_GN^T
        if (opts.solve == NuisanceSolve::Strict)
        {
            double condition = 0.0;
            if (!linalg::solve_spd(JN, JGN.transpose(), opts.max_condition, X, condition))
                throw NearSingularNuisanceBlock(condition);
            if (nuisance_rank)
                *nuisance_rank = N - K;
        }
        else
        {
            X = linalg::generalized_inverse(JN, opts.max_condition, nuisance_rank) * JGN.transpose();
        }
        const Eigen::MatrixXd out = JG - JGN * X;
        return linalg::symmetrize(out);
    }

    inline Matrix3d efim_geometric(const Fim9 &J, const SchurOptions &opts = {})
    {
        return schur_complement<3, 9>(J.matrix, opts);
    }

    // FIM of the model without imbalance parameters: same construction at
    // zero imbalance, restricted to [phi_R, phi_T, tau, gamma_R, gamma_I].
    // ctx must have been built for the all-zero IqiParams.
    inline Matrix5d matched_fim(const FimContext &ctx, const BeamGainTerms &terms, const SignalConfig &cfg)
    {
        const Fim9 full = assemble_fim(ctx, terms, IqiParams{}, cfg);
        return full.matrix.topLeftCorner<5, 5>();
    }

    inline Matrix3d matched_efim(const Matrix5d &J, const SchurOptions &opts = {})
    {
        return schur_complement<3, 5>(J, opts);
    }

    // Arrays, beamformers and signal settings of one uplink.
    struct LinkModel
    {
        ArrayConfig rx;
        ArrayConfig tx;
        BeamformerSet W;
        BeamformerSet F;
        SignalConfig signal;

        int n_beams() const { return static_cast<int>(W.matrix.cols()); }
    };

    inline FimContext make_fim_context(const LinkModel &link, const IqiParams &p, const ChannelParams &ch)
    {
        return make_fim_context(link.signal, p, ch, link.rx.n_elements, link.tx.n_elements, link.n_beams(),
                                link.W.beam_power);
    }

    inline Fim9 channel_fim(const LinkModel &link, const ChannelParams &ch, const IqiParams &p)
    {
        const BeamGainTerms terms = beam_gain_terms(link.F, link.W, link.tx, link.rx, ch);
        return assemble_fim(make_fim_context(link, p, ch), terms, p, link.signal);
    }

    inline Matrix5d matched_channel_fim(const LinkModel &link, const ChannelParams &ch)
    {
        const BeamGainTerms terms = beam_gain_terms(link.F, link.W, link.tx, link.rx, ch);
        return matched_fim(make_fim_context(link, IqiParams{}, ch), terms, link.signal);
    }
}

#endif
