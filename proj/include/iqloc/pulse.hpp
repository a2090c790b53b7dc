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

#ifndef IQLOC_PULSE_HPP
#define IQLOC_PULSE_HPP

#include <cmath>
#include <numbers>
#include <string>

#include "iqloc/errors.hpp"

namespace iqloc
{
    enum class PulseKind
    {
        TruncatedSinc,
        Gaussian,
    };

    // Real, even, unit-energy pulse p(t) with support [-K T_s, K T_s].
    //
    // TruncatedSinc: sinc(t / T_s) / sqrt(T_s) cut at +-K symbols and rescaled
    // to unit energy. Its spectrum is nearly flat over [-1/(2 T_s), 1/(2 T_s)].
    // Gaussian: (pi s^2)^(-1/4) exp(-t^2 / (2 s^2)) with s = width * T_s;
    // smooth, so grid sums of p^2 and p'^2 converge spectrally.
    class PulseShape
    {
    public:
        static PulseShape truncated_sinc(double symbol_duration, int truncation = 8)
        {
            PulseShape p(PulseKind::TruncatedSinc, symbol_duration, truncation, 0.0);
            p.calibrate();
            return p;
        }

        static PulseShape gaussian(double symbol_duration, double width = 0.5, int truncation = 8)
        {
            PulseShape p(PulseKind::Gaussian, symbol_duration, truncation, width);
            p.calibrate();
            return p;
        }

        PulseKind kind() const { return kind_; }
        double symbol_duration() const { return ts_; }
        int truncation() const { return trunc_; }
        double half_support() const { return trunc_ * ts_; }

        double value(double t) const
        {
            if (std::abs(t) > half_support())
                return 0.0;
            return scale_ * raw(t);
        }

        double derivative(double t) const
        {
            if (std::abs(t) > half_support())
                return 0.0;
            return scale_ * raw_derivative(t);
        }

        // int p'(t)^2 dt / (4 pi^2) of the truncated, normalized pulse.
        double eff_bandwidth_sq() const { return eff_bw_sq_; }

        // Energy of the ideal (untruncated) pulse lying outside the support.
        double truncation_loss() const { return truncation_loss_; }

        std::string name() const { return kind_ == PulseKind::Gaussian ? "gaussian" : "sinc"; }

    private:
        PulseShape(PulseKind kind, double ts, int trunc, double width) : kind_(kind), ts_(ts), trunc_(trunc), width_(width)
        {
            if (!(ts > 0.0) || trunc < 1)
                throw ConfigError("PulseShape: symbol duration and truncation must be positive");
            if (kind == PulseKind::Gaussian && !(width > 0.0))
                throw ConfigError("PulseShape: gaussian width must be positive");
        }

        double raw(double t) const
        {
            if (kind_ == PulseKind::Gaussian)
            {
                const double s = width_ * ts_;
                return std::pow(std::numbers::pi * s * s, -0.25) * std::exp(-0.5 * t * t / (s * s));
            }
            const double x = t / ts_;
            if (x == 0.0)
                return 1.0 / std::sqrt(ts_);
            const double px = std::numbers::pi * x;
            return std::sin(px) / px / std::sqrt(ts_);
        }

        double raw_derivative(double t) const
        {
            if (kind_ == PulseKind::Gaussian)
            {
                const double s = width_ * ts_;
                return -t / (s * s) * raw(t);
            }
            const double x = t / ts_;
            if (x == 0.0)
                return 0.0;
            const double px = std::numbers::pi * x;
            // d/dx sinc(x) = (cos(pi x) - sinc(x)) / x
            return (std::cos(px) - std::sin(px) / px) / x / (ts_ * std::sqrt(ts_));
        }

        // Composite Simpson rule on the support, fine enough that its error
        // is far below any tolerance used downstream.
        template <typename F>
        double integrate(F &&f) const
        {
            const int per_symbol = 4096;
            const int n = 2 * trunc_ * per_symbol;
            const double h = 2.0 * half_support() / n;
            double acc = f(-half_support()) + f(half_support());
            for (int k = 1; k < n; ++k)
                acc += (k % 2 ? 4.0 : 2.0) * f(-half_support() + k * h);
            return acc * h / 3.0;
        }

        void calibrate()
        {
            if (kind_ == PulseKind::Gaussian)
            {
                const double s = width_ * ts_;
                const double z = half_support() / s;
                truncation_loss_ = std::erfc(z);
                scale_ = 1.0;
                eff_bw_sq_ = 1.0 / (8.0 * std::numbers::pi * std::numbers::pi * s * s);
                return;
            }
            const double energy = integrate([this](double t) { const double v = raw(t); return v * v; });
            truncation_loss_ = 1.0 - energy;
            scale_ = 1.0 / std::sqrt(energy);
            const double d2 = integrate([this](double t) { const double v = raw_derivative(t); return v * v; });
            eff_bw_sq_ = scale_ * scale_ * d2 / (4.0 * std::numbers::pi * std::numbers::pi);
        }

        PulseKind kind_;
        double ts_;
        int trunc_;
        double width_;
        double scale_ = 1.0;
        double eff_bw_sq_ = 0.0;
        double truncation_loss_ = 0.0;
    };
}

#endif
