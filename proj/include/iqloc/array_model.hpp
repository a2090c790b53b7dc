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

#ifndef IQLOC_ARRAY_MODEL_HPP
#define IQLOC_ARRAY_MODEL_HPP

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include <Eigen/Dense>

#include "iqloc/errors.hpp"

namespace iqloc
{
    using cx = std::complex<double>;

    // Uniform linear array. Element offsets are in units of the spacing and
    // always form the symmetric grid -(N-1)/2, ..., (N-1)/2.
    struct ArrayConfig
    {
        int n_elements = 1;
        double spacing_ratio = 0.5; // d / lambda
        std::vector<double> locations{0.0};

        static ArrayConfig ula(int n_elements, double spacing_ratio = 0.5)
        {
            if (n_elements < 1)
                throw DimensionMismatch("ArrayConfig: n_elements must be >= 1");
            if (!(spacing_ratio > 0.0) || !std::isfinite(spacing_ratio))
                throw DimensionMismatch("ArrayConfig: spacing_ratio must be positive");
            ArrayConfig cfg;
            cfg.n_elements = n_elements;
            cfg.spacing_ratio = spacing_ratio;
            cfg.locations.resize(static_cast<std::size_t>(n_elements));
            const double first = -0.5 * (n_elements - 1);
            for (int k = 0; k < n_elements; ++k)
                cfg.locations[static_cast<std::size_t>(k)] = first + k;
            return cfg;
        }
    };

    // a(phi) = exp(-j 2 pi (d/lambda) cos(phi) x) / sqrt(N)
    inline Eigen::VectorXcd steering_vector(const ArrayConfig &cfg, double angle)
    {
        const double kd = 2.0 * std::numbers::pi * cfg.spacing_ratio * std::cos(angle);
        const double norm = 1.0 / std::sqrt(static_cast<double>(cfg.n_elements));
        Eigen::VectorXcd a(cfg.n_elements);
        for (int k = 0; k < cfg.n_elements; ++k)
            a(k) = norm * std::polar(1.0, -kd * cfg.locations[static_cast<std::size_t>(k)]);
        return a;
    }

    // da/dphi, elementwise j 2 pi (d/lambda) sin(phi) x_k a_k
    inline Eigen::VectorXcd steering_derivative(const ArrayConfig &cfg, double angle)
    {
        const double ks = 2.0 * std::numbers::pi * cfg.spacing_ratio * std::sin(angle);
        Eigen::VectorXcd d = steering_vector(cfg, angle);
        for (int k = 0; k < cfg.n_elements; ++k)
            d(k) *= cx(0.0, ks * cfg.locations[static_cast<std::size_t>(k)]);
        return d;
    }

    struct AngleSector
    {
        double start = 0.0;
        double stop = std::numbers::pi;

        double span() const { return stop - start; }
        double midpoint() const { return 0.5 * (start + stop); }
    };

    // Analog beamformer, one column per beam. beam_power is the configured
    // per-beam power sigma_b^2; it is not recomputed from the matrix.
    struct BeamformerSet
    {
        Eigen::MatrixXcd matrix;
        int n_beams = 0;
        double beam_power = 1.0;
    };

    // Pointing angles spread evenly over the sector, endpoints included.
    // A single beam points at the sector midpoint.
    inline std::vector<double> beam_angles(int n_beams, const AngleSector &sector)
    {
        if (n_beams < 1)
            throw DimensionMismatch("beam_angles: n_beams must be >= 1");
        std::vector<double> angles(static_cast<std::size_t>(n_beams));
        if (n_beams == 1)
        {
            angles[0] = sector.midpoint();
            return angles;
        }
        const double step = sector.span() / (n_beams - 1);
        for (int l = 0; l < n_beams; ++l)
            angles[static_cast<std::size_t>(l)] = sector.start + l * step;
        return angles;
    }

    inline BeamformerSet make_directional_beamformer(const ArrayConfig &cfg, int n_beams,
                                                     const AngleSector &sector, double beam_power = 1.0)
    {
        const auto angles = beam_angles(n_beams, sector);
        BeamformerSet set;
        set.n_beams = n_beams;
        set.beam_power = beam_power;
        set.matrix.resize(cfg.n_elements, n_beams);
        const double scale = 1.0 / std::sqrt(static_cast<double>(n_beams));
        for (int l = 0; l < n_beams; ++l)
            set.matrix.col(l) = scale * steering_vector(cfg, angles[static_cast<std::size_t>(l)]);
        return set;
    }
}

#endif
