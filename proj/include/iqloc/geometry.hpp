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

#ifndef IQLOC_GEOMETRY_HPP
#define IQLOC_GEOMETRY_HPP

#include <cmath>
#include <numbers>

#include <Eigen/Dense>

#include "iqloc/errors.hpp"
#include "iqloc/fim_core.hpp"
#include "iqloc/linalg.hpp"

namespace iqloc
{
    inline constexpr double kSpeedOfLight = 299792458.0;

    // UE position (receiver at the origin) and UE array orientation.
    struct LocParams
    {
        double px = 0.0;
        double py = 1.0;
        double orientation = 0.0; // phi_0, radians
    };

    struct GeometricChannel
    {
        double phi_r = 0.0;
        double phi_t = 0.0;
        double tau = 0.0;
    };

    // PEB/OEB of one location-domain FIM.
    struct LocationBounds
    {
        double peb = 0.0; // meters
        double oeb = 0.0; // radians
        Matrix3d covariance = Matrix3d::Zero();
        double condition = 0.0;
    };

    // Bounds under IQI next to the matched baseline.
    struct BoundResult
    {
        double peb = 0.0;
        double oeb = 0.0;
        double peb_matched = 0.0;
        double oeb_matched = 0.0;
        double peb_deg_pct = 0.0;
        double oeb_deg_pct = 0.0;
    };

    inline double degradation_pct(double impaired, double matched) { return (impaired - matched) / matched * 100.0; }

    inline BoundResult make_bound_result(const LocationBounds &iq, const LocationBounds &matched)
    {
        BoundResult r;
        r.peb = iq.peb;
        r.oeb = iq.oeb;
        r.peb_matched = matched.peb;
        r.oeb_matched = matched.oeb;
        r.peb_deg_pct = degradation_pct(iq.peb, matched.peb);
        r.oeb_deg_pct = degradation_pct(iq.oeb, matched.oeb);
        return r;
    }

    inline void check_location(const LocParams &loc)
    {
        if (!std::isfinite(loc.px) || !std::isfinite(loc.py) || !std::isfinite(loc.orientation))
            throw DegenerateGeometry("non-finite location parameter");
        if (std::hypot(loc.px, loc.py) == 0.0)
            throw DegenerateGeometry("UE coincides with the base station");
        if (!(loc.py > 0.0))
            throw DegenerateGeometry("UE must lie in the half plane y > 0");
    }

    // phi_T is returned unreduced: pi - phi_0 + phi_R.
    inline GeometricChannel geometry_from_location(const LocParams &loc, double c = kSpeedOfLight)
    {
        check_location(loc);
        const double r = std::hypot(loc.px, loc.py);
        GeometricChannel g;
        g.phi_r = std::acos(loc.px / r);
        g.phi_t = std::numbers::pi - loc.orientation + g.phi_r;
        g.tau = r / c;
        return g;
    }

    // Rows: px, py, phi_0. Columns: phi_R, phi_T, tau.
    inline Matrix3d jacobian(const LocParams &loc, double c = kSpeedOfLight)
    {
        check_location(loc);
        const double r2 = loc.px * loc.px + loc.py * loc.py;
        const double r = std::sqrt(r2);
        Matrix3d T;
        T << -loc.py / r2, -loc.py / r2, loc.px / (c * r),
            loc.px / r2, loc.px / r2, loc.py / (c * r),
            0.0, -1.0, 0.0;
        return T;
    }

    // J_L = T J_G T^T
    inline Matrix3d location_efim(const Matrix3d &T, const Matrix3d &efim_geometric)
    {
        return linalg::symmetrize(T * efim_geometric * T.transpose());
    }

    inline LocationBounds bounds_from_location_efim(const Matrix3d &J_loc, double max_condition = 1e12)
    {
        LocationBounds out;
        out.condition = linalg::equilibrated_condition(J_loc);
        out.covariance = linalg::inverse_spd<NearSingularLocationFim>(J_loc, max_condition);
        const double pos = out.covariance(0, 0) + out.covariance(1, 1);
        const double ori = out.covariance(2, 2);
        if (!(pos >= 0.0) || !(ori >= 0.0))
            throw NearSingularLocationFim(out.condition);
        out.peb = std::sqrt(pos);
        out.oeb = std::sqrt(ori);
        return out;
    }

    inline LocationBounds bounds_from_efim(const Matrix3d &efim_geometric, const LocParams &loc,
                                           double max_condition = 1e12, double c = kSpeedOfLight)
    {
        return bounds_from_location_efim(location_efim(jacobian(loc, c), efim_geometric), max_condition);
    }
}

#endif
