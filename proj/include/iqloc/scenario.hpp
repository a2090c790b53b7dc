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

#ifndef IQLOC_SCENARIO_HPP
#define IQLOC_SCENARIO_HPP

#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <numbers>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "iqloc/array_model.hpp"
#include "iqloc/errors.hpp"
#include "iqloc/fim_core.hpp"
#include "iqloc/geometry.hpp"
#include "iqloc/iqi_signal.hpp"
#include "iqloc/parallel.hpp"
#include "iqloc/rng.hpp"

namespace iqloc
{
    inline constexpr double deg2rad(double d) { return d * std::numbers::pi / 180.0; }
    inline constexpr double rad2deg(double r) { return r * 180.0 / std::numbers::pi; }

    // Evenly spaced values, endpoints included; a single point sits at lo.
    struct GridAxis
    {
        double lo = 0.0;
        double hi = 0.0;
        int points = 1;

        std::vector<double> values() const
        {
            std::vector<double> v(static_cast<std::size_t>(points));
            for (int i = 0; i < points; ++i)
                v[static_cast<std::size_t>(i)] = points == 1 ? lo : lo + (hi - lo) * i / (points - 1);
            return v;
        }
    };

    enum class SweepSide
    {
        Transmitter, // sweep (eps_T, psi_T); receiver imbalance randomized
        Receiver,    // sweep (eps_R, psi_R); transmitter imbalance randomized
    };

    enum class DegradationAveraging
    {
        PerSample,     // mean over samples of (PEB_IQ - PEB_match) / PEB_match
        RatioOfMeans,  // (mean PEB_IQ - mean PEB_match) / mean PEB_match
    };

    struct ScenarioConfig
    {
        std::string name = "custom";

        // arrays and beams
        double carrier_frequency = 38e9;
        int n_rx = 64;
        int n_tx = 32;
        int n_beams = 18;
        double spacing_ratio = 0.5;
        double beam_power = 1.0;
        double rx_sector_start = std::numbers::pi / 4.0;
        double rx_sector_stop = 3.0 * std::numbers::pi / 4.0;

        // signal
        double bandwidth = 125e6;
        int n_pilots = 16;
        double noise_psd_dbm_hz = -170.0;
        double symbol_energy = 1.0;
        double symbol_duration = 0.0; // 0 selects 1 / bandwidth
        EffBandwidthConvention eff_bandwidth = EffBandwidthConvention::ThirdOfSquare;

        // UE
        double orientation = 0.0;
        double region_extent = 10.0 * std::numbers::sqrt2; // {y >= |x|, y <= extent - |x|}
        double min_range = 0.1;
        std::vector<std::pair<double, double>> fixed_positions; // overrides random sampling when non-empty
        double gamma_scale = 1.0;

        // imbalance grid on the swept side and the far-end random ranges
        SweepSide side = SweepSide::Transmitter;
        GridAxis eps_axis{-0.5, 0.5, 21};
        GridAxis psi_axis{deg2rad(-30.0), deg2rad(30.0), 21};
        bool randomize_far_end = true;
        double far_eps_max = 0.5;
        double far_psi_max = deg2rad(30.0);
        IqiParams far_fixed; // used when randomize_far_end is false (only the far-end fields)

        // Monte Carlo
        int n_positions = 120;
        int n_iterations = 100;
        std::uint64_t seed = 1;
        bool antithetic_phase = true;
        DegradationAveraging averaging = DegradationAveraging::PerSample;
        NuisanceSolve nuisance_solve = NuisanceSolve::Pseudo;
        double max_condition = 1e12;

        double wavelength() const { return kSpeedOfLight / carrier_frequency; }

        void validate() const
        {
            if (!(carrier_frequency > 0.0) || n_rx < 1 || n_tx < 1 || n_beams < 1 || !(spacing_ratio > 0.0) ||
                !(beam_power > 0.0))
                throw ConfigError("ScenarioConfig: invalid array or beam settings");
            if (!(rx_sector_stop > rx_sector_start))
                throw ConfigError("ScenarioConfig: receive sector must be nonempty");
            if (!(bandwidth > 0.0) || n_pilots < 1 || !(symbol_energy > 0.0) || symbol_duration < 0.0 ||
                !std::isfinite(noise_psd_dbm_hz))
                throw ConfigError("ScenarioConfig: invalid signal settings");
            if (!(region_extent > 0.0) || min_range < 0.0 || !(gamma_scale > 0.0))
                throw ConfigError("ScenarioConfig: invalid UE settings");
            if (eps_axis.points < 1 || psi_axis.points < 1)
                throw ConfigError("ScenarioConfig: grid axes need at least one point");
            if (eps_axis.lo <= -1.0 || eps_axis.hi <= -1.0 || far_eps_max >= 1.0 || far_eps_max < 0.0 ||
                far_psi_max < 0.0)
                throw ConfigError("ScenarioConfig: imbalance ranges must keep eps > -1");
            if (n_positions < 1 || n_iterations < 1)
                throw ConfigError("ScenarioConfig: n_positions and n_iterations must be positive");
            if (!(max_condition > 1.0))
                throw ConfigError("ScenarioConfig: max_condition must exceed 1");
        }

        SignalConfig signal() const
        {
            SignalConfig s = SignalConfig::from_bandwidth(bandwidth, n_pilots, dbm_per_hz_to_watts_per_hz(noise_psd_dbm_hz),
                                                          eff_bandwidth, symbol_energy);
            if (symbol_duration > 0.0)
                s.symbol_duration = symbol_duration;
            return s;
        }

        AngleSector rx_sector() const { return {rx_sector_start, rx_sector_stop}; }

        // The UE beams cover the directions that map onto the receive sector.
        AngleSector tx_sector() const
        {
            return {std::numbers::pi - orientation + rx_sector_start, std::numbers::pi - orientation + rx_sector_stop};
        }

        LinkModel link() const
        {
            LinkModel l;
            l.rx = ArrayConfig::ula(n_rx, spacing_ratio);
            l.tx = ArrayConfig::ula(n_tx, spacing_ratio);
            l.W = make_directional_beamformer(l.rx, n_beams, rx_sector(), beam_power);
            l.F = make_directional_beamformer(l.tx, n_beams, tx_sector(), beam_power);
            l.signal = signal();
            return l;
        }

        SchurOptions schur() const { return {max_condition, nuisance_solve}; }
    };

    // Full-size presets: fig3/fig5 sweep the transmitter imbalance on a 2-D
    // grid (PEB and OEB views of the same sweep), fig4 sweeps eps_T at
    // psi_T = 0, fig6/fig7 sweep the receiver imbalance.
    inline ScenarioConfig preset_config(const std::string &figure)
    {
        ScenarioConfig cfg;
        cfg.name = figure;
        if (figure == "fig3" || figure == "fig5")
            cfg.side = SweepSide::Transmitter;
        else if (figure == "fig4")
        {
            cfg.side = SweepSide::Transmitter;
            cfg.psi_axis = {0.0, 0.0, 1};
        }
        else if (figure == "fig6" || figure == "fig7")
            cfg.side = SweepSide::Receiver;
        else
            throw ConfigError("unknown figure preset '" + figure + "' (expected fig3..fig7)");
        return cfg;
    }

    // ---- configuration file (JSON) -------------------------------------------

    namespace detail
    {
        inline const char *side_name(SweepSide s) { return s == SweepSide::Transmitter ? "tx" : "rx"; }
        inline const char *averaging_name(DegradationAveraging a)
        {
            return a == DegradationAveraging::PerSample ? "per_sample" : "ratio_of_means";
        }
        inline const char *solve_name(NuisanceSolve s) { return s == NuisanceSolve::Strict ? "strict" : "pseudo"; }
        inline const char *convention_name(EffBandwidthConvention c)
        {
            return c == EffBandwidthConvention::ThirdOfSquare ? "third" : "flat";
        }
    }

    // Angles are stored in degrees in the file.
    inline nlohmann::json config_to_json(const ScenarioConfig &c)
    {
        nlohmann::json positions = nlohmann::json::array();
        for (const auto &[x, y] : c.fixed_positions)
            positions.push_back({x, y});
        return {
            {"name", c.name},
            {"carrier_frequency_hz", c.carrier_frequency},
            {"n_rx", c.n_rx},
            {"n_tx", c.n_tx},
            {"n_beams", c.n_beams},
            {"spacing_ratio", c.spacing_ratio},
            {"beam_power", c.beam_power},
            {"rx_sector_deg", {rad2deg(c.rx_sector_start), rad2deg(c.rx_sector_stop)}},
            {"bandwidth_hz", c.bandwidth},
            {"n_pilots", c.n_pilots},
            {"noise_psd_dbm_hz", c.noise_psd_dbm_hz},
            {"symbol_energy", c.symbol_energy},
            {"symbol_duration_s", c.symbol_duration},
            {"eff_bandwidth", detail::convention_name(c.eff_bandwidth)},
            {"orientation_deg", rad2deg(c.orientation)},
            {"region_extent_m", c.region_extent},
            {"min_range_m", c.min_range},
            {"fixed_positions", positions},
            {"gamma_scale", c.gamma_scale},
            {"side", detail::side_name(c.side)},
            {"eps_grid", {c.eps_axis.lo, c.eps_axis.hi, c.eps_axis.points}},
            {"psi_grid_deg", {rad2deg(c.psi_axis.lo), rad2deg(c.psi_axis.hi), c.psi_axis.points}},
            {"randomize_far_end", c.randomize_far_end},
            {"far_eps_max", c.far_eps_max},
            {"far_psi_max_deg", rad2deg(c.far_psi_max)},
            {"far_fixed", {{"eps_t", c.far_fixed.eps_t}, {"psi_t_deg", rad2deg(c.far_fixed.psi_t)},
                           {"eps_r", c.far_fixed.eps_r}, {"psi_r_deg", rad2deg(c.far_fixed.psi_r)}}},
            {"n_positions", c.n_positions},
            {"n_iterations", c.n_iterations},
            {"seed", c.seed},
            {"antithetic_phase", c.antithetic_phase},
            {"averaging", detail::averaging_name(c.averaging)},
            {"nuisance_solve", detail::solve_name(c.nuisance_solve)},
            {"max_condition", c.max_condition},
        };
    }

    // Keys absent from the file keep the values of `base`; unknown keys are
    // rejected so that typos do not silently fall back to defaults.
    inline ScenarioConfig config_from_json(const nlohmann::json &j, ScenarioConfig base = {})
    {
        if (!j.is_object())
            throw ConfigError("config: top level must be an object");
        static const std::set<std::string> known = {
            "name", "preset", "carrier_frequency_hz", "n_rx", "n_tx", "n_beams", "spacing_ratio", "beam_power",
            "rx_sector_deg", "bandwidth_hz", "n_pilots", "noise_psd_dbm_hz", "symbol_energy", "symbol_duration_s",
            "eff_bandwidth", "orientation_deg", "region_extent_m", "min_range_m", "fixed_positions", "gamma_scale",
            "side", "eps_grid", "psi_grid_deg", "randomize_far_end", "far_eps_max", "far_psi_max_deg", "far_fixed",
            "n_positions", "n_iterations", "seed", "antithetic_phase", "averaging", "nuisance_solve",
            "max_condition"};
        for (const auto &item : j.items())
            if (!known.count(item.key()))
                throw ConfigError("config: unknown key '" + item.key() + "'");

        try
        {
            ScenarioConfig c = j.contains("preset") ? preset_config(j.at("preset").get<std::string>()) : base;
            auto get = [&](const char *key, auto &dst)
            {
                if (j.contains(key))
                    dst = j.at(key).get<std::decay_t<decltype(dst)>>();
            };
            auto get_deg = [&](const char *key, double &dst)
            {
                if (j.contains(key))
                    dst = deg2rad(j.at(key).get<double>());
            };
            get("name", c.name);
            get("carrier_frequency_hz", c.carrier_frequency);
            get("n_rx", c.n_rx);
            get("n_tx", c.n_tx);
            get("n_beams", c.n_beams);
            get("spacing_ratio", c.spacing_ratio);
            get("beam_power", c.beam_power);
            if (j.contains("rx_sector_deg"))
            {
                const auto v = j.at("rx_sector_deg").get<std::vector<double>>();
                if (v.size() != 2)
                    throw ConfigError("config: rx_sector_deg needs [start, stop]");
                c.rx_sector_start = deg2rad(v[0]);
                c.rx_sector_stop = deg2rad(v[1]);
            }
            get("bandwidth_hz", c.bandwidth);
            get("n_pilots", c.n_pilots);
            get("noise_psd_dbm_hz", c.noise_psd_dbm_hz);
            get("symbol_energy", c.symbol_energy);
            get("symbol_duration_s", c.symbol_duration);
            if (j.contains("eff_bandwidth"))
            {
                const auto v = j.at("eff_bandwidth").get<std::string>();
                if (v == "third")
                    c.eff_bandwidth = EffBandwidthConvention::ThirdOfSquare;
                else if (v == "flat")
                    c.eff_bandwidth = EffBandwidthConvention::FlatSpectrum;
                else
                    throw ConfigError("config: eff_bandwidth must be 'third' or 'flat'");
            }
            get_deg("orientation_deg", c.orientation);
            get("region_extent_m", c.region_extent);
            get("min_range_m", c.min_range);
            if (j.contains("fixed_positions"))
            {
                c.fixed_positions.clear();
                for (const auto &p : j.at("fixed_positions"))
                {
                    const auto v = p.get<std::vector<double>>();
                    if (v.size() != 2)
                        throw ConfigError("config: fixed_positions entries need [x, y]");
                    c.fixed_positions.emplace_back(v[0], v[1]);
                }
            }
            get("gamma_scale", c.gamma_scale);
            if (j.contains("side"))
            {
                const auto v = j.at("side").get<std::string>();
                if (v == "tx")
                    c.side = SweepSide::Transmitter;
                else if (v == "rx")
                    c.side = SweepSide::Receiver;
                else
                    throw ConfigError("config: side must be 'tx' or 'rx'");
            }
            auto axis = [&](const char *key, GridAxis &dst, bool degrees)
            {
                if (!j.contains(key))
                    return;
                const auto &a = j.at(key);
                if (!a.is_array() || a.size() != 3)
                    throw ConfigError(std::string("config: ") + key + " needs [lo, hi, points]");
                const double s = degrees ? deg2rad(1.0) : 1.0;
                dst = {a[0].get<double>() * s, a[1].get<double>() * s, a[2].get<int>()};
            };
            axis("eps_grid", c.eps_axis, false);
            axis("psi_grid_deg", c.psi_axis, true);
            get("randomize_far_end", c.randomize_far_end);
            get("far_eps_max", c.far_eps_max);
            get_deg("far_psi_max_deg", c.far_psi_max);
            if (j.contains("far_fixed"))
            {
                const auto &f = j.at("far_fixed");
                c.far_fixed.eps_t = f.value("eps_t", 0.0);
                c.far_fixed.psi_t = deg2rad(f.value("psi_t_deg", 0.0));
                c.far_fixed.eps_r = f.value("eps_r", 0.0);
                c.far_fixed.psi_r = deg2rad(f.value("psi_r_deg", 0.0));
            }
            get("n_positions", c.n_positions);
            get("n_iterations", c.n_iterations);
            get("seed", c.seed);
            get("antithetic_phase", c.antithetic_phase);
            if (j.contains("averaging"))
            {
                const auto v = j.at("averaging").get<std::string>();
                if (v == "per_sample")
                    c.averaging = DegradationAveraging::PerSample;
                else if (v == "ratio_of_means")
                    c.averaging = DegradationAveraging::RatioOfMeans;
                else
                    throw ConfigError("config: averaging must be 'per_sample' or 'ratio_of_means'");
            }
            if (j.contains("nuisance_solve"))
            {
                const auto v = j.at("nuisance_solve").get<std::string>();
                if (v == "strict")
                    c.nuisance_solve = NuisanceSolve::Strict;
                else if (v == "pseudo")
                    c.nuisance_solve = NuisanceSolve::Pseudo;
                else
                    throw ConfigError("config: nuisance_solve must be 'strict' or 'pseudo'");
            }
            get("max_condition", c.max_condition);
            c.validate();
            return c;
        }
        catch (const nlohmann::json::exception &e)
        {
            throw ConfigError(std::string("config: ") + e.what());
        }
    }

    inline ScenarioConfig load_config(const std::string &path, ScenarioConfig base = {})
    {
        std::ifstream in(path);
        if (!in)
            throw IoError("cannot open config file '" + path + "'");
        nlohmann::json j;
        try
        {
            in >> j;
        }
        catch (const nlohmann::json::exception &e)
        {
            throw ConfigError("config '" + path + "': " + e.what());
        }
        return config_from_json(j, std::move(base));
    }

    // ---- single-point bounds ----------------------------------------------------

    struct PointBounds
    {
        BoundResult result;
        Matrix3d efim_iq = Matrix3d::Zero();
        Matrix3d efim_matched = Matrix3d::Zero();
        Fim9 fim;
    };

    // Bounds with and without imbalance at one UE location and path gain.
    inline PointBounds evaluate_bounds(const LinkModel &link, const LocParams &loc, cx gamma, const IqiParams &iqi,
                                       const SchurOptions &opts = {1e12, NuisanceSolve::Pseudo})
    {
        const GeometricChannel g = geometry_from_location(loc);
        ChannelParams ch{g.phi_r, g.phi_t, g.tau, gamma.real(), gamma.imag()};
        const BeamGainTerms terms = beam_gain_terms(link.F, link.W, link.tx, link.rx, ch);
        PointBounds out;
        out.fim = assemble_fim(make_fim_context(link, iqi, ch), terms, iqi, link.signal);
        out.efim_iq = efim_geometric(out.fim, opts);
        out.efim_matched = matched_efim(matched_fim(make_fim_context(link, IqiParams{}, ch), terms, link.signal), opts);
        const Matrix3d T = jacobian(loc);
        const LocationBounds iq = bounds_from_location_efim(location_efim(T, out.efim_iq), opts.max_condition);
        const LocationBounds m = bounds_from_location_efim(location_efim(T, out.efim_matched), opts.max_condition);
        out.result = make_bound_result(iq, m);
        return out;
    }

    // Free-space path-gain magnitude lambda / (4 pi r).
    inline double free_space_gain(double wavelength, double range) { return wavelength / (4.0 * std::numbers::pi * range); }

    // ---- sweep -----------------------------------------------------------------------

    struct SweepRecord
    {
        // Imbalance of the swept side; the randomized side is NaN.
        double eps_t = 0.0;
        double psi_t = 0.0;
        double eps_r = 0.0;
        double psi_r = 0.0;
        double peb_deg_pct = 0.0;
        double oeb_deg_pct = 0.0;
        long n_ok = 0;
        long n_fail = 0;

        // More than 10% of the samples failed.
        bool flagged() const { return n_fail * 10 > n_ok + n_fail; }
    };

    // Sampled UE locations inside {y >= |x|, y <= extent - |x|}, r >= min_range.
    inline std::vector<LocParams> sample_positions(const ScenarioConfig &cfg)
    {
        std::vector<LocParams> out;
        if (!cfg.fixed_positions.empty())
        {
            for (const auto &[x, y] : cfg.fixed_positions)
                out.push_back({x, y, cfg.orientation});
            return out;
        }
        const double h = 0.5 * cfg.region_extent;
        for (int i = 0; i < cfg.n_positions; ++i)
        {
            CounterRng rng(cfg.seed, {0x9051, static_cast<std::uint64_t>(i)});
            for (;;)
            {
                const double u = rng.uniform();
                const double v = rng.uniform();
                const double x = h * (u - v);
                const double y = h * (u + v);
                if (std::hypot(x, y) >= cfg.min_range && y > 0.0)
                {
                    out.push_back({x, y, cfg.orientation});
                    break;
                }
            }
        }
        return out;
    }

    struct FarEndDraw
    {
        double theta = 0.0; // path-gain phase
        double eps = 0.0;
        double psi = 0.0;
    };

    // Draw of iteration t at position i. Streams depend on (seed, i, t) only,
    // so every grid point sees the same positions, phases and far-end
    // imbalance. With antithetic phases, iterations 2k and 2k+1 share the
    // far-end draw and use phases theta and theta + pi/2.
    inline FarEndDraw far_end_draw(const ScenarioConfig &cfg, int position, int iteration)
    {
        const int base = cfg.antithetic_phase ? iteration / 2 : iteration;
        CounterRng rng(cfg.seed, {0x17E4, static_cast<std::uint64_t>(position), static_cast<std::uint64_t>(base)});
        FarEndDraw d;
        d.theta = rng.uniform(0.0, 2.0 * std::numbers::pi);
        d.eps = rng.uniform(-cfg.far_eps_max, cfg.far_eps_max);
        d.psi = rng.uniform(-cfg.far_psi_max, cfg.far_psi_max);
        if (cfg.antithetic_phase && (iteration % 2 == 1))
            d.theta += 0.5 * std::numbers::pi;
        return d;
    }

    inline IqiParams sample_iqi(const ScenarioConfig &cfg, double eps, double psi, const FarEndDraw &far)
    {
        IqiParams p;
        const double far_eps = cfg.randomize_far_end ? far.eps : (cfg.side == SweepSide::Transmitter ? cfg.far_fixed.eps_r : cfg.far_fixed.eps_t);
        const double far_psi = cfg.randomize_far_end ? far.psi : (cfg.side == SweepSide::Transmitter ? cfg.far_fixed.psi_r : cfg.far_fixed.psi_t);
        if (cfg.side == SweepSide::Transmitter)
            p = {eps, psi, far_eps, far_psi};
        else
            p = {far_eps, far_psi, eps, psi};
        return p;
    }

    struct SweepResult
    {
        std::vector<SweepRecord> records; // eps-major, psi-minor
        std::vector<double> eps_values;
        std::vector<double> psi_values;
    };

    // Runs the degradation sweep. Output is independent of the thread count.
    inline SweepResult run_sweep(const ScenarioConfig &cfg, unsigned threads = 0)
    {
        cfg.validate();
        const LinkModel link = cfg.link();
        const SchurOptions schur = cfg.schur();
        const std::vector<LocParams> positions = sample_positions(cfg);
        const int n_pos = static_cast<int>(positions.size());
        const int n_it = cfg.n_iterations;
        const double nan = std::numeric_limits<double>::quiet_NaN();

        struct PositionCache
        {
            ChannelParams channel; // gamma left at zero; set per sample
            BeamGainTerms terms;
            Matrix3d T;
            bool ok = true;
        };
        struct MatchedCache
        {
            LocationBounds bounds;
            bool ok = false;
        };
        std::vector<PositionCache> pos_cache(static_cast<std::size_t>(n_pos));
        std::vector<MatchedCache> matched(static_cast<std::size_t>(n_pos) * static_cast<std::size_t>(n_it));

        parallel_for(
            static_cast<std::size_t>(n_pos),
            [&](std::size_t i)
            {
                const LocParams &loc = positions[i];
                const GeometricChannel g = geometry_from_location(loc);
                PositionCache &pc = pos_cache[i];
                pc.channel = {g.phi_r, g.phi_t, g.tau, 0.0, 0.0};
                pc.terms = beam_gain_terms(link.F, link.W, link.tx, link.rx, pc.channel);
                pc.T = jacobian(loc);
                const double gabs = cfg.gamma_scale * free_space_gain(cfg.wavelength(), std::hypot(loc.px, loc.py));
                for (int t = 0; t < n_it; ++t)
                {
                    const FarEndDraw far = far_end_draw(cfg, static_cast<int>(i), t);
                    ChannelParams ch = pc.channel;
                    ch.gamma_re = gabs * std::cos(far.theta);
                    ch.gamma_im = gabs * std::sin(far.theta);
                    MatchedCache &mc = matched[i * static_cast<std::size_t>(n_it) + static_cast<std::size_t>(t)];
                    try
                    {
                        const Matrix5d J = matched_fim(make_fim_context(link, IqiParams{}, ch), pc.terms, link.signal);
                        mc.bounds = bounds_from_location_efim(location_efim(pc.T, matched_efim(J, schur)),
                                                              cfg.max_condition);
                        mc.ok = true;
                    }
                    catch (const IllConditioned &)
                    {
                        mc.ok = false;
                    }
                }
            },
            threads);

        SweepResult res;
        res.eps_values = cfg.eps_axis.values();
        res.psi_values = cfg.psi_axis.values();
        const std::size_t n_grid = res.eps_values.size() * res.psi_values.size();
        res.records.resize(n_grid);

        parallel_for(
            n_grid,
            [&](std::size_t gi)
            {
                const double eps = res.eps_values[gi / res.psi_values.size()];
                const double psi = res.psi_values[gi % res.psi_values.size()];
                CompensatedSum peb_deg, oeb_deg, peb_iq, peb_m, oeb_iq, oeb_m;
                long ok = 0, fail = 0;
                for (int i = 0; i < n_pos; ++i)
                {
                    const PositionCache &pc = pos_cache[static_cast<std::size_t>(i)];
                    const LocParams &loc = positions[static_cast<std::size_t>(i)];
                    const double gabs = cfg.gamma_scale * free_space_gain(cfg.wavelength(), std::hypot(loc.px, loc.py));
                    for (int t = 0; t < n_it; ++t)
                    {
                        const MatchedCache &mc =
                            matched[static_cast<std::size_t>(i) * static_cast<std::size_t>(n_it) + static_cast<std::size_t>(t)];
                        if (!mc.ok)
                        {
                            ++fail;
                            continue;
                        }
                        const FarEndDraw far = far_end_draw(cfg, i, t);
                        const IqiParams iqi = sample_iqi(cfg, eps, psi, far);
                        ChannelParams ch = pc.channel;
                        ch.gamma_re = gabs * std::cos(far.theta);
                        ch.gamma_im = gabs * std::sin(far.theta);
                        try
                        {
                            const Fim9 J = assemble_fim(make_fim_context(link, iqi, ch), pc.terms, iqi, link.signal);
                            const LocationBounds b =
                                bounds_from_location_efim(location_efim(pc.T, efim_geometric(J, schur)), cfg.max_condition);
                            peb_deg.add(degradation_pct(b.peb, mc.bounds.peb));
                            oeb_deg.add(degradation_pct(b.oeb, mc.bounds.oeb));
                            peb_iq.add(b.peb);
                            oeb_iq.add(b.oeb);
                            peb_m.add(mc.bounds.peb);
                            oeb_m.add(mc.bounds.oeb);
                            ++ok;
                        }
                        catch (const IllConditioned &)
                        {
                            ++fail;
                        }
                    }
                }
                SweepRecord &r = res.records[gi];
                if (cfg.side == SweepSide::Transmitter)
                {
                    r.eps_t = eps;
                    r.psi_t = psi;
                    r.eps_r = cfg.randomize_far_end ? nan : cfg.far_fixed.eps_r;
                    r.psi_r = cfg.randomize_far_end ? nan : cfg.far_fixed.psi_r;
                }
                else
                {
                    r.eps_r = eps;
                    r.psi_r = psi;
                    r.eps_t = cfg.randomize_far_end ? nan : cfg.far_fixed.eps_t;
                    r.psi_t = cfg.randomize_far_end ? nan : cfg.far_fixed.psi_t;
                }
                r.n_ok = ok;
                r.n_fail = fail;
                if (ok == 0)
                {
                    r.peb_deg_pct = r.oeb_deg_pct = nan;
                }
                else if (cfg.averaging == DegradationAveraging::PerSample)
                {
                    r.peb_deg_pct = peb_deg.value() / static_cast<double>(ok);
                    r.oeb_deg_pct = oeb_deg.value() / static_cast<double>(ok);
                }
                else
                {
                    r.peb_deg_pct = degradation_pct(peb_iq.value(), peb_m.value());
                    r.oeb_deg_pct = degradation_pct(oeb_iq.value(), oeb_m.value());
                }
            },
            threads);
        return res;
    }
}

#endif
