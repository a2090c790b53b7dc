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

#ifndef IQLOC_VERIFY_HPP
#define IQLOC_VERIFY_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "iqloc/errors.hpp"
#include "iqloc/export.hpp"
#include "iqloc/fim_core.hpp"
#include "iqloc/oracle.hpp"

namespace iqloc
{
    enum class OracleMode
    {
        Quadrature,
        MonteCarlo,
    };

    // Multiplies one closed-form entry (and its mirror) by a factor before
    // comparison; used as a negative control.
    struct Perturbation
    {
        Param row = Param::PhiR;
        Param col = Param::PhiR;
        double factor = 1.0;
    };

    inline Param param_from_name(const std::string &name)
    {
        for (int i = 0; i < kNumParams; ++i)
            if (kParamNames[static_cast<std::size_t>(i)] == name)
                return static_cast<Param>(i);
        throw ConfigError("unknown parameter name '" + name + "'");
    }

    // "row,col,factor", e.g. "phi_r,phi_r,1.1"
    inline Perturbation parse_perturbation(const std::string &text)
    {
        std::stringstream ss(text);
        std::string a, b, f;
        if (!std::getline(ss, a, ',') || !std::getline(ss, b, ',') || !std::getline(ss, f))
            throw ConfigError("perturbation must be 'row,col,factor'");
        Perturbation p{param_from_name(a), param_from_name(b), 0.0};
        try
        {
            p.factor = std::stod(f);
        }
        catch (const std::exception &)
        {
            throw ConfigError("perturbation factor '" + f + "' is not a number");
        }
        return p;
    }

    inline void apply_perturbation(Fim9 &J, const Perturbation &p)
    {
        const int r = idx(p.row), c = idx(p.col);
        J.matrix(r, c) *= p.factor;
        if (r != c)
            J.matrix(c, r) *= p.factor;
    }

    struct EntryComparison
    {
        int row = 0;
        int col = 0;
        double closed = 0.0;
        double numeric = 0.0;
        double se = 0.0;
        double z = 0.0;
        double rel = 0.0;
    };

    // Relative error with a floor of 1e-9 sqrt(J_ii J_jj), so entries that
    // vanish analytically are judged on the scale of their row and column.
    inline double relative_error(const Matrix9d &closed, double numeric, int r, int c)
    {
        const double diff = std::abs(numeric - closed(r, c));
        if (diff == 0.0)
            return 0.0;
        const double floor = 1e-9 * std::sqrt(std::abs(closed(r, r) * closed(c, c)));
        return diff / std::max({std::abs(closed(r, c)), floor, std::numeric_limits<double>::min()});
    }

    inline double z_score(const Matrix9d &closed, double numeric, double se, int r, int c)
    {
        const double diff = numeric - closed(r, c);
        if (diff == 0.0)
            return 0.0;
        const double floor = 1e-12 * std::sqrt(std::abs(closed(r, r) * closed(c, c)));
        return diff / std::max({se, floor, std::numeric_limits<double>::min()});
    }

    inline std::vector<EntryComparison> compare_fims(const Fim9 &closed, const oracle::NumericFim &numeric)
    {
        std::vector<EntryComparison> out;
        for (int r = 0; r < kNumParams; ++r)
            for (int c = r; c < kNumParams; ++c)
            {
                EntryComparison e;
                e.row = r;
                e.col = c;
                e.closed = closed.matrix(r, c);
                e.numeric = numeric.fim.matrix(r, c);
                e.se = numeric.standard_error(r, c);
                e.rel = relative_error(closed.matrix, e.numeric, r, c);
                e.z = z_score(closed.matrix, e.numeric, e.se, r, c);
                out.push_back(e);
            }
        return out;
    }

    struct VerifyOptions
    {
        OracleMode mode = OracleMode::Quadrature;
        int n_scenarios = 10;
        std::uint64_t seed = 1;
        long n_draws = 10000;
        double z_max = 4.0;
        double rel_max = 1e-6;
        bool matched = false; // all imbalance parameters set to zero
        oracle::SmallScenarioOptions scenario;
        std::optional<Perturbation> perturb;
        unsigned threads = 0;
    };

    struct ScenarioComparison
    {
        std::uint64_t index = 0;
        int n_rx = 0, n_tx = 0, n_beams = 0, n_pilots = 0;
        std::vector<EntryComparison> entries;
        double max_abs_z = 0.0;
        double max_rel = 0.0;
    };

    struct VerifyReport
    {
        OracleMode mode = OracleMode::Quadrature;
        std::uint64_t seed = 0;
        long n_draws = 0;
        double z_max = 4.0;
        double rel_max = 1e-6;
        std::vector<ScenarioComparison> scenarios;
        double max_abs_z = 0.0;
        double max_rel = 0.0;
        bool pass = true;
    };

    // Quadrature passes when every rel <= rel_max, Monte Carlo when every
    // |z| <= z_max.
    inline VerifyReport run_verify(const VerifyOptions &opts)
    {
        VerifyReport rep;
        rep.mode = opts.mode;
        rep.seed = opts.seed;
        rep.n_draws = opts.mode == OracleMode::MonteCarlo ? opts.n_draws : 0;
        rep.z_max = opts.z_max;
        rep.rel_max = opts.rel_max;
        for (int s = 0; s < opts.n_scenarios; ++s)
        {
            oracle::OracleScenario scn = oracle::random_small_scenario(opts.seed, static_cast<std::uint64_t>(s), opts.scenario);
            if (opts.matched)
                scn.iqi = IqiParams{};
            Fim9 closed = oracle::closed_form_fim(scn);
            if (opts.perturb)
                apply_perturbation(closed, *opts.perturb);
            oracle::NumericFim num;
            if (opts.mode == OracleMode::Quadrature)
                num = oracle::quadrature_fim(scn);
            else
                num = oracle::numeric_fim(scn, {opts.n_draws, opts.seed + static_cast<std::uint64_t>(s) * 7919u, 256,
                                                opts.threads});
            ScenarioComparison sc;
            sc.index = static_cast<std::uint64_t>(s);
            sc.n_rx = scn.rx.n_elements;
            sc.n_tx = scn.tx.n_elements;
            sc.n_beams = scn.n_beams();
            sc.n_pilots = scn.signal.n_pilots;
            sc.entries = compare_fims(closed, num);
            for (const auto &e : sc.entries)
            {
                if (opts.mode == OracleMode::MonteCarlo)
                    sc.max_abs_z = std::max(sc.max_abs_z, std::abs(e.z));
                sc.max_rel = std::max(sc.max_rel, e.rel);
            }
            rep.max_abs_z = std::max(rep.max_abs_z, sc.max_abs_z);
            rep.max_rel = std::max(rep.max_rel, sc.max_rel);
            rep.scenarios.push_back(std::move(sc));
        }
        rep.pass = opts.mode == OracleMode::Quadrature ? rep.max_rel <= opts.rel_max : rep.max_abs_z <= opts.z_max;
        return rep;
    }

    inline nlohmann::json report_to_json(const VerifyReport &rep)
    {
        nlohmann::json j;
        j["mode"] = rep.mode == OracleMode::Quadrature ? "quadrature" : "montecarlo";
        j["seed"] = rep.seed;
        j["n_draws"] = rep.n_draws;
        j["z_max"] = rep.z_max;
        j["rel_max"] = rep.rel_max;
        j["max_abs_z"] = rep.max_abs_z;
        j["max_rel"] = rep.max_rel;
        j["pass"] = rep.pass;
        j["scenarios"] = nlohmann::json::array();
        for (const auto &sc : rep.scenarios)
        {
            nlohmann::json js;
            js["index"] = sc.index;
            js["n_rx"] = sc.n_rx;
            js["n_tx"] = sc.n_tx;
            js["n_beams"] = sc.n_beams;
            js["n_pilots"] = sc.n_pilots;
            js["max_abs_z"] = sc.max_abs_z;
            js["max_rel"] = sc.max_rel;
            js["entries"] = nlohmann::json::array();
            for (const auto &e : sc.entries)
                js["entries"].push_back({{"row", kParamNames[static_cast<std::size_t>(e.row)]},
                                         {"col", kParamNames[static_cast<std::size_t>(e.col)]},
                                         {"closed", e.closed},
                                         {"numeric", e.numeric},
                                         {"se", e.se},
                                         {"z", e.z},
                                         {"rel", e.rel}});
            j["scenarios"].push_back(std::move(js));
        }
        return j;
    }
}

#endif
