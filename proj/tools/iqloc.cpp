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

// iqloc command line: sweep | verify | bound

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "iqloc/iqloc.hpp"

namespace
{
    using namespace iqloc;

    struct CommonOptions
    {
        std::string config_path;
        std::string figure;
        std::optional<std::uint64_t> seed;
        std::string out_dir = ".";
        std::string format = "csv";
        bool strict = false;
    };

    ScenarioConfig build_config(const CommonOptions &o)
    {
        ScenarioConfig cfg = o.figure.empty() ? ScenarioConfig{} : preset_config(o.figure);
        if (!o.config_path.empty())
            cfg = load_config(o.config_path, cfg);
        if (o.seed)
            cfg.seed = *o.seed;
        if (o.strict)
            cfg.nuisance_solve = NuisanceSolve::Strict;
        cfg.validate();
        return cfg;
    }

    void ensure_dir(const std::string &dir)
    {
        std::error_code ec;
        std::filesystem::create_directories(dir, ec);
        if (ec)
            throw IoError("cannot create output directory '" + dir + "': " + ec.message());
    }

    int run_sweep_cmd(const CommonOptions &o, int positions, int iterations, int grid_points)
    {
        ScenarioConfig cfg = build_config(o);
        if (positions > 0)
            cfg.n_positions = positions;
        if (iterations > 0)
            cfg.n_iterations = iterations;
        if (grid_points > 0)
        {
            cfg.eps_axis.points = grid_points;
            if (cfg.psi_axis.points > 1)
                cfg.psi_axis.points = grid_points;
        }
        cfg.validate();
        const ExportFormat fmt = parse_format(o.format);
        ensure_dir(o.out_dir);

        const SweepResult res = run_sweep(cfg);
        const std::string path =
            (std::filesystem::path(o.out_dir) / (cfg.name + (fmt == ExportFormat::Csv ? ".csv" : ".json"))).string();
        export_sweep(res.records, fmt, path, &cfg);

        double max_peb = -INFINITY, max_oeb = -INFINITY;
        long flagged = 0;
        for (const auto &r : res.records)
        {
            if (std::isfinite(r.peb_deg_pct))
                max_peb = std::max(max_peb, r.peb_deg_pct);
            if (std::isfinite(r.oeb_deg_pct))
                max_oeb = std::max(max_oeb, r.oeb_deg_pct);
            flagged += r.flagged() ? 1 : 0;
        }
        std::printf("%s: %zu grid points, seed %llu -> %s\n", cfg.name.c_str(), res.records.size(),
                    static_cast<unsigned long long>(cfg.seed), path.c_str());
        std::printf("max PEB degradation %.4f %%, max OEB degradation %.4f %%, flagged points %ld\n", max_peb, max_oeb,
                    flagged);
        return 0;
    }

    int run_verify_cmd(const CommonOptions &o, const std::string &mode, long draws, int scenarios,
                       const std::string &perturb, bool matched, const std::string &pulse)
    {
        VerifyOptions v;
        if (mode == "quadrature")
            v.mode = OracleMode::Quadrature;
        else if (mode == "montecarlo")
            v.mode = OracleMode::MonteCarlo;
        else
            throw ConfigError("--mode must be quadrature or montecarlo");
        v.n_draws = draws;
        v.n_scenarios = scenarios;
        v.seed = o.seed.value_or(1);
        v.matched = matched;
        if (pulse == "gaussian")
            v.scenario.pulse = PulseKind::Gaussian;
        else if (pulse == "sinc")
            v.scenario.pulse = PulseKind::TruncatedSinc;
        else
            throw ConfigError("--pulse must be gaussian or sinc");
        if (!perturb.empty())
            v.perturb = parse_perturbation(perturb);

        const VerifyReport rep = run_verify(v);
        ensure_dir(o.out_dir);
        const std::string path = (std::filesystem::path(o.out_dir) / "oracle_report.json").string();
        write_text_file(path, report_to_json(rep).dump(2) + "\n");

        for (const auto &sc : rep.scenarios)
            std::printf("scenario %2llu  N_R=%d N_T=%d N_B=%d N_s=%d  max|z|=%.3f  max rel=%.3e\n",
                        static_cast<unsigned long long>(sc.index), sc.n_rx, sc.n_tx, sc.n_beams, sc.n_pilots,
                        sc.max_abs_z, sc.max_rel);
        std::printf("%s: %s (max|z| %.3f, max rel %.3e) -> %s\n", mode.c_str(), rep.pass ? "PASS" : "FAIL",
                    rep.max_abs_z, rep.max_rel, path.c_str());
        return rep.pass ? 0 : 1;
    }

    struct PointOptions
    {
        double px = 0.0, py = 5.0, orientation_deg = 0.0;
        double eps_t = 0.0, psi_t_deg = 0.0, eps_r = 0.0, psi_r_deg = 0.0;
        double theta_deg = 0.0;
        std::string dump_fim;
    };

    int run_bound_cmd(const CommonOptions &o, const PointOptions &p)
    {
        ScenarioConfig cfg = build_config(o);
        cfg.orientation = deg2rad(p.orientation_deg);
        const LinkModel link = cfg.link();
        const LocParams loc{p.px, p.py, cfg.orientation};
        const double gabs = cfg.gamma_scale * free_space_gain(cfg.wavelength(), std::hypot(p.px, p.py));
        const cx gamma = std::polar(gabs, deg2rad(p.theta_deg));
        const IqiParams iqi{p.eps_t, deg2rad(p.psi_t_deg), p.eps_r, deg2rad(p.psi_r_deg)};
        const PointBounds b = evaluate_bounds(link, loc, gamma, iqi, cfg.schur());

        std::printf("peb_m,oeb_rad,peb_matched_m,oeb_matched_rad,peb_deg_pct,oeb_deg_pct\n");
        std::printf("%s,%s,%s,%s,%s,%s\n", format_double(b.result.peb).c_str(), format_double(b.result.oeb).c_str(),
                    format_double(b.result.peb_matched).c_str(), format_double(b.result.oeb_matched).c_str(),
                    format_double(b.result.peb_deg_pct).c_str(), format_double(b.result.oeb_deg_pct).c_str());
        if (!p.dump_fim.empty())
        {
            write_text_file(p.dump_fim, matrix_to_csv(b.fim.matrix, param_names()));
            std::fprintf(stderr, "channel FIM written to %s\n", p.dump_fim.c_str());
        }
        return 0;
    }
}

int main(int argc, char **argv)
{
    CLI::App app{"Position and orientation error bounds under transmitter and receiver I/Q imbalance"};
    app.require_subcommand(1);

    CommonOptions common;
    auto add_common = [&](CLI::App *cmd, bool with_format)
    {
        cmd->add_option("--config", common.config_path, "JSON scenario configuration")->check(CLI::ExistingFile);
        cmd->add_option("--figure", common.figure, "preset: fig3, fig4, fig5, fig6 or fig7")
            ->check(CLI::IsMember({"fig3", "fig4", "fig5", "fig6", "fig7"}));
        cmd->add_option("--seed", common.seed, "random seed");
        cmd->add_option("--out-dir", common.out_dir, "output directory");
        if (with_format)
            cmd->add_option("--format", common.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    };

    auto *sweep = app.add_subcommand("sweep", "degradation sweep over an imbalance grid");
    add_common(sweep, true);
    int positions = 0, iterations = 0, grid_points = 0;
    sweep->add_option("--positions", positions, "override the number of UE positions");
    sweep->add_option("--iterations", iterations, "override the iterations per position");
    sweep->add_option("--grid", grid_points, "override the points per grid axis");
    sweep->add_flag("--strict", common.strict, "fail on a singular nuisance block instead of projecting it out");

    auto *verify = app.add_subcommand("verify", "compare the closed-form FIM with the numerical oracle");
    add_common(verify, false);
    std::string mode = "quadrature", perturb, pulse = "gaussian";
    long draws = 10000;
    int scenarios = 10;
    bool matched = false;
    verify->add_option("--mode", mode, "quadrature or montecarlo")->check(CLI::IsMember({"quadrature", "montecarlo"}));
    verify->add_option("--draws", draws, "Monte Carlo pilot draws per scenario");
    verify->add_option("--scenarios", scenarios, "number of random small scenarios");
    verify->add_option("--perturb", perturb, "scale one closed-form entry, e.g. phi_r,phi_r,1.1");
    verify->add_option("--pulse", pulse, "gaussian or sinc")->check(CLI::IsMember({"gaussian", "sinc"}));
    verify->add_flag("--matched", matched, "set all imbalance parameters to zero");

    auto *bound = app.add_subcommand("bound", "bounds at a single UE position");
    add_common(bound, false);
    PointOptions point;
    bound->add_option("--px", point.px, "UE x position [m]");
    bound->add_option("--py", point.py, "UE y position [m]");
    bound->add_option("--orientation-deg", point.orientation_deg, "UE orientation [deg]");
    bound->add_option("--eps-t", point.eps_t, "transmitter amplitude imbalance");
    bound->add_option("--psi-t-deg", point.psi_t_deg, "transmitter phase imbalance [deg]");
    bound->add_option("--eps-r", point.eps_r, "receiver amplitude imbalance");
    bound->add_option("--psi-r-deg", point.psi_r_deg, "receiver phase imbalance [deg]");
    bound->add_option("--theta-deg", point.theta_deg, "path gain phase [deg]");
    bound->add_option("--dump-fim", point.dump_fim, "write the 9x9 channel FIM as CSV");
    bound->add_flag("--strict", common.strict, "fail on a singular nuisance block instead of projecting it out");

    CLI11_PARSE(app, argc, argv);

    try
    {
        if (sweep->parsed())
            return run_sweep_cmd(common, positions, iterations, grid_points);
        if (verify->parsed())
            return run_verify_cmd(common, mode, draws, scenarios, perturb, matched, pulse);
        if (bound->parsed())
            return run_bound_cmd(common, point);
    }
    catch (const iqloc::Error &e)
    {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 0;
}
