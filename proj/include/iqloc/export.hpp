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

#ifndef IQLOC_EXPORT_HPP
#define IQLOC_EXPORT_HPP

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "iqloc/errors.hpp"
#include "iqloc/scenario.hpp"

namespace iqloc
{
    inline constexpr const char *kSweepCsvHeader = "eps_t,psi_t,eps_r,psi_r,peb_deg_pct,oeb_deg_pct,n_ok,n_fail";

    // 17 significant digits; NaN is written as "nan".
    inline std::string format_double(double v)
    {
        if (std::isnan(v))
            return "nan";
        if (std::isinf(v))
            return v > 0 ? "inf" : "-inf";
        char buf[40];
        std::snprintf(buf, sizeof buf, "%.17g", v);
        return buf;
    }

    inline double parse_double(const std::string &s)
    {
        if (s == "nan")
            return std::numeric_limits<double>::quiet_NaN();
        char *end = nullptr;
        const double v = std::strtod(s.c_str(), &end);
        if (end == s.c_str() || *end != '\0')
            throw IoError("cannot parse number '" + s + "'");
        return v;
    }

    // Bitwise equality, NaN payloads included.
    inline bool bit_equal(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }

    inline bool bit_equal(const SweepRecord &a, const SweepRecord &b)
    {
        return bit_equal(a.eps_t, b.eps_t) && bit_equal(a.psi_t, b.psi_t) && bit_equal(a.eps_r, b.eps_r) &&
               bit_equal(a.psi_r, b.psi_r) && bit_equal(a.peb_deg_pct, b.peb_deg_pct) &&
               bit_equal(a.oeb_deg_pct, b.oeb_deg_pct) && a.n_ok == b.n_ok && a.n_fail == b.n_fail;
    }

    inline void write_text_file(const std::string &path, const std::string &text)
    {
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        if (!out)
            throw IoError("cannot open '" + path + "' for writing");
        out << text;
        out.flush();
        if (!out)
            throw IoError("write to '" + path + "' failed");
    }

    inline std::string read_text_file(const std::string &path)
    {
        std::ifstream in(path, std::ios::binary);
        if (!in)
            throw IoError("cannot open '" + path + "' for reading");
        std::ostringstream ss;
        ss << in.rdbuf();
        return ss.str();
    }

    // Angles in radians. Lines end with LF.
    inline std::string sweep_to_csv(const std::vector<SweepRecord> &records)
    {
        std::string out = kSweepCsvHeader;
        out += '\n';
        for (const auto &r : records)
        {
            out += format_double(r.eps_t) + ',' + format_double(r.psi_t) + ',' + format_double(r.eps_r) + ',' +
                   format_double(r.psi_r) + ',' + format_double(r.peb_deg_pct) + ',' + format_double(r.oeb_deg_pct) +
                   ',' + std::to_string(r.n_ok) + ',' + std::to_string(r.n_fail) + '\n';
        }
        return out;
    }

    inline std::vector<SweepRecord> sweep_from_csv(const std::string &text)
    {
        std::istringstream in(text);
        std::string line;
        if (!std::getline(in, line) || line != kSweepCsvHeader)
            throw IoError("sweep CSV: missing or unexpected header");
        std::vector<SweepRecord> out;
        while (std::getline(in, line))
        {
            if (line.empty())
                continue;
            std::vector<std::string> f;
            std::stringstream ls(line);
            std::string cell;
            while (std::getline(ls, cell, ','))
                f.push_back(cell);
            if (f.size() != 8)
                throw IoError("sweep CSV: expected 8 fields in line '" + line + "'");
            SweepRecord r;
            r.eps_t = parse_double(f[0]);
            r.psi_t = parse_double(f[1]);
            r.eps_r = parse_double(f[2]);
            r.psi_r = parse_double(f[3]);
            r.peb_deg_pct = parse_double(f[4]);
            r.oeb_deg_pct = parse_double(f[5]);
            r.n_ok = std::stol(f[6]);
            r.n_fail = std::stol(f[7]);
            out.push_back(r);
        }
        return out;
    }

    namespace detail
    {
        inline std::string json_number(double v) { return std::isfinite(v) ? format_double(v) : "null"; }
        inline double json_get(const nlohmann::json &j, const char *key)
        {
            const auto &v = j.at(key);
            return v.is_null() ? std::numeric_limits<double>::quiet_NaN() : v.get<double>();
        }
    }

    // JSON mirror of the CSV. Numbers are written with 17 significant digits;
    // NaN becomes null.
    inline std::string sweep_to_json(const std::vector<SweepRecord> &records, const ScenarioConfig *cfg = nullptr)
    {
        std::string out = "{\n";
        if (cfg)
            out += "  \"config\": " + config_to_json(*cfg).dump() + ",\n";
        out += "  \"records\": [";
        for (std::size_t i = 0; i < records.size(); ++i)
        {
            const auto &r = records[i];
            out += i ? ",\n    " : "\n    ";
            out += "{\"eps_t\": " + detail::json_number(r.eps_t) + ", \"psi_t\": " + detail::json_number(r.psi_t) +
                   ", \"eps_r\": " + detail::json_number(r.eps_r) + ", \"psi_r\": " + detail::json_number(r.psi_r) +
                   ", \"peb_deg_pct\": " + detail::json_number(r.peb_deg_pct) +
                   ", \"oeb_deg_pct\": " + detail::json_number(r.oeb_deg_pct) + ", \"n_ok\": " + std::to_string(r.n_ok) +
                   ", \"n_fail\": " + std::to_string(r.n_fail) + "}";
        }
        out += records.empty() ? "]\n}\n" : "\n  ]\n}\n";
        return out;
    }

    inline std::vector<SweepRecord> sweep_from_json(const std::string &text)
    {
        try
        {
            const nlohmann::json j = nlohmann::json::parse(text);
            std::vector<SweepRecord> out;
            for (const auto &e : j.at("records"))
            {
                SweepRecord r;
                r.eps_t = detail::json_get(e, "eps_t");
                r.psi_t = detail::json_get(e, "psi_t");
                r.eps_r = detail::json_get(e, "eps_r");
                r.psi_r = detail::json_get(e, "psi_r");
                r.peb_deg_pct = detail::json_get(e, "peb_deg_pct");
                r.oeb_deg_pct = detail::json_get(e, "oeb_deg_pct");
                r.n_ok = e.at("n_ok").get<long>();
                r.n_fail = e.at("n_fail").get<long>();
                out.push_back(r);
            }
            return out;
        }
        catch (const nlohmann::json::exception &e)
        {
            throw IoError(std::string("sweep JSON: ") + e.what());
        }
    }

    enum class ExportFormat
    {
        Csv,
        Json,
    };

    inline ExportFormat parse_format(const std::string &s)
    {
        if (s == "csv")
            return ExportFormat::Csv;
        if (s == "json")
            return ExportFormat::Json;
        throw ConfigError("unknown format '" + s + "' (expected csv or json)");
    }

    inline void export_sweep(const std::vector<SweepRecord> &records, ExportFormat fmt, const std::string &path,
                             const ScenarioConfig *cfg = nullptr)
    {
        write_text_file(path, fmt == ExportFormat::Csv ? sweep_to_csv(records) : sweep_to_json(records, cfg));
    }

    inline std::vector<SweepRecord> import_sweep(const std::string &path)
    {
        const std::string text = read_text_file(path);
        const auto first = text.find_first_not_of(" \t\r\n");
        if (first != std::string::npos && text[first] == '{')
            return sweep_from_json(text);
        return sweep_from_csv(text);
    }

    // Row-major CSV with a header naming the parameter order.
    template <typename Derived>
    std::string matrix_to_csv(const Eigen::MatrixBase<Derived> &m, const std::vector<std::string> &names)
    {
        if (static_cast<Eigen::Index>(names.size()) != m.cols())
            throw DimensionMismatch("matrix_to_csv: one name per column is required");
        std::string out;
        for (std::size_t i = 0; i < names.size(); ++i)
            out += (i ? "," : "") + names[i];
        out += '\n';
        for (Eigen::Index r = 0; r < m.rows(); ++r)
        {
            for (Eigen::Index c = 0; c < m.cols(); ++c)
                out += (c ? "," : "") + format_double(m(r, c));
            out += '\n';
        }
        return out;
    }

    inline Eigen::MatrixXd matrix_from_csv(const std::string &text, std::vector<std::string> *names = nullptr)
    {
        std::istringstream in(text);
        std::string line;
        if (!std::getline(in, line))
            throw IoError("matrix CSV: empty input");
        std::vector<std::string> header;
        {
            std::stringstream ls(line);
            std::string cell;
            while (std::getline(ls, cell, ','))
                header.push_back(cell);
        }
        std::vector<std::vector<double>> rows;
        while (std::getline(in, line))
        {
            if (line.empty())
                continue;
            std::vector<double> row;
            std::stringstream ls(line);
            std::string cell;
            while (std::getline(ls, cell, ','))
                row.push_back(parse_double(cell));
            if (row.size() != header.size())
                throw IoError("matrix CSV: row width does not match header");
            rows.push_back(std::move(row));
        }
        Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(header.size()));
        for (std::size_t r = 0; r < rows.size(); ++r)
            for (std::size_t c = 0; c < header.size(); ++c)
                m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
        if (names)
            *names = header;
        return m;
    }

    inline std::vector<std::string> param_names(int count = kNumParams)
    {
        std::vector<std::string> out;
        for (int i = 0; i < count; ++i)
            out.emplace_back(kParamNames[static_cast<std::size_t>(i)]);
        return out;
    }
}

#endif
