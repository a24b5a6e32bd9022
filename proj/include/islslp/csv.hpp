// SPDX-License-Identifier: Apache-2.0
//
// islslp: low-range-sidelobe symbol-level precoding for MIMO-OFDM ISAC
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

#pragma once

#include "radar_sim.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace islslp
{

// Twelve significant digits, decimal dot regardless of the global locale.
inline std::string format_number(double v)
{
    if (std::isnan(v))
        return "nan";
    if (std::isinf(v))
        return v > 0 ? "inf" : "-inf";
    std::ostringstream o;
    o.imbue(std::locale::classic());
    o.precision(12);
    o << v;
    return o.str();
}

struct CsvField
{
    std::string text;

    CsvField(double v) : text(format_number(v)) {}
    CsvField(int v) : text(std::to_string(v)) {}
    CsvField(long v) : text(std::to_string(v)) {}
    CsvField(long long v) : text(std::to_string(v)) {}
    CsvField(unsigned long v) : text(std::to_string(v)) {}
    CsvField(unsigned long long v) : text(std::to_string(v)) {}
    CsvField(const char *s) : text(s) {}
    CsvField(std::string s) : text(std::move(s)) {}
};

struct CsvTable
{
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    CsvTable() = default;
    explicit CsvTable(std::vector<std::string> h) : header(std::move(h)) {}

    void add_row(std::initializer_list<CsvField> fields)
    {
        if (fields.size() != header.size())
            throw std::invalid_argument("CsvTable::add_row: field count does not match the header");
        std::vector<std::string> row;
        row.reserve(fields.size());
        for (const auto &f : fields)
            row.push_back(f.text);
        rows.push_back(std::move(row));
    }

    int column(const std::string &name) const
    {
        for (std::size_t i = 0; i < header.size(); ++i)
            if (header[i] == name)
                return int(i);
        throw std::out_of_range("CsvTable: no column '" + name + "'");
    }

    std::vector<double> numbers(const std::string &name) const
    {
        const auto c = std::size_t(column(name));
        std::vector<double> out;
        out.reserve(rows.size());
        for (const auto &r : rows)
        {
            std::istringstream in(r[c]);
            in.imbue(std::locale::classic());
            double v;
            if (r[c] == "nan")
                v = std::numeric_limits<double>::quiet_NaN();
            else if (r[c] == "inf")
                v = std::numeric_limits<double>::infinity();
            else if (r[c] == "-inf")
                v = -std::numeric_limits<double>::infinity();
            else if (!(in >> v))
                throw std::runtime_error("CsvTable: '" + r[c] + "' in column '" + name + "' is not a number");
            out.push_back(v);
        }
        return out;
    }
};

inline std::string to_csv_text(const CsvTable &t)
{
    std::string s;
    auto line = [&s](const std::vector<std::string> &cells) {
        for (std::size_t i = 0; i < cells.size(); ++i)
        {
            if (i)
                s += ',';
            s += cells[i];
        }
        s += '\n';
    };
    line(t.header);
    for (const auto &r : t.rows)
        line(r);
    return s;
}

inline void export_csv(const CsvTable &t, const std::string &path)
{
    std::ofstream f(path, std::ios::binary);
    if (!f)
        throw std::runtime_error("cannot write '" + path + "'");
    f << to_csv_text(t);
    if (!f)
        throw std::runtime_error("error while writing '" + path + "'");
}

inline CsvTable load_csv(const std::string &path)
{
    std::ifstream f(path, std::ios::binary);
    if (!f)
        throw std::runtime_error("cannot read '" + path + "'");
    auto split = [](const std::string &line) {
        std::vector<std::string> cells;
        std::string cell;
        std::istringstream in(line);
        while (std::getline(in, cell, ','))
            cells.push_back(cell);
        if (!line.empty() && line.back() == ',')
            cells.emplace_back();
        return cells;
    };
    CsvTable t;
    std::string line;
    if (std::getline(f, line))
        t.header = split(line);
    while (std::getline(f, line))
        if (!line.empty())
            t.rows.push_back(split(line));
    return t;
}

// ------------------------------------------------------------------------
// Radar artifacts
// ------------------------------------------------------------------------

inline CsvTable profile_table(const RangeProfile &p)
{
    CsvTable t({"bin", "range_m", "magnitude_db"});
    const RVec db = p.db();
    for (int m = 0; m < p.size(); ++m)
        t.add_row({m, p.meters(m), db(m)});
    return t;
}

inline CsvTable rdm_table(const RangeDopplerMap &map)
{
    CsvTable t({"range_bin", "doppler_bin", "magnitude_db"});
    const RMat db = map.db();
    for (Eigen::Index r = 0; r < db.rows(); ++r)
        for (Eigen::Index d = 0; d < db.cols(); ++d)
            t.add_row({long(r), long(d), db(r, d)});
    return t;
}

} // namespace islslp
