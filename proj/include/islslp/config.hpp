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

#include "types.hpp"

#include <charconv>
#include <cstdint>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace islslp
{

// Physical and algorithmic scalars. dB-valued fields are converted once in validate_config.
struct SystemConfig
{
    int n_subcarriers = 64;
    int n_tx = 8;
    int n_users = 3;
    int psk_order = 4;
    double subcarrier_spacing_hz = 937.5e3;
    double carrier_freq_hz = 5.9e9;
    double power_budget = 0.5;      // P0 [W] per OFDM symbol
    double noise_power_dbm = 10.0;  // sigma^2 of the communication receivers
    double snr_threshold_db = 6.0;  // Gamma, identical for all (n, k) unless the list below is set
    std::vector<double> snr_thresholds_db; // optional per-(n, k) values, row-major n * K + k
    int cp_len = 16;
    int n_symbols = 50;
    double conv_threshold = 1e-5;
    int max_iters = 500;
    double antenna_spacing_wavelengths = 0.5;
    std::uint64_t rng_seed = 1;

    // Channel model
    int n_taps = 4;
    double tap_decay_db = 3.0;
    double channel_gain_db = 17.0; // average total power of each user-antenna tap sequence

    // Radar scenario
    double target_angle_deg = 0.0;
    double radar_noise_power = 0.0; // <= 0 selects the calibrated default
    double radar_ref_snr_db = 10.0;
    double ref_target_range_m = 20.0;
    double ref_target_rcs_dbsm = 20.0;
};

class ConfigError : public std::runtime_error
{
  public:
    explicit ConfigError(std::vector<std::string> errors)
        : std::runtime_error(join(errors)), errors_(std::move(errors)) {}

    const std::vector<std::string> &errors() const { return errors_; }

  private:
    static std::string join(const std::vector<std::string> &e)
    {
        std::string out = "invalid configuration:";
        for (const auto &s : e)
            out += "\n  - " + s;
        return out;
    }
    std::vector<std::string> errors_;
};

// A configuration that passed validation, plus the quantities derived from it.
struct ValidatedConfig
{
    SystemConfig cfg;
    double phi = 0.0;              // pi / Omega
    double symbol_duration = 0.0;  // T_s = 1 / delta_f
    double sample_period = 0.0;    // T_c = T_s / N
    double wavelength = 0.0;       // c0 / f_c
    double noise_power = 0.0;      // sigma^2 [W]
    double range_bin_m = 0.0;      // c0 / (2 N delta_f)
    double max_unambiguous_range_m = 0.0;
    RMat snr_threshold;            // Gamma_{n,k}, linear, N x K

    int N() const { return cfg.n_subcarriers; }
    int Nt() const { return cfg.n_tx; }
    int K() const { return cfg.n_users; }
    double sigma() const { return std::sqrt(noise_power); }
    double target_angle_rad() const { return cfg.target_angle_deg * kPi / 180.0; }
};

inline std::vector<std::string> config_errors(const SystemConfig &c)
{
    std::vector<std::string> e;
    if (c.n_subcarriers <= 0) e.emplace_back("n_subcarriers must be positive");
    if (c.n_tx <= 0) e.emplace_back("n_tx must be positive");
    if (c.n_users <= 0) e.emplace_back("n_users must be positive");
    if (c.psk_order < 2) e.emplace_back("psk_order must be >= 2");
    else if (c.psk_order % 2 != 0) e.emplace_back("psk_order must be even");
    if (!(c.subcarrier_spacing_hz > 0.0)) e.emplace_back("subcarrier_spacing_hz must be positive");
    if (!(c.carrier_freq_hz > 0.0)) e.emplace_back("carrier_freq_hz must be positive");
    if (!(c.power_budget > 0.0)) e.emplace_back("power_budget must be positive");
    if (!std::isfinite(c.noise_power_dbm)) e.emplace_back("noise_power_dbm must be finite");
    if (!std::isfinite(c.snr_threshold_db)) e.emplace_back("snr_threshold_db must be finite");
    if (!c.snr_thresholds_db.empty())
    {
        if (c.n_subcarriers > 0 && c.n_users > 0 &&
            c.snr_thresholds_db.size() != std::size_t(c.n_subcarriers) * std::size_t(c.n_users))
            e.emplace_back("snr_thresholds_db must hold n_subcarriers * n_users values");
        for (double g : c.snr_thresholds_db)
            if (!std::isfinite(g))
            {
                e.emplace_back("snr_thresholds_db entries must be finite");
                break;
            }
    }
    if (c.cp_len < 0) e.emplace_back("cp_len must be >= 0");
    if (c.cp_len > c.n_subcarriers) e.emplace_back("cp_len must not exceed n_subcarriers");
    if (c.n_symbols <= 0) e.emplace_back("n_symbols must be positive");
    if (!(c.conv_threshold > 0.0)) e.emplace_back("conv_threshold must be positive");
    if (c.max_iters <= 0) e.emplace_back("max_iters must be positive");
    if (!(c.antenna_spacing_wavelengths > 0.0)) e.emplace_back("antenna_spacing_wavelengths must be positive");
    if (c.n_taps < 1) e.emplace_back("n_taps must be >= 1");
    else if (c.cp_len >= 0 && c.n_taps > c.cp_len + 1) e.emplace_back("n_taps must not exceed cp_len + 1");
    if (!(c.tap_decay_db >= 0.0)) e.emplace_back("tap_decay_db must be >= 0");
    if (!std::isfinite(c.channel_gain_db)) e.emplace_back("channel_gain_db must be finite");
    if (!std::isfinite(c.target_angle_deg)) e.emplace_back("target_angle_deg must be finite");
    if (!std::isfinite(c.radar_noise_power)) e.emplace_back("radar_noise_power must be finite");
    if (!(c.ref_target_range_m > 0.0)) e.emplace_back("ref_target_range_m must be positive");
    return e;
}

inline ValidatedConfig validate_config(const SystemConfig &c)
{
    if (auto e = config_errors(c); !e.empty())
        throw ConfigError(std::move(e));

    ValidatedConfig v;
    v.cfg = c;
    v.phi = kPi / c.psk_order;
    v.symbol_duration = 1.0 / c.subcarrier_spacing_hz;
    v.sample_period = v.symbol_duration / c.n_subcarriers;
    v.wavelength = kSpeedOfLight / c.carrier_freq_hz;
    v.noise_power = dbm_to_watts(c.noise_power_dbm);
    v.range_bin_m = kSpeedOfLight / (2.0 * c.n_subcarriers * c.subcarrier_spacing_hz);
    v.max_unambiguous_range_m = kSpeedOfLight / (2.0 * c.subcarrier_spacing_hz);
    v.snr_threshold.resize(c.n_subcarriers, c.n_users);
    for (int n = 0; n < c.n_subcarriers; ++n)
        for (int k = 0; k < c.n_users; ++k)
            v.snr_threshold(n, k) = db_to_linear(
                c.snr_thresholds_db.empty() ? c.snr_threshold_db
                                            : c.snr_thresholds_db[std::size_t(n) * c.n_users + k]);
    return v;
}

// ------------------------------------------------------------------------
// Flat "key = value" settings with dotted per-experiment overrides.
// ------------------------------------------------------------------------

class Settings
{
  public:
    static Settings parse(std::string_view text)
    {
        Settings s;
        std::istringstream in{std::string(text)};
        std::string line;
        int lineno = 0;
        while (std::getline(in, line))
        {
            ++lineno;
            if (auto pos = line.find('#'); pos != std::string::npos)
                line.erase(pos);
            auto t = trim(line);
            if (t.empty())
                continue;
            auto eq = t.find('=');
            if (eq == std::string::npos)
                throw ConfigError({"line " + std::to_string(lineno) + ": expected key = value"});
            auto key = trim(t.substr(0, eq));
            auto val = trim(t.substr(eq + 1));
            if (key.empty())
                throw ConfigError({"line " + std::to_string(lineno) + ": empty key"});
            s.set(std::string(key), std::string(val));
        }
        return s;
    }

    static Settings load(const std::string &path)
    {
        std::ifstream f(path);
        if (!f)
            throw ConfigError({"cannot open config file '" + path + "'"});
        std::stringstream ss;
        ss << f.rdbuf();
        return parse(ss.str());
    }

    void set(const std::string &key, const std::string &value) { values_[key] = value; }

    // Adds "key=value" (command-line override syntax).
    void set_assignment(const std::string &kv)
    {
        auto eq = kv.find('=');
        if (eq == std::string::npos)
            throw ConfigError({"override '" + kv + "' is not of the form key=value"});
        set(std::string(trim(kv.substr(0, eq))), std::string(trim(kv.substr(eq + 1))));
    }

    // Keys visible to a given experiment: plain keys, overridden by "<experiment>.key".
    std::map<std::string, std::string> resolved(const std::string &experiment) const
    {
        std::map<std::string, std::string> out;
        for (const auto &[k, v] : values_)
            if (k.find('.') == std::string::npos)
                out[k] = v;
        if (!experiment.empty())
        {
            const auto prefix = experiment + ".";
            for (const auto &[k, v] : values_)
                if (k.rfind(prefix, 0) == 0)
                    out[k.substr(prefix.size())] = v;
        }
        return out;
    }

    const std::map<std::string, std::string> &raw() const { return values_; }

  private:
    static std::string_view trim(std::string_view s)
    {
        const char *ws = " \t\r\n";
        auto b = s.find_first_not_of(ws);
        if (b == std::string_view::npos)
            return {};
        auto e = s.find_last_not_of(ws);
        return s.substr(b, e - b + 1);
    }

    std::map<std::string, std::string> values_;
};

namespace detail
{
inline double parse_double(const std::string &key, const std::string &v)
{
    try
    {
        std::size_t pos = 0;
        double d = std::stod(v, &pos);
        if (pos != v.size())
            throw std::invalid_argument(v);
        return d;
    }
    catch (const std::exception &)
    {
        throw ConfigError({key + ": cannot parse '" + v + "' as a number"});
    }
}

template <class Int>
Int parse_int(const std::string &key, const std::string &v)
{
    Int out{};
    auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || p != v.data() + v.size())
        throw ConfigError({key + ": cannot parse '" + v + "' as an integer"});
    return out;
}

inline std::vector<double> parse_list(const std::string &key, const std::string &v)
{
    std::vector<double> out;
    std::string item;
    std::istringstream in(v);
    while (std::getline(in, item, ','))
    {
        auto b = item.find_first_not_of(" \t");
        auto e = item.find_last_not_of(" \t");
        if (b == std::string::npos)
            continue;
        out.push_back(parse_double(key, item.substr(b, e - b + 1)));
    }
    return out;
}
} // namespace detail

// Applies one setting to a SystemConfig; returns false when the key is not a SystemConfig field.
inline bool apply_system_setting(SystemConfig &c, const std::string &key, const std::string &v)
{
    using detail::parse_double;
    using detail::parse_int;
    static const std::map<std::string, std::function<void(SystemConfig &, const std::string &, const std::string &)>>
        setters = {
            {"n_subcarriers", [](auto &c, auto &k, auto &v) { c.n_subcarriers = parse_int<int>(k, v); }},
            {"n_tx", [](auto &c, auto &k, auto &v) { c.n_tx = parse_int<int>(k, v); }},
            {"n_users", [](auto &c, auto &k, auto &v) { c.n_users = parse_int<int>(k, v); }},
            {"psk_order", [](auto &c, auto &k, auto &v) { c.psk_order = parse_int<int>(k, v); }},
            {"subcarrier_spacing_hz", [](auto &c, auto &k, auto &v) { c.subcarrier_spacing_hz = parse_double(k, v); }},
            {"carrier_freq_hz", [](auto &c, auto &k, auto &v) { c.carrier_freq_hz = parse_double(k, v); }},
            {"power_budget", [](auto &c, auto &k, auto &v) { c.power_budget = parse_double(k, v); }},
            {"noise_power_dbm", [](auto &c, auto &k, auto &v) { c.noise_power_dbm = parse_double(k, v); }},
            {"snr_threshold_db", [](auto &c, auto &k, auto &v) { c.snr_threshold_db = parse_double(k, v); }},
            {"snr_thresholds_db", [](auto &c, auto &k, auto &v) { c.snr_thresholds_db = detail::parse_list(k, v); }},
            {"cp_len", [](auto &c, auto &k, auto &v) { c.cp_len = parse_int<int>(k, v); }},
            {"n_symbols", [](auto &c, auto &k, auto &v) { c.n_symbols = parse_int<int>(k, v); }},
            {"conv_threshold", [](auto &c, auto &k, auto &v) { c.conv_threshold = parse_double(k, v); }},
            {"max_iters", [](auto &c, auto &k, auto &v) { c.max_iters = parse_int<int>(k, v); }},
            {"antenna_spacing_wavelengths",
             [](auto &c, auto &k, auto &v) { c.antenna_spacing_wavelengths = parse_double(k, v); }},
            {"rng_seed", [](auto &c, auto &k, auto &v) { c.rng_seed = parse_int<std::uint64_t>(k, v); }},
            {"n_taps", [](auto &c, auto &k, auto &v) { c.n_taps = parse_int<int>(k, v); }},
            {"tap_decay_db", [](auto &c, auto &k, auto &v) { c.tap_decay_db = parse_double(k, v); }},
            {"channel_gain_db", [](auto &c, auto &k, auto &v) { c.channel_gain_db = parse_double(k, v); }},
            {"target_angle_deg", [](auto &c, auto &k, auto &v) { c.target_angle_deg = parse_double(k, v); }},
            {"radar_noise_power", [](auto &c, auto &k, auto &v) { c.radar_noise_power = parse_double(k, v); }},
            {"radar_ref_snr_db", [](auto &c, auto &k, auto &v) { c.radar_ref_snr_db = parse_double(k, v); }},
            {"ref_target_range_m", [](auto &c, auto &k, auto &v) { c.ref_target_range_m = parse_double(k, v); }},
            {"ref_target_rcs_dbsm", [](auto &c, auto &k, auto &v) { c.ref_target_rcs_dbsm = parse_double(k, v); }},
        };
    auto it = setters.find(key);
    if (it == setters.end())
        return false;
    it->second(c, key, v);
    return true;
}

// Serializes every SystemConfig field as "key = value" lines (stable order, round-trips through Settings).
inline std::string to_settings_text(const SystemConfig &c)
{
    std::ostringstream o;
    o.precision(17);
    o << "n_subcarriers = " << c.n_subcarriers << "\n"
      << "n_tx = " << c.n_tx << "\n"
      << "n_users = " << c.n_users << "\n"
      << "psk_order = " << c.psk_order << "\n"
      << "subcarrier_spacing_hz = " << c.subcarrier_spacing_hz << "\n"
      << "carrier_freq_hz = " << c.carrier_freq_hz << "\n"
      << "power_budget = " << c.power_budget << "\n"
      << "noise_power_dbm = " << c.noise_power_dbm << "\n"
      << "snr_threshold_db = " << c.snr_threshold_db << "\n";
    if (!c.snr_thresholds_db.empty())
    {
        o << "snr_thresholds_db = ";
        for (std::size_t i = 0; i < c.snr_thresholds_db.size(); ++i)
            o << (i ? "," : "") << c.snr_thresholds_db[i];
        o << "\n";
    }
    o << "cp_len = " << c.cp_len << "\n"
      << "n_symbols = " << c.n_symbols << "\n"
      << "conv_threshold = " << c.conv_threshold << "\n"
      << "max_iters = " << c.max_iters << "\n"
      << "antenna_spacing_wavelengths = " << c.antenna_spacing_wavelengths << "\n"
      << "rng_seed = " << c.rng_seed << "\n"
      << "n_taps = " << c.n_taps << "\n"
      << "tap_decay_db = " << c.tap_decay_db << "\n"
      << "channel_gain_db = " << c.channel_gain_db << "\n"
      << "target_angle_deg = " << c.target_angle_deg << "\n"
      << "radar_noise_power = " << c.radar_noise_power << "\n"
      << "radar_ref_snr_db = " << c.radar_ref_snr_db << "\n"
      << "ref_target_range_m = " << c.ref_target_range_m << "\n"
      << "ref_target_rcs_dbsm = " << c.ref_target_rcs_dbsm << "\n";
    return o.str();
}

} // namespace islslp
