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

#include "csv.hpp"
#include "parallel.hpp"
#include "radar_sim.hpp"
#include "slot_design.hpp"

#include <json.hpp>
#include <openssl/evp.h>

#include <array>
#include <chrono>
#include <filesystem>
#include <iomanip>
#include <set>

namespace islslp
{

inline const std::vector<std::string> &experiment_names()
{
    static const std::vector<std::string> names = {"range_profile", "rdm", "isl_vs_gamma", "rmse_vs_gamma",
                                                   "convergence"};
    return names;
}

// System parameters plus the scenario and sweep settings of the experiments.
struct ExperimentConfig
{
    SystemConfig sys;

    std::vector<double> gamma_sweep_db{0, 2, 4, 6, 8, 10, 12};
    std::vector<int> users_sweep{3, 4};
    std::vector<double> rmse_gamma_db{3, 6, 9};
    int n_seeds = 10;       // channel realizations per sweep point
    int rmse_trials = 200;

    double strong_target_range_m = 20.0;
    double strong_target_rcs_dbsm = 20.0;
    double weak_target_range_m = 15.0;
    double weak_target_rcs_dbsm = 1.0;
    double weak_range_min_m = 20.0;
    double weak_range_max_m = 25.0;
    int guard_bins = 2;
    int rmse_guard_bins = 0;
    bool rmse_mask_guard = true;
};

namespace detail
{
inline bool parse_bool(const std::string &key, const std::string &v)
{
    if (v == "true" || v == "1")
        return true;
    if (v == "false" || v == "0")
        return false;
    throw ConfigError({key + ": expected true or false, got '" + v + "'"});
}

inline std::string join_numbers(const std::vector<double> &v)
{
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i)
        s += (i ? "," : "") + format_number(v[i]);
    return s;
}
} // namespace detail

inline bool apply_experiment_setting(ExperimentConfig &c, const std::string &key, const std::string &v)
{
    using detail::parse_double;
    using detail::parse_int;
    if (key == "gamma_sweep_db")
        c.gamma_sweep_db = detail::parse_list(key, v);
    else if (key == "users_sweep")
    {
        c.users_sweep.clear();
        for (double u : detail::parse_list(key, v))
        {
            if (u != std::floor(u))
                throw ConfigError({key + ": user counts must be integers"});
            c.users_sweep.push_back(int(u));
        }
    }
    else if (key == "rmse_gamma_db")
        c.rmse_gamma_db = detail::parse_list(key, v);
    else if (key == "n_seeds")
        c.n_seeds = parse_int<int>(key, v);
    else if (key == "rmse_trials")
        c.rmse_trials = parse_int<int>(key, v);
    else if (key == "strong_target_range_m")
        c.strong_target_range_m = parse_double(key, v);
    else if (key == "strong_target_rcs_dbsm")
        c.strong_target_rcs_dbsm = parse_double(key, v);
    else if (key == "weak_target_range_m")
        c.weak_target_range_m = parse_double(key, v);
    else if (key == "weak_target_rcs_dbsm")
        c.weak_target_rcs_dbsm = parse_double(key, v);
    else if (key == "weak_range_min_m")
        c.weak_range_min_m = parse_double(key, v);
    else if (key == "weak_range_max_m")
        c.weak_range_max_m = parse_double(key, v);
    else if (key == "guard_bins")
        c.guard_bins = parse_int<int>(key, v);
    else if (key == "rmse_guard_bins")
        c.rmse_guard_bins = parse_int<int>(key, v);
    else if (key == "rmse_mask_guard")
        c.rmse_mask_guard = detail::parse_bool(key, v);
    else
        return false;
    return true;
}

inline std::vector<std::string> experiment_config_errors(const ExperimentConfig &c)
{
    auto e = config_errors(c.sys);
    const double r_max = kSpeedOfLight / (2.0 * c.sys.subcarrier_spacing_hz);
    auto check_range = [&](const char *name, double r) {
        if (!(r > 0.0 && r < r_max))
            e.push_back(std::string(name) + " must lie in (0, c0 / (2 subcarrier_spacing_hz))");
    };
    if (c.gamma_sweep_db.empty()) e.emplace_back("gamma_sweep_db must not be empty");
    if (c.users_sweep.empty()) e.emplace_back("users_sweep must not be empty");
    for (int u : c.users_sweep)
        if (u < 1)
        {
            e.emplace_back("users_sweep entries must be positive");
            break;
        }
    if (c.rmse_gamma_db.empty()) e.emplace_back("rmse_gamma_db must not be empty");
    if (c.n_seeds < 1) e.emplace_back("n_seeds must be >= 1");
    if (c.rmse_trials < 1) e.emplace_back("rmse_trials must be >= 1");
    if (std::isfinite(r_max))
    {
        check_range("strong_target_range_m", c.strong_target_range_m);
        check_range("weak_target_range_m", c.weak_target_range_m);
        check_range("weak_range_min_m", c.weak_range_min_m);
        check_range("weak_range_max_m", c.weak_range_max_m);
    }
    if (!(c.weak_range_min_m <= c.weak_range_max_m)) e.emplace_back("weak_range_min_m must not exceed weak_range_max_m");
    if (c.guard_bins < 0) e.emplace_back("guard_bins must be >= 0");
    if (c.rmse_guard_bins < 0) e.emplace_back("rmse_guard_bins must be >= 0");
    return e;
}

// Builds the configuration seen by one experiment (plain keys overridden by "<experiment>.key").
inline ExperimentConfig load_experiment_config(const Settings &s, const std::string &experiment)
{
    ExperimentConfig c;
    std::vector<std::string> errors;
    for (const auto &[k, v] : s.resolved(experiment))
    {
        try
        {
            if (!apply_system_setting(c.sys, k, v) && !apply_experiment_setting(c, k, v))
                errors.push_back("unknown key '" + k + "'");
        }
        catch (const ConfigError &ce)
        {
            errors.insert(errors.end(), ce.errors().begin(), ce.errors().end());
        }
    }
    auto more = experiment_config_errors(c);
    errors.insert(errors.end(), more.begin(), more.end());
    if (!errors.empty())
        throw ConfigError(std::move(errors));
    return c;
}

inline std::string to_settings_text(const ExperimentConfig &c)
{
    std::ostringstream o;
    o.imbue(std::locale::classic());
    o.precision(17);
    o << to_settings_text(c.sys);
    o << "gamma_sweep_db = " << detail::join_numbers(c.gamma_sweep_db) << "\n";
    o << "users_sweep = ";
    for (std::size_t i = 0; i < c.users_sweep.size(); ++i)
        o << (i ? "," : "") << c.users_sweep[i];
    o << "\n"
      << "rmse_gamma_db = " << detail::join_numbers(c.rmse_gamma_db) << "\n"
      << "n_seeds = " << c.n_seeds << "\n"
      << "rmse_trials = " << c.rmse_trials << "\n"
      << "strong_target_range_m = " << c.strong_target_range_m << "\n"
      << "strong_target_rcs_dbsm = " << c.strong_target_rcs_dbsm << "\n"
      << "weak_target_range_m = " << c.weak_target_range_m << "\n"
      << "weak_target_rcs_dbsm = " << c.weak_target_rcs_dbsm << "\n"
      << "weak_range_min_m = " << c.weak_range_min_m << "\n"
      << "weak_range_max_m = " << c.weak_range_max_m << "\n"
      << "guard_bins = " << c.guard_bins << "\n"
      << "rmse_guard_bins = " << c.rmse_guard_bins << "\n"
      << "rmse_mask_guard = " << (c.rmse_mask_guard ? "true" : "false") << "\n";
    return o.str();
}

// Git blob identifier: SHA-1 of "blob <size>\0<content>".
inline std::string git_blob_hash(const std::string &content)
{
    const std::string data = "blob " + std::to_string(content.size()) + '\0' + content;
    std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), md.data(), &len, EVP_sha1(), nullptr) != 1)
        throw std::runtime_error("SHA-1 digest failed");
    std::ostringstream o;
    for (unsigned int i = 0; i < len; ++i)
        o << std::hex << std::setw(2) << std::setfill('0') << int(md[i]);
    return o.str();
}

// ------------------------------------------------------------------------

struct ExperimentOutput
{
    std::string experiment;
    std::uint64_t seed = 0;
    std::vector<std::pair<std::string, CsvTable>> files; // file name, content
    std::vector<std::string> summary;
    int infeasible_slots = 0;
    std::vector<std::pair<std::string, double>> timings_ms;
    nlohmann::ordered_json details = nlohmann::ordered_json::object();

    const CsvTable &file(const std::string &name) const
    {
        for (const auto &[n, t] : files)
            if (n == name)
                return t;
        throw std::out_of_range("no output file '" + name + "'");
    }
};

class UnknownExperiment : public std::invalid_argument
{
  public:
    using std::invalid_argument::invalid_argument;
};

namespace detail
{

class StageTimer
{
  public:
    explicit StageTimer(ExperimentOutput &out) : out_(out), t0_(clock::now()) {}
    void mark(const std::string &stage)
    {
        const auto now = clock::now();
        out_.timings_ms.emplace_back(stage, std::chrono::duration<double, std::milli>(now - t0_).count());
        t0_ = now;
    }

  private:
    using clock = std::chrono::steady_clock;
    ExperimentOutput &out_;
    clock::time_point t0_;
};

inline ValidatedConfig with_seed(ExperimentConfig c, std::uint64_t seed)
{
    c.sys.rng_seed = seed;
    return validate_config(c.sys);
}

struct DesignedFrames
{
    std::vector<WaveformFrame> frames;
    std::vector<double> isl_norm; // per feasible slot
    std::vector<double> isl_abs;
    std::vector<double> power;
    int infeasible = 0;
};

// Both waveforms of every slot of a realization, designed in parallel over (slot, waveform).
inline std::array<DesignedFrames, 2> design_both(const ValidatedConfig &vc, const Realization &r, const CVec &a)
{
    const int L = int(r.symbols.slots.size());
    std::vector<SlotDesign> d(std::size_t(2 * L));
    parallel_for(2 * L, [&](int i) {
        const auto kind = i % 2 == 0 ? WaveformKind::proposed : WaveformKind::comm_only;
        d[std::size_t(i)] = design_slot(vc, r.channel, r.symbols.slots[std::size_t(i / 2)], a, kind);
    });
    std::array<DesignedFrames, 2> out;
    for (int i = 0; i < 2 * L; ++i)
    {
        auto &o = out[std::size_t(i % 2)];
        auto &s = d[std::size_t(i)];
        if (!s.feasible)
        {
            ++o.infeasible;
            continue;
        }
        o.isl_norm.push_back(normalized_isl(s.x, a));
        o.isl_abs.push_back(isl_analytic(s.x, a));
        o.power.push_back(s.x.power());
        o.frames.push_back(std::move(s.x));
    }
    return out;
}

inline double mean(const std::vector<double> &v)
{
    if (v.empty())
        return std::numeric_limits<double>::quiet_NaN();
    double s = 0.0;
    for (double x : v)
        s += x;
    return s / double(v.size());
}

inline std::string fixed(double v, int digits = 2)
{
    std::ostringstream o;
    o.imbue(std::locale::classic());
    o << std::fixed << std::setprecision(digits) << v;
    return o.str();
}

constexpr std::array<WaveformKind, 2> kKinds = {WaveformKind::proposed, WaveformKind::comm_only};

// --- range_profile ------------------------------------------------------

inline ExperimentOutput run_range_profile(const ExperimentConfig &ec, std::uint64_t seed)
{
    ExperimentOutput out;
    StageTimer timer(out);
    const auto vc = with_seed(ec, seed);
    const CVec a = radar_steering(vc);
    const auto real = draw_realization(vc, seed, 0, vc.cfg.n_symbols);
    timer.mark("draw");
    const auto designs = design_both(vc, real, a);
    timer.mark("design");

    const Target target{ec.strong_target_range_m, vc.target_angle_rad(), ec.strong_target_rcs_dbsm};
    const double sigma_r2 = radar_noise_power(vc);
    CsvTable prof({"bin", "range_m", "proposed_db", "comm_only_db"});
    CsvTable summ({"waveform", "psl_db", "isl_norm_db", "isl_abs", "mean_power_w", "feasible_slots",
                   "infeasible_slots"});
    std::array<RVec, 2> db;
    for (std::size_t w = 0; w < 2; ++w)
    {
        const auto &d = designs[w];
        out.infeasible_slots += d.infeasible;
        double psl = std::numeric_limits<double>::quiet_NaN();
        if (!d.frames.empty())
        {
            auto rn = make_rng(seed, streams::kRadarNoise, 0);
            const auto echo = synthesize_echo(d.frames, {target}, vc, sigma_r2, &rn);
            db[w] = pmf_cc_range_profile(echo, d.frames, a, vc.range_bin_m).db();
            psl = peak_sidelobe_db(autocorrelation_profile(d.frames, a));
        }
        summ.add_row({to_string(kKinds[w]), psl, linear_to_db(mean(d.isl_norm)), mean(d.isl_abs), mean(d.power),
                      int(d.frames.size()), d.infeasible});
        out.summary.push_back(std::string(to_string(kKinds[w])) + ": PSL " + fixed(psl) + " dB, ISL " +
                              fixed(linear_to_db(mean(d.isl_norm))) + " dB (normalized), " +
                              std::to_string(d.infeasible) + " infeasible slots");
    }
    if (db[0].size() > 0 && db[1].size() > 0)
        for (Eigen::Index m = 0; m < db[0].size(); ++m)
            prof.add_row({long(m), double(m) * vc.range_bin_m, db[0](m), db[1](m)});
    timer.mark("radar");
    out.files.emplace_back("range_profile.csv", std::move(prof));
    out.files.emplace_back("range_profile_summary.csv", std::move(summ));
    return out;
}

// --- rdm ----------------------------------------------------------------

inline ExperimentOutput run_rdm(const ExperimentConfig &ec, std::uint64_t seed)
{
    ExperimentOutput out;
    StageTimer timer(out);
    const auto vc = with_seed(ec, seed);
    const CVec a = radar_steering(vc);
    const auto real = draw_realization(vc, seed, 0, vc.cfg.n_symbols);
    timer.mark("draw");
    const auto designs = design_both(vc, real, a);
    timer.mark("design");

    const Target strong{ec.strong_target_range_m, vc.target_angle_rad(), ec.strong_target_rcs_dbsm};
    const Target weak{ec.weak_target_range_m, vc.target_angle_rad(), ec.weak_target_rcs_dbsm};
    const double sigma_r2 = radar_noise_power(vc);
    CsvTable summ({"waveform", "strong_bin", "weak_bin", "weak_margin_db", "feasible_slots", "infeasible_slots"});
    for (std::size_t w = 0; w < 2; ++w)
    {
        const auto &d = designs[w];
        const std::string name = to_string(kKinds[w]);
        out.infeasible_slots += d.infeasible;
        if (d.frames.empty())
        {
            summ.add_row({name, -1, -1, std::numeric_limits<double>::quiet_NaN(), 0, d.infeasible});
            continue;
        }
        auto rn = make_rng(seed, streams::kRadarNoise, 0);
        const auto echo = synthesize_echo(d.frames, {strong, weak}, vc, sigma_r2, &rn);
        out.files.emplace_back("rdm_" + name + ".csv", rdm_table(range_doppler_map(echo, d.frames, a, vc.range_bin_m)));
        const auto prof = pmf_cc_range_profile(echo, d.frames, a, vc.range_bin_m);
        int sb = -1, wb = -1;
        try
        {
            const auto det = detect_two_targets(prof, {ec.guard_bins, false});
            sb = det.strong;
            wb = det.weak;
        }
        catch (const DetectionError &)
        {
        }
        const double margin = weak_target_margin_db(d.frames, a, vc, strong, weak);
        summ.add_row({name, sb, wb, margin, int(d.frames.size()), d.infeasible});
        out.summary.push_back(name + ": strong bin " + std::to_string(sb) + ", weak bin " + std::to_string(wb) +
                              ", weak-target margin " + fixed(margin) + " dB");
    }
    timer.mark("radar");
    out.files.emplace_back("rdm_summary.csv", std::move(summ));
    return out;
}

// --- isl_vs_gamma -------------------------------------------------------

inline ExperimentOutput run_isl_vs_gamma(const ExperimentConfig &ec, std::uint64_t seed)
{
    ExperimentOutput out;
    StageTimer timer(out);
    const int U = int(ec.users_sweep.size());
    const int G = int(ec.gamma_sweep_db.size());
    const int S = ec.n_seeds;
    const int L = ec.sys.n_symbols;

    // Realizations depend on (K, seed index) only, so every threshold sees the same channels and symbols.
    std::vector<Realization> reals(std::size_t(U * S));
    for (int u = 0; u < U; ++u)
    {
        auto c = ec;
        c.sys.n_users = ec.users_sweep[std::size_t(u)];
        const auto vc = with_seed(c, seed);
        for (int s = 0; s < S; ++s)
            reals[std::size_t(u * S + s)] = draw_realization(vc, seed, std::uint64_t(s), L);
    }
    timer.mark("draw");

    struct Cell
    {
        bool feasible = false;
        std::array<double, 2> norm{}, abs{};
    };
    const int tasks = U * G * S * L;
    std::vector<Cell> cells(static_cast<std::size_t>(tasks));
    parallel_for(tasks, [&](int i) {
        const int l = i % L, s = (i / L) % S, g = (i / (L * S)) % G, u = i / (L * S * G);
        auto c = ec;
        c.sys.n_users = ec.users_sweep[std::size_t(u)];
        c.sys.snr_threshold_db = ec.gamma_sweep_db[std::size_t(g)];
        c.sys.snr_thresholds_db.clear();
        const auto vc = with_seed(c, seed);
        const CVec a = radar_steering(vc);
        const auto &r = reals[std::size_t(u * S + s)];
        auto &cell = cells[std::size_t(i)];
        for (std::size_t w = 0; w < 2; ++w)
        {
            const auto d = design_slot(vc, r.channel, r.symbols.slots[std::size_t(l)], a, kKinds[w]);
            if (!d.feasible)
                return;
            cell.norm[w] = normalized_isl(d.x, a);
            cell.abs[w] = isl_analytic(d.x, a);
        }
        cell.feasible = true;
    });
    timer.mark("design");

    CsvTable t({"n_users", "gamma_db", "proposed_isl_db", "comm_only_isl_db", "relative_db", "proposed_isl_abs",
                "comm_only_isl_abs", "feasible_slots", "infeasible_slots"});
    for (int u = 0; u < U; ++u)
        for (int g = 0; g < G; ++g)
        {
            std::array<std::vector<double>, 2> norm, abs;
            int infeasible = 0;
            for (int s = 0; s < S; ++s)
                for (int l = 0; l < L; ++l)
                {
                    const auto &cell = cells[std::size_t(((u * G + g) * S + s) * L + l)];
                    if (!cell.feasible)
                    {
                        ++infeasible;
                        continue;
                    }
                    for (std::size_t w = 0; w < 2; ++w)
                    {
                        norm[w].push_back(cell.norm[w]);
                        abs[w].push_back(cell.abs[w]);
                    }
                }
            out.infeasible_slots += infeasible;
            const double p = linear_to_db(mean(norm[0])), q = linear_to_db(mean(norm[1]));
            t.add_row({ec.users_sweep[std::size_t(u)], ec.gamma_sweep_db[std::size_t(g)], p, q, p - q, mean(abs[0]),
                       mean(abs[1]), int(norm[0].size()), infeasible});
            out.summary.push_back("K=" + std::to_string(ec.users_sweep[std::size_t(u)]) +
                                  " Gamma=" + format_number(ec.gamma_sweep_db[std::size_t(g)]) + " dB: proposed " +
                                  fixed(p) + " dB, comm-only " + fixed(q) + " dB, infeasible " +
                                  std::to_string(infeasible));
        }
    out.files.emplace_back("isl_vs_gamma.csv", std::move(t));
    return out;
}

// --- rmse_vs_gamma ------------------------------------------------------

inline ExperimentOutput run_rmse_vs_gamma(const ExperimentConfig &ec, std::uint64_t seed)
{
    ExperimentOutput out;
    StageTimer timer(out);
    CsvTable t({"gamma_db", "proposed_rmse_m", "comm_only_rmse_m", "trials", "proposed_used", "comm_only_used",
                "proposed_detection_failures", "comm_only_detection_failures"});
    for (double g : ec.rmse_gamma_db)
    {
        auto c = ec;
        c.sys.snr_threshold_db = g;
        c.sys.snr_thresholds_db.clear();
        const auto vc = with_seed(c, seed);
        RmseScenario sc;
        sc.strong = {ec.strong_target_range_m, vc.target_angle_rad(), ec.strong_target_rcs_dbsm};
        sc.weak_rcs_dbsm = ec.weak_target_rcs_dbsm;
        sc.weak_min_m = ec.weak_range_min_m;
        sc.weak_max_m = ec.weak_range_max_m;
        sc.n_symbols = vc.cfg.n_symbols;
        sc.detect = {ec.rmse_guard_bins, ec.rmse_mask_guard};
        std::array<RmseResult, 2> r;
        for (std::size_t w = 0; w < 2; ++w)
            r[w] = monte_carlo_rmse(vc, sc, slot_design_source(kKinds[w]), ec.rmse_trials, seed);
        out.infeasible_slots += r[0].infeasible; // a trial is infeasible for both waveforms alike
        t.add_row({g, r[0].rmse_m, r[1].rmse_m, ec.rmse_trials, r[0].used, r[1].used, r[0].detection_failures,
                   r[1].detection_failures});
        out.summary.push_back("Gamma=" + format_number(g) + " dB: RMSE proposed " + fixed(r[0].rmse_m, 3) +
                              " m, comm-only " + fixed(r[1].rmse_m, 3) + " m (" + std::to_string(r[0].used) + "/" +
                              std::to_string(ec.rmse_trials) + " trials)");
        timer.mark("gamma_" + format_number(g));
    }
    out.files.emplace_back("rmse_vs_gamma.csv", std::move(t));
    return out;
}

// --- convergence --------------------------------------------------------

inline ExperimentOutput run_convergence(const ExperimentConfig &ec, std::uint64_t seed)
{
    ExperimentOutput out;
    StageTimer timer(out);
    const auto vc = with_seed(ec, seed);
    const CVec a = radar_steering(vc);
    const auto real = draw_realization(vc, seed, 0, 1);
    const auto d = design_slot(vc, real.channel, real.symbols.slots.front(), a, WaveformKind::proposed);
    timer.mark("design");

    CsvTable t({"symbol_index", "iter", "isl", "delta", "subsolver_status"});
    if (!d.feasible)
    {
        out.infeasible_slots = 1;
        out.summary.push_back("infeasible: " + d.reason);
    }
    else
    {
        for (const auto &r : d.mm.trace)
            t.add_row({0, r.iter, r.isl, r.delta, r.subsolver_status});
        out.details["converged"] = d.mm.converged;
        out.details["iterations"] = int(d.mm.trace.size()) - 1;
        out.details["descent_violations"] = d.mm.descent_violations;
        out.details["final_isl"] = d.mm.isl;
        out.details["iteration_millis"] = d.mm.trace.empty() ? 0.0 : d.mm.trace.back().millis;
        out.summary.push_back(std::string(d.mm.converged ? "converged" : "stopped") + " after " +
                              std::to_string(d.mm.trace.size() - 1) + " iterations, ISL " +
                              format_number(d.mm.trace.front().isl) + " -> " + format_number(d.mm.isl));
    }
    out.files.emplace_back("convergence.csv", std::move(t));
    return out;
}

} // namespace detail

inline ExperimentOutput run_experiment(const std::string &name, const ExperimentConfig &cfg, std::uint64_t seed)
{
    if (auto e = experiment_config_errors(cfg); !e.empty())
        throw ConfigError(std::move(e));
    ExperimentOutput out;
    if (name == "range_profile")
        out = detail::run_range_profile(cfg, seed);
    else if (name == "rdm")
        out = detail::run_rdm(cfg, seed);
    else if (name == "isl_vs_gamma")
        out = detail::run_isl_vs_gamma(cfg, seed);
    else if (name == "rmse_vs_gamma")
        out = detail::run_rmse_vs_gamma(cfg, seed);
    else if (name == "convergence")
        out = detail::run_convergence(cfg, seed);
    else
        throw UnknownExperiment("unknown experiment '" + name + "'");
    out.experiment = name;
    out.seed = seed;
    return out;
}

// Writes the CSV files, the resolved configuration and manifest.json into dir.
inline void write_outputs(const ExperimentOutput &out, const ExperimentConfig &cfg, const std::string &dir)
{
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec)
        throw std::runtime_error("cannot create output directory '" + dir + "': " + ec.message());

    const std::string cfg_text = to_settings_text(cfg);
    {
        std::ofstream f(fs::path(dir) / "config.resolved.cfg", std::ios::binary);
        if (!f)
            throw std::runtime_error("cannot write into '" + dir + "'");
        f << cfg_text;
    }
    nlohmann::ordered_json files = nlohmann::ordered_json::array();
    for (const auto &[name, table] : out.files)
    {
        export_csv(table, (fs::path(dir) / name).string());
        nlohmann::ordered_json entry;
        entry["name"] = name;
        entry["sha1"] = git_blob_hash(to_csv_text(table));
        files.push_back(entry);
    }

    nlohmann::ordered_json m;
    m["tool"] = "isl-slp";
    m["experiment"] = out.experiment;
    m["seed"] = out.seed;
    m["input_hash"] = git_blob_hash(cfg_text + "seed = " + std::to_string(out.seed) + "\n");
    nlohmann::ordered_json c = nlohmann::ordered_json::object();
    const auto parsed = Settings::parse(cfg_text);
    for (const auto &[k, v] : parsed.raw())
        c[k] = v;
    m["config"] = c;
    m["rerun"] = "isl-slp " + out.experiment + " --config config.resolved.cfg --seed " + std::to_string(out.seed);
    m["baseline_power"] = "minimum transmit power (not rescaled to P0)";
    m["isl_normalization"] = "isl_norm = sum_{m != 0} |r[m]|^2 / |r[0]|^2";
    m["infeasible_slots"] = out.infeasible_slots;
    m["outputs"] = files;
    nlohmann::ordered_json t = nlohmann::ordered_json::object();
    for (const auto &[stage, ms] : out.timings_ms)
        t[stage] = ms;
    m["timings_ms"] = t;
    m["threads"] = worker_count();
    if (!out.details.empty())
        m["details"] = out.details;
    std::ofstream f(fs::path(dir) / "manifest.json", std::ios::binary);
    if (!f)
        throw std::runtime_error("cannot write manifest into '" + dir + "'");
    f << m.dump(2) << "\n";
}

} // namespace islslp
