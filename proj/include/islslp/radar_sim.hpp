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

#include "config.hpp"
#include "fft.hpp"
#include "parallel.hpp"
#include "radar_metrics.hpp"
#include "rng.hpp"
#include "slot_design.hpp"

#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <vector>

namespace islslp
{

struct Target
{
    double range_m = 0.0;
    double angle_rad = 0.0;
    double rcs_dbsm = 0.0;
};

// Radar-equation amplitude beta = sqrt(sigma_RCS lambda^2 / ((4 pi)^3 R^4)).
inline double attenuation(double rcs_dbsm, double range_m, double wavelength)
{
    const double rcs = db_to_linear(rcs_dbsm);
    return std::sqrt(rcs * wavelength * wavelength / (std::pow(4.0 * kPi, 3) * std::pow(range_m, 4)));
}

inline double round_trip_delay(double range_m) { return 2.0 * range_m / kSpeedOfLight; }

// sigma_r^2: configured value, or calibrated so that the reference target gives the reference
// per-sample SNR with a per-subcarrier transmit power of P0 / N.
inline double radar_noise_power(const ValidatedConfig &vc)
{
    const auto &c = vc.cfg;
    if (c.radar_noise_power > 0.0)
        return c.radar_noise_power;
    const double beta = attenuation(c.ref_target_rcs_dbsm, c.ref_target_range_m, vc.wavelength);
    return beta * beta * (c.power_budget / c.n_subcarriers) / db_to_linear(c.radar_ref_snr_db);
}

// y[l](n): received sample of subcarrier n in symbol l.
struct RadarEcho
{
    std::vector<CVec> y;
};

inline RadarEcho synthesize_echo(const std::vector<WaveformFrame> &frames, const std::vector<Target> &targets,
                                 const ValidatedConfig &vc, double noise_power, Rng *rng)
{
    const int N = vc.N();
    for (const auto &t : targets)
        if (!(t.range_m > 0.0 && t.range_m < vc.max_unambiguous_range_m))
            throw std::invalid_argument("synthesize_echo: target range outside (0, c0 / (2 delta_f))");
    if (noise_power > 0.0 && rng == nullptr)
        throw std::invalid_argument("synthesize_echo: noise requested without a generator");

    struct Path
    {
        cd gain;
        double ramp;
        CVec a;
    };
    std::vector<Path> paths;
    for (const auto &t : targets)
    {
        const double tau = round_trip_delay(t.range_m);
        paths.push_back({attenuation(t.rcs_dbsm, t.range_m, vc.wavelength) *
                             std::polar(1.0, -2.0 * kPi * vc.cfg.carrier_freq_hz * tau),
                         -2.0 * kPi * vc.cfg.subcarrier_spacing_hz * tau,
                         steering_vector(t.angle_rad, vc.Nt(), vc.cfg.antenna_spacing_wavelengths)});
    }

    RadarEcho e;
    e.y.reserve(frames.size());
    for (const auto &f : frames)
    {
        if (f.n_subcarriers != N || f.n_tx != vc.Nt())
            throw std::invalid_argument("synthesize_echo: frame dimensions do not match the configuration");
        CVec y = CVec::Zero(N);
        for (const auto &p : paths)
            for (int n = 0; n < N; ++n)
                y(n) += p.gain * p.a.dot(f.block(n)) * std::polar(1.0, p.ramp * n);
        if (noise_power > 0.0)
            for (int n = 0; n < N; ++n)
                y(n) += complex_gaussian(*rng, noise_power);
        e.y.push_back(std::move(y));
    }
    return e;
}

// d_n[l] = y_n[l] conj(a^H x_n[l])
inline std::vector<CVec> matched_spectra(const RadarEcho &echo, const std::vector<WaveformFrame> &frames,
                                         const CVec &a)
{
    if (echo.y.size() != frames.size())
        throw std::invalid_argument("matched_spectra: symbol count mismatch");
    std::vector<CVec> d;
    d.reserve(frames.size());
    for (std::size_t l = 0; l < frames.size(); ++l)
    {
        const CVec c = beam_spectrum(frames[l], a);
        if (c.size() != echo.y[l].size())
            throw std::invalid_argument("matched_spectra: subcarrier count mismatch");
        d.push_back(echo.y[l].cwiseProduct(c.conjugate()));
    }
    return d;
}

namespace detail
{
inline CVec idft(const CVec &d)
{
    std::vector<cd> in(d.data(), d.data() + d.size()), out;
    detail::fft_inverse(out, in);
    return Eigen::Map<const CVec>(out.data(), Eigen::Index(out.size()));
}

inline CVec dft(const CVec &d)
{
    std::vector<cd> in(d.data(), d.data() + d.size()), out;
    detail::fft_forward(out, in);
    return Eigen::Map<const CVec>(out.data(), Eigen::Index(out.size()));
}
} // namespace detail

struct RangeProfile
{
    RVec magnitude;       // bin 0 = zero delay
    double bin_m = 0.0;   // c0 / (2 N delta_f)

    int size() const { return int(magnitude.size()); }
    double meters(double bin) const { return bin * bin_m; }
    int peak_bin() const
    {
        Eigen::Index i = 0;
        if (magnitude.size() > 0)
            magnitude.maxCoeff(&i);
        return int(i);
    }
    // 20 log10 of the magnitude relative to the peak (peak = 0 dB).
    RVec db() const
    {
        RVec out(magnitude.size());
        const double peak = magnitude.size() > 0 ? magnitude.maxCoeff() : 0.0;
        for (Eigen::Index i = 0; i < magnitude.size(); ++i)
            out(i) = 20.0 * std::log10(magnitude(i) / peak);
        return out;
    }
};

inline RangeProfile profile_from_spectrum(const CVec &d, double bin_m)
{
    RangeProfile p;
    p.bin_m = bin_m;
    p.magnitude = detail::idft(d).cwiseAbs();
    return p;
}

// PMF-CC range profile of a single symbol.
inline RangeProfile pmf_cc_range_profile(const RadarEcho &echo, const std::vector<WaveformFrame> &frames,
                                         const CVec &a, double bin_m, std::size_t symbol)
{
    if (symbol >= frames.size())
        throw std::out_of_range("pmf_cc_range_profile: symbol index");
    const auto d = matched_spectra(echo, frames, a);
    return profile_from_spectrum(d[symbol], bin_m);
}

// PMF-CC range profile with the matched spectra averaged coherently over all symbols.
inline RangeProfile pmf_cc_range_profile(const RadarEcho &echo, const std::vector<WaveformFrame> &frames,
                                         const CVec &a, double bin_m)
{
    const auto d = matched_spectra(echo, frames, a);
    if (d.empty())
        throw std::invalid_argument("pmf_cc_range_profile: no symbols");
    CVec mean = CVec::Zero(d.front().size());
    for (const auto &v : d)
        mean += v;
    mean /= double(d.size());
    return profile_from_spectrum(mean, bin_m);
}

struct RangeDopplerMap
{
    RMat magnitude; // N range bins x L Doppler bins; Doppler bin 0 is zero Doppler
    double bin_m = 0.0;

    RMat db() const
    {
        const double peak = magnitude.size() > 0 ? magnitude.maxCoeff() : 0.0;
        return magnitude.unaryExpr([peak](double v) { return 20.0 * std::log10(v / peak); });
    }
};

// Fast-time inverse DFT of every matched spectrum, then a DFT over symbols per range bin.
inline RangeDopplerMap range_doppler_map(const RadarEcho &echo, const std::vector<WaveformFrame> &frames,
                                         const CVec &a, double bin_m)
{
    const auto d = matched_spectra(echo, frames, a);
    if (d.empty())
        throw std::invalid_argument("range_doppler_map: L must be >= 1");
    const auto L = Eigen::Index(d.size());
    const auto N = d.front().size();
    CMat fast(N, L);
    for (Eigen::Index l = 0; l < L; ++l)
        fast.col(l) = detail::idft(d[std::size_t(l)]);
    RangeDopplerMap m;
    m.bin_m = bin_m;
    m.magnitude.resize(N, L);
    for (Eigen::Index r = 0; r < N; ++r)
        m.magnitude.row(r) = detail::dft(fast.row(r).transpose()).cwiseAbs().transpose();
    return m;
}

// Peak sidelobe level in dB: largest |profile| outside +-exclude bins of the peak, relative to the peak.
inline double peak_sidelobe_db(const RVec &magnitude, int exclude = 0)
{
    Eigen::Index peak = 0;
    const double top = magnitude.maxCoeff(&peak);
    const auto N = magnitude.size();
    double side = 0.0;
    for (Eigen::Index m = 0; m < N; ++m)
    {
        const auto dist = std::min((m - peak + N) % N, (peak - m + N) % N);
        if (dist > exclude)
            side = std::max(side, magnitude(m));
    }
    return 20.0 * std::log10(side / top);
}

// Noise-free profile of a point target sitting exactly on bin 0, averaged over the symbols:
// |sum_l r_l[m]| with r_l the circular autocorrelation of symbol l's emitted samples.
inline RVec autocorrelation_profile(const std::vector<WaveformFrame> &frames, const CVec &a)
{
    if (frames.empty())
        throw std::invalid_argument("autocorrelation_profile: no symbols");
    CVec d = CVec::Zero(frames.front().n_subcarriers);
    for (const auto &f : frames)
        d += beam_spectrum(f, a).cwiseAbs2().cast<cd>();
    return detail::idft(d).cwiseAbs();
}

// ------------------------------------------------------------------------
// Two-target detection and range estimation
// ------------------------------------------------------------------------

class DetectionError : public std::runtime_error
{
  public:
    using std::runtime_error::runtime_error;
};

struct DetectOptions
{
    int guard_bins = 2;
    // false: the weak target must be a local maximum of the full profile.
    // true: bins within the guard are removed first, so a weak peak on the strong target's skirt
    //       only has to dominate its neighbours outside the guard.
    bool mask_guard = false;
};

struct Detection
{
    int strong = 0;
    int weak = 0;
};

namespace detail
{
inline Eigen::Index circular_distance(Eigen::Index a, Eigen::Index b, Eigen::Index N)
{
    const auto d = ((a - b) % N + N) % N;
    return std::min(d, N - d);
}
} // namespace detail

inline Detection detect_two_targets(const RangeProfile &profile, const DetectOptions &opt = {})
{
    const auto N = Eigen::Index(profile.size());
    if (opt.guard_bins < 0 || N < 2 * Eigen::Index(opt.guard_bins) + 2)
        throw std::invalid_argument("detect_two_targets: profile shorter than 2 * guard_bins + 2");
    const auto &p = profile.magnitude;

    Detection det;
    det.strong = profile.peak_bin();
    auto excluded = [&](Eigen::Index m) { return detail::circular_distance(m, det.strong, N) <= opt.guard_bins; };
    auto value = [&](Eigen::Index m) -> double {
        m = (m % N + N) % N;
        return opt.mask_guard && excluded(m) ? -std::numeric_limits<double>::infinity() : p(m);
    };

    double best = -1.0;
    int best_bin = -1;
    for (Eigen::Index m = 0; m < N; ++m)
    {
        if (excluded(m))
            continue;
        const double v = p(m), l = value(m - 1), r = value(m + 1);
        if (v >= l && v >= r && (v > l || v > r) && v > best)
        {
            best = v;
            best_bin = int(m);
        }
    }
    if (best_bin < 0)
        throw DetectionError("detect_two_targets: no secondary local maximum");
    det.weak = best_bin;
    return det;
}

// Sub-bin offset in [-0.5, 0.5] from a parabola through the log-magnitudes of bins m-1, m, m+1.
// Returns 0 when a neighbour lies in `blocked` or the three points are not concave.
inline double parabolic_offset(const RangeProfile &profile, int m,
                               const std::function<bool(Eigen::Index)> &blocked = {})
{
    const auto N = Eigen::Index(profile.size());
    const auto lm = (Eigen::Index(m) - 1 + N) % N, rm = (Eigen::Index(m) + 1) % N;
    if (blocked && (blocked(lm) || blocked(rm)))
        return 0.0;
    const double l = std::log(profile.magnitude(lm));
    const double c = std::log(profile.magnitude(m));
    const double r = std::log(profile.magnitude(rm));
    const double den = l - 2.0 * c + r;
    if (!(den < 0.0) || !std::isfinite(den))
        return 0.0;
    return std::clamp(0.5 * (l - r) / den, -0.5, 0.5);
}

// Noise-free margin of the weak target over the strong target's sidelobe at the weak target's bin:
// 20 log10(|P_weak(b)| / |P_strong(b)|) with b the bin nearest the weak range. The two profiles are
// computed separately (echo synthesis is linear), averaged over all symbols.
inline double weak_target_margin_db(const std::vector<WaveformFrame> &frames, const CVec &a,
                                    const ValidatedConfig &vc, const Target &strong, const Target &weak)
{
    const auto ps = pmf_cc_range_profile(synthesize_echo(frames, {strong}, vc, 0.0, nullptr), frames, a, vc.range_bin_m);
    const auto pw = pmf_cc_range_profile(synthesize_echo(frames, {weak}, vc, 0.0, nullptr), frames, a, vc.range_bin_m);
    const auto b = Eigen::Index(std::lround(weak.range_m / vc.range_bin_m)) % Eigen::Index(ps.size());
    return 20.0 * std::log10(pw.magnitude(b) / ps.magnitude(b));
}

// ------------------------------------------------------------------------
// Monte Carlo range estimation of the weak target
// ------------------------------------------------------------------------

struct RmseScenario
{
    Target strong{20.0, 0.0, 20.0};
    double weak_rcs_dbsm = 1.0;
    double weak_min_m = 20.0;
    double weak_max_m = 25.0;
    int n_symbols = 4;
    DetectOptions detect{0, true};
};

struct RmseTrial
{
    bool feasible = true;
    bool detected = true;
    double true_range_m = 0.0;
    double estimate_m = 0.0;
};

struct RmseResult
{
    double rmse_m = std::numeric_limits<double>::quiet_NaN();
    int trials = 0;
    int used = 0;            // feasible trials entering the RMSE
    int infeasible = 0;
    int detection_failures = 0;
    std::vector<RmseTrial> per_trial;
};

// Produces the L waveforms of a trial; returns false when the QoS targets cannot be met.
using WaveformSource =
    std::function<bool(const ValidatedConfig &, const Realization &, const CVec &a, std::vector<WaveformFrame> &)>;

inline WaveformSource slot_design_source(WaveformKind kind)
{
    return [kind](const ValidatedConfig &vc, const Realization &r, const CVec &a, std::vector<WaveformFrame> &out) {
        out.clear();
        for (const auto &s : r.symbols.slots)
        {
            auto d = design_slot(vc, r.channel, s, a, kind);
            if (!d.feasible)
                return false;
            out.push_back(std::move(d.x));
        }
        return true;
    };
}

// Trial t draws its channel and symbols from (seed, t), and the weak-target range and radar noise
// from their own (seed, t) streams, so every waveform source sees the same scenario.
// A trial whose detection fails reports the strong target's range as the estimate.
inline RmseResult monte_carlo_rmse(const ValidatedConfig &vc, const RmseScenario &sc, const WaveformSource &source,
                                   int trials, std::uint64_t seed)
{
    if (trials < 1)
        throw std::invalid_argument("monte_carlo_rmse: trials must be >= 1");
    const CVec a = radar_steering(vc);
    const double sigma_r2 = radar_noise_power(vc);
    RmseResult res;
    res.trials = trials;
    res.per_trial.resize(std::size_t(trials));

    parallel_for(trials, [&](int t) {
        auto &tr = res.per_trial[std::size_t(t)];
        const auto real = draw_realization(vc, seed, std::uint64_t(t), sc.n_symbols);
        std::vector<WaveformFrame> frames;
        if (!source(vc, real, a, frames))
        {
            tr.feasible = false;
            return;
        }
        auto rs = make_rng(seed, streams::kScenario, std::uint64_t(t));
        tr.true_range_m = std::uniform_real_distribution<double>(sc.weak_min_m, sc.weak_max_m)(rs);
        Target weak{tr.true_range_m, sc.strong.angle_rad, sc.weak_rcs_dbsm};

        auto rn = make_rng(seed, streams::kRadarNoise, std::uint64_t(t));
        const auto echo = synthesize_echo(frames, {sc.strong, weak}, vc, sigma_r2, &rn);
        const auto prof = pmf_cc_range_profile(echo, frames, a, vc.range_bin_m);
        try
        {
            const auto det = detect_two_targets(prof, sc.detect);
            const auto N = Eigen::Index(prof.size());
            auto blocked = [&](Eigen::Index m) {
                return sc.detect.mask_guard && detail::circular_distance(m, det.strong, N) <= sc.detect.guard_bins;
            };
            tr.estimate_m = prof.meters(det.weak + parabolic_offset(prof, det.weak, blocked));
        }
        catch (const DetectionError &)
        {
            tr.detected = false;
            tr.estimate_m = sc.strong.range_m;
        }
    });

    double se = 0.0;
    for (const auto &tr : res.per_trial)
    {
        if (!tr.feasible)
        {
            ++res.infeasible;
            continue;
        }
        if (!tr.detected)
            ++res.detection_failures;
        const double e = tr.estimate_m - tr.true_range_m;
        se += e * e;
        ++res.used;
    }
    if (res.used > 0)
        res.rmse_m = std::sqrt(se / res.used);
    return res;
}

} // namespace islslp
