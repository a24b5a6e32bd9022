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
#include "rng.hpp"
#include "types.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

namespace islslp
{

// Multipath channel of every user as a tapped delay line.
// taps[k] is U x N_t; row u holds the tap vector of delay u for user k.
struct TdlChannel
{
    std::vector<CMat> taps;

    int n_users() const { return int(taps.size()); }
    int n_taps() const { return taps.empty() ? 0 : int(taps.front().rows()); }
    int n_tx() const { return taps.empty() ? 0 : int(taps.front().cols()); }
};

// Per-subcarrier channel: h[n] is N_t x K, column k is h_{n,k}.
struct FreqChannel
{
    std::vector<CMat> h;

    int n_subcarriers() const { return int(h.size()); }
};

// Unit-modulus PSK symbols of all slots: slots[l] is N x K.
struct SymbolFrame
{
    std::vector<CMat> slots;
};

// Constructive-interference constraints Re{ht_{n,i}^H x_n} >= gamma_{n,i}, i = 0..2K-1.
// Column 2k of rows[n] is the "minus" rotation of user k, column 2k+1 the "plus" rotation.
struct CiConstraintSet
{
    int n_tx = 0;
    std::vector<CMat> rows;  // N entries, each N_t x 2K
    std::vector<RVec> gamma; // N entries, each 2K

    int n_subcarriers() const { return int(rows.size()); }
    int n_constraints() const { return rows.empty() ? 0 : int(rows.front().cols()); }
};

struct MarginReport
{
    RMat slack; // N x 2K
    double min_slack = std::numeric_limits<double>::infinity();
    int violations = 0;
};

inline constexpr double kCiViolationTolerance = 1e-6;

// ------------------------------------------------------------------------

inline TdlChannel generate_tdl_channel(const ValidatedConfig &vc, Rng &rng)
{
    const auto &c = vc.cfg;
    std::vector<double> profile(std::size_t(c.n_taps));
    double total = 0.0;
    for (int u = 0; u < c.n_taps; ++u)
        total += profile[std::size_t(u)] = db_to_linear(-c.tap_decay_db * u);
    const double gain = db_to_linear(c.channel_gain_db);
    for (auto &p : profile)
        p *= gain / total;

    TdlChannel ch;
    ch.taps.resize(std::size_t(c.n_users));
    for (int k = 0; k < c.n_users; ++k)
    {
        CMat t(c.n_taps, c.n_tx);
        for (int u = 0; u < c.n_taps; ++u)
            for (int m = 0; m < c.n_tx; ++m)
                t(u, m) = complex_gaussian(rng, profile[std::size_t(u)]);
        ch.taps[std::size_t(k)] = std::move(t);
    }
    return ch;
}

// h_{n,k} = sum_u hbar_{u,k} exp(-j 2 pi n u / N): N-point DFT of the zero-padded tap sequence.
inline FreqChannel taps_to_frequency_response(const TdlChannel &ch, int N)
{
    const int U = ch.n_taps();
    if (U > N)
        throw std::invalid_argument("taps_to_frequency_response: more taps than subcarriers");
    const int K = ch.n_users();
    const int Nt = ch.n_tx();

    FreqChannel fc;
    fc.h.assign(std::size_t(N), CMat::Zero(Nt, K));
    std::vector<cd> seq(static_cast<std::size_t>(N));
    std::vector<cd> spec;
    for (int k = 0; k < K; ++k)
        for (int m = 0; m < Nt; ++m)
        {
            std::fill(seq.begin(), seq.end(), cd{});
            for (int u = 0; u < U; ++u)
                seq[std::size_t(u)] = ch.taps[std::size_t(k)](u, m);
            detail::fft_forward(spec, seq);
            for (int n = 0; n < N; ++n)
                fc.h[std::size_t(n)](m, k) = spec[std::size_t(n)];
        }
    return fc;
}

// Constellation point m of the Omega-PSK grid e^{j(2m+1)pi/Omega}.
inline cd psk_point(int m, int order)
{
    return std::polar(1.0, (2.0 * m + 1.0) * kPi / order);
}

inline SymbolFrame generate_psk_symbols(const ValidatedConfig &vc, Rng &rng, int n_slots)
{
    const auto &c = vc.cfg;
    std::uniform_int_distribution<int> pick(0, c.psk_order - 1);
    SymbolFrame f;
    f.slots.reserve(std::size_t(n_slots));
    for (int l = 0; l < n_slots; ++l)
    {
        CMat s(c.n_subcarriers, c.n_users);
        for (int n = 0; n < c.n_subcarriers; ++n)
            for (int k = 0; k < c.n_users; ++k)
                s(n, k) = psk_point(pick(rng), c.psk_order);
        f.slots.push_back(std::move(s));
    }
    return f;
}

inline SymbolFrame generate_psk_symbols(const ValidatedConfig &vc, Rng &rng)
{
    return generate_psk_symbols(vc, rng, vc.cfg.n_symbols);
}

// Builds the 2K half-space constraints per subcarrier for one slot of symbols (N x K).
inline CiConstraintSet build_ci_constraints(const FreqChannel &fc, const CMat &symbols, double phi, double sigma,
                                            const RMat &snr_threshold)
{
    const int N = fc.n_subcarriers();
    if (symbols.rows() != N || snr_threshold.rows() != N)
        throw std::invalid_argument("build_ci_constraints: subcarrier count mismatch");
    const int K = int(symbols.cols());
    const int Nt = N > 0 ? int(fc.h.front().rows()) : 0;

    const cd minus_j{0.0, -1.0}; // e^{-j pi/2}
    const cd rot_plus = std::sin(phi) + minus_j * std::cos(phi);
    const cd rot_minus = std::sin(phi) - minus_j * std::cos(phi);

    CiConstraintSet cs;
    cs.n_tx = Nt;
    cs.rows.reserve(std::size_t(N));
    cs.gamma.reserve(std::size_t(N));
    for (int n = 0; n < N; ++n)
    {
        CMat rows(Nt, 2 * K);
        RVec g(2 * K);
        for (int k = 0; k < K; ++k)
        {
            const cd derot = std::polar(1.0, -std::arg(symbols(n, k)));
            // ht^H = h^H * w  <=>  ht = conj(w) * h
            rows.col(2 * k) = std::conj(derot * rot_minus) * fc.h[std::size_t(n)].col(k);
            rows.col(2 * k + 1) = std::conj(derot * rot_plus) * fc.h[std::size_t(n)].col(k);
            g(2 * k) = g(2 * k + 1) = sigma * std::sqrt(snr_threshold(n, k)) * std::sin(phi);
        }
        cs.rows.push_back(std::move(rows));
        cs.gamma.push_back(std::move(g));
    }
    return cs;
}

inline CiConstraintSet build_ci_constraints(const FreqChannel &fc, const CMat &symbols, const ValidatedConfig &vc)
{
    return build_ci_constraints(fc, symbols, vc.phi, vc.sigma(), vc.snr_threshold);
}

inline MarginReport verify_ci_margins(const WaveformFrame &frame, const CiConstraintSet &cs)
{
    if (frame.n_subcarriers != cs.n_subcarriers() || frame.n_tx != cs.n_tx)
        throw std::invalid_argument("verify_ci_margins: dimension mismatch");
    MarginReport r;
    r.slack.resize(cs.n_subcarriers(), cs.n_constraints());
    for (int n = 0; n < cs.n_subcarriers(); ++n)
        for (int i = 0; i < cs.n_constraints(); ++i)
        {
            const double s = real_dot(cs.rows[std::size_t(n)].col(i), frame.block(n)) - cs.gamma[std::size_t(n)](i);
            r.slack(n, i) = s;
            r.min_slack = std::min(r.min_slack, s);
            if (s < -kCiViolationTolerance)
                ++r.violations;
        }
    return r;
}

// ------------------------------------------------------------------------
// Channel CSV: header "user,tap,antenna,re,im", one row per tap entry.
// ------------------------------------------------------------------------

inline void save_channel_csv(const TdlChannel &ch, const std::string &path)
{
    std::ofstream f(path);
    if (!f)
        throw std::runtime_error("cannot write channel file '" + path + "'");
    f.precision(17);
    f << "user,tap,antenna,re,im\n";
    for (int k = 0; k < ch.n_users(); ++k)
        for (int u = 0; u < ch.n_taps(); ++u)
            for (int m = 0; m < ch.n_tx(); ++m)
            {
                const cd v = ch.taps[std::size_t(k)](u, m);
                f << k << ',' << u << ',' << m << ',' << v.real() << ',' << v.imag() << '\n';
            }
}

inline TdlChannel load_channel_csv(const std::string &path)
{
    std::ifstream f(path);
    if (!f)
        throw std::runtime_error("cannot read channel file '" + path + "'");
    std::string line;
    std::getline(f, line);
    struct Entry
    {
        int k, u, m;
        cd v;
    };
    std::vector<Entry> entries;
    int K = 0, U = 0, Nt = 0;
    while (std::getline(f, line))
    {
        if (line.empty())
            continue;
        std::istringstream in(line);
        Entry e{};
        char c1, c2, c3, c4;
        double re, im;
        if (!(in >> e.k >> c1 >> e.u >> c2 >> e.m >> c3 >> re >> c4 >> im))
            throw std::runtime_error("malformed channel row: " + line);
        e.v = {re, im};
        K = std::max(K, e.k + 1);
        U = std::max(U, e.u + 1);
        Nt = std::max(Nt, e.m + 1);
        entries.push_back(e);
    }
    TdlChannel ch;
    ch.taps.assign(std::size_t(K), CMat::Zero(U, Nt));
    for (const auto &e : entries)
        ch.taps[std::size_t(e.k)](e.u, e.m) = e.v;
    return ch;
}

} // namespace islslp
