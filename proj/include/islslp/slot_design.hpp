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

#include "baseline_precoder.hpp"
#include "comm_model.hpp"
#include "mm_optimizer.hpp"

#include <string>

namespace islslp
{

enum class WaveformKind
{
    proposed,
    comm_only
};

inline const char *to_string(WaveformKind k)
{
    return k == WaveformKind::proposed ? "proposed" : "comm_only";
}

// Channel and symbols of one independent draw (seed, index).
struct Realization
{
    TdlChannel taps;
    FreqChannel channel;
    SymbolFrame symbols;
};

inline Realization draw_realization(const ValidatedConfig &vc, std::uint64_t seed, std::uint64_t index, int n_slots)
{
    Realization r;
    auto rc = make_rng(seed, streams::kChannel, index);
    r.taps = generate_tdl_channel(vc, rc);
    r.channel = taps_to_frequency_response(r.taps, vc.N());
    auto rs = make_rng(seed, streams::kSymbols, index);
    r.symbols = generate_psk_symbols(vc, rs, n_slots);
    return r;
}

inline CVec radar_steering(const ValidatedConfig &vc)
{
    return steering_vector(vc.target_angle_rad(), vc.Nt(), vc.cfg.antenna_spacing_wavelengths);
}

inline MmOptions mm_options(const ValidatedConfig &vc)
{
    MmOptions o;
    o.power_budget = vc.cfg.power_budget;
    o.conv_threshold = vc.cfg.conv_threshold;
    o.max_iters = vc.cfg.max_iters;
    return o;
}

struct SlotDesign
{
    WaveformFrame x;
    bool feasible = false;
    double min_power = 0.0;
    std::string reason;
    MmResult mm; // proposed waveform only
};

// Waveform of one slot: the minimum-power CI point, or the MM design started from it.
inline SlotDesign design_slot(const ValidatedConfig &vc, const FreqChannel &fc, const CMat &symbols, const CVec &a,
                              WaveformKind kind)
{
    SlotDesign d;
    const auto pc = prepare_constraints(build_ci_constraints(fc, symbols, vc));
    auto ip = initial_feasible_point(pc, vc.cfg.power_budget);
    d.min_power = ip.min_power;
    d.feasible = ip.feasible;
    d.reason = ip.reason;
    if (!ip.feasible)
        return d;
    if (kind == WaveformKind::comm_only)
    {
        d.x = std::move(ip.x);
        return d;
    }
    d.mm = optimize_waveform(mm_options(vc), pc, a, scaled_initial_point(ip, vc.cfg.power_budget));
    d.x = d.mm.x;
    return d;
}

} // namespace islslp
