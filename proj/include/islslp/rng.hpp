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

#include <cstdint>
#include <random>

namespace islslp
{

using Rng = std::mt19937_64;

// Independent stream for (seed, stream, index); the result does not depend on evaluation order.
inline Rng make_rng(std::uint64_t seed, std::uint64_t stream = 0, std::uint64_t index = 0)
{
    std::seed_seq seq{std::uint32_t(seed), std::uint32_t(seed >> 32), std::uint32_t(stream),
                      std::uint32_t(stream >> 32), std::uint32_t(index), std::uint32_t(index >> 32)};
    return Rng(seq);
}

// Circularly-symmetric complex Gaussian with E|z|^2 = variance.
inline cd complex_gaussian(Rng &rng, double variance = 1.0)
{
    std::normal_distribution<double> nd(0.0, std::sqrt(variance / 2.0));
    const double re = nd(rng);
    const double im = nd(rng);
    return {re, im};
}

inline CVec complex_gaussian_vector(Rng &rng, Eigen::Index n, double variance = 1.0)
{
    CVec v(n);
    for (Eigen::Index i = 0; i < n; ++i)
        v(i) = complex_gaussian(rng, variance);
    return v;
}

// Well-known stream identifiers so that channels, symbols and noise never share draws.
namespace streams
{
inline constexpr std::uint64_t kChannel = 1;
inline constexpr std::uint64_t kSymbols = 2;
inline constexpr std::uint64_t kRadarNoise = 3;
inline constexpr std::uint64_t kScenario = 4;
} // namespace streams

} // namespace islslp
