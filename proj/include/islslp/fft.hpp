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

#include <unsupported/Eigen/FFT>

#include <vector>

namespace islslp::detail
{

// Unnormalized forward DFT and 1/N-normalized inverse. The kissfft backend cannot plan length 1.
inline void fft_forward(std::vector<cd> &out, const std::vector<cd> &in)
{
    if (in.size() <= 1)
    {
        out = in;
        return;
    }
    Eigen::FFT<double> fft;
    fft.fwd(out, in);
}

inline void fft_inverse(std::vector<cd> &out, const std::vector<cd> &in)
{
    if (in.size() <= 1)
    {
        out = in;
        return;
    }
    Eigen::FFT<double> fft;
    fft.inv(out, in);
}

} // namespace islslp::detail
