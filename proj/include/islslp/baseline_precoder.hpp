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

#include "polyhedral_projection.hpp"

#include <vector>

namespace islslp
{

/// Communication-only waveform: per subcarrier, the minimum-norm point of the CI polyhedron.
struct MinPowerResult
{
    WaveformFrame frame;
    bool feasible = true;
    std::vector<int> infeasible_subcarriers;
    std::vector<std::vector<int>> active_sets;
};

inline MinPowerResult min_power_precoder(const PreparedConstraints &pc)
{
    const int N = pc.n_subcarriers();
    MinPowerResult r;
    r.frame = WaveformFrame(N, pc.n_tx);
    r.active_sets.resize(std::size_t(N));
    for (int n = 0; n < N; ++n)
    {
        const auto &b = pc.blocks[std::size_t(n)];
        if (b.infeasible)
        {
            r.feasible = false;
            r.infeasible_subcarriers.push_back(n);
            continue;
        }
        const RVec q = RVec::Zero(b.gamma.size());
        auto proj = project_gram(b.gram, q, b.gamma);
        if (proj.status != GramProjection::Status::optimal)
        {
            r.feasible = false;
            r.infeasible_subcarriers.push_back(n);
            continue;
        }
        r.frame.block(n) = b.rows * proj.lambda.cast<cd>();
        r.active_sets[std::size_t(n)] = std::move(proj.active);
    }
    return r;
}

inline MinPowerResult min_power_precoder(const CiConstraintSet &cs)
{
    return min_power_precoder(prepare_constraints(cs));
}

} // namespace islslp
