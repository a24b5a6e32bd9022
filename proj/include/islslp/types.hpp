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

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <stdexcept>

namespace islslp
{

using cd = std::complex<double>;
using CVec = Eigen::VectorXcd;
using RVec = Eigen::VectorXd;
using CMat = Eigen::MatrixXcd;
using RMat = Eigen::MatrixXd;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kSpeedOfLight = 299792458.0;

// Real inner product of two complex vectors viewed as vectors in R^{2n}: Re{u^H v}.
inline double real_dot(const Eigen::Ref<const CVec> &u, const Eigen::Ref<const CVec> &v)
{
    return u.dot(v).real();
}

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double lin) { return 10.0 * std::log10(lin); }
inline double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }
inline double watts_to_dbm(double w) { return 10.0 * std::log10(w) + 30.0; }

// Stacked per-subcarrier transmit vectors [x_0; x_1; ...; x_{N-1}] for one OFDM symbol.
struct WaveformFrame
{
    int n_subcarriers = 0;
    int n_tx = 0;
    CVec x;

    WaveformFrame() = default;
    WaveformFrame(int n_sc, int ntx) : n_subcarriers(n_sc), n_tx(ntx), x(CVec::Zero(Eigen::Index(n_sc) * ntx)) {}
    WaveformFrame(int n_sc, int ntx, CVec stacked) : n_subcarriers(n_sc), n_tx(ntx), x(std::move(stacked))
    {
        if (x.size() != Eigen::Index(n_sc) * ntx)
            throw std::invalid_argument("WaveformFrame: stacked vector length must be N*N_t");
    }

    auto block(int n) { return x.segment(Eigen::Index(n) * n_tx, n_tx); }
    auto block(int n) const { return x.segment(Eigen::Index(n) * n_tx, n_tx); }

    double power() const { return x.squaredNorm(); }
};

} // namespace islslp
