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

#include "fft.hpp"
#include "types.hpp"

#include <vector>

namespace islslp
{

// ULA steering vector, entry m = exp(j 2 pi (d/lambda) m sin(theta)).
inline CVec steering_vector(double theta, int n_tx, double d_over_lambda)
{
    if (n_tx < 1)
        throw std::invalid_argument("steering_vector: n_tx must be >= 1");
    CVec a(n_tx);
    for (int m = 0; m < n_tx; ++m)
        a(m) = std::polar(1.0, 2.0 * kPi * d_over_lambda * m * std::sin(theta));
    return a;
}

// Projected per-subcarrier amplitudes c_n = a^H x_n.
inline CVec beam_spectrum(const WaveformFrame &frame, const CVec &a)
{
    if (a.size() != frame.n_tx)
        throw std::invalid_argument("beam_spectrum: steering vector length mismatch");
    CVec c(frame.n_subcarriers);
    for (int n = 0; n < frame.n_subcarriers; ++n)
        c(n) = a.dot(frame.block(n));
    return c;
}

// Baseband samples of the emitted signal a^H x(t) at t = p T_c:
// x[p] = (1/sqrt(N)) sum_n c_n exp(j 2 pi n p / N).
inline CVec emitted_samples_from_spectrum(const CVec &spectrum)
{
    const auto N = spectrum.size();
    std::vector<cd> in(spectrum.data(), spectrum.data() + N), out;
    detail::fft_inverse(out, in); // includes 1/N
    CVec x(N);
    const double scale = std::sqrt(double(N));
    for (Eigen::Index p = 0; p < N; ++p)
        x(p) = out[std::size_t(p)] * scale;
    return x;
}

inline CVec emitted_samples(const WaveformFrame &frame, const CVec &a)
{
    return emitted_samples_from_spectrum(beam_spectrum(frame, a));
}

// r[m] = sum_p x[p] conj(x[(p - m) mod N]) via r = IDFT(|DFT(x)|^2).
inline CVec circular_autocorrelation(const CVec &x)
{
    const auto N = x.size();
    std::vector<cd> in(x.data(), x.data() + N), spec, out;
    detail::fft_forward(spec, in);
    for (auto &v : spec)
        v = std::norm(v);
    detail::fft_inverse(out, spec);
    CVec r(N);
    for (Eigen::Index m = 0; m < N; ++m)
        r(m) = out[std::size_t(m)];
    return r;
}

// Direct O(N^2) evaluation of the same sum.
inline CVec circular_autocorrelation_direct(const CVec &x)
{
    const auto N = x.size();
    CVec r = CVec::Zero(N);
    for (Eigen::Index m = 0; m < N; ++m)
        for (Eigen::Index p = 0; p < N; ++p)
            r(m) += x(p) * std::conj(x(((p - m) % N + N) % N));
    return r;
}

// Single-sided sum over nonzero circular lags, sum_{m=1}^{N-1} |r[m]|^2.
inline double isl_time_domain(const CVec &r)
{
    double s = 0.0;
    for (Eigen::Index m = 1; m < r.size(); ++m)
        s += std::norm(r(m));
    return s;
}

// Amplitude-domain ISL: 2[(1/N) sum |c_n|^4 - ((1/N) sum |c_n|^2)^2].
// Equals (2/N^2) * isl_time_domain(circular_autocorrelation(emitted_samples(.))).
inline double isl_from_spectrum(const CVec &c)
{
    const double N = double(c.size());
    double m2 = 0.0, m4 = 0.0;
    for (Eigen::Index n = 0; n < c.size(); ++n)
    {
        const double p = std::norm(c(n));
        m2 += p;
        m4 += p * p;
    }
    m2 /= N;
    m4 /= N;
    return 2.0 * (m4 - m2 * m2);
}

inline double isl_analytic(const WaveformFrame &frame, const CVec &a)
{
    return isl_from_spectrum(beam_spectrum(frame, a));
}

// Scale-free ISL: isl_time_domain / r[0]^2. Compares waveforms transmitted at different powers.
inline double normalized_isl_from_spectrum(const CVec &c)
{
    const double r0 = c.squaredNorm();
    if (r0 == 0.0)
        return 0.0;
    const double N = double(c.size());
    return isl_from_spectrum(c) * N * N / (2.0 * r0 * r0);
}

inline double normalized_isl(const WaveformFrame &frame, const CVec &a)
{
    return normalized_isl_from_spectrum(beam_spectrum(frame, a));
}

// The quadratic forms of the stacked formulation, evaluated through the block structure:
// a_n^H x = a^H x_n, x^H Atilde x = sum |c_n|^2 and xt^H A^H A xt = sum |c_n|^4.
struct StructuredQuadratics
{
    CVec amplitudes;          // c_n
    double beam_power = 0.0;  // x^H Atilde x
    double fourth_power = 0.0; // xtilde^H A^H A xtilde
};

inline StructuredQuadratics structured_quadratics(const WaveformFrame &frame, const CVec &a)
{
    StructuredQuadratics q;
    q.amplitudes = beam_spectrum(frame, a);
    for (Eigen::Index n = 0; n < q.amplitudes.size(); ++n)
    {
        const double p = std::norm(q.amplitudes(n));
        q.beam_power += p;
        q.fourth_power += p * p;
    }
    return q;
}

// (2/N) xt^H A^H A xt - (2/N^2) (x^H Atilde x)^2
inline double isl_quadratic_form(const StructuredQuadratics &q, int N)
{
    return 2.0 / N * q.fourth_power - 2.0 / (double(N) * N) * q.beam_power * q.beam_power;
}

} // namespace islslp
