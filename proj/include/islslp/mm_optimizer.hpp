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

#include "radar_metrics.hpp"
#include "socp_subsolver.hpp"

#include <algorithm>
#include <chrono>
#include <limits>
#include <string>
#include <vector>

namespace islslp
{

// Majorization-minimization for
//     min  xi(x) = (2/N) sum_n |c_n|^4 - (2/N^2) (sum_n |c_n|^2)^2,   c_n = a^H x_n
//     s.t. CI half-spaces, ||x||^2 <= P0.
//
// The quartic term is majorized around x_t using lambda_a = N_t^2 >= lambda_max(A^H A), the
// power bound, and lambda_b = lambda_max(B); the squared beam power is minorized by its tangent.
// What remains is the linear surrogate Re{x^H b} handed to solve_subproblem.

// Largest eigenvalue of A^H A = sum_n vec(A_n) vec(A_n)^H; depends only on N_t.
inline double lambda_a(int n_tx)
{
    if (n_tx < 1)
        throw std::invalid_argument("lambda_a: n_tx must be >= 1");
    return double(n_tx) * double(n_tx);
}

// B = sum_n A_n x_t x_t^H A_n - lambda_a x_t x_t^H, kept as a block-diagonal part with blocks
// |c_n|^2 a a^H and a global rank-one correction. B is Hermitian.
class StructuredB
{
  public:
    StructuredB(const WaveformFrame &xt, const CVec &a, double lam_a)
        : xt_(xt), a_(a), lambda_a_(lam_a), c_(beam_spectrum(xt, a))
    {
    }

    CVec apply(const CVec &v) const
    {
        const int N = xt_.n_subcarriers, Nt = xt_.n_tx;
        CVec out(v.size());
        const cd proj = xt_.x.dot(v); // x_t^H v
        for (int n = 0; n < N; ++n)
        {
            const auto vn = v.segment(Eigen::Index(n) * Nt, Nt);
            out.segment(Eigen::Index(n) * Nt, Nt) =
                std::norm(c_(n)) * a_.dot(vn) * a_ - lambda_a_ * proj * xt_.block(n);
        }
        return out;
    }

    CMat to_dense() const
    {
        const int N = xt_.n_subcarriers, Nt = xt_.n_tx;
        CMat B = -lambda_a_ * xt_.x * xt_.x.adjoint();
        for (int n = 0; n < N; ++n)
            B.block(Eigen::Index(n) * Nt, Eigen::Index(n) * Nt, Nt, Nt) += std::norm(c_(n)) * a_ * a_.adjoint();
        return B;
    }

    const CVec &amplitudes() const { return c_; }
    const WaveformFrame &iterate() const { return xt_; }
    const CVec &steering() const { return a_; }
    double lam_a() const { return lambda_a_; }

  private:
    WaveformFrame xt_;
    CVec a_;
    double lambda_a_;
    CVec c_;
};

struct LambdaBResult
{
    double value = 0.0;
    bool converged = true; // false: a safe upper bound was returned instead
    int iterations = 0;
};

// lambda_max(B) from the secular equation of the rank-one update of the block-diagonal part.
// The block part has eigenvalues d_n = |c_n|^2 ||a||^2 (eigenvector e_n (x) a) and zeros; B's
// largest eigenvalue is the top root of 1 - lambda_a sum_g W_g / (p_g - lambda) = 0 or a repeated pole.
inline LambdaBResult lambda_b(const StructuredB &B)
{
    const auto &c = B.amplitudes();
    const auto &xt = B.iterate();
    const double a2 = B.steering().squaredNorm();
    const double rho = B.lam_a();
    const auto dim = xt.x.size();

    LambdaBResult out;
    if (dim == 1)
    {
        out.value = B.to_dense()(0, 0).real();
        return out;
    }

    struct Pole
    {
        double value, weight;
        int mult;
    };
    std::vector<Pole> poles;
    double weighted = 0.0;
    int nonzero = 0;
    for (Eigen::Index n = 0; n < c.size(); ++n)
    {
        const double p = std::norm(c(n));
        if (p == 0.0)
            continue;
        poles.push_back({p * a2, p / a2, 1});
        weighted += p / a2;
        ++nonzero;
    }
    const double rest = std::max(0.0, xt.x.squaredNorm() - weighted);
    std::sort(poles.begin(), poles.end(), [](const Pole &l, const Pole &r) { return l.value > r.value; });

    std::vector<Pole> groups;
    for (const auto &p : poles)
    {
        if (!groups.empty() && groups.back().value - p.value <= 1e-12 * groups.back().value)
        {
            groups.back().weight += p.weight;
            groups.back().mult += 1;
        }
        else
            groups.push_back(p);
    }
    // Zero eigenspace of the block part: weighted only through `rest`.
    const long zero_dim = long(dim) - nonzero;
    const bool zero_weighted = rest > 1e-300;
    const bool zero_is_eigen = zero_dim - (zero_weighted ? 1 : 0) >= 1;
    if (zero_weighted)
        groups.push_back({0.0, rest, int(zero_dim)});

    if (groups.empty())
    {
        out.value = 0.0;
        return out;
    }
    const auto &top = groups.front();
    if (top.mult >= 2)
    {
        out.value = top.value;
        return out;
    }

    auto h = [&](double lam) {
        double s = 0.0;
        for (const auto &g : groups)
            s += g.weight / (g.value - lam);
        return 1.0 - rho * s;
    };
    double hi = top.value;
    double lo = groups.size() > 1 ? groups[1].value : top.value - rho * top.weight;
    if (groups.size() == 1)
    {
        out.value = std::max(lo, zero_is_eigen ? 0.0 : lo);
        return out;
    }
    for (out.iterations = 0; out.iterations < 300; ++out.iterations)
    {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi)
            break;
        if (h(mid) > 0.0)
            lo = mid;
        else
            hi = mid;
    }
    out.value = std::max(hi, zero_is_eigen ? 0.0 : hi);
    return out;
}

// Power iteration on B + sigma I with sigma = lambda_a ||x_t||^2 (so the shifted operator is PSD).
// Falls back to the upper bound max_n d_n >= lambda_max(B) when it does not converge.
inline LambdaBResult lambda_b_power(const StructuredB &B, double tol = 1e-8, int max_iter = 1000)
{
    const auto &xt = B.iterate();
    const auto dim = xt.x.size();
    const double shift = B.lam_a() * xt.x.squaredNorm();
    LambdaBResult out;
    if (xt.x.squaredNorm() == 0.0)
        return out;

    CVec v(dim);
    for (Eigen::Index i = 0; i < dim; ++i)
        v(i) = cd(1.0 + 0.01 * double(i % 7), 0.1 * double(i % 3));
    v.normalize();
    double prev = std::numeric_limits<double>::quiet_NaN();
    for (out.iterations = 1; out.iterations <= max_iter; ++out.iterations)
    {
        CVec w = B.apply(v) + shift * v;
        const double rq = v.dot(w).real();
        const double nw = w.norm();
        if (nw == 0.0)
        {
            out.value = -shift;
            return out;
        }
        v = w / nw;
        if (std::abs(rq - prev) <= tol * std::max(std::abs(rq), 1e-300))
        {
            out.value = rq - shift;
            return out;
        }
        prev = rq;
    }
    out.converged = false;
    double bound = 0.0;
    for (Eigen::Index n = 0; n < B.amplitudes().size(); ++n)
        bound = std::max(bound, std::norm(B.amplitudes()(n)) * B.steering().squaredNorm());
    out.value = bound;
    return out;
}

// Quantities of one MM step.
struct SurrogateState
{
    WaveformFrame xt;
    CVec amplitudes;        // c_n = a^H x_{t,n}
    double alpha = 0.0;     // x_t^H Atilde x_t
    double lam_a = 0.0;
    double lam_b = 0.0;
    bool lam_b_exact = true;
    CVec b;
};

// b = (4/N)(B + B^H - 2 lambda_b I) x_t - (8 alpha / N^2) Atilde x_t
inline SurrogateState surrogate_b(const WaveformFrame &xt, const CVec &a)
{
    const int N = xt.n_subcarriers, Nt = xt.n_tx;
    SurrogateState s;
    s.xt = xt;
    s.lam_a = lambda_a(Nt);
    StructuredB B(xt, a, s.lam_a);
    s.amplitudes = B.amplitudes();
    s.alpha = s.amplitudes.squaredNorm();
    const auto lb = lambda_b(B);
    s.lam_b = lb.value;
    s.lam_b_exact = lb.converged;

    const CVec Bx = B.apply(xt.x);
    s.b = (8.0 / N) * (Bx - s.lam_b * xt.x);
    const double k = 8.0 * s.alpha / (double(N) * N);
    for (int n = 0; n < N; ++n)
        s.b.segment(Eigen::Index(n) * Nt, Nt) -= k * s.amplitudes(n) * a;
    return s;
}

struct MmOptions
{
    double power_budget = 0.5;
    double conv_threshold = 1e-5;
    int max_iters = 500;
    SubproblemOptions subproblem;
};

struct MmTraceRecord
{
    int iter = 0;
    double isl = 0.0;
    double delta = 0.0;
    std::string subsolver_status;
    double millis = 0.0;
};

struct MmResult
{
    WaveformFrame x;
    std::vector<MmTraceRecord> trace;
    bool converged = false;
    bool hit_max_iters = false;
    bool infeasible = false;
    int descent_violations = 0;
    int inexact_lambda_b = 0;
    double isl = 0.0;
};

class InfeasibleStart : public std::runtime_error
{
  public:
    using std::runtime_error::runtime_error;
};

// One MM update. b = 0 keeps the current iterate.
inline SolveResult mm_iterate(const SurrogateState &state, const PreparedConstraints &pc, double P0,
                              const SubproblemOptions &opt = {},
                              const std::vector<std::vector<int>> *warm = nullptr)
{
    if (state.b.squaredNorm() == 0.0)
    {
        SolveResult r;
        r.x = state.xt;
        r.power = r.x.power();
        r.max_violation = max_ci_violation(pc, r.x);
        return r;
    }
    return solve_subproblem(pc, state.b, P0, opt, warm);
}

// Default start: the minimum-power CI point scaled up along itself to use the full budget.
// Scaling by a factor >= 1 keeps every CI constraint satisfied since gamma >= 0.
inline WaveformFrame scaled_initial_point(const InitialPoint &ip, double P0)
{
    WaveformFrame x = ip.x;
    const double p = x.power();
    if (p > 0.0 && p < P0)
        x.x *= std::sqrt(P0 / p);
    return x;
}

inline MmResult optimize_waveform(const MmOptions &opt, const PreparedConstraints &pc, const CVec &a,
                                  const WaveformFrame &x_init)
{
    using clock = std::chrono::steady_clock;
    const auto t0 = clock::now();
    auto elapsed_ms = [&] { return std::chrono::duration<double, std::milli>(clock::now() - t0).count(); };

    if (x_init.power() > opt.power_budget * (1.0 + 1e-9) ||
        max_ci_violation(pc, x_init) > opt.subproblem.feasibility_tol)
        throw InfeasibleStart("optimize_waveform: initial point violates the constraints");

    MmResult res;
    res.x = x_init;
    res.isl = isl_analytic(res.x, a);
    res.trace.push_back({0, res.isl, std::numeric_limits<double>::quiet_NaN(), "init", elapsed_ms()});

    const std::vector<std::vector<int>> *warm = nullptr;
    std::vector<std::vector<int>> warm_store;
    double delta = 1.0;
    int t = 0;
    while (delta >= opt.conv_threshold && t < opt.max_iters)
    {
        const double prev = res.isl;
        const auto state = surrogate_b(res.x, a);
        if (!state.lam_b_exact)
            ++res.inexact_lambda_b;
        auto step = mm_iterate(state, pc, opt.power_budget, opt.subproblem, warm);
        if (step.status != SolveResult::Status::optimal)
        {
            res.infeasible = step.status == SolveResult::Status::infeasible;
            res.trace.push_back({t + 1, prev, delta, to_string(step.status), elapsed_ms()});
            break;
        }
        const double next = isl_analytic(step.x, a);
        if (next > prev + 1e-9 * std::max(1.0, std::abs(prev)))
            ++res.descent_violations;
        delta = next == 0.0 ? (prev == 0.0 ? 0.0 : 1.0) : std::abs((next - prev) / next);
        if (next == 0.0)
            delta = 0.0;
        res.x = std::move(step.x);
        res.isl = next;
        warm_store = std::move(step.active_sets);
        warm = warm_store.empty() ? nullptr : &warm_store;
        ++t;
        res.trace.push_back({t, next, delta, to_string(step.status), elapsed_ms()});
    }
    res.converged = delta < opt.conv_threshold;
    res.hit_max_iters = !res.converged && t >= opt.max_iters;
    return res;
}

} // namespace islslp
