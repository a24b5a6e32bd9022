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
#include "polyhedral_projection.hpp"

#include <limits>
#include <string>
#include <vector>

namespace islslp
{

// Solver for
//     minimize  Re{x^H b}
//     s.t.      Re{ht_{n,i}^H x_n} >= gamma_{n,i}   for all n, i
//               ||x||^2 <= P0.
//
// Dualizing the power constraint with multiplier mu > 0 separates the problem into one projection
// per subcarrier: x_n(mu) = Proj_{P_n}(-b_n / (2 mu)). With s = 1/(2 mu) the total power
// ||x(s)||^2 is nondecreasing in s, and on any interval where the active sets do not change it is
// exactly C0 + C2 s^2. The search for ||x(s)||^2 = P0 therefore combines a bracket with that
// closed-form step and usually terminates after two or three evaluations.

struct SubproblemOptions
{
    double feasibility_tol = 1e-6;  // absolute CI slack
    double power_rel_tol = 1e-12;   // |(||x||^2 - P0)| / P0 accepted on the power boundary
    int max_bisections = 200;
};

struct SolveResult
{
    enum class Status
    {
        optimal,
        infeasible,
        max_iter
    };

    Status status = Status::optimal;
    WaveformFrame x;
    double objective = 0.0;
    double max_violation = 0.0;
    double power = 0.0;
    double mu = 0.0;
    double min_power = 0.0;
    int iterations = 0;
    std::vector<std::vector<int>> active_sets;
};

inline const char *to_string(SolveResult::Status s)
{
    switch (s)
    {
    case SolveResult::Status::optimal: return "optimal";
    case SolveResult::Status::infeasible: return "infeasible";
    case SolveResult::Status::max_iter: return "max_iter";
    }
    return "?";
}

// Largest CI violation max(0, gamma - <g, x_n>) over all kept rows.
inline double max_ci_violation(const PreparedConstraints &pc, const WaveformFrame &x)
{
    double v = 0.0;
    for (int n = 0; n < pc.n_subcarriers(); ++n)
    {
        const auto &b = pc.blocks[std::size_t(n)];
        const RVec s = row_products(b, x.block(n)) - b.gamma;
        if (s.size() > 0)
            v = std::max(v, -s.minCoeff());
    }
    return v;
}

namespace detail
{

struct PathPoint
{
    double s = 0.0;
    double power = 0.0;
    double c0 = 0.0; // exact power model C0 + C2 s^2 on the current active sets
    double c2 = 0.0;
    bool ok = true;
    bool stationary = false; // x(s') = x(s) for every s' >= s
    std::vector<std::vector<int>> active;
    CVec x0, d; // x(s) = x0 + s d on the current active sets
};

// Directions whose squared norm is below this fraction of ||b_n||^2 are rounding residue.
inline constexpr double kNullDirection = 1e-24;

class PowerPath
{
  public:
    PowerPath(const PreparedConstraints &pc, const CVec &b) : pc_(pc), b_(b)
    {
        const int N = pc.n_subcarriers();
        gb_.reserve(std::size_t(N));
        bnorm2_.reserve(std::size_t(N));
        for (int n = 0; n < N; ++n)
        {
            const auto bn = b.segment(Eigen::Index(n) * pc.n_tx, pc.n_tx);
            gb_.push_back(row_products(pc.blocks[std::size_t(n)], bn));
            bnorm2_.push_back(bn.squaredNorm());
        }
    }

    // The projection identifies the active sets; the point itself is rebuilt from them as
    // x0 + s d, with x0 = G_A Q_A^-1 gamma_A and d = -b + G_A Q_A^-1 (Gb)_A, which avoids the
    // cancellation of -s b + G lambda at large s.
    PathPoint evaluate(double s, const std::vector<std::vector<int>> *warm) const
    {
        const int N = pc_.n_subcarriers();
        const int Nt = pc_.n_tx;
        PathPoint p;
        p.s = s;
        p.active.resize(std::size_t(N));
        p.x0 = CVec::Zero(Eigen::Index(N) * Nt);
        p.d = CVec::Zero(Eigen::Index(N) * Nt);
        p.stationary = s > 0.0;
        for (int n = 0; n < N; ++n)
        {
            const auto &blk = pc_.blocks[std::size_t(n)];
            const RVec q = -s * gb_[std::size_t(n)];
            auto proj = project_gram(blk.gram, q, blk.gamma, warm ? &(*warm)[std::size_t(n)] : nullptr);
            if (proj.status != GramProjection::Status::optimal)
            {
                p.ok = false;
                return p;
            }
            const auto &A = proj.active;
            const auto bn = b_.segment(Eigen::Index(n) * Nt, Nt);
            auto x0 = p.x0.segment(Eigen::Index(n) * Nt, Nt);
            auto d = p.d.segment(Eigen::Index(n) * Nt, Nt);
            d = -bn;
            double c0 = 0.0;
            if (!A.empty())
            {
                const auto k = Eigen::Index(A.size());
                RVec ga(k), gba(k);
                CMat GA(Nt, k);
                for (Eigen::Index i = 0; i < k; ++i)
                {
                    ga(i) = blk.gamma(A[std::size_t(i)]);
                    gba(i) = gb_[std::size_t(n)](A[std::size_t(i)]);
                    GA.col(i) = blk.rows.col(A[std::size_t(i)]);
                }
                const RVec l0 = solve_active(blk.gram, A, ga);
                const RVec l1 = solve_active(blk.gram, A, gba);
                x0 = GA * l0.cast<cd>();
                d += GA * l1.cast<cd>();
                c0 = l0.dot(ga);
                if (l1.size() > 0 && l1.minCoeff() < -1e-12 * std::max(1.0, l1.cwiseAbs().maxCoeff()))
                    p.stationary = false;
            }
            double c2 = d.squaredNorm();
            if (c2 <= kNullDirection * bnorm2_[std::size_t(n)])
            {
                d.setZero();
                c2 = 0.0;
            }
            else
                p.stationary = false;
            p.c0 += c0;
            p.c2 += c2;
            p.active[std::size_t(n)] = A;
        }
        p.power = p.c0 + p.c2 * s * s;
        return p;
    }

    WaveformFrame frame(const PathPoint &p) const
    {
        return WaveformFrame(pc_.n_subcarriers(), pc_.n_tx, p.x0 + p.s * p.d);
    }

  private:
    const PreparedConstraints &pc_;
    const CVec &b_;
    std::vector<RVec> gb_;
    std::vector<double> bnorm2_;
};

} // namespace detail

inline SolveResult solve_subproblem(const PreparedConstraints &pc, const CVec &b, double P0,
                                    const SubproblemOptions &opt = {},
                                    const std::vector<std::vector<int>> *warm = nullptr)
{
    const int N = pc.n_subcarriers();
    if (b.size() != Eigen::Index(N) * pc.n_tx)
        throw std::invalid_argument("solve_subproblem: b has the wrong length");

    SolveResult res;
    for (const auto &blk : pc.blocks)
        if (blk.infeasible)
        {
            res.status = SolveResult::Status::infeasible;
            return res;
        }

    detail::PowerPath path(pc, b);
    auto finish = [&](const detail::PathPoint &p, bool mu_zero) {
        res.x = path.frame(p);
        res.power = res.x.power();
        res.objective = real_dot(res.x.x, b);
        res.max_violation = max_ci_violation(pc, res.x);
        res.mu = mu_zero || p.s <= 0.0 ? 0.0 : 1.0 / (2.0 * p.s);
        res.active_sets = p.active;
        return res;
    };

    // s = 0: the minimum-power point; also the feasibility certificate.
    auto lo = path.evaluate(0.0, nullptr);
    ++res.iterations;
    if (!lo.ok)
    {
        res.status = SolveResult::Status::infeasible;
        return res;
    }
    res.min_power = lo.power;
    if (lo.power > P0 * (1.0 + opt.power_rel_tol))
    {
        res.status = SolveResult::Status::infeasible;
        return res;
    }
    if (b.squaredNorm() == 0.0)
        return finish(lo, true);

    const double inf = std::numeric_limits<double>::infinity();
    double s_lo = 0.0, s_hi = inf;
    detail::PathPoint cur = lo;
    detail::PathPoint best_feasible = lo;
    const auto *warm_sets = warm ? warm : &lo.active;
    std::vector<std::vector<int>> warm_store;

    for (; res.iterations < opt.max_bisections; ++res.iterations)
    {
        // Closed-form step on the current active sets, safeguarded by the bracket.
        double s_next = cur.c2 > 0.0 && P0 > cur.c0 ? std::sqrt((P0 - cur.c0) / cur.c2) : -1.0;
        if (!(s_next > s_lo && s_next < s_hi))
            s_next = s_hi == inf ? std::max(10.0 * s_lo, 1.0) : 0.5 * (s_lo + s_hi);
        if (s_next > 1e150)
            return finish(best_feasible, true); // power never reaches P0: mu = 0

        auto p = path.evaluate(s_next, warm_sets);
        if (!p.ok)
        {
            res.status = SolveResult::Status::infeasible;
            return res;
        }
        warm_store = p.active;
        warm_sets = &warm_store;

        const double gap = (p.power - P0) / P0;
        if (std::abs(gap) <= opt.power_rel_tol)
            return finish(p, false);
        if (gap < 0.0 && p.stationary)
            return finish(p, true); // power never reaches P0: mu = 0
        if (gap < 0.0)
        {
            s_lo = s_next;
            best_feasible = p;
        }
        else
            s_hi = s_next;
        if (s_hi < inf && (s_hi - s_lo) <= 1e-15 * s_hi)
            return finish(best_feasible, false);
        cur = std::move(p);
    }
    finish(best_feasible, false);
    res.status = SolveResult::Status::max_iter;
    return res;
}

inline SolveResult solve_subproblem(const CiConstraintSet &cs, const CVec &b, double P0,
                                    const SubproblemOptions &opt = {})
{
    return solve_subproblem(prepare_constraints(cs), b, P0, opt);
}

/// Minimum-power CI-feasible point, or a report that P0 cannot satisfy the QoS targets.
struct InitialPoint
{
    WaveformFrame x;
    bool feasible = false;
    double min_power = 0.0;
    std::string reason;
    std::vector<std::vector<int>> active_sets;
};

inline InitialPoint initial_feasible_point(const PreparedConstraints &pc, double P0)
{
    InitialPoint ip;
    auto mp = min_power_precoder(pc);
    ip.x = std::move(mp.frame);
    ip.active_sets = std::move(mp.active_sets);
    if (!mp.feasible)
    {
        ip.reason = "empty constructive region on subcarrier " + std::to_string(mp.infeasible_subcarriers.front());
        ip.min_power = std::numeric_limits<double>::infinity();
        return ip;
    }
    ip.min_power = ip.x.power();
    if (ip.min_power > P0 * (1.0 + 1e-12))
    {
        ip.reason = "QoS targets need " + std::to_string(ip.min_power) + " W > P0 = " + std::to_string(P0) + " W";
        return ip;
    }
    ip.feasible = true;
    return ip;
}

} // namespace islslp
