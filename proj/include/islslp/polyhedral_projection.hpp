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

#include "comm_model.hpp"
#include "types.hpp"

#include <algorithm>
#include <limits>
#include <vector>

namespace islslp
{

// Euclidean projection onto a polyhedron P = {z : <g_i, z> >= gamma_i} in the real inner
// product <u, v> = Re{u^H v}. The dual active-set method of Goldfarb and Idnani, specialized to an
// identity Hessian, only ever touches the rows through their Gram matrix Q_ij = <g_i, g_j> and the
// products q_i = <g_i, v>, so one projection costs O(m^3) with m the number of rows.
//
// The projection is z = v + sum_i lambda_i g_i with lambda >= 0.
struct GramProjection
{
    enum class Status
    {
        optimal,
        infeasible,
        max_iter
    };

    Status status = Status::optimal;
    RVec lambda;
    std::vector<int> active;
    int iterations = 0;
};

namespace detail
{
inline RVec solve_active(const RMat &Q, const std::vector<int> &A, const RVec &rhs, bool *ok = nullptr)
{
    const auto k = Eigen::Index(A.size());
    RMat M(k, k);
    for (Eigen::Index i = 0; i < k; ++i)
        for (Eigen::Index j = 0; j < k; ++j)
            M(i, j) = Q(A[std::size_t(i)], A[std::size_t(j)]);
    Eigen::LLT<RMat> llt(M);
    if (ok)
        *ok = llt.info() == Eigen::Success;
    return llt.solve(rhs);
}

inline double slack_tolerance(double gamma, double q, double qlam)
{
    return 1e-12 * (std::abs(gamma) + std::abs(q) + std::abs(qlam));
}
} // namespace detail

// Checks whether a guessed active set is optimal; fills `out` and returns true on success.
inline bool try_active_set(const RMat &Q, const RVec &q, const RVec &gamma, const std::vector<int> &A,
                           GramProjection &out)
{
    const auto m = Q.rows();
    RVec lambda = RVec::Zero(m);
    if (!A.empty())
    {
        RVec rhs(Eigen::Index(A.size()));
        for (std::size_t i = 0; i < A.size(); ++i)
            rhs(Eigen::Index(i)) = gamma(A[i]) - q(A[i]);
        bool ok = false;
        RVec la = detail::solve_active(Q, A, rhs, &ok);
        if (!ok)
            return false;
        const double scale = la.cwiseAbs().maxCoeff();
        for (std::size_t i = 0; i < A.size(); ++i)
        {
            if (la(Eigen::Index(i)) < -1e-12 * scale)
                return false;
            lambda(A[i]) = std::max(0.0, la(Eigen::Index(i)));
        }
    }
    const RVec qlam = Q * lambda;
    for (Eigen::Index i = 0; i < m; ++i)
    {
        const double s = q(i) + qlam(i) - gamma(i);
        if (s < -detail::slack_tolerance(gamma(i), q(i), qlam(i)))
            return false;
    }
    out.status = GramProjection::Status::optimal;
    out.lambda = std::move(lambda);
    out.active = A;
    out.iterations = 0;
    return true;
}

inline GramProjection project_gram(const RMat &Q, const RVec &q, const RVec &gamma,
                                   const std::vector<int> *warm_active = nullptr)
{
    const auto m = Q.rows();
    GramProjection res;
    if (warm_active && try_active_set(Q, q, gamma, *warm_active, res))
        return res;

    res.lambda = RVec::Zero(m);
    res.active.clear();
    std::vector<char> in_active(std::size_t(m), 0);
    RVec slack = q - gamma;
    const int max_iter = 50 + 10 * int(m * m);

    auto refresh_slack = [&] { slack = q + Q * res.lambda - gamma; };

    for (res.iterations = 0; res.iterations < max_iter; ++res.iterations)
    {
        // Most violated inactive constraint.
        int p = -1;
        double worst = 0.0;
        const RVec qlam = Q * res.lambda;
        for (Eigen::Index i = 0; i < m; ++i)
        {
            if (in_active[std::size_t(i)])
                continue;
            const double tol = detail::slack_tolerance(gamma(i), q(i), qlam(i));
            if (slack(i) < -tol && slack(i) < worst)
            {
                worst = slack(i);
                p = int(i);
            }
        }
        if (p < 0)
        {
            res.status = GramProjection::Status::optimal;
            return res;
        }

        // Drive constraint p to equality, dropping active constraints whose multipliers hit zero.
        for (int inner = 0; inner <= int(m); ++inner)
        {
            const auto k = Eigen::Index(res.active.size());
            RVec r(k);
            if (k > 0)
            {
                RVec qa(k);
                for (Eigen::Index j = 0; j < k; ++j)
                    qa(j) = Q(res.active[std::size_t(j)], p);
                r = detail::solve_active(Q, res.active, qa);
            }
            double dd = Q(p, p);
            for (Eigen::Index j = 0; j < k; ++j)
                dd -= Q(p, res.active[std::size_t(j)]) * r(j);

            const double inf = std::numeric_limits<double>::infinity();
            double t1 = inf;
            int block = -1;
            const double rscale = k > 0 ? std::max(1.0, r.cwiseAbs().maxCoeff()) : 1.0;
            for (Eigen::Index j = 0; j < k; ++j)
            {
                if (r(j) > 1e-13 * rscale)
                {
                    const double t = res.lambda(res.active[std::size_t(j)]) / r(j);
                    if (t < t1)
                    {
                        t1 = t;
                        block = int(j);
                    }
                }
            }
            const double t2 = dd > 1e-12 * Q(p, p) ? -slack(p) / dd : inf;
            if (t1 == inf && t2 == inf)
            {
                res.status = GramProjection::Status::infeasible;
                return res;
            }
            const double t = std::min(t1, t2);
            res.lambda(p) += t;
            for (Eigen::Index j = 0; j < k; ++j)
                res.lambda(res.active[std::size_t(j)]) -= t * r(j);
            refresh_slack();

            if (t2 <= t1)
            {
                res.active.push_back(p);
                in_active[std::size_t(p)] = 1;
                break;
            }
            const int dropped = res.active[std::size_t(block)];
            res.lambda(dropped) = 0.0;
            in_active[std::size_t(dropped)] = 0;
            res.active.erase(res.active.begin() + block);
            refresh_slack();
        }
    }
    res.status = GramProjection::Status::max_iter;
    return res;
}

// Per-subcarrier constraint data in the form the solvers consume: non-degenerate rows only,
// plus their Gram matrix.
struct PreparedBlock
{
    CMat rows;  // N_t x m
    RVec gamma; // m
    RMat gram;  // m x m
    bool infeasible = false; // a zero row with gamma > 0
};

inline constexpr double kDegenerateRowNorm = 1e-12;

inline PreparedBlock prepare_block(const CMat &rows, const RVec &gamma)
{
    PreparedBlock b;
    std::vector<Eigen::Index> keep;
    for (Eigen::Index i = 0; i < rows.cols(); ++i)
    {
        if (rows.col(i).norm() < kDegenerateRowNorm)
        {
            if (gamma(i) > 0.0)
                b.infeasible = true;
            continue;
        }
        keep.push_back(i);
    }
    const auto m = Eigen::Index(keep.size());
    b.rows.resize(rows.rows(), m);
    b.gamma.resize(m);
    for (Eigen::Index j = 0; j < m; ++j)
    {
        b.rows.col(j) = rows.col(keep[std::size_t(j)]);
        b.gamma(j) = gamma(keep[std::size_t(j)]);
    }
    b.gram = (b.rows.adjoint() * b.rows).real();
    return b;
}

struct PreparedConstraints
{
    int n_tx = 0;
    std::vector<PreparedBlock> blocks;

    int n_subcarriers() const { return int(blocks.size()); }
};

inline PreparedConstraints prepare_constraints(const CiConstraintSet &cs)
{
    PreparedConstraints p;
    p.n_tx = cs.n_tx;
    p.blocks.reserve(std::size_t(cs.n_subcarriers()));
    for (int n = 0; n < cs.n_subcarriers(); ++n)
        p.blocks.push_back(prepare_block(cs.rows[std::size_t(n)], cs.gamma[std::size_t(n)]));
    return p;
}

// <g_i, v> for every row.
inline RVec row_products(const PreparedBlock &b, const Eigen::Ref<const CVec> &v)
{
    return (b.rows.adjoint() * v).real();
}

inline CVec reconstruct(const PreparedBlock &b, const Eigen::Ref<const CVec> &v, const RVec &lambda)
{
    return v + b.rows * lambda.cast<cd>();
}

} // namespace islslp
