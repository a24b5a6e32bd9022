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

#include "test_support.hpp"

#include <catch_amalgamated.hpp>

using namespace islslp;
using namespace islslp::testing;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace
{
// Frame whose projected amplitudes a^H x_n equal c (x_n = c a / ||a||^2).
WaveformFrame frame_with_amplitudes(const CVec &c, const CVec &a)
{
    WaveformFrame f(int(c.size()), int(a.size()));
    for (Eigen::Index n = 0; n < c.size(); ++n)
        f.block(int(n)) = c(n) * a / a.squaredNorm();
    return f;
}

// x[p] = (1/sqrt(N)) sum_n c_n e^{j 2 pi n p / N}, summed directly.
CVec direct_samples(const CVec &c)
{
    const auto N = c.size();
    CVec x = CVec::Zero(N);
    for (Eigen::Index p = 0; p < N; ++p)
        for (Eigen::Index n = 0; n < N; ++n)
            x(p) += c(n) * std::polar(1.0, 2.0 * kPi * double(n * p) / double(N));
    return x / std::sqrt(double(N));
}
} // namespace

TEST_CASE("steering vector closed forms", "[radar-metrics]")
{
    const CVec a0 = steering_vector(0.0, 5, 0.5);
    CHECK((a0 - CVec::Ones(5)).norm() < 1e-15);

    const CVec a1 = steering_vector(kPi / 2, 4, 0.5);
    const CVec expect = (CVec(4) << 1, -1, 1, -1).finished();
    CHECK((a1 - expect).norm() < 1e-14);

    Rng rng = make_rng(1);
    std::uniform_real_distribution<double> u(-kPi, kPi);
    for (int i = 0; i < 100; ++i)
        CHECK_THAT(steering_vector(u(rng), 8, 0.5).squaredNorm(), WithinRel(8.0, 1e-14));
    CHECK_THROWS_AS(steering_vector(0.0, 0, 0.5), std::invalid_argument);
}

TEST_CASE("emitted samples match the direct sum", "[radar-metrics]")
{
    Rng rng = make_rng(2);
    const CVec c = complex_gaussian_vector(rng, 16);
    CHECK((emitted_samples_from_spectrum(c) - direct_samples(c)).norm() < 1e-12);
}

TEST_CASE("single tone gives a constant-modulus signal", "[radar-metrics]")
{
    const int N = 16, n0 = 5;
    const cd amp{1.5, -0.5};
    CVec c = CVec::Zero(N);
    c(n0) = amp;
    const CVec a = steering_vector(0.3, 4, 0.5);
    const CVec x = emitted_samples(frame_with_amplitudes(c, a), a);
    for (int p = 0; p < N; ++p)
        CHECK(std::abs(x(p) - amp / std::sqrt(double(N)) * std::polar(1.0, 2.0 * kPi * n0 * p / N)) < 1e-12);
}

TEST_CASE("constant amplitudes give an impulse", "[radar-metrics]")
{
    const int N = 16;
    const cd amp{0.4, 0.9};
    const CVec x = emitted_samples_from_spectrum(CVec::Constant(N, amp));
    CHECK(std::abs(x(0) - amp * std::sqrt(double(N))) < 1e-12);
    for (int p = 1; p < N; ++p)
        CHECK(std::abs(x(p)) < 1e-12);
}

TEST_CASE("emitted energy equals beam power", "[radar-metrics]")
{
    Rng rng = make_rng(3);
    for (int t = 0; t < 20; ++t)
    {
        const auto f = random_frame(64, 8, rng);
        const CVec a = random_steering(8, rng);
        CHECK_THAT(emitted_samples(f, a).squaredNorm(), WithinRel(beam_power(f, a), 1e-10));
    }
}

TEST_CASE("circular autocorrelation", "[radar-metrics]")
{
    SECTION("impulse")
    {
        CVec x = CVec::Zero(8);
        x(0) = 1.0;
        const CVec r = circular_autocorrelation(x);
        CHECK(std::abs(r(0) - 1.0) < 1e-15);
        for (int m = 1; m < 8; ++m)
            CHECK(std::abs(r(m)) < 1e-15);
        CHECK(isl_time_domain(r) < 1e-30);
    }
    SECTION("pure tone has flat magnitude c^2")
    {
        const int N = 8, n0 = 3;
        const double c = 1.7;
        CVec x(N);
        for (int p = 0; p < N; ++p)
            x(p) = c / std::sqrt(double(N)) * std::polar(1.0, 2.0 * kPi * n0 * p / N);
        const CVec r = circular_autocorrelation_direct(x);
        const CVec rf = circular_autocorrelation(x);
        for (int m = 0; m < N; ++m)
        {
            CHECK_THAT(std::abs(r(m)), WithinRel(c * c, 1e-12));
            CHECK(std::abs(rf(m) - r(m)) < 1e-12);
        }
        CHECK_THAT(isl_time_domain(r), WithinRel((N - 1) * std::pow(c, 4), 1e-12));
    }
    SECTION("transform path agrees with the direct sum")
    {
        Rng rng = make_rng(4);
        for (int t = 0; t < 10; ++t)
        {
            const CVec x = complex_gaussian_vector(rng, 16);
            CHECK((circular_autocorrelation(x) - circular_autocorrelation_direct(x)).norm() <
                  1e-10 * x.squaredNorm());
        }
    }
    SECTION("ISL is non-negative")
    {
        Rng rng = make_rng(5);
        for (int t = 0; t < 50; ++t)
            CHECK(isl_time_domain(circular_autocorrelation(complex_gaussian_vector(rng, 12))) >= 0.0);
    }
}

TEST_CASE("amplitude-domain ISL closed forms", "[radar-metrics]")
{
    const int N = 16;
    const CVec a = steering_vector(0.2, 4, 0.5);
    CHECK(isl_analytic(frame_with_amplitudes(CVec::Constant(N, cd(0.3, 0.4)), a), a) < 1e-15);

    Rng rng = make_rng(6);
    CVec eq(N);
    for (int n = 0; n < N; ++n)
        eq(n) = std::polar(2.0, std::uniform_real_distribution<double>(0, 2 * kPi)(rng));
    CHECK_THAT(isl_analytic(frame_with_amplitudes(eq, a), a), WithinAbs(0.0, 1e-12));

    const double c = 1.3;
    CVec tone = CVec::Zero(N);
    tone(7) = c;
    CHECK_THAT(isl_analytic(frame_with_amplitudes(tone, a), a), WithinRel(2 * std::pow(c, 4) * (N - 1) / (N * N), 1e-12));
}

TEST_CASE("amplitude-domain ISL is 2/N^2 times the time-domain ISL", "[radar-metrics][property]")
{
    Rng rng = make_rng(7);
    for (int t = 0; t < 100; ++t)
    {
        const int N = t % 2 ? 8 : 64, Nt = t % 2 ? 2 : 8;
        const auto f = random_frame(N, Nt, rng);
        const CVec a = random_steering(Nt, rng);
        const double time = isl_time_domain(circular_autocorrelation_direct(emitted_samples(f, a)));
        CHECK_THAT(isl_analytic(f, a), WithinRel(2.0 / (double(N) * N) * time, 1e-9));
    }
}

TEST_CASE("structured quadratics match dense matrices", "[radar-metrics]")
{
    const int N = 2, Nt = 2;
    Rng rng = make_rng(8);
    for (int t = 0; t < 10; ++t)
    {
        const auto f = random_frame(N, Nt, rng);
        const CVec a = random_steering(Nt, rng);
        const auto q = structured_quadratics(f, a);
        const CMat At = dense_Atilde(a, N);
        const CVec xt = vec(f.x * f.x.adjoint());
        const double beam = real_dot(f.x, At * f.x);
        const double fourth = real_dot(xt, dense_AhA(a, N) * xt);
        CHECK_THAT(q.beam_power, WithinRel(beam, 1e-12));
        CHECK_THAT(q.fourth_power, WithinRel(fourth, 1e-12));
        for (int n = 0; n < N; ++n)
            CHECK(std::abs(q.amplitudes(n) - stacked_steering(a, N, n).dot(f.x)) < 1e-12);
        CHECK_THAT(isl_quadratic_form(q, N), WithinRel(isl_analytic(f, a), 1e-10));
    }
    const auto z = structured_quadratics(WaveformFrame(3, 2), steering_vector(0.1, 2, 0.5));
    CHECK(z.beam_power == 0.0);
    CHECK(z.fourth_power == 0.0);
}

TEST_CASE("quadratic and moment forms of the ISL agree", "[radar-metrics][property]")
{
    Rng rng = make_rng(9);
    for (int t = 0; t < 100; ++t)
    {
        const auto f = random_frame(64, 8, rng);
        const CVec a = random_steering(8, rng);
        CHECK_THAT(isl_quadratic_form(structured_quadratics(f, a), 64), WithinRel(isl_analytic(f, a), 1e-10));
        CHECK_THAT(xi(f, a), WithinRel(isl_analytic(f, a), 1e-10));
    }
}

TEST_CASE("beam power is bounded by N_t ||x||^2", "[radar-metrics][property]")
{
    Rng rng = make_rng(10);
    for (int t = 0; t < 100; ++t)
    {
        const auto f = random_frame(16, 4, rng);
        const CVec a = random_steering(4, rng);
        CHECK(structured_quadratics(f, a).beam_power <= 4.0 * f.power() * (1 + 1e-12));
    }
}

TEST_CASE("ISL is invariant to a common phase and non-negative", "[radar-metrics][property]")
{
    Rng rng = make_rng(11);
    std::uniform_real_distribution<double> u(0, 2 * kPi);
    for (int t = 0; t < 100; ++t)
    {
        auto f = random_frame(32, 4, rng);
        const CVec a = random_steering(4, rng);
        const double before = isl_analytic(f, a);
        CHECK(before >= 0.0);
        f.x *= std::polar(1.0, u(rng));
        CHECK_THAT(isl_analytic(f, a), WithinRel(before, 1e-12));
    }
}

TEST_CASE("normalized ISL is scale free", "[radar-metrics]")
{
    Rng rng = make_rng(12);
    auto f = random_frame(32, 4, rng);
    const CVec a = random_steering(4, rng);
    const double v = normalized_isl(f, a);
    const CVec r = circular_autocorrelation(emitted_samples(f, a));
    CHECK_THAT(v, WithinRel(isl_time_domain(r) / std::norm(r(0)), 1e-10));
    f.x *= 7.0;
    CHECK_THAT(normalized_isl(f, a), WithinRel(v, 1e-12));
    CHECK(normalized_isl(WaveformFrame(4, 4), a) == 0.0);
}

TEST_CASE("length-one transforms", "[radar-metrics]")
{
    const CVec c = CVec::Constant(1, cd(0.6, -0.8));
    CHECK(std::abs(emitted_samples_from_spectrum(c)(0) - c(0)) < 1e-15);
    const CVec r = circular_autocorrelation(c);
    CHECK(std::abs(r(0) - 1.0) < 1e-15);
    CHECK(isl_time_domain(r) == 0.0);
}
