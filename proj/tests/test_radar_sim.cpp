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
// Waveform with a^H x_n = 1 on every subcarrier.
WaveformFrame flat_frame(const ValidatedConfig &vc)
{
    const CVec a = radar_steering(vc);
    WaveformFrame f(vc.N(), vc.Nt());
    for (int n = 0; n < vc.N(); ++n)
        f.block(n) = a / a.squaredNorm();
    return f;
}

ValidatedConfig radar_config(double df = 937.5e3)
{
    SystemConfig c;
    c.subcarrier_spacing_hz = df;
    return validate_config(c);
}

RangeProfile profile_of(const std::vector<double> &mag, double bin_m = 1.0)
{
    RangeProfile p;
    p.bin_m = bin_m;
    p.magnitude = Eigen::Map<const RVec>(mag.data(), Eigen::Index(mag.size()));
    return p;
}
} // namespace

TEST_CASE("no targets and no noise give a zero echo", "[radar-sim]")
{
    const auto vc = radar_config();
    const auto e = synthesize_echo({flat_frame(vc), flat_frame(vc)}, {}, vc, 0.0, nullptr);
    REQUIRE(e.y.size() == 2);
    for (const auto &y : e.y)
        CHECK(y.norm() == 0.0);
}

TEST_CASE("single-target echo has constant modulus and a linear phase ramp", "[radar-sim]")
{
    const auto vc = radar_config();
    Rng rng = make_rng(1);
    const auto f = random_frame(vc.N(), vc.Nt(), rng);
    const CVec a = radar_steering(vc);
    const Target t{37.3, 0.0, 10.0};
    const auto e = synthesize_echo({f}, {t}, vc, 0.0, nullptr);
    const CVec c = beam_spectrum(f, a);
    const double beta = attenuation(t.rcs_dbsm, t.range_m, vc.wavelength);
    const double slope = -2.0 * kPi * vc.cfg.subcarrier_spacing_hz * 2.0 * t.range_m / kSpeedOfLight;
    const cd first = e.y[0](0) / c(0);
    for (int n = 0; n < vc.N(); ++n)
    {
        const cd ratio = e.y[0](n) / c(n);
        CHECK_THAT(std::abs(ratio), WithinRel(beta, 1e-10));
        CHECK(std::abs(ratio - first * std::polar(1.0, slope * n)) < 1e-10 * beta);
    }
}

TEST_CASE("attenuation matches the radar equation in dB", "[radar-sim]")
{
    const double lambda = kSpeedOfLight / 5.9e9;
    // 10 log10(beta^2) = sigma_dBsm + 20 log10(lambda) - 30 log10(4 pi) - 40 log10(R)
    const double beta2_db = 20.0 + 20.0 * std::log10(lambda) - 30.0 * std::log10(4.0 * kPi) - 40.0 * std::log10(20.0);
    const double beta = std::pow(10.0, beta2_db / 20.0);
    CHECK_THAT(attenuation(20.0, 20.0, lambda), WithinRel(beta, 1e-12));
    CHECK_THAT(attenuation(20.0, 20.0, lambda), WithinRel(2.8516e-5, 1e-3));
    CHECK_THAT(round_trip_delay(20.0), WithinRel(133.43e-9, 1e-3));
}

TEST_CASE("calibrated radar noise gives the reference echo SNR", "[radar-sim]")
{
    const auto vc = radar_config();
    const double beta = attenuation(20.0, 20.0, vc.wavelength);
    CHECK_THAT(radar_noise_power(vc), WithinRel(beta * beta * (0.5 / 64) / 10.0, 1e-12));
    auto c = vc.cfg;
    c.radar_noise_power = 1e-9;
    CHECK(radar_noise_power(validate_config(c)) == 1e-9);
}

TEST_CASE("out-of-range targets are rejected", "[radar-sim]")
{
    const auto vc = radar_config();
    CHECK_THROWS_AS(synthesize_echo({flat_frame(vc)}, {{0.0, 0, 0}}, vc, 0.0, nullptr), std::invalid_argument);
    CHECK_THROWS_AS(synthesize_echo({flat_frame(vc)}, {{1e4, 0, 0}}, vc, 0.0, nullptr), std::invalid_argument);
    CHECK_THROWS_AS(synthesize_echo({flat_frame(vc)}, {{20, 0, 0}}, vc, 1.0, nullptr), std::invalid_argument);
}

TEST_CASE("20 m target peaks at bin 9 with 1 MHz spacing", "[radar-sim]")
{
    const auto vc = radar_config(1e6);
    CHECK_THAT(round_trip_delay(20.0), WithinRel(133.33e-9, 1e-3));
    CHECK_THAT(vc.sample_period, WithinRel(15.625e-9, 1e-12));
    const auto f = flat_frame(vc);
    const auto e = synthesize_echo({f}, {{20.0, 0.0, 20.0}}, vc, 0.0, nullptr);
    const auto p = pmf_cc_range_profile(e, {f}, radar_steering(vc), vc.range_bin_m, 0);
    CHECK(p.peak_bin() == 9);
}

TEST_CASE("bin-centred target gives an ideal impulse for a flat waveform", "[radar-sim]")
{
    const auto vc = radar_config();
    const auto f = flat_frame(vc);
    for (int bin : {3, 8, 20, 41})
    {
        const double R = bin * vc.range_bin_m;
        const auto e = synthesize_echo({f}, {{R, 0.0, 20.0}}, vc, 0.0, nullptr);
        const auto p = pmf_cc_range_profile(e, {f}, radar_steering(vc), vc.range_bin_m, 0);
        CHECK(p.peak_bin() == bin);
        CHECK_THAT(p.meters(p.peak_bin()), WithinRel(R, 1e-12));
        CHECK(peak_sidelobe_db(p.magnitude) < -250.0);
    }
}

TEST_CASE("bin-centred target profile follows the waveform autocorrelation", "[radar-sim]")
{
    const auto vc = radar_config();
    Rng rng = make_rng(2);
    const auto f = random_frame(vc.N(), vc.Nt(), rng);
    const CVec a = radar_steering(vc);
    const int bin = 8;
    const auto e = synthesize_echo({f}, {{bin * vc.range_bin_m, 0.0, 20.0}}, vc, 0.0, nullptr);
    const auto p = pmf_cc_range_profile(e, {f}, a, vc.range_bin_m, 0);
    const RVec ac = autocorrelation_profile({f}, a);
    const double beta = attenuation(20.0, bin * vc.range_bin_m, vc.wavelength);
    for (int m = 0; m < vc.N(); ++m)
        CHECK_THAT(p.magnitude((m + bin) % vc.N()), WithinAbs(beta * ac(m), 1e-9 * beta * ac(0)));
}

TEST_CASE("averaging identical symbols reproduces the single profile", "[radar-sim]")
{
    const auto vc = radar_config();
    Rng rng = make_rng(3);
    const auto f = random_frame(vc.N(), vc.Nt(), rng);
    const CVec a = radar_steering(vc);
    const std::vector<Target> tg{{20.0, 0.0, 20.0}, {15.0, 0.0, 1.0}};
    const auto e1 = synthesize_echo({f}, tg, vc, 0.0, nullptr);
    const auto e2 = synthesize_echo({f, f}, tg, vc, 0.0, nullptr);
    const auto p1 = pmf_cc_range_profile(e1, {f}, a, vc.range_bin_m, 0);
    const auto p2 = pmf_cc_range_profile(e2, {f, f}, a, vc.range_bin_m);
    CHECK((p1.magnitude - p2.magnitude).norm() <= 1e-12 * p1.magnitude.norm());
}

TEST_CASE("stationary targets stay in the zero-Doppler column", "[radar-sim]")
{
    const auto vc = radar_config();
    Rng rng = make_rng(4);
    std::vector<WaveformFrame> frames;
    for (int l = 0; l < 8; ++l)
        frames.push_back(random_frame(vc.N(), vc.Nt(), rng));
    const CVec a = radar_steering(vc);
    // Identical echoes per symbol require identical waveforms; use the flat waveform for concentration.
    std::vector<WaveformFrame> flat(8, flat_frame(vc));
    const auto e = synthesize_echo(flat, {{20.0, 0.0, 20.0}, {15.0, 0.0, 1.0}}, vc, 0.0, nullptr);
    const auto map = range_doppler_map(e, flat, a, vc.range_bin_m);
    const double total = map.magnitude.squaredNorm();
    const double outside = total - map.magnitude.col(0).squaredNorm();
    CHECK(outside / total < 1e-20);
    const int b20 = int(std::lround(20.0 / vc.range_bin_m)), b15 = int(std::lround(15.0 / vc.range_bin_m));
    Eigen::Index peak;
    map.magnitude.col(0).maxCoeff(&peak);
    CHECK(peak == b20);
    // Weak target: local maximum at its bin in the zero-Doppler column.
    const RVec z = map.magnitude.col(0);
    CHECK(z(b15) > z(b15 - 1));
    CHECK(z(b15) > z(b15 + 1));
    (void)frames;
}

TEST_CASE("single-symbol map equals the range profile", "[radar-sim]")
{
    const auto vc = radar_config();
    Rng rng = make_rng(5);
    const auto f = random_frame(vc.N(), vc.Nt(), rng);
    const CVec a = radar_steering(vc);
    const auto e = synthesize_echo({f}, {{22.0, 0.0, 20.0}}, vc, 0.0, nullptr);
    const auto map = range_doppler_map(e, {f}, a, vc.range_bin_m);
    const auto p = pmf_cc_range_profile(e, {f}, a, vc.range_bin_m, 0);
    REQUIRE(map.magnitude.cols() == 1);
    CHECK((map.magnitude.col(0) - p.magnitude).norm() <= 1e-12 * p.magnitude.norm());
}

TEST_CASE("echo synthesis is additive over targets", "[radar-sim]")
{
    const auto vc = radar_config();
    Rng rng = make_rng(6);
    const std::vector<WaveformFrame> f{random_frame(vc.N(), vc.Nt(), rng), random_frame(vc.N(), vc.Nt(), rng)};
    const Target t1{18.2, 0.1, 5.0}, t2{31.7, -0.2, 12.0};
    const auto e1 = synthesize_echo(f, {t1}, vc, 0.0, nullptr);
    const auto e2 = synthesize_echo(f, {t2}, vc, 0.0, nullptr);
    const auto e12 = synthesize_echo(f, {t1, t2}, vc, 0.0, nullptr);
    for (std::size_t l = 0; l < 2; ++l)
        CHECK((e12.y[l] - e1.y[l] - e2.y[l]).norm() <= 1e-14 * e12.y[l].norm());
}

TEST_CASE("doubling the noise power raises the floor by 3 dB", "[radar-sim]")
{
    const auto vc = radar_config();
    const auto f = flat_frame(vc);
    const CVec a = radar_steering(vc);
    auto floor_power = [&](double s2, std::uint64_t seed) {
        Rng rng = make_rng(seed);
        double acc = 0.0;
        for (int t = 0; t < 100; ++t)
        {
            const auto e = synthesize_echo({f}, {{20.0, 0.0, 20.0}}, vc, s2, &rng);
            const auto p = pmf_cc_range_profile(e, {f}, a, vc.range_bin_m, 0);
            const int peak = p.peak_bin();
            for (int m = 0; m < p.size(); ++m)
                if (detail::circular_distance(m, peak, p.size()) > 1)
                    acc += p.magnitude(m) * p.magnitude(m);
        }
        return acc;
    };
    const double s2 = radar_noise_power(vc);
    const double ratio_db = 10.0 * std::log10(floor_power(2.0 * s2, 8) / floor_power(s2, 7));
    CHECK_THAT(ratio_db, WithinAbs(3.0103, 0.5));
}

TEST_CASE("two-target detection", "[radar-sim]")
{
    SECTION("two impulses are recovered exactly")
    {
        std::vector<double> m(32, 0.01);
        m[8] = 10.0;
        m[20] = 1.0;
        const auto d = detect_two_targets(profile_of(m));
        CHECK(d.strong == 8);
        CHECK(d.weak == 20);
    }
    SECTION("a high sidelobe wins over a weak target")
    {
        // Strong target at 8 with a sidelobe at 12 above the weak target at 6.
        std::vector<double> m(32, 0.01);
        m[8] = 10.0;
        m[12] = 3.0;
        m[6] = 1.0;
        const auto d = detect_two_targets(profile_of(m));
        CHECK(d.strong == 8);
        CHECK(d.weak != 6);
    }
    SECTION("the masked detector ignores the strong mainlobe")
    {
        std::vector<double> m(32, 0.01);
        m[8] = 10.0;
        m[9] = 5.0; // mainlobe shoulder
        m[10] = 1.0;
        m[11] = 0.5;
        const auto d = detect_two_targets(profile_of(m), {0, true});
        CHECK(d.weak == 9);
        const auto g = detect_two_targets(profile_of(m), {1, true});
        CHECK(g.weak == 10);
    }
    SECTION("no secondary maximum throws")
    {
        std::vector<double> m(8, 1.0);
        m[0] = 2.0;
        CHECK_THROWS_AS(detect_two_targets(profile_of(m), {2, false}), DetectionError);
        CHECK_THROWS_AS(detect_two_targets(profile_of(std::vector<double>(4, 1.0)), {2, false}), std::invalid_argument);
    }
}

TEST_CASE("bin-centred estimates are within the quantization bound", "[radar-sim]")
{
    const auto vc = radar_config();
    const auto f = flat_frame(vc);
    const CVec a = radar_steering(vc);
    double se = 0.0;
    int count = 0;
    for (int bin = 2; bin < 40; ++bin)
    {
        const double R = bin * vc.range_bin_m;
        const auto e = synthesize_echo({f}, {{R, 0.0, 10.0}}, vc, 0.0, nullptr);
        const auto p = pmf_cc_range_profile(e, {f}, a, vc.range_bin_m, 0);
        const int m = p.peak_bin();
        const double est = p.meters(m + parabolic_offset(p, m));
        se += (est - R) * (est - R);
        ++count;
    }
    CHECK(std::sqrt(se / count) <= vc.range_bin_m / std::sqrt(12.0));
}

TEST_CASE("parabolic refinement", "[radar-sim]")
{
    // Log-magnitudes on an exact parabola with vertex at 5.3.
    std::vector<double> m(16);
    for (int i = 0; i < 16; ++i)
        m[std::size_t(i)] = std::exp(-0.5 * (i - 5.3) * (i - 5.3));
    const auto p = profile_of(m);
    CHECK_THAT(parabolic_offset(p, 5), WithinAbs(0.3, 1e-12));
    CHECK(parabolic_offset(p, 5, [](Eigen::Index i) { return i == 6; }) == 0.0);
    std::vector<double> flat(16, 1.0);
    CHECK(parabolic_offset(profile_of(flat), 3) == 0.0);
}

TEST_CASE("weak-target margin of an ideal waveform", "[radar-sim]")
{
    // Flat waveform, bin-centred targets: the strong target has no sidelobes, so the margin is huge.
    const auto vc = radar_config();
    const auto f = flat_frame(vc);
    const Target strong{8 * vc.range_bin_m, 0.0, 20.0}, weak{6 * vc.range_bin_m, 0.0, 1.0};
    CHECK(weak_target_margin_db({f}, radar_steering(vc), vc, strong, weak) > 100.0);
}

TEST_CASE("Monte Carlo RMSE is reproducible", "[radar-sim]")
{
    auto c = make_config(64, 8, 3).cfg;
    c.max_iters = 20;
    const auto vc = validate_config(c);
    RmseScenario sc;
    sc.n_symbols = 2;
    const auto src = slot_design_source(WaveformKind::comm_only);
    const auto r1 = monte_carlo_rmse(vc, sc, src, 1, 42);
    const auto r2 = monte_carlo_rmse(vc, sc, src, 1, 42);
    CHECK(r1.rmse_m == r2.rmse_m);
    CHECK(r1.used == 1);
    CHECK(r1.per_trial[0].true_range_m >= 20.0);
    CHECK(r1.per_trial[0].true_range_m <= 25.0);
    CHECK_THROWS_AS(monte_carlo_rmse(vc, sc, src, 0, 42), std::invalid_argument);
}

TEST_CASE("infeasible trials are excluded from the RMSE", "[radar-sim]")
{
    const auto vc = make_config(64, 8, 3, 6.0, -30.0);
    RmseScenario sc;
    sc.n_symbols = 1;
    const auto r = monte_carlo_rmse(vc, sc, slot_design_source(WaveformKind::comm_only), 3, 1);
    CHECK(r.infeasible == 3);
    CHECK(r.used == 0);
    CHECK(std::isnan(r.rmse_m));
}

TEST_CASE("proposed waveform lifts the weak target above the strong target's sidelobes", "[radar-sim]")
{
    const auto vc = validate_config(SystemConfig{});
    const auto real = draw_realization(vc, 1, 0, 32);
    const CVec a = radar_steering(vc);
    std::array<std::vector<WaveformFrame>, 2> frames;
    for (const auto &s : real.symbols.slots)
        for (std::size_t w = 0; w < 2; ++w)
        {
            auto d = design_slot(vc, real.channel, s, a, w ? WaveformKind::comm_only : WaveformKind::proposed);
            REQUIRE(d.feasible);
            frames[w].push_back(d.x);
        }
    const Target strong{20.0, 0.0, 20.0}, weak{15.0, 0.0, 1.0};
    const int b20 = int(std::lround(20.0 / vc.range_bin_m)), b15 = int(std::lround(15.0 / vc.range_bin_m));

    const auto e = synthesize_echo(frames[0], {strong, weak}, vc, 0.0, nullptr);
    const auto p = pmf_cc_range_profile(e, frames[0], a, vc.range_bin_m);
    CHECK(p.peak_bin() == b20);
    CHECK(p.magnitude(b15) > p.magnitude(b15 - 1));
    CHECK(p.magnitude(b15) > p.magnitude(b15 + 1));

    const double proposed = weak_target_margin_db(frames[0], a, vc, strong, weak);
    const double comm = weak_target_margin_db(frames[1], a, vc, strong, weak);
    CHECK(proposed >= 3.0);
    CHECK(proposed > comm);
}
