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

#include <cstdlib>
#include <filesystem>
#include <fstream>

using namespace islslp;
using namespace islslp::testing;
using Catch::Matchers::WithinRel;

namespace fs = std::filesystem;

namespace
{
ExperimentConfig small_config()
{
    ExperimentConfig c;
    c.sys.n_subcarriers = 16;
    c.sys.n_tx = 4;
    c.sys.n_users = 2;
    c.sys.cp_len = 8;
    c.sys.max_iters = 20;
    c.sys.n_symbols = 2;
    c.gamma_sweep_db = {0, 6};
    c.users_sweep = {2};
    c.rmse_gamma_db = {6};
    c.n_seeds = 2;
    c.rmse_trials = 3;
    return c;
}

std::string slurp(const fs::path &p)
{
    std::ifstream f(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

fs::path scratch(const std::string &name)
{
    const auto p = fs::temp_directory_path() / ("islslp_test_" + name);
    fs::remove_all(p);
    return p;
}

std::string all_csv(const ExperimentOutput &o)
{
    std::string s;
    for (const auto &[n, t] : o.files)
        s += n + "\n" + to_csv_text(t);
    return s;
}

class ThreadEnv
{
  public:
    explicit ThreadEnv(const char *v)
    {
        if (const char *old = std::getenv("ISL_SLP_THREADS"))
            old_ = old;
        setenv("ISL_SLP_THREADS", v, 1);
    }
    ~ThreadEnv()
    {
        if (old_.empty())
            unsetenv("ISL_SLP_THREADS");
        else
            setenv("ISL_SLP_THREADS", old_.c_str(), 1);
    }

  private:
    std::string old_;
};
} // namespace

TEST_CASE("CSV tables", "[experiments]")
{
    SECTION("empty table is header only")
    {
        CHECK(to_csv_text(CsvTable({"a", "b"})) == "a,b\n");
    }
    SECTION("round trip keeps values")
    {
        CsvTable t({"x", "y"});
        Rng rng = make_rng(1);
        std::normal_distribution<double> d(0.0, 1e3);
        std::vector<double> xs;
        for (int i = 0; i < 50; ++i)
        {
            xs.push_back(d(rng));
            t.add_row({i, xs.back()});
        }
        t.add_row({50, std::numeric_limits<double>::quiet_NaN()});
        const auto p = scratch("roundtrip.csv");
        export_csv(t, p.string());
        const auto u = load_csv(p.string());
        REQUIRE(u.header == t.header);
        const auto ys = u.numbers("y");
        for (int i = 0; i < 50; ++i)
            CHECK_THAT(ys[std::size_t(i)], WithinRel(xs[std::size_t(i)], 1e-10));
        CHECK(std::isnan(ys[50]));
        CHECK(slurp(p) == to_csv_text(t));
        fs::remove(p);
    }
    SECTION("row width must match the header")
    {
        CsvTable t({"a", "b"});
        CHECK_THROWS_AS(t.add_row({1}), std::invalid_argument);
        CHECK_THROWS_AS(t.column("c"), std::out_of_range);
    }
    SECTION("unwritable path")
    {
        CHECK_THROWS(export_csv(CsvTable({"a"}), "/nonexistent_dir_islslp/x.csv"));
    }
}

TEST_CASE("unknown experiment names are rejected", "[experiments]")
{
    CHECK_THROWS_AS(run_experiment("nope", small_config(), 1), UnknownExperiment);
}

TEST_CASE("experiments are reproducible across reruns and thread counts", "[experiments]")
{
    const auto cfg = small_config();
    for (const auto &name : experiment_names())
    {
        INFO(name);
        std::string first, second, single;
        first = all_csv(run_experiment(name, cfg, 5));
        second = all_csv(run_experiment(name, cfg, 5));
        {
            ThreadEnv env("1");
            single = all_csv(run_experiment(name, cfg, 5));
        }
        CHECK(first == second);
        CHECK(first == single);
        CHECK(first.size() > 0);
    }
}

TEST_CASE("different seeds give different realizations", "[experiments]")
{
    const auto cfg = small_config();
    CHECK(all_csv(run_experiment("range_profile", cfg, 1)) != all_csv(run_experiment("range_profile", cfg, 2)));
}

TEST_CASE("convergence trace is non-increasing", "[experiments]")
{
    auto cfg = small_config();
    cfg.sys.max_iters = 60;
    const auto out = run_experiment("convergence", cfg, 3);
    const auto &t = out.file("convergence.csv");
    const auto isl = t.numbers("isl");
    REQUIRE(isl.size() >= 2);
    for (std::size_t i = 1; i < isl.size(); ++i)
        CHECK(isl[i] <= isl[i - 1] + 1e-12 * isl.front());
    const auto iter = t.numbers("iter");
    CHECK(iter.front() == 0.0);
}

TEST_CASE("isl sweep rows cover the grid", "[experiments]")
{
    const auto cfg = small_config();
    const auto out = run_experiment("isl_vs_gamma", cfg, 4);
    const auto &t = out.file("isl_vs_gamma.csv");
    CHECK(t.rows.size() == cfg.users_sweep.size() * cfg.gamma_sweep_db.size());
    const auto rel = t.numbers("relative_db");
    for (double r : rel)
        CHECK(r < 0.0);
}

TEST_CASE("write_outputs produces a rerunnable manifest", "[experiments]")
{
    const auto cfg = small_config();
    const auto out = run_experiment("range_profile", cfg, 9);
    const auto dir = scratch("outputs");
    write_outputs(out, cfg, dir.string());
    REQUIRE(fs::exists(dir / "manifest.json"));
    REQUIRE(fs::exists(dir / "config.resolved.cfg"));
    REQUIRE(fs::exists(dir / "range_profile.csv"));

    const auto m = nlohmann::json::parse(slurp(dir / "manifest.json"));
    CHECK(m["experiment"] == "range_profile");
    CHECK(m["seed"] == 9);
    for (const auto &f : m["outputs"])
        CHECK(f["sha1"] == git_blob_hash(slurp(dir / f["name"].get<std::string>())));

    const auto reloaded = load_experiment_config(Settings::load((dir / "config.resolved.cfg").string()), "range_profile");
    CHECK(to_settings_text(reloaded) == to_settings_text(cfg));
    CHECK(all_csv(run_experiment("range_profile", reloaded, 9)) == all_csv(out));
    fs::remove_all(dir);
}

TEST_CASE("infeasible slots are counted, not fatal", "[experiments]")
{
    auto cfg = small_config();
    cfg.sys.channel_gain_db = -30;
    const auto out = run_experiment("range_profile", cfg, 1);
    CHECK(out.infeasible_slots == 2 * cfg.sys.n_symbols);
}
