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


#include "islslp.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace
{
constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitInfeasible = 2;
} // namespace

int main(int argc, char **argv)
{
    CLI::App app{"Low-range-sidelobe symbol-level precoding experiments", "isl-slp"};

    std::string experiment, config_path, out_dir;
    std::vector<std::string> overrides;
    std::uint64_t seed = 0;

    std::string names;
    for (const auto &n : islslp::experiment_names())
        names += (names.empty() ? "" : ", ") + n;
    app.add_option("experiment", experiment, "One of: " + names)->required();
    app.add_option("--config", config_path, "Settings file (key = value lines)")->required();
    auto *seed_opt = app.add_option("--seed", seed, "Random seed (default: rng_seed from the configuration)");
    app.add_option("--out", out_dir, "Output directory (default: out/<experiment>)");
    app.add_option("--override", overrides, "Setting override key=value; may be repeated")->take_all();

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::CallForHelp &e)
    {
        return app.exit(e);
    }
    catch (const CLI::ParseError &e)
    {
        app.exit(e);
        return kExitUsage;
    }

    const auto &known = islslp::experiment_names();
    if (std::find(known.begin(), known.end(), experiment) == known.end())
    {
        std::cerr << "isl-slp: unknown experiment '" << experiment << "' (expected one of: " << names << ")\n";
        return kExitUsage;
    }

    islslp::ExperimentConfig cfg;
    try
    {
        auto settings = islslp::Settings::load(config_path);
        for (const auto &kv : overrides)
            settings.set_assignment(kv);
        cfg = islslp::load_experiment_config(settings, experiment);
    }
    catch (const islslp::ConfigError &e)
    {
        std::cerr << "isl-slp: " << e.what() << "\n";
        return kExitUsage;
    }
    if (!*seed_opt)
        seed = cfg.sys.rng_seed;
    if (out_dir.empty())
        out_dir = "out/" + experiment;

    try
    {
        const auto out = islslp::run_experiment(experiment, cfg, seed);
        islslp::write_outputs(out, cfg, out_dir);
        std::cout << experiment << " (seed " << seed << ") -> " << out_dir << "\n";
        for (const auto &line : out.summary)
            std::cout << "  " << line << "\n";
        if (out.infeasible_slots > 0)
        {
            std::cerr << "isl-slp: " << out.infeasible_slots
                      << " slot(s) could not meet the QoS targets within the power budget\n";
            return kExitInfeasible;
        }
    }
    catch (const islslp::ConfigError &e)
    {
        std::cerr << "isl-slp: " << e.what() << "\n";
        return kExitUsage;
    }
    catch (const std::exception &e)
    {
        std::cerr << "isl-slp: " << e.what() << "\n";
        return kExitUsage;
    }
    return kExitOk;
}
