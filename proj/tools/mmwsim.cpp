// SPDX-License-Identifier: Apache-2.0
//
// mmwsim - millimetre-wave transceiver impairment simulation toolkit
// Copyright (C) 2026 mmwsim contributors
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

#include "mmwsim/config.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>

namespace {

// exit-code contract: 0 success, 1 usage/validation, 2 numerical, 3 I/O
constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitNumerical = 2;
constexpr int kExitIo = 3;

int cmd_run(const std::string &config_path, const mmwsim::RunOptions &options) {
    const nlohmann::json config = mmwsim::load_config(config_path);
    const mmwsim::RunManifest manifest = mmwsim::run_experiment(config, options);
    std::cout << "config_hash " << manifest.config_hash << "\n";
    std::cout << "seed " << manifest.seed << "\n";
    std::printf("duration_s %.3f\n", manifest.duration_s);
    for (const auto &f : manifest.outputs)
        std::cout << "output " << f << "\n";
    return kExitOk;
}

int cmd_validate(const std::string &config_path) {
    const nlohmann::json config = mmwsim::load_config(config_path);
    const std::vector<std::string> violations = mmwsim::validate_experiment_config(config);
    if (violations.empty()) {
        std::cout << "valid\n";
        return kExitOk;
    }
    for (const auto &v : violations)
        std::cout << "violation: " << v << "\n";
    return kExitUsage;
}

int cmd_presets_list() {
    for (const auto &name : mmwsim::preset_names())
        std::cout << name << "  -  " << mmwsim::preset_description(name) << "\n";
    return kExitOk;
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"mmwsim - millimetre-wave transceiver impairment simulation toolkit"};
    app.require_subcommand(1);

    std::string config_path;
    mmwsim::RunOptions options;
    std::uint64_t seed_arg = 0;

    CLI::App *run = app.add_subcommand("run", "execute an experiment config");
    run->add_option("config", config_path, "experiment config (JSON)")->required();
    CLI::Option *seed_opt = run->add_option("--seed", seed_arg, "override the config seed");
    run->add_option("--out", options.out_dir, "output directory (default .)");
    run->add_option("--threads", options.threads, "worker threads for Monte-Carlo experiments");

    CLI::App *validate = app.add_subcommand("validate", "check a config against all invariants");
    std::string validate_path;
    validate->add_option("config", validate_path, "experiment config (JSON)")->required();

    CLI::App *presets = app.add_subcommand("presets", "built-in parameter presets");
    CLI::App *presets_list = presets->add_subcommand("list", "list available presets");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        return app.exit(e) == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (run->parsed()) {
            if (seed_opt->count() > 0)
                options.seed = seed_arg;
            return cmd_run(config_path, options);
        }
        if (validate->parsed())
            return cmd_validate(validate_path);
        if (presets->parsed()) {
            if (presets_list->parsed())
                return cmd_presets_list();
            std::cerr << "usage: mmwsim presets list\n";
            return kExitUsage;
        }
    } catch (const mmwsim::io_error &e) {
        std::cerr << "io error: " << e.what() << "\n";
        return kExitIo;
    } catch (const mmwsim::numerical_error &e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const std::invalid_argument &e) {
        std::cerr << "invalid config: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::domain_error &e) {
        std::cerr << "invalid config: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumerical;
    }
    return kExitUsage;
}
