// Copyright 2026 The cvcluster Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <iostream>

#include "CLI11.hpp"
#include "cvcluster/cli.h"

namespace {

void add_common(CLI::App *cmd, cvc::RunConfig &config, std::string &format_list) {
    cmd->add_option("--seed", config.seed, "Root seed for every stochastic step");
    cmd->add_option("--out", config.out_dir, "Output directory (default $CVCLUSTER_OUT_DIR or .)");
    cmd->add_option("--format", format_list, "Comma-separated subset of csv,json,svg,bin");
    cmd->add_option("--tolerance", config.tolerance, "Pass/fail tolerance for the command's invariant");
}

void add_squeezing(CLI::App *cmd, cvc::RunConfig &config) {
    cmd->add_option("--squeeze-db", config.squeeze_db, "Squeezing of the cluster nodes in dB (magnitude)");
    cmd->add_option("--s", config.s, "Squeezing factor s (epsilon = 1/(2 s^2))");
    cmd->add_option("--delta", config.delta, "Excess anti-squeezing delta");
}

}  // namespace

int main(int argc, char **argv) {
    CLI::App app{"Finite-squeezing CV cluster-state simulator"};
    app.set_version_flag("--version", std::string(cvc::kVersion));
    app.require_subcommand(1);

    cvc::RunConfig config;
    std::string format_list;
    std::string levels;
    std::string anchor;
    std::string states;

    auto *sweep = app.add_subcommand("kappa-sweep", "Outcome-averaged gates across excess anti-squeezing");
    add_common(sweep, config, format_list);
    add_squeezing(sweep, config);
    sweep->add_option("--grid-n", config.grid_n, "Grid points per axis");
    sweep->add_option("--grid-l", config.grid_l, "Grid half-extent");
    sweep->add_option("--cases", config.cases, "Random inputs per delta");
    sweep->add_option("--samples", config.samples, "Monte Carlo samples");
    sweep->add_option("--gkp-delta", config.gkp_delta, "Width of the approximate GKP input");

    auto *table = app.add_subcommand("threshold-table", "Calibrated GKP error rates versus squeezing");
    add_common(table, config, format_list);
    table->add_option("--levels", levels, "Extra squeezing levels in dB, comma-separated");
    table->add_option("--anchor", anchor, "Calibration anchor <dB>:<p>");

    auto *del = app.add_subcommand("delete-check", "Node deletion against the never-attached construction");
    add_common(del, config, format_list);
    add_squeezing(del, config);
    del->add_option("--rows", config.rows, "Lattice rows");
    del->add_option("--cols", config.cols, "Lattice columns");
    del->add_option("--trials", config.trials, "Random deletions");

    auto *plot = app.add_subcommand("ellipse-plot", "1-sigma ellipses of squeezed thermal states");
    add_common(plot, config, format_list);
    plot->add_option("--states", states, "Comma-separated s:delta pairs");

    auto *demo = app.add_subcommand("gate-demo", "Conditioned gate with sampled outcomes");
    add_common(demo, config, format_list);
    add_squeezing(demo, config);
    demo->add_option("--gate", config.gate, "one-mode or two-mode");
    demo->add_option("--m", config.m, "Shear measurement bit for the one-mode gate");
    demo->add_flag("--average", config.average, "Also report the outcome-averaged channel");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        int code = app.exit(e);
        return code == 0 ? cvc::kExitOk : cvc::kExitConfigError;
    }

    try {
        config.command = app.get_subcommands().front()->get_name();
        if (!format_list.empty()) {
            for (const auto &f : CLI::detail::split(format_list, ',')) {
                config.formats.push_back(f);
            }
        }
        if (!levels.empty()) {
            config.levels = cvc::parse_number_list(levels);
        }
        if (!anchor.empty()) {
            config.anchor = cvc::parse_anchor(anchor);
        }
        if (plot->count("--states") > 0) {
            config.states = cvc::parse_state_list(states);
        }
        auto result = cvc::run_command(config);
        cvc::write_outputs(result, cvc::resolve_out_dir(config));
        std::cout << result.summary << "\n";
        return result.exit_code;
    } catch (const cvc::ConfigError &e) {
        std::cerr << "config error: " << e.what() << "\n";
        return cvc::kExitConfigError;
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
