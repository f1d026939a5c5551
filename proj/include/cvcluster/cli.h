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

#ifndef CVCLUSTER_CLI_H
#define CVCLUSTER_CLI_H

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "cvcluster/gaussian_state.h"
#include "cvcluster/wigner_grid.h"
#include "json.hpp"

namespace cvc {

constexpr const char *kVersion = "0.1.0";
constexpr const char *kOutDirEnv = "CVCLUSTER_OUT_DIR";

constexpr int kExitOk = 0;
constexpr int kExitInvariantBreach = 2;
constexpr int kExitConfigError = 3;

/// Invalid command-line configuration (exit code 3).
struct ConfigError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct RunConfig {
    std::string command;
    uint64_t seed = 42;
    std::string out_dir;
    /// Empty means the command's default formats.
    std::vector<std::string> formats;

    std::optional<size_t> grid_n;
    std::optional<double> grid_l;
    std::optional<double> squeeze_db;
    std::optional<double> s;
    std::optional<double> delta;
    std::vector<double> levels;
    std::optional<std::pair<double, double>> anchor;
    bool average = false;
    std::optional<double> tolerance;

    // kappa-sweep
    size_t cases = 4;
    size_t samples = 10000;
    double gkp_delta = 0.25;
    // delete-check
    int rows = 3;
    int cols = 3;
    size_t trials = 100;
    // ellipse-plot, as (s, delta) pairs; empty means the default three
    std::vector<std::pair<double, double>> states;
    // gate-demo
    std::string gate = "one-mode";
    int m = 0;
};

/// "20.5:1e-6" -> (20.5, 1e-6).
std::pair<double, double> parse_anchor(const std::string &text);
/// "15.6,17.4" -> {15.6, 17.4}.
std::vector<double> parse_number_list(const std::string &text);
/// "1.78:0.5" -> (1.78, 0.5).
std::pair<double, double> parse_state_pair(const std::string &text);
/// "1:0,1.78:0" -> {(1, 0), (1.78, 0)}. Throws ConfigError when empty.
std::vector<std::pair<double, double>> parse_state_list(const std::string &text);

/// Node spec from --s/--delta or --squeeze-db (default s = 1.78, delta = 0).
SqueezedThermalSpec resolve_squeezing(const RunConfig &config);
GridSpec resolve_grid(const RunConfig &config, GridSpec fallback);

struct OutputFile {
    std::string name;
    std::string content;
};

struct CommandResult {
    int exit_code = kExitOk;
    std::string summary;
    std::vector<OutputFile> files;
};

CommandResult cmd_kappa_sweep(const RunConfig &config);
CommandResult cmd_threshold_table(const RunConfig &config);
CommandResult cmd_delete_check(const RunConfig &config);
CommandResult cmd_ellipse_plot(const RunConfig &config);
CommandResult cmd_gate_demo(const RunConfig &config);

/// Dispatches on config.command. Throws ConfigError for unknown commands.
CommandResult run_command(const RunConfig &config);

/// Writes every file of the result into `dir` (created if missing).
void write_outputs(const CommandResult &result, const std::string &dir);

/// --out, else $CVCLUSTER_OUT_DIR, else ".".
std::string resolve_out_dir(const RunConfig &config);

}  // namespace cvc

#endif
