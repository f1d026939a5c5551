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

#include "cvcluster/cli.h"

#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "cvcluster/threshold.h"
#include "test_util.h"

using namespace cvc;

namespace {

const OutputFile &file_named(const CommandResult &r, const std::string &name) {
    for (const auto &f : r.files) {
        if (f.name == name) {
            return f;
        }
    }
    throw std::runtime_error("no output named " + name);
}

std::vector<std::string> data_lines(const std::string &csv) {
    std::vector<std::string> out;
    std::istringstream in(csv);
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line[0] != '#') {
            out.push_back(line);
        }
    }
    return out;
}

int run_tool(const std::string &args) {
    std::string cmd = std::string(CVCLUSTER_TOOL_PATH) + " " + args + " > /dev/null 2>&1";
    int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::filesystem::path scratch_dir(const std::string &name) {
    auto dir = std::filesystem::temp_directory_path() / ("cvcluster_cli_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

RunConfig config_for(const std::string &command) {
    RunConfig c;
    c.command = command;
    return c;
}

}  // namespace

TEST(cli_parse, anchor_and_lists) {
    auto a = parse_anchor("20.5:1e-6");
    EXPECT_EQ(a.first, 20.5);
    EXPECT_EQ(a.second, 1e-6);
    EXPECT_THROW(parse_anchor("20.5"), ConfigError);
    EXPECT_THROW(parse_anchor("x:1e-6"), ConfigError);
    EXPECT_EQ(parse_number_list("15.6,17.4"), (std::vector<double>{15.6, 17.4}));
    EXPECT_THROW(parse_number_list("1,,2"), ConfigError);
    auto states = parse_state_list("1:0,1.78:0.5");
    ASSERT_EQ(states.size(), 2u);
    EXPECT_EQ(states[1].second, 0.5);
    EXPECT_THROW(parse_state_list(""), ConfigError);
}

TEST(cli_parse, squeezing_resolution) {
    auto c = config_for("gate-demo");
    EXPECT_EQ(resolve_squeezing(c).s, 1.78);
    c.squeeze_db = 5.0;
    EXPECT_NEAR(resolve_squeezing(c).epsilon(), db_to_variance(SqueezingLevel::from_squeezing_magnitude(5.0)), 1e-15);
    c.s = 2.0;
    EXPECT_THROW(resolve_squeezing(c), ConfigError);
    auto bad = config_for("gate-demo");
    bad.s = 0.5;
    EXPECT_THROW(resolve_squeezing(bad), ConfigError);
}

TEST(cli_parse, out_dir) {
    auto c = config_for("threshold-table");
    c.out_dir = "/tmp/x";
    EXPECT_EQ(resolve_out_dir(c), "/tmp/x");
    c.out_dir.clear();
    setenv(kOutDirEnv, "/tmp/from_env", 1);
    EXPECT_EQ(resolve_out_dir(c), "/tmp/from_env");
    unsetenv(kOutDirEnv);
    EXPECT_EQ(resolve_out_dir(c), ".");
}

TEST(cli_threshold_table, default_rows) {
    auto r = run_command(config_for("threshold-table"));
    EXPECT_EQ(r.exit_code, kExitOk);
    auto lines = data_lines(file_named(r, "threshold-table.csv").content);
    ASSERT_EQ(lines.size(), 4u);
    EXPECT_EQ(lines[0], "db,epsilon,sigma2_total,p_err");
    EXPECT_EQ(lines[1].rfind("15.6,", 0), 0u);
    EXPECT_EQ(lines[2].rfind("17.4,", 0), 0u);
    EXPECT_EQ(lines[3].rfind("20.5,", 0), 0u);
    auto j = nlohmann::json::parse(file_named(r, "threshold-table.json").content);
    EXPECT_EQ(j["seed"], 42);
    EXPECT_EQ(j["version"], kVersion);
    EXPECT_EQ(j["command"], "threshold-table");
    EXPECT_TRUE(j.contains("tolerance"));
    EXPECT_TRUE(j.contains("config"));
}

TEST(cli_threshold_table, extra_level_is_labelled) {
    auto c = config_for("threshold-table");
    c.levels = {10.0};
    auto r = run_command(c);
    const auto &csv = file_named(r, "threshold-table.csv").content;
    auto lines = data_lines(csv);
    ASSERT_EQ(lines.size(), 5u);
    EXPECT_EQ(lines[1].rfind("10,0.05,", 0), 0u);
    EXPECT_NE(csv.find("outside calibrated regime, cf. alternative constructions"), std::string::npos);
}

TEST(cli_threshold_table, explicit_anchor_is_idempotent) {
    auto plain = run_command(config_for("threshold-table"));
    auto c = config_for("threshold-table");
    c.anchor = parse_anchor("20.5:1e-6");
    auto anchored = run_command(c);
    EXPECT_EQ(data_lines(file_named(plain, "threshold-table.csv").content),
              data_lines(file_named(anchored, "threshold-table.csv").content));
}

TEST(cli_delete_check, lattices) {
    auto c = config_for("delete-check");
    auto r = run_command(c);
    EXPECT_EQ(r.exit_code, kExitOk);
    auto j = nlohmann::json::parse(file_named(r, "delete-check.json").content);
    EXPECT_LT(j["max_cov_dev"].get<double>(), 1e-12);
    EXPECT_LT(j["max_mean_dev"].get<double>(), 1e-12);
    EXPECT_TRUE(j["rejection_path"]["exercised"].get<bool>());

    c.rows = 1;
    c.cols = 2;
    auto small = run_command(c);
    EXPECT_EQ(small.exit_code, kExitOk);
}

TEST(cli_ellipse_plot, deterministic) {
    auto c = config_for("ellipse-plot");
    auto a = file_named(run_command(c), "ellipse-plot.svg").content;
    auto b = file_named(run_command(c), "ellipse-plot.svg").content;
    EXPECT_EQ(a, b);
    EXPECT_NE(a.find("stroke-dasharray"), std::string::npos);
    EXPECT_NE(a.find("<desc>"), std::string::npos);
}

TEST(cli_ellipse_plot, single_vacuum_is_circle) {
    auto c = config_for("ellipse-plot");
    c.states = {{1.0, 0.0}};
    auto svg = file_named(run_command(c), "ellipse-plot.svg").content;
    auto pos = svg.find("<ellipse");
    ASSERT_NE(pos, std::string::npos);
    auto rx = svg.find("rx=\"", pos);
    auto ry = svg.find("ry=\"", pos);
    EXPECT_EQ(svg.substr(rx + 4, 8), svg.substr(ry + 4, 8));
    EXPECT_EQ(svg.find("stroke-dasharray"), std::string::npos);
}

TEST(cli_gate_demo, one_mode_trace) {
    auto c = config_for("gate-demo");
    c.m = 1;
    c.seed = 7;
    auto j = nlohmann::json::parse(file_named(run_command(c), "gate-demo.json").content);
    ASSERT_EQ(j["trace"].size(), 1u);
    const auto &step = j["trace"][0];
    EXPECT_EQ(step["kind"], "one-mode");
    EXPECT_EQ(step["outcomes"].size(), 1u);
    ASSERT_EQ(step["corrections"].size(), 1u);
    EXPECT_EQ(step["corrections"][0]["op"], "X");
    EXPECT_TRUE(j.contains("final_state"));
    EXPECT_FALSE(j.contains("averaged"));
}

TEST(cli_gate_demo, two_mode_trace_and_average) {
    auto c = config_for("gate-demo");
    c.gate = "two-mode";
    c.seed = 7;
    c.average = true;
    auto r = run_command(c);
    EXPECT_EQ(r.exit_code, kExitOk);
    auto j = nlohmann::json::parse(file_named(r, "gate-demo.json").content);
    const auto &step = j["trace"][0];
    EXPECT_EQ(step["outcomes"].size(), 2u);
    ASSERT_EQ(step["corrections"].size(), 2u);
    double r_out = step["outcomes"][0];
    double t_out = step["outcomes"][1];
    EXPECT_EQ(step["corrections"][0]["op"], "Z");
    EXPECT_EQ(step["corrections"][0]["amount"].get<double>(), -t_out);
    EXPECT_EQ(step["corrections"][1]["amount"].get<double>(), -r_out);
    EXPECT_TRUE(j["averaged"]["kappa_free"].get<bool>());

    c.gate = "three-mode";
    EXPECT_THROW(run_command(c), ConfigError);
}

TEST(cli_kappa_sweep, small_grid) {
    auto c = config_for("kappa-sweep");
    c.grid_n = 128;
    c.cases = 3;
    c.samples = 2000;
    c.formats = {"csv", "json", "bin"};
    auto r = run_command(c);
    EXPECT_EQ(r.exit_code, kExitOk) << r.summary;
    auto lines = data_lines(file_named(r, "kappa-sweep.csv").content);
    EXPECT_EQ(lines.size(), 6u);
    auto j = nlohmann::json::parse(file_named(r, "kappa-sweep.json").content);
    EXPECT_LT(j["checks"]["covariance_path"]["max_deviation"].get<double>(), 1e-9);
    EXPECT_GT(j["checks"]["conditioned_control"]["max_deviation"].get<double>(), 0.01);
    auto bin = file_named(r, "kappa-sweep-gkp.bin").content;
    EXPECT_EQ(bin.size(), 24u + 8u * 128 * 128);

    auto again = run_command(c);
    EXPECT_EQ(file_named(again, "kappa-sweep.csv").content, file_named(r, "kappa-sweep.csv").content);
    EXPECT_EQ(file_named(again, "kappa-sweep.json").content, file_named(r, "kappa-sweep.json").content);
}

TEST(cli_outputs, provenance_everywhere) {
    auto c = config_for("threshold-table");
    c.seed = 99;
    auto r = run_command(c);
    const auto &csv = file_named(r, "threshold-table.csv").content;
    EXPECT_NE(csv.find("# "), std::string::npos);
    EXPECT_NE(csv.find("99"), std::string::npos);
    EXPECT_NE(csv.find(kVersion), std::string::npos);
}

TEST(cli_tool, exit_codes) {
    auto dir = scratch_dir("exit");
    EXPECT_EQ(run_tool("threshold-table --out " + dir.string()), 0);
    EXPECT_TRUE(std::filesystem::exists(dir / "threshold-table.csv"));
    EXPECT_TRUE(std::filesystem::exists(dir / "threshold-table.json"));
    EXPECT_EQ(run_tool("gate-demo --gate bogus --out " + dir.string()), 3);
    EXPECT_EQ(run_tool("threshold-table --anchor nonsense --out " + dir.string()), 3);
    EXPECT_EQ(run_tool("no-such-command"), 3);
    EXPECT_EQ(run_tool("gate-demo --s 2 --squeeze-db 5 --out " + dir.string()), 3);
    EXPECT_EQ(run_tool("delete-check --rows 40 --cols 40 --out " + dir.string()), 3);
    // An unreachable tolerance is an invariant breach.
    EXPECT_EQ(run_tool("kappa-sweep --grid-n 64 --cases 4 --samples 500 --tolerance 0 --out " + dir.string()), 2);
}

TEST(cli_tool, env_out_dir_and_determinism) {
    auto dir = scratch_dir("env");
    std::string env = "CVCLUSTER_OUT_DIR=" + dir.string() + " ";
    int status = std::system((env + CVCLUSTER_TOOL_PATH + " ellipse-plot > /dev/null").c_str());
    ASSERT_EQ(WEXITSTATUS(status), 0);
    std::ifstream a(dir / "ellipse-plot.svg");
    std::stringstream first;
    first << a.rdbuf();
    status = std::system((env + CVCLUSTER_TOOL_PATH + " ellipse-plot > /dev/null").c_str());
    std::ifstream b(dir / "ellipse-plot.svg");
    std::stringstream second;
    second << b.rdbuf();
    EXPECT_FALSE(first.str().empty());
    EXPECT_EQ(first.str(), second.str());
}
