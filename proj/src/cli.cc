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

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "cvcluster/cluster.h"
#include "cvcluster/symplectic.h"
#include "cvcluster/threshold.h"

using namespace cvc;

namespace {

constexpr double kDefaultS = 1.78;
const std::vector<double> kSweepDeltas = {0.0, 0.5, 1.0, 2.0, 4.0};
const std::vector<double> kDiscussionLevels = {15.6, 17.4, 20.5};
constexpr double kCalibratedLow = 15.6;
constexpr double kCalibratedHigh = 20.5;

double parse_number(const std::string &text, const std::string &what) {
    try {
        size_t used = 0;
        double v = std::stod(text, &used);
        if (used != text.size() || !std::isfinite(v)) {
            throw std::invalid_argument("");
        }
        return v;
    } catch (const std::exception &) {
        throw ConfigError("cannot parse " + what + " from '" + text + "'");
    }
}

std::pair<double, double> parse_colon_pair(const std::string &text, const std::string &what) {
    auto colon = text.find(':');
    if (colon == std::string::npos) {
        throw ConfigError(what + " must look like <a>:<b>, got '" + text + "'");
    }
    return {parse_number(text.substr(0, colon), what), parse_number(text.substr(colon + 1), what)};
}

std::vector<std::string> resolve_formats(
    const RunConfig &config, const std::vector<std::string> &supported, const std::vector<std::string> &defaults) {
    if (config.formats.empty()) {
        return defaults;
    }
    for (const auto &f : config.formats) {
        if (f != "csv" && f != "json" && f != "svg" && f != "bin") {
            throw ConfigError("unknown format '" + f + "'");
        }
        if (std::find(supported.begin(), supported.end(), f) == supported.end()) {
            throw ConfigError("command " + config.command + " cannot emit format '" + f + "'");
        }
    }
    return config.formats;
}

bool wants(const std::vector<std::string> &formats, const std::string &f) {
    return std::find(formats.begin(), formats.end(), f) != formats.end();
}

nlohmann::json spec_json(const SqueezedThermalSpec &spec) {
    return {{"s", spec.s}, {"delta", spec.delta}, {"epsilon", spec.epsilon()}, {"kappa", spec.kappa()}};
}

// Envelope shared by every output: tool, version, command, seed, tolerance and
// the resolved configuration.
nlohmann::json provenance(const RunConfig &config, double tolerance, const nlohmann::json &resolved) {
    return {
        {"tool", "cvcluster"},
        {"version", kVersion},
        {"command", config.command},
        {"seed", config.seed},
        {"tolerance", tolerance},
        {"config", resolved},
    };
}

std::vector<std::string> csv_preamble(const nlohmann::json &prov) {
    return {
        "cvcluster " + prov.at("version").get<std::string>() + " " + prov.at("command").get<std::string>(),
        "seed: " + std::to_string(prov.at("seed").get<uint64_t>()),
        "tolerance: " + format_double(prov.at("tolerance").get<double>()),
        "config: " + prov.at("config").dump(),
    };
}

std::string csv_line(const std::vector<double> &values) {
    std::string line;
    for (size_t k = 0; k < values.size(); k++) {
        if (k) {
            line += ",";
        }
        line += format_double(values[k]);
    }
    return line + "\n";
}

double max_abs_diff(const GaussianState &a, const GaussianState &b) {
    return a.distance(b);
}

// Largest covariance/mean error relative to the largest covariance entry.
double relative_deviation(const GaussianState &estimate, const GaussianState &reference) {
    double scale = reference.cov().cwiseAbs().maxCoeff();
    double cov = (estimate.cov() - reference.cov()).cwiseAbs().maxCoeff();
    double mean = (estimate.mean() - reference.mean()).cwiseAbs().maxCoeff();
    return std::max(cov, mean) / scale;
}

Eigen::VectorXd sample_outcomes(const OutcomeDistribution &dist, uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    Eigen::VectorXd z(dist.mean.size());
    for (Eigen::Index k = 0; k < z.size(); k++) {
        z(k) = normal(rng);
    }
    Eigen::LLT<Eigen::MatrixXd> llt(dist.cov);
    return dist.mean + llt.matrixL() * z;
}

}  // namespace

std::pair<double, double> cvc::parse_anchor(const std::string &text) {
    auto anchor = parse_colon_pair(text, "anchor");
    if (!(anchor.second > 0 && anchor.second < 0.5)) {
        throw ConfigError("anchor probability must lie in (0, 1/2)");
    }
    return anchor;
}

std::vector<double> cvc::parse_number_list(const std::string &text) {
    std::vector<double> out;
    std::stringstream in(text);
    std::string item;
    while (std::getline(in, item, ',')) {
        if (item.empty()) {
            throw ConfigError("empty entry in number list '" + text + "'");
        }
        out.push_back(parse_number(item, "list entry"));
    }
    if (out.empty()) {
        throw ConfigError("empty number list '" + text + "'");
    }
    return out;
}

std::pair<double, double> cvc::parse_state_pair(const std::string &text) {
    return parse_colon_pair(text, "state");
}

std::vector<std::pair<double, double>> cvc::parse_state_list(const std::string &text) {
    std::vector<std::pair<double, double>> out;
    std::stringstream in(text);
    std::string item;
    while (std::getline(in, item, ',')) {
        if (item.empty()) {
            throw ConfigError("empty entry in state list '" + text + "'");
        }
        out.push_back(parse_state_pair(item));
    }
    if (out.empty()) {
        throw ConfigError("ellipse plot needs at least one state");
    }
    return out;
}

SqueezedThermalSpec cvc::resolve_squeezing(const RunConfig &config) {
    if (config.squeeze_db && config.s) {
        throw ConfigError("give either --squeeze-db or --s, not both");
    }
    SqueezedThermalSpec spec{kDefaultS, config.delta.value_or(0.0)};
    if (config.squeeze_db) {
        if (!(*config.squeeze_db >= 0)) {
            throw ConfigError("--squeeze-db takes a non-negative dB-of-squeezing magnitude");
        }
        spec = SqueezedThermalSpec::from_squeezing_db(*config.squeeze_db, spec.delta);
    } else if (config.s) {
        spec.s = *config.s;
    }
    try {
        spec.validate();
    } catch (const std::invalid_argument &e) {
        throw ConfigError(e.what());
    }
    return spec;
}

GridSpec cvc::resolve_grid(const RunConfig &config, GridSpec fallback) {
    GridSpec spec{config.grid_l.value_or(fallback.extent), config.grid_n.value_or(fallback.points)};
    try {
        spec.validate();
    } catch (const std::invalid_argument &e) {
        throw ConfigError(e.what());
    }
    return spec;
}

std::string cvc::resolve_out_dir(const RunConfig &config) {
    if (!config.out_dir.empty()) {
        return config.out_dir;
    }
    if (const char *env = std::getenv(kOutDirEnv); env != nullptr && *env != '\0') {
        return env;
    }
    return ".";
}

// ---------------------------------------------------------------------------
// kappa-sweep
// ---------------------------------------------------------------------------

CommandResult cvc::cmd_kappa_sweep(const RunConfig &config) {
    auto formats = resolve_formats(config, {"csv", "json", "bin"}, {"csv", "json"});
    auto base = resolve_squeezing(config);
    auto grid = resolve_grid(config, {8.0, 256});
    double tolerance = config.tolerance.value_or(1e-9);
    if (config.cases == 0 || config.samples == 0) {
        throw ConfigError("--cases and --samples must be positive");
    }
    if (!(config.gkp_delta > 0 && config.gkp_delta < 1)) {
        throw ConfigError("--gkp-delta must lie in (0, 1)");
    }
    const double epsilon = base.epsilon();

    nlohmann::json resolved = {
        {"s", base.s},
        {"epsilon", epsilon},
        {"deltas", kSweepDeltas},
        {"cases", config.cases},
        {"samples", config.samples},
        {"grid_n", grid.points},
        {"grid_l", grid.extent},
        {"gkp_delta", config.gkp_delta},
    };
    auto prov = provenance(config, tolerance, resolved);

    std::vector<GaussianState> one_mode_inputs;
    std::vector<GaussianState> two_mode_inputs;
    for (size_t k = 0; k < config.cases; k++) {
        one_mode_inputs.push_back(random_gaussian_state(1, config.seed + 2 * k));
        two_mode_inputs.push_back(random_gaussian_state(2, config.seed + 2 * k + 1));
    }
    Eigen::VectorXd grid_mean(2);
    grid_mean << 0.3, -0.2;
    Eigen::MatrixXd grid_cov(2, 2);
    grid_cov << 0.7, 0.2, 0.2, 0.6;
    GaussianState grid_input(grid_mean, grid_cov);
    GridWigner gaussian_grid = GridWigner::zeros(1, grid);
    GridWigner gkp_grid = GridWigner::zeros(1, grid);
    try {
        gaussian_grid = discretize(grid_input, grid);
        gkp_grid = gkp_zero_grid(config.gkp_delta, grid);
    } catch (const std::invalid_argument &e) {
        throw ConfigError(std::string("grid too small for the sweep inputs: ") + e.what());
    }

    struct Row {
        double delta, kappa;
        GaussianState reference;
        double cov_dev, two_mode_dev, mc_rel_dev, grid_gauss_dev, gkp_linf, cond_dev;
    };
    std::vector<Row> rows;
    std::vector<GaussianState> first_one, first_two;
    GridWigner first_gkp = gkp_grid;
    GaussianState first_cond = grid_input;

    for (size_t d = 0; d < kSweepDeltas.size(); d++) {
        SqueezedThermalSpec spec{base.s, kSweepDeltas[d]};
        double cov_dev = 0.0;
        double two_dev = 0.0;
        for (size_t k = 0; k < config.cases; k++) {
            int m = static_cast<int>(k % 2);
            auto one = one_mode_gate_exact_average(one_mode_inputs[k], 0, spec, m);
            auto two = two_mode_gate_exact_average(two_mode_inputs[k], 0, 1, spec);
            if (d == 0) {
                first_one.push_back(one);
                first_two.push_back(two);
            }
            cov_dev = std::max(cov_dev, max_abs_diff(one, first_one[k]));
            cov_dev = std::max(cov_dev, max_abs_diff(one, one_mode_gate_averaged(one_mode_inputs[k], 0, epsilon, m)));
            two_dev = std::max(two_dev, max_abs_diff(two, first_two[k]));
            two_dev = std::max(two_dev, max_abs_diff(two, two_mode_gate_averaged(two_mode_inputs[k], 0, 1, epsilon)));
        }

        auto reference = one_mode_gate_averaged(one_mode_inputs[0], 0, epsilon, 0);
        auto mc = one_mode_gate_monte_carlo_average(one_mode_inputs[0], 0, spec, 0, config.samples, config.seed + 1000 + d);
        double mc_rel = relative_deviation(mc, reference);

        // Grid path: Gaussian input against the covariance path, GKP input
        // against the delta = 0 grid.
        auto dist = one_mode_gate_outcome_distribution(grid_input, 0, spec, 0);
        double spread = std::sqrt(dist.cov(0, 0));
        OneModeGateOracle gaussian_oracle(gaussian_grid, epsilon, spec.kappa(), 0);
        auto gaussian_avg = average_over_outcomes(
            [&](double t) { return gaussian_oracle(t); }, outcome_grid(dist.mean(0), 10.0 * spread, 401));
        auto grid_moments = moments(gaussian_avg);
        auto grid_reference = one_mode_gate_averaged(grid_input, 0, epsilon, 0);
        double grid_dev = std::max(
            (grid_moments.mean - grid_reference.mean()).cwiseAbs().maxCoeff(),
            (grid_moments.cov - grid_reference.cov()).cwiseAbs().maxCoeff());

        OneModeGateOracle gkp_oracle(gkp_grid, epsilon, spec.kappa(), 0);
        double half_width = grid.extent + 8.0 * std::sqrt(spec.kappa());
        auto gkp_avg =
            average_over_outcomes([&](double t) { return gkp_oracle(t); }, outcome_grid(0.0, half_width, 401));
        if (d == 0) {
            first_gkp = gkp_avg;
        }
        double gkp_linf = compare(gkp_avg, first_gkp).linf;

        // Control: conditioned output at a fixed outcome does depend on kappa.
        auto cond = one_mode_gate_conditioned(grid_input, 0, spec, 0, 0.0).state;
        if (d == 0) {
            first_cond = cond;
        }
        double cond_dev = (cond.cov() - first_cond.cov()).cwiseAbs().maxCoeff();

        rows.push_back({kSweepDeltas[d], spec.kappa(), reference, cov_dev, two_dev, mc_rel, grid_dev, gkp_linf, cond_dev});
    }

    double max_cov = 0, max_two = 0, max_mc = 0, max_grid = 0, max_gkp = 0, max_cond = 0;
    for (const auto &r : rows) {
        max_cov = std::max(max_cov, r.cov_dev);
        max_two = std::max(max_two, r.two_mode_dev);
        max_mc = std::max(max_mc, r.mc_rel_dev);
        max_grid = std::max(max_grid, r.grid_gauss_dev);
        max_gkp = std::max(max_gkp, r.gkp_linf);
        max_cond = std::max(max_cond, r.cond_dev);
    }
    nlohmann::json checks = {
        {"covariance_path", {{"max_deviation", std::max(max_cov, max_two)}, {"limit", tolerance}}},
        {"monte_carlo", {{"max_relative_deviation", max_mc}, {"limit", 0.02}}},
        {"grid_gaussian", {{"max_moment_deviation", max_grid}, {"limit", 1e-3}}},
        {"grid_gkp", {{"max_linf", max_gkp}, {"limit", 1e-4}}},
        {"conditioned_control", {{"max_deviation", max_cond}, {"minimum", 0.01}}},
    };
    bool ok = std::max(max_cov, max_two) <= tolerance && max_mc <= 0.02 && max_grid <= 1e-3 && max_gkp <= 1e-4 &&
              max_cond > 0.01;

    CommandResult result;
    result.exit_code = ok ? kExitOk : kExitInvariantBreach;
    result.summary = std::string(ok ? "ok" : "BREACH") + ": kappa sweep max covariance-path deviation " +
                     format_double(std::max(max_cov, max_two)) + ", Monte Carlo " + format_double(max_mc) +
                     ", GKP grid Linf " + format_double(max_gkp) + ", conditioned control " + format_double(max_cond);

    if (wants(formats, "csv")) {
        std::ostringstream out;
        for (const auto &line : csv_preamble(prov)) {
            out << "# " << line << "\n";
        }
        out << "delta,kappa,mean_q,mean_p,cov_qq,cov_qp,cov_pp,cov_dev,two_mode_dev,mc_rel_dev,grid_gauss_dev,gkp_"
               "linf,cond_dev\n";
        for (const auto &r : rows) {
            const auto &mean = r.reference.mean();
            const auto &cov = r.reference.cov();
            out << csv_line(
                {r.delta, r.kappa, mean(0), mean(1), cov(0, 0), cov(0, 1), cov(1, 1), r.cov_dev, r.two_mode_dev,
                 r.mc_rel_dev, r.grid_gauss_dev, r.gkp_linf, r.cond_dev});
        }
        result.files.push_back({"kappa-sweep.csv", out.str()});
    }
    if (wants(formats, "json")) {
        nlohmann::json j = prov;
        j["rows"] = nlohmann::json::array();
        for (const auto &r : rows) {
            j["rows"].push_back({
                {"delta", r.delta},
                {"kappa", r.kappa},
                {"averaged_output", to_json(r.reference)},
                {"cov_dev", r.cov_dev},
                {"two_mode_dev", r.two_mode_dev},
                {"mc_rel_dev", r.mc_rel_dev},
                {"grid_gauss_dev", r.grid_gauss_dev},
                {"gkp_linf", r.gkp_linf},
                {"cond_dev", r.cond_dev},
            });
        }
        j["checks"] = checks;
        j["passed"] = ok;
        result.files.push_back({"kappa-sweep.json", j.dump(2) + "\n"});
    }
    if (wants(formats, "bin")) {
        std::ostringstream bin;
        write_grid_binary(first_gkp, bin);
        result.files.push_back({"kappa-sweep-gkp.bin", bin.str()});
        nlohmann::json side = prov;
        side["grid"] = grid_sidecar_json(first_gkp);
        side["contents"] = "outcome-averaged one-mode gate output for the approximate GKP input, delta = 0";
        result.files.push_back({"kappa-sweep-gkp.bin.json", side.dump(2) + "\n"});
    }
    return result;
}

// ---------------------------------------------------------------------------
// threshold-table
// ---------------------------------------------------------------------------

CommandResult cvc::cmd_threshold_table(const RunConfig &config) {
    auto formats = resolve_formats(config, {"csv", "json"}, {"csv", "json"});
    auto anchor = config.anchor.value_or(std::pair<double, double>{20.5, 1e-6});
    double tolerance = config.tolerance.value_or(1e-9);

    std::vector<double> levels = kDiscussionLevels;
    for (double level : config.levels) {
        if (std::find(levels.begin(), levels.end(), level) == levels.end()) {
            levels.push_back(level);
        }
    }
    std::sort(levels.begin(), levels.end());

    nlohmann::json resolved = {{"anchor_db", anchor.first}, {"anchor_p", anchor.second}, {"levels", levels}};
    auto prov = provenance(config, tolerance, resolved);

    ErrorModel model(1.0, {}, 0.25);
    try {
        model = calibrate_multiplier(SqueezingLevel::from_squeezing_magnitude(anchor.first), anchor.second);
    } catch (const std::invalid_argument &e) {
        throw ConfigError(std::string("calibration failed: ") + e.what());
    }
    auto rows = threshold_table(model, levels);
    double reproduced = model.error_probability(SqueezingLevel::from_squeezing_magnitude(anchor.first));
    double anchor_error = std::abs(reproduced - anchor.second) / anchor.second;

    auto note_for = [](double db) -> std::string {
        if (db < kCalibratedLow || db > kCalibratedHigh) {
            return "outside calibrated regime, cf. alternative constructions";
        }
        return "";
    };

    CommandResult result;
    result.exit_code = anchor_error <= tolerance ? kExitOk : kExitInvariantBreach;
    result.summary = "multiplier k = " + format_double(model.multiplier()) + ", anchor reproduced to relative " +
                     format_double(anchor_error);

    if (wants(formats, "csv")) {
        auto preamble = csv_preamble(prov);
        preamble.push_back("multiplier: " + format_double(model.multiplier()));
        for (const auto &row : rows) {
            auto note = note_for(row.squeezing_db);
            if (!note.empty()) {
                preamble.push_back("note: " + format_double(row.squeezing_db) + " dB row is " + note);
            }
        }
        result.files.push_back({"threshold-table.csv", threshold_table_csv(rows, preamble)});
    }
    if (wants(formats, "json")) {
        nlohmann::json j = prov;
        auto table = threshold_table_json(model, rows);
        for (size_t k = 0; k < rows.size(); k++) {
            auto note = note_for(rows[k].squeezing_db);
            if (!note.empty()) {
                table["rows"][k]["note"] = note;
            }
        }
        j["calibration"] = table["calibration"];
        j["rows"] = table["rows"];
        result.files.push_back({"threshold-table.json", j.dump(2) + "\n"});
    }
    return result;
}

// ---------------------------------------------------------------------------
// delete-check
// ---------------------------------------------------------------------------

CommandResult cvc::cmd_delete_check(const RunConfig &config) {
    auto formats = resolve_formats(config, {"json"}, {"json"});
    auto spec = resolve_squeezing(config);
    double tolerance = config.tolerance.value_or(1e-10);
    if (config.trials == 0) {
        throw ConfigError("--trials must be positive");
    }

    Flowerbed flowerbed{FlowerbedGraph{}, vacuum_state(1)};
    try {
        flowerbed = build_flowerbed(config.rows, config.cols, spec);
    } catch (const std::invalid_argument &e) {
        throw ConfigError(e.what());
    }
    std::vector<size_t> candidates;
    for (const auto &node : flowerbed.graph.nodes()) {
        if (node.kind == NodeKind::kThermalBase && flowerbed.graph.base_degree(node.id) == 4) {
            candidates.push_back(node.id);
        }
    }
    if (candidates.empty()) {
        for (const auto &node : flowerbed.graph.nodes()) {
            if (node.kind == NodeKind::kThermalBase) {
                candidates.push_back(node.id);
            }
        }
    }

    nlohmann::json resolved = {
        {"rows", config.rows}, {"cols", config.cols}, {"trials", config.trials}, {"node", spec_json(spec)}};
    auto prov = provenance(config, tolerance, resolved);

    std::mt19937_64 rng(config.seed);
    double max_cov = 0.0;
    double max_mean = 0.0;
    nlohmann::json trials = nlohmann::json::array();
    for (size_t k = 0; k < config.trials; k++) {
        size_t node = candidates[std::uniform_int_distribution<size_t>(0, candidates.size() - 1)(rng)];
        auto deleted = delete_node_sampled(flowerbed, node, rng());
        auto reference = prepare_graph_state(deleted.flowerbed.graph, spec);
        double cov_dev = (deleted.flowerbed.state.cov() - reference.cov()).cwiseAbs().maxCoeff();
        double mean_dev = (deleted.flowerbed.state.mean() - reference.mean()).cwiseAbs().maxCoeff();
        max_cov = std::max(max_cov, cov_dev);
        max_mean = std::max(max_mean, mean_dev);
        trials.push_back(
            {{"node", node}, {"outcome", deleted.record.outcomes.front()}, {"cov_dev", cov_dev}, {"mean_dev", mean_dev}});
    }

    // Input-marked nodes must be refused.
    bool rejected = false;
    std::string rejection;
    {
        Flowerbed marked = flowerbed;
        size_t target = candidates.front();
        marked.graph.set_kind(target, NodeKind::kInput);
        try {
            delete_node(marked, target, 0.0);
        } catch (const std::invalid_argument &e) {
            rejected = true;
            rejection = e.what();
        }
    }

    bool ok = max_cov <= tolerance && max_mean <= tolerance && rejected;
    CommandResult result;
    result.exit_code = ok ? kExitOk : kExitInvariantBreach;
    result.summary = std::string(ok ? "ok" : "BREACH") + ": max deviation from never-attached construction cov " +
                     format_double(max_cov) + ", mean " + format_double(max_mean) + "; input-node rejection " +
                     (rejected ? "exercised" : "MISSING");
    nlohmann::json j = prov;
    j["max_cov_dev"] = max_cov;
    j["max_mean_dev"] = max_mean;
    j["rejection_path"] = {{"exercised", rejected}, {"message", rejection}};
    j["trials"] = trials;
    j["passed"] = ok;
    result.files.push_back({"delete-check.json", j.dump(2) + "\n"});
    return result;
}

// ---------------------------------------------------------------------------
// ellipse-plot
// ---------------------------------------------------------------------------

namespace {

std::string fixed(double v, int digits = 3) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
    std::string s = buf;
    if (s == "-0.000" || s == "-0.00" || s == "-0.0") {
        s = s.substr(1);
    }
    return s;
}

std::string xml_escape(const std::string &text) {
    std::string out;
    for (char c : text) {
        switch (c) {
            case '&':
                out += "&amp;";
                break;
            case '<':
                out += "&lt;";
                break;
            case '>':
                out += "&gt;";
                break;
            default:
                out += c;
        }
    }
    return out;
}

}  // namespace

CommandResult cvc::cmd_ellipse_plot(const RunConfig &config) {
    auto formats = resolve_formats(config, {"svg"}, {"svg"});
    auto states = config.states;
    if (states.empty()) {
        states = {{1.0, 0.0}, {kDefaultS, 0.0}, {kDefaultS, 1.0}};
    }
    std::vector<SqueezedThermalSpec> specs;
    for (auto [s, delta] : states) {
        SqueezedThermalSpec spec{s, delta};
        try {
            spec.validate();
        } catch (const std::invalid_argument &e) {
            throw ConfigError(e.what());
        }
        specs.push_back(spec);
    }
    double tolerance = config.tolerance.value_or(0.0);
    nlohmann::json resolved = {{"states", nlohmann::json::array()}};
    for (const auto &spec : specs) {
        resolved["states"].push_back({{"s", spec.s}, {"delta", spec.delta}});
    }
    auto prov = provenance(config, tolerance, resolved);

    double reach = 0.0;
    for (const auto &spec : specs) {
        reach = std::max({reach, std::sqrt(spec.kappa()), std::sqrt(spec.epsilon())});
    }
    reach = std::ceil(reach * 1.15 * 2.0) / 2.0;

    const double size = 480.0;
    const double margin = 50.0;
    const double center = size / 2.0;
    const double scale = (size / 2.0 - margin) / reach;
    const std::vector<std::string> colors = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

    std::ostringstream svg;
    svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fixed(size, 0) << "\" height=\""
        << fixed(size + 20.0 * static_cast<double>(specs.size()), 0) << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    svg << "<desc>" << xml_escape(prov.dump()) << "</desc>\n";
    svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    // Axes with ticks every half unit.
    svg << "<g stroke=\"black\" stroke-width=\"1\">\n";
    svg << "<line x1=\"" << fixed(margin) << "\" y1=\"" << fixed(center) << "\" x2=\"" << fixed(size - margin)
        << "\" y2=\"" << fixed(center) << "\"/>\n";
    svg << "<line x1=\"" << fixed(center) << "\" y1=\"" << fixed(margin) << "\" x2=\"" << fixed(center) << "\" y2=\""
        << fixed(size - margin) << "\"/>\n";
    for (double v = -reach; v <= reach + 1e-9; v += 0.5) {
        double px = center + v * scale;
        double py = center - v * scale;
        svg << "<line x1=\"" << fixed(px) << "\" y1=\"" << fixed(center - 4) << "\" x2=\"" << fixed(px) << "\" y2=\""
            << fixed(center + 4) << "\"/>\n";
        svg << "<line x1=\"" << fixed(center - 4) << "\" y1=\"" << fixed(py) << "\" x2=\"" << fixed(center + 4)
            << "\" y2=\"" << fixed(py) << "\"/>\n";
    }
    svg << "</g>\n";
    for (double v = -reach; v <= reach + 1e-9; v += 0.5) {
        if (std::abs(v) < 1e-9) {
            continue;
        }
        svg << "<text x=\"" << fixed(center + v * scale) << "\" y=\"" << fixed(center + 18) << "\" text-anchor=\"middle\">"
            << fixed(v, 1) << "</text>\n";
        svg << "<text x=\"" << fixed(center - 8) << "\" y=\"" << fixed(center - v * scale + 4)
            << "\" text-anchor=\"end\">" << fixed(v, 1) << "</text>\n";
    }
    svg << "<text x=\"" << fixed(size - margin + 10) << "\" y=\"" << fixed(center + 4) << "\">q</text>\n";
    svg << "<text x=\"" << fixed(center) << "\" y=\"" << fixed(margin - 10) << "\" text-anchor=\"middle\">p</text>\n";

    for (size_t k = 0; k < specs.size(); k++) {
        const auto &spec = specs[k];
        const auto &color = colors[k % colors.size()];
        std::string dash = spec.delta > 0 ? " stroke-dasharray=\"6,4\"" : "";
        svg << "<ellipse cx=\"" << fixed(center) << "\" cy=\"" << fixed(center) << "\" rx=\""
            << fixed(std::sqrt(spec.kappa()) * scale) << "\" ry=\"" << fixed(std::sqrt(spec.epsilon()) * scale)
            << "\" fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\"" << dash << "/>\n";
        double db = variance_to_db(spec.epsilon()).decibels;
        double y = size + 20.0 * static_cast<double>(k) - 4.0;
        svg << "<line x1=\"" << fixed(margin) << "\" y1=\"" << fixed(y - 4) << "\" x2=\"" << fixed(margin + 30)
            << "\" y2=\"" << fixed(y - 4) << "\" stroke=\"" << color << "\" stroke-width=\"2\"" << dash << "/>\n";
        svg << "<text x=\"" << fixed(margin + 40) << "\" y=\"" << fixed(y) << "\">s = " << fixed(spec.s, 2)
            << ", delta = " << fixed(spec.delta, 2) << ", squeezed quadrature " << fixed(db, 2)
            << " dB (kappa = " << fixed(spec.kappa(), 3) << ", epsilon = " << fixed(spec.epsilon(), 3) << ")</text>\n";
    }
    svg << "</svg>\n";

    CommandResult result;
    result.summary = "ok: " + std::to_string(specs.size()) + " ellipses";
    if (wants(formats, "svg")) {
        result.files.push_back({"ellipse-plot.svg", svg.str()});
    }
    return result;
}

// ---------------------------------------------------------------------------
// gate-demo
// ---------------------------------------------------------------------------

CommandResult cvc::cmd_gate_demo(const RunConfig &config) {
    auto formats = resolve_formats(config, {"json"}, {"json"});
    if (config.gate != "one-mode" && config.gate != "two-mode") {
        throw ConfigError("--gate must be one-mode or two-mode, got '" + config.gate + "'");
    }
    if (config.m != 0 && config.m != 1) {
        throw ConfigError("--m must be 0 or 1");
    }
    auto spec = resolve_squeezing(config);
    double tolerance = config.tolerance.value_or(1e-9);
    bool one_mode = config.gate == "one-mode";

    nlohmann::json resolved = {{"gate", config.gate}, {"node", spec_json(spec)}, {"average", config.average}};
    if (one_mode) {
        resolved["m"] = config.m;
    }
    auto prov = provenance(config, tolerance, resolved);

    auto input = random_gaussian_state(one_mode ? 1 : 2, config.seed);
    nlohmann::json j = prov;
    j["input"] = to_json(input);

    GateResult run{input, 0.0, {}};
    GaussianState averaged = input;
    GaussianState exact = input;
    if (one_mode) {
        auto dist = one_mode_gate_outcome_distribution(input, 0, spec, config.m);
        double t = sample_outcomes(dist, config.seed)(0);
        run = one_mode_gate_conditioned(input, 0, spec, config.m, t);
        averaged = one_mode_gate_averaged(input, 0, spec.epsilon(), config.m);
        exact = one_mode_gate_exact_average(input, 0, spec, config.m);
    } else {
        auto dist = two_mode_gate_outcome_distribution(input, 0, 1, spec);
        auto rt = sample_outcomes(dist, config.seed);
        run = two_mode_gate_conditioned(input, 0, 1, spec, rt(0), rt(1));
        averaged = two_mode_gate_averaged(input, 0, 1, spec.epsilon());
        exact = two_mode_gate_exact_average(input, 0, 1, spec);
    }
    j["trace"] = nlohmann::json::array({to_json(run.record)});
    j["outcome_density"] = run.density;
    j["final_state"] = to_json(run.state);

    CommandResult result;
    result.summary = "ok: " + config.gate + " gate, outcome density " + format_double(run.density);
    if (config.average) {
        double dev = averaged.distance(exact);
        j["averaged"] = {
            {"state", to_json(averaged)},
            {"exact_average_deviation", dev},
            {"kappa_free", true},
        };
        if (dev > tolerance) {
            result.exit_code = kExitInvariantBreach;
            result.summary = "BREACH: averaged channel deviates from the exact outcome average by " + format_double(dev);
        }
    }
    result.files.push_back({"gate-demo.json", j.dump(2) + "\n"});
    return result;
}

// ---------------------------------------------------------------------------

CommandResult cvc::run_command(const RunConfig &config) {
    if (config.command == "kappa-sweep") {
        return cmd_kappa_sweep(config);
    }
    if (config.command == "threshold-table") {
        return cmd_threshold_table(config);
    }
    if (config.command == "delete-check") {
        return cmd_delete_check(config);
    }
    if (config.command == "ellipse-plot") {
        return cmd_ellipse_plot(config);
    }
    if (config.command == "gate-demo") {
        return cmd_gate_demo(config);
    }
    throw ConfigError("unknown command '" + config.command + "'");
}

void cvc::write_outputs(const CommandResult &result, const std::string &dir) {
    std::filesystem::create_directories(dir);
    for (const auto &file : result.files) {
        auto path = std::filesystem::path(dir) / file.name;
        std::ofstream out(path, std::ios::binary);
        out << file.content;
        if (!out) {
            throw std::runtime_error("failed to write " + path.string());
        }
    }
}
