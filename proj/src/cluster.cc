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

#include "cvcluster/cluster.h"

#include <algorithm>
#include <boost/math/distributions/normal.hpp>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

#include "cvcluster/symplectic.h"

using namespace cvc;

// ---------------------------------------------------------------------------
// Graph
// ---------------------------------------------------------------------------

std::string cvc::node_kind_name(NodeKind kind) {
    switch (kind) {
        case NodeKind::kThermalBase:
            return "thermal-base";
        case NodeKind::kGkpAncillaMarker:
            return "gkp-ancilla-marker";
        case NodeKind::kInput:
            return "input";
        case NodeKind::kOutput:
            return "output";
    }
    return "unknown";
}

size_t FlowerbedGraph::add_node(NodeKind kind, int row, int col) {
    nodes_.push_back({next_id_, kind, row, col});
    return next_id_++;
}

void FlowerbedGraph::add_edge(size_t a, size_t b, double weight) {
    if (a == b) {
        throw std::invalid_argument("self loops are not allowed");
    }
    node(a);
    node(b);
    edges_.push_back({a, b, weight});
}

void FlowerbedGraph::remove_node(size_t id) {
    node(id);
    std::erase_if(nodes_, [&](const FlowerbedNode &n) { return n.id == id; });
    std::erase_if(edges_, [&](const FlowerbedEdge &e) { return e.a == id || e.b == id; });
}

void FlowerbedGraph::set_kind(size_t id, NodeKind kind) {
    for (auto &n : nodes_) {
        if (n.id == id) {
            if (!n.carries_mode() || kind == NodeKind::kGkpAncillaMarker) {
                throw std::invalid_argument("cannot convert between ancilla markers and mode-carrying nodes");
            }
            n.kind = kind;
            return;
        }
    }
    throw std::out_of_range("no node with id " + std::to_string(id));
}

const FlowerbedNode &FlowerbedGraph::node(size_t id) const {
    for (const auto &n : nodes_) {
        if (n.id == id) {
            return n;
        }
    }
    throw std::out_of_range("no node with id " + std::to_string(id));
}

bool FlowerbedGraph::contains(size_t id) const {
    return std::any_of(nodes_.begin(), nodes_.end(), [&](const FlowerbedNode &n) { return n.id == id; });
}

std::optional<size_t> FlowerbedGraph::node_at(int row, int col) const {
    for (const auto &n : nodes_) {
        if (n.carries_mode() && n.row == row && n.col == col) {
            return n.id;
        }
    }
    return std::nullopt;
}

size_t FlowerbedGraph::num_modes() const {
    return static_cast<size_t>(std::count_if(nodes_.begin(), nodes_.end(), [](const auto &n) { return n.carries_mode(); }));
}

size_t FlowerbedGraph::mode_of(size_t id) const {
    size_t mode = 0;
    for (const auto &n : nodes_) {
        if (n.id == id) {
            if (!n.carries_mode()) {
                throw std::invalid_argument("ancilla markers do not carry a mode");
            }
            return mode;
        }
        if (n.carries_mode()) {
            mode++;
        }
    }
    throw std::out_of_range("no node with id " + std::to_string(id));
}

std::vector<std::pair<size_t, double>> FlowerbedGraph::neighbors(size_t id) const {
    std::vector<std::pair<size_t, double>> out;
    for (const auto &e : edges_) {
        if (e.a == id) {
            out.emplace_back(e.b, e.weight);
        } else if (e.b == id) {
            out.emplace_back(e.a, e.weight);
        }
    }
    return out;
}

size_t FlowerbedGraph::base_degree(size_t id) const {
    size_t degree = 0;
    for (const auto &[other, weight] : neighbors(id)) {
        if (node(other).carries_mode()) {
            degree++;
        }
    }
    return degree;
}

nlohmann::json FlowerbedGraph::to_json() const {
    nlohmann::json j;
    j["nodes"] = nlohmann::json::array();
    for (const auto &n : nodes_) {
        j["nodes"].push_back({{"id", n.id}, {"kind", node_kind_name(n.kind)}, {"row", n.row}, {"col", n.col}});
    }
    j["edges"] = nlohmann::json::array();
    for (const auto &e : edges_) {
        j["edges"].push_back({{"a", e.a}, {"b", e.b}, {"weight", e.weight}});
    }
    return j;
}

GaussianState cvc::prepare_graph_state(const FlowerbedGraph &graph, const SqueezedThermalSpec &spec) {
    size_t n = graph.num_modes();
    if (n == 0) {
        throw std::invalid_argument("graph has no mode-carrying nodes");
    }
    auto node_state = squeezed_thermal_state(spec);
    GaussianState state = node_state;
    for (size_t k = 1; k < n; k++) {
        state = state.tensor(node_state);
    }
    for (const auto &e : graph.edges()) {
        if (graph.node(e.a).carries_mode() && graph.node(e.b).carries_mode()) {
            state = apply_symplectic(state, controlled_z(n, graph.mode_of(e.a), graph.mode_of(e.b), e.weight));
        }
    }
    return state;
}

Flowerbed cvc::build_flowerbed(int rows, int cols, const SqueezedThermalSpec &spec, const FlowerbedOptions &options) {
    if (rows < 1 || cols < 1) {
        throw std::invalid_argument("lattice needs at least one row and one column");
    }
    if (2 * static_cast<size_t>(rows) * static_cast<size_t>(cols) > options.mode_cap) {
        throw std::invalid_argument(
            "lattice of " + std::to_string(rows) + "x" + std::to_string(cols) + " exceeds the mode cap of " +
            std::to_string(options.mode_cap));
    }
    if (options.ancilla_interval < 1) {
        throw std::invalid_argument("ancilla interval must be positive");
    }
    FlowerbedGraph graph;
    for (int r = 0; r < rows; r++) {
        for (int c = 0; c < cols; c++) {
            graph.add_node(NodeKind::kThermalBase, r, c);
        }
    }
    auto id = [&](int r, int c) {
        return static_cast<size_t>(r * cols + c);
    };
    for (int r = 0; r < rows; r++) {
        for (int c = 0; c < cols; c++) {
            if (c + 1 < cols) {
                graph.add_edge(id(r, c), id(r, c + 1), 1.0);
            }
            if (r + 1 < rows) {
                graph.add_edge(id(r, c), id(r + 1, c), 1.0);
            }
        }
    }
    for (int r = 0; r < rows; r++) {
        for (int c = 0; c < cols; c++) {
            if (r % options.ancilla_interval == 0 && c % options.ancilla_interval == 0) {
                size_t marker = graph.add_node(NodeKind::kGkpAncillaMarker, r, c);
                graph.add_edge(id(r, c), marker, 1.0);
            }
        }
    }
    auto state = prepare_graph_state(graph, spec);
    return {std::move(graph), std::move(state)};
}

// ---------------------------------------------------------------------------
// Records
// ---------------------------------------------------------------------------

std::string cvc::step_kind_name(StepKind kind) {
    switch (kind) {
        case StepKind::kOneMode:
            return "one-mode";
        case StepKind::kTwoMode:
            return "two-mode";
        case StepKind::kDeletion:
            return "deletion";
    }
    return "unknown";
}

StepKind cvc::parse_step_kind(const std::string &name) {
    if (name == "one-mode") {
        return StepKind::kOneMode;
    }
    if (name == "two-mode") {
        return StepKind::kTwoMode;
    }
    if (name == "deletion") {
        return StepKind::kDeletion;
    }
    throw std::invalid_argument("unknown step kind '" + name + "'");
}

nlohmann::json cvc::to_json(const GateStepRecord &record) {
    nlohmann::json j;
    j["kind"] = step_kind_name(record.kind);
    j["m"] = record.m;
    j["modes"] = record.modes;
    j["outcomes"] = record.outcomes;
    j["corrections"] = nlohmann::json::array();
    for (const auto &c : record.corrections) {
        j["corrections"].push_back({{"op", std::string(1, c.op)}, {"mode", c.mode}, {"amount", c.amount}});
    }
    return j;
}

GateStepRecord cvc::gate_step_from_json(const nlohmann::json &j) {
    GateStepRecord record;
    record.kind = parse_step_kind(j.at("kind").get<std::string>());
    record.m = j.value("m", 0);
    record.modes = j.value("modes", std::vector<size_t>{});
    record.outcomes = j.value("outcomes", std::vector<double>{});
    if (j.contains("corrections")) {
        for (const auto &c : j.at("corrections")) {
            auto op = c.at("op").get<std::string>();
            if (op != "X" && op != "Z") {
                throw std::invalid_argument("correction op must be X or Z");
            }
            record.corrections.push_back({op[0], c.at("mode").get<size_t>(), c.at("amount").get<double>()});
        }
    }
    return record;
}

// ---------------------------------------------------------------------------
// Deletion
// ---------------------------------------------------------------------------

namespace {

void check_deletable(const Flowerbed &flowerbed, size_t node_id) {
    const auto &node = flowerbed.graph.node(node_id);
    if (node.kind != NodeKind::kThermalBase) {
        throw std::invalid_argument("only thermal-base nodes can be deleted; node " + std::to_string(node_id) + " is " +
                                    node_kind_name(node.kind));
    }
}

}  // namespace

DeletionResult cvc::delete_node(const Flowerbed &flowerbed, size_t node_id, double outcome) {
    check_deletable(flowerbed, node_id);
    const auto &graph = flowerbed.graph;
    size_t mode = graph.mode_of(node_id);

    auto measured = condition_on_quadrature(flowerbed.state, mode, Quadrature::position(), outcome);
    FlowerbedGraph remaining = graph;
    remaining.remove_node(node_id);

    GateStepRecord record;
    record.kind = StepKind::kDeletion;
    record.modes = {mode};
    record.outcomes = {outcome};

    GaussianState state = measured.state;
    for (const auto &[neighbor, weight] : graph.neighbors(node_id)) {
        if (!graph.node(neighbor).carries_mode()) {
            continue;
        }
        size_t target = remaining.mode_of(neighbor);
        state = apply_symplectic(state, displace_p(state.num_modes(), target, -weight * outcome));
        record.corrections.push_back({'Z', target, -weight * outcome});
    }
    return {{std::move(remaining), std::move(state)}, std::move(record)};
}

DeletionResult cvc::delete_node_sampled(const Flowerbed &flowerbed, size_t node_id, uint64_t seed) {
    check_deletable(flowerbed, node_id);
    double outcome =
        sample_quadrature(flowerbed.state, flowerbed.graph.mode_of(node_id), Quadrature::position(), seed);
    return delete_node(flowerbed, node_id, outcome);
}

// ---------------------------------------------------------------------------
// Gates
// ---------------------------------------------------------------------------

namespace {

void check_epsilon(double epsilon) {
    if (!(epsilon > 0) || !std::isfinite(epsilon)) {
        throw std::invalid_argument("blur variance epsilon must be positive");
    }
}

void check_shear_bit(int m) {
    if (m != 0 && m != 1) {
        throw std::invalid_argument("shear measurement index m must be 0 or 1, got " + std::to_string(m));
    }
}

// The circuit up to (not including) the homodyne measurement of the one-mode
// gate: input modes then one fresh node at index n, shear on the input, CZ[1].
struct OneModeCircuit {
    GaussianState joint;
    HomodyneMeasurement measurement;
    size_t in_mode;
    size_t num_modes;
};

OneModeCircuit prepare_one_mode(const GaussianState &state, size_t in_mode, const SqueezedThermalSpec &spec, int m) {
    check_shear_bit(m);
    state.q_index(in_mode);
    size_t n = state.num_modes();
    auto joint = state.tensor(squeezed_thermal_state(spec));
    joint = apply_symplectic(joint, shear(n + 1, in_mode, m));
    joint = apply_symplectic(joint, controlled_z(n + 1, in_mode, n, 1.0));
    return {std::move(joint), {in_mode, Quadrature::momentum(), 0.0}, in_mode, n};
}

// X(-t) on the surviving fresh node (now the last mode), then move it into the
// input's slot.
GaussianState finish_one_mode(const GaussianState &conditioned, size_t in_mode, double t) {
    size_t n = conditioned.num_modes();
    auto shifted = apply_symplectic(conditioned, displace_q(n, n - 1, -t));
    return shifted.with_mode_moved(n - 1, in_mode);
}

struct TwoModeCircuit {
    GaussianState joint;
    std::array<HomodyneMeasurement, 2> measurements;
};

TwoModeCircuit prepare_two_mode(const GaussianState &state, size_t a, size_t b, const SqueezedThermalSpec &spec) {
    state.q_index(a);
    state.q_index(b);
    if (a == b) {
        throw std::invalid_argument("two-mode gate needs two distinct input modes");
    }
    size_t n = state.num_modes();
    size_t f2 = n;
    size_t f3 = n + 1;
    auto fresh = squeezed_thermal_state(spec);
    auto joint = state.tensor(fresh).tensor(fresh);
    joint = apply_symplectic(joint, controlled_z(n + 2, a, f2, 1.0));
    joint = apply_symplectic(joint, controlled_z(n + 2, f2, f3, 1.0));
    joint = apply_symplectic(joint, controlled_z(n + 2, f3, b, 1.0));
    return {std::move(joint), {{{f2, Quadrature::momentum(), 0.0}, {f3, Quadrature::momentum(), 0.0}}}};
}

// Z(-t) on a, Z(-r) on b.
GaussianState finish_two_mode(const GaussianState &conditioned, size_t a, size_t b, double r, double t) {
    size_t n = conditioned.num_modes();
    auto out = apply_symplectic(conditioned, displace_p(n, a, -t));
    return apply_symplectic(out, displace_p(n, b, -r));
}

// Law of total covariance for a conditioned output whose mean is affine in
// the outcome vector. `at` evaluates the conditioned state at an outcome.
template <typename Eval>
GaussianState total_covariance_average(const OutcomeDistribution &dist, Eval at) {
    auto k = dist.mean.size();
    GaussianState base = at(Eigen::VectorXd::Zero(k));
    Eigen::MatrixXd slope(base.mean().size(), k);
    for (Eigen::Index j = 0; j < k; j++) {
        Eigen::VectorXd unit = Eigen::VectorXd::Unit(k, j);
        slope.col(j) = at(unit).mean() - base.mean();
    }
    Eigen::VectorXd mean = base.mean() + slope * dist.mean;
    Eigen::MatrixXd cov = base.cov() + slope * dist.cov * slope.transpose();
    return GaussianState(std::move(mean), 0.5 * (cov + cov.transpose()));
}

// Stratified (Latin hypercube) draws from the outcome distribution.
std::vector<Eigen::VectorXd> stratified_outcomes(const OutcomeDistribution &dist, size_t samples, uint64_t seed) {
    if (samples == 0) {
        throw std::invalid_argument("need at least one Monte Carlo sample");
    }
    auto k = dist.mean.size();
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> jitter(0.0, 1.0);
    boost::math::normal_distribution<double> standard;

    Eigen::MatrixXd z(k, static_cast<Eigen::Index>(samples));
    for (Eigen::Index d = 0; d < k; d++) {
        std::vector<size_t> perm(samples);
        std::iota(perm.begin(), perm.end(), size_t{0});
        std::shuffle(perm.begin(), perm.end(), rng);
        for (size_t i = 0; i < samples; i++) {
            double u = (static_cast<double>(perm[i]) + jitter(rng)) / static_cast<double>(samples);
            u = std::clamp(u, 1e-300, 1.0 - 1e-16);
            z(d, static_cast<Eigen::Index>(i)) = boost::math::quantile(standard, u);
        }
    }
    Eigen::LLT<Eigen::MatrixXd> llt(dist.cov);
    if (llt.info() != Eigen::Success) {
        throw std::invalid_argument("outcome distribution is degenerate");
    }
    Eigen::MatrixXd lower = llt.matrixL();
    std::vector<Eigen::VectorXd> out;
    out.reserve(samples);
    for (size_t i = 0; i < samples; i++) {
        out.push_back(dist.mean + lower * z.col(static_cast<Eigen::Index>(i)));
    }
    return out;
}

template <typename Eval>
GaussianState monte_carlo_average(const std::vector<Eigen::VectorXd> &outcomes, Eval at) {
    Eigen::VectorXd mean_sum;
    Eigen::MatrixXd second_sum;
    Eigen::MatrixXd cov_sum;
    for (const auto &o : outcomes) {
        GaussianState s = at(o);
        if (mean_sum.size() == 0) {
            mean_sum = Eigen::VectorXd::Zero(s.mean().size());
            second_sum = Eigen::MatrixXd::Zero(s.mean().size(), s.mean().size());
            cov_sum = second_sum;
        }
        mean_sum += s.mean();
        second_sum += s.mean() * s.mean().transpose();
        cov_sum += s.cov();
    }
    double count = static_cast<double>(outcomes.size());
    Eigen::VectorXd mean = mean_sum / count;
    Eigen::MatrixXd cov = cov_sum / count + second_sum / count - mean * mean.transpose();
    return GaussianState(std::move(mean), 0.5 * (cov + cov.transpose()));
}

}  // namespace

GateResult cvc::one_mode_gate_conditioned(
    const GaussianState &state, size_t in_mode, const SqueezedThermalSpec &spec, int m, double t) {
    auto circuit = prepare_one_mode(state, in_mode, spec, m);
    circuit.measurement.outcome = t;
    auto measured = condition_on_quadrature(circuit.joint, in_mode, Quadrature::momentum(), t);

    GateStepRecord record;
    record.kind = StepKind::kOneMode;
    record.m = m;
    record.modes = {in_mode};
    record.outcomes = {t};
    record.corrections = {{'X', in_mode, -t}};
    return {finish_one_mode(measured.state, in_mode, t), measured.density, std::move(record)};
}

OutcomeDistribution cvc::one_mode_gate_outcome_distribution(
    const GaussianState &state, size_t in_mode, const SqueezedThermalSpec &spec, int m) {
    auto circuit = prepare_one_mode(state, in_mode, spec, m);
    return homodyne_outcome_distribution(circuit.joint, std::span(&circuit.measurement, 1));
}

GaussianState cvc::one_mode_gate_averaged(const GaussianState &state, size_t in_mode, double epsilon, int m) {
    check_epsilon(epsilon);
    check_shear_bit(m);
    size_t n = state.num_modes();
    auto out = apply_symplectic(state, shear(n, in_mode, m).then(fourier(n, in_mode)));
    Eigen::MatrixXd cov = out.cov();
    auto p = static_cast<Eigen::Index>(out.p_index(in_mode));
    cov(p, p) += epsilon;
    return GaussianState(out.mean(), std::move(cov));
}

GaussianState cvc::one_mode_gate_exact_average(
    const GaussianState &state, size_t in_mode, const SqueezedThermalSpec &spec, int m) {
    auto circuit = prepare_one_mode(state, in_mode, spec, m);
    HomodyneConditioner conditioner(circuit.joint, std::span(&circuit.measurement, 1));
    return total_covariance_average(conditioner.outcome_distribution(), [&](const Eigen::VectorXd &o) {
        return finish_one_mode(conditioner(o).state, in_mode, o(0));
    });
}

GaussianState cvc::one_mode_gate_monte_carlo_average(
    const GaussianState &state, size_t in_mode, const SqueezedThermalSpec &spec, int m, size_t samples, uint64_t seed) {
    auto circuit = prepare_one_mode(state, in_mode, spec, m);
    HomodyneConditioner conditioner(circuit.joint, std::span(&circuit.measurement, 1));
    auto outcomes = stratified_outcomes(conditioner.outcome_distribution(), samples, seed);
    return monte_carlo_average(outcomes, [&](const Eigen::VectorXd &o) {
        return finish_one_mode(conditioner(o).state, in_mode, o(0));
    });
}

GateResult cvc::two_mode_gate_conditioned(
    const GaussianState &state,
    size_t a,
    size_t b,
    const SqueezedThermalSpec &spec,
    double r,
    double t,
    const TwoModeGateOptions &options,
    std::array<double, 2> identity_outcomes) {
    auto circuit = prepare_two_mode(state, a, b, spec);
    circuit.measurements[0].outcome = r;
    circuit.measurements[1].outcome = t;
    auto measured = condition_on_quadratures(circuit.joint, circuit.measurements);

    GateStepRecord record;
    record.kind = StepKind::kTwoMode;
    record.modes = {a, b};
    record.outcomes = {r, t};
    record.corrections = {{'Z', a, -t}, {'Z', b, -r}};

    GateResult result{finish_two_mode(measured.state, a, b, r, t), measured.density, std::move(record)};
    if (options.identity_gates) {
        auto first = one_mode_gate_conditioned(result.state, a, spec, 0, identity_outcomes[0]);
        auto second = one_mode_gate_conditioned(first.state, b, spec, 0, identity_outcomes[1]);
        result.state = second.state;
        result.density *= first.density * second.density;
        result.record.outcomes.push_back(identity_outcomes[0]);
        result.record.outcomes.push_back(identity_outcomes[1]);
        result.record.corrections.push_back(first.record.corrections.front());
        result.record.corrections.push_back(second.record.corrections.front());
    }
    return result;
}

OutcomeDistribution cvc::two_mode_gate_outcome_distribution(
    const GaussianState &state, size_t a, size_t b, const SqueezedThermalSpec &spec) {
    auto circuit = prepare_two_mode(state, a, b, spec);
    return homodyne_outcome_distribution(circuit.joint, circuit.measurements);
}

GaussianState cvc::two_mode_gate_averaged(
    const GaussianState &state, size_t a, size_t b, double epsilon, const TwoModeGateOptions &options) {
    check_epsilon(epsilon);
    size_t n = state.num_modes();
    auto out = apply_symplectic(state, controlled_z(n, a, b, -1.0));
    Eigen::MatrixXd cov = out.cov();
    for (size_t mode : {a, b}) {
        auto p = static_cast<Eigen::Index>(out.p_index(mode));
        cov(p, p) += epsilon;
    }
    GaussianState result(out.mean(), std::move(cov));
    if (options.identity_gates) {
        result = one_mode_gate_averaged(result, a, epsilon, 0);
        result = one_mode_gate_averaged(result, b, epsilon, 0);
    }
    return result;
}

GaussianState cvc::two_mode_gate_exact_average(
    const GaussianState &state, size_t a, size_t b, const SqueezedThermalSpec &spec) {
    auto circuit = prepare_two_mode(state, a, b, spec);
    HomodyneConditioner conditioner(circuit.joint, circuit.measurements);
    return total_covariance_average(conditioner.outcome_distribution(), [&](const Eigen::VectorXd &o) {
        return finish_two_mode(conditioner(o).state, a, b, o(0), o(1));
    });
}

GaussianState cvc::two_mode_gate_monte_carlo_average(
    const GaussianState &state, size_t a, size_t b, const SqueezedThermalSpec &spec, size_t samples, uint64_t seed) {
    auto circuit = prepare_two_mode(state, a, b, spec);
    HomodyneConditioner conditioner(circuit.joint, circuit.measurements);
    auto outcomes = stratified_outcomes(conditioner.outcome_distribution(), samples, seed);
    return monte_carlo_average(outcomes, [&](const Eigen::VectorXd &o) {
        return finish_two_mode(conditioner(o).state, a, b, o(0), o(1));
    });
}

// ---------------------------------------------------------------------------
// Noise budget
// ---------------------------------------------------------------------------

std::vector<NoiseBudget> cvc::noise_budget(const std::vector<GateStepRecord> &steps, size_t num_modes, double epsilon) {
    if (steps.empty()) {
        throw std::invalid_argument("noise budget needs at least one step");
    }
    if (num_modes == 0) {
        throw std::invalid_argument("noise budget needs at least one mode");
    }
    check_epsilon(epsilon);
    auto d = static_cast<Eigen::Index>(2 * num_modes);
    GaussianState probe(Eigen::VectorXd::Zero(d), Eigen::MatrixXd::Zero(d, d));
    for (const auto &step : steps) {
        switch (step.kind) {
            case StepKind::kOneMode:
                if (step.modes.size() != 1) {
                    throw std::invalid_argument("one-mode step needs exactly one mode");
                }
                probe = one_mode_gate_averaged(probe, step.modes[0], epsilon, step.m);
                break;
            case StepKind::kTwoMode:
                if (step.modes.size() != 2) {
                    throw std::invalid_argument("two-mode step needs exactly two modes");
                }
                probe = two_mode_gate_averaged(probe, step.modes[0], step.modes[1], epsilon);
                break;
            case StepKind::kDeletion:
                // Exact deletion adds no noise.
                break;
            default:
                throw std::invalid_argument("unknown step kind");
        }
    }
    std::vector<NoiseBudget> out(num_modes);
    for (size_t k = 0; k < num_modes; k++) {
        out[k].q = probe.cov()(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k));
        out[k].p = probe.cov()(static_cast<Eigen::Index>(k + num_modes), static_cast<Eigen::Index>(k + num_modes));
    }
    return out;
}
