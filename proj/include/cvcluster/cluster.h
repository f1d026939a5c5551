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

#ifndef CVCLUSTER_CLUSTER_H
#define CVCLUSTER_CLUSTER_H

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cvcluster/gaussian_state.h"
#include "cvcluster/measurement.h"
#include "cvcluster/threshold.h"
#include "json.hpp"

namespace cvc {

// ---------------------------------------------------------------------------
// Flowerbed lattice
// ---------------------------------------------------------------------------

enum class NodeKind {
    kThermalBase,
    kGkpAncillaMarker,
    kInput,
    kOutput,
};

std::string node_kind_name(NodeKind kind);

struct FlowerbedNode {
    size_t id;
    NodeKind kind;
    int row;
    int col;

    /// Ancilla markers are bookkeeping only and never own a mode.
    bool carries_mode() const {
        return kind != NodeKind::kGkpAncillaMarker;
    }
};

/// Undirected CZ[weight] edge.
struct FlowerbedEdge {
    size_t a;
    size_t b;
    double weight;
};

/// Square-lattice cluster graph with GKP ancilla markers.
///
/// Mode-carrying nodes map to state modes in node-list order, so removing a
/// node shifts the modes of every later node down by one.
class FlowerbedGraph {
   public:
    const std::vector<FlowerbedNode> &nodes() const {
        return nodes_;
    }
    const std::vector<FlowerbedEdge> &edges() const {
        return edges_;
    }

    size_t add_node(NodeKind kind, int row, int col);
    void add_edge(size_t a, size_t b, double weight);
    void remove_node(size_t id);
    /// Changes the kind of a mode-carrying node (e.g. to mark inputs).
    void set_kind(size_t id, NodeKind kind);

    const FlowerbedNode &node(size_t id) const;
    bool contains(size_t id) const;
    std::optional<size_t> node_at(int row, int col) const;
    size_t num_modes() const;
    /// Mode index of a mode-carrying node.
    size_t mode_of(size_t id) const;
    /// Neighbors joined by edges, with weights, in edge order.
    std::vector<std::pair<size_t, double>> neighbors(size_t id) const;
    /// Number of edges to other mode-carrying nodes.
    size_t base_degree(size_t id) const;

    nlohmann::json to_json() const;

   private:
    std::vector<FlowerbedNode> nodes_;
    std::vector<FlowerbedEdge> edges_;
    size_t next_id_ = 0;
};

struct FlowerbedOptions {
    size_t mode_cap = 64;
    /// An ancilla marker hangs off every base node whose row and column are
    /// both multiples of this interval.
    int ancilla_interval = 2;
};

struct Flowerbed {
    FlowerbedGraph graph;
    GaussianState state;
};

/// Product of squeezed thermal states with CZ[1] on every lattice edge
/// (applied row-major).
Flowerbed build_flowerbed(int rows, int cols, const SqueezedThermalSpec &spec, const FlowerbedOptions &options = {});

/// Fresh squeezed thermal state on every mode-carrying node, then CZ[weight]
/// along every edge between mode-carrying nodes, in edge-list order.
GaussianState prepare_graph_state(const FlowerbedGraph &graph, const SqueezedThermalSpec &spec);

// ---------------------------------------------------------------------------
// Step records
// ---------------------------------------------------------------------------

enum class StepKind {
    kOneMode,
    kTwoMode,
    kDeletion,
};

std::string step_kind_name(StepKind kind);
StepKind parse_step_kind(const std::string &name);

/// Outcome-dependent displacement X(amount) or Z(amount) on one mode.
struct Correction {
    char op;
    size_t mode;
    double amount;
};

struct GateStepRecord {
    StepKind kind = StepKind::kOneMode;
    int m = 0;
    std::vector<size_t> modes;
    std::vector<double> outcomes;
    std::vector<Correction> corrections;
};

nlohmann::json to_json(const GateStepRecord &record);
GateStepRecord gate_step_from_json(const nlohmann::json &j);

// ---------------------------------------------------------------------------
// Deletion
// ---------------------------------------------------------------------------

struct DeletionResult {
    Flowerbed flowerbed;
    GateStepRecord record;
};

/// q-measures a thermal-base node and undoes the induced Z(g s) on every
/// neighbor. Input/output nodes and markers are rejected.
DeletionResult delete_node(const Flowerbed &flowerbed, size_t node_id, double outcome);
/// As above with the outcome drawn from the node's exact q marginal.
DeletionResult delete_node_sampled(const Flowerbed &flowerbed, size_t node_id, uint64_t seed);

// ---------------------------------------------------------------------------
// One-mode gate
// ---------------------------------------------------------------------------

struct GateResult {
    GaussianState state;
    double density;
    GateStepRecord record;
};

/// Attaches a fresh squeezed thermal node to `in_mode` by CZ[1], measures
/// p + m q on the input and applies X(-t) to the fresh node. The output takes
/// the input's mode index.
GateResult one_mode_gate_conditioned(
    const GaussianState &state, size_t in_mode, const SqueezedThermalSpec &spec, int m, double t);

/// Distribution of the outcome t of the conditioned one-mode gate.
OutcomeDistribution one_mode_gate_outcome_distribution(
    const GaussianState &state, size_t in_mode, const SqueezedThermalSpec &spec, int m);

/// Outcome-averaged one-mode gate: Fourier after shear, then epsilon added to
/// the output momentum variance. Takes no kappa.
GaussianState one_mode_gate_averaged(const GaussianState &state, size_t in_mode, double epsilon, int m);

/// Density-weighted average of the conditioned channel, computed in closed
/// form by the law of total covariance.
GaussianState one_mode_gate_exact_average(
    const GaussianState &state, size_t in_mode, const SqueezedThermalSpec &spec, int m);

/// Same average estimated from `samples` outcomes drawn (stratified) from the
/// outcome density, each pushed through the conditioned channel.
GaussianState one_mode_gate_monte_carlo_average(
    const GaussianState &state, size_t in_mode, const SqueezedThermalSpec &spec, int m, size_t samples, uint64_t seed);

// ---------------------------------------------------------------------------
// Two-mode gate
// ---------------------------------------------------------------------------

struct TwoModeGateOptions {
    /// Follow the gate with identity one-mode gates (m = 0) on both outputs.
    bool identity_gates = false;
};

/// Two fresh nodes joined to the inputs along the chain a - f2 - f3 - b, both
/// fresh nodes measured in p (outcomes r on f2, t on f3), then Z(-t) on `a`
/// and Z(-r) on `b`. With identity gates, `identity_outcomes` supplies the two
/// follow-up outcomes (for `a`, then `b`).
GateResult two_mode_gate_conditioned(
    const GaussianState &state,
    size_t a,
    size_t b,
    const SqueezedThermalSpec &spec,
    double r,
    double t,
    const TwoModeGateOptions &options = {},
    std::array<double, 2> identity_outcomes = {0.0, 0.0});

/// Joint distribution of (r, t) for the conditioned two-mode gate (no
/// identity gates).
OutcomeDistribution two_mode_gate_outcome_distribution(
    const GaussianState &state, size_t a, size_t b, const SqueezedThermalSpec &spec);

/// CZ[-1] between the modes, then epsilon added to both momentum variances.
GaussianState two_mode_gate_averaged(
    const GaussianState &state, size_t a, size_t b, double epsilon, const TwoModeGateOptions &options = {});

GaussianState two_mode_gate_exact_average(
    const GaussianState &state, size_t a, size_t b, const SqueezedThermalSpec &spec);

GaussianState two_mode_gate_monte_carlo_average(
    const GaussianState &state, size_t a, size_t b, const SqueezedThermalSpec &spec, size_t samples, uint64_t seed);

// ---------------------------------------------------------------------------
// Noise budget
// ---------------------------------------------------------------------------

/// Per-mode noise accumulated by a sequence of outcome-averaged steps, found
/// by pushing a zero-covariance probe through the averaged channels. Only
/// `kind`, `m` and `modes` of each step are used.
std::vector<NoiseBudget> noise_budget(const std::vector<GateStepRecord> &steps, size_t num_modes, double epsilon);

}  // namespace cvc

#endif
