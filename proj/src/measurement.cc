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

#include "cvcluster/measurement.h"

#include <array>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>

using namespace cvc;

Quadrature Quadrature::position() {
    return {1.0, 0.0};
}

Quadrature Quadrature::momentum() {
    return {0.0, 1.0};
}

Quadrature Quadrature::sheared_momentum(int m) {
    if (m != 0 && m != 1) {
        throw std::invalid_argument("shear measurement index m must be 0 or 1, got " + std::to_string(m));
    }
    return {static_cast<double>(m), 1.0};
}

std::string Quadrature::label() const {
    if (q_weight == 1.0 && p_weight == 0.0) {
        return "q";
    }
    if (q_weight == 0.0 && p_weight == 1.0) {
        return "p";
    }
    if (q_weight == 1.0 && p_weight == 1.0) {
        return "p+q";
    }
    std::ostringstream out;
    out << p_weight << "*p+" << q_weight << "*q";
    return out.str();
}

namespace {

struct PseudoInverse {
    Eigen::MatrixXd inverse;
    double log_pseudo_det;
    Eigen::Index rank;
};

// Moore-Penrose pseudo-inverse of a symmetric PSD matrix. Directions with
// eigenvalue below the cutoff are treated as exactly determined.
PseudoInverse symmetric_pseudo_inverse(const Eigen::MatrixXd &m) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(0.5 * (m + m.transpose()));
    const Eigen::VectorXd &ev = solver.eigenvalues();
    double cutoff = 1e-300;
    Eigen::VectorXd inv_ev = Eigen::VectorXd::Zero(ev.size());
    PseudoInverse out{Eigen::MatrixXd(), 0.0, 0};
    for (Eigen::Index k = 0; k < ev.size(); k++) {
        if (ev(k) > cutoff) {
            inv_ev(k) = 1.0 / ev(k);
            out.log_pseudo_det += std::log(ev(k));
            out.rank++;
        }
    }
    out.inverse = solver.eigenvectors() * inv_ev.asDiagonal() * solver.eigenvectors().transpose();
    return out;
}

Eigen::MatrixXd measurement_rows(const GaussianState &state, std::span<const HomodyneMeasurement> measurements) {
    if (measurements.empty()) {
        throw std::invalid_argument("need at least one measurement");
    }
    auto k = static_cast<Eigen::Index>(measurements.size());
    Eigen::MatrixXd rows = Eigen::MatrixXd::Zero(k, state.mean().size());
    for (Eigen::Index r = 0; r < k; r++) {
        const auto &meas = measurements[static_cast<size_t>(r)];
        rows(r, static_cast<Eigen::Index>(state.q_index(meas.mode))) += meas.quadrature.q_weight;
        rows(r, static_cast<Eigen::Index>(state.p_index(meas.mode))) += meas.quadrature.p_weight;
    }
    return rows;
}

double gaussian_density(const Eigen::VectorXd &residual, const PseudoInverse &pinv) {
    double quad = residual.dot(pinv.inverse * residual);
    double rank = static_cast<double>(pinv.rank);
    return std::exp(-0.5 * quad - 0.5 * pinv.log_pseudo_det - 0.5 * rank * std::log(2.0 * std::numbers::pi));
}

// A mode may carry at most one homodyne observable, except that a position
// and momentum pair on the same mode is the heterodyne readout.
void check_distinct_modes(const GaussianState &state, std::span<const HomodyneMeasurement> measurements) {
    std::vector<bool> seen(state.num_modes(), false);
    bool heterodyne_pair = measurements.size() == 2 && measurements[0].mode == measurements[1].mode &&
                           measurements[0].quadrature.q_weight == 1.0 && measurements[0].quadrature.p_weight == 0.0 &&
                           measurements[1].quadrature.q_weight == 0.0 && measurements[1].quadrature.p_weight == 1.0;
    for (const auto &m : measurements) {
        state.q_index(m.mode);
        if (seen[m.mode] && !heterodyne_pair) {
            throw std::invalid_argument("each mode can be measured at most once");
        }
        seen[m.mode] = true;
    }
}

}  // namespace

HomodyneConditioner::HomodyneConditioner(
    const GaussianState &state, std::span<const HomodyneMeasurement> measurements) {
    check_distinct_modes(state, measurements);
    Eigen::MatrixXd rows = measurement_rows(state, measurements);
    Eigen::MatrixXd cross = state.cov() * rows.transpose();
    Eigen::MatrixXd block = rows * cross;
    block = 0.5 * (block + block.transpose()).eval();
    auto pinv = symmetric_pseudo_inverse(block);

    distribution_ = {rows * state.mean(), block};
    mean_ = state.mean();
    gain_ = cross * pinv.inverse;
    Eigen::MatrixXd cov = state.cov() - gain_ * cross.transpose();
    outcome_precision_ = pinv.inverse;
    log_norm_ = -0.5 * pinv.log_pseudo_det - 0.5 * static_cast<double>(pinv.rank) * std::log(2.0 * std::numbers::pi);

    size_t n = state.num_modes();
    std::vector<bool> drop(n, false);
    for (const auto &m : measurements) {
        drop[m.mode] = true;
    }
    for (size_t half = 0; half < 2; half++) {
        for (size_t k = 0; k < n; k++) {
            if (!drop[k]) {
                kept_.push_back(static_cast<Eigen::Index>(k + half * n));
            }
        }
    }
    Eigen::MatrixXd kept_cov = cov(kept_, kept_);
    conditioned_cov_ = 0.5 * (kept_cov + kept_cov.transpose());
}

ConditionedState HomodyneConditioner::operator()(const Eigen::VectorXd &outcomes) const {
    if (outcomes.size() != distribution_.mean.size()) {
        throw std::invalid_argument("wrong number of outcome values");
    }
    Eigen::VectorXd residual = outcomes - distribution_.mean;
    Eigen::VectorXd mean = mean_ + gain_ * residual;
    double density = std::exp(-0.5 * residual.dot(outcome_precision_ * residual) + log_norm_);
    return {GaussianState(mean(kept_), conditioned_cov_), density};
}

double OutcomeDistribution::density(const Eigen::VectorXd &outcome) const {
    auto pinv = symmetric_pseudo_inverse(cov);
    return gaussian_density(outcome - mean, pinv);
}

OutcomeDistribution cvc::homodyne_outcome_distribution(
    const GaussianState &state, std::span<const HomodyneMeasurement> measurements) {
    Eigen::MatrixXd rows = measurement_rows(state, measurements);
    Eigen::MatrixXd cov = rows * state.cov() * rows.transpose();
    return {rows * state.mean(), 0.5 * (cov + cov.transpose())};
}

ConditionedState cvc::condition_on_quadratures(
    const GaussianState &state, std::span<const HomodyneMeasurement> measurements) {
    HomodyneConditioner conditioner(state, measurements);
    Eigen::VectorXd outcomes(static_cast<Eigen::Index>(measurements.size()));
    for (size_t k = 0; k < measurements.size(); k++) {
        outcomes(static_cast<Eigen::Index>(k)) = measurements[k].outcome;
    }
    return conditioner(outcomes);
}

ConditionedState cvc::condition_on_quadrature(
    const GaussianState &state, size_t mode, const Quadrature &quadrature, double outcome) {
    HomodyneMeasurement meas{mode, quadrature, outcome};
    auto dist = homodyne_outcome_distribution(state, std::span(&meas, 1));
    if (!(dist.cov(0, 0) > 0)) {
        throw std::invalid_argument("measured quadrature has zero marginal variance");
    }
    return condition_on_quadratures(state, std::span(&meas, 1));
}

ConditionedState cvc::condition_heterodyne(const GaussianState &state, size_t mode, double q_out, double p_out) {
    auto q = static_cast<Eigen::Index>(state.q_index(mode));
    auto p = static_cast<Eigen::Index>(state.p_index(mode));
    Eigen::MatrixXd cov = state.cov();
    cov(q, q) += kVacuumVariance;
    cov(p, p) += kVacuumVariance;
    GaussianState noisy(state.mean(), std::move(cov));
    std::array<HomodyneMeasurement, 2> both{{{mode, Quadrature::position(), q_out}, {mode, Quadrature::momentum(), p_out}}};
    HomodyneConditioner conditioner(noisy, both);
    return conditioner(Eigen::Vector2d(q_out, p_out));
}

double cvc::sample_quadrature(const GaussianState &state, size_t mode, const Quadrature &quadrature, uint64_t seed) {
    HomodyneMeasurement meas{mode, quadrature, 0.0};
    auto dist = homodyne_outcome_distribution(state, std::span(&meas, 1));
    double variance = dist.cov(0, 0);
    if (!(variance > 0)) {
        throw std::invalid_argument("cannot sample a quadrature with zero marginal variance");
    }
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(dist.mean(0), std::sqrt(variance));
    return normal(rng);
}
