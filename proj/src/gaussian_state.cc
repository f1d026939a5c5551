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

#include "cvcluster/gaussian_state.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

using namespace cvc;

SqueezedThermalSpec SqueezedThermalSpec::from_squeezing_db(double squeezing_db, double delta) {
    // A measured squeezed variance eps reads 10 log10(2 eps) dB, and eps = 1/(2 s^2).
    SqueezedThermalSpec spec{std::pow(10.0, squeezing_db / 20.0), delta};
    spec.validate();
    return spec;
}

double SqueezedThermalSpec::epsilon() const {
    return 0.5 / (s * s);
}

double SqueezedThermalSpec::kappa() const {
    return 0.5 * (s * s + delta * delta);
}

double SqueezedThermalSpec::epsilon0() const {
    return epsilon();
}

double SqueezedThermalSpec::kappa0() const {
    return 0.5 * s * s;
}

double SqueezedThermalSpec::squeezing_parameter() const {
    return 0.5 * std::log(s);
}

void SqueezedThermalSpec::validate() const {
    if (!(s >= 1.0) || !std::isfinite(s)) {
        throw std::invalid_argument("squeezing factor s must be >= 1, got " + std::to_string(s));
    }
    if (!(delta >= 0.0) || !std::isfinite(delta)) {
        throw std::invalid_argument("excess anti-squeezing delta must be >= 0, got " + std::to_string(delta));
    }
}

GaussianState::GaussianState(Eigen::VectorXd mean, Eigen::MatrixXd cov)
    : n_(static_cast<size_t>(mean.size() / 2)), mean_(std::move(mean)), cov_(std::move(cov)) {
    if (mean_.size() % 2 != 0) {
        throw std::invalid_argument("mean vector must have even length 2n");
    }
    if (cov_.rows() != mean_.size() || cov_.cols() != mean_.size()) {
        throw std::invalid_argument("covariance matrix must be 2n x 2n to match the mean vector");
    }
    if (n_ == 0) {
        return;
    }
    double scale = std::max(1.0, cov_.cwiseAbs().maxCoeff());
    if ((cov_ - cov_.transpose()).cwiseAbs().maxCoeff() > kSymmetryTolerance * scale) {
        throw std::invalid_argument("covariance matrix is not symmetric");
    }
    cov_ = 0.5 * (cov_ + cov_.transpose()).eval();
}

size_t GaussianState::q_index(size_t mode) const {
    if (mode >= n_) {
        throw std::out_of_range("mode index " + std::to_string(mode) + " out of range for " + std::to_string(n_) + " modes");
    }
    return mode;
}

size_t GaussianState::p_index(size_t mode) const {
    return q_index(mode) + n_;
}

double GaussianState::min_symplectic_eigenvalue() const {
    if (n_ == 0) {
        return INFINITY;
    }
    return symplectic_eigenvalues(cov_)(0);
}

bool GaussianState::is_physical(double tolerance) const {
    if (n_ == 0) {
        return true;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov_, Eigen::EigenvaluesOnly);
    if (solver.eigenvalues().minCoeff() <= 0) {
        return false;
    }
    return min_symplectic_eigenvalue() >= kVacuumVariance - tolerance;
}

void GaussianState::require_physical() const {
    if (!is_physical()) {
        throw std::invalid_argument("Gaussian state is not physical (symplectic eigenvalue below 1/2)");
    }
}

double GaussianState::wigner(const Eigen::VectorXd &x) const {
    if (x.size() != mean_.size()) {
        throw std::invalid_argument("phase-space point has the wrong dimension");
    }
    Eigen::LLT<Eigen::MatrixXd> llt(cov_);
    if (llt.info() != Eigen::Success) {
        throw std::invalid_argument("covariance matrix is not positive definite");
    }
    Eigen::VectorXd d = x - mean_;
    Eigen::VectorXd y = llt.matrixL().solve(d);
    double log_det = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
    double dim = static_cast<double>(mean_.size());
    return std::exp(-0.5 * y.squaredNorm() - 0.5 * log_det - 0.5 * dim * std::log(2.0 * std::numbers::pi));
}

namespace {

// Phase-space row indices of the given modes: all q's first, then all p's.
std::vector<Eigen::Index> phase_space_indices(std::span<const size_t> modes, size_t n) {
    std::vector<Eigen::Index> idx;
    idx.reserve(2 * modes.size());
    for (size_t m : modes) {
        idx.push_back(static_cast<Eigen::Index>(m));
    }
    for (size_t m : modes) {
        idx.push_back(static_cast<Eigen::Index>(m + n));
    }
    return idx;
}

}  // namespace

GaussianState GaussianState::tensor(const GaussianState &other) const {
    size_t n = n_ + other.n_;
    Eigen::VectorXd mean(2 * n);
    Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(2 * n, 2 * n);
    std::vector<size_t> left(n_), right(other.n_);
    for (size_t k = 0; k < n_; k++) {
        left[k] = k;
    }
    for (size_t k = 0; k < other.n_; k++) {
        right[k] = n_ + k;
    }
    auto li = phase_space_indices(left, n);
    auto ri = phase_space_indices(right, n);
    mean(li) = mean_;
    mean(ri) = other.mean_;
    cov(li, li) = cov_;
    cov(ri, ri) = other.cov_;
    return GaussianState(std::move(mean), std::move(cov));
}

GaussianState GaussianState::marginal(std::span<const size_t> modes) const {
    if (modes.empty()) {
        throw std::invalid_argument("marginal needs at least one mode");
    }
    std::vector<bool> seen(n_, false);
    for (size_t m : modes) {
        q_index(m);
        if (seen[m]) {
            throw std::invalid_argument("duplicate mode in marginal");
        }
        seen[m] = true;
    }
    auto idx = phase_space_indices(modes, n_);
    return GaussianState(mean_(idx), cov_(idx, idx));
}

GaussianState GaussianState::without_modes(std::span<const size_t> modes) const {
    std::vector<bool> drop(n_, false);
    for (size_t m : modes) {
        q_index(m);
        drop[m] = true;
    }
    std::vector<size_t> keep;
    for (size_t k = 0; k < n_; k++) {
        if (!drop[k]) {
            keep.push_back(k);
        }
    }
    if (keep.empty()) {
        return GaussianState(Eigen::VectorXd(0), Eigen::MatrixXd(0, 0));
    }
    return marginal(keep);
}

GaussianState GaussianState::with_mode_moved(size_t from, size_t to) const {
    q_index(from);
    q_index(to);
    std::vector<size_t> order;
    for (size_t k = 0; k < n_; k++) {
        if (k != from) {
            order.push_back(k);
        }
    }
    order.insert(order.begin() + static_cast<std::ptrdiff_t>(to), from);
    return marginal(order);
}

double GaussianState::distance(const GaussianState &other) const {
    if (other.n_ != n_) {
        throw std::invalid_argument("cannot compare states with different mode counts");
    }
    if (n_ == 0) {
        return 0.0;
    }
    return std::max((mean_ - other.mean_).cwiseAbs().maxCoeff(), (cov_ - other.cov_).cwiseAbs().maxCoeff());
}

GaussianState cvc::vacuum_state(size_t num_modes) {
    if (num_modes == 0) {
        throw std::invalid_argument("vacuum_state needs at least one mode");
    }
    return GaussianState(
        Eigen::VectorXd::Zero(2 * num_modes), kVacuumVariance * Eigen::MatrixXd::Identity(2 * num_modes, 2 * num_modes));
}

GaussianState cvc::squeezed_thermal_state(const SqueezedThermalSpec &spec) {
    spec.validate();
    Eigen::MatrixXd cov(2, 2);
    cov << spec.kappa(), 0, 0, spec.epsilon();
    return GaussianState(Eigen::VectorXd::Zero(2), std::move(cov));
}

Eigen::MatrixXd cvc::symplectic_form(size_t num_modes) {
    auto n = static_cast<Eigen::Index>(num_modes);
    Eigen::MatrixXd omega = Eigen::MatrixXd::Zero(2 * n, 2 * n);
    omega.topRightCorner(n, n) = Eigen::MatrixXd::Identity(n, n);
    omega.bottomLeftCorner(n, n) = -Eigen::MatrixXd::Identity(n, n);
    return omega;
}

Eigen::VectorXd cvc::symplectic_eigenvalues(const Eigen::MatrixXd &cov) {
    if (cov.rows() != cov.cols() || cov.rows() % 2 != 0) {
        throw std::invalid_argument("covariance matrix must be square with even dimension");
    }
    double scale = std::max(1.0, cov.cwiseAbs().maxCoeff());
    if ((cov - cov.transpose()).cwiseAbs().maxCoeff() > kSymmetryTolerance * scale) {
        throw std::invalid_argument("covariance matrix is not symmetric");
    }
    size_t n = static_cast<size_t>(cov.rows() / 2);
    if (n == 0) {
        return Eigen::VectorXd(0);
    }

    // With A = cov^{1/2} Omega cov^{1/2} (antisymmetric), -A^2 is symmetric with
    // eigenvalues nu_k^2, each appearing twice.
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> root_solver(0.5 * (cov + cov.transpose()));
    Eigen::VectorXd lambda = root_solver.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    Eigen::MatrixXd root = root_solver.eigenvectors() * lambda.asDiagonal() * root_solver.eigenvectors().transpose();
    Eigen::MatrixXd a = root * symplectic_form(n) * root;
    Eigen::MatrixXd neg_sq = -(a * a);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(0.5 * (neg_sq + neg_sq.transpose()), Eigen::EigenvaluesOnly);
    Eigen::VectorXd sq = solver.eigenvalues();

    Eigen::VectorXd nu(n);
    for (size_t k = 0; k < n; k++) {
        double pair = 0.5 * (sq(2 * k) + sq(2 * k + 1));
        nu(k) = std::sqrt(std::max(pair, 0.0));
    }
    return nu;
}

Eigen::VectorXd cvc::symplectic_eigenvalues(const GaussianState &state) {
    return symplectic_eigenvalues(state.cov());
}

nlohmann::json cvc::to_json(const GaussianState &state) {
    nlohmann::json j;
    j["n_modes"] = state.num_modes();
    j["mean"] = std::vector<double>(state.mean().data(), state.mean().data() + state.mean().size());
    auto cov = nlohmann::json::array();
    for (Eigen::Index r = 0; r < state.cov().rows(); r++) {
        std::vector<double> row(static_cast<size_t>(state.cov().cols()));
        for (Eigen::Index c = 0; c < state.cov().cols(); c++) {
            row[static_cast<size_t>(c)] = state.cov()(r, c);
        }
        cov.push_back(row);
    }
    j["cov"] = cov;
    return j;
}

GaussianState cvc::gaussian_state_from_json(const nlohmann::json &j) {
    auto n = j.at("n_modes").get<size_t>();
    auto mean_values = j.at("mean").get<std::vector<double>>();
    auto cov_rows = j.at("cov").get<std::vector<std::vector<double>>>();
    if (mean_values.size() != 2 * n || cov_rows.size() != 2 * n) {
        throw std::invalid_argument("state JSON dimensions do not match n_modes");
    }
    Eigen::VectorXd mean = Eigen::Map<Eigen::VectorXd>(mean_values.data(), static_cast<Eigen::Index>(2 * n));
    Eigen::MatrixXd cov(2 * n, 2 * n);
    for (size_t r = 0; r < 2 * n; r++) {
        if (cov_rows[r].size() != 2 * n) {
            throw std::invalid_argument("state JSON covariance row has the wrong length");
        }
        for (size_t c = 0; c < 2 * n; c++) {
            cov(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = cov_rows[r][c];
        }
    }
    return GaussianState(std::move(mean), std::move(cov));
}
