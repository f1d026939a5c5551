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

#include "cvcluster/symplectic.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>

using namespace cvc;

namespace {

void check_mode(size_t num_modes, size_t mode) {
    if (mode >= num_modes) {
        throw std::out_of_range(
            "mode index " + std::to_string(mode) + " out of range for " + std::to_string(num_modes) + " modes");
    }
}

void check_distinct(size_t a, size_t b) {
    if (a == b) {
        throw std::invalid_argument("two-mode gate needs distinct modes");
    }
}

// Writes a 2x2 block acting on the (q, p) pair of one mode.
void set_mode_block(SymplecticTransform &t, size_t mode, double qq, double qp, double pq, double pp) {
    auto n = static_cast<Eigen::Index>(t.num_modes());
    auto q = static_cast<Eigen::Index>(mode);
    t.matrix(q, q) = qq;
    t.matrix(q, q + n) = qp;
    t.matrix(q + n, q) = pq;
    t.matrix(q + n, q + n) = pp;
}

}  // namespace

SymplecticTransform SymplecticTransform::identity(size_t num_modes) {
    if (num_modes == 0) {
        throw std::invalid_argument("transform needs at least one mode");
    }
    auto d = static_cast<Eigen::Index>(2 * num_modes);
    return {Eigen::MatrixXd::Identity(d, d), Eigen::VectorXd::Zero(d)};
}

size_t SymplecticTransform::num_modes() const {
    return static_cast<size_t>(matrix.rows() / 2);
}

double SymplecticTransform::symplectic_defect() const {
    if (matrix.rows() != matrix.cols() || matrix.rows() % 2 != 0 || shift.size() != matrix.rows()) {
        return INFINITY;
    }
    Eigen::MatrixXd omega = symplectic_form(num_modes());
    return (matrix.transpose() * omega * matrix - omega).cwiseAbs().maxCoeff();
}

bool SymplecticTransform::is_symplectic(double tolerance) const {
    return symplectic_defect() < tolerance;
}

SymplecticTransform SymplecticTransform::then(const SymplecticTransform &next) const {
    if (next.matrix.rows() != matrix.rows()) {
        throw std::invalid_argument("cannot compose transforms on different mode counts");
    }
    return {next.matrix * matrix, next.matrix * shift + next.shift};
}

SymplecticTransform SymplecticTransform::inverse() const {
    // S^{-1} = -Omega S^T Omega for symplectic S.
    Eigen::MatrixXd omega = symplectic_form(num_modes());
    Eigen::MatrixXd inv = -omega * matrix.transpose() * omega;
    return {inv, -inv * shift};
}

Eigen::VectorXd SymplecticTransform::pull_back(const Eigen::VectorXd &x) const {
    Eigen::MatrixXd omega = symplectic_form(num_modes());
    return -omega * (matrix.transpose() * (omega * (x - shift)));
}

SymplecticTransform cvc::controlled_z(size_t num_modes, size_t a, size_t b, double g) {
    check_mode(num_modes, a);
    check_mode(num_modes, b);
    check_distinct(a, b);
    auto t = SymplecticTransform::identity(num_modes);
    auto n = static_cast<Eigen::Index>(num_modes);
    auto ia = static_cast<Eigen::Index>(a);
    auto ib = static_cast<Eigen::Index>(b);
    t.matrix(ia + n, ib) = g;
    t.matrix(ib + n, ia) = g;
    return t;
}

SymplecticTransform cvc::shear(size_t num_modes, size_t mode, double m) {
    check_mode(num_modes, mode);
    auto t = SymplecticTransform::identity(num_modes);
    set_mode_block(t, mode, 1, 0, m, 1);
    return t;
}

SymplecticTransform cvc::fourier(size_t num_modes, size_t mode) {
    check_mode(num_modes, mode);
    auto t = SymplecticTransform::identity(num_modes);
    set_mode_block(t, mode, 0, -1, 1, 0);
    return t;
}

SymplecticTransform cvc::displace_q(size_t num_modes, size_t mode, double amount) {
    check_mode(num_modes, mode);
    auto t = SymplecticTransform::identity(num_modes);
    t.shift(static_cast<Eigen::Index>(mode)) = amount;
    return t;
}

SymplecticTransform cvc::displace_p(size_t num_modes, size_t mode, double amount) {
    check_mode(num_modes, mode);
    auto t = SymplecticTransform::identity(num_modes);
    t.shift(static_cast<Eigen::Index>(mode + num_modes)) = amount;
    return t;
}

SymplecticTransform cvc::phase_rotation(size_t num_modes, size_t mode, double theta) {
    check_mode(num_modes, mode);
    auto t = SymplecticTransform::identity(num_modes);
    double c = std::cos(theta);
    double s = std::sin(theta);
    set_mode_block(t, mode, c, -s, s, c);
    return t;
}

SymplecticTransform cvc::squeezer(size_t num_modes, size_t mode, double r) {
    check_mode(num_modes, mode);
    auto t = SymplecticTransform::identity(num_modes);
    set_mode_block(t, mode, std::exp(-r), 0, 0, std::exp(r));
    return t;
}

SymplecticTransform cvc::beam_splitter(size_t num_modes, size_t a, size_t b, double theta) {
    check_mode(num_modes, a);
    check_mode(num_modes, b);
    check_distinct(a, b);
    auto t = SymplecticTransform::identity(num_modes);
    auto n = static_cast<Eigen::Index>(num_modes);
    double c = std::cos(theta);
    double s = std::sin(theta);
    for (Eigen::Index off : {Eigen::Index{0}, n}) {
        auto ia = static_cast<Eigen::Index>(a) + off;
        auto ib = static_cast<Eigen::Index>(b) + off;
        t.matrix(ia, ia) = c;
        t.matrix(ia, ib) = -s;
        t.matrix(ib, ia) = s;
        t.matrix(ib, ib) = c;
    }
    return t;
}

SymplecticTransform cvc::standard_transform(size_t num_modes, const GateSpec &gate) {
    auto need = [&](size_t count) {
        if (gate.modes.size() != count) {
            throw std::invalid_argument("gate expects " + std::to_string(count) + " mode indices");
        }
    };
    switch (gate.kind) {
        case GateKind::kControlledZ:
            need(2);
            return controlled_z(num_modes, gate.modes[0], gate.modes[1], gate.parameter);
        case GateKind::kShear:
            need(1);
            return shear(num_modes, gate.modes[0], gate.parameter);
        case GateKind::kFourier:
            need(1);
            return fourier(num_modes, gate.modes[0]);
        case GateKind::kDisplaceQ:
            need(1);
            return displace_q(num_modes, gate.modes[0], gate.parameter);
        case GateKind::kDisplaceP:
            need(1);
            return displace_p(num_modes, gate.modes[0], gate.parameter);
    }
    throw std::invalid_argument("unknown gate kind");
}

GaussianState cvc::apply_symplectic(const GaussianState &state, const SymplecticTransform &transform) {
    if (transform.matrix.rows() != state.mean().size() || transform.matrix.cols() != state.mean().size() ||
        transform.shift.size() != state.mean().size()) {
        throw std::invalid_argument("transform dimension does not match the state");
    }
    double scale = std::max(1.0, transform.matrix.cwiseAbs().maxCoeff());
    if (!transform.is_symplectic(1e-9 * scale * scale)) {
        throw std::invalid_argument("transform is not symplectic");
    }
    Eigen::VectorXd mean = transform.matrix * state.mean() + transform.shift;
    Eigen::MatrixXd cov = transform.matrix * state.cov() * transform.matrix.transpose();
    return GaussianState(std::move(mean), 0.5 * (cov + cov.transpose()));
}

SymplecticTransform cvc::random_symplectic(size_t num_modes, uint64_t seed, double max_squeeze) {
    if (num_modes == 0) {
        throw std::invalid_argument("need at least one mode");
    }
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
    std::uniform_real_distribution<double> squeeze(-max_squeeze, max_squeeze);
    std::uniform_real_distribution<double> slope(-1.0, 1.0);
    auto t = SymplecticTransform::identity(num_modes);
    for (int layer = 0; layer < 2; layer++) {
        for (size_t k = 0; k < num_modes; k++) {
            t = t.then(phase_rotation(num_modes, k, angle(rng)));
            t = t.then(squeezer(num_modes, k, squeeze(rng)));
            t = t.then(shear(num_modes, k, slope(rng)));
        }
        for (size_t k = 0; k + 1 < num_modes; k++) {
            t = t.then(beam_splitter(num_modes, k, k + 1, angle(rng)));
        }
    }
    return t;
}

GaussianState cvc::random_gaussian_state(
    size_t num_modes, uint64_t seed, double max_squeeze, double max_excess, double mean_scale) {
    std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
    std::uniform_real_distribution<double> excess(0.0, max_excess);
    std::normal_distribution<double> normal(0.0, mean_scale);
    auto n = static_cast<Eigen::Index>(num_modes);
    Eigen::VectorXd nu(2 * n);
    for (Eigen::Index k = 0; k < n; k++) {
        nu(k) = nu(k + n) = kVacuumVariance + excess(rng);
    }
    Eigen::VectorXd mean(2 * n);
    for (Eigen::Index k = 0; k < 2 * n; k++) {
        mean(k) = normal(rng);
    }
    auto s = random_symplectic(num_modes, seed, max_squeeze).matrix;
    Eigen::MatrixXd cov = s * nu.asDiagonal() * s.transpose();
    return GaussianState(std::move(mean), 0.5 * (cov + cov.transpose()));
}
