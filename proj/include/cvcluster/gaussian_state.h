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

#ifndef CVCLUSTER_GAUSSIAN_STATE_H
#define CVCLUSTER_GAUSSIAN_STATE_H

#include <Eigen/Dense>
#include <cstddef>
#include <span>

#include "json.hpp"

namespace cvc {

/// Quadrature variance of the vacuum (hbar = 1).
constexpr double kVacuumVariance = 0.5;
constexpr double kSymmetryTolerance = 1e-12;
constexpr double kPhysicalityTolerance = 1e-9;

/// A momentum-squeezed thermal state described by its measured variances.
///
/// The squeezed (p) variance is epsilon = 1/(2 s^2). The anti-squeezed (q)
/// variance is kappa = (s^2 + delta^2)/2, i.e. the pure-state value plus an
/// excess delta^2/2.
struct SqueezedThermalSpec {
    double s = 1.0;
    double delta = 0.0;

    /// Builds a spec from a positive "dB of squeezing" magnitude.
    static SqueezedThermalSpec from_squeezing_db(double squeezing_db, double delta = 0.0);

    double epsilon() const;
    double kappa() const;
    double epsilon0() const;
    double kappa0() const;
    /// r with s = e^{2r}.
    double squeezing_parameter() const;

    /// Throws std::invalid_argument unless s >= 1 and delta >= 0.
    void validate() const;
};

/// Mean vector and covariance matrix of an n-mode Gaussian state.
///
/// Phase-space ordering is (q_1..q_n, p_1..p_n). Construction enforces shape
/// and symmetry only; physicality is a query (`is_physical`) so the same type
/// can carry noise probes with zero covariance.
class GaussianState {
   public:
    GaussianState(Eigen::VectorXd mean, Eigen::MatrixXd cov);

    size_t num_modes() const {
        return n_;
    }
    const Eigen::VectorXd &mean() const {
        return mean_;
    }
    const Eigen::MatrixXd &cov() const {
        return cov_;
    }
    size_t q_index(size_t mode) const;
    size_t p_index(size_t mode) const;

    double min_symplectic_eigenvalue() const;
    bool is_physical(double tolerance = kPhysicalityTolerance) const;
    /// Throws std::invalid_argument if the state violates the uncertainty principle.
    void require_physical() const;

    /// Value of the (normalized Gaussian) Wigner function at phase-space point x.
    double wigner(const Eigen::VectorXd &x) const;

    /// Appends the modes of `other` after this state's modes.
    GaussianState tensor(const GaussianState &other) const;
    /// Reduced state on the listed modes, in the listed order.
    GaussianState marginal(std::span<const size_t> modes) const;
    /// Removes the listed modes; the survivors keep their relative order.
    GaussianState without_modes(std::span<const size_t> modes) const;
    /// Moves mode `from` to position `to`, shifting the modes in between.
    GaussianState with_mode_moved(size_t from, size_t to) const;

    /// Largest absolute entry-wise difference in mean and covariance.
    double distance(const GaussianState &other) const;

   private:
    size_t n_;
    Eigen::VectorXd mean_;
    Eigen::MatrixXd cov_;
};

GaussianState vacuum_state(size_t num_modes);
GaussianState squeezed_thermal_state(const SqueezedThermalSpec &spec);

/// The canonical form Omega = [[0, I], [-I, 0]] for (q.., p..) ordering.
Eigen::MatrixXd symplectic_form(size_t num_modes);

/// Sorted (ascending) symplectic eigenvalues of a symmetric positive
/// semi-definite 2n x 2n covariance matrix.
Eigen::VectorXd symplectic_eigenvalues(const Eigen::MatrixXd &cov);
Eigen::VectorXd symplectic_eigenvalues(const GaussianState &state);

nlohmann::json to_json(const GaussianState &state);
GaussianState gaussian_state_from_json(const nlohmann::json &j);

}  // namespace cvc

#endif
