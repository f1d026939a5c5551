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

#ifndef CVCLUSTER_MEASUREMENT_H
#define CVCLUSTER_MEASUREMENT_H

#include <Eigen/Dense>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "cvcluster/gaussian_state.h"

namespace cvc {

/// The homodyne observable q_weight * q + p_weight * p on one mode.
struct Quadrature {
    double q_weight = 0.0;
    double p_weight = 1.0;

    static Quadrature position();
    static Quadrature momentum();
    /// p + m q with m in {0, 1} (the shear measurement).
    static Quadrature sheared_momentum(int m);

    std::string label() const;
};

/// One homodyne measurement: which mode, which observable, which outcome.
struct HomodyneMeasurement {
    size_t mode;
    Quadrature quadrature;
    double outcome;
};

/// Record of an observed measurement result.
struct MeasurementOutcome {
    enum class Basis { kHomodyne, kHeterodyne };

    size_t mode = 0;
    Basis basis = Basis::kHomodyne;
    Quadrature quadrature;
    std::vector<double> values;
    double density = 0.0;
};

/// Post-measurement state (measured modes removed) and the probability
/// density of the observed outcome(s).
struct ConditionedState {
    GaussianState state;
    double density;
};

/// Mean and covariance of the joint outcome distribution of a set of
/// homodyne measurements. Outcome order follows the measurement order.
struct OutcomeDistribution {
    Eigen::VectorXd mean;
    Eigen::MatrixXd cov;

    double density(const Eigen::VectorXd &outcome) const;
};

/// Conditioning of a fixed state on a fixed set of homodyne measurements,
/// evaluated for many outcome values. The Schur-complement gain and the
/// conditioned covariance are computed once.
class HomodyneConditioner {
   public:
    HomodyneConditioner(const GaussianState &state, std::span<const HomodyneMeasurement> measurements);

    const OutcomeDistribution &outcome_distribution() const {
        return distribution_;
    }
    ConditionedState operator()(const Eigen::VectorXd &outcomes) const;

   private:
    Eigen::VectorXd mean_;
    Eigen::MatrixXd gain_;
    Eigen::MatrixXd conditioned_cov_;
    Eigen::MatrixXd outcome_precision_;
    double log_norm_;
    OutcomeDistribution distribution_;
    std::vector<Eigen::Index> kept_;
};

/// Homodyne detection of `quadrature` on `mode`. The measured mode is removed
/// and modes above it shift down by one.
ConditionedState condition_on_quadrature(
    const GaussianState &state, size_t mode, const Quadrature &quadrature, double outcome);

/// Joint homodyne detection on several distinct modes. All measured modes are
/// removed; survivors keep their relative order.
ConditionedState condition_on_quadratures(
    const GaussianState &state, std::span<const HomodyneMeasurement> measurements);

OutcomeDistribution homodyne_outcome_distribution(
    const GaussianState &state, std::span<const HomodyneMeasurement> measurements);

/// Heterodyne detection with outcome (q_out, p_out). Density is the Husimi
/// function of the measured mode, normalized over dq dp.
ConditionedState condition_heterodyne(const GaussianState &state, size_t mode, double q_out, double p_out);

/// Draws one outcome from the exact Gaussian marginal of the observable.
/// Deterministic for a fixed seed.
double sample_quadrature(const GaussianState &state, size_t mode, const Quadrature &quadrature, uint64_t seed);

}  // namespace cvc

#endif
