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

#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "cvcluster/cluster.h"
#include "cvcluster/symplectic.h"
#include "cvcluster/wigner_grid.h"
#include "test_util.h"

using namespace cvc;

namespace {

GaussianState two_mode_input() {
    Eigen::Vector4d mean(0.12, -0.25, 0.3, 0.07);
    Eigen::Matrix4d cov;
    cov << 0.80, 0.10, 0.05, 0.00,
           0.10, 0.70, 0.00, 0.10,
           0.05, 0.00, 0.90, 0.20,
           0.00, 0.10, 0.20, 0.75;
    return GaussianState(mean, cov);
}

std::vector<Eigen::Vector4d> probe_points() {
    return {
        Eigen::Vector4d(0.0, 0.0, 0.0, 0.0),
        Eigen::Vector4d(0.4, -0.3, 0.2, 0.5),
        Eigen::Vector4d(-0.7, 0.2, -0.6, 0.1),
        Eigen::Vector4d(0.9, 0.6, 0.3, -0.8),
    };
}

}  // namespace

TEST(two_mode_oracle, direct_equals_factored) {
    auto input = two_mode_input();
    auto w = gaussian_wigner_function(input);
    for (double delta : {0.0, 3.0}) {
        SqueezedThermalSpec spec{1.78, delta};
        TwoModeOracleParams params{spec.epsilon(), spec.kappa()};
        for (const auto &x : probe_points()) {
            double direct = two_mode_gate_direct(w, params, 0.2, -0.45, x);
            double factored = two_mode_gate_factored(w, params, 0.2, -0.45, x);
            EXPECT_LT(std::abs(direct - factored), 1e-5);
        }
    }
}

TEST(two_mode_oracle, direct_matches_covariance_path) {
    auto input = two_mode_input();
    auto w = gaussian_wigner_function(input);
    SqueezedThermalSpec spec{1.78, 3.0};
    TwoModeOracleParams params{spec.epsilon(), spec.kappa()};
    auto cond = two_mode_gate_conditioned(input, 0, 1, spec, 0.2, -0.45);
    for (const auto &x : probe_points()) {
        double expected = cond.density * cond.state.wigner(x);
        EXPECT_NEAR(two_mode_gate_direct(w, params, 0.2, -0.45, x), expected, 1e-6 + 1e-5 * std::abs(expected));
    }
}

TEST(two_mode_oracle, argument_verdict) {
    auto input = two_mode_input();
    SqueezedThermalSpec spec{1.78, 1.0};
    TwoModeOracleParams params{spec.epsilon(), spec.kappa()};
    auto verdict = resolve_two_mode_argument(input, params, probe_points());
    EXPECT_EQ(verdict.winner, TwoModeArgument::kP4PlusQ1);
    EXPECT_LT(verdict.error_p4_plus_q1, 1e-6 * verdict.scale);
    EXPECT_GT(verdict.error_p4_plus_p1, 1e-3 * verdict.scale);
    EXPECT_EQ(two_mode_argument_label(verdict.winner), "(q1, q4, p1 + q4, p4 + q1)");

    // The winning display is the averaged covariance map.
    auto avg = two_mode_gate_averaged(input, 0, 1, spec.epsilon());
    for (const auto &x : probe_points()) {
        EXPECT_NEAR(two_mode_gate_candidate(input, spec.epsilon(), TwoModeArgument::kP4PlusQ1, x), avg.wigner(x), 1e-12);
    }
}

TEST(two_mode_oracle, grid_moments) {
    auto input = two_mode_input();
    SqueezedThermalSpec spec{1.78, 3.0};
    GridSpec grid{8.0, 32};
    auto out = two_mode_gate_grid(gaussian_wigner_function(input), spec.epsilon(), spec.kappa(), 0.2, -0.45, grid);
    auto cond = two_mode_gate_conditioned(input, 0, 1, spec, 0.2, -0.45);
    auto m = moments(out);
    EXPECT_NEAR(m.mass, cond.density, 1e-4 * cond.density);
    EXPECT_LT((m.mean - cond.state.mean()).cwiseAbs().maxCoeff(), 1e-4);
    EXPECT_LT((m.cov - cond.state.cov()).cwiseAbs().maxCoeff(), 1e-4);
}
