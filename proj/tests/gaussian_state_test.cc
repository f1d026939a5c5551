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

#include <gtest/gtest.h>

#include <array>
#include <cmath>

#include "test_util.h"

using namespace cvc;

TEST(squeezed_thermal_spec, variances) {
    SqueezedThermalSpec spec{1.78, 0.0};
    EXPECT_NEAR(spec.epsilon(), 0.1578083575306148, 1e-15);
    EXPECT_NEAR(spec.kappa(), 1.5842, 1e-14);
    EXPECT_NEAR(10 * std::log10(2 * spec.epsilon()), -5.0, 0.02);

    SqueezedThermalSpec hot{1.78, 1.0};
    EXPECT_NEAR(hot.kappa(), 2.0842, 1e-14);
    EXPECT_EQ(hot.epsilon(), spec.epsilon());
    EXPECT_NEAR(hot.kappa0(), 1.5842, 1e-14);
    EXPECT_NEAR(hot.epsilon0(), hot.epsilon(), 1e-15);

    SqueezedThermalSpec vac{1.0, 0.0};
    EXPECT_EQ(vac.epsilon(), 0.5);
    EXPECT_EQ(vac.kappa(), 0.5);
    EXPECT_NEAR(vac.squeezing_parameter(), 0.0, 1e-15);
}

TEST(squeezed_thermal_spec, from_db) {
    auto spec = SqueezedThermalSpec::from_squeezing_db(5.0, 0.5);
    EXPECT_NEAR(10 * std::log10(2 * spec.epsilon()), -5.0, 1e-12);
    EXPECT_EQ(spec.delta, 0.5);
    EXPECT_NEAR(spec.s, 1.78, 0.003 * 1.78);
}

TEST(squeezed_thermal_spec, validate) {
    EXPECT_THROW((SqueezedThermalSpec{0.9, 0.0}.validate()), std::invalid_argument);
    EXPECT_THROW((SqueezedThermalSpec{1.5, -0.1}.validate()), std::invalid_argument);
    EXPECT_NO_THROW((SqueezedThermalSpec{1.0, 0.0}.validate()));
    EXPECT_THROW(squeezed_thermal_state({0.5, 0.0}), std::invalid_argument);
}

TEST(gaussian_state, vacuum) {
    auto v = vacuum_state(1);
    EXPECT_EQ(v.cov(), Eigen::MatrixXd::Identity(2, 2) * 0.5);
    EXPECT_EQ(v.mean(), Eigen::VectorXd::Zero(2));
    EXPECT_EQ(v.distance(squeezed_thermal_state({1.0, 0.0})), 0.0);

    auto v3 = vacuum_state(3);
    EXPECT_EQ(v3.cov(), Eigen::MatrixXd::Identity(6, 6) * 0.5);
    auto nu = symplectic_eigenvalues(v3);
    ASSERT_EQ(nu.size(), 3);
    for (int k = 0; k < 3; k++) {
        EXPECT_NEAR(nu(k), 0.5, 1e-14);
    }
    EXPECT_THROW(vacuum_state(0), std::invalid_argument);
}

TEST(gaussian_state, squeezed_thermal_cov) {
    auto st = squeezed_thermal_state({1.78, 1.0});
    EXPECT_NEAR(st.cov()(0, 0), 2.0842, 1e-14);
    EXPECT_NEAR(st.cov()(1, 1), 0.1578083575306148, 1e-15);
    EXPECT_EQ(st.cov()(0, 1), 0.0);
    EXPECT_NEAR(st.min_symplectic_eigenvalue(), 0.5735016815714732, 1e-12);

    EXPECT_NEAR(squeezed_thermal_state({1.78, 0.0}).min_symplectic_eigenvalue(), 0.5, 1e-14);
}

TEST(gaussian_state, construction_checks) {
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(3);
    EXPECT_THROW(GaussianState(mean, Eigen::MatrixXd::Identity(3, 3)), std::invalid_argument);
    EXPECT_THROW(GaussianState(Eigen::VectorXd::Zero(2), Eigen::MatrixXd::Identity(4, 4)), std::invalid_argument);
    Eigen::MatrixXd asym = Eigen::MatrixXd::Identity(2, 2);
    asym(0, 1) = 0.1;
    EXPECT_THROW(GaussianState(Eigen::VectorXd::Zero(2), asym), std::invalid_argument);
}

TEST(gaussian_state, physicality) {
    Eigen::MatrixXd cov(2, 2);
    cov << 0.2, 0.0, 0.0, 0.5;
    GaussianState bad(Eigen::VectorXd::Zero(2), cov);
    EXPECT_FALSE(bad.is_physical());
    EXPECT_THROW(bad.require_physical(), std::invalid_argument);
    EXPECT_NEAR(bad.min_symplectic_eigenvalue(), std::sqrt(0.1), 1e-14);

    // Zero covariance is a valid probe but not physical.
    GaussianState probe(Eigen::VectorXd::Zero(2), Eigen::MatrixXd::Zero(2, 2));
    EXPECT_FALSE(probe.is_physical());
    EXPECT_TRUE(vacuum_state(2).is_physical());
}

TEST(gaussian_state, wigner_value) {
    auto v = vacuum_state(1);
    Eigen::Vector2d origin(0, 0);
    EXPECT_NEAR(v.wigner(origin), 1 / std::numbers::pi, 1e-15);

    auto st = squeezed_thermal_state({1.78, 1.0});
    Eigen::Vector2d x(0.4, -0.3);
    EXPECT_NEAR(
        st.wigner(x),
        cvc_test::gaussian_pdf(st.cov()(0, 0), 0.4) * cvc_test::gaussian_pdf(st.cov()(1, 1), -0.3),
        1e-15);
    EXPECT_THROW(st.wigner(Eigen::VectorXd::Zero(4)), std::invalid_argument);
}

TEST(gaussian_state, tensor_and_marginal) {
    auto a = squeezed_thermal_state({1.78, 0.0});
    auto b = squeezed_thermal_state({1.2, 0.5});
    auto ab = a.tensor(b);
    ASSERT_EQ(ab.num_modes(), 2u);
    EXPECT_EQ(ab.cov()(0, 0), a.cov()(0, 0));
    EXPECT_EQ(ab.cov()(2, 2), a.cov()(1, 1));
    EXPECT_EQ(ab.cov()(1, 1), b.cov()(0, 0));
    EXPECT_EQ(ab.cov()(3, 3), b.cov()(1, 1));

    std::array<size_t, 1> one{1};
    EXPECT_EQ(ab.marginal(one).distance(b), 0.0);
    EXPECT_EQ(ab.without_modes(one).distance(a), 0.0);

    std::array<size_t, 2> swapped{1, 0};
    EXPECT_EQ(ab.marginal(swapped).distance(b.tensor(a)), 0.0);
    std::array<size_t, 2> dup{0, 0};
    EXPECT_THROW(ab.marginal(dup), std::invalid_argument);
    EXPECT_THROW(ab.q_index(2), std::out_of_range);
}

TEST(gaussian_state, with_mode_moved) {
    auto a = squeezed_thermal_state({1.1, 0.0});
    auto b = squeezed_thermal_state({1.2, 0.0});
    auto c = squeezed_thermal_state({1.3, 0.0});
    auto abc = a.tensor(b).tensor(c);
    EXPECT_EQ(abc.with_mode_moved(2, 0).distance(c.tensor(a).tensor(b)), 0.0);
    EXPECT_EQ(abc.with_mode_moved(0, 2).distance(b.tensor(c).tensor(a)), 0.0);
    EXPECT_EQ(abc.with_mode_moved(1, 1).distance(abc), 0.0);
}

TEST(gaussian_state, symplectic_eigenvalues_invariant) {
    Eigen::MatrixXd cov(2, 2);
    cov << 0.9, 0.3, 0.3, 0.7;
    auto nu = symplectic_eigenvalues(cov);
    EXPECT_NEAR(nu(0), std::sqrt(0.9 * 0.7 - 0.09), 1e-14);
}

TEST(gaussian_state, json_round_trip) {
    Eigen::VectorXd mean(4);
    mean << 0.1, -0.2, 0.3, 0.4;
    Eigen::MatrixXd cov = Eigen::MatrixXd::Identity(4, 4) * 0.7;
    cov(0, 3) = cov(3, 0) = 0.2;
    GaussianState s(mean, cov);
    auto j = to_json(s);
    EXPECT_EQ(j["n_modes"], 2);
    EXPECT_EQ(gaussian_state_from_json(j).distance(s), 0.0);

    j["n_modes"] = 3;
    EXPECT_THROW(gaussian_state_from_json(j), std::invalid_argument);
}
