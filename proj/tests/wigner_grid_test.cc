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

#include "cvcluster/wigner_grid.h"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "cvcluster/cluster.h"
#include "cvcluster/symplectic.h"
#include "test_util.h"

using namespace cvc;
using cvc_test::gaussian_pdf;

namespace {

const GridSpec kDefault{8.0, 256};

GaussianState diag_state(double vq, double vp, double mq = 0.0, double mp = 0.0) {
    Eigen::Vector2d mean(mq, mp);
    Eigen::Matrix2d cov;
    cov << vq, 0.0, 0.0, vp;
    return GaussianState(mean, cov);
}

GaussianState tilted_state() {
    Eigen::Vector2d mean(0.3, -0.2);
    Eigen::Matrix2d cov;
    cov << 0.7, 0.2, 0.2, 0.6;
    return GaussianState(mean, cov);
}

double linf(const GridWigner &a, const GridWigner &b) {
    double out = 0.0;
    for (size_t i = 0; i < a.size(); i++) {
        out = std::max(out, std::abs(a.values()[i] - b.values()[i]));
    }
    return out;
}

double moment_error(const GridMoments &m, const GaussianState &s) {
    return std::max((m.mean - s.mean()).cwiseAbs().maxCoeff(), (m.cov - s.cov()).cwiseAbs().maxCoeff());
}

}  // namespace

TEST(grid_spec, validate) {
    EXPECT_NO_THROW(kDefault.validate());
    EXPECT_EQ(kDefault.step(), 1.0 / 16.0);
    EXPECT_EQ(kDefault.coordinate(0), -8.0 + 1.0 / 32.0);
    EXPECT_EQ(kDefault.coordinate(128), 1.0 / 32.0);
    EXPECT_THROW((GridSpec{8.0, 8}.validate()), std::invalid_argument);
    EXPECT_THROW((GridSpec{8.0, 96}.validate()), std::invalid_argument);
    EXPECT_THROW((GridSpec{0.0, 64}.validate()), std::invalid_argument);
}

TEST(grid_wigner, shape_checks) {
    EXPECT_THROW(GridWigner(1, {8.0, 16}, std::vector<double>(10)), std::invalid_argument);
    EXPECT_THROW(GridWigner(3, {8.0, 16}, {}), std::invalid_argument);
    auto z = GridWigner::zeros(2, {8.0, 16});
    EXPECT_EQ(z.size(), 65536u);
    EXPECT_THROW(z.normalized(), std::domain_error);
    std::array<size_t, 4> idx{1, 2, 3, 4};
    EXPECT_EQ(z.flat_index(idx), ((1u * 16 + 2) * 16 + 3) * 16 + 4);
}

TEST(discretize, vacuum_normalization) {
    auto g = discretize(vacuum_state(1), kDefault);
    EXPECT_LT(std::abs(g.mass() - 1.0), 1e-9);
    EXPECT_NEAR(g.at(128, 128), gaussian_pdf(0.5, 1.0 / 32) * gaussian_pdf(0.5, 1.0 / 32), 1e-15);
}

// kappa = 2.08 needs L >= 6 sqrt(kappa) = 8.7, so these use L = 10.
const GridSpec kWide{10.0, 256};

TEST(discretize, squeezed_thermal_moments) {
    SqueezedThermalSpec spec{1.78, 1.0};
    auto g = discretize(squeezed_thermal_state(spec), kWide);
    auto m = moments(g);
    EXPECT_NEAR(m.cov(0, 0), spec.kappa(), 1e-6);
    EXPECT_NEAR(m.cov(1, 1), spec.epsilon(), 1e-6);
    EXPECT_NEAR(m.cov(0, 1), 0.0, 1e-12);
    EXPECT_LT(m.mean.cwiseAbs().maxCoeff(), 1e-12);
}

TEST(discretize, marginal_matches_position_density) {
    SqueezedThermalSpec spec{1.78, 1.0};
    auto g = discretize(squeezed_thermal_state(spec), kWide);
    auto marginal = g.axis_marginal(0);
    for (size_t i = 0; i < kWide.points; i++) {
        EXPECT_NEAR(marginal[i], gaussian_pdf(spec.kappa(), kWide.coordinate(i)), 1e-6);
    }
}

TEST(discretize, errors) {
    EXPECT_THROW(discretize(squeezed_thermal_state({100.0, 0.0}), {8.0, 64}), std::invalid_argument);
    EXPECT_THROW(discretize(squeezed_thermal_state({1.78, 1.0}), kDefault), std::invalid_argument);
    EXPECT_THROW(discretize(diag_state(0.5, 0.5, 6.0), kDefault), std::invalid_argument);
    EXPECT_THROW(discretize(diag_state(0.2, 0.2), kDefault), std::invalid_argument);
    EXPECT_THROW(discretize(vacuum_state(3), kDefault), std::invalid_argument);
}

TEST(discretize, two_mode) {
    auto s = apply_symplectic(vacuum_state(2), controlled_z(2, 0, 1));
    auto g = discretize(s, {8.0, 32});
    auto m = moments(g);
    EXPECT_NEAR(m.mass, 1.0, 1e-6);
    EXPECT_LT((m.cov - s.cov()).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(gkp, negativity) {
    auto g = gkp_zero_grid(0.25, kDefault);
    EXPECT_LT(g.min_value(), 0.0);
    EXPECT_NEAR(g.mass(), 1.0, 1e-12);
}

TEST(gkp, broad_limit) {
    auto g = gkp_zero_grid(0.99, kDefault);
    EXPECT_LT(g.negative_volume(), 1e-3);
}

TEST(gkp, analytic_normalization) {
    // The envelope has standard deviation 1/(sqrt(2) Delta) = 2.8 at Delta = 0.25.
    GridSpec wide{16.0, 512};
    for (double delta : {0.25, 0.5, 0.8}) {
        auto raw = GridWigner::tabulate(
            1, wide, [&](const Eigen::VectorXd &x) { return gkp_zero_wigner(delta, x(0), x(1)); });
        EXPECT_NEAR(raw.mass(), 1.0, 1e-6) << delta;
    }
    EXPECT_THROW(gkp_zero_wigner(1.0, 0, 0), std::invalid_argument);
    EXPECT_THROW(gkp_zero_grid(0.0, kDefault), std::invalid_argument);
}

TEST(gkp, comb_structure) {
    // Teeth sit at even multiples of sqrt(pi) in q; half-way points carry interference.
    double spacing = 2 * std::sqrt(std::numbers::pi);
    EXPECT_GT(gkp_zero_wigner(0.25, spacing, 0.0), 0.1);
    EXPECT_LT(gkp_zero_wigner(0.25, spacing / 4, 0.0), 1e-5 * gkp_zero_wigner(0.25, 0.0, 0.0));
    EXPECT_NEAR(gkp_zero_wigner(0.25, 0.3, 0.4), gkp_zero_wigner(0.25, -0.3, -0.4), 1e-14);
}

TEST(convolve_axis, gaussian_identity) {
    double a = 0.3;
    double b = 0.6;
    double c = 0.5;
    auto g = discretize(diag_state(b, c), kDefault);
    auto conv = convolve_axis(a, g, 0);
    auto ref = discretize(diag_state(a + b, c), kDefault);
    EXPECT_LT(linf(conv, ref), 1e-6);
    auto conv_p = convolve_axis(a, g, 1);
    EXPECT_LT(linf(conv_p, discretize(diag_state(b, a + c), kDefault)), 1e-6);
}

TEST(convolve_axis, delta_limit_and_commutation) {
    auto g = discretize(tilted_state(), kDefault);
    EXPECT_LT(linf(convolve_axis(1e-6, g, 0), g), 1e-4);
    auto ab = convolve_axis(0.2, convolve_axis(0.1, g, 0), 1);
    auto ba = convolve_axis(0.1, convolve_axis(0.2, g, 1), 0);
    EXPECT_LT(linf(ab, ba), 1e-14);
    EXPECT_THROW(convolve_axis(0.0, g, 0), std::invalid_argument);
    EXPECT_THROW(convolve_axis(0.1, g, 2), std::out_of_range);
}

TEST(substitute_coordinates, identity) {
    auto g = discretize(tilted_state(), kDefault);
    EXPECT_LT(linf(substitute_coordinates(g, SymplecticTransform::identity(1)), g), 1e-15);
}

TEST(substitute_coordinates, shear_moments) {
    auto g = discretize(vacuum_state(1), kDefault);
    auto sheared = substitute_coordinates(g, shear(1, 0, 1.0));
    auto ref = apply_symplectic(vacuum_state(1), shear(1, 0, 1.0));
    EXPECT_LT(moment_error(moments(sheared), ref), 1e-4);
}

TEST(substitute_coordinates, fourier_period) {
    auto g = discretize(tilted_state(), kDefault);
    auto f = fourier(1, 0);
    auto out = substitute_coordinates(
        substitute_coordinates(substitute_coordinates(substitute_coordinates(g, f), f), f), f);
    EXPECT_LT(linf(out, g), 1e-6);
    // One quarter turn: W'(q, p) = W(p, -q).
    auto once = substitute_coordinates(g, f);
    size_t n = kDefault.points;
    EXPECT_NEAR(once.at(10, 200), g.at(200, n - 1 - 10), 1e-15);
}

TEST(substitute_coordinates, mass_loss) {
    auto g = discretize(tilted_state(), kDefault);
    EXPECT_THROW(substitute_coordinates(g, displace_q(1, 0, 7.0)), std::domain_error);
    EXPECT_THROW(substitute_coordinates(g, shear(2, 0, 1.0)), std::invalid_argument);
}

TEST(compare, examples) {
    auto a = discretize(vacuum_state(1), kDefault);
    auto same = compare(a, a);
    EXPECT_EQ(same.l1, 0.0);
    EXPECT_EQ(same.linf, 0.0);
    EXPECT_EQ(same.mean_delta, 0.0);
    EXPECT_EQ(same.cov_delta, 0.0);
    auto b = discretize(squeezed_thermal_state({1.78, 0.0}), kDefault);
    EXPECT_GT(compare(a, b).l1, 0.1);
    EXPECT_THROW(compare(a, discretize(vacuum_state(1), {8.0, 128})), std::invalid_argument);
}

TEST(resample, convergence_order) {
    // Interpolate coarse grids up to the default grid and compare against the
    // exact tabulation there.
    auto state = tilted_state();
    auto exact = discretize(state, kDefault);
    std::vector<double> errors;
    for (size_t n : {32u, 64u, 128u}) {
        auto coarse = discretize(state, {8.0, n});
        errors.push_back(linf(resample(coarse, kDefault), exact));
    }
    for (size_t k = 1; k < errors.size(); k++) {
        double order = std::log2(errors[k - 1] / errors[k]);
        RecordProperty("order_" + std::to_string(k), std::to_string(order));
        EXPECT_GE(order, 2.8) << errors[k - 1] << " -> " << errors[k];
    }
    // h^3 estimate with the third derivative bounded by the peak over sigma^3.
    double h = 16.0 / 128.0;
    double sigma = std::sqrt(state.cov().selfadjointView<Eigen::Lower>().eigenvalues().minCoeff());
    double peak = *std::max_element(exact.values().begin(), exact.values().end());
    EXPECT_LT(errors.back(), h * h * h * peak / (sigma * sigma * sigma));
}

TEST(one_mode_gate_grid, bruteforce_matches_closed_form) {
    SqueezedThermalSpec spec{1.78, 1.0};
    auto g = discretize(tilted_state(), kDefault);
    for (int m : {0, 1}) {
        for (double t : {0.0, 0.9}) {
            auto brute = one_mode_gate_bruteforce(g, spec.epsilon(), spec.kappa(), m, t);
            auto closed = one_mode_gate_closed_form(g, spec.epsilon(), spec.kappa(), m, t);
            EXPECT_LT(linf(brute, closed), 1e-5);
        }
    }
}

TEST(one_mode_gate_grid, matches_covariance_path) {
    auto input = tilted_state();
    auto g = discretize(input, kDefault);
    for (double delta : {0.0, 2.0}) {
        SqueezedThermalSpec spec{1.78, delta};
        for (int m : {0, 1}) {
            OneModeGateOracle oracle(g, spec.epsilon(), spec.kappa(), m);
            for (double t : {-0.6, 0.4}) {
                auto out = oracle(t);
                auto cond = one_mode_gate_conditioned(input, 0, spec, m, t);
                auto mom = moments(out);
                EXPECT_NEAR(mom.mass, cond.density, 1e-6);
                EXPECT_LT(moment_error(mom, cond.state), 1e-4) << "m=" << m << " t=" << t;
            }
        }
    }
}

TEST(one_mode_gate_grid, gkp_conditioned_depends_on_kappa) {
    auto g = gkp_zero_grid(0.25, kDefault);
    SqueezedThermalSpec cold{1.78, 0.0};
    SqueezedThermalSpec hot{1.78, 3.0};
    auto a = one_mode_gate_bruteforce(g, cold.epsilon(), cold.kappa(), 0, 0.5);
    auto b = one_mode_gate_bruteforce(g, hot.epsilon(), hot.kappa(), 0, 0.5);
    EXPECT_GT(compare(a, b).l1, 0.01);
}

TEST(average_over_outcomes, constant_builder) {
    auto g = discretize(tilted_state(), kDefault);
    AverageOptions opts;
    opts.check_coverage = false;
    auto avg = average_over_outcomes([&](double) { return g; }, outcome_grid(0.0, 1.0, 11), opts);
    EXPECT_LT(linf(avg, g.normalized()), 1e-12);
}

TEST(average_over_outcomes, gaussian_matches_averaged_channel) {
    auto input = tilted_state();
    auto g = discretize(input, kDefault);
    SqueezedThermalSpec spec{1.78, 1.0};
    for (int m : {0, 1}) {
        auto dist = one_mode_gate_outcome_distribution(input, 0, spec, m);
        OneModeGateOracle oracle(g, spec.epsilon(), spec.kappa(), m);
        auto avg = average_over_outcomes(
            [&](double t) { return oracle(t); }, outcome_grid(dist.mean(0), 10 * std::sqrt(dist.cov(0, 0)), 201));
        EXPECT_NEAR(avg.mass(), 1.0, 1e-12);
        EXPECT_LT(moment_error(moments(avg), one_mode_gate_averaged(input, 0, spec.epsilon(), m)), 1e-3);
    }
}

TEST(average_over_outcomes, errors) {
    auto g = discretize(tilted_state(), kDefault);
    SqueezedThermalSpec spec{1.78, 1.0};
    OneModeGateOracle oracle(g, spec.epsilon(), spec.kappa(), 0);
    auto builder = [&](double t) { return oracle(t); };
    EXPECT_THROW(average_over_outcomes(builder, outcome_grid(0.0, 1.0, 21)), std::domain_error);
    EXPECT_THROW(average_over_outcomes(builder, {0.0, 1.0, 3.0}), std::invalid_argument);
    EXPECT_THROW(average_over_outcomes(builder, {0.0, 1.0}), std::invalid_argument);
    EXPECT_THROW(outcome_grid(0.0, 1.0, 2), std::invalid_argument);
}

TEST(grid_io, binary_round_trip) {
    auto g = discretize(tilted_state(), {8.0, 32});
    std::stringstream buf;
    write_grid_binary(g, buf);
    EXPECT_EQ(buf.str().size(), 24u + 8u * 32 * 32);
    auto back = read_grid_binary(buf);
    EXPECT_EQ(back.spec(), g.spec());
    EXPECT_EQ(back.values(), g.values());

    std::stringstream truncated(buf.str().substr(0, 40));
    EXPECT_THROW(read_grid_binary(truncated), std::runtime_error);

    auto side = grid_sidecar_json(g);
    EXPECT_EQ(side["points"], 32);
    EXPECT_EQ(side["n_modes"], 1);
}
