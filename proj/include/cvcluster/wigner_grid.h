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

#ifndef CVCLUSTER_WIGNER_GRID_H
#define CVCLUSTER_WIGNER_GRID_H

#include <Eigen/Dense>
#include <cstddef>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "cvcluster/gaussian_state.h"
#include "cvcluster/symplectic.h"
#include "json.hpp"

namespace cvc {

/// Square grid on [-L, L] per axis with N cell-centered points,
/// x_i = -L + (i + 1/2) h, h = 2L/N. The grid is symmetric under x -> -x, so
/// reflections and quarter rotations map grid points onto grid points.
struct GridSpec {
    double extent = 8.0;
    size_t points = 256;

    double step() const {
        return 2.0 * extent / static_cast<double>(points);
    }
    double coordinate(size_t i) const {
        return -extent + (static_cast<double>(i) + 0.5) * step();
    }
    /// Throws std::invalid_argument unless L > 0 and N is a power of two >= 16.
    void validate() const;

    bool operator==(const GridSpec &other) const = default;
};

/// Wigner function of one or two modes sampled on a GridSpec.
///
/// Axes follow the phase-space ordering (q_1.., p_1..); values are row-major
/// with axis 0 slowest. Values are not required to be normalized: conditioned
/// outputs carry their outcome density in the total mass.
class GridWigner {
   public:
    GridWigner(size_t num_modes, GridSpec spec, std::vector<double> values);
    static GridWigner zeros(size_t num_modes, GridSpec spec);
    /// Samples f at every grid point.
    static GridWigner tabulate(
        size_t num_modes, GridSpec spec, const std::function<double(const Eigen::VectorXd &)> &f);

    size_t num_modes() const {
        return n_;
    }
    size_t num_axes() const {
        return 2 * n_;
    }
    const GridSpec &spec() const {
        return spec_;
    }
    const std::vector<double> &values() const {
        return values_;
    }
    std::vector<double> &values() {
        return values_;
    }
    size_t size() const {
        return values_.size();
    }

    /// Flat index of a multi-index (one entry per axis).
    size_t flat_index(std::span<const size_t> index) const;
    /// Phase-space point of a flat index.
    Eigen::VectorXd point(size_t flat) const;

    /// One-mode accessor: value at (q_i, p_j).
    double at(size_t i, size_t j) const {
        return values_[i * spec_.points + j];
    }

    /// Riemann sum times the cell volume h^(2n).
    double mass() const;
    /// Copy scaled to unit mass. Throws std::domain_error on non-positive mass.
    GridWigner normalized() const;
    double min_value() const;
    /// Integral of the negative part, |sum of negative values| h^(2n).
    double negative_volume() const;
    /// Density along one axis, integrating out all others.
    std::vector<double> axis_marginal(size_t axis) const;

   private:
    size_t n_;
    GridSpec spec_;
    std::vector<double> values_;
};

/// Samples the Wigner function of a one- or two-mode Gaussian state. Throws
/// std::invalid_argument when the state is unphysical, when L is smaller than
/// six standard deviations of some marginal, or when some marginal standard
/// deviation is below h/2 (too narrow to resolve).
GridWigner discretize(const GaussianState &state, const GridSpec &spec);

/// Approximate GKP |0_L> of width Delta: a comb of Gaussian teeth of variance
/// Delta^2/2 at even multiples of sqrt(pi) in q under a Gaussian envelope of
/// variance 1/(2 Delta^2). Normalized on the grid.
GridWigner gkp_zero_grid(double delta, const GridSpec &spec);

/// Analytic Wigner function of the same approximate GKP state, normalized
/// over the whole plane.
double gkp_zero_wigner(double delta, double q, double p);

/// Convolution along one axis with a zero-mean Gaussian of the given variance.
/// The kernel is sampled on the grid step and normalized to unit discrete
/// sum; values beyond the extent are treated as zero.
GridWigner convolve_axis(double variance, const GridWigner &grid, size_t axis);

/// The Wigner function after the transform: W'(x) = W(S^{-1}(x - c)),
/// evaluated by separable cubic (Keys, a = -1/2) interpolation with zero
/// values outside the extent. Throws std::domain_error when more than 1e-3 of
/// the mass is lost off the grid.
GridWigner substitute_coordinates(const GridWigner &grid, const SymplecticTransform &transform);

/// Cubic interpolation of the grid at an arbitrary phase-space point.
double interpolate(const GridWigner &grid, const Eigen::VectorXd &x);

/// Resamples onto another spec by cubic interpolation.
GridWigner resample(const GridWigner &grid, const GridSpec &target);

struct GridMoments {
    double mass;
    Eigen::VectorXd mean;
    Eigen::MatrixXd cov;
};

/// Mass and normalized first and second moments.
GridMoments moments(const GridWigner &grid);

struct GridComparison {
    double l1;
    double linf;
    /// max |mean_a - mean_b|.
    double mean_delta;
    /// max |cov_a - cov_b|.
    double cov_delta;
};

/// Metrics between the normalized grids. Throws std::invalid_argument when
/// the specs or mode counts differ.
GridComparison compare(const GridWigner &a, const GridWigner &b);

/// The one-mode gate applied literally to a one-mode grid: shear P(m) on the
/// input, CZ[1] with a squeezed thermal node (epsilon, kappa), p measurement
/// of the input with outcome t, X(-t) on the node. The output is unnormalized
/// and its mass is the outcome density at t.
///
/// The measured slice integral does not depend on t once the correction is
/// applied, so it is computed once here and reused by operator().
class OneModeGateOracle {
   public:
    OneModeGateOracle(const GridWigner &input, double epsilon, double kappa, int m);

    GridWigner operator()(double t) const;

    /// int dq_1 W_b(q_1, t, q_2 + t, p_2), i.e. the output before the kappa
    /// envelope.
    const GridWigner &slice_integral() const {
        return slice_;
    }

   private:
    double kappa_;
    GridWigner slice_;
};

GridWigner one_mode_gate_bruteforce(const GridWigner &input, double epsilon, double kappa, int m, double t);

/// G_kappa(q + t) [G_epsilon *_1 W_a](p, -q) assembled from convolve_axis and
/// the grid's reflection symmetry.
GridWigner one_mode_gate_closed_form(const GridWigner &input, double epsilon, double kappa, int m, double t);

/// Outcome grid t_k = center + (k - (count-1)/2) * step.
std::vector<double> outcome_grid(double center, double half_width, size_t count);

struct AverageOptions {
    /// Reject outcome grids whose endpoint masses exceed `coverage_tolerance`
    /// times the peak mass.
    bool check_coverage = true;
    double coverage_tolerance = 1e-6;
};

/// Trapezoid integral over the (uniform) outcome grid of the unnormalized
/// outputs, normalized to unit mass.
GridWigner average_over_outcomes(
    const std::function<GridWigner(double)> &builder,
    const std::vector<double> &outcomes,
    const AverageOptions &options = {});

// ---------------------------------------------------------------------------
// Two-mode gate oracle
// ---------------------------------------------------------------------------

/// Input Wigner function of modes (1, 4) as a function of (q1, q4, p1, p4).
using TwoModeWigner = std::function<double(const Eigen::Vector4d &)>;

TwoModeWigner gaussian_wigner_function(const GaussianState &state);

struct TwoModeOracleParams {
    double epsilon;
    double kappa;
    /// Trapezoid half-width for integration variables spread by the kappa
    /// envelopes, in units of sqrt(kappa).
    double wide_sigmas = 9.0;
    /// Step for variables spread by kappa only, in units of sqrt(kappa).
    double wide_step_sigmas = 0.5;
    /// Half-width and step for the epsilon-narrow directions, in units of
    /// sqrt(epsilon). Directions holding both use the narrow step over the
    /// wide range.
    double narrow_sigmas = 9.0;
    double narrow_step_sigmas = 0.5;
};

/// Literal route: W_in times two squeezed thermal nodes, the CZ[1] chain
/// 1-2-3-4 applied by coordinate substitution, p_2 = r and p_3 = t
/// substituted, q_2 and q_3 integrated by trapezoid, then Z(-t) on mode 1 and
/// Z(-r) on mode 4. Evaluated at one output point (q1, q4, p1, p4).
double two_mode_gate_direct(
    const TwoModeWigner &input, const TwoModeOracleParams &params, double r, double t, const Eigen::Vector4d &x);

/// The integrand written as W_in(q1, q4, p1 + u, p4 + v) G_kappa(t - u)
/// G_kappa(r - v) G_epsilon(v - q1) G_epsilon(u - q4), integrated over (u, v).
double two_mode_gate_factored(
    const TwoModeWigner &input, const TwoModeOracleParams &params, double r, double t, const Eigen::Vector4d &x);

/// The literal route integrated over both outcomes as well (4-D quadrature).
double two_mode_gate_averaged_bruteforce(
    const TwoModeWigner &input, const TwoModeOracleParams &params, const Eigen::Vector4d &x);

/// Blurred input [G_eps *_4 (G_eps *_3 W_in)] for a Gaussian input, evaluated
/// at the argument tuple (q1, q4, p1 + q4, p4 + q1) or (q1, q4, p1 + q4,
/// p4 + p1).
enum class TwoModeArgument { kP4PlusQ1, kP4PlusP1 };
std::string two_mode_argument_label(TwoModeArgument argument);
double two_mode_gate_candidate(
    const GaussianState &input, double epsilon, TwoModeArgument argument, const Eigen::Vector4d &x);

struct TwoModeVerdict {
    /// max |brute force - candidate| over the probe points, per candidate.
    double error_p4_plus_q1;
    double error_p4_plus_p1;
    /// max |brute force| over the probe points, for scale.
    double scale;
    TwoModeArgument winner;
};

/// Compares the averaged brute force against both candidate displays.
TwoModeVerdict resolve_two_mode_argument(
    const GaussianState &input, const TwoModeOracleParams &params, const std::vector<Eigen::Vector4d> &points);

/// Unnormalized conditioned two-mode output on a full 4-D grid, via the
/// factored integrand with trapezoid steps equal to the grid step.
GridWigner two_mode_gate_grid(
    const TwoModeWigner &input, double epsilon, double kappa, double r, double t, const GridSpec &spec);

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

/// Little-endian header (mode count and N as uint64, L as float64) followed by
/// the row-major float64 values.
void write_grid_binary(const GridWigner &grid, std::ostream &out);
GridWigner read_grid_binary(std::istream &in);
/// Sidecar describing the binary layout plus summary numbers.
nlohmann::json grid_sidecar_json(const GridWigner &grid);

}  // namespace cvc

#endif
