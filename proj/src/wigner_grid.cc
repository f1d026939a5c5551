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

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <istream>
#include <numbers>
#include <ostream>
#include <stdexcept>

using namespace cvc;

namespace {

double gaussian(double variance, double x) {
    return std::exp(-0.5 * x * x / variance) / std::sqrt(2.0 * std::numbers::pi * variance);
}

size_t ipow(size_t base, size_t exp) {
    size_t out = 1;
    for (size_t k = 0; k < exp; k++) {
        out *= base;
    }
    return out;
}

// Normalized multivariate Gaussian with a cached precision matrix.
struct GaussianDensity {
    Eigen::VectorXd mean;
    Eigen::MatrixXd precision;
    double log_norm;

    explicit GaussianDensity(const GaussianState &state) : mean(state.mean()) {
        Eigen::LLT<Eigen::MatrixXd> llt(state.cov());
        if (llt.info() != Eigen::Success) {
            throw std::invalid_argument("covariance matrix is not positive definite");
        }
        precision = llt.solve(Eigen::MatrixXd::Identity(mean.size(), mean.size()));
        double log_det = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
        log_norm = -0.5 * log_det - 0.5 * static_cast<double>(mean.size()) * std::log(2.0 * std::numbers::pi);
    }

    template <typename Vec>
    double operator()(const Vec &x) const {
        Eigen::VectorXd d = x - mean;
        return std::exp(log_norm - 0.5 * d.dot(precision * d));
    }
};

void require_same_shape(const GridWigner &a, const GridWigner &b) {
    if (a.num_modes() != b.num_modes() || !(a.spec() == b.spec())) {
        throw std::invalid_argument("grids have different mode counts or specs");
    }
}

// Keys cubic convolution kernel with a = -1/2.
double keys(double s) {
    constexpr double a = -0.5;
    s = std::abs(s);
    if (s <= 1) {
        return ((a + 2) * s - (a + 3)) * s * s + 1;
    }
    if (s < 2) {
        return ((a * s - 5 * a) * s + 8 * a) * s - 4 * a;
    }
    return 0.0;
}

}  // namespace

// ---------------------------------------------------------------------------
// GridSpec / GridWigner
// ---------------------------------------------------------------------------

void GridSpec::validate() const {
    if (!(extent > 0) || !std::isfinite(extent)) {
        throw std::invalid_argument("grid extent must be positive");
    }
    if (points < 16 || !std::has_single_bit(points)) {
        throw std::invalid_argument("grid points per axis must be a power of two >= 16, got " + std::to_string(points));
    }
}

GridWigner::GridWigner(size_t num_modes, GridSpec spec, std::vector<double> values)
    : n_(num_modes), spec_(spec), values_(std::move(values)) {
    spec_.validate();
    if (n_ != 1 && n_ != 2) {
        throw std::invalid_argument("grids hold one or two modes");
    }
    if (values_.size() != ipow(spec_.points, 2 * n_)) {
        throw std::invalid_argument("grid value count does not match N^(2 modes)");
    }
}

GridWigner GridWigner::zeros(size_t num_modes, GridSpec spec) {
    spec.validate();
    return GridWigner(num_modes, spec, std::vector<double>(ipow(spec.points, 2 * num_modes), 0.0));
}

GridWigner GridWigner::tabulate(
    size_t num_modes, GridSpec spec, const std::function<double(const Eigen::VectorXd &)> &f) {
    auto out = zeros(num_modes, spec);
    for (size_t k = 0; k < out.size(); k++) {
        out.values_[k] = f(out.point(k));
    }
    return out;
}

size_t GridWigner::flat_index(std::span<const size_t> index) const {
    if (index.size() != num_axes()) {
        throw std::invalid_argument("multi-index has the wrong number of axes");
    }
    size_t flat = 0;
    for (size_t i : index) {
        if (i >= spec_.points) {
            throw std::out_of_range("grid index out of range");
        }
        flat = flat * spec_.points + i;
    }
    return flat;
}

Eigen::VectorXd GridWigner::point(size_t flat) const {
    Eigen::VectorXd x(static_cast<Eigen::Index>(num_axes()));
    for (size_t a = num_axes(); a-- > 0;) {
        x(static_cast<Eigen::Index>(a)) = spec_.coordinate(flat % spec_.points);
        flat /= spec_.points;
    }
    return x;
}

double GridWigner::mass() const {
    double sum = 0.0;
    for (double v : values_) {
        sum += v;
    }
    return sum * std::pow(spec_.step(), static_cast<double>(num_axes()));
}

GridWigner GridWigner::normalized() const {
    double m = mass();
    if (!(m > 0)) {
        throw std::domain_error("cannot normalize a grid with non-positive mass");
    }
    GridWigner out = *this;
    for (double &v : out.values_) {
        v /= m;
    }
    return out;
}

double GridWigner::min_value() const {
    return *std::min_element(values_.begin(), values_.end());
}

double GridWigner::negative_volume() const {
    double sum = 0.0;
    for (double v : values_) {
        if (v < 0) {
            sum -= v;
        }
    }
    return sum * std::pow(spec_.step(), static_cast<double>(num_axes()));
}

std::vector<double> GridWigner::axis_marginal(size_t axis) const {
    if (axis >= num_axes()) {
        throw std::out_of_range("axis out of range");
    }
    size_t n = spec_.points;
    size_t stride = ipow(n, num_axes() - 1 - axis);
    std::vector<double> out(n, 0.0);
    for (size_t k = 0; k < values_.size(); k++) {
        out[(k / stride) % n] += values_[k];
    }
    double cell = std::pow(spec_.step(), static_cast<double>(num_axes() - 1));
    for (double &v : out) {
        v *= cell;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Construction
// ---------------------------------------------------------------------------

GridWigner cvc::discretize(const GaussianState &state, const GridSpec &spec) {
    spec.validate();
    size_t n = state.num_modes();
    if (n != 1 && n != 2) {
        throw std::invalid_argument("only one- and two-mode states can be discretized");
    }
    state.require_physical();
    for (Eigen::Index a = 0; a < state.mean().size(); a++) {
        double sigma = std::sqrt(state.cov()(a, a));
        if (std::abs(state.mean()(a)) + 6.0 * sigma > spec.extent) {
            throw std::invalid_argument(
                "grid extent " + std::to_string(spec.extent) + " does not cover six standard deviations (sigma = " +
                std::to_string(sigma) + ") of every marginal");
        }
        if (sigma < 0.5 * spec.step()) {
            throw std::invalid_argument(
                "grid step " + std::to_string(spec.step()) + " cannot resolve a marginal with sigma = " +
                std::to_string(sigma));
        }
    }
    GaussianDensity density(state);
    auto out = GridWigner::tabulate(n, spec, [&](const Eigen::VectorXd &x) { return density(x); });
    double m = out.mass();
    if (std::abs(m - 1.0) > 1e-6) {
        throw std::domain_error("discretized Gaussian has mass " + std::to_string(m));
    }
    return out;
}

double cvc::gkp_zero_wigner(double delta, double q, double p) {
    if (!(delta > 0 && delta < 1)) {
        throw std::invalid_argument("GKP width Delta must lie in (0, 1)");
    }
    const double spacing = 2.0 * std::sqrt(std::numbers::pi);
    const double d2 = delta * delta;
    // Teeth with c_n = exp(-Delta^2 a_n^2 / 2) below e^-40 are dropped.
    const int n_max = static_cast<int>(std::ceil(std::sqrt(80.0) / delta / spacing));

    double norm = 0.0;
    for (int a = -n_max; a <= n_max; a++) {
        for (int b = -n_max; b <= n_max; b++) {
            double an = a * spacing;
            double bm = b * spacing;
            norm += std::exp(-0.5 * d2 * (an * an + bm * bm) - (an - bm) * (an - bm) / (4.0 * d2));
        }
    }
    norm *= std::sqrt(std::numbers::pi) * delta;

    // Pair (n, m) contributes a Gaussian centered at (a_n + a_m)/2 = (n + m) sqrt(pi).
    double sum = 0.0;
    const double half = 0.5 * spacing;
    int s_lo = static_cast<int>(std::floor((q - 12.0 * delta) / half));
    int s_hi = static_cast<int>(std::ceil((q + 12.0 * delta) / half));
    for (int s = std::max(s_lo, -2 * n_max); s <= std::min(s_hi, 2 * n_max); s++) {
        double center = s * half;
        double bump = std::exp(-(q - center) * (q - center) / d2);
        for (int a = std::max(-n_max, s - n_max); a <= std::min(n_max, s + n_max); a++) {
            int b = s - a;
            double an = a * spacing;
            double bm = b * spacing;
            sum += std::exp(-0.5 * d2 * (an * an + bm * bm)) * bump * std::cos(p * (an - bm));
        }
    }
    return delta / std::sqrt(std::numbers::pi) * std::exp(-p * p * d2) * sum / norm;
}

GridWigner cvc::gkp_zero_grid(double delta, const GridSpec &spec) {
    if (!(delta > 0 && delta < 1)) {
        throw std::invalid_argument("GKP width Delta must lie in (0, 1)");
    }
    spec.validate();
    auto grid = GridWigner::tabulate(1, spec, [&](const Eigen::VectorXd &x) {
        return gkp_zero_wigner(delta, x(0), x(1));
    });
    return grid.normalized();
}

// ---------------------------------------------------------------------------
// Grid operations
// ---------------------------------------------------------------------------

GridWigner cvc::convolve_axis(double variance, const GridWigner &grid, size_t axis) {
    if (!(variance > 0) || !std::isfinite(variance)) {
        throw std::invalid_argument("convolution variance must be positive");
    }
    if (axis >= grid.num_axes()) {
        throw std::out_of_range("axis " + std::to_string(axis) + " out of range");
    }
    const auto n = static_cast<long>(grid.spec().points);
    const double h = grid.spec().step();
    const double sigma = std::sqrt(variance);
    const long half = std::min(n, static_cast<long>(std::ceil(9.0 * sigma / h)));

    std::vector<double> kernel(static_cast<size_t>(2 * half + 1));
    double total = 0.0;
    for (long j = -half; j <= half; j++) {
        double x = static_cast<double>(j) * h;
        kernel[static_cast<size_t>(j + half)] = std::exp(-0.5 * x * x / variance);
        total += kernel[static_cast<size_t>(j + half)];
    }
    for (double &k : kernel) {
        k /= total;
    }

    const size_t stride = ipow(grid.spec().points, grid.num_axes() - 1 - axis);
    const size_t block = stride * grid.spec().points;
    const auto &in = grid.values();
    auto out = GridWigner::zeros(grid.num_modes(), grid.spec());
    auto &values = out.values();
    for (size_t base = 0; base < in.size(); base += block) {
        for (size_t inner = 0; inner < stride; inner++) {
            const double *src = in.data() + base + inner;
            double *dst = values.data() + base + inner;
            for (long i = 0; i < n; i++) {
                double acc = 0.0;
                long lo = std::max(-half, i - (n - 1));
                long hi = std::min(half, i);
                for (long j = lo; j <= hi; j++) {
                    acc += kernel[static_cast<size_t>(j + half)] * src[static_cast<size_t>(i - j) * stride];
                }
                dst[static_cast<size_t>(i) * stride] = acc;
            }
        }
    }
    return out;
}

double cvc::interpolate(const GridWigner &grid, const Eigen::VectorXd &x) {
    const size_t d = grid.num_axes();
    if (static_cast<size_t>(x.size()) != d) {
        throw std::invalid_argument("point has the wrong dimension for the grid");
    }
    const auto n = static_cast<long>(grid.spec().points);
    const double h = grid.spec().step();
    const double L = grid.spec().extent;

    std::array<long, 4> base{};
    std::array<std::array<double, 4>, 4> weight{};
    for (size_t a = 0; a < d; a++) {
        double u = (x(static_cast<Eigen::Index>(a)) + L) / h - 0.5;
        if (!(u > -2.0 && u < static_cast<double>(n) + 1.0)) {
            return 0.0;
        }
        double fl = std::floor(u);
        double frac = u - fl;
        base[a] = static_cast<long>(fl) - 1;
        for (int k = 0; k < 4; k++) {
            weight[a][static_cast<size_t>(k)] = keys(frac - (k - 1));
        }
    }

    const auto &values = grid.values();
    double acc = 0.0;
    const size_t combos = ipow(4, d);
    for (size_t c = 0; c < combos; c++) {
        size_t rest = c;
        size_t flat = 0;
        double w = 1.0;
        bool inside = true;
        for (size_t a = 0; a < d; a++) {
            size_t k = (rest >> (2 * (d - 1 - a))) & 3;
            long idx = base[a] + static_cast<long>(k);
            if (idx < 0 || idx >= n) {
                inside = false;
                break;
            }
            w *= weight[a][k];
            flat = flat * static_cast<size_t>(n) + static_cast<size_t>(idx);
        }
        if (inside && w != 0.0) {
            acc += w * values[flat];
        }
    }
    return acc;
}

GridWigner cvc::substitute_coordinates(const GridWigner &grid, const SymplecticTransform &transform) {
    if (transform.num_modes() != grid.num_modes()) {
        throw std::invalid_argument("transform acts on a different number of modes than the grid holds");
    }
    auto inverse = transform.inverse();
    auto out = GridWigner::zeros(grid.num_modes(), grid.spec());
    for (size_t k = 0; k < out.size(); k++) {
        out.values()[k] = interpolate(grid, inverse.matrix * out.point(k) + inverse.shift);
    }
    double before = grid.mass();
    double after = out.mass();
    if (std::abs(before - after) > 1e-3 * std::abs(before)) {
        throw std::domain_error(
            "transform pushes mass off the grid (mass " + std::to_string(before) + " -> " + std::to_string(after) + ")");
    }
    return out;
}

GridWigner cvc::resample(const GridWigner &grid, const GridSpec &target) {
    target.validate();
    return GridWigner::tabulate(grid.num_modes(), target, [&](const Eigen::VectorXd &x) {
        return interpolate(grid, x);
    });
}

GridMoments cvc::moments(const GridWigner &grid) {
    const auto d = static_cast<Eigen::Index>(grid.num_axes());
    double sum = 0.0;
    Eigen::VectorXd first = Eigen::VectorXd::Zero(d);
    Eigen::MatrixXd second = Eigen::MatrixXd::Zero(d, d);
    for (size_t k = 0; k < grid.size(); k++) {
        double w = grid.values()[k];
        Eigen::VectorXd x = grid.point(k);
        sum += w;
        first += w * x;
        second.noalias() += w * x * x.transpose();
    }
    if (!(sum > 0)) {
        throw std::domain_error("grid has non-positive mass");
    }
    Eigen::VectorXd mean = first / sum;
    Eigen::MatrixXd cov = second / sum - mean * mean.transpose();
    return {sum * std::pow(grid.spec().step(), static_cast<double>(d)), mean, cov};
}

GridComparison cvc::compare(const GridWigner &a, const GridWigner &b) {
    require_same_shape(a, b);
    auto na = a.normalized();
    auto nb = b.normalized();
    double l1 = 0.0;
    double linf = 0.0;
    for (size_t k = 0; k < na.size(); k++) {
        double diff = std::abs(na.values()[k] - nb.values()[k]);
        l1 += diff;
        linf = std::max(linf, diff);
    }
    l1 *= std::pow(a.spec().step(), static_cast<double>(a.num_axes()));
    auto ma = moments(na);
    auto mb = moments(nb);
    return {
        l1,
        linf,
        (ma.mean - mb.mean).cwiseAbs().maxCoeff(),
        (ma.cov - mb.cov).cwiseAbs().maxCoeff(),
    };
}

// ---------------------------------------------------------------------------
// One-mode gate
// ---------------------------------------------------------------------------

namespace {

void check_gate_inputs(const GridWigner &input, double epsilon, double kappa, int m) {
    if (input.num_modes() != 1) {
        throw std::invalid_argument("one-mode gate needs a one-mode grid");
    }
    if (!(epsilon > 0) || !(kappa > 0)) {
        throw std::invalid_argument("node variances must be positive");
    }
    if (m != 0 && m != 1) {
        throw std::invalid_argument("shear measurement index m must be 0 or 1");
    }
}

GridWigner sheared_input(const GridWigner &input, int m) {
    if (m == 0) {
        return input;
    }
    return substitute_coordinates(input, shear(1, 0, m));
}

}  // namespace

OneModeGateOracle::OneModeGateOracle(const GridWigner &input, double epsilon, double kappa, int m)
    : kappa_(kappa), slice_(GridWigner::zeros(1, input.spec())) {
    check_gate_inputs(input, epsilon, kappa, m);
    auto wa = sheared_input(input, m);
    const auto &spec = input.spec();
    const size_t n = spec.points;
    const double h = spec.step();

    // G_eps(p_2 - q_1) for every (p_2, q_1) pair.
    std::vector<double> blur(n * n);
    for (size_t k = 0; k < n; k++) {
        for (size_t j = 0; j < n; j++) {
            blur[k * n + j] = gaussian(epsilon, spec.coordinate(k) - spec.coordinate(j)) * h;
        }
    }
    // W_b(q_1, p_1, q_2', p_2) = W_a(q_1, p_1 - q_2') G_kappa(q_2') G_eps(p_2 - q_1)
    // at p_1 = t and q_2' = q_2 + t reads W_a at p = -q_2, which is the mirrored
    // grid index. The G_kappa factor is applied per outcome.
    auto &out = slice_.values();
    for (size_t i = 0; i < n; i++) {
        size_t mirror = n - 1 - i;
        for (size_t k = 0; k < n; k++) {
            double acc = 0.0;
            for (size_t j = 0; j < n; j++) {
                acc += wa.at(j, mirror) * blur[k * n + j];
            }
            out[i * n + k] = acc;
        }
    }
}

GridWigner OneModeGateOracle::operator()(double t) const {
    const auto &spec = slice_.spec();
    const size_t n = spec.points;
    auto out = slice_;
    for (size_t i = 0; i < n; i++) {
        double envelope = gaussian(kappa_, spec.coordinate(i) + t);
        for (size_t k = 0; k < n; k++) {
            out.values()[i * n + k] *= envelope;
        }
    }
    return out;
}

GridWigner cvc::one_mode_gate_bruteforce(const GridWigner &input, double epsilon, double kappa, int m, double t) {
    return OneModeGateOracle(input, epsilon, kappa, m)(t);
}

GridWigner cvc::one_mode_gate_closed_form(const GridWigner &input, double epsilon, double kappa, int m, double t) {
    check_gate_inputs(input, epsilon, kappa, m);
    auto blurred = convolve_axis(epsilon, sheared_input(input, m), 0);
    // (q, p) -> blurred(p, -q)
    auto rotated = substitute_coordinates(blurred, fourier(1, 0));
    const auto &spec = input.spec();
    const size_t n = spec.points;
    for (size_t i = 0; i < n; i++) {
        double envelope = gaussian(kappa, spec.coordinate(i) + t);
        for (size_t k = 0; k < n; k++) {
            rotated.values()[i * n + k] *= envelope;
        }
    }
    return rotated;
}

std::vector<double> cvc::outcome_grid(double center, double half_width, size_t count) {
    if (count < 3 || !(half_width > 0)) {
        throw std::invalid_argument("outcome grid needs at least three points and a positive width");
    }
    std::vector<double> out(count);
    double step = 2.0 * half_width / static_cast<double>(count - 1);
    for (size_t k = 0; k < count; k++) {
        out[k] = center - half_width + static_cast<double>(k) * step;
    }
    return out;
}

GridWigner cvc::average_over_outcomes(
    const std::function<GridWigner(double)> &builder, const std::vector<double> &outcomes, const AverageOptions &options) {
    if (outcomes.size() < 3) {
        throw std::invalid_argument("outcome grid needs at least three points");
    }
    double step = outcomes[1] - outcomes[0];
    if (!(step > 0)) {
        throw std::invalid_argument("outcome grid must be increasing");
    }
    for (size_t k = 1; k < outcomes.size(); k++) {
        if (std::abs(outcomes[k] - outcomes[k - 1] - step) > 1e-9 * std::max(1.0, std::abs(step))) {
            throw std::invalid_argument("outcome grid must be uniformly spaced");
        }
    }

    std::vector<double> masses(outcomes.size());
    std::vector<double> total;
    GridSpec spec;
    size_t modes = 0;
    for (size_t k = 0; k < outcomes.size(); k++) {
        auto g = builder(outcomes[k]);
        if (k == 0) {
            spec = g.spec();
            modes = g.num_modes();
            total.assign(g.size(), 0.0);
        } else if (!(g.spec() == spec) || g.num_modes() != modes) {
            throw std::invalid_argument("builder returned grids of different shapes");
        }
        masses[k] = g.mass();
        double w = (k == 0 || k + 1 == outcomes.size()) ? 0.5 * step : step;
        for (size_t i = 0; i < total.size(); i++) {
            total[i] += w * g.values()[i];
        }
    }
    if (options.check_coverage) {
        double peak = *std::max_element(masses.begin(), masses.end());
        double edge = std::max(std::abs(masses.front()), std::abs(masses.back()));
        if (!(peak > 0) || edge > options.coverage_tolerance * peak) {
            throw std::domain_error(
                "outcome grid does not cover the outcome density (edge/peak = " + std::to_string(edge / peak) + ")");
        }
    }
    return GridWigner(modes, spec, std::move(total)).normalized();
}

// ---------------------------------------------------------------------------
// Two-mode gate
// ---------------------------------------------------------------------------

TwoModeWigner cvc::gaussian_wigner_function(const GaussianState &state) {
    if (state.num_modes() != 2) {
        throw std::invalid_argument("two-mode oracle needs a two-mode input");
    }
    GaussianDensity density(state);
    return [density](const Eigen::Vector4d &x) {
        return density(Eigen::VectorXd(x));
    };
}

namespace {

struct Lattice {
    double start;
    double step;
    size_t count;

    double operator[](size_t k) const {
        return start + static_cast<double>(k) * step;
    }
    // Trapezoid weight; the integrands vanish at both ends.
    double weight() const {
        return step;
    }
};

Lattice centered_lattice(double center, double half_width, double step) {
    auto half = static_cast<size_t>(std::ceil(half_width / step));
    return {center - static_cast<double>(half) * step, step, 2 * half + 1};
}

void check_two_mode_params(const TwoModeOracleParams &params) {
    if (!(params.epsilon > 0) || !(params.kappa > 0)) {
        throw std::invalid_argument("node variances must be positive");
    }
    if (!(params.wide_sigmas > 0) || !(params.wide_step_sigmas > 0) || !(params.narrow_sigmas > 0) ||
        !(params.narrow_step_sigmas > 0)) {
        throw std::invalid_argument("quadrature ranges and steps must be positive");
    }
}

// Phase-space coordinates of the four modes in the order (q1, q2, q3, q4,
// p1, p2, p3, p4). W_a(x) = W_prod(S^{-1} x) for the CZ[1] chain 1-2-3-4.
class ChainIntegrand {
   public:
    ChainIntegrand(const TwoModeWigner &input, double epsilon, double kappa)
        : input_(input), epsilon_(epsilon), kappa_(kappa) {
        auto chain = controlled_z(4, 0, 1).then(controlled_z(4, 1, 2)).then(controlled_z(4, 2, 3));
        inverse_ = chain.inverse().matrix;
    }

    double operator()(const Eigen::Matrix<double, 8, 1> &x) const {
        Eigen::Matrix<double, 8, 1> y = inverse_ * x;
        Eigen::Vector4d in(y(0), y(3), y(4), y(7));
        return input_(in) * gaussian(kappa_, y(1)) * gaussian(epsilon_, y(5)) * gaussian(kappa_, y(2)) *
               gaussian(epsilon_, y(6));
    }

   private:
    const TwoModeWigner &input_;
    double epsilon_;
    double kappa_;
    Eigen::Matrix<double, 8, 8> inverse_;
};

}  // namespace

double cvc::two_mode_gate_direct(
    const TwoModeWigner &input, const TwoModeOracleParams &params, double r, double t, const Eigen::Vector4d &x) {
    check_two_mode_params(params);
    ChainIntegrand integrand(input, params.epsilon, params.kappa);
    double reach = params.wide_sigmas * std::sqrt(params.kappa) + std::max(std::abs(r), std::abs(t)) +
                   x.cwiseAbs().maxCoeff();
    auto lattice = centered_lattice(0.0, reach, params.narrow_step_sigmas * std::sqrt(params.epsilon));

    Eigen::Matrix<double, 8, 1> point;
    double acc = 0.0;
    for (size_t a = 0; a < lattice.count; a++) {
        for (size_t b = 0; b < lattice.count; b++) {
            // Output (q1, q4, p1, p4) reads the measured state at p1 + t, p4 + r.
            point << x(0), lattice[a], lattice[b], x(1), x(2) + t, r, t, x(3) + r;
            acc += integrand(point);
        }
    }
    return acc * lattice.weight() * lattice.weight();
}

double cvc::two_mode_gate_factored(
    const TwoModeWigner &input, const TwoModeOracleParams &params, double r, double t, const Eigen::Vector4d &x) {
    check_two_mode_params(params);
    double reach = params.wide_sigmas * std::sqrt(params.kappa) + std::max(std::abs(r), std::abs(t)) +
                   x.cwiseAbs().maxCoeff();
    auto lattice = centered_lattice(0.0, reach, params.narrow_step_sigmas * std::sqrt(params.epsilon));

    std::vector<double> fu(lattice.count);
    std::vector<double> fv(lattice.count);
    for (size_t k = 0; k < lattice.count; k++) {
        double w = lattice[k];
        fu[k] = gaussian(params.kappa, t - w) * gaussian(params.epsilon, w - x(1));
        fv[k] = gaussian(params.kappa, r - w) * gaussian(params.epsilon, w - x(0));
    }
    double acc = 0.0;
    for (size_t a = 0; a < lattice.count; a++) {
        if (fu[a] == 0.0) {
            continue;
        }
        for (size_t b = 0; b < lattice.count; b++) {
            if (fv[b] == 0.0) {
                continue;
            }
            Eigen::Vector4d y(x(0), x(1), x(2) + lattice[a], x(3) + lattice[b]);
            acc += input(y) * fu[a] * fv[b];
        }
    }
    return acc * lattice.weight() * lattice.weight();
}

double cvc::two_mode_gate_averaged_bruteforce(
    const TwoModeWigner &input, const TwoModeOracleParams &params, const Eigen::Vector4d &x) {
    check_two_mode_params(params);
    ChainIntegrand integrand(input, params.epsilon, params.kappa);
    double sk = std::sqrt(params.kappa);
    double se = std::sqrt(params.epsilon);
    auto wide = centered_lattice(0.0, params.wide_sigmas * sk, params.wide_step_sigmas * sk);
    auto narrow = centered_lattice(0.0, params.narrow_sigmas * se, params.narrow_step_sigmas * se);

    // Outcomes written as r = q1 + q3 + a, t = q2 + q4 + b (unit Jacobian).
    Eigen::Matrix<double, 8, 1> point;
    double acc = 0.0;
    for (size_t i2 = 0; i2 < wide.count; i2++) {
        double q2 = wide[i2];
        for (size_t i3 = 0; i3 < wide.count; i3++) {
            double q3 = wide[i3];
            for (size_t ia = 0; ia < narrow.count; ia++) {
                double r = x(0) + q3 + narrow[ia];
                for (size_t ib = 0; ib < narrow.count; ib++) {
                    double t = q2 + x(1) + narrow[ib];
                    point << x(0), q2, q3, x(1), x(2) + t, r, t, x(3) + r;
                    acc += integrand(point);
                }
            }
        }
    }
    return acc * wide.weight() * wide.weight() * narrow.weight() * narrow.weight();
}

std::string cvc::two_mode_argument_label(TwoModeArgument argument) {
    return argument == TwoModeArgument::kP4PlusQ1 ? "(q1, q4, p1 + q4, p4 + q1)" : "(q1, q4, p1 + q4, p4 + p1)";
}

double cvc::two_mode_gate_candidate(
    const GaussianState &input, double epsilon, TwoModeArgument argument, const Eigen::Vector4d &x) {
    if (input.num_modes() != 2) {
        throw std::invalid_argument("two-mode candidate needs a two-mode input");
    }
    Eigen::MatrixXd cov = input.cov();
    cov(2, 2) += epsilon;
    cov(3, 3) += epsilon;
    GaussianState blurred(input.mean(), cov);
    double last = argument == TwoModeArgument::kP4PlusQ1 ? x(3) + x(0) : x(3) + x(2);
    Eigen::VectorXd y(4);
    y << x(0), x(1), x(2) + x(1), last;
    return blurred.wigner(y);
}

TwoModeVerdict cvc::resolve_two_mode_argument(
    const GaussianState &input, const TwoModeOracleParams &params, const std::vector<Eigen::Vector4d> &points) {
    if (points.empty()) {
        throw std::invalid_argument("need at least one probe point");
    }
    auto w = gaussian_wigner_function(input);
    TwoModeVerdict verdict{0.0, 0.0, 0.0, TwoModeArgument::kP4PlusQ1};
    for (const auto &x : points) {
        double brute = two_mode_gate_averaged_bruteforce(w, params, x);
        verdict.scale = std::max(verdict.scale, std::abs(brute));
        verdict.error_p4_plus_q1 = std::max(
            verdict.error_p4_plus_q1,
            std::abs(brute - two_mode_gate_candidate(input, params.epsilon, TwoModeArgument::kP4PlusQ1, x)));
        verdict.error_p4_plus_p1 = std::max(
            verdict.error_p4_plus_p1,
            std::abs(brute - two_mode_gate_candidate(input, params.epsilon, TwoModeArgument::kP4PlusP1, x)));
    }
    verdict.winner = verdict.error_p4_plus_q1 <= verdict.error_p4_plus_p1 ? TwoModeArgument::kP4PlusQ1
                                                                          : TwoModeArgument::kP4PlusP1;
    return verdict;
}

GridWigner cvc::two_mode_gate_grid(
    const TwoModeWigner &input, double epsilon, double kappa, double r, double t, const GridSpec &spec) {
    spec.validate();
    if (!(epsilon > 0) || !(kappa > 0)) {
        throw std::invalid_argument("node variances must be positive");
    }
    const size_t n = spec.points;
    const double h = spec.step();
    // Integration offsets u = q4 + k h, v = q1 + k h, so p + u stays on a lattice
    // shifted from the output grid by q4 (resp. q1).
    const auto half = static_cast<long>(std::ceil(9.0 * std::sqrt(epsilon) / h));
    const size_t taps = static_cast<size_t>(2 * half + 1);
    const size_t ext = n + taps - 1;

    auto out = GridWigner::zeros(2, spec);
    std::vector<double> table(ext * ext);
    std::vector<double> partial(n * ext);
    std::vector<double> fu(taps);
    std::vector<double> fv(taps);
    for (size_t i1 = 0; i1 < n; i1++) {
        double q1 = spec.coordinate(i1);
        for (size_t i4 = 0; i4 < n; i4++) {
            double q4 = spec.coordinate(i4);
            for (long k = -half; k <= half; k++) {
                double w = static_cast<double>(k) * h;
                fu[static_cast<size_t>(k + half)] = gaussian(kappa, t - q4 - w) * gaussian(epsilon, w) * h;
                fv[static_cast<size_t>(k + half)] = gaussian(kappa, r - q1 - w) * gaussian(epsilon, w) * h;
            }
            // table(a, b) = W_in(q1, q4, q4 + y_a, q1 + y_b), y on the output grid
            // extended by `half` cells each side.
            for (size_t a = 0; a < ext; a++) {
                double ya = spec.coordinate(0) + (static_cast<double>(a) - static_cast<double>(half)) * h;
                for (size_t b = 0; b < ext; b++) {
                    double yb = spec.coordinate(0) + (static_cast<double>(b) - static_cast<double>(half)) * h;
                    table[a * ext + b] = input(Eigen::Vector4d(q1, q4, q4 + ya, q1 + yb));
                }
            }
            for (size_t j1 = 0; j1 < n; j1++) {
                for (size_t b = 0; b < ext; b++) {
                    double acc = 0.0;
                    for (size_t k = 0; k < taps; k++) {
                        acc += fu[k] * table[(j1 + k) * ext + b];
                    }
                    partial[j1 * ext + b] = acc;
                }
            }
            for (size_t j1 = 0; j1 < n; j1++) {
                for (size_t j4 = 0; j4 < n; j4++) {
                    double acc = 0.0;
                    for (size_t k = 0; k < taps; k++) {
                        acc += fv[k] * partial[j1 * ext + j4 + k];
                    }
                    out.values()[((i1 * n + i4) * n + j1) * n + j4] = acc;
                }
            }
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

namespace {

void write_u64(std::ostream &out, uint64_t v) {
    char bytes[8];
    for (int k = 0; k < 8; k++) {
        bytes[k] = static_cast<char>((v >> (8 * k)) & 0xff);
    }
    out.write(bytes, 8);
}

uint64_t read_u64(std::istream &in) {
    unsigned char bytes[8];
    if (!in.read(reinterpret_cast<char *>(bytes), 8)) {
        throw std::runtime_error("truncated grid file");
    }
    uint64_t v = 0;
    for (int k = 7; k >= 0; k--) {
        v = (v << 8) | bytes[k];
    }
    return v;
}

}  // namespace

void cvc::write_grid_binary(const GridWigner &grid, std::ostream &out) {
    write_u64(out, grid.num_modes());
    write_u64(out, grid.spec().points);
    write_u64(out, std::bit_cast<uint64_t>(grid.spec().extent));
    for (double v : grid.values()) {
        write_u64(out, std::bit_cast<uint64_t>(v));
    }
    if (!out) {
        throw std::runtime_error("failed to write grid");
    }
}

GridWigner cvc::read_grid_binary(std::istream &in) {
    uint64_t modes = read_u64(in);
    uint64_t points = read_u64(in);
    double extent = std::bit_cast<double>(read_u64(in));
    if (modes != 1 && modes != 2) {
        throw std::runtime_error("grid file has an invalid mode count");
    }
    GridSpec spec{extent, static_cast<size_t>(points)};
    spec.validate();
    std::vector<double> values(ipow(spec.points, 2 * modes));
    for (double &v : values) {
        v = std::bit_cast<double>(read_u64(in));
    }
    return GridWigner(static_cast<size_t>(modes), spec, std::move(values));
}

nlohmann::json cvc::grid_sidecar_json(const GridWigner &grid) {
    std::vector<std::string> axes;
    for (size_t k = 1; k <= grid.num_modes(); k++) {
        axes.push_back("q" + std::to_string(k));
    }
    for (size_t k = 1; k <= grid.num_modes(); k++) {
        axes.push_back("p" + std::to_string(k));
    }
    return {
        {"format", "cvcluster-grid"},
        {"byte_order", "little"},
        {"header", {"n_modes:uint64", "points:uint64", "extent:float64"}},
        {"values", "float64, row-major, axis 0 slowest"},
        {"n_modes", grid.num_modes()},
        {"points", grid.spec().points},
        {"extent", grid.spec().extent},
        {"step", grid.spec().step()},
        {"axes", axes},
        {"coordinates", "x_i = -extent + (i + 1/2) step"},
        {"mass", grid.mass()},
        {"min_value", grid.min_value()},
    };
}
