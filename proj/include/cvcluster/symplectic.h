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

#ifndef CVCLUSTER_SYMPLECTIC_H
#define CVCLUSTER_SYMPLECTIC_H

#include <Eigen/Dense>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "cvcluster/gaussian_state.h"

namespace cvc {

/// Heisenberg action x -> S x + c of a Gaussian unitary.
///
/// A state transforms as mean -> S mean + c, cov -> S cov S^T; a Wigner
/// function transforms as W(x) -> W(S^{-1}(x - c)).
struct SymplecticTransform {
    Eigen::MatrixXd matrix;
    Eigen::VectorXd shift;

    static SymplecticTransform identity(size_t num_modes);

    size_t num_modes() const;
    /// max |S^T Omega S - Omega|.
    double symplectic_defect() const;
    bool is_symplectic(double tolerance = 1e-12) const;
    /// The transform that applies `this` first and `next` second.
    SymplecticTransform then(const SymplecticTransform &next) const;
    SymplecticTransform inverse() const;
    /// S^{-1}(x - c).
    Eigen::VectorXd pull_back(const Eigen::VectorXd &x) const;
};

enum class GateKind {
    kControlledZ,
    kShear,
    kFourier,
    kDisplaceQ,
    kDisplaceP,
};

/// A named gate on specific modes. `parameter` is g for CZ[g], m for shears,
/// and the displacement amount for displacements; Fourier ignores it.
struct GateSpec {
    GateKind kind;
    std::vector<size_t> modes;
    double parameter = 0.0;
};

SymplecticTransform standard_transform(size_t num_modes, const GateSpec &gate);

/// CZ[g] = exp(i g q_a q_b): p_a -> p_a + g q_b, p_b -> p_b + g q_a.
SymplecticTransform controlled_z(size_t num_modes, size_t a, size_t b, double g = 1.0);
/// P(m) = exp(i m q^2 / 2): p -> p + m q.
SymplecticTransform shear(size_t num_modes, size_t mode, double m);
/// q -> -p, p -> q.
SymplecticTransform fourier(size_t num_modes, size_t mode);
/// X(t): q -> q + t.
SymplecticTransform displace_q(size_t num_modes, size_t mode, double t);
/// Z(t): p -> p + t.
SymplecticTransform displace_p(size_t num_modes, size_t mode, double t);
/// Phase-space rotation by theta (theta = pi/2 is the Fourier gate).
SymplecticTransform phase_rotation(size_t num_modes, size_t mode, double theta);
/// q -> e^{-r} q, p -> e^{r} p.
SymplecticTransform squeezer(size_t num_modes, size_t mode, double r);
/// Beam splitter mixing the (q, p) pairs of two modes by angle theta.
SymplecticTransform beam_splitter(size_t num_modes, size_t a, size_t b, double theta);

/// Throws std::invalid_argument when the transform is not symplectic or the
/// dimensions do not match.
GaussianState apply_symplectic(const GaussianState &state, const SymplecticTransform &transform);

/// Random symplectic matrix built from layers of rotations, squeezers (|r| up
/// to `max_squeeze`), shears and beam splitters. Deterministic for a seed.
SymplecticTransform random_symplectic(size_t num_modes, uint64_t seed, double max_squeeze = 0.6);

/// Thermal state (symplectic eigenvalues in [1/2, 1/2 + max_excess]) under a
/// random symplectic, with a random mean of scale `mean_scale`.
GaussianState random_gaussian_state(
    size_t num_modes, uint64_t seed, double max_squeeze = 0.6, double max_excess = 0.5, double mean_scale = 0.5);

}  // namespace cvc

#endif
