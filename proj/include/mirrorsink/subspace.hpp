// SPDX-License-Identifier: Apache-2.0
//
// mirrorsink: indoor radio localization with mirrored virtual receivers
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#ifndef MIRRORSINK_SUBSPACE_HPP
#define MIRRORSINK_SUBSPACE_HPP

#include <Eigen/Dense>

#include "mirrorsink/common.hpp"

namespace mirrorsink {

// R_hat = (1/F) * sum_f r(f) r(f)^H
inline Eigen::MatrixXcd sample_covariance(const Eigen::MatrixXcd &snapshots) {
    if (snapshots.cols() < 1)
        throw ConfigError("sample covariance needs at least one snapshot");
    Eigen::MatrixXcd r = snapshots * snapshots.adjoint() / static_cast<double>(snapshots.cols());
    return (r + r.adjoint().eval()) / 2.0;
}

// Projector onto the noise subspace: W = E_N E_N^H, with E_N the eigenvectors
// of the N - K_sig smallest eigenvalues.
struct NoiseProjector {
    Eigen::MatrixXcd w;
    int signal_dim = 0;
};

inline NoiseProjector noise_projector(const Eigen::MatrixXcd &covariance, int signal_dim) {
    const Eigen::Index n = covariance.rows();
    if (covariance.cols() != n)
        throw ConfigError("covariance must be square");
    if (signal_dim < 1 || signal_dim >= n)
        throw ConfigError("signal dimension must satisfy 1 <= K_sig < N_total");

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(covariance);
    if (eig.info() != Eigen::Success)
        throw NumericalError("eigendecomposition of the covariance failed");

    // Eigen returns eigenvalues in ascending order; equal eigenvalues keep the
    // solver's deterministic index order.
    const Eigen::Index noise_dim = n - signal_dim;
    const Eigen::MatrixXcd basis = eig.eigenvectors().leftCols(noise_dim);
    NoiseProjector proj;
    proj.signal_dim = signal_dim;
    proj.w = basis * basis.adjoint();
    proj.w = ((proj.w + proj.w.adjoint().eval()) / 2.0).eval();
    return proj;
}

// Inverse of (R + eps*I). With eps = 0 the matrix must be well conditioned;
// a smallest eigenvalue below 1e-12 of the largest is treated as singular.
inline Eigen::MatrixXcd regularized_inverse(const Eigen::MatrixXcd &covariance, double eps) {
    const Eigen::Index n = covariance.rows();
    if (covariance.cols() != n)
        throw ConfigError("covariance must be square");
    if (eps < 0.0)
        throw ConfigError("regularization must be nonnegative");

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(covariance);
    if (eig.info() != Eigen::Success)
        throw NumericalError("eigendecomposition of the covariance failed");

    const Eigen::VectorXd ev = eig.eigenvalues();
    const double lambda_max = std::max(ev(n - 1), 0.0);
    if (eps == 0.0 && (ev(0) <= 0.0 || ev(0) <= 1e-12 * lambda_max))
        throw NumericalError("covariance is singular; use a positive regularization");

    const Eigen::VectorXd inv_ev = (ev.array() + eps).inverse();
    Eigen::MatrixXcd r = eig.eigenvectors() * inv_ev.asDiagonal() * eig.eigenvectors().adjoint();
    return (r + r.adjoint().eval()) / 2.0;
}

// Default MVDR loading when the estimate is rank deficient (F < N_total).
inline double default_regularization(const Eigen::MatrixXcd &covariance) {
    return 1e-6 * covariance.real().trace() / static_cast<double>(covariance.rows());
}

} // namespace mirrorsink

#endif
