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
//
// Received-signal synthesis. Each user transmits i.i.d. unit-variance
// circular complex Gaussian symbols; every AP antenna sees the direct path
// plus gamma times the sum of the single-bounce reflections, plus white
// noise. SNR is defined per antenna on the direct path, so the noise
// variance per entry is sigma^2 = 10^(-snr_db/10).

#ifndef MIRRORSINK_SIGNAL_HPP
#define MIRRORSINK_SIGNAL_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "mirrorsink/rng.hpp"
#include "mirrorsink/steering.hpp"

namespace mirrorsink {

struct SceneConfig {
    double wavelength = 0.125;
    cdouble gamma{0.0, 0.0}; // true reflection coefficient, |gamma| <= 1
    double snr_db = 20.0;
    int snapshots = 128;       // F
    std::vector<Point> users;  // K user positions
    std::uint64_t seed = 0;
};

inline void validate_config(const SceneConfig &cfg) {
    if (!(cfg.wavelength > 0.0))
        throw ConfigError("wavelength must be positive");
    if (cfg.snapshots < 1)
        throw ConfigError("need at least one snapshot");
    if (cfg.users.empty())
        throw ConfigError("need at least one user");
    if (std::abs(cfg.gamma) > 1.0 + 1e-12)
        throw ConfigError("|gamma| must not exceed 1");
}

inline double noise_variance(double snr_db) { return std::pow(10.0, -snr_db / 10.0); }

struct SnapshotMatrix {
    Eigen::MatrixXcd data; // N_total x F
    SceneConfig config;
};

namespace detail {

inline void require_users_inside(const ChannelDatabase &db, const std::vector<Point> &users) {
    const std::vector<Point> poly = room_polygon(db.room);
    if (poly.empty())
        return; // open wall set, nothing to check against
    for (const Point &u : users)
        if (!point_in_polygon(u, poly))
            throw ConfigError("user position outside the room");
}

} // namespace detail

// r(f) = sum_k (a0(u_k) + gamma * a1(u_k)) s_k(f) + n(f). Deterministic for a
// given seed: all symbols are drawn first (user-major per snapshot), then all
// noise entries (antenna-major per snapshot).
inline SnapshotMatrix synthesize_snapshots(const ChannelDatabase &db, const SceneConfig &cfg) {
    validate_config(cfg);
    detail::require_users_inside(db, cfg.users);

    const Eigen::Index n_total = static_cast<Eigen::Index>(db.total_antennas());
    const Eigen::Index f_count = cfg.snapshots;
    const Eigen::Index k_count = static_cast<Eigen::Index>(cfg.users.size());

    Eigen::MatrixXcd steer(n_total, k_count);
    for (Eigen::Index k = 0; k < k_count; ++k) {
        const StackedSteering s = stacked_steering(db, cfg.users[k], cfg.wavelength);
        steer.col(k) = s.a0 + cfg.gamma * s.a1;
    }

    RandomStream rng(cfg.seed);
    Eigen::MatrixXcd symbols(k_count, f_count);
    for (Eigen::Index f = 0; f < f_count; ++f)
        for (Eigen::Index k = 0; k < k_count; ++k)
            symbols(k, f) = rng.complex_gaussian();

    SnapshotMatrix out;
    out.config = cfg;
    out.data = steer * symbols;

    const double sigma = std::sqrt(noise_variance(cfg.snr_db));
    if (sigma > 0.0)
        for (Eigen::Index f = 0; f < f_count; ++f)
            for (Eigen::Index i = 0; i < n_total; ++i)
                out.data(i, f) += sigma * rng.complex_gaussian();
    return out;
}

// R = sum_k abar_k abar_k^H + sigma^2 I (the asymptotic covariance).
inline Eigen::MatrixXcd ideal_covariance(const ChannelDatabase &db, const SceneConfig &cfg) {
    if (!(cfg.wavelength > 0.0))
        throw ConfigError("wavelength must be positive");
    detail::require_users_inside(db, cfg.users);
    const Eigen::Index n_total = static_cast<Eigen::Index>(db.total_antennas());
    Eigen::MatrixXcd r = noise_variance(cfg.snr_db) * Eigen::MatrixXcd::Identity(n_total, n_total);
    for (const Point &u : cfg.users) {
        const StackedSteering s = stacked_steering(db, u, cfg.wavelength);
        const Eigen::VectorXcd abar = s.a0 + cfg.gamma * s.a1;
        r.noalias() += abar * abar.adjoint();
    }
    return (r + r.adjoint().eval()) / 2.0; // keep exactly Hermitian
}

} // namespace mirrorsink

#endif
