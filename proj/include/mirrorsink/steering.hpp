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
// Near-field array responses. Each antenna contributes a unit-modulus phasor
// exp(j*2*pi/lambda * distance); there is no amplitude term (pathloss is out
// of scope). The stacked vectors follow a fixed AP order: a0 stacks the
// direct receivers, a1 stacks the per-AP sums of all mirrored receivers.

#ifndef MIRRORSINK_STEERING_HPP
#define MIRRORSINK_STEERING_HPP

#include <Eigen/Dense>

#include "mirrorsink/database.hpp"
#include "mirrorsink/geometry.hpp"

namespace mirrorsink {

inline constexpr double kCoincidentTol = 1e-12;

// Array response of one receiver to a source at u.
inline Eigen::VectorXcd steering_vector(const AntennaArray &arr, Point u, double wavelength) {
    if (!(wavelength > 0.0))
        throw ConfigError("wavelength must be positive");
    const double k = 2.0 * kPi / wavelength;
    Eigen::VectorXcd a(arr.size());
    for (std::size_t i = 0; i < arr.size(); ++i) {
        const double d = distance(arr.antennas[i], u);
        if (d < kCoincidentTol)
            throw GeometryError("source position coincides with an antenna");
        a(static_cast<Eigen::Index>(i)) = std::polar(1.0, k * d);
    }
    return a;
}

struct StackedSteering {
    Eigen::VectorXcd a0; // direct receivers, all APs stacked
    Eigen::VectorXcd a1; // sum of mirrored receivers per AP, stacked
};

// Direct-path steering only (what the database-free methods may use).
inline Eigen::VectorXcd direct_steering(const ChannelDatabase &db, Point u, double wavelength) {
    const std::size_t n_total = db.total_antennas();
    Eigen::VectorXcd a0(static_cast<Eigen::Index>(n_total));
    Eigen::Index row = 0;
    for (const auto &ap : db.aps) {
        const auto &arr = ap.receivers.front().array;
        a0.segment(row, static_cast<Eigen::Index>(arr.size())) = steering_vector(arr, u, wavelength);
        row += static_cast<Eigen::Index>(arr.size());
    }
    return a0;
}

inline StackedSteering stacked_steering(const ChannelDatabase &db, Point u, double wavelength) {
    const std::size_t n_total = db.total_antennas();
    StackedSteering s;
    s.a0.resize(static_cast<Eigen::Index>(n_total));
    s.a1 = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(n_total));
    Eigen::Index row = 0;
    for (const auto &ap : db.aps) {
        const Eigen::Index n = static_cast<Eigen::Index>(ap.receivers.front().array.size());
        s.a0.segment(row, n) = steering_vector(ap.receivers.front().array, u, wavelength);
        for (std::size_t l = 1; l < ap.receivers.size(); ++l)
            s.a1.segment(row, n) += steering_vector(ap.receivers[l].array, u, wavelength);
        row += n;
    }
    return s;
}

// Effective steering vector for reflection coefficient gamma.
inline Eigen::VectorXcd effective_steering(const Eigen::VectorXcd &a0, const Eigen::VectorXcd &a1, cdouble gamma) {
    if (a0.size() != a1.size())
        throw ConfigError("effective_steering: length mismatch");
    return a0 + gamma * a1;
}

} // namespace mirrorsink

#endif
