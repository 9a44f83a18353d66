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

#include <catch2/catch_amalgamated.hpp>
#include <limits>

#include "mirrorsink/scene.hpp"
#include "mirrorsink/signal.hpp"

using namespace mirrorsink;

namespace {

ChannelDatabase reference_db(int antennas_per_ap = 6) {
    const SceneSpec scene{RectRoom{0, 0, 20, 30},
                          {ApSpec{"south", antennas_per_ap, {}, 0.0625},
                           ApSpec{"west", antennas_per_ap, {}, 0.0625}},
                          {}};
    return build_scene_database(scene);
}

SceneConfig demo_scene(double gamma_db, double snr_db = 20.0, int snapshots = 128) {
    SceneConfig cfg;
    cfg.wavelength = 0.125;
    cfg.gamma = {-db_to_amplitude(gamma_db), 0.0};
    cfg.snr_db = snr_db;
    cfg.snapshots = snapshots;
    cfg.users = {{7, 12}, {9, 13}};
    cfg.seed = 99;
    return cfg;
}

} // namespace

TEST_CASE("noiseless single-user single-snapshot synthesis is the scaled steering vector") {
    const ChannelDatabase db = reference_db(6);
    SceneConfig cfg = demo_scene(-7.0, std::numeric_limits<double>::infinity(), 1);
    cfg.users = {{7, 12}};
    const SnapshotMatrix snap = synthesize_snapshots(db, cfg);
    REQUIRE(snap.data.rows() == 12);
    REQUIRE(snap.data.cols() == 1);

    const StackedSteering s = stacked_steering(db, {7, 12}, cfg.wavelength);
    const Eigen::VectorXcd abar = s.a0 + cfg.gamma * s.a1;
    // r = abar * s1, so r is proportional to abar entrywise
    const cdouble ratio = snap.data(0, 0) / abar(0);
    for (Eigen::Index i = 0; i < 12; ++i)
        CHECK(std::abs(snap.data(i, 0) - ratio * abar(i)) < 1e-9);
    CHECK(snap.data.col(0).squaredNorm() / std::norm(ratio) ==
          Catch::Approx(abar.squaredNorm()).epsilon(1e-9));
}

TEST_CASE("reference scenario dimensions: 12 x 128") {
    const ChannelDatabase db = reference_db(6);
    const SnapshotMatrix snap = synthesize_snapshots(db, demo_scene(-7.0));
    CHECK(snap.data.rows() == 12);
    CHECK(snap.data.cols() == 128);
}

TEST_CASE("synthesis is bit-identical for equal seeds") {
    const ChannelDatabase db = reference_db(6);
    const SceneConfig cfg = demo_scene(-7.0);
    const SnapshotMatrix a = synthesize_snapshots(db, cfg);
    const SnapshotMatrix b = synthesize_snapshots(db, cfg);
    REQUIRE(a.data.size() == b.data.size());
    for (Eigen::Index i = 0; i < a.data.size(); ++i) {
        CHECK(a.data.data()[i].real() == b.data.data()[i].real());
        CHECK(a.data.data()[i].imag() == b.data.data()[i].imag());
    }
    SceneConfig other = cfg;
    other.seed = 100;
    const SnapshotMatrix c = synthesize_snapshots(db, other);
    CHECK((a.data - c.data).norm() > 0.0);
}

TEST_CASE("users outside the room are rejected") {
    const ChannelDatabase db = reference_db(6);
    SceneConfig cfg = demo_scene(-7.0);
    cfg.users = {{25, 12}};
    CHECK_THROWS_AS(synthesize_snapshots(db, cfg), ConfigError);
    cfg.users = {{10, 0}}; // on the wall counts as outside
    CHECK_THROWS_AS(synthesize_snapshots(db, cfg), ConfigError);
}

TEST_CASE("invalid scene configs are rejected") {
    SceneConfig cfg = demo_scene(-7.0);
    cfg.snapshots = 0;
    CHECK_THROWS_AS(validate_config(cfg), ConfigError);
    cfg = demo_scene(-7.0);
    cfg.users.clear();
    CHECK_THROWS_AS(validate_config(cfg), ConfigError);
    cfg = demo_scene(-7.0);
    cfg.gamma = {1.5, 0};
    CHECK_THROWS_AS(validate_config(cfg), ConfigError);
    cfg = demo_scene(-7.0);
    cfg.wavelength = 0.0;
    CHECK_THROWS_AS(validate_config(cfg), ConfigError);
}

TEST_CASE("ideal covariance of an empty scene is sigma^2 I") {
    const ChannelDatabase db = reference_db(4);
    SceneConfig cfg = demo_scene(-7.0, 20.0);
    cfg.users.clear();
    const Eigen::MatrixXcd r = ideal_covariance(db, cfg);
    const double sigma2 = noise_variance(20.0);
    CHECK((r - sigma2 * Eigen::MatrixXcd::Identity(8, 8)).norm() < 1e-14);
}

TEST_CASE("noise-free single-user ideal covariance is the rank-one outer product") {
    const ChannelDatabase db = reference_db(4);
    SceneConfig cfg = demo_scene(-7.0);
    cfg.users = {{7, 12}};
    cfg.snr_db = std::numeric_limits<double>::infinity();
    const Eigen::MatrixXcd r = ideal_covariance(db, cfg);

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(r);
    const StackedSteering s = stacked_steering(db, {7, 12}, cfg.wavelength);
    const Eigen::VectorXcd abar = s.a0 + cfg.gamma * s.a1;
    CHECK(eig.eigenvalues()(7) == Catch::Approx(abar.squaredNorm()).epsilon(1e-10));
    for (int i = 0; i < 7; ++i)
        CHECK(std::abs(eig.eigenvalues()(i)) < 1e-10 * abar.squaredNorm());
}

TEST_CASE("ideal covariance is Hermitian with eigenvalues at least sigma^2") {
    const ChannelDatabase db = reference_db(6);
    const SceneConfig cfg = demo_scene(-7.0);
    const Eigen::MatrixXcd r = ideal_covariance(db, cfg);
    CHECK((r - r.adjoint()).norm() < 1e-12);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(r);
    CHECK(eig.eigenvalues()(0) >= noise_variance(cfg.snr_db) - 1e-9);
}

TEST_CASE("sample covariance of synthesized data converges to the ideal covariance") {
    const ChannelDatabase db = reference_db(4);
    SceneConfig cfg = demo_scene(-7.0);
    cfg.users = {{7, 12}};
    cfg.snapshots = 100000;
    cfg.seed = 2024;
    const SnapshotMatrix snap = synthesize_snapshots(db, cfg);
    const Eigen::MatrixXcd r_hat =
        snap.data * snap.data.adjoint() / static_cast<double>(snap.data.cols());
    const Eigen::MatrixXcd r = ideal_covariance(db, cfg);

    // entrywise within 3 standard errors; SE of entry (i,j) is about
    // sqrt(R_ii * R_jj / F)
    const double inv_sqrt_f = 1.0 / std::sqrt(static_cast<double>(cfg.snapshots));
    for (Eigen::Index i = 0; i < r.rows(); ++i)
        for (Eigen::Index j = 0; j < r.cols(); ++j) {
            const double se = std::sqrt(r(i, i).real() * r(j, j).real()) * inv_sqrt_f;
            CHECK(std::abs(r_hat(i, j) - r(i, j)) < 3.0 * se);
        }
}

TEST_CASE("gamma zero reduces the covariance to the direct-path model") {
    const ChannelDatabase db = reference_db(4);
    SceneConfig cfg = demo_scene(-300.0); // gamma amplitude ~ 1e-15
    cfg.users = {{7, 12}};
    const Eigen::MatrixXcd r = ideal_covariance(db, cfg);
    const Eigen::VectorXcd a0 = direct_steering(db, {7, 12}, cfg.wavelength);
    const Eigen::MatrixXcd expect =
        a0 * a0.adjoint() + noise_variance(cfg.snr_db) * Eigen::MatrixXcd::Identity(8, 8);
    CHECK((r - expect).norm() < 1e-6);
}
