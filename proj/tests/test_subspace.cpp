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
#include <random>

#include "mirrorsink/scene.hpp"
#include "mirrorsink/signal.hpp"
#include "mirrorsink/subspace.hpp"

using namespace mirrorsink;

namespace {

Eigen::MatrixXcd random_complex(Eigen::Index rows, Eigen::Index cols, unsigned seed) {
    std::mt19937 rng(seed);
    std::normal_distribution<double> g(0.0, 1.0);
    Eigen::MatrixXcd m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j)
            m(i, j) = cdouble{g(rng), g(rng)};
    return m;
}

Eigen::MatrixXcd random_psd(Eigen::Index n, unsigned seed, double load = 0.0) {
    const Eigen::MatrixXcd x = random_complex(n, n + 4, seed);
    Eigen::MatrixXcd r = x * x.adjoint() / static_cast<double>(n + 4);
    r += load * Eigen::MatrixXcd::Identity(n, n);
    return (r + r.adjoint().eval()) / 2.0;
}

} // namespace

TEST_CASE("single-snapshot covariance is the rank-one outer product") {
    Eigen::MatrixXcd x(3, 1);
    x << cdouble{1, 1}, cdouble{0, 2}, cdouble{-1, 0};
    const Eigen::MatrixXcd r = sample_covariance(x);
    CHECK((r - x.col(0) * x.col(0).adjoint()).norm() < 1e-14);
}

TEST_CASE("constant unit-vector snapshots give a single diagonal one") {
    Eigen::MatrixXcd x = Eigen::MatrixXcd::Zero(4, 9);
    x.row(0).setOnes();
    const Eigen::MatrixXcd r = sample_covariance(x);
    Eigen::MatrixXcd expect = Eigen::MatrixXcd::Zero(4, 4);
    expect(0, 0) = 1.0;
    CHECK((r - expect).norm() < 1e-14);
}

TEST_CASE("sample covariance matches a naive accumulation oracle") {
    const Eigen::MatrixXcd x = random_complex(12, 128, 5);
    const Eigen::MatrixXcd r = sample_covariance(x);

    // independent double-loop accumulation in snapshot-major order
    Eigen::MatrixXcd oracle = Eigen::MatrixXcd::Zero(12, 12);
    for (Eigen::Index f = 0; f < x.cols(); ++f)
        for (Eigen::Index i = 0; i < 12; ++i)
            for (Eigen::Index j = 0; j < 12; ++j)
                oracle(i, j) += x(i, f) * std::conj(x(j, f));
    oracle /= 128.0;
    CHECK((r - oracle).lpNorm<Eigen::Infinity>() < 1e-12);
}

TEST_CASE("empty snapshot sets are rejected") {
    CHECK_THROWS_AS(sample_covariance(Eigen::MatrixXcd(4, 0)), ConfigError);
}

TEST_CASE("noise projector of a diagonal covariance") {
    Eigen::MatrixXcd r = Eigen::MatrixXcd::Zero(3, 3);
    r.diagonal() << 10.0, 1.0, 1.0;
    const NoiseProjector proj = noise_projector(r, 1);
    Eigen::MatrixXcd expect = Eigen::MatrixXcd::Identity(3, 3);
    expect(0, 0) = 0.0;
    CHECK((proj.w - expect).norm() < 1e-12);
    CHECK(proj.signal_dim == 1);
}

TEST_CASE("degenerate spectrum still yields a proper projector") {
    const Eigen::MatrixXcd r = Eigen::MatrixXcd::Identity(2, 2);
    const NoiseProjector proj = noise_projector(r, 1);
    CHECK((proj.w * proj.w - proj.w).norm() < 1e-8);
    CHECK((proj.w - proj.w.adjoint()).norm() < 1e-10);
    CHECK(proj.w.real().trace() == Catch::Approx(1.0).margin(1e-6));
}

TEST_CASE("projector properties hold for random covariances") {
    for (unsigned seed = 0; seed < 20; ++seed) {
        const Eigen::Index n = 8;
        const int k = 1 + static_cast<int>(seed % 5);
        const Eigen::MatrixXcd r = random_psd(n, 100 + seed, 0.01);
        const NoiseProjector proj = noise_projector(r, k);
        CHECK((proj.w * proj.w - proj.w).norm() < 1e-8);
        CHECK((proj.w - proj.w.adjoint()).norm() < 1e-10);
        CHECK(proj.w.real().trace() == Catch::Approx(static_cast<double>(n - k)).margin(1e-6));
    }
}

TEST_CASE("projector annihilates the signal steering vectors of the reference scenario") {
    const SceneSpec scene{RectRoom{0, 0, 20, 30},
                          {ApSpec{"south", 6, {}, 0.0625}, ApSpec{"west", 6, {}, 0.0625}},
                          {}};
    const ChannelDatabase db = build_scene_database(scene);
    SceneConfig cfg;
    cfg.wavelength = 0.125;
    cfg.gamma = {-db_to_amplitude(-7.0), 0.0};
    cfg.snr_db = 20.0;
    cfg.users = {{7, 12}, {9, 13}};
    const Eigen::MatrixXcd r = ideal_covariance(db, cfg);
    const NoiseProjector proj = noise_projector(r, 2);
    for (const Point &u : cfg.users) {
        const StackedSteering s = stacked_steering(db, u, cfg.wavelength);
        const Eigen::VectorXcd abar = s.a0 + cfg.gamma * s.a1;
        CHECK((proj.w * abar).norm() <= 1e-6 * abar.norm());
    }
}

TEST_CASE("projector is invariant under covariance scaling") {
    const Eigen::MatrixXcd r = random_psd(10, 7, 0.01);
    const NoiseProjector a = noise_projector(r, 3);
    const NoiseProjector b = noise_projector(42.0 * r, 3);
    CHECK((a.w - b.w).norm() < 1e-8);
}

TEST_CASE("signal dimension bounds are enforced") {
    const Eigen::MatrixXcd r = random_psd(6, 9, 0.01);
    CHECK_THROWS_AS(noise_projector(r, 0), ConfigError);
    CHECK_THROWS_AS(noise_projector(r, 6), ConfigError);
    CHECK_THROWS_AS(noise_projector(r, 7), ConfigError);
}

TEST_CASE("eigendecomposition reconstructs the covariance") {
    const Eigen::MatrixXcd r = random_psd(9, 31, 0.1);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(r);
    Eigen::MatrixXcd rebuilt = Eigen::MatrixXcd::Zero(9, 9);
    for (Eigen::Index i = 0; i < 9; ++i)
        rebuilt += eig.eigenvalues()(i) * eig.eigenvectors().col(i) * eig.eigenvectors().col(i).adjoint();
    CHECK((rebuilt - r).norm() < 1e-8 * r.norm());
}

TEST_CASE("regularized inverse basics") {
    const Eigen::MatrixXcd eye = Eigen::MatrixXcd::Identity(3, 3);
    CHECK((regularized_inverse(eye, 0.0) - eye).norm() < 1e-12);

    Eigen::MatrixXcd d = Eigen::MatrixXcd::Zero(2, 2);
    d.diagonal() << 2.0, 4.0;
    const Eigen::MatrixXcd inv = regularized_inverse(d, 0.0);
    CHECK(inv(0, 0).real() == Catch::Approx(0.5));
    CHECK(inv(1, 1).real() == Catch::Approx(0.25));
}

TEST_CASE("regularized inverse satisfies the residual identity") {
    for (unsigned seed = 0; seed < 10; ++seed) {
        const Eigen::MatrixXcd r = random_psd(8, 200 + seed);
        const double eps = 1e-3;
        const Eigen::MatrixXcd inv = regularized_inverse(r, eps);
        const Eigen::MatrixXcd eye = Eigen::MatrixXcd::Identity(8, 8);
        CHECK(((r + eps * eye) * inv - eye).norm() < 1e-8);
    }
}

TEST_CASE("singular matrix without regularization is a numerical error") {
    Eigen::MatrixXcd r = Eigen::MatrixXcd::Zero(3, 3);
    r(0, 0) = 1.0; // rank one
    CHECK_THROWS_AS(regularized_inverse(r, 0.0), NumericalError);
    CHECK_NOTHROW(regularized_inverse(r, 1e-3));
    CHECK_THROWS_AS(regularized_inverse(r, -1.0), ConfigError);
}
