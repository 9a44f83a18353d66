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
// Spatial spectra over candidate user positions.
//
//   MUSIC     S(u) = abar^H abar / (abar^H W abar), abar = a0 + gamma*a1,
//             with gamma either known or chosen per point to minimize the
//             noise-subspace energy (nuisance-variable form).
//   MVDR      S(u) = 1 / (a0^H R^-1 a0)    -- no wall knowledge, a0 only
//   MF        S(u) = a0^H R a0             -- no wall knowledge, a0 only

#ifndef MIRRORSINK_SPECTRA_HPP
#define MIRRORSINK_SPECTRA_HPP

#include <Eigen/Dense>
#include <atomic>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "mirrorsink/steering.hpp"
#include "mirrorsink/subspace.hpp"

namespace mirrorsink {

enum class MethodKind { MusicEst, MusicKnown, Mvdr, Mf };
enum class GammaMode { Real, Complex };

struct MethodSpec {
    MethodKind kind = MethodKind::MusicEst;
    GammaMode gamma_mode = GammaMode::Real;
    cdouble known_gamma{0.0, 0.0}; // MusicKnown only
    bool clamp_gamma = true;       // keep the estimate inside the physical |gamma| <= 1
    bool legacy_gamma_formula = false; // historical form of the estimate, for comparison runs only

    static MethodSpec music_est(GammaMode mode = GammaMode::Real) {
        MethodSpec s;
        s.kind = MethodKind::MusicEst;
        s.gamma_mode = mode;
        return s;
    }
    static MethodSpec music_known(cdouble gamma) {
        MethodSpec s;
        s.kind = MethodKind::MusicKnown;
        s.known_gamma = gamma;
        return s;
    }
    static MethodSpec mvdr() { return MethodSpec{MethodKind::Mvdr}; }
    static MethodSpec mf() { return MethodSpec{MethodKind::Mf}; }

    std::string name() const {
        switch (kind) {
        case MethodKind::MusicEst:
            return "music-est";
        case MethodKind::MusicKnown:
            return "music-known";
        case MethodKind::Mvdr:
            return "mvdr";
        case MethodKind::Mf:
            return "mf";
        }
        return "?";
    }
};

struct GammaEstimate {
    cdouble value{0.0, 0.0};
    bool unidentifiable = false; // a1 carries no energy in the noise subspace
};

namespace detail {

// Minimizer of q(gamma) = q00 + 2 Re(gamma q01) + |gamma|^2 q11 from the
// precomputed quadratic forms q00 = a0^H W a0, q01 = a0^H W a1,
// q11 = a1^H W a1.
inline GammaEstimate gamma_from_forms(double q00, cdouble q01, double q11, double a1_energy,
                                      const MethodSpec &spec) {
    GammaEstimate est;
    if (q11 <= 1e-12 * std::max(a1_energy, 1e-30)) {
        est.unidentifiable = true;
        return est;
    }
    if (spec.legacy_gamma_formula) {
        // Historical variant of the estimator; it does not minimize
        // q and is kept only to allow side-by-side comparisons.
        est.value = (q00 > 0.0) ? cdouble{std::real(q01) / q00, 0.0} : cdouble{0.0, 0.0};
        return est;
    }
    if (spec.gamma_mode == GammaMode::Real) {
        double g = -std::real(q01) / q11;
        if (spec.clamp_gamma)
            g = std::clamp(g, -1.0, 1.0);
        est.value = {g, 0.0};
    } else {
        cdouble g = -std::conj(q01) / q11;
        const double mag = std::abs(g);
        if (spec.clamp_gamma && mag > 1.0)
            g /= mag; // radial projection onto the unit disc
        est.value = g;
    }
    return est;
}

} // namespace detail

// Close the nuisance variable: the gamma minimizing
// (a0 + gamma a1)^H W (a0 + gamma a1).
inline GammaEstimate gamma_hat(const Eigen::VectorXcd &a0, const Eigen::VectorXcd &a1, const NoiseProjector &proj,
                               const MethodSpec &spec) {
    const Eigen::VectorXcd wa0 = proj.w * a0;
    const Eigen::VectorXcd wa1 = proj.w * a1;
    const double q00 = std::real(a0.dot(wa0));
    const cdouble q01 = a0.dot(wa1);
    const double q11 = std::real(a1.dot(wa1));
    return detail::gamma_from_forms(q00, q01, q11, std::real(a1.dot(a1)), spec);
}

inline GammaEstimate gamma_hat(const Eigen::VectorXcd &a0, const Eigen::VectorXcd &a1, const NoiseProjector &proj,
                               GammaMode mode) {
    MethodSpec spec = MethodSpec::music_est(mode);
    return gamma_hat(a0, a1, proj, spec);
}

inline constexpr double kDenominatorFloor = 1e-300;

// Generalized MUSIC value at a single point.
inline double music_value(Point u, const ChannelDatabase &db, const NoiseProjector &proj, double wavelength,
                          const MethodSpec &spec, cdouble *gamma_out = nullptr) {
    const StackedSteering s = stacked_steering(db, u, wavelength);
    const Eigen::VectorXcd wa0 = proj.w * s.a0;
    const Eigen::VectorXcd wa1 = proj.w * s.a1;
    const double q00 = std::real(s.a0.dot(wa0));
    const cdouble q01 = s.a0.dot(wa1);
    const double q11 = std::real(s.a1.dot(wa1));

    cdouble gamma = spec.known_gamma;
    if (spec.kind != MethodKind::MusicKnown)
        gamma = detail::gamma_from_forms(q00, q01, q11, std::real(s.a1.dot(s.a1)), spec).value;
    if (gamma_out)
        *gamma_out = gamma;

    const Eigen::VectorXcd abar = s.a0 + gamma * s.a1;
    const double numer = std::real(abar.dot(abar));
    const double denom = q00 + 2.0 * std::real(gamma * q01) + std::norm(gamma) * q11;
    return numer / std::max(denom, kDenominatorFloor);
}

// MVDR power spectrum; uses only the direct-path steering vectors.
inline double mvdr_value(Point u, const ChannelDatabase &db, const Eigen::MatrixXcd &covariance_inverse,
                         double wavelength) {
    const Eigen::VectorXcd a0 = direct_steering(db, u, wavelength);
    const double denom = std::real(a0.dot(covariance_inverse * a0));
    return 1.0 / std::max(denom, kDenominatorFloor);
}

// Matched-filter spectrum; uses only the direct-path steering vectors.
inline double mf_value(Point u, const ChannelDatabase &db, const Eigen::MatrixXcd &covariance, double wavelength) {
    const Eigen::VectorXcd a0 = direct_steering(db, u, wavelength);
    return std::real(a0.dot(covariance * a0));
}

// Rectangular search grid, both endpoints included. Node (ix, iy) sits at
// (x0 + ix*dx, y0 + iy*dy); linear indices are row-major in y.
struct GridSpec {
    double x0 = 0, y0 = 0;
    double dx = 0.1, dy = 0.1;
    int nx = 1, ny = 1;

    static GridSpec cover(const BoundingBox &bb, double spacing) {
        if (!(spacing > 0.0))
            throw ConfigError("grid spacing must be positive");
        GridSpec g;
        g.x0 = bb.x_min;
        g.y0 = bb.y_min;
        g.dx = g.dy = spacing;
        g.nx = static_cast<int>(std::floor((bb.x_max - bb.x_min) / spacing + 1e-9)) + 1;
        g.ny = static_cast<int>(std::floor((bb.y_max - bb.y_min) / spacing + 1e-9)) + 1;
        return g;
    }

    Point node(int ix, int iy) const { return {x0 + ix * dx, y0 + iy * dy}; }
    std::size_t linear(int ix, int iy) const { return static_cast<std::size_t>(iy) * nx + ix; }
    std::size_t size() const { return static_cast<std::size_t>(nx) * ny; }
    Point node_of(std::size_t idx) const {
        return node(static_cast<int>(idx % nx), static_cast<int>(idx / nx));
    }
};

struct SpectrumGrid {
    GridSpec grid;
    MethodSpec method;
    std::vector<double> values;     // grid.size(), row-major
    std::vector<cdouble> gamma_map; // filled for MusicEst, else empty

    double value_at(int ix, int iy) const { return values[grid.linear(ix, iy)]; }

    // Ties resolve to the smallest linear index.
    std::size_t argmax() const {
        std::size_t best = 0;
        for (std::size_t i = 1; i < values.size(); ++i)
            if (values[i] > values[best])
                best = i;
        return best;
    }
};

struct SpectrumInputs {
    const NoiseProjector *projector = nullptr;          // MUSIC variants
    const Eigen::MatrixXcd *covariance = nullptr;       // MF
    const Eigen::MatrixXcd *covariance_inverse = nullptr; // MVDR
};

namespace detail {

// Per-thread evaluator with flattened antenna coordinates and preallocated
// workspaces; grid loops stay allocation free.
class PointEvaluator {
  public:
    PointEvaluator(const MethodSpec &spec, const ChannelDatabase &db, double wavelength,
                   const SpectrumInputs &in)
        : spec_(spec), in_(in), wavenumber_(2.0 * kPi / wavelength) {
        if (!(wavelength > 0.0))
            throw ConfigError("wavelength must be positive");
        const bool music = spec.kind == MethodKind::MusicEst || spec.kind == MethodKind::MusicKnown;
        if (music && !in.projector)
            throw ConfigError("MUSIC spectrum needs a noise projector");
        if (spec.kind == MethodKind::Mvdr && !in.covariance_inverse)
            throw ConfigError("MVDR spectrum needs an inverted covariance");
        if (spec.kind == MethodKind::Mf && !in.covariance)
            throw ConfigError("MF spectrum needs a covariance");

        for (const auto &ap : db.aps) {
            const auto &direct = ap.receivers.front().array;
            for (std::size_t k = 0; k < direct.size(); ++k) {
                direct_.push_back(direct.antennas[k]);
                std::vector<Point> m;
                for (std::size_t l = 1; l < ap.receivers.size(); ++l)
                    m.push_back(ap.receivers[l].array.antennas[k]);
                mirrors_.push_back(std::move(m));
            }
        }
        const Eigen::Index n = static_cast<Eigen::Index>(direct_.size());
        a0_.resize(n);
        a1_.resize(n);
        wa0_.resize(n);
        wa1_.resize(n);
    }

    double operator()(Point u, cdouble *gamma_out = nullptr) {
        fill_direct(u);
        switch (spec_.kind) {
        case MethodKind::Mvdr: {
            wa0_.noalias() = (*in_.covariance_inverse) * a0_;
            const double denom = std::real(a0_.dot(wa0_));
            return 1.0 / std::max(denom, kDenominatorFloor);
        }
        case MethodKind::Mf: {
            wa0_.noalias() = (*in_.covariance) * a0_;
            return std::real(a0_.dot(wa0_));
        }
        default:
            break;
        }

        fill_mirror_sum(u);
        const Eigen::MatrixXcd &w = in_.projector->w;
        wa0_.noalias() = w * a0_;
        wa1_.noalias() = w * a1_;
        const double q00 = std::real(a0_.dot(wa0_));
        const cdouble q01 = a0_.dot(wa1_);
        const double q11 = std::real(a1_.dot(wa1_));

        cdouble gamma = spec_.known_gamma;
        if (spec_.kind == MethodKind::MusicEst)
            gamma = gamma_from_forms(q00, q01, q11, std::real(a1_.dot(a1_)), spec_).value;
        if (gamma_out)
            *gamma_out = gamma;

        const double numer = std::real(a0_.dot(a0_)) + 2.0 * std::real(gamma * a0_.dot(a1_)) +
                             std::norm(gamma) * std::real(a1_.dot(a1_));
        const double denom = q00 + 2.0 * std::real(gamma * q01) + std::norm(gamma) * q11;
        return numer / std::max(denom, kDenominatorFloor);
    }

  private:
    void fill_direct(Point u) {
        for (std::size_t i = 0; i < direct_.size(); ++i) {
            const double d = distance(direct_[i], u);
            if (d < kCoincidentTol)
                throw GeometryError("grid node coincides with an antenna");
            a0_(static_cast<Eigen::Index>(i)) = std::polar(1.0, wavenumber_ * d);
        }
    }

    void fill_mirror_sum(Point u) {
        for (std::size_t i = 0; i < mirrors_.size(); ++i) {
            cdouble acc{0.0, 0.0};
            for (const Point &p : mirrors_[i]) {
                const double d = distance(p, u);
                if (d < kCoincidentTol)
                    throw GeometryError("grid node coincides with an antenna");
                acc += std::polar(1.0, wavenumber_ * d);
            }
            a1_(static_cast<Eigen::Index>(i)) = acc;
        }
    }

    MethodSpec spec_;
    SpectrumInputs in_;
    double wavenumber_;
    std::vector<Point> direct_;
    std::vector<std::vector<Point>> mirrors_;
    Eigen::VectorXcd a0_, a1_, wa0_, wa1_;
};

} // namespace detail

// Evaluate the chosen spectrum at every grid node. Nodes are independent, so
// the result does not depend on the thread count.
inline SpectrumGrid compute_spectrum(const MethodSpec &spec, const ChannelDatabase &db, double wavelength,
                                     const GridSpec &grid, const SpectrumInputs &inputs, int threads = 1) {
    SpectrumGrid out;
    out.grid = grid;
    out.method = spec;
    out.values.assign(grid.size(), 0.0);
    const bool record_gamma = spec.kind == MethodKind::MusicEst;
    if (record_gamma)
        out.gamma_map.assign(grid.size(), cdouble{0.0, 0.0});

    const int n_threads = std::max(1, std::min(threads, grid.ny));
    std::atomic<int> next_row{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;

    auto worker = [&]() {
        try {
            detail::PointEvaluator eval(spec, db, wavelength, inputs);
            for (;;) {
                const int iy = next_row.fetch_add(1);
                if (iy >= grid.ny)
                    break;
                for (int ix = 0; ix < grid.nx; ++ix) {
                    const std::size_t idx = grid.linear(ix, iy);
                    cdouble g;
                    out.values[idx] = eval(grid.node(ix, iy), record_gamma ? &g : nullptr);
                    if (record_gamma)
                        out.gamma_map[idx] = g;
                }
            }
        } catch (...) {
            std::scoped_lock lock(error_mutex);
            if (!first_error)
                first_error = std::current_exception();
        }
    };

    if (n_threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(n_threads);
        for (int t = 0; t < n_threads; ++t)
            pool.emplace_back(worker);
        for (auto &t : pool)
            t.join();
    }
    if (first_error)
        std::rethrow_exception(first_error);
    return out;
}

} // namespace mirrorsink

#endif
