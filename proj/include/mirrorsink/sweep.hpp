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
// Monte Carlo experiment driver: RMSE of each localization method versus
// the wall reflection coefficient. Every trial draws user positions from
// the search grid, synthesizes one data set, and runs all configured
// methods on that same data.

#ifndef MIRRORSINK_SWEEP_HPP
#define MIRRORSINK_SWEEP_HPP

#include <map>
#include <optional>

#include "mirrorsink/io.hpp"
#include "mirrorsink/locator.hpp"
#include "mirrorsink/signal.hpp"
#include "mirrorsink/version.hpp"

namespace mirrorsink {

struct SweepConfig {
    RectRoom room{0, 0, 20, 30};
    std::vector<ApSpec> aps;
    double wavelength = 0.125;
    double snr_db = 20.0;
    int snapshots = 128;
    bool ideal_covariance = false; // use the asymptotic covariance instead of synthesis
    int num_users = 2;
    std::vector<double> gamma_db_list;
    double gamma_phase_deg = 180.0;
    int trials = 100;
    double grid_spacing = 0.1;
    double user_margin = 1.0; // keep drawn users this far from the walls
    std::vector<Point> fixed_users; // non-empty: skip random placement
    std::uint64_t base_seed = 1;
    std::vector<MethodKind> methods{MethodKind::MusicEst, MethodKind::MusicKnown, MethodKind::Mvdr,
                                    MethodKind::Mf};
    GammaMode gamma_mode = GammaMode::Real;
    PeakMode peaks = PeakMode::TopK;
    double peak_min_sep = 1.0;               // LocalMaxima only
    std::optional<double> error_cap;         // default: room diagonal
    int threads = 1;
    int bootstrap_resamples = 1000;
};

inline void validate_sweep_config(const SweepConfig &cfg) {
    if (cfg.aps.empty())
        throw ConfigError("sweep needs at least one AP");
    if (cfg.gamma_db_list.empty())
        throw ConfigError("sweep needs a non-empty gamma list");
    if (cfg.trials < 1)
        throw ConfigError("sweep needs at least one trial");
    if (cfg.num_users < 1)
        throw ConfigError("sweep needs at least one user");
    if (!(cfg.grid_spacing > 0.0))
        throw ConfigError("grid spacing must be positive");
    if (cfg.methods.empty())
        throw ConfigError("sweep needs at least one method");
    if (!cfg.fixed_users.empty() && static_cast<int>(cfg.fixed_users.size()) != cfg.num_users)
        throw ConfigError("fixed user list does not match num_users");
}

struct SweepRow {
    std::string method;
    double gamma_db = 0;
    int n_antennas = 0; // per AP (first AP)
    int n_aps = 0;
    int snapshots = 0; // 0 when the ideal covariance is used
    int trials = 0;
    double rmse_m = 0;
    double ci95_lo_m = 0;
    double ci95_hi_m = 0;
    std::uint64_t seed = 0;
};

struct SweepResult {
    std::vector<SweepRow> rows; // method-major, gamma order as configured
    std::uint64_t config_digest = 0;
    std::uint64_t base_seed = 0;
    std::string code_version;
    // per (method, gamma): trial-level mean squared errors, kept for analysis
    std::map<std::pair<std::string, double>, std::vector<double>> trial_mse;
};

namespace detail {

inline MethodSpec make_method_spec(MethodKind kind, const SweepConfig &cfg, cdouble gamma_true) {
    switch (kind) {
    case MethodKind::MusicEst:
        return MethodSpec::music_est(cfg.gamma_mode);
    case MethodKind::MusicKnown:
        return MethodSpec::music_known(gamma_true);
    case MethodKind::Mvdr:
        return MethodSpec::mvdr();
    case MethodKind::Mf:
        return MethodSpec::mf();
    }
    throw ConfigError("unknown method");
}

// Grid nodes at least `margin` away from every wall.
inline std::vector<std::size_t> placement_nodes(const GridSpec &grid, const std::vector<Wall> &walls,
                                                double margin) {
    std::vector<std::size_t> nodes;
    for (int iy = 0; iy < grid.ny; ++iy)
        for (int ix = 0; ix < grid.nx; ++ix) {
            const Point p = grid.node(ix, iy);
            bool ok = true;
            for (const Wall &w : walls)
                if (point_segment_distance(p, w.a, w.b) < margin) {
                    ok = false;
                    break;
                }
            if (ok)
                nodes.push_back(grid.linear(ix, iy));
        }
    return nodes;
}

inline std::vector<Point> draw_users(const GridSpec &grid, const std::vector<std::size_t> &candidates,
                                     int k, RandomStream &rng) {
    if (candidates.size() < static_cast<std::size_t>(k))
        throw ConfigError("not enough interior grid nodes to place users");
    std::vector<std::size_t> picked;
    while (static_cast<int>(picked.size()) < k) {
        const std::size_t node = candidates[rng.uniform_index(candidates.size())];
        if (std::find(picked.begin(), picked.end(), node) == picked.end())
            picked.push_back(node);
    }
    std::vector<Point> users;
    for (std::size_t n : picked)
        users.push_back(grid.node_of(n));
    return users;
}

} // namespace detail

// One Monte Carlo trial: fixed or uniformly drawn users, one synthesized
// data set, all methods evaluated on it. Fully determined by
// (base_seed, trial_index).
inline std::map<MethodKind, ErrorReport> run_trial(const ChannelDatabase &db, const SweepConfig &cfg,
                                                   double gamma_db, int trial_index,
                                                   int grid_threads = 1) {
    const BoundingBox bb = bounding_box(db.room);
    const GridSpec grid = GridSpec::cover(bb, cfg.grid_spacing);
    RandomStream rng(derive_seed(cfg.base_seed, static_cast<std::uint64_t>(trial_index)));

    std::vector<Point> users = cfg.fixed_users;
    if (users.empty()) {
        const auto candidates = detail::placement_nodes(grid, db.room, cfg.user_margin);
        users = detail::draw_users(grid, candidates, cfg.num_users, rng);
    }

    SceneConfig scene;
    scene.wavelength = cfg.wavelength;
    scene.gamma = std::polar(db_to_amplitude(gamma_db), cfg.gamma_phase_deg * kPi / 180.0);
    scene.snr_db = cfg.snr_db;
    scene.snapshots = cfg.snapshots;
    scene.users = users;
    scene.seed = rng.next_u64();

    Eigen::MatrixXcd covariance;
    if (cfg.ideal_covariance)
        covariance = ideal_covariance(db, scene);
    else
        covariance = sample_covariance(synthesize_snapshots(db, scene).data);

    const double cap = cfg.error_cap.value_or(bb.diagonal());

    std::optional<NoiseProjector> projector;
    std::optional<Eigen::MatrixXcd> cov_inverse;
    std::map<MethodKind, ErrorReport> out;
    for (MethodKind kind : cfg.methods) {
        const MethodSpec spec = detail::make_method_spec(kind, cfg, scene.gamma);
        SpectrumInputs inputs;
        if (kind == MethodKind::MusicEst || kind == MethodKind::MusicKnown) {
            if (!projector)
                projector = noise_projector(covariance, cfg.num_users);
            inputs.projector = &*projector;
        } else if (kind == MethodKind::Mvdr) {
            if (!cov_inverse) {
                if (covariance.rows() > cfg.snapshots && !cfg.ideal_covariance) {
                    cov_inverse = regularized_inverse(covariance, default_regularization(covariance));
                } else {
                    try {
                        cov_inverse = regularized_inverse(covariance, 0.0);
                    } catch (const NumericalError &) {
                        cov_inverse = regularized_inverse(covariance, default_regularization(covariance));
                    }
                }
            }
            inputs.covariance_inverse = &*cov_inverse;
        } else {
            inputs.covariance = &covariance;
        }
        const SpectrumGrid s = compute_spectrum(spec, db, cfg.wavelength, grid, inputs, grid_threads);
        const LocationEstimate est = pick_peaks(s, cfg.num_users, cfg.peaks, cfg.peak_min_sep);
        out.emplace(kind, match_and_error(est.positions, users, cap));
    }
    return out;
}

// Full sweep: every gamma x trial, trial-parallel, deterministic aggregation
// in configured order, bootstrap confidence intervals over trials.
inline SweepResult sweep(const SweepConfig &cfg, std::uint64_t config_digest = 0) {
    validate_sweep_config(cfg);
    const SceneSpec scene{cfg.room, cfg.aps, cfg.wavelength};
    const ChannelDatabase db = build_scene_database(scene);

    const std::size_t n_gammas = cfg.gamma_db_list.size();
    const std::size_t n_jobs = n_gammas * static_cast<std::size_t>(cfg.trials);
    // slot[g * trials + t][method] = per-trial mean squared error
    std::vector<std::map<MethodKind, double>> slots(n_jobs);

    std::atomic<std::size_t> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    auto worker = [&]() {
        try {
            for (;;) {
                const std::size_t job = next.fetch_add(1);
                if (job >= n_jobs)
                    break;
                const std::size_t g = job / cfg.trials;
                const int t = static_cast<int>(job % cfg.trials);
                auto reports = run_trial(db, cfg, cfg.gamma_db_list[g], t);
                for (const auto &[kind, rep] : reports) {
                    double mse = 0;
                    for (double e : rep.per_user_error)
                        mse += e * e;
                    slots[job][kind] = mse / static_cast<double>(rep.per_user_error.size());
                }
            }
        } catch (...) {
            std::scoped_lock lock(error_mutex);
            if (!first_error)
                first_error = std::current_exception();
        }
    };

    const int n_threads = std::max(1, std::min<int>(cfg.threads, static_cast<int>(n_jobs)));
    if (n_threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int i = 0; i < n_threads; ++i)
            pool.emplace_back(worker);
        for (auto &th : pool)
            th.join();
    }
    if (first_error)
        std::rethrow_exception(first_error);

    // shared bootstrap resample matrix, deterministic from the base seed
    RandomStream boot_rng(derive_seed(cfg.base_seed, 0xB007ULL));
    std::vector<std::size_t> resamples(static_cast<std::size_t>(cfg.bootstrap_resamples) * cfg.trials);
    for (auto &r : resamples)
        r = boot_rng.uniform_index(static_cast<std::uint64_t>(cfg.trials));

    SweepResult result;
    result.config_digest = config_digest;
    result.base_seed = cfg.base_seed;
    result.code_version = kVersion;
    const int n_aps = static_cast<int>(cfg.aps.size());
    const int n_ant = cfg.aps.front().antennas;

    for (MethodKind kind : cfg.methods) {
        const std::string name = detail::make_method_spec(kind, cfg, {0, 0}).name();
        for (std::size_t g = 0; g < n_gammas; ++g) {
            std::vector<double> mse(cfg.trials);
            for (int t = 0; t < cfg.trials; ++t)
                mse[t] = slots[g * cfg.trials + t].at(kind);

            const auto mean = [](const std::vector<double> &v) {
                double s = 0;
                for (double x : v)
                    s += x;
                return s / static_cast<double>(v.size());
            };

            SweepRow row;
            row.method = name;
            row.gamma_db = cfg.gamma_db_list[g];
            row.n_antennas = n_ant;
            row.n_aps = n_aps;
            row.snapshots = cfg.ideal_covariance ? 0 : cfg.snapshots;
            row.trials = cfg.trials;
            row.seed = cfg.base_seed;
            row.rmse_m = std::sqrt(mean(mse));

            std::vector<double> boot(cfg.bootstrap_resamples);
            for (int b = 0; b < cfg.bootstrap_resamples; ++b) {
                double s = 0;
                for (int t = 0; t < cfg.trials; ++t)
                    s += mse[resamples[static_cast<std::size_t>(b) * cfg.trials + t]];
                boot[b] = std::sqrt(s / cfg.trials);
            }
            std::sort(boot.begin(), boot.end());
            row.ci95_lo_m = boot[static_cast<std::size_t>(0.025 * (cfg.bootstrap_resamples - 1))];
            row.ci95_hi_m = boot[static_cast<std::size_t>(0.975 * (cfg.bootstrap_resamples - 1))];

            result.trial_mse[{name, row.gamma_db}] = std::move(mse);
            result.rows.push_back(std::move(row));
        }
    }
    return result;
}

// ------------------------------------------------------------- emission ---

inline std::string sweep_to_csv(const SweepResult &result) {
    std::ostringstream out;
    out << "method,gamma_db,n_antennas,n_aps,snapshots,trials,rmse_m,ci95_lo_m,ci95_hi_m,seed\n";
    for (const SweepRow &r : result.rows)
        out << r.method << ',' << detail::format_double(r.gamma_db) << ',' << r.n_antennas << ',' << r.n_aps
            << ',' << r.snapshots << ',' << r.trials << ',' << detail::format_double(r.rmse_m) << ','
            << detail::format_double(r.ci95_lo_m) << ',' << detail::format_double(r.ci95_hi_m) << ','
            << r.seed << '\n';
    return out.str();
}

// Log-scale RMSE-vs-gamma line chart, one polyline per method.
inline std::string sweep_to_svg(const SweepResult &result) {
    static const char *colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};
    const double width = 640, height = 440, ml = 70, mr = 20, mt = 30, mb = 50;
    double x_lo = 0, x_hi = 0, y_lo = 0, y_hi = 0;
    bool first = true;
    for (const SweepRow &r : result.rows) {
        const double ly = std::log10(std::max(r.rmse_m, 1e-4));
        if (first) {
            x_lo = x_hi = r.gamma_db;
            y_lo = y_hi = ly;
            first = false;
        }
        x_lo = std::min(x_lo, r.gamma_db);
        x_hi = std::max(x_hi, r.gamma_db);
        y_lo = std::min(y_lo, ly);
        y_hi = std::max(y_hi, ly);
    }
    if (first)
        return "<svg xmlns=\"http://www.w3.org/2000/svg\"/>\n";
    if (x_hi == x_lo)
        x_hi = x_lo + 1;
    y_lo = std::floor(y_lo);
    y_hi = std::ceil(std::max(y_hi, y_lo + 1));
    const auto px = [&](double g) { return ml + (g - x_lo) / (x_hi - x_lo) * (width - ml - mr); };
    const auto py = [&](double ly) { return height - mb - (ly - y_lo) / (y_hi - y_lo) * (height - mt - mb); };

    std::ostringstream out;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
        << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    for (double ly = y_lo; ly <= y_hi + 1e-9; ly += 1.0) {
        out << "<line x1=\"" << ml << "\" y1=\"" << py(ly) << "\" x2=\"" << width - mr << "\" y2=\"" << py(ly)
            << "\" stroke=\"#ddd\"/>\n";
        out << "<text x=\"" << ml - 8 << "\" y=\"" << py(ly) + 4 << "\" text-anchor=\"end\">1e"
            << static_cast<int>(ly) << "</text>\n";
    }
    std::map<std::string, std::vector<const SweepRow *>> series;
    for (const SweepRow &r : result.rows)
        series[r.method].push_back(&r);
    int ci = 0;
    double legend_y = mt;
    for (auto &[name, rows] : series) {
        std::sort(rows.begin(), rows.end(),
                  [](const SweepRow *a, const SweepRow *b) { return a->gamma_db < b->gamma_db; });
        out << "<polyline fill=\"none\" stroke=\"" << colors[ci % 6] << "\" stroke-width=\"2\" points=\"";
        for (const SweepRow *r : rows)
            out << px(r->gamma_db) << ',' << py(std::log10(std::max(r->rmse_m, 1e-4))) << ' ';
        out << "\"/>\n";
        out << "<text x=\"" << width - mr - 110 << "\" y=\"" << legend_y << "\" fill=\"" << colors[ci % 6]
            << "\">" << name << "</text>\n";
        legend_y += 16;
        ++ci;
    }
    for (const SweepRow &r : result.rows) {
        out << "<circle cx=\"" << px(r.gamma_db) << "\" cy=\""
            << py(std::log10(std::max(r.rmse_m, 1e-4))) << "\" r=\"3\" fill=\"#333\"/>\n";
    }
    out << "<text x=\"" << (ml + width - mr) / 2 << "\" y=\"" << height - 12
        << "\" text-anchor=\"middle\">reflection coefficient [dB]</text>\n";
    out << "<text x=\"16\" y=\"" << (mt + height - mb) / 2
        << "\" transform=\"rotate(-90 16 " << (mt + height - mb) / 2
        << ")\" text-anchor=\"middle\">RMS location error [m]</text>\n";
    out << "</svg>\n";
    return out.str();
}

inline void emit_outputs(const SweepResult &result, const std::string &csv_path,
                         const std::string &svg_path = "") {
    detail::write_text_file(csv_path, sweep_to_csv(result));
    if (!svg_path.empty())
        detail::write_text_file(svg_path, sweep_to_svg(result));
}

// ------------------------------------------------------------- config IO ---

inline SweepConfig parse_sweep_config(const json &j) {
    try {
        SweepConfig cfg;
        const json &room = j.at("room");
        cfg.room = RectRoom{room.at("x_min").get<double>(), room.at("y_min").get<double>(),
                            room.at("x_max").get<double>(), room.at("y_max").get<double>()};
        for (const json &ap : j.at("aps")) {
            ApSpec spec;
            spec.wall = ap.at("wall").get<std::string>();
            spec.antennas = ap.at("antennas").get<int>();
            if (ap.contains("offset") && !ap["offset"].is_null())
                spec.offset = ap["offset"].get<double>();
            if (ap.contains("spacing") && !ap["spacing"].is_null())
                spec.spacing = ap["spacing"].get<double>();
            cfg.aps.push_back(spec);
        }
        cfg.wavelength = j.at("wavelength").get<double>();
        cfg.snr_db = j.at("snr_db").get<double>();
        cfg.snapshots = j.value("snapshots", 128);
        cfg.ideal_covariance = j.value("ideal_covariance", false);
        cfg.num_users = j.at("num_users").get<int>();
        for (const json &g : j.at("gamma_db"))
            cfg.gamma_db_list.push_back(g.get<double>());
        cfg.gamma_phase_deg = j.value("gamma_phase_deg", 180.0);
        cfg.trials = j.at("trials").get<int>();
        cfg.grid_spacing = j.at("grid_spacing").get<double>();
        cfg.user_margin = j.value("user_margin", 1.0);
        if (j.contains("fixed_users"))
            for (const json &u : j["fixed_users"])
                cfg.fixed_users.push_back(Point{u[0].get<double>(), u[1].get<double>()});
        cfg.base_seed = j.at("seed").get<std::uint64_t>();
        if (j.contains("methods")) {
            cfg.methods.clear();
            for (const json &m : j["methods"]) {
                const std::string name = m.get<std::string>();
                if (name == "music-est" || name == "music")
                    cfg.methods.push_back(MethodKind::MusicEst);
                else if (name == "music-known")
                    cfg.methods.push_back(MethodKind::MusicKnown);
                else if (name == "mvdr")
                    cfg.methods.push_back(MethodKind::Mvdr);
                else if (name == "mf")
                    cfg.methods.push_back(MethodKind::Mf);
                else
                    throw ConfigError("unknown method '" + name + "'");
            }
        }
        if (j.contains("gamma_mode"))
            cfg.gamma_mode = j["gamma_mode"].get<std::string>() == "complex" ? GammaMode::Complex
                                                                             : GammaMode::Real;
        if (j.contains("peaks"))
            cfg.peaks = j["peaks"].get<std::string>() == "local" ? PeakMode::LocalMaxima : PeakMode::TopK;
        cfg.peak_min_sep = j.value("peak_min_sep", 1.0);
        if (j.contains("error_cap") && !j["error_cap"].is_null())
            cfg.error_cap = j["error_cap"].get<double>();
        cfg.bootstrap_resamples = j.value("bootstrap_resamples", 1000);
        validate_sweep_config(cfg);
        return cfg;
    } catch (const json::exception &e) {
        throw ConfigError(std::string("invalid sweep config: ") + e.what());
    }
}

inline SweepConfig load_sweep_config(const std::string &path, std::uint64_t *digest_out = nullptr) {
    const json j = detail::load_json_file(path);
    if (digest_out)
        *digest_out = fnv1a64(j.dump());
    return parse_sweep_config(j);
}

} // namespace mirrorsink

#endif
