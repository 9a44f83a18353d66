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
// Command line front end. Exit codes: 0 success, 2 configuration error,
// 3 numerical failure.

#include <CLI11.hpp>
#include <filesystem>
#include <iostream>

#include "mirrorsink/io.hpp"
#include "mirrorsink/sweep.hpp"
#include "mirrorsink/version.hpp"

namespace ms = mirrorsink;

namespace {

struct MethodArgs {
    std::string method = "music";
    double gamma_db = -7.0;
    double gamma_phase_deg = 180.0;
    std::string gamma_mode = "real";
};

ms::MethodSpec resolve_method(const MethodArgs &args) {
    const ms::GammaMode mode =
        args.gamma_mode == "complex" ? ms::GammaMode::Complex : ms::GammaMode::Real;
    if (args.method == "music")
        return ms::MethodSpec::music_est(mode);
    if (args.method == "music-known")
        return ms::MethodSpec::music_known(
            std::polar(ms::db_to_amplitude(args.gamma_db), args.gamma_phase_deg * ms::kPi / 180.0));
    if (args.method == "mvdr")
        return ms::MethodSpec::mvdr();
    if (args.method == "mf")
        return ms::MethodSpec::mf();
    throw ms::ConfigError("unknown method '" + args.method + "' (music|music-known|mvdr|mf)");
}

// Shared by `spectrum` and `locate`: load inputs, build the per-method
// subspace quantities, evaluate the grid.
ms::SpectrumGrid evaluate_grid(const std::string &db_path, const std::string &snapshots_path,
                               const MethodArgs &margs, double grid_spacing, int threads,
                               const std::string &dump_eigen_path, int k_override,
                               ms::ChannelDatabase &db_out, int &k_out) {
    db_out = ms::load_database(db_path);
    const ms::SnapshotMatrix snap = ms::load_snapshots(snapshots_path);
    if (snap.data.rows() != static_cast<Eigen::Index>(db_out.total_antennas()))
        throw ms::ConfigError("snapshot row count does not match database antenna count");

    const ms::MethodSpec spec = resolve_method(margs);
    const Eigen::MatrixXcd covariance = ms::sample_covariance(snap.data);
    if (!dump_eigen_path.empty())
        ms::save_eigenvalues_csv(covariance, dump_eigen_path);

    k_out = k_override > 0 ? k_override : static_cast<int>(snap.config.users.size());
    if (k_out < 1)
        throw ms::ConfigError("number of users unknown; pass --k");

    ms::NoiseProjector projector;
    Eigen::MatrixXcd cov_inverse;
    ms::SpectrumInputs inputs;
    switch (spec.kind) {
    case ms::MethodKind::MusicEst:
    case ms::MethodKind::MusicKnown:
        projector = ms::noise_projector(covariance, k_out);
        inputs.projector = &projector;
        break;
    case ms::MethodKind::Mvdr:
        if (covariance.rows() > snap.data.cols()) {
            cov_inverse = ms::regularized_inverse(covariance, ms::default_regularization(covariance));
        } else {
            try {
                cov_inverse = ms::regularized_inverse(covariance, 0.0);
            } catch (const ms::NumericalError &) {
                cov_inverse = ms::regularized_inverse(covariance, ms::default_regularization(covariance));
            }
        }
        inputs.covariance_inverse = &cov_inverse;
        break;
    case ms::MethodKind::Mf:
        inputs.covariance = &covariance;
        break;
    }

    const ms::GridSpec grid = ms::GridSpec::cover(ms::bounding_box(db_out.room), grid_spacing);
    return ms::compute_spectrum(spec, db_out, snap.config.wavelength, grid, inputs, threads);
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"mirrorsink: direct position determination in a known room"};
    app.set_version_flag("--version", ms::kVersion);
    app.require_subcommand(1);

    // build-db
    auto *cmd_db = app.add_subcommand("build-db", "build the channel database from a scene file");
    std::string scene_path, db_out_path;
    cmd_db->add_option("--scene", scene_path, "scene JSON file")->required();
    cmd_db->add_option("--out", db_out_path, "output database file")->required();

    // synth
    auto *cmd_synth = app.add_subcommand("synth", "synthesize received snapshots");
    std::string synth_db, synth_cfg, synth_out;
    cmd_synth->add_option("--db", synth_db, "database file")->required();
    cmd_synth->add_option("--config", synth_cfg, "run config JSON")->required();
    cmd_synth->add_option("--out", synth_out, "output snapshot file")->required();

    // spectrum
    auto *cmd_spec = app.add_subcommand("spectrum", "evaluate a spatial spectrum on the room grid");
    std::string spec_db, spec_snap, spec_out, spec_svg, spec_dump_eigen;
    MethodArgs spec_margs;
    double spec_spacing = 0.1;
    int spec_threads = 1;
    cmd_spec->add_option("--method", spec_margs.method, "music|music-known|mvdr|mf")->required();
    cmd_spec->add_option("--db", spec_db, "database file")->required();
    cmd_spec->add_option("--snapshots", spec_snap, "snapshot file")->required();
    cmd_spec->add_option("--gamma-db", spec_margs.gamma_db, "known gamma amplitude [dB] (music-known)");
    cmd_spec->add_option("--gamma-phase-deg", spec_margs.gamma_phase_deg, "known gamma phase [deg]");
    cmd_spec->add_option("--gamma-mode", spec_margs.gamma_mode, "real|complex nuisance estimate");
    cmd_spec->add_option("--grid-spacing", spec_spacing, "grid spacing [m]")->default_val(0.1);
    cmd_spec->add_option("--threads", spec_threads, "worker threads")->default_val(1);
    cmd_spec->add_option("--out", spec_out, "output CSV")->required();
    cmd_spec->add_option("--svg", spec_svg, "optional heatmap SVG");
    cmd_spec->add_option("--dump-eigen", spec_dump_eigen, "dump covariance eigenvalues to CSV");

    // locate
    auto *cmd_loc = app.add_subcommand("locate", "estimate user positions from snapshots");
    std::string loc_db, loc_snap, loc_out, loc_peaks = "topk", loc_dump_eigen;
    MethodArgs loc_margs;
    double loc_spacing = 0.1, loc_min_sep = 1.0;
    int loc_k = 0, loc_threads = 1;
    cmd_loc->add_option("--method", loc_margs.method, "music|music-known|mvdr|mf")->required();
    cmd_loc->add_option("--db", loc_db, "database file")->required();
    cmd_loc->add_option("--snapshots", loc_snap, "snapshot file")->required();
    cmd_loc->add_option("--k", loc_k, "number of users (default: from snapshot header)");
    cmd_loc->add_option("--peaks", loc_peaks, "topk|local peak extraction")->default_val("topk");
    cmd_loc->add_option("--min-sep", loc_min_sep, "minimum peak separation [m] (local mode)");
    cmd_loc->add_option("--gamma-db", loc_margs.gamma_db, "known gamma amplitude [dB] (music-known)");
    cmd_loc->add_option("--gamma-phase-deg", loc_margs.gamma_phase_deg, "known gamma phase [deg]");
    cmd_loc->add_option("--gamma-mode", loc_margs.gamma_mode, "real|complex nuisance estimate");
    cmd_loc->add_option("--grid-spacing", loc_spacing, "grid spacing [m]")->default_val(0.1);
    cmd_loc->add_option("--threads", loc_threads, "worker threads")->default_val(1);
    cmd_loc->add_option("--out", loc_out, "output JSON (default: stdout)");
    cmd_loc->add_option("--dump-eigen", loc_dump_eigen, "dump covariance eigenvalues to CSV");

    // sweep
    auto *cmd_sweep = app.add_subcommand("sweep", "Monte Carlo RMSE sweep over gamma");
    std::string sweep_cfg_path, sweep_out_dir;
    int sweep_threads = 0;
    bool ci_preset = false;
    cmd_sweep->add_option("--config", sweep_cfg_path, "sweep config JSON")->required();
    cmd_sweep->add_option("--out-dir", sweep_out_dir, "output directory")->required();
    cmd_sweep->add_option("--threads", sweep_threads, "worker threads (0 = hardware)");
    cmd_sweep->add_flag("--ci-preset", ci_preset, "coarse preset: 0.5 m grid, 25 trials");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        if (e.get_exit_code() == 0)
            return app.exit(e); // --help / --version
        app.exit(e);
        return 2;
    }

    try {
        if (cmd_db->parsed()) {
            const ms::SceneSpec scene = ms::load_scene(scene_path);
            const ms::ChannelDatabase db = ms::build_scene_database(scene);
            ms::save_database(db, db_out_path);
            std::cout << "wrote " << db_out_path << " (" << db.num_aps() << " APs, " << db.paths_per_ap
                      << " paths per AP, " << db.total_antennas() << " antennas)\n";
        } else if (cmd_synth->parsed()) {
            const ms::ChannelDatabase db = ms::load_database(synth_db);
            std::uint64_t digest = 0;
            const ms::SceneConfig cfg = ms::load_run_config(synth_cfg, &digest);
            const ms::SnapshotMatrix snap = ms::synthesize_snapshots(db, cfg);
            ms::save_snapshots(snap, synth_out, digest);
            std::cout << "wrote " << synth_out << " (" << snap.data.rows() << "x" << snap.data.cols()
                      << " snapshots, seed " << cfg.seed << ")\n";
        } else if (cmd_spec->parsed()) {
            ms::ChannelDatabase db;
            int k = 0;
            const ms::SpectrumGrid grid = evaluate_grid(spec_db, spec_snap, spec_margs, spec_spacing,
                                                        spec_threads, spec_dump_eigen, 0, db, k);
            ms::save_spectrum_csv(grid, spec_out);
            if (!spec_svg.empty())
                ms::save_spectrum_svg(grid, spec_svg);
            const std::size_t am = grid.argmax();
            const ms::Point p = grid.grid.node_of(am);
            std::cout << "wrote " << spec_out << "; argmax at (" << p.x << ", " << p.y << ")\n";
        } else if (cmd_loc->parsed()) {
            ms::ChannelDatabase db;
            int k = 0;
            const ms::SpectrumGrid grid = evaluate_grid(loc_db, loc_snap, loc_margs, loc_spacing,
                                                        loc_threads, loc_dump_eigen, loc_k, db, k);
            const ms::PeakMode mode = loc_peaks == "local" ? ms::PeakMode::LocalMaxima : ms::PeakMode::TopK;
            const ms::LocationEstimate est = ms::pick_peaks(grid, k, mode, loc_min_sep);
            const ms::json doc = ms::location_to_json(est, grid);
            if (loc_out.empty())
                std::cout << doc.dump(2) << "\n";
            else
                ms::detail::write_text_file(loc_out, doc.dump(2) + "\n");
        } else if (cmd_sweep->parsed()) {
            std::uint64_t digest = 0;
            ms::SweepConfig cfg = ms::load_sweep_config(sweep_cfg_path, &digest);
            if (ci_preset) {
                cfg.grid_spacing = 0.5;
                cfg.trials = 25;
            }
            cfg.threads = sweep_threads > 0 ? sweep_threads
                                            : static_cast<int>(std::thread::hardware_concurrency());
            std::filesystem::create_directories(sweep_out_dir);
            const ms::SweepResult result = ms::sweep(cfg, digest);
            const std::string csv = sweep_out_dir + "/sweep.csv";
            const std::string svg = sweep_out_dir + "/sweep.svg";
            ms::emit_outputs(result, csv, svg);
            ms::json prov = {{"config_digest", result.config_digest},
                             {"seed", result.base_seed},
                             {"code_version", result.code_version}};
            ms::detail::write_text_file(sweep_out_dir + "/provenance.json", prov.dump(2) + "\n");
            std::cout << "wrote " << csv << " (" << result.rows.size() << " rows)\n";
        }
    } catch (const ms::NumericalError &e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
