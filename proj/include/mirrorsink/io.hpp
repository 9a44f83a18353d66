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
// File formats:
//   scene file      JSON room + AP placement
//   database file   versioned JSON with full-precision antenna coordinates
//   snapshot file   binary: fixed header + interleaved re/im float64,
//                   column-major (snapshot-major), little-endian
//   spectrum file   CSV x,y,value[,gamma_hat]

#ifndef MIRRORSINK_IO_HPP
#define MIRRORSINK_IO_HPP

#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "mirrorsink/locator.hpp"
#include "mirrorsink/scene.hpp"
#include "mirrorsink/signal.hpp"
#include "mirrorsink/spectra.hpp"

namespace mirrorsink {

using json = nlohmann::json;

inline std::uint64_t fnv1a64(const std::string &data) {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001B3ULL;
    }
    return h;
}

namespace detail {

inline std::string format_double(double v, const char *fmt = "%.9g") {
    char buf[64];
    std::snprintf(buf, sizeof(buf), fmt, v);
    return buf;
}

inline json load_json_file(const std::string &path) {
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open '" + path + "'");
    json j;
    try {
        in >> j;
    } catch (const json::exception &e) {
        throw ConfigError("malformed JSON in '" + path + "': " + e.what());
    }
    return j;
}

inline void write_text_file(const std::string &path, const std::string &content) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw ConfigError("cannot write '" + path + "'");
    out << content;
    if (!out)
        throw ConfigError("write failed for '" + path + "'");
}

} // namespace detail

// ---------------------------------------------------------------- scene ---

inline SceneSpec parse_scene(const json &j) {
    try {
        SceneSpec scene;
        const json &room = j.at("room");
        scene.room = RectRoom{room.at("x_min").get<double>(), room.at("y_min").get<double>(),
                              room.at("x_max").get<double>(), room.at("y_max").get<double>()};
        if (j.contains("wavelength"))
            scene.wavelength = j["wavelength"].get<double>();
        for (const json &ap : j.at("aps")) {
            ApSpec spec;
            spec.wall = ap.at("wall").get<std::string>();
            spec.antennas = ap.at("antennas").get<int>();
            if (ap.contains("offset") && !ap["offset"].is_null())
                spec.offset = ap["offset"].get<double>();
            if (ap.contains("spacing") && !ap["spacing"].is_null())
                spec.spacing = ap["spacing"].get<double>();
            scene.aps.push_back(spec);
        }
        return scene;
    } catch (const json::exception &e) {
        throw ConfigError(std::string("invalid scene file: ") + e.what());
    }
}

inline SceneSpec load_scene(const std::string &path) { return parse_scene(detail::load_json_file(path)); }

// ------------------------------------------------------------- database ---

inline constexpr int kDatabaseFormatVersion = 1;

inline json database_to_json(const ChannelDatabase &db) {
    json j;
    j["format"] = "mirrorsink-db";
    j["version"] = kDatabaseFormatVersion;
    j["paths_per_ap"] = db.paths_per_ap;
    j["walls"] = json::array();
    for (const Wall &w : db.room)
        j["walls"].push_back({{"id", w.id}, {"a", {w.a.x, w.a.y}}, {"b", {w.b.x, w.b.y}}});
    j["aps"] = json::array();
    for (const auto &ap : db.aps) {
        json ja;
        ja["id"] = ap.ap_id;
        ja["receivers"] = json::array();
        for (const auto &vr : ap.receivers) {
            json jr;
            jr["path_index"] = vr.path_index;
            jr["source_wall"] = vr.source_wall ? json(*vr.source_wall) : json(nullptr);
            json ants = json::array();
            for (const Point &p : vr.array.antennas)
                ants.push_back({p.x, p.y});
            jr["antennas"] = std::move(ants);
            ja["receivers"].push_back(std::move(jr));
        }
        j["aps"].push_back(std::move(ja));
    }
    return j;
}

inline ChannelDatabase database_from_json(const json &j) {
    try {
        if (j.at("format").get<std::string>() != "mirrorsink-db")
            throw ConfigError("not a mirrorsink database file");
        if (j.at("version").get<int>() != kDatabaseFormatVersion)
            throw ConfigError("unsupported database version");
        ChannelDatabase db;
        db.paths_per_ap = j.at("paths_per_ap").get<int>();
        for (const json &jw : j.at("walls"))
            db.room.push_back(Wall{{jw.at("a")[0].get<double>(), jw.at("a")[1].get<double>()},
                                   {jw.at("b")[0].get<double>(), jw.at("b")[1].get<double>()},
                                   jw.at("id").get<std::string>()});
        for (const json &ja : j.at("aps")) {
            ChannelDatabase::ApEntry entry;
            entry.ap_id = ja.at("id").get<std::string>();
            for (const json &jr : ja.at("receivers")) {
                VirtualReceiver vr;
                vr.ap_id = entry.ap_id;
                vr.path_index = jr.at("path_index").get<int>();
                if (!jr.at("source_wall").is_null())
                    vr.source_wall = jr["source_wall"].get<std::string>();
                for (const json &pa : jr.at("antennas"))
                    vr.array.antennas.push_back(Point{pa[0].get<double>(), pa[1].get<double>()});
                entry.receivers.push_back(std::move(vr));
            }
            db.aps.push_back(std::move(entry));
        }
        validate_database(db);
        return db;
    } catch (const json::exception &e) {
        throw ConfigError(std::string("invalid database file: ") + e.what());
    }
}

inline void save_database(const ChannelDatabase &db, const std::string &path) {
    detail::write_text_file(path, database_to_json(db).dump(2) + "\n");
}

inline ChannelDatabase load_database(const std::string &path) {
    return database_from_json(detail::load_json_file(path));
}

// ----------------------------------------------------------- run config ---

// Synthesis run configuration. gamma is given as a dB amplitude plus a phase
// (default 180 degrees: reflection off a wall inverts the phase).
inline SceneConfig parse_run_config(const json &j) {
    try {
        SceneConfig cfg;
        cfg.wavelength = j.at("wavelength").get<double>();
        const double amp = db_to_amplitude(j.at("gamma_db").get<double>());
        const double phase_deg = j.contains("gamma_phase_deg") ? j["gamma_phase_deg"].get<double>() : 180.0;
        cfg.gamma = std::polar(amp, phase_deg * kPi / 180.0);
        cfg.snr_db = j.at("snr_db").get<double>();
        cfg.snapshots = j.at("snapshots").get<int>();
        for (const json &u : j.at("users"))
            cfg.users.push_back(Point{u[0].get<double>(), u[1].get<double>()});
        cfg.seed = j.at("seed").get<std::uint64_t>();
        validate_config(cfg);
        return cfg;
    } catch (const json::exception &e) {
        throw ConfigError(std::string("invalid run config: ") + e.what());
    }
}

inline SceneConfig load_run_config(const std::string &path, std::uint64_t *digest_out = nullptr) {
    const json j = detail::load_json_file(path);
    if (digest_out)
        *digest_out = fnv1a64(j.dump());
    return parse_run_config(j);
}

// ------------------------------------------------------------ snapshots ---

namespace detail {

inline constexpr char kSnapshotMagic[8] = {'M', 'S', 'N', 'P', 'S', 'H', '0', '1'};

template <typename T> void write_raw(std::ostream &out, const T &v) {
    out.write(reinterpret_cast<const char *>(&v), sizeof(T));
}

template <typename T> T read_raw(std::istream &in) {
    T v{};
    in.read(reinterpret_cast<char *>(&v), sizeof(T));
    return v;
}

} // namespace detail

inline void save_snapshots(const SnapshotMatrix &snap, const std::string &path, std::uint64_t config_digest = 0) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw ConfigError("cannot write '" + path + "'");
    out.write(detail::kSnapshotMagic, sizeof(detail::kSnapshotMagic));
    detail::write_raw<std::uint32_t>(out, static_cast<std::uint32_t>(snap.data.rows()));
    detail::write_raw<std::uint32_t>(out, static_cast<std::uint32_t>(snap.data.cols()));
    detail::write_raw<std::uint32_t>(out, static_cast<std::uint32_t>(snap.config.users.size()));
    detail::write_raw<std::uint32_t>(out, 0u);
    detail::write_raw<std::uint64_t>(out, snap.config.seed);
    detail::write_raw<std::uint64_t>(out, config_digest);
    detail::write_raw<double>(out, snap.config.wavelength);
    detail::write_raw<double>(out, snap.config.gamma.real());
    detail::write_raw<double>(out, snap.config.gamma.imag());
    detail::write_raw<double>(out, snap.config.snr_db);
    for (const Point &u : snap.config.users) {
        detail::write_raw<double>(out, u.x);
        detail::write_raw<double>(out, u.y);
    }
    for (Eigen::Index f = 0; f < snap.data.cols(); ++f)
        for (Eigen::Index i = 0; i < snap.data.rows(); ++i) {
            detail::write_raw<double>(out, snap.data(i, f).real());
            detail::write_raw<double>(out, snap.data(i, f).imag());
        }
    if (!out)
        throw ConfigError("write failed for '" + path + "'");
}

inline SnapshotMatrix load_snapshots(const std::string &path, std::uint64_t *config_digest = nullptr) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw ConfigError("cannot open '" + path + "'");
    char magic[8];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, detail::kSnapshotMagic, sizeof(magic)) != 0)
        throw ConfigError("'" + path + "' is not a mirrorsink snapshot file");
    SnapshotMatrix snap;
    const auto n = detail::read_raw<std::uint32_t>(in);
    const auto f = detail::read_raw<std::uint32_t>(in);
    const auto k = detail::read_raw<std::uint32_t>(in);
    detail::read_raw<std::uint32_t>(in); // reserved
    snap.config.seed = detail::read_raw<std::uint64_t>(in);
    const std::uint64_t digest = detail::read_raw<std::uint64_t>(in);
    if (config_digest)
        *config_digest = digest;
    snap.config.wavelength = detail::read_raw<double>(in);
    const double gre = detail::read_raw<double>(in);
    const double gim = detail::read_raw<double>(in);
    snap.config.gamma = {gre, gim};
    snap.config.snr_db = detail::read_raw<double>(in);
    snap.config.snapshots = static_cast<int>(f);
    for (std::uint32_t i = 0; i < k; ++i) {
        const double x = detail::read_raw<double>(in);
        const double y = detail::read_raw<double>(in);
        snap.config.users.push_back({x, y});
    }
    snap.data.resize(n, f);
    for (std::uint32_t c = 0; c < f; ++c)
        for (std::uint32_t r = 0; r < n; ++r) {
            const double re = detail::read_raw<double>(in);
            const double im = detail::read_raw<double>(in);
            snap.data(r, c) = {re, im};
        }
    if (!in)
        throw ConfigError("'" + path + "' is truncated");
    return snap;
}

// ----------------------------------------------------------------- CSVs ---

inline std::string spectrum_to_csv(const SpectrumGrid &grid) {
    std::ostringstream out;
    const bool with_gamma = !grid.gamma_map.empty();
    out << (with_gamma ? "x,y,value,gamma_hat\n" : "x,y,value\n");
    for (int iy = 0; iy < grid.grid.ny; ++iy)
        for (int ix = 0; ix < grid.grid.nx; ++ix) {
            const Point p = grid.grid.node(ix, iy);
            const std::size_t idx = grid.grid.linear(ix, iy);
            out << detail::format_double(p.x) << ',' << detail::format_double(p.y) << ','
                << detail::format_double(grid.values[idx]);
            if (with_gamma) {
                const cdouble g = grid.gamma_map[idx];
                out << ',' << detail::format_double(g.real());
                if (g.imag() != 0.0)
                    out << (g.imag() > 0 ? "+" : "") << detail::format_double(g.imag()) << 'i';
            }
            out << '\n';
        }
    return out.str();
}

inline void save_spectrum_csv(const SpectrumGrid &grid, const std::string &path) {
    detail::write_text_file(path, spectrum_to_csv(grid));
}

inline void save_eigenvalues_csv(const Eigen::MatrixXcd &covariance, const std::string &path) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(covariance);
    if (eig.info() != Eigen::Success)
        throw NumericalError("eigendecomposition failed");
    std::ostringstream out;
    out << "index,eigenvalue\n";
    for (Eigen::Index i = 0; i < eig.eigenvalues().size(); ++i)
        out << i << ',' << detail::format_double(eig.eigenvalues()(i), "%.12g") << '\n';
    detail::write_text_file(path, out.str());
}

// ------------------------------------------------------- locate results ---

inline json location_to_json(const LocationEstimate &est, const SpectrumGrid &grid) {
    json j;
    j["method"] = grid.method.name();
    j["k"] = est.positions.size();
    j["fell_back_to_topk"] = est.fell_back_to_topk;
    j["grid"] = {{"x0", grid.grid.x0}, {"y0", grid.grid.y0}, {"dx", grid.grid.dx},
                 {"dy", grid.grid.dy}, {"nx", grid.grid.nx}, {"ny", grid.grid.ny}};
    j["estimates"] = json::array();
    for (std::size_t i = 0; i < est.positions.size(); ++i) {
        json e = {{"x", est.positions[i].x},
                  {"y", est.positions[i].y},
                  {"value", est.peak_values[i]},
                  {"node", est.nodes[i]}};
        if (!grid.gamma_map.empty()) {
            e["gamma_hat_re"] = grid.gamma_map[est.nodes[i]].real();
            e["gamma_hat_im"] = grid.gamma_map[est.nodes[i]].imag();
        }
        j["estimates"].push_back(std::move(e));
    }
    const std::size_t am = grid.argmax();
    const Point ap = grid.grid.node_of(am);
    j["argmax"] = {{"x", ap.x}, {"y", ap.y}, {"value", grid.values[am]}, {"node", am}};
    return j;
}

// ------------------------------------------------------------------ SVG ---

namespace detail {

// compact 5-stop colormap, dark blue -> yellow
inline std::string heat_color(double t) {
    static const double stops[5][3] = {
        {68, 1, 84}, {59, 82, 139}, {33, 145, 140}, {94, 201, 98}, {253, 231, 37}};
    t = std::clamp(t, 0.0, 1.0) * 4.0;
    const int s = std::min(3, static_cast<int>(t));
    const double f = t - s;
    char buf[16];
    std::snprintf(buf, sizeof(buf), "#%02x%02x%02x",
                  static_cast<int>(stops[s][0] + f * (stops[s + 1][0] - stops[s][0])),
                  static_cast<int>(stops[s][1] + f * (stops[s + 1][1] - stops[s][1])),
                  static_cast<int>(stops[s][2] + f * (stops[s + 1][2] - stops[s][2])));
    return buf;
}

} // namespace detail

// Log-scale heatmap of a spectrum. Large grids are strided down so the file
// stays a few hundred kB at most.
inline void save_spectrum_svg(const SpectrumGrid &grid, const std::string &path) {
    const int stride = std::max(1, (std::max(grid.grid.nx, grid.grid.ny) + 199) / 200);
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (double v : grid.values) {
        const double lv = std::log10(std::max(v, 1e-30));
        lo = std::min(lo, lv);
        hi = std::max(hi, lv);
    }
    if (!(hi > lo))
        hi = lo + 1.0;
    const double cell = 4.0;
    const int w = (grid.grid.nx + stride - 1) / stride, h = (grid.grid.ny + stride - 1) / stride;
    std::ostringstream out;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w * cell << "\" height=\"" << h * cell
        << "\">\n";
    for (int iy = 0; iy < grid.grid.ny; iy += stride)
        for (int ix = 0; ix < grid.grid.nx; ix += stride) {
            double v = grid.values[grid.grid.linear(ix, iy)];
            for (int sy = 0; sy < stride && iy + sy < grid.grid.ny; ++sy)
                for (int sx = 0; sx < stride && ix + sx < grid.grid.nx; ++sx)
                    v = std::max(v, grid.values[grid.grid.linear(ix + sx, iy + sy)]);
            const double t = (std::log10(std::max(v, 1e-30)) - lo) / (hi - lo);
            out << "<rect x=\"" << (ix / stride) * cell << "\" y=\"" << (h - 1 - iy / stride) * cell
                << "\" width=\"" << cell << "\" height=\"" << cell << "\" fill=\"" << detail::heat_color(t)
                << "\"/>\n";
        }
    out << "</svg>\n";
    detail::write_text_file(path, out.str());
}

} // namespace mirrorsink

#endif
