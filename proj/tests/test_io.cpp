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
#include <filesystem>
#include <unistd.h>

#include "mirrorsink/io.hpp"

using namespace mirrorsink;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() / ("mirrorsink_io_" + std::to_string(::getpid()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string file(const std::string &name) const { return (path / name).string(); }
};

ChannelDatabase reference_db() {
    const SceneSpec scene{RectRoom{0, 0, 20, 30},
                          {ApSpec{"south", 6, {}, 0.0625}, ApSpec{"west", 6, {}, 0.0625}},
                          {}};
    return build_scene_database(scene);
}

} // namespace

TEST_CASE("database file round trip preserves coordinates exactly") {
    TempDir tmp;
    const ChannelDatabase db = reference_db();
    const std::string path = tmp.file("db.json");
    save_database(db, path);
    const ChannelDatabase back = load_database(path);

    REQUIRE(back.aps.size() == db.aps.size());
    CHECK(back.paths_per_ap == db.paths_per_ap);
    for (std::size_t a = 0; a < db.aps.size(); ++a) {
        REQUIRE(back.aps[a].receivers.size() == db.aps[a].receivers.size());
        CHECK(back.aps[a].ap_id == db.aps[a].ap_id);
        for (std::size_t r = 0; r < db.aps[a].receivers.size(); ++r) {
            const auto &vr0 = db.aps[a].receivers[r];
            const auto &vr1 = back.aps[a].receivers[r];
            CHECK(vr0.source_wall == vr1.source_wall);
            REQUIRE(vr1.array.size() == vr0.array.size());
            for (std::size_t i = 0; i < vr0.array.size(); ++i) {
                // bit-exact round trip of the stored doubles
                CHECK(vr0.array.antennas[i].x == vr1.array.antennas[i].x);
                CHECK(vr0.array.antennas[i].y == vr1.array.antennas[i].y);
            }
        }
    }
}

TEST_CASE("tampered database files fail validation on load") {
    TempDir tmp;
    const ChannelDatabase db = reference_db();
    json j = database_to_json(db);
    j["aps"][0]["receivers"][1]["antennas"][0][0] = 99.0;
    detail::write_text_file(tmp.file("bad.json"), j.dump());
    CHECK_THROWS_AS(load_database(tmp.file("bad.json")), ConfigError);

    j = database_to_json(db);
    j["version"] = 999;
    detail::write_text_file(tmp.file("vers.json"), j.dump());
    CHECK_THROWS_AS(load_database(tmp.file("vers.json")), ConfigError);

    CHECK_THROWS_AS(load_database(tmp.file("missing.json")), ConfigError);
}

TEST_CASE("scene files parse with optional fields") {
    const char *text = R"({
        "room": {"x_min": 0, "y_min": 0, "x_max": 20, "y_max": 30},
        "wavelength": 0.125,
        "aps": [
            {"wall": "south", "antennas": 6},
            {"wall": "west", "antennas": 4, "offset": 10.0, "spacing": 0.1}
        ]
    })";
    const SceneSpec scene = parse_scene(json::parse(text));
    CHECK(scene.room.x_max == 20.0);
    REQUIRE(scene.aps.size() == 2);
    CHECK_FALSE(scene.aps[0].offset.has_value());
    CHECK_FALSE(scene.aps[0].spacing.has_value());
    CHECK(scene.aps[1].offset == 10.0);
    CHECK(scene.aps[1].spacing == 0.1);
    REQUIRE(scene.wavelength.has_value());

    const ChannelDatabase db = build_scene_database(scene);
    CHECK(db.total_antennas() == 10);
}

TEST_CASE("malformed JSON is a config error") {
    TempDir tmp;
    detail::write_text_file(tmp.file("junk.json"), "{not json");
    CHECK_THROWS_AS(load_scene(tmp.file("junk.json")), ConfigError);
    detail::write_text_file(tmp.file("empty.json"), "{}");
    CHECK_THROWS_AS(load_scene(tmp.file("empty.json")), ConfigError);
}

TEST_CASE("run config parses the gamma dB convention") {
    const char *text = R"({
        "wavelength": 0.125, "gamma_db": -7, "snr_db": 20,
        "snapshots": 128, "users": [[7, 12], [9, 13]], "seed": 42
    })";
    const SceneConfig cfg = parse_run_config(json::parse(text));
    // default phase of 180 degrees makes gamma negative real
    CHECK(cfg.gamma.real() == Catch::Approx(-db_to_amplitude(-7.0)));
    CHECK(std::abs(cfg.gamma.imag()) < 1e-15);
    CHECK(cfg.users.size() == 2);
    CHECK(cfg.seed == 42);
}

TEST_CASE("snapshot files round trip bit-exactly") {
    TempDir tmp;
    const ChannelDatabase db = reference_db();
    SceneConfig cfg;
    cfg.wavelength = 0.125;
    cfg.gamma = {-0.44, 0.0};
    cfg.snr_db = 20.0;
    cfg.snapshots = 16;
    cfg.users = {{7, 12}, {9, 13}};
    cfg.seed = 31337;
    const SnapshotMatrix snap = synthesize_snapshots(db, cfg);

    const std::string path = tmp.file("snap.bin");
    save_snapshots(snap, path, 0xDEADBEEFULL);

    std::uint64_t digest = 0;
    const SnapshotMatrix back = load_snapshots(path, &digest);
    CHECK(digest == 0xDEADBEEFULL);
    CHECK(back.config.seed == 31337);
    CHECK(back.config.wavelength == cfg.wavelength);
    CHECK(back.config.gamma == cfg.gamma);
    CHECK(back.config.snr_db == cfg.snr_db);
    REQUIRE(back.config.users.size() == 2);
    CHECK(back.config.users[1].y == 13.0);
    REQUIRE(back.data.rows() == snap.data.rows());
    REQUIRE(back.data.cols() == snap.data.cols());
    for (Eigen::Index i = 0; i < snap.data.size(); ++i) {
        CHECK(back.data.data()[i].real() == snap.data.data()[i].real());
        CHECK(back.data.data()[i].imag() == snap.data.data()[i].imag());
    }
}

TEST_CASE("snapshot loader rejects foreign and truncated files") {
    TempDir tmp;
    detail::write_text_file(tmp.file("foreign.bin"), "definitely not a snapshot file");
    CHECK_THROWS_AS(load_snapshots(tmp.file("foreign.bin")), ConfigError);

    const ChannelDatabase db = reference_db();
    SceneConfig cfg;
    cfg.wavelength = 0.125;
    cfg.gamma = {0, 0};
    cfg.snapshots = 4;
    cfg.users = {{7, 12}};
    const SnapshotMatrix snap = synthesize_snapshots(db, cfg);
    save_snapshots(snap, tmp.file("ok.bin"));
    // chop the file
    const auto full = fs::file_size(tmp.file("ok.bin"));
    fs::resize_file(tmp.file("ok.bin"), full / 2);
    CHECK_THROWS_AS(load_snapshots(tmp.file("ok.bin")), ConfigError);
}

TEST_CASE("spectrum CSV layout") {
    SpectrumGrid g;
    g.grid = GridSpec{0, 0, 0.5, 0.5, 3, 2};
    g.method = MethodSpec::mf();
    g.values = {1, 2, 3, 4, 5, 6};
    const std::string csv = spectrum_to_csv(g);
    CHECK(csv.rfind("x,y,value\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 7); // header + 6 rows
    CHECK(csv.find("1,0,3\n") != std::string::npos);      // third node of the first row
    CHECK(csv.find("0,0.5,4\n") != std::string::npos);    // first node of the second row

    SpectrumGrid gm = g;
    gm.method = MethodSpec::music_est();
    gm.gamma_map.assign(6, cdouble{-0.5, 0.0});
    const std::string csv2 = spectrum_to_csv(gm);
    CHECK(csv2.rfind("x,y,value,gamma_hat\n", 0) == 0);
    CHECK(csv2.find(",-0.5\n") != std::string::npos);
}

TEST_CASE("fnv1a64 matches the reference vectors") {
    CHECK(fnv1a64("") == 0xCBF29CE484222325ULL);
    CHECK(fnv1a64("a") == 0xAF63DC4C8601EC8CULL);
    CHECK(fnv1a64("foobar") == 0x85944171F73967E8ULL);
}

TEST_CASE("location JSON carries estimates and the argmax") {
    SpectrumGrid g;
    g.grid = GridSpec{0, 0, 1.0, 1.0, 4, 4};
    g.method = MethodSpec::mvdr();
    g.values.assign(16, 0.5);
    g.values[g.grid.linear(2, 3)] = 9.0;
    const LocationEstimate est = pick_peaks(g, 1, PeakMode::TopK);
    const json doc = location_to_json(est, g);
    CHECK(doc["method"] == "mvdr");
    CHECK(doc["estimates"][0]["x"] == 2.0);
    CHECK(doc["estimates"][0]["y"] == 3.0);
    CHECK(doc["argmax"]["value"] == 9.0);
    CHECK(doc["fell_back_to_topk"] == false);
}

TEST_CASE("SVG emitters produce drawable documents") {
    TempDir tmp;
    SpectrumGrid g;
    g.grid = GridSpec{0, 0, 1.0, 1.0, 30, 20};
    g.method = MethodSpec::mf();
    g.values.assign(600, 1.0);
    g.values[123] = 50.0;
    save_spectrum_svg(g, tmp.file("heat.svg"));
    std::ifstream in(tmp.file("heat.svg"));
    std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    CHECK(content.find("<svg") != std::string::npos);
    CHECK(content.find("<rect") != std::string::npos);
}

TEST_CASE("eigenvalue dump is ordered ascending") {
    TempDir tmp;
    Eigen::MatrixXcd r = Eigen::MatrixXcd::Zero(3, 3);
    r.diagonal() << 5.0, 1.0, 3.0;
    save_eigenvalues_csv(r, tmp.file("eig.csv"));
    std::ifstream in(tmp.file("eig.csv"));
    std::string header, l0, l1, l2;
    std::getline(in, header);
    std::getline(in, l0);
    std::getline(in, l1);
    std::getline(in, l2);
    CHECK(header == "index,eigenvalue");
    CHECK(l0 == "0,1");
    CHECK(l1 == "1,3");
    CHECK(l2 == "2,5");
}
