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

#ifndef MIRRORSINK_SCENE_HPP
#define MIRRORSINK_SCENE_HPP

#include <optional>
#include <string>
#include <vector>

#include "mirrorsink/database.hpp"
#include "mirrorsink/geometry.hpp"

namespace mirrorsink {

struct RectRoom {
    double x_min = 0, y_min = 0, x_max = 0, y_max = 0;

    double diagonal() const { return std::hypot(x_max - x_min, y_max - y_min); }
};

// Walls in counter-clockwise order. Each wall runs from .a to .b; AP offsets
// are measured along that direction.
inline std::vector<Wall> rect_walls(const RectRoom &r) {
    if (!(r.x_max > r.x_min) || !(r.y_max > r.y_min))
        throw ConfigError("rectangular room must have positive extent");
    return {
        Wall{{r.x_min, r.y_min}, {r.x_max, r.y_min}, "south"},
        Wall{{r.x_max, r.y_min}, {r.x_max, r.y_max}, "east"},
        Wall{{r.x_max, r.y_max}, {r.x_min, r.y_max}, "north"},
        Wall{{r.x_min, r.y_max}, {r.x_min, r.y_min}, "west"},
    };
}

// Uniform linear array mounted on one wall. The array is centered at
// `offset` meters along the wall (wall midpoint when omitted) and its
// antennas are ordered along the wall direction.
struct ApSpec {
    std::string wall;              // wall id, e.g. "south"
    int antennas = 1;              // N
    std::optional<double> offset;  // center position along the wall [m]
    std::optional<double> spacing; // antenna spacing [m]
};

inline AntennaArray make_wall_ula(const Wall &w, const ApSpec &spec, double default_spacing) {
    if (spec.antennas < 1)
        throw ConfigError("AP on wall '" + spec.wall + "': antenna count must be >= 1");
    const double wall_len = distance(w.a, w.b);
    const double spacing = spec.spacing.value_or(default_spacing);
    if (!(spacing > 0.0))
        throw ConfigError("AP on wall '" + spec.wall + "': spacing must be positive");
    const double center = spec.offset.value_or(wall_len / 2.0);
    const double span = (spec.antennas - 1) * spacing;
    if (center - span / 2.0 < -kApOnWallTol || center + span / 2.0 > wall_len + kApOnWallTol)
        throw ConfigError("AP on wall '" + spec.wall + "': array extends past the wall");

    const Point dir = (1.0 / wall_len) * (w.b - w.a);
    AntennaArray arr;
    arr.antennas.reserve(spec.antennas);
    for (int i = 0; i < spec.antennas; ++i) {
        const double s = center + (i - (spec.antennas - 1) / 2.0) * spacing;
        arr.antennas.push_back(w.a + s * dir);
    }
    return arr;
}

struct SceneSpec {
    RectRoom room;
    std::vector<ApSpec> aps;
    std::optional<double> wavelength; // only needed when an AP omits spacing
};

// Scene -> channel database. Default spacing is half the carrier wavelength.
inline ChannelDatabase build_scene_database(const SceneSpec &scene) {
    const std::vector<Wall> walls = rect_walls(scene.room);
    std::vector<std::pair<std::string, AntennaArray>> aps;
    for (std::size_t i = 0; i < scene.aps.size(); ++i) {
        const ApSpec &spec = scene.aps[i];
        const auto wall_it =
            std::find_if(walls.begin(), walls.end(), [&](const Wall &w) { return w.id == spec.wall; });
        if (wall_it == walls.end())
            throw ConfigError("unknown wall '" + spec.wall + "' (expected south/east/north/west)");
        double default_spacing = 0.0;
        if (!spec.spacing.has_value()) {
            if (!scene.wavelength.has_value())
                throw ConfigError("AP on wall '" + spec.wall + "' omits spacing and the scene has no wavelength");
            default_spacing = *scene.wavelength / 2.0;
        }
        aps.emplace_back("ap" + std::to_string(i + 1), make_wall_ula(*wall_it, spec, default_spacing));
    }
    ChannelDatabase db = build_database(walls, aps);
    validate_database(db);
    return db;
}

} // namespace mirrorsink

#endif
