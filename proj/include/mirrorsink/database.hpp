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
// Location section of the channel database: each access point (AP) is stored
// together with its mirror images across the room walls. Receiving on a
// mirrored array models the single-bounce wall reflection, so the whole
// multipath geometry is captured by a fixed list of antenna coordinates.

#ifndef MIRRORSINK_DATABASE_HPP
#define MIRRORSINK_DATABASE_HPP

#include <algorithm>
#include <optional>
#include <string>
#include <vector>

#include "mirrorsink/common.hpp"
#include "mirrorsink/geometry.hpp"

namespace mirrorsink {

// Antenna order is significant: mirroring reverses it.
struct AntennaArray {
    std::vector<Point> antennas;

    std::size_t size() const { return antennas.size(); }
};

inline void validate_array(const AntennaArray &arr) {
    if (arr.antennas.empty())
        throw ConfigError("antenna array must hold at least one antenna");
    for (std::size_t i = 0; i < arr.antennas.size(); ++i)
        for (std::size_t j = i + 1; j < arr.antennas.size(); ++j)
            if (distance(arr.antennas[i], arr.antennas[j]) < 1e-12)
                throw ConfigError("antenna array has coincident antennas");
}

// One receiver of an AP: either the physical array (path_index 1, no source
// wall) or its mirror image across one wall (path_index >= 2).
struct VirtualReceiver {
    std::string ap_id;
    std::optional<std::string> source_wall; // nullopt for the direct receiver
    AntennaArray array;
    int path_index = 1;
};

// Mirror every antenna across w, then reverse the antenna order. The
// reversal compensates the apparent flip of the array seen in the mirror.
inline VirtualReceiver build_virtual_receiver(const std::string &ap_id, const AntennaArray &ap_array, const Wall &w,
                                              int path_index) {
    if (path_index < 2)
        throw ConfigError("mirrored receivers require path_index >= 2");
    VirtualReceiver vr;
    vr.ap_id = ap_id;
    vr.source_wall = w.id;
    vr.path_index = path_index;
    vr.array.antennas.reserve(ap_array.size());
    for (auto it = ap_array.antennas.rbegin(); it != ap_array.antennas.rend(); ++it)
        vr.array.antennas.push_back(mirror_point(*it, w));
    return vr;
}

struct ChannelDatabase {
    struct ApEntry {
        std::string ap_id;
        std::vector<VirtualReceiver> receivers; // path_index 1..L, direct first
    };

    std::vector<Wall> room;
    std::vector<ApEntry> aps;
    int paths_per_ap = 0; // L

    std::size_t num_aps() const { return aps.size(); }

    std::size_t total_antennas() const {
        std::size_t n = 0;
        for (const auto &ap : aps)
            n += ap.receivers.empty() ? 0 : ap.receivers.front().array.size();
        return n;
    }

    const AntennaArray &direct_array(std::size_t ap) const { return aps[ap].receivers.front().array; }
};

inline constexpr double kApOnWallTol = 1e-9;

namespace detail {

// Index of the single wall hosting every antenna of the array, within
// tolerance. Zero or multiple hosts (corner placement) are rejected.
inline std::size_t host_wall_index(const AntennaArray &arr, const std::vector<Wall> &walls,
                                   const std::string &ap_id) {
    std::vector<std::size_t> hosts;
    for (std::size_t wi = 0; wi < walls.size(); ++wi) {
        bool all_on = true;
        for (const Point &p : arr.antennas)
            if (point_segment_distance(p, walls[wi].a, walls[wi].b) > kApOnWallTol) {
                all_on = false;
                break;
            }
        if (all_on)
            hosts.push_back(wi);
    }
    if (hosts.empty())
        throw ConfigError("AP '" + ap_id + "' does not lie on any wall");
    if (hosts.size() > 1)
        throw ConfigError("AP '" + ap_id + "' lies on more than one wall (corner placement)");
    return hosts.front();
}

} // namespace detail

// Build the database: per AP the direct receiver plus one mirrored receiver
// for every wall the AP does not sit on. For a rectangular room this gives
// L = 4 receivers per AP (one direct, three mirrors).
inline ChannelDatabase build_database(const std::vector<Wall> &room,
                                      const std::vector<std::pair<std::string, AntennaArray>> &aps) {
    if (room.empty())
        throw ConfigError("room has no walls");
    if (aps.empty())
        throw ConfigError("no access points given");
    for (const Wall &w : room)
        if (distance(w.a, w.b) < kDegenerateWallTol)
            throw GeometryError("degenerate wall '" + w.id + "'");

    ChannelDatabase db;
    db.room = room;
    db.paths_per_ap = static_cast<int>(room.size()); // 1 direct + (#walls - 1) mirrors

    for (const auto &[ap_id, array] : aps) {
        validate_array(array);
        const std::size_t host = detail::host_wall_index(array, room, ap_id);

        ChannelDatabase::ApEntry entry;
        entry.ap_id = ap_id;
        entry.receivers.push_back(VirtualReceiver{ap_id, std::nullopt, array, 1});
        int l = 2;
        for (std::size_t wi = 0; wi < room.size(); ++wi) {
            if (wi == host)
                continue;
            entry.receivers.push_back(build_virtual_receiver(ap_id, array, room[wi], l++));
        }
        db.aps.push_back(std::move(entry));
    }
    return db;
}

// Structural checks used after construction and after loading from disk:
// contiguous path indices, mirror consistency against the direct array, and
// (for closed convex rooms) virtual arrays strictly outside the room.
inline void validate_database(const ChannelDatabase &db) {
    if (db.room.empty())
        throw ConfigError("database without walls");
    if (db.aps.empty())
        throw ConfigError("database without APs");
    const std::vector<Point> poly = room_polygon(db.room);

    for (const auto &ap : db.aps) {
        if (ap.receivers.empty())
            throw ConfigError("AP '" + ap.ap_id + "' has no receivers");
        if (static_cast<int>(ap.receivers.size()) != db.paths_per_ap)
            throw ConfigError("AP '" + ap.ap_id + "' receiver count differs from paths_per_ap");
        const auto &direct = ap.receivers.front();
        if (direct.path_index != 1 || direct.source_wall.has_value())
            throw ConfigError("AP '" + ap.ap_id + "': first receiver must be the direct one");
        validate_array(direct.array);
        const std::size_t n = direct.array.size();

        for (std::size_t r = 1; r < ap.receivers.size(); ++r) {
            const auto &vr = ap.receivers[r];
            if (vr.path_index != static_cast<int>(r) + 1)
                throw ConfigError("AP '" + ap.ap_id + "': path indices not contiguous");
            if (!vr.source_wall.has_value())
                throw ConfigError("AP '" + ap.ap_id + "': mirrored receiver lacks source wall");
            if (vr.array.size() != n)
                throw ConfigError("AP '" + ap.ap_id + "': receiver size mismatch");
            const auto wall_it = std::find_if(db.room.begin(), db.room.end(),
                                              [&](const Wall &w) { return w.id == *vr.source_wall; });
            if (wall_it == db.room.end())
                throw ConfigError("AP '" + ap.ap_id + "': unknown source wall '" + *vr.source_wall + "'");
            for (std::size_t k = 0; k < n; ++k) {
                const Point expect = mirror_point(direct.array.antennas[n - 1 - k], *wall_it);
                if (distance(expect, vr.array.antennas[k]) > 1e-9)
                    throw ConfigError("AP '" + ap.ap_id + "': mirrored array inconsistent with direct array");
            }
            if (!poly.empty())
                for (const Point &p : vr.array.antennas)
                    if (point_in_polygon(p, poly))
                        throw ConfigError("AP '" + ap.ap_id + "': virtual antenna lies inside the room");
        }
    }
}

} // namespace mirrorsink

#endif
