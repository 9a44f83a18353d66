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

#ifndef MIRRORSINK_GEOMETRY_HPP
#define MIRRORSINK_GEOMETRY_HPP

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "mirrorsink/common.hpp"

namespace mirrorsink {

struct Point {
    double x = 0.0;
    double y = 0.0;
};

inline Point operator+(Point a, Point b) { return {a.x + b.x, a.y + b.y}; }
inline Point operator-(Point a, Point b) { return {a.x - b.x, a.y - b.y}; }
inline Point operator*(double s, Point p) { return {s * p.x, s * p.y}; }

inline double dot(Point a, Point b) { return a.x * b.x + a.y * b.y; }
inline double norm(Point p) { return std::sqrt(p.x * p.x + p.y * p.y); }
inline double distance(Point a, Point b) { return norm(a - b); }

// A wall of the room. Mirroring uses the infinite line through (a, b);
// the segment itself is only used for scene validation.
struct Wall {
    Point a;
    Point b;
    std::string id;
};

inline constexpr double kDegenerateWallTol = 1e-12;

// Reflect p across the infinite line through w (image method).
inline Point mirror_point(Point p, const Wall &w) {
    const Point d = w.b - w.a;
    const double len2 = dot(d, d);
    if (len2 < kDegenerateWallTol * kDegenerateWallTol)
        throw GeometryError("degenerate wall '" + w.id + "': endpoints coincide");
    const Point v = p - w.a;
    const double t = dot(v, d) / len2;
    const Point foot = w.a + t * d; // orthogonal projection onto the line
    return 2.0 * foot - p;
}

// Distance from p to the closed segment [a, b].
inline double point_segment_distance(Point p, Point a, Point b) {
    const Point d = b - a;
    const double len2 = dot(d, d);
    if (len2 == 0.0)
        return distance(p, a);
    double t = dot(p - a, d) / len2;
    t = std::clamp(t, 0.0, 1.0);
    return distance(p, a + t * d);
}

// Chain the wall segments into a closed polygon loop. Returns the ordered
// corner list, or an empty vector when the walls do not close up (endpoint
// matching tolerance 1e-9 m).
inline std::vector<Point> room_polygon(const std::vector<Wall> &walls) {
    constexpr double tol = 1e-9;
    const std::size_t n = walls.size();
    if (n < 3)
        return {};
    std::vector<bool> used(n, false);
    std::vector<Point> loop;
    loop.push_back(walls[0].a);
    Point cur = walls[0].b;
    used[0] = true;
    for (std::size_t step = 1; step < n; ++step) {
        bool found = false;
        for (std::size_t i = 0; i < n && !found; ++i) {
            if (used[i])
                continue;
            if (distance(walls[i].a, cur) < tol) {
                loop.push_back(cur);
                cur = walls[i].b;
                used[i] = found = true;
            } else if (distance(walls[i].b, cur) < tol) {
                loop.push_back(cur);
                cur = walls[i].a;
                used[i] = found = true;
            }
        }
        if (!found)
            return {};
    }
    if (distance(cur, loop.front()) >= tol)
        return {};
    return loop;
}

// Strict interior test (crossing number). Points on the boundary count as
// outside.
inline bool point_in_polygon(Point p, const std::vector<Point> &poly) {
    const std::size_t n = poly.size();
    if (n < 3)
        return false;
    bool inside = false;
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
        if (point_segment_distance(p, poly[j], poly[i]) < 1e-12)
            return false; // on the boundary
        const bool crosses = (poly[i].y > p.y) != (poly[j].y > p.y);
        if (crosses) {
            const double x_cross = poly[j].x + (p.y - poly[j].y) / (poly[i].y - poly[j].y) * (poly[i].x - poly[j].x);
            if (p.x < x_cross)
                inside = !inside;
        }
    }
    return inside;
}

struct BoundingBox {
    double x_min = 0, y_min = 0, x_max = 0, y_max = 0;
    double diagonal() const { return std::hypot(x_max - x_min, y_max - y_min); }
};

inline BoundingBox bounding_box(const std::vector<Wall> &walls) {
    if (walls.empty())
        throw GeometryError("bounding box of empty wall list");
    BoundingBox bb{walls[0].a.x, walls[0].a.y, walls[0].a.x, walls[0].a.y};
    for (const Wall &w : walls) {
        for (Point p : {w.a, w.b}) {
            bb.x_min = std::min(bb.x_min, p.x);
            bb.y_min = std::min(bb.y_min, p.y);
            bb.x_max = std::max(bb.x_max, p.x);
            bb.y_max = std::max(bb.y_max, p.y);
        }
    }
    return bb;
}

} // namespace mirrorsink

#endif
