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

#ifndef MIRRORSINK_LOCATOR_HPP
#define MIRRORSINK_LOCATOR_HPP

#include <algorithm>
#include <limits>
#include <numeric>
#include <vector>

#include "mirrorsink/spectra.hpp"

namespace mirrorsink {

enum class PeakMode {
    TopK,        // K largest grid values; may return adjacent nodes of one peak
    LocalMaxima, // K strongest strict 8-neighborhood maxima, min_sep apart
};

struct LocationEstimate {
    std::vector<Point> positions;
    std::vector<double> peak_values; // non-increasing
    std::vector<std::size_t> nodes;  // linear grid indices
    bool fell_back_to_topk = false;  // LocalMaxima found fewer than K peaks
};

namespace detail {

// value-descending, index-ascending
inline bool peak_less(const std::vector<double> &v, std::size_t a, std::size_t b) {
    if (v[a] != v[b])
        return v[a] > v[b];
    return a < b;
}

inline std::vector<std::size_t> topk_nodes(const SpectrumGrid &g, int k) {
    std::vector<std::size_t> idx(g.values.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::partial_sort(idx.begin(), idx.begin() + k, idx.end(),
                      [&](std::size_t a, std::size_t b) { return peak_less(g.values, a, b); });
    idx.resize(k);
    return idx;
}

inline bool is_local_maximum(const SpectrumGrid &g, int ix, int iy) {
    const double v = g.value_at(ix, iy);
    for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx) {
            if (dx == 0 && dy == 0)
                continue;
            const int jx = ix + dx, jy = iy + dy;
            if (jx < 0 || jy < 0 || jx >= g.grid.nx || jy >= g.grid.ny)
                continue;
            if (g.value_at(jx, jy) >= v)
                return false;
        }
    return true;
}

} // namespace detail

// The K spectrum peaks. TopK reproduces plain largest-value extraction;
// LocalMaxima suppresses the duplicate-node hazard of a single wide peak.
inline LocationEstimate pick_peaks(const SpectrumGrid &grid, int k, PeakMode mode = PeakMode::TopK,
                                   double min_sep = 0.0) {
    if (k < 1 || static_cast<std::size_t>(k) > grid.values.size())
        throw ConfigError("pick_peaks: K out of range for this grid");

    std::vector<std::size_t> chosen;
    bool fell_back = false;

    if (mode == PeakMode::LocalMaxima) {
        std::vector<std::size_t> maxima;
        for (int iy = 0; iy < grid.grid.ny; ++iy)
            for (int ix = 0; ix < grid.grid.nx; ++ix)
                if (detail::is_local_maximum(grid, ix, iy))
                    maxima.push_back(grid.grid.linear(ix, iy));
        std::sort(maxima.begin(), maxima.end(),
                  [&](std::size_t a, std::size_t b) { return detail::peak_less(grid.values, a, b); });
        for (std::size_t m : maxima) {
            if (static_cast<int>(chosen.size()) == k)
                break;
            const Point p = grid.grid.node_of(m);
            const bool far_enough = std::all_of(chosen.begin(), chosen.end(), [&](std::size_t c) {
                return distance(p, grid.grid.node_of(c)) >= min_sep;
            });
            if (far_enough)
                chosen.push_back(m);
        }
        if (static_cast<int>(chosen.size()) < k) {
            chosen = detail::topk_nodes(grid, k);
            fell_back = true;
        }
    } else {
        chosen = detail::topk_nodes(grid, k);
    }

    LocationEstimate est;
    est.fell_back_to_topk = fell_back;
    est.nodes = chosen;
    for (std::size_t idx : chosen) {
        est.positions.push_back(grid.grid.node_of(idx));
        est.peak_values.push_back(grid.values[idx]);
    }
    return est;
}

struct ErrorReport {
    std::vector<double> per_user_error; // meters, ordered by truth index, capped
    double rmse = 0.0;
    std::vector<int> assignment; // truth index -> estimate index
    double cap_m = std::numeric_limits<double>::infinity();
    bool cap_applied = false;
};

// Minimum-total-squared-distance association between estimates and truth,
// exact over all K! permutations (K stays small here). RMSE is taken over
// the assigned pairs with per-user errors capped at cap_m.
inline ErrorReport match_and_error(const std::vector<Point> &estimates, const std::vector<Point> &truth,
                                   double cap_m = std::numeric_limits<double>::infinity()) {
    const std::size_t k = truth.size();
    if (estimates.size() != k)
        throw ConfigError("match_and_error: estimate/truth size mismatch");
    if (k == 0)
        throw ConfigError("match_and_error: empty inputs");
    if (k > 9)
        throw ConfigError("match_and_error: brute-force assignment limited to K <= 9");

    std::vector<int> perm(k);
    std::iota(perm.begin(), perm.end(), 0);
    std::vector<int> best = perm;
    double best_cost = std::numeric_limits<double>::infinity();
    do {
        double cost = 0.0;
        for (std::size_t i = 0; i < k; ++i) {
            const Point d = truth[i] - estimates[perm[i]];
            cost += dot(d, d);
        }
        if (cost < best_cost) {
            best_cost = cost;
            best = perm;
        }
    } while (std::next_permutation(perm.begin(), perm.end()));

    ErrorReport rep;
    rep.assignment = best;
    rep.cap_m = cap_m;
    double sum_sq = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        double e = distance(truth[i], estimates[best[i]]);
        if (e > cap_m) {
            e = cap_m;
            rep.cap_applied = true;
        }
        rep.per_user_error.push_back(e);
        sum_sq += e * e;
    }
    rep.rmse = std::sqrt(sum_sq / static_cast<double>(k));
    return rep;
}

} // namespace mirrorsink

#endif
