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

#ifndef MIRRORSINK_RNG_HPP
#define MIRRORSINK_RNG_HPP

#include <cmath>
#include <cstdint>
#include <random>

#include "mirrorsink/common.hpp"

namespace mirrorsink {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

// Independent substream seed for (base seed, stream index).
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
    return splitmix64(base ^ splitmix64(stream + 0x51AB61F1C0C0FFEEULL));
}

// Deterministic random stream. std::mt19937_64 output is pinned by the
// standard; the uniform and Gaussian mappings below are spelled out instead
// of using std::*_distribution so that identical seeds give bit-identical
// draws on every platform and standard library.
class RandomStream {
  public:
    explicit RandomStream(std::uint64_t seed) : eng_(seed) {}

    std::uint64_t next_u64() { return eng_(); }

    // uniform in [0, 1) with 53-bit resolution
    double uniform01() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

    // uniform integer in [0, n) without modulo bias
    std::uint64_t uniform_index(std::uint64_t n) {
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t x;
        do {
            x = eng_();
        } while (x >= limit);
        return x % n;
    }

    // circularly-symmetric complex Gaussian, E|z|^2 = 1 (Box-Muller)
    cdouble complex_gaussian() {
        const double u1 = uniform01();
        const double u2 = uniform01();
        const double r = std::sqrt(-std::log1p(-u1));
        return std::polar(r, 2.0 * kPi * u2);
    }

  private:
    std::mt19937_64 eng_;
};

} // namespace mirrorsink

#endif
