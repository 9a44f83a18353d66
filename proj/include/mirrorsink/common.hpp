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

#ifndef MIRRORSINK_COMMON_HPP
#define MIRRORSINK_COMMON_HPP

#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>

namespace mirrorsink {

using cdouble = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846;

// Bad scene / configuration input (CLI maps this to exit code 2).
class ConfigError : public std::runtime_error {
  public:
    explicit ConfigError(const std::string &msg) : std::runtime_error(msg) {}
};

// Degenerate geometric input (walls with zero extent, coincident points, ...).
class GeometryError : public std::runtime_error {
  public:
    explicit GeometryError(const std::string &msg) : std::runtime_error(msg) {}
};

// Numerical breakdown (singular matrix without regularization, ...).
// CLI maps this to exit code 3.
class NumericalError : public std::runtime_error {
  public:
    explicit NumericalError(const std::string &msg) : std::runtime_error(msg) {}
};

// dB amplitude -> linear amplitude (20 dB per decade)
inline double db_to_amplitude(double db) { return std::pow(10.0, db / 20.0); }

// dB power -> linear power (10 dB per decade)
inline double db_to_power(double db) { return std::pow(10.0, db / 10.0); }

} // namespace mirrorsink

#endif
