// SPDX-License-Identifier: Apache-2.0
//
// risac: link-level simulator for repeater-assisted bi-static MIMO ISAC
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


#ifndef RISAC_RANDOM_HPP
#define RISAC_RANDOM_HPP

#include <cstdint>
#include <random>

#include "types.hpp"

namespace risac
{

// Random stream identifiers. Every trial draws from its own substream keyed by
// (master_seed, study, trial) so results never depend on scheduling.
enum class StreamKind : std::uint64_t
{
    geometry = 1,
    base_channels = 2,
    calibration = 3,
    null_evaluation = 4,
    detection = 5,
    se_drop = 6,
    oracle = 7,
    power_check = 8,
    noise_check = 9,
};

inline std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

inline std::uint64_t substream_seed(std::uint64_t master_seed, StreamKind study, std::uint64_t trial)
{
    std::uint64_t h = splitmix64(master_seed);
    h = splitmix64(h ^ static_cast<std::uint64_t>(study));
    return splitmix64(h ^ trial);
}

class RandomStream
{
  public:
    explicit RandomStream(std::uint64_t seed) : engine_(seed) {}
    RandomStream(std::uint64_t master_seed, StreamKind study, std::uint64_t trial)
        : engine_(substream_seed(master_seed, study, trial))
    {
    }

    double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(engine_); }

    double gaussian() { return normal_(engine_); }

    // Circularly symmetric CN(0, variance).
    Complex complex_gaussian(double variance = 1.0)
    {
        const double s = std::sqrt(variance / 2.0);
        const double re = normal_(engine_);
        const double im = normal_(engine_);
        return {s * re, s * im};
    }

    CVector complex_gaussian_vector(Eigen::Index n, double variance = 1.0)
    {
        CVector v(n);
        for (Eigen::Index i = 0; i < n; ++i)
            v(i) = complex_gaussian(variance);
        return v;
    }

    CMatrix complex_gaussian_matrix(Eigen::Index rows, Eigen::Index cols, double variance = 1.0)
    {
        CMatrix m(rows, cols);
        for (Eigen::Index j = 0; j < cols; ++j)
            for (Eigen::Index i = 0; i < rows; ++i)
                m(i, j) = complex_gaussian(variance);
        return m;
    }

    Complex unit_phase() { return std::polar(1.0, 2.0 * kPi * uniform()); }

    std::mt19937_64 &engine() { return engine_; }

  private:
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_{0.0, 1.0};
};

} // namespace risac

#endif
