// SPDX-License-Identifier: Apache-2.0
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

#ifndef IQLOC_RNG_HPP
#define IQLOC_RNG_HPP

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <numbers>

namespace iqloc
{
    // Counter-based generator: output n of stream k is mix(k + (n+1) * golden).
    // The sequence depends only on (key, counter), never on platform, thread
    // count or call order across streams. Uniform and normal draws are built
    // with explicit formulas rather than std distributions, whose algorithms
    // are implementation-defined.
    class CounterRng
    {
    public:
        static constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

        static constexpr std::uint64_t mix(std::uint64_t z)
        {
            z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
            z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
            return z ^ (z >> 31);
        }

        // Key for a stream identified by a seed and any number of indices.
        static constexpr std::uint64_t stream_key(std::uint64_t seed, std::initializer_list<std::uint64_t> ids)
        {
            std::uint64_t k = mix(seed ^ 0x6A09E667F3BCC908ULL);
            for (std::uint64_t id : ids)
                k = mix(k ^ mix(id + kGolden));
            return k;
        }

        explicit constexpr CounterRng(std::uint64_t key, std::uint64_t counter = 0) : key_(key), counter_(counter) {}

        CounterRng(std::uint64_t seed, std::initializer_list<std::uint64_t> ids) : key_(stream_key(seed, ids)) {}

        constexpr std::uint64_t next_u64() { return mix(key_ + (++counter_) * kGolden); }

        // Uniform on [0, 1) with 53 random bits.
        double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

        double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

        // Standard normal via Box-Muller; one output per call.
        double normal()
        {
            const double u1 = 1.0 - uniform(); // (0, 1]
            const double u2 = uniform();
            return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
        }

        // Uniform integer on [0, n).
        std::uint64_t below(std::uint64_t n) { return static_cast<std::uint64_t>(uniform() * static_cast<double>(n)); }

        std::uint64_t counter() const { return counter_; }

    private:
        std::uint64_t key_;
        std::uint64_t counter_ = 0;
    };
}

#endif
