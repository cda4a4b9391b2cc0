// dcm - dynamic channel map built on a hybrid ray-tracing / stochastic channel model
// Copyright (C) 2026 The dcm authors
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

#ifndef DCM_RNG_HPP
#define DCM_RNG_HPP

#include <bit>
#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <random>
#include <string_view>

#include "dcm/core.hpp"

namespace dcm
{
    // splitmix64 finalizer
    inline constexpr std::uint64_t mix64(std::uint64_t z)
    {
        z += 0x9e3779b97f4a7c15ULL;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    inline constexpr std::uint64_t hash_combine(std::uint64_t h, std::uint64_t v)
    {
        return mix64(h ^ mix64(v));
    }

    inline std::uint64_t hash_double(double x)
    {
        if (x == 0.0) // +0 and -0 hash alike
            x = 0.0;
        return mix64(std::bit_cast<std::uint64_t>(x));
    }

    inline std::uint64_t hash_vec(std::uint64_t h, const Vec3 &v)
    {
        h = hash_combine(h, hash_double(v.x));
        h = hash_combine(h, hash_double(v.y));
        return hash_combine(h, hash_double(v.z));
    }

    // FNV-1a, used for stream labels and scene text
    inline constexpr std::uint64_t hash_string(std::string_view s)
    {
        std::uint64_t h = 0xcbf29ce484222325ULL;
        for (unsigned char c : s)
            h = (h ^ c) * 0x100000001b3ULL;
        return h;
    }

    inline std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> keys)
    {
        std::uint64_t h = mix64(seed);
        for (auto k : keys)
            h = hash_combine(h, k);
        return h;
    }

    /// Random stream with explicitly defined transforms so that draws do not depend on the
    /// standard library's distribution implementations.
    class Rng
    {
    public:
        explicit Rng(std::uint64_t seed) : engine_(seed) {}

        /// Uniform on [0, 1).
        double uniform() { return double(engine_() >> 11) * 0x1.0p-53; }

        double uniform(double a, double b) { return a + (b - a) * uniform(); }

        /// Standard normal (Box-Muller, both values consumed in order).
        double normal()
        {
            if (has_spare_)
            {
                has_spare_ = false;
                return spare_;
            }
            double u1 = 1.0 - uniform(); // (0, 1]
            double u2 = uniform();
            double r = std::sqrt(-2.0 * std::log(u1));
            spare_ = r * std::sin(two_pi * u2);
            has_spare_ = true;
            return r * std::cos(two_pi * u2);
        }

        double normal(double mean, double sd) { return mean + sd * normal(); }

        double exponential(double mean) { return -mean * std::log(1.0 - uniform()); }

        /// Zero-mean Laplacian with the given scale parameter.
        double laplace(double scale)
        {
            double u = uniform() - 0.5;
            double s = u < 0.0 ? -1.0 : 1.0;
            return -scale * s * std::log(1.0 - 2.0 * std::abs(u));
        }

        double phase() { return two_pi * uniform(); }

        std::uint64_t next() { return engine_(); }

    private:
        std::mt19937_64 engine_;
        double spare_ = 0.0;
        bool has_spare_ = false;
    };
}

#endif
