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

#ifndef DCM_MPC_HPP
#define DCM_MPC_HPP

#include <array>
#include <vector>

#include "dcm/core.hpp"

namespace dcm
{
    enum class MpcKind
    {
        los,
        reflection,
        dynamic
    };

    /// One resolved multipath component.
    struct Mpc
    {
        double delay = 0.0; // s
        double power = 0.0; // linear
        Angles aod;
        Angles aoa;
        std::array<double, 4> phases{}; // VV, VH, HV, HH (rad)
        double xpr = 1.0;               // cross polarization power ratio, linear
        MpcKind kind = MpcKind::los;
        int order = 0;   // reflection order (0 for LoS)
        int cluster = -1; // dynamic only
        int ray = -1;     // dynamic only

        bool operator==(const Mpc &) const = default;
    };

    inline bool is_static(MpcKind k) { return k != MpcKind::dynamic; }

    /// One channel tap of an antenna pair: delay plus complex amplitude and provenance.
    struct Tap
    {
        double delay = 0.0;
        complex amplitude;
        MpcKind kind = MpcKind::los;
        int order = 0;
        int cluster = -1;
        int ray = -1;
        Angles aod;
        Angles aoa;

        bool operator==(const Tap &) const = default;
    };

    /// Taps of every (tx element v, rx element u) pair, stored at index v * n_rx + u.
    struct MimoTaps
    {
        int n_tx = 1;
        int n_rx = 1;
        std::vector<std::vector<Tap>> pairs;

        MimoTaps() : pairs(1) {}
        MimoTaps(int ntx, int nrx) : n_tx(ntx), n_rx(nrx), pairs(std::size_t(ntx) * std::size_t(nrx)) {}

        std::vector<Tap> &at(int v, int u) { return pairs[std::size_t(v) * std::size_t(n_rx) + std::size_t(u)]; }
        const std::vector<Tap> &at(int v, int u) const { return pairs[std::size_t(v) * std::size_t(n_rx) + std::size_t(u)]; }

        bool operator==(const MimoTaps &) const = default;
    };
}

#endif
