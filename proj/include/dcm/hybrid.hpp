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

#ifndef DCM_HYBRID_HPP
#define DCM_HYBRID_HPP

#include <cstdint>
#include <span>
#include <vector>

#include "dcm/core.hpp"
#include "dcm/gbsm.hpp"
#include "dcm/mpc.hpp"

namespace dcm
{
    /// Rician factors, 1/k = 1/k_s + 1/k_d. Infinity marks an absent component.
    struct KFactors
    {
        double k = 0.0;
        double k_s = 0.0;
        double k_d = 0.0;
    };

    double compose_k(double k_s, double k_d);
    KFactors make_kfactors(double k_s, double k_d);

    inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
    inline double linear_to_db(double x) { return 10.0 * std::log10(x); }

    /// Amplitude weights of the static and dynamic CIRs.
    struct MixingWeights
    {
        double w_static = 0.0;
        double w_dynamic = 0.0;
    };

    MixingWeights mixing_weights(double k_s, double k_d);

    /// Power shares of the LoS, static NLoS and dynamic branches as produced by static_cir followed by
    /// combine_cir. A missing branch hands its share to its sibling (LoS / NLoS inside the static part,
    /// static / dynamic at the top level).
    struct BranchWeights
    {
        double los = 0.0;
        double nlos = 0.0;
        double dynamic = 0.0;
    };

    BranchWeights branch_weights(double k_s, double k_d, bool has_los, bool has_nlos, bool has_dynamic);

    /// Far-field delay of a static path seen from displaced tx / rx elements.
    inline double plane_wave_delay(const Mpc &m, const Vec3 &tx_offset, const Vec3 &rx_offset)
    {
        return m.delay - (dot(tx_offset, direction_vector(m.aod)) + dot(rx_offset, direction_vector(m.aoa))) /
                             speed_of_light;
    }

    MimoTaps static_cir(std::span<const Mpc> mpcs, const AntennaArray &tx_array, const AntennaArray &rx_array,
                        double k_s, double frequency, double mu = 1.0);

    struct ChannelSnapshot
    {
        double t = 0.0;
        Location location;
        MimoTaps taps;

        bool operator==(const ChannelSnapshot &) const = default;
    };

    ChannelSnapshot combine_cir(const MimoTaps &h_static, const MimoTaps &h_dynamic, const KFactors &k,
                                double t = 0.0, const Location &location = {});

    /// H(f) = sum_taps a e^{-j 2 pi tau (f - f_c)} for every antenna pair.
    std::vector<std::vector<complex>> ctf(const ChannelSnapshot &snapshot, std::span<const double> freq_grid,
                                          double f_c);

    complex narrowband_sum(std::span<const Tap> taps);

    struct LargeScaleFading
    {
        double path_loss_db = 0.0;
        double shadow_db = 0.0;
        std::uint64_t seed = 0;

        double linear_gain() const { return std::pow(10.0, (path_loss_db + shadow_db) / 10.0); }
    };

    LargeScaleFading large_scale_fading(double distance, double frequency, double shadow_sigma_db,
                                        std::uint64_t seed);

    ChannelSnapshot apply_lsf(const ChannelSnapshot &snapshot, double distance, double frequency,
                              double shadow_sigma_db, std::uint64_t seed);

    inline constexpr double default_shadow_sigma_db = 4.0;

    struct RicianParams
    {
        complex a;
        double sigma2 = 0.0;
    };

    /// Narrowband Rician parameters of one antenna pair.
    RicianParams rician_params(const ChannelSnapshot &snapshot, int v = 0, int u = 0);
}

#endif
