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

#include "dcm/hybrid.hpp"

#include <algorithm>
#include <stdexcept>

#include "dcm/raytrace.hpp"
#include "dcm/rng.hpp"

namespace dcm
{
    namespace
    {
        void check_k(double k_s, double k_d)
        {
            if (!(k_s > 0.0) || !(k_d > 0.0))
                throw std::invalid_argument("K factors must be > 0");
        }
    }

    double compose_k(double k_s, double k_d)
    {
        check_k(k_s, k_d);
        if (std::isinf(k_s))
            return k_d;
        if (std::isinf(k_d))
            return k_s;
        return 1.0 / (1.0 / k_s + 1.0 / k_d);
    }

    KFactors make_kfactors(double k_s, double k_d)
    {
        return {compose_k(k_s, k_d), k_s, k_d};
    }

    MixingWeights mixing_weights(double k_s, double k_d)
    {
        check_k(k_s, k_d);
        const double is = 1.0 / k_s, id = 1.0 / k_d;
        const double den = is + id + 1.0;
        return {std::sqrt((is + 1.0) / den), std::sqrt(id / den)};
    }

    BranchWeights branch_weights(double k_s, double k_d, bool has_los, bool has_nlos, bool has_dynamic)
    {
        check_k(k_s, k_d);
        // split of the static part when one of its two branches is missing
        double los = 0.0, nlos = 0.0;
        if (has_los && has_nlos)
        {
            los = 1.0 / (1.0 / k_s + 1.0);
            nlos = 1.0 - los;
        }
        else if (has_los)
            los = 1.0;
        else if (has_nlos)
            nlos = 1.0;

        const bool has_static = has_los || has_nlos;
        double ws = 0.0, wd = 0.0;
        if (has_static && has_dynamic)
        {
            const auto mw = mixing_weights(k_s, k_d);
            ws = mw.w_static * mw.w_static;
            wd = mw.w_dynamic * mw.w_dynamic;
        }
        else if (has_static)
            ws = 1.0;
        else if (has_dynamic)
            wd = 1.0;
        return {ws * los, ws * nlos, wd};
    }

    MimoTaps static_cir(std::span<const Mpc> mpcs, const AntennaArray &tx_array, const AntennaArray &rx_array,
                        double k_s, double frequency, double mu)
    {
        if (!(k_s > 0.0))
            throw std::invalid_argument("k_s must be > 0");
        tx_array.validate();
        rx_array.validate();

        int n_los = 0;
        double nlos_total = 0.0;
        for (const auto &m : mpcs)
        {
            if (m.kind == MpcKind::los)
                ++n_los;
            else
                nlos_total += m.power;
        }
        if (n_los > 1)
            throw std::invalid_argument("more than one LoS component");
        const bool has_nlos = nlos_total > 0.0;
        const BranchWeights w = branch_weights(k_s, 1.0, n_los == 1, has_nlos, false);

        MimoTaps out(tx_array.n_elements, rx_array.n_elements);
        for (int v = 0; v < tx_array.n_elements; ++v)
            for (int u = 0; u < rx_array.n_elements; ++u)
            {
                auto &taps = out.at(v, u);
                const Vec3 lt = tx_array.element_offset(v), lr = rx_array.element_offset(u);
                for (const auto &m : mpcs)
                {
                    const bool los = m.kind == MpcKind::los;
                    double p;
                    if (los)
                        p = w.los;
                    else if (has_nlos)
                        p = w.nlos * m.power / nlos_total;
                    else
                        continue;
                    const double tau = plane_wave_delay(m, lt, lr);
                    const complex pol = polarization_transfer(rx_array.field(m.aoa), tx_array.field(m.aod), m.phases,
                                                              m.xpr, los ? 1.0 : mu, !los);
                    Tap tap;
                    tap.delay = tau;
                    tap.amplitude = std::sqrt(p) * pol * std::polar(1.0, two_pi * frequency * tau);
                    tap.kind = m.kind;
                    tap.order = m.order;
                    tap.aod = m.aod;
                    tap.aoa = m.aoa;
                    taps.push_back(tap);
                }
                std::stable_sort(taps.begin(), taps.end(), [](const Tap &a, const Tap &b)
                                 { return a.delay < b.delay; });
            }
        return out;
    }

    namespace
    {
        bool any_taps(const MimoTaps &m)
        {
            for (const auto &p : m.pairs)
                if (!p.empty())
                    return true;
            return false;
        }
    }

    ChannelSnapshot combine_cir(const MimoTaps &h_static, const MimoTaps &h_dynamic, const KFactors &k, double t,
                                const Location &location)
    {
        const bool has_s = any_taps(h_static), has_d = any_taps(h_dynamic);
        if (has_s && has_d && (h_static.n_tx != h_dynamic.n_tx || h_static.n_rx != h_dynamic.n_rx))
            throw std::invalid_argument("static and dynamic responses have different array sizes");

        double ws = 0.0, wd = 0.0;
        if (has_s && has_d)
        {
            const auto mw = mixing_weights(k.k_s, k.k_d);
            ws = mw.w_static;
            wd = mw.w_dynamic;
        }
        else if (has_s)
            ws = 1.0;
        else if (has_d)
            wd = 1.0;

        const MimoTaps &shape = has_s ? h_static : h_dynamic;
        ChannelSnapshot snap;
        snap.t = t;
        snap.location = location;
        snap.taps = MimoTaps(shape.n_tx, shape.n_rx);
        for (std::size_t i = 0; i < snap.taps.pairs.size(); ++i)
        {
            auto &out = snap.taps.pairs[i];
            if (has_s)
                for (auto tap : h_static.pairs[i])
                {
                    tap.amplitude *= ws;
                    out.push_back(tap);
                }
            if (has_d)
                for (auto tap : h_dynamic.pairs[i])
                {
                    tap.amplitude *= wd;
                    out.push_back(tap);
                }
            std::stable_sort(out.begin(), out.end(), [](const Tap &a, const Tap &b)
                             { return a.delay < b.delay; });
        }
        return snap;
    }

    std::vector<std::vector<complex>> ctf(const ChannelSnapshot &snapshot, std::span<const double> freq_grid,
                                          double f_c)
    {
        if (freq_grid.empty())
            throw std::invalid_argument("frequency grid is empty");
        std::vector<std::vector<complex>> out;
        out.reserve(snapshot.taps.pairs.size());
        for (const auto &taps : snapshot.taps.pairs)
        {
            std::vector<complex> h(freq_grid.size());
            for (std::size_t i = 0; i < freq_grid.size(); ++i)
            {
                const double df = freq_grid[i] - f_c;
                complex acc = 0.0;
                for (const auto &tap : taps)
                    acc += tap.amplitude * std::polar(1.0, -two_pi * tap.delay * df);
                h[i] = acc;
            }
            out.push_back(std::move(h));
        }
        return out;
    }

    complex narrowband_sum(std::span<const Tap> taps)
    {
        complex acc = 0.0;
        for (const auto &t : taps)
            acc += t.amplitude;
        return acc;
    }

    LargeScaleFading large_scale_fading(double distance, double frequency, double shadow_sigma_db,
                                        std::uint64_t seed)
    {
        if (!(distance > 0.0))
            throw std::invalid_argument("distance must be > 0");
        if (!(shadow_sigma_db >= 0.0))
            throw std::invalid_argument("shadow sigma must be >= 0");
        LargeScaleFading lsf;
        lsf.path_loss_db = friis_path_gain(distance, frequency);
        lsf.seed = seed;
        Rng rng(derive_seed(seed, {hash_string("shadow")}));
        lsf.shadow_db = shadow_sigma_db * rng.normal();
        return lsf;
    }

    ChannelSnapshot apply_lsf(const ChannelSnapshot &snapshot, double distance, double frequency,
                              double shadow_sigma_db, std::uint64_t seed)
    {
        const double scale = std::sqrt(large_scale_fading(distance, frequency, shadow_sigma_db, seed).linear_gain());
        ChannelSnapshot out = snapshot;
        for (auto &p : out.taps.pairs)
            for (auto &tap : p)
                tap.amplitude *= scale;
        return out;
    }

    RicianParams rician_params(const ChannelSnapshot &snapshot, int v, int u)
    {
        RicianParams r;
        double dyn_power = 0.0;
        for (const auto &tap : snapshot.taps.at(v, u))
        {
            if (is_static(tap.kind))
                r.a += tap.amplitude;
            else
                dyn_power += std::norm(tap.amplitude);
        }
        r.sigma2 = 0.5 * dyn_power;
        return r;
    }
}
