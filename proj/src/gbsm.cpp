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

#include "dcm/gbsm.hpp"

#include <algorithm>
#include <stdexcept>

#include "dcm/rng.hpp"

namespace dcm
{
    std::string to_string(ElementPattern p)
    {
        switch (p)
        {
        case ElementPattern::isotropic_v:
            return "isotropic_v";
        case ElementPattern::isotropic_h:
            return "isotropic_h";
        case ElementPattern::slant_45:
            return "slant_45";
        case ElementPattern::dipole_v:
            return "dipole_v";
        }
        return "?";
    }

    ElementPattern element_pattern_from_string(const std::string &s)
    {
        for (auto p : {ElementPattern::isotropic_v, ElementPattern::isotropic_h, ElementPattern::slant_45,
                       ElementPattern::dipole_v})
            if (to_string(p) == s)
                return p;
        throw std::invalid_argument("unknown element pattern '" + s + "'");
    }

    std::string to_string(AngleSupport s)
    {
        return s == AngleSupport::cone ? "cone" : "follow_static";
    }

    AngleSupport angle_support_from_string(const std::string &s)
    {
        if (s == "cone")
            return AngleSupport::cone;
        if (s == "follow_static")
            return AngleSupport::follow_static;
        throw std::invalid_argument("unknown angle support '" + s + "'");
    }

    void AntennaArray::validate() const
    {
        if (n_elements < 1)
            throw std::invalid_argument("antenna array needs at least one element");
        if (n_elements > 1 && !(spacing > 0.0))
            throw std::invalid_argument("antenna spacing must be > 0");
    }

    std::array<double, 2> AntennaArray::field(const Angles &dir) const
    {
        switch (pattern)
        {
        case ElementPattern::isotropic_v:
            return {1.0, 0.0};
        case ElementPattern::isotropic_h:
            return {0.0, 1.0};
        case ElementPattern::slant_45:
            return {std::sqrt(0.5), std::sqrt(0.5)};
        case ElementPattern::dipole_v:
        {
            const double ce = std::cos(dir.elevation);
            if (ce < 1e-12)
                return {0.0, 0.0};
            return {std::cos(0.5 * pi * std::sin(dir.elevation)) / ce, 0.0};
        }
        }
        return {0.0, 0.0};
    }

    AntennaArray omni_antenna() { return {}; }

    AntennaArray uniform_linear_array(int n, double spacing, Angles orientation, ElementPattern pattern)
    {
        AntennaArray a{n, spacing, orientation, pattern};
        a.validate();
        return a;
    }

    complex polarization_transfer(const std::array<double, 2> &frx, const std::array<double, 2> &ftx,
                                  const std::array<double, 4> &phases, double xpr, double mu, bool cross_terms)
    {
        const complex m_vv = std::polar(1.0, phases[0]);
        const complex m_hh = std::polar(std::sqrt(mu), phases[3]);
        complex m_vh = 0.0, m_hv = 0.0;
        if (cross_terms)
        {
            m_vh = std::polar(std::sqrt(mu / xpr), phases[1]);
            m_hv = std::polar(std::sqrt(1.0 / xpr), phases[2]);
        }
        // [F_uV F_uH] [[vv vh] [hv hh]] [F_vV F_vH]^T
        return frx[0] * (m_vv * ftx[0] + m_vh * ftx[1]) + frx[1] * (m_hv * ftx[0] + m_hh * ftx[1]);
    }

    void GbsmConfig::validate() const
    {
        if (n_clusters < 0)
            throw std::invalid_argument("n_clusters must be >= 0");
        if (rays_per_cluster < 1)
            throw std::invalid_argument("rays_per_cluster must be >= 1");
        if (!(carrier_frequency > 0.0))
            throw std::invalid_argument("carrier_frequency must be > 0");
        if (!(speed_a >= 0.0) || !(speed_z >= 0.0))
            throw std::invalid_argument("cluster speeds must be >= 0");
        if (!(delay_decay > 0.0) || !(virtual_delay_mean > 0.0) || !(angle_spread_intra > 0.0))
            throw std::invalid_argument("delay_decay, virtual_delay_mean and angle_spread_intra must be > 0");
        if (!(xpr_std_db >= 0.0) || !(cluster_shadow_db >= 0.0))
            throw std::invalid_argument("standard deviations must be >= 0");
        if (!(mu > 0.0))
            throw std::invalid_argument("mu must be > 0");
        if (!(distance_min > 0.0) || !(distance_max >= distance_min))
            throw std::invalid_argument("cluster distance range invalid");
        for (const auto *r : {&departure, &arrival})
            if (!(r->elevation_max >= r->elevation_min) || !(r->azimuth_max >= r->azimuth_min))
                throw std::invalid_argument("angle range invalid");
    }

    namespace
    {
        Angles draw_in_range(Rng &rng, const AngleRange &r)
        {
            return {rng.uniform(r.elevation_min, r.elevation_max),
                    wrap_angle(rng.uniform(r.azimuth_min, r.azimuth_max))};
        }

        Angles offset_angles(const Angles &center, const Angles &offset)
        {
            return {std::clamp(center.elevation + offset.elevation, -0.5 * pi, 0.5 * pi),
                    wrap_angle(center.azimuth + offset.azimuth)};
        }

        std::uint64_t location_hash(const Location &loc)
        {
            return hash_vec(hash_vec(hash_string("location"), loc.tx), loc.rx);
        }
    }

    std::vector<DynamicCluster> spawn_clusters(const GbsmConfig &config, const Location &location,
                                               std::span<const Mpc> static_mpcs)
    {
        config.validate();
        const std::uint64_t lh = location_hash(location);

        double static_total = 0.0;
        for (const auto &m : static_mpcs)
            static_total += m.power;
        const bool follow = config.support == AngleSupport::follow_static && static_total > 0.0;

        std::vector<DynamicCluster> clusters(std::size_t(config.n_clusters));
        std::vector<double> ref_delay(clusters.size()), shadow(clusters.size());
        for (int n = 0; n < config.n_clusters; ++n)
        {
            Rng rng(derive_seed(config.seed, {lh, std::uint64_t(n)}));
            DynamicCluster &c = clusters[std::size_t(n)];
            c.id = n;
            c.d_t0 = rng.uniform(config.distance_min, config.distance_max);
            c.d_r0 = rng.uniform(config.distance_min, config.distance_max);
            if (follow)
            {
                double u = rng.uniform() * static_total, acc = 0.0;
                std::size_t pick = static_mpcs.size() - 1;
                for (std::size_t k = 0; k < static_mpcs.size(); ++k)
                {
                    acc += static_mpcs[k].power;
                    if (u < acc)
                    {
                        pick = k;
                        break;
                    }
                }
                c.departure = static_mpcs[pick].aod;
                c.arrival = static_mpcs[pick].aoa;
            }
            else
            {
                c.departure = draw_in_range(rng, config.departure);
                c.arrival = draw_in_range(rng, config.arrival);
            }
            c.speed_a = config.speed_a;
            c.direction_a = {0.0, wrap_angle(rng.uniform(-pi, pi))};
            c.speed_z = config.speed_z;
            c.direction_z = {0.0, wrap_angle(rng.uniform(-pi, pi))};
            c.virtual_delay = rng.exponential(config.virtual_delay_mean);
            shadow[std::size_t(n)] = rng.normal(0.0, config.cluster_shadow_db);
            ref_delay[std::size_t(n)] = (c.d_t0 + c.d_r0) / speed_of_light + c.virtual_delay;

            c.rays.resize(std::size_t(config.rays_per_cluster));
            for (int m = 0; m < config.rays_per_cluster; ++m)
            {
                Rng rr(derive_seed(config.seed, {lh, std::uint64_t(n), std::uint64_t(m) + 1}));
                DynamicRay &r = c.rays[std::size_t(m)];
                const double s = config.angle_spread_intra;
                r.departure_offset = {rr.laplace(s), rr.laplace(s)};
                r.arrival_offset = {rr.laplace(s), rr.laplace(s)};
                r.power_fraction = 1.0 / double(config.rays_per_cluster);
                for (auto &p : r.phases)
                    p = rr.phase();
                r.xpr = std::pow(10.0, rr.normal(config.xpr_mean_db, config.xpr_std_db) / 10.0);
            }
        }

        if (!clusters.empty())
        {
            const double tmin = *std::min_element(ref_delay.begin(), ref_delay.end());
            double total = 0.0;
            for (std::size_t n = 0; n < clusters.size(); ++n)
            {
                clusters[n].power = std::exp(-(ref_delay[n] - tmin) / config.delay_decay) *
                                    std::pow(10.0, shadow[n] / 10.0);
                total += clusters[n].power;
            }
            for (auto &c : clusters)
                c.power /= total;
        }
        return clusters;
    }

    ClusterState cluster_state_at(const DynamicCluster &c, double t)
    {
        if (!(t >= 0.0))
            throw std::invalid_argument("t must be >= 0");
        return {direction_vector(c.departure) * c.d_t0 + direction_vector(c.direction_a) * (c.speed_a * t),
                direction_vector(c.arrival) * c.d_r0 + direction_vector(c.direction_z) * (c.speed_z * t)};
    }

    ClusterState ray_state_at(const DynamicCluster &c, std::size_t ray, double t)
    {
        if (!(t >= 0.0))
            throw std::invalid_argument("t must be >= 0");
        const DynamicRay &r = c.rays.at(ray);
        return {direction_vector(offset_angles(c.departure, r.departure_offset)) * c.d_t0 +
                    direction_vector(c.direction_a) * (c.speed_a * t),
                direction_vector(offset_angles(c.arrival, r.arrival_offset)) * c.d_r0 +
                    direction_vector(c.direction_z) * (c.speed_z * t)};
    }

    double ray_delay(const DynamicCluster &c, std::size_t ray, const Vec3 &tx_offset, const Vec3 &rx_offset,
                     double t)
    {
        const ClusterState s = ray_state_at(c, ray, t);
        return (norm(s.anchor_a - tx_offset) + norm(s.anchor_z - rx_offset)) / speed_of_light + c.virtual_delay;
    }

    double ray_delay(const DynamicCluster &c, std::size_t ray, const AntennaArray &tx_array, int v,
                     const AntennaArray &rx_array, int u, double t)
    {
        return ray_delay(c, ray, tx_array.element_offset(v), rx_array.element_offset(u), t);
    }

    MimoTaps dynamic_cir(const std::vector<DynamicCluster> &clusters, const AntennaArray &tx_array,
                         const AntennaArray &rx_array, double t, const GbsmConfig &config)
    {
        tx_array.validate();
        rx_array.validate();
        MimoTaps out(tx_array.n_elements, rx_array.n_elements);
        const double fc = config.carrier_frequency;
        for (int v = 0; v < tx_array.n_elements; ++v)
        {
            const Vec3 lt = tx_array.element_offset(v);
            for (int u = 0; u < rx_array.n_elements; ++u)
            {
                const Vec3 lr = rx_array.element_offset(u);
                auto &taps = out.at(v, u);
                for (const auto &c : clusters)
                    for (std::size_t m = 0; m < c.rays.size(); ++m)
                    {
                        const ClusterState s = ray_state_at(c, m, t);
                        const Vec3 dt = s.anchor_a - lt, dr = s.anchor_z - lr;
                        const double tau = (norm(dt) + norm(dr)) / speed_of_light + c.virtual_delay;
                        const Angles aod = direction_angles(dt), aoa = direction_angles(dr);
                        const DynamicRay &r = c.rays[m];
                        const complex pol = polarization_transfer(rx_array.field(aoa), tx_array.field(aod), r.phases,
                                                                  r.xpr, config.mu, true);
                        Tap tap;
                        tap.delay = tau;
                        tap.amplitude = std::sqrt(c.power * r.power_fraction) * pol * std::polar(1.0, two_pi * fc * tau);
                        tap.kind = MpcKind::dynamic;
                        tap.cluster = c.id;
                        tap.ray = int(m);
                        tap.aod = aod;
                        tap.aoa = aoa;
                        taps.push_back(tap);
                    }
                std::stable_sort(taps.begin(), taps.end(), [](const Tap &a, const Tap &b)
                                 { return a.delay < b.delay; });
            }
        }
        return out;
    }

    double max_doppler(const std::vector<DynamicCluster> &clusters, double carrier_frequency)
    {
        // |d tau / dt| <= (v_a + v_z) / c for constant velocities
        double vmax = 0.0;
        for (const auto &c : clusters)
            vmax = std::max(vmax, c.speed_a + c.speed_z);
        return vmax * carrier_frequency / speed_of_light;
    }
}
