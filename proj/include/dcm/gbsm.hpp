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

#ifndef DCM_GBSM_HPP
#define DCM_GBSM_HPP

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "dcm/core.hpp"
#include "dcm/mpc.hpp"

namespace dcm
{
    enum class ElementPattern
    {
        isotropic_v, // F_V = 1, F_H = 0
        isotropic_h, // F_V = 0, F_H = 1
        slant_45,    // F_V = F_H = 1/sqrt(2)
        dipole_v     // vertical half-wave dipole
    };

    std::string to_string(ElementPattern p);
    ElementPattern element_pattern_from_string(const std::string &s);

    /// Uniform linear array. Element v sits at v * spacing along the orientation direction.
    struct AntennaArray
    {
        int n_elements = 1;
        double spacing = 0.0; // m
        Angles orientation;   // beta_E, beta_A
        ElementPattern pattern = ElementPattern::isotropic_v;

        void validate() const;
        Vec3 axis() const { return direction_vector(orientation); }
        Vec3 element_offset(int v) const { return axis() * (double(v) * spacing); }

        /// Field pattern (F_V, F_H) towards a global direction.
        std::array<double, 2> field(const Angles &dir) const;
    };

    AntennaArray omni_antenna();
    AntennaArray uniform_linear_array(int n, double spacing, Angles orientation = {},
                                      ElementPattern pattern = ElementPattern::isotropic_v);

    /// Complex polarization transfer F_u^T M F_v for the given phases, inverse XPR and co-polar imbalance.
    complex polarization_transfer(const std::array<double, 2> &frx, const std::array<double, 2> &ftx,
                                  const std::array<double, 4> &phases, double xpr, double mu, bool cross_terms);

    enum class AngleSupport
    {
        cone,         // uniform in the configured elevation / azimuth ranges
        follow_static // centered on a power-weighted draw of the static paths
    };

    struct AngleRange
    {
        double elevation_min = deg_to_rad(-5.0);
        double elevation_max = deg_to_rad(5.0);
        double azimuth_min = -pi;
        double azimuth_max = pi;
        bool operator==(const AngleRange &) const = default;
    };

    struct GbsmConfig
    {
        int n_clusters = 15;
        int rays_per_cluster = 10;
        double carrier_frequency = 5.5e9;
        double speed_a = 0.5; // first-bounce cluster speed (m/s)
        double speed_z = 0.5; // last-bounce cluster speed (m/s)
        double delay_decay = 500e-9;
        double virtual_delay_mean = 30e-9;
        double angle_spread_intra = deg_to_rad(5.0);
        double xpr_mean_db = 8.0;
        double xpr_std_db = 3.0;
        double mu = 1.0;
        double cluster_shadow_db = 3.0;
        double distance_min = 20.0;
        double distance_max = 200.0;
        AngleSupport support = AngleSupport::cone;
        AngleRange departure;
        AngleRange arrival;
        std::uint64_t seed = 1;

        void validate() const;
        bool operator==(const GbsmConfig &) const = default;
    };

    std::string to_string(AngleSupport s);
    AngleSupport angle_support_from_string(const std::string &s);

    struct DynamicRay
    {
        Angles departure_offset;
        Angles arrival_offset;
        double power_fraction = 0.0;
        std::array<double, 4> phases{};
        double xpr = 1.0;

        bool operator==(const DynamicRay &) const = default;
    };

    /// Paired first-bounce (A) and last-bounce (Z) cluster.
    struct DynamicCluster
    {
        int id = 0;
        double d_t0 = 0.0; // m, from tx element 1
        Angles departure;
        double d_r0 = 0.0; // m, from rx element 1
        Angles arrival;
        double speed_a = 0.0;
        Angles direction_a;
        double speed_z = 0.0;
        Angles direction_z;
        double virtual_delay = 0.0; // s
        double power = 0.0;         // share of the unit dynamic power
        std::vector<DynamicRay> rays;

        bool operator==(const DynamicCluster &) const = default;
    };

    /// Anchor vectors at time t, relative to the first tx / rx element.
    struct ClusterState
    {
        Vec3 anchor_a;
        Vec3 anchor_z;
    };

    std::vector<DynamicCluster> spawn_clusters(const GbsmConfig &config, const Location &location,
                                               std::span<const Mpc> static_mpcs = {});

    ClusterState cluster_state_at(const DynamicCluster &cluster, double t);

    /// Scatterer vectors of one ray at time t.
    ClusterState ray_state_at(const DynamicCluster &cluster, std::size_t ray, double t);

    /// Delay with arbitrary tx / rx element displacements (element offset plus any location shift).
    double ray_delay(const DynamicCluster &cluster, std::size_t ray, const Vec3 &tx_offset,
                     const Vec3 &rx_offset, double t);

    double ray_delay(const DynamicCluster &cluster, std::size_t ray, const AntennaArray &tx_array, int v,
                     const AntennaArray &rx_array, int u, double t);

    /// Taps of every ray for every antenna pair at time t.
    MimoTaps dynamic_cir(const std::vector<DynamicCluster> &clusters, const AntennaArray &tx_array,
                         const AntennaArray &rx_array, double t, const GbsmConfig &config);

    /// Largest delay rate magnitude over all rays, converted to Doppler at the carrier (Hz).
    double max_doppler(const std::vector<DynamicCluster> &clusters, double carrier_frequency);
}

#endif
