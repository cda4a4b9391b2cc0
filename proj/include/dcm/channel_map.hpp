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

#ifndef DCM_CHANNEL_MAP_HPP
#define DCM_CHANNEL_MAP_HPP

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "dcm/gbsm.hpp"
#include "dcm/hybrid.hpp"
#include "dcm/mpc.hpp"
#include "dcm/raytrace.hpp"
#include "dcm/stats.hpp"

namespace dcm
{
    /// Uniform rx grid: point (i, j, k) = origin + spacing * (i, j, k).
    struct GridSpec
    {
        Vec3 origin;
        double spacing = 1.0;
        std::array<int, 3> extents{1, 1, 1};

        void validate() const;
        std::size_t size() const { return std::size_t(extents[0]) * std::size_t(extents[1]) * std::size_t(extents[2]); }
        Vec3 point(const std::array<int, 3> &idx) const;
        /// Linear order: i fastest.
        std::array<int, 3> index_of(std::size_t linear) const;
        bool operator==(const GridSpec &) const = default;
    };

    /// Static MPC in its persisted units (ns, dB, degrees). The map keeps these values verbatim so a
    /// save / load cycle is lossless.
    struct MpcRecord
    {
        MpcKind kind = MpcKind::los;
        int order = 0;
        double delay_ns = 0.0;
        double power_db = 0.0;
        std::array<double, 2> aod_deg{}; // elevation, azimuth
        std::array<double, 2> aoa_deg{};
        std::array<double, 4> phases{}; // rad
        double xpr_db = 0.0;

        static MpcRecord from_mpc(const Mpc &m);
        Mpc to_mpc() const;
        bool operator==(const MpcRecord &) const = default;
    };

    struct DcmRecord
    {
        Vec3 tx;
        Vec3 rx;
        std::array<int, 3> index{}; // rx grid index
        double k_s = 0.0;
        double k_d = 0.0;
        std::vector<MpcRecord> mpcs;

        std::vector<Mpc> static_mpcs() const;
        Location location() const { return {tx, rx}; }
        bool operator==(const DcmRecord &) const = default;
    };

    struct BuildInfo
    {
        std::uint64_t scene_hash = 0;
        int max_order = 2;
        double frequency = 5.5e9;
        bool operator==(const BuildInfo &) const = default;
    };

    struct DcmMap
    {
        int version = 1;
        GridSpec grid;
        BuildInfo build;
        GbsmConfig gbsm;
        std::vector<Vec3> tx_positions;
        std::vector<DcmRecord> records; // ordered by tx, then rx grid linear index

        /// Record index for (tx index, rx grid index), or -1.
        long find(std::size_t tx_index, const std::array<int, 3> &idx) const;
        void reindex();
        bool operator==(const DcmMap &o) const
        {
            return version == o.version && grid == o.grid && build == o.build && gbsm == o.gbsm &&
                   tx_positions == o.tx_positions && records == o.records;
        }

    private:
        std::map<std::array<long, 4>, std::size_t> lookup_;
    };

    class NotFound : public std::out_of_range
    {
    public:
        using std::out_of_range::out_of_range;
    };

    struct KDefaults
    {
        double k_s = db_to_linear(3.0);
        double k_d = db_to_linear(10.0);
    };

    DcmMap build_map(const Scene &scene, std::span<const Vec3> tx_positions, const GridSpec &grid, int max_order,
                     double frequency, const KDefaults &k = {}, const GbsmConfig &gbsm = {});

    std::string save_map(const DcmMap &map);
    DcmMap load_map(std::string_view text);
    void save_map_file(const DcmMap &map, const std::string &path);
    DcmMap load_map_file(const std::string &path);

    /// The persisted text of a single record.
    std::string format_record(const DcmRecord &record);

    const DcmRecord &query(const DcmMap &map, const Location &location, double tolerance);

    struct GbsmOverrides
    {
        std::optional<int> n_clusters;
        std::optional<int> rays_per_cluster;
        std::optional<double> cluster_speed; // sets both first- and last-bounce speeds
        std::optional<double> k_s;
        std::optional<double> k_d;
        std::optional<AngleSupport> support;
        bool operator==(const GbsmOverrides &) const = default;
    };

    /// Channel model of a stored record with overrides applied.
    ModelState model_for(const DcmMap &map, const DcmRecord &record, const GbsmOverrides &overrides,
                         std::uint64_t seed, const AntennaArray &tx_array = omni_antenna(),
                         const AntennaArray &rx_array = omni_antenna());

    ChannelSnapshot update_snapshot(const DcmMap &map, const Location &location, double t,
                                    const GbsmOverrides &overrides, std::uint64_t seed,
                                    const AntennaArray &tx_array = omni_antenna(),
                                    const AntennaArray &rx_array = omni_antenna(), double tolerance = 1e-6);

    struct MatchScales
    {
        double delay = 3.125e-9;            // s
        double angle = deg_to_rad(5.0);     // rad
    };

    struct MatchPair
    {
        std::size_t reference = 0;
        std::size_t simulated = 0;
        double distance = 0.0;
        bool operator==(const MatchPair &) const = default;
    };

    struct MatchResult
    {
        std::vector<MatchPair> pairs;
        std::vector<std::size_t> unmatched_reference;
        std::vector<std::size_t> unmatched_simulated;
        double threshold = 1.0;
        MatchScales scales;
    };

    /// Normalized Euclidean distance in the (delay, azimuth of arrival) plane.
    double mpc_distance(const Mpc &a, const Mpc &b, const MatchScales &scales);

    MatchResult match_mpcs(std::span<const Mpc> reference, std::span<const Mpc> simulated,
                           const MatchScales &scales = {}, double threshold = 1.0);

    KFactors estimate_k_split(const MatchResult &match, std::span<const Mpc> reference);

    /// CIR sampled on a uniform delay grid.
    struct SampledCir
    {
        std::vector<double> delay;
        std::vector<complex> h;
    };

    /// Sums taps into the nearest bin of `delay_grid`; taps outside the grid are dropped.
    SampledCir sample_cir(std::span<const Tap> taps, std::span<const double> delay_grid);

    /// Power of the coherent snapshot average, with bins below noise_floor_db + 6 dB set to zero.
    Psd average_delay_psd(std::span<const SampledCir> snapshots, double noise_floor_db);
}

#endif
