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

#include "dcm/channel_map.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "dcm/parallel.hpp"
#include "dcm/text.hpp"

namespace dcm
{
    void GridSpec::validate() const
    {
        if (!(spacing > 0.0) || std::isinf(spacing))
            throw std::invalid_argument("grid spacing must be > 0");
        for (int e : extents)
            if (e < 1)
                throw std::invalid_argument("grid extents must be >= 1");
    }

    Vec3 GridSpec::point(const std::array<int, 3> &idx) const
    {
        return {origin.x + spacing * idx[0], origin.y + spacing * idx[1], origin.z + spacing * idx[2]};
    }

    std::array<int, 3> GridSpec::index_of(std::size_t linear) const
    {
        const std::size_t nx = std::size_t(extents[0]), ny = std::size_t(extents[1]);
        return {int(linear % nx), int((linear / nx) % ny), int(linear / (nx * ny))};
    }

    MpcRecord MpcRecord::from_mpc(const Mpc &m)
    {
        if (!is_static(m.kind))
            throw std::invalid_argument("only static MPCs can be stored in a map record");
        if (!(m.power > 0.0))
            throw std::invalid_argument("stored MPC power must be > 0");
        MpcRecord r;
        r.kind = m.kind;
        r.order = m.order;
        r.delay_ns = m.delay * 1e9;
        r.power_db = linear_to_db(m.power);
        r.aod_deg = {rad_to_deg(m.aod.elevation), rad_to_deg(m.aod.azimuth)};
        r.aoa_deg = {rad_to_deg(m.aoa.elevation), rad_to_deg(m.aoa.azimuth)};
        r.phases = m.phases;
        r.xpr_db = linear_to_db(m.xpr);
        return r;
    }

    Mpc MpcRecord::to_mpc() const
    {
        Mpc m;
        m.kind = kind;
        m.order = order;
        m.delay = delay_ns * 1e-9;
        m.power = db_to_linear(power_db);
        m.aod = {deg_to_rad(aod_deg[0]), deg_to_rad(aod_deg[1])};
        m.aoa = {deg_to_rad(aoa_deg[0]), deg_to_rad(aoa_deg[1])};
        m.phases = phases;
        m.xpr = db_to_linear(xpr_db);
        return m;
    }

    std::vector<Mpc> DcmRecord::static_mpcs() const
    {
        std::vector<Mpc> out;
        out.reserve(mpcs.size());
        for (const auto &r : mpcs)
            out.push_back(r.to_mpc());
        return out;
    }

    long DcmMap::find(std::size_t tx_index, const std::array<int, 3> &idx) const
    {
        auto it = lookup_.find({long(tx_index), idx[0], idx[1], idx[2]});
        return it == lookup_.end() ? -1 : long(it->second);
    }

    void DcmMap::reindex()
    {
        lookup_.clear();
        for (std::size_t r = 0; r < records.size(); ++r)
        {
            const auto &rec = records[r];
            auto tx = std::find(tx_positions.begin(), tx_positions.end(), rec.tx);
            if (tx == tx_positions.end())
                throw std::invalid_argument("record tx is not in the tx list");
            const std::array<long, 4> key{long(tx - tx_positions.begin()), rec.index[0], rec.index[1], rec.index[2]};
            if (!lookup_.emplace(key, r).second)
                throw std::invalid_argument("duplicate record key");
        }
    }

    DcmMap build_map(const Scene &scene, std::span<const Vec3> tx_positions, const GridSpec &grid, int max_order,
                     double frequency, const KDefaults &k, const GbsmConfig &gbsm)
    {
        grid.validate();
        gbsm.validate();
        if (tx_positions.empty())
            throw std::invalid_argument("at least one tx position is required");
        if (!(k.k_s > 0.0) || !(k.k_d > 0.0))
            throw std::invalid_argument("K factors must be > 0");
        if (gbsm.carrier_frequency != frequency)
            throw std::invalid_argument("tracer frequency and gbsm carrier frequency differ");

        DcmMap map;
        map.grid = grid;
        map.build = {scene_hash(scene), max_order, frequency};
        map.gbsm = gbsm;
        for (const auto &tx : tx_positions)
            if (std::find(map.tx_positions.begin(), map.tx_positions.end(), tx) == map.tx_positions.end())
                map.tx_positions.push_back(tx);

        const std::size_t n_rx = grid.size();
        map.records.resize(map.tx_positions.size() * n_rx);
        parallel_for(map.records.size(), [&](std::size_t i)
                     {
            auto &rec = map.records[i];
            rec.tx = map.tx_positions[i / n_rx];
            rec.index = grid.index_of(i % n_rx);
            rec.rx = grid.point(rec.index);
            rec.k_s = k.k_s;
            rec.k_d = k.k_d;
            for (const auto &m : trace_static_mpcs(scene, rec.tx, rec.rx, max_order, frequency))
                rec.mpcs.push_back(MpcRecord::from_mpc(m)); });
        map.reindex();
        return map;
    }

    namespace
    {
        std::string vec_text(const Vec3 &v)
        {
            return format_exact(v.x) + "," + format_exact(v.y) + "," + format_exact(v.z);
        }

        std::string angle_range_text(const AngleRange &r)
        {
            return format_exact(r.elevation_min) + "," + format_exact(r.elevation_max) + "," +
                   format_exact(r.azimuth_min) + "," + format_exact(r.azimuth_max);
        }

        AngleRange parse_angle_range(std::string_view s)
        {
            auto v = parse_doubles(s);
            if (v.size() != 4)
                throw std::invalid_argument("angle range needs 4 values");
            return {v[0], v[1], v[2], v[3]};
        }

        std::string kind_text(const MpcRecord &r)
        {
            if (r.kind == MpcKind::los)
                return "los";
            return "refl:" + std::to_string(r.order);
        }

        template <std::size_t N>
        std::array<double, N> parse_fixed(std::string_view s, const char *what)
        {
            auto v = parse_doubles(s);
            if (v.size() != N)
                throw std::invalid_argument(std::string(what) + " needs " + std::to_string(N) + " values");
            std::array<double, N> out{};
            std::copy(v.begin(), v.end(), out.begin());
            return out;
        }

        std::string gbsm_text(const GbsmConfig &g)
        {
            std::ostringstream s;
            s << "[gbsm] n_clusters=" << g.n_clusters << " rays_per_cluster=" << g.rays_per_cluster
              << " carrier_frequency=" << format_exact(g.carrier_frequency) << " speed_a=" << format_exact(g.speed_a)
              << " speed_z=" << format_exact(g.speed_z) << " delay_decay=" << format_exact(g.delay_decay)
              << " virtual_delay_mean=" << format_exact(g.virtual_delay_mean)
              << " angle_spread_intra=" << format_exact(g.angle_spread_intra)
              << " xpr_mean_db=" << format_exact(g.xpr_mean_db) << " xpr_std_db=" << format_exact(g.xpr_std_db)
              << " mu=" << format_exact(g.mu) << " cluster_shadow_db=" << format_exact(g.cluster_shadow_db)
              << " distance_min=" << format_exact(g.distance_min) << " distance_max=" << format_exact(g.distance_max)
              << " support=" << to_string(g.support) << " departure=" << angle_range_text(g.departure)
              << " arrival=" << angle_range_text(g.arrival) << " seed=" << g.seed << "\n";
            return s.str();
        }

        GbsmConfig parse_gbsm(KeyValues &kv)
        {
            GbsmConfig g;
            g.n_clusters = int(parse_int(kv.take("n_clusters")));
            g.rays_per_cluster = int(parse_int(kv.take("rays_per_cluster")));
            g.carrier_frequency = parse_double(kv.take("carrier_frequency"));
            g.speed_a = parse_double(kv.take("speed_a"));
            g.speed_z = parse_double(kv.take("speed_z"));
            g.delay_decay = parse_double(kv.take("delay_decay"));
            g.virtual_delay_mean = parse_double(kv.take("virtual_delay_mean"));
            g.angle_spread_intra = parse_double(kv.take("angle_spread_intra"));
            g.xpr_mean_db = parse_double(kv.take("xpr_mean_db"));
            g.xpr_std_db = parse_double(kv.take("xpr_std_db"));
            g.mu = parse_double(kv.take("mu"));
            g.cluster_shadow_db = parse_double(kv.take("cluster_shadow_db"));
            g.distance_min = parse_double(kv.take("distance_min"));
            g.distance_max = parse_double(kv.take("distance_max"));
            g.support = angle_support_from_string(kv.take("support"));
            g.departure = parse_angle_range(kv.take("departure"));
            g.arrival = parse_angle_range(kv.take("arrival"));
            g.seed = parse_uint(kv.take("seed"));
            kv.expect_empty();
            g.validate();
            return g;
        }

        MpcRecord parse_mpc(KeyValues &kv)
        {
            MpcRecord r;
            const std::string kind = kv.take("kind");
            if (kind == "los")
            {
                r.kind = MpcKind::los;
                r.order = 0;
            }
            else if (kind.rfind("refl:", 0) == 0)
            {
                r.kind = MpcKind::reflection;
                r.order = int(parse_int(std::string_view(kind).substr(5)));
                if (r.order < 1)
                    throw std::invalid_argument("reflection order must be >= 1");
            }
            else
                throw std::invalid_argument("unknown mpc kind '" + kind + "'");
            r.delay_ns = parse_double(kv.take("delay_ns"));
            r.power_db = parse_double(kv.take("power_db"));
            r.aod_deg = parse_fixed<2>(kv.take("aod"), "aod");
            r.aoa_deg = parse_fixed<2>(kv.take("aoa"), "aoa");
            r.phases = parse_fixed<4>(kv.take("phases"), "phases");
            r.xpr_db = parse_double(kv.take("xpr_db"));
            kv.expect_empty();
            if (!(r.delay_ns > 0.0) || !std::isfinite(r.power_db))
                throw std::invalid_argument("mpc delay must be > 0 and power finite");
            return r;
        }
    }

    std::string format_record(const DcmRecord &record)
    {
        std::string out = "[record] tx=" + vec_text(record.tx) + " rx=" + vec_text(record.rx) +
                          " ks=" + format_exact(record.k_s) + " kd=" + format_exact(record.k_d) + "\n";
        for (const auto &m : record.mpcs)
        {
            out += "mpc kind=" + kind_text(m) + " delay_ns=" + format_exact(m.delay_ns) +
                   " power_db=" + format_exact(m.power_db) + " aod=" + format_exact(m.aod_deg[0]) + "," +
                   format_exact(m.aod_deg[1]) + " aoa=" + format_exact(m.aoa_deg[0]) + "," +
                   format_exact(m.aoa_deg[1]) + " phases=";
            for (std::size_t i = 0; i < 4; ++i)
                out += (i ? "," : "") + format_exact(m.phases[i]);
            out += " xpr_db=" + format_exact(m.xpr_db) + "\n";
        }
        return out;
    }

    std::string save_map(const DcmMap &map)
    {
        std::string out = "DCMv1\n";
        out += "[grid] origin=" + vec_text(map.grid.origin) + " spacing=" + format_exact(map.grid.spacing) +
               " extents=" + std::to_string(map.grid.extents[0]) + "," + std::to_string(map.grid.extents[1]) +
               "," + std::to_string(map.grid.extents[2]) + "\n";
        out += "[build] scene_hash=" + std::to_string(map.build.scene_hash) +
               " max_order=" + std::to_string(map.build.max_order) +
               " frequency=" + format_exact(map.build.frequency) + "\n";
        out += gbsm_text(map.gbsm);
        for (const auto &tx : map.tx_positions)
            out += "[tx] pos=" + vec_text(tx) + "\n";
        for (const auto &r : map.records)
            out += format_record(r);
        return out;
    }

    DcmMap load_map(std::string_view text)
    {
        DcmMap map;
        bool seen_header = false, seen_grid = false, seen_build = false, seen_gbsm = false;
        DcmRecord *current = nullptr;
        std::size_t line_no = 0;
        for (const auto &raw : split_lines(text))
        {
            ++line_no;
            auto line = strip_comment(raw);
            if (line.empty())
                continue;
            try
            {
                if (!seen_header)
                {
                    if (line != "DCMv1")
                        throw std::invalid_argument("expected DCMv1 header");
                    seen_header = true;
                    continue;
                }
                auto tokens = split_ws(line);
                const std::string_view tag = tokens[0];
                KeyValues kv = parse_key_values(tokens, 1);
                if (tag == "[grid]")
                {
                    if (seen_grid || !map.records.empty())
                        throw std::invalid_argument("misplaced [grid] section");
                    map.grid.origin = parse_vec3(kv.take("origin"));
                    map.grid.spacing = parse_double(kv.take("spacing"));
                    auto e = parse_doubles(kv.take("extents"));
                    if (e.size() != 3)
                        throw std::invalid_argument("extents needs 3 values");
                    for (int i = 0; i < 3; ++i)
                    {
                        if (e[std::size_t(i)] != std::floor(e[std::size_t(i)]))
                            throw std::invalid_argument("extents must be integers");
                        map.grid.extents[std::size_t(i)] = int(e[std::size_t(i)]);
                    }
                    kv.expect_empty();
                    map.grid.validate();
                    seen_grid = true;
                }
                else if (tag == "[build]")
                {
                    if (seen_build || !map.records.empty())
                        throw std::invalid_argument("misplaced [build] section");
                    map.build.scene_hash = parse_uint(kv.take("scene_hash"));
                    map.build.max_order = int(parse_int(kv.take("max_order")));
                    map.build.frequency = parse_double(kv.take("frequency"));
                    kv.expect_empty();
                    seen_build = true;
                }
                else if (tag == "[gbsm]")
                {
                    if (seen_gbsm || !map.records.empty())
                        throw std::invalid_argument("misplaced [gbsm] section");
                    map.gbsm = parse_gbsm(kv);
                    seen_gbsm = true;
                }
                else if (tag == "[tx]")
                {
                    if (!map.records.empty())
                        throw std::invalid_argument("[tx] must precede records");
                    const Vec3 p = parse_vec3(kv.take("pos"));
                    kv.expect_empty();
                    if (std::find(map.tx_positions.begin(), map.tx_positions.end(), p) != map.tx_positions.end())
                        throw std::invalid_argument("duplicate tx position");
                    map.tx_positions.push_back(p);
                }
                else if (tag == "[record]")
                {
                    if (!seen_grid || !seen_build || !seen_gbsm)
                        throw std::invalid_argument("[grid], [build] and [gbsm] must precede records");
                    DcmRecord rec;
                    rec.tx = parse_vec3(kv.take("tx"));
                    rec.rx = parse_vec3(kv.take("rx"));
                    rec.k_s = parse_double(kv.take("ks"));
                    rec.k_d = parse_double(kv.take("kd"));
                    kv.expect_empty();
                    if (!(rec.k_s > 0.0) || !(rec.k_d > 0.0))
                        throw std::invalid_argument("ks and kd must be > 0");
                    if (std::find(map.tx_positions.begin(), map.tx_positions.end(), rec.tx) == map.tx_positions.end())
                        throw std::invalid_argument("record tx is not a declared [tx] position");
                    const Vec3 rel = (rec.rx - map.grid.origin) * (1.0 / map.grid.spacing);
                    const double c[3] = {rel.x, rel.y, rel.z};
                    for (std::size_t i = 0; i < 3; ++i)
                    {
                        const double r = std::round(c[i]);
                        if (std::abs(c[i] - r) > 1e-9 || r < 0 || r >= map.grid.extents[i])
                            throw std::invalid_argument("record rx is not on the grid");
                        rec.index[i] = int(r);
                    }
                    map.records.push_back(std::move(rec));
                    current = &map.records.back();
                }
                else if (tag == "mpc")
                {
                    if (!current)
                        throw std::invalid_argument("mpc line outside a record");
                    current->mpcs.push_back(parse_mpc(kv));
                    if (current->mpcs.back().kind == MpcKind::los &&
                        std::count_if(current->mpcs.begin(), current->mpcs.end(), [](const MpcRecord &m)
                                      { return m.kind == MpcKind::los; }) > 1)
                        throw std::invalid_argument("more than one LoS component in a record");
                }
                else
                    throw std::invalid_argument("unknown section '" + std::string(tag) + "'");
            }
            catch (const ParseError &)
            {
                throw;
            }
            catch (const std::invalid_argument &e)
            {
                throw ParseError(line_no, e.what());
            }
        }
        if (!seen_header)
            throw ParseError(line_no, "empty map file");
        if (!seen_grid || !seen_build || !seen_gbsm)
            throw ParseError(line_no, "map is missing [grid], [build] or [gbsm]");
        try
        {
            map.reindex();
        }
        catch (const std::invalid_argument &e)
        {
            throw ParseError(line_no, e.what());
        }
        return map;
    }

    void save_map_file(const DcmMap &map, const std::string &path)
    {
        write_file_atomic(path, save_map(map));
    }

    DcmMap load_map_file(const std::string &path)
    {
        return load_map(read_file(path));
    }

    namespace
    {
        double location_distance(const Location &a, const Location &b)
        {
            const Vec3 dt = a.tx - b.tx, dr = a.rx - b.rx;
            return std::sqrt(dot(dt, dt) + dot(dr, dr));
        }
    }

    const DcmRecord &query(const DcmMap &map, const Location &location, double tolerance)
    {
        if (!(tolerance >= 0.0))
            throw std::invalid_argument("tolerance must be >= 0");
        if (map.records.empty())
            throw NotFound("map has no records");

        long hit = -1;
        if (!map.tx_positions.empty())
        {
            std::size_t best_tx = 0;
            double best = std::numeric_limits<double>::infinity();
            for (std::size_t i = 0; i < map.tx_positions.size(); ++i)
            {
                const double d = norm(map.tx_positions[i] - location.tx);
                if (d < best)
                {
                    best = d;
                    best_tx = i;
                }
            }
            const Vec3 rel = (location.rx - map.grid.origin) * (1.0 / map.grid.spacing);
            const double c[3] = {rel.x, rel.y, rel.z};
            std::array<int, 3> idx{};
            for (std::size_t i = 0; i < 3; ++i)
                idx[i] = int(std::clamp(std::round(c[i]), 0.0, double(map.grid.extents[i] - 1)));
            hit = map.find(best_tx, idx);
        }
        if (hit >= 0 && location_distance(map.records[std::size_t(hit)].location(), location) <= tolerance)
            return map.records[std::size_t(hit)];

        // slow path: report the closest stored key
        std::size_t nearest = 0;
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t r = 0; r < map.records.size(); ++r)
        {
            const double d = location_distance(map.records[r].location(), location);
            if (d < best)
            {
                best = d;
                nearest = r;
            }
        }
        if (best <= tolerance)
            return map.records[nearest];
        const auto &n = map.records[nearest];
        throw NotFound("no record within " + format_g(tolerance, 6) + " m of tx=" + vec_text(location.tx) +
                       " rx=" + vec_text(location.rx) + "; nearest key is tx=" + vec_text(n.tx) + " rx=" +
                       vec_text(n.rx) + " at " + format_g(best, 6) + " m");
    }

    ModelState model_for(const DcmMap &map, const DcmRecord &record, const GbsmOverrides &overrides,
                         std::uint64_t seed, const AntennaArray &tx_array, const AntennaArray &rx_array)
    {
        ModelState model;
        model.static_mpcs = record.static_mpcs();
        model.gbsm = map.gbsm;
        model.gbsm.seed = seed;
        if (overrides.n_clusters)
            model.gbsm.n_clusters = *overrides.n_clusters;
        if (overrides.rays_per_cluster)
            model.gbsm.rays_per_cluster = *overrides.rays_per_cluster;
        if (overrides.cluster_speed)
            model.gbsm.speed_a = model.gbsm.speed_z = *overrides.cluster_speed;
        if (overrides.support)
            model.gbsm.support = *overrides.support;
        model.gbsm.validate();
        model.location = record.location();
        model.k_s = overrides.k_s.value_or(record.k_s);
        model.k_d = overrides.k_d.value_or(record.k_d);
        if (!(model.k_s > 0.0) || !(model.k_d > 0.0))
            throw std::invalid_argument("K factors must be > 0");
        model.tx_array = tx_array;
        model.rx_array = rx_array;
        return model;
    }

    ChannelSnapshot update_snapshot(const DcmMap &map, const Location &location, double t,
                                    const GbsmOverrides &overrides, std::uint64_t seed,
                                    const AntennaArray &tx_array, const AntennaArray &rx_array, double tolerance)
    {
        if (!(t >= 0.0))
            throw std::invalid_argument("t must be >= 0");
        const DcmRecord &rec = query(map, location, tolerance);
        const ModelState model = model_for(map, rec, overrides, seed, tx_array, rx_array);
        const MimoTaps hs =
            static_cir(model.static_mpcs, tx_array, rx_array, model.k_s, model.carrier(), model.gbsm.mu);
        MimoTaps hd(tx_array.n_elements, rx_array.n_elements);
        if (!std::isinf(model.k_d) && model.gbsm.n_clusters > 0)
        {
            const auto clusters = spawn_clusters(model.gbsm, model.location, model.static_mpcs);
            hd = dynamic_cir(clusters, tx_array, rx_array, t, model.gbsm);
        }
        return combine_cir(hs, hd, make_kfactors(model.k_s, model.k_d), t, model.location);
    }

    double mpc_distance(const Mpc &a, const Mpc &b, const MatchScales &scales)
    {
        const double dd = (a.delay - b.delay) / scales.delay;
        const double da = wrap_angle(a.aoa.azimuth - b.aoa.azimuth) / scales.angle;
        return std::sqrt(dd * dd + da * da);
    }

    MatchResult match_mpcs(std::span<const Mpc> reference, std::span<const Mpc> simulated, const MatchScales &scales,
                           double threshold)
    {
        if (!(scales.delay > 0.0) || !(scales.angle > 0.0))
            throw std::invalid_argument("match scales must be > 0");
        if (!(threshold > 0.0))
            throw std::invalid_argument("match threshold must be > 0");

        std::vector<MatchPair> candidates;
        for (std::size_t r = 0; r < reference.size(); ++r)
            for (std::size_t s = 0; s < simulated.size(); ++s)
            {
                const double d = mpc_distance(reference[r], simulated[s], scales);
                if (d <= threshold)
                    candidates.push_back({r, s, d});
            }
        std::sort(candidates.begin(), candidates.end(), [](const MatchPair &a, const MatchPair &b)
                  {
            if (a.distance != b.distance)
                return a.distance < b.distance;
            if (a.reference != b.reference)
                return a.reference < b.reference;
            return a.simulated < b.simulated; });

        MatchResult out;
        out.threshold = threshold;
        out.scales = scales;
        std::vector<bool> used_r(reference.size()), used_s(simulated.size());
        for (const auto &c : candidates)
        {
            if (used_r[c.reference] || used_s[c.simulated])
                continue;
            used_r[c.reference] = used_s[c.simulated] = true;
            out.pairs.push_back(c);
        }
        for (std::size_t r = 0; r < reference.size(); ++r)
            if (!used_r[r])
                out.unmatched_reference.push_back(r);
        for (std::size_t s = 0; s < simulated.size(); ++s)
            if (!used_s[s])
                out.unmatched_simulated.push_back(s);
        return out;
    }

    KFactors estimate_k_split(const MatchResult &match, std::span<const Mpc> reference)
    {
        double p_los = 0.0;
        int n_los = 0;
        for (const auto &m : reference)
            if (m.kind == MpcKind::los)
            {
                ++n_los;
                p_los = m.power;
            }
        if (n_los != 1 || !(p_los > 0.0))
            throw std::invalid_argument("reference needs exactly one LoS component with power > 0");

        double p_static = 0.0, p_dynamic = 0.0;
        for (const auto &p : match.pairs)
        {
            if (p.reference >= reference.size())
                throw std::invalid_argument("match refers to a missing reference MPC");
            if (reference[p.reference].kind != MpcKind::los)
                p_static += reference[p.reference].power;
        }
        for (auto r : match.unmatched_reference)
        {
            if (r >= reference.size())
                throw std::invalid_argument("match refers to a missing reference MPC");
            if (reference[r].kind != MpcKind::los)
                p_dynamic += reference[r].power;
        }
        const double inf = std::numeric_limits<double>::infinity();
        const double k_s = p_static > 0.0 ? p_los / p_static : inf;
        const double k_d = p_dynamic > 0.0 ? p_los / p_dynamic : inf;
        return make_kfactors(k_s, k_d);
    }

    SampledCir sample_cir(std::span<const Tap> taps, std::span<const double> delay_grid)
    {
        if (delay_grid.size() < 2)
            throw std::invalid_argument("delay grid needs at least two bins");
        const double step = delay_grid[1] - delay_grid[0];
        if (!(step > 0.0))
            throw std::invalid_argument("delay grid must be increasing");
        SampledCir out;
        out.delay.assign(delay_grid.begin(), delay_grid.end());
        out.h.assign(delay_grid.size(), complex(0.0));
        for (const auto &tap : taps)
        {
            const double k = std::round((tap.delay - delay_grid[0]) / step);
            if (k < 0.0 || k >= double(delay_grid.size()))
                continue;
            out.h[std::size_t(k)] += tap.amplitude;
        }
        return out;
    }

    Psd average_delay_psd(std::span<const SampledCir> snapshots, double noise_floor_db)
    {
        if (snapshots.empty())
            throw std::invalid_argument("at least one snapshot is required");
        const auto &grid = snapshots.front().delay;
        for (const auto &s : snapshots)
            if (s.delay != grid || s.h.size() != grid.size())
                throw std::invalid_argument("snapshots are on different delay grids");

        Psd psd;
        psd.support = grid;
        psd.density.assign(grid.size(), 0.0);
        const double threshold = db_to_linear(noise_floor_db + 6.0);
        const double inv_s = 1.0 / double(snapshots.size());
        for (std::size_t i = 0; i < grid.size(); ++i)
        {
            complex acc = 0.0;
            for (const auto &s : snapshots)
                acc += s.h[i];
            const double p = std::norm(acc * inv_s);
            psd.density[i] = p >= threshold ? p : 0.0;
        }
        return psd;
    }
}
