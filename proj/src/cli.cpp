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

#include "dcm/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <functional>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "dcm/parallel.hpp"
#include "dcm/rng.hpp"
#include "dcm/text.hpp"

namespace dcm
{
    using json = nlohmann::json;

    namespace
    {
        void check_keys(const json &j, std::initializer_list<const char *> allowed, const std::string &where)
        {
            if (!j.is_object())
                throw std::invalid_argument("config: '" + where + "' must be an object");
            for (const auto &item : j.items())
                if (std::none_of(allowed.begin(), allowed.end(), [&](const char *k)
                                 { return item.key() == k; }))
                    throw std::invalid_argument("config: unknown key '" + where + "." + item.key() + "'");
        }

        template <typename T>
        void read(const json &j, const char *key, T &dst)
        {
            if (j.contains(key))
                dst = j.at(key).get<T>();
        }

        void read_deg(const json &j, const char *key, double &dst)
        {
            if (j.contains(key))
                dst = deg_to_rad(j.at(key).get<double>());
        }

        double db_value(const json &v)
        {
            if (v.is_string())
                return parse_double(v.get<std::string>());
            return v.get<double>();
        }

        void read_range(const json &j, const char *key, AngleRange &r)
        {
            if (!j.contains(key))
                return;
            const json &a = j.at(key);
            check_keys(a, {"elevation_min_deg", "elevation_max_deg", "azimuth_min_deg", "azimuth_max_deg"}, key);
            read_deg(a, "elevation_min_deg", r.elevation_min);
            read_deg(a, "elevation_max_deg", r.elevation_max);
            read_deg(a, "azimuth_min_deg", r.azimuth_min);
            read_deg(a, "azimuth_max_deg", r.azimuth_max);
        }
    }

    RunConfig parse_run_config(const std::string &json_text)
    {
        json j;
        try
        {
            j = json::parse(json_text);
        }
        catch (const json::parse_error &e)
        {
            throw std::invalid_argument(std::string("config: ") + e.what());
        }
        RunConfig c;
        try
        {
            check_keys(j, {"scene", "map", "out_dir", "seed", "gbsm", "overrides", "stats"}, "config");
            read(j, "scene", c.scene);
            read(j, "map", c.map);
            read(j, "out_dir", c.out_dir);
            if (j.contains("seed"))
                c.seed = j.at("seed").get<std::uint64_t>();
            if (j.contains("gbsm"))
            {
                const json &g = j.at("gbsm");
                check_keys(g,
                           {"n_clusters", "rays_per_cluster", "carrier_frequency", "speed_a", "speed_z", "delay_decay",
                            "virtual_delay_mean", "angle_spread_intra_deg", "xpr_mean_db", "xpr_std_db", "mu",
                            "cluster_shadow_db", "distance_min", "distance_max", "support", "departure", "arrival"},
                           "gbsm");
                GbsmConfig &o = c.gbsm;
                read(g, "n_clusters", o.n_clusters);
                read(g, "rays_per_cluster", o.rays_per_cluster);
                read(g, "carrier_frequency", o.carrier_frequency);
                read(g, "speed_a", o.speed_a);
                read(g, "speed_z", o.speed_z);
                read(g, "delay_decay", o.delay_decay);
                read(g, "virtual_delay_mean", o.virtual_delay_mean);
                read_deg(g, "angle_spread_intra_deg", o.angle_spread_intra);
                read(g, "xpr_mean_db", o.xpr_mean_db);
                read(g, "xpr_std_db", o.xpr_std_db);
                read(g, "mu", o.mu);
                read(g, "cluster_shadow_db", o.cluster_shadow_db);
                read(g, "distance_min", o.distance_min);
                read(g, "distance_max", o.distance_max);
                if (g.contains("support"))
                    o.support = angle_support_from_string(g.at("support").get<std::string>());
                read_range(g, "departure", o.departure);
                read_range(g, "arrival", o.arrival);
                o.validate();
            }
            if (j.contains("overrides"))
            {
                const json &g = j.at("overrides");
                check_keys(g, {"n_clusters", "rays_per_cluster", "cluster_speed", "ks_db", "kd_db", "support"},
                           "overrides");
                auto &o = c.overrides;
                if (g.contains("n_clusters"))
                    o.n_clusters = g.at("n_clusters").get<int>();
                if (g.contains("rays_per_cluster"))
                    o.rays_per_cluster = g.at("rays_per_cluster").get<int>();
                if (g.contains("cluster_speed"))
                    o.cluster_speed = g.at("cluster_speed").get<double>();
                if (g.contains("ks_db"))
                    o.k_s = db_to_linear(db_value(g.at("ks_db")));
                if (g.contains("kd_db"))
                    o.k_d = db_to_linear(db_value(g.at("kd_db")));
                if (g.contains("support"))
                    o.support = angle_support_from_string(g.at("support").get<std::string>());
            }
            if (j.contains("stats"))
            {
                const json &s = j.at("stats");
                check_keys(s, {"ensemble", "n_lags", "dt", "spacing_wavelengths", "n_theta", "df_max", "n_df",
                               "samples", "realizations"},
                           "stats");
                auto &o = c.stats;
                read(s, "ensemble", o.ensemble);
                read(s, "n_lags", o.n_lags);
                read(s, "dt", o.dt);
                read(s, "spacing_wavelengths", o.spacing_wavelengths);
                read(s, "n_theta", o.n_theta);
                read(s, "df_max", o.df_max);
                read(s, "n_df", o.n_df);
                read(s, "samples", o.samples);
                read(s, "realizations", o.realizations);
            }
        }
        catch (const json::exception &e)
        {
            throw std::invalid_argument(std::string("config: ") + e.what());
        }
        return c;
    }

    RunConfig load_run_config(const std::string &path)
    {
        return parse_run_config(read_file(path));
    }

    namespace
    {
        double median(std::vector<double> v)
        {
            std::sort(v.begin(), v.end());
            const std::size_t n = v.size();
            return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
        }

        template <typename Fn>
        double time_best_of(int repeats, Fn &&fn)
        {
            double best = std::numeric_limits<double>::infinity();
            for (int r = 0; r < repeats; ++r)
            {
                const auto t0 = std::chrono::steady_clock::now();
                fn();
                const auto t1 = std::chrono::steady_clock::now();
                best = std::min(best, std::chrono::duration<double>(t1 - t0).count());
            }
            return best;
        }
    }

    BenchReport benchmark_update(const Scene &scene, const Vec3 &tx, const GridSpec &grid, int max_order,
                                 const GbsmConfig &gbsm, std::uint64_t seed, int repeats)
    {
        if (repeats < 1)
            throw std::invalid_argument("repeats must be >= 1");
        const Vec3 txs[1] = {tx};
        DcmMap map;
        const auto b0 = std::chrono::steady_clock::now();
        map = build_map(scene, txs, grid, max_order, gbsm.carrier_frequency, {}, gbsm);
        const auto b1 = std::chrono::steady_clock::now();

        BenchReport rep;
        rep.locations = map.records.size();
        rep.build_total_s = std::chrono::duration<double>(b1 - b0).count();
        const AntennaArray omni = omni_antenna();
        std::vector<double> rebuild, update;
        // keeps the timed work observable
        volatile std::size_t sink = 0;
        for (const auto &rec : map.records)
        {
            rebuild.push_back(time_best_of(repeats, [&]
                                           {
                const auto mpcs = trace_static_mpcs(scene, rec.tx, rec.rx, max_order, gbsm.carrier_frequency);
                sink = sink + static_cir(mpcs, omni, omni, rec.k_s, gbsm.carrier_frequency, gbsm.mu).pairs[0].size(); }));
            update.push_back(time_best_of(repeats, [&]
                                          { sink = sink + update_snapshot(map, rec.location(), 0.0, {}, seed).taps.pairs[0].size(); }));
        }
        rep.rebuild_median_s = median(rebuild);
        rep.update_median_s = median(update);
        return rep;
    }

    namespace
    {
        struct UsageError : std::runtime_error
        {
            using std::runtime_error::runtime_error;
        };

        std::vector<double> parse_levels(const std::string &spec)
        {
            auto parts = split(spec, ':');
            if (parts.size() == 1)
                return parse_doubles(spec);
            if (parts.size() != 3)
                throw std::invalid_argument("levels must be start:step:stop or a comma list");
            const double a = parse_double(parts[0]), step = parse_double(parts[1]), b = parse_double(parts[2]);
            if (!(step > 0.0) || !(b >= a))
                throw std::invalid_argument("levels need step > 0 and stop >= start");
            std::vector<double> out;
            const long n = long(std::floor((b - a) / step + 1e-9));
            for (long i = 0; i <= n; ++i)
                out.push_back(a + double(i) * step);
            return out;
        }

        std::string kind_name(MpcKind k)
        {
            switch (k)
            {
            case MpcKind::los:
                return "los";
            case MpcKind::reflection:
                return "refl";
            default:
                return "dyn";
            }
        }

        std::string num(double v) { return format_g(v, 12); }

        void snapshot_rows(std::string &csv, const ChannelSnapshot &s)
        {
            for (int v = 0; v < s.taps.n_tx; ++v)
                for (int u = 0; u < s.taps.n_rx; ++u)
                    for (const auto &tap : s.taps.at(v, u))
                        csv += num(s.t) + "," + std::to_string(v) + "," + std::to_string(u) + "," +
                               num(tap.delay * 1e9) + "," + num(tap.amplitude.real()) + "," +
                               num(tap.amplitude.imag()) + "," + kind_name(tap.kind) + "," +
                               std::to_string(tap.order) + "," + std::to_string(tap.cluster) + "," +
                               std::to_string(tap.ray) + "\n";
        }

        const char *snapshot_header = "t_s,v,u,delay_ns,re,im,kind,order,cluster,ray\n";

        std::string cdf_csv(const char *column, const std::vector<double> &values)
        {
            std::string csv = std::string(column) + ",cdf\n";
            for (const auto &[x, p] : empirical_cdf(values))
                csv += num(x) + "," + num(p) + "\n";
            return csv;
        }

        /// Flags shared by the subcommands.
        struct Options
        {
            std::string config, scene, map, out;
            std::string tx, rx;
            std::uint64_t seed = 0;
            double tolerance = -1.0;
            // overrides
            int clusters = 0, rays = 0;
            double speed = 0.0;
            std::string ks_db, kd_db, support;
            // arrays
            int tx_elements = 1, rx_elements = 1;
            double tx_spacing = 0.5, rx_spacing = 0.5; // wavelengths
            std::string pattern = "isotropic_v";
            // build
            double grid = 1.0;
            std::string origin = "10,-5,1.5", extents = "10,10,1";
            std::vector<std::string> tx_list;
            int max_order = 2;
            double frequency = 0.0;
            double build_ks_db = 3.0, build_kd_db = 10.0;
            int repeats = 3;
            // time / frequency
            double t = 0.0, t0 = 0.0, dt = 1e-3;
            int steps = 100;
            std::string ctf_out;
            double bandwidth = 320e6;
            int n_freq = 64;
            // stats
            std::size_t ensemble = 0, n_lags = 0, n_df = 0, samples = 0, realizations = 0, n_theta = 0;
            double df_max = 0.0, lag_dt = 0.0, lag_spacing = 0.0;
            std::string levels = "-20:1:10", variable = "spatial";
        };

        struct Runner
        {
            Options o;
            CLI::App *app = nullptr;
            RunConfig cfg;
            std::ostream &out;
            std::ostream &err;

            Runner(std::ostream &o_, std::ostream &e_) : out(o_), err(e_) {}

            bool given(CLI::App *sub, const char *name) const { return sub->count(name) > 0; }

            void load_config()
            {
                if (!o.config.empty())
                    cfg = load_run_config(o.config);
            }

            std::string resolve_out(const std::string &path) const
            {
                if (path.empty() || cfg.out_dir.empty() || std::filesystem::path(path).is_absolute())
                    return path;
                return (std::filesystem::path(cfg.out_dir) / path).string();
            }

            void emit(const std::string &path, const std::string &content)
            {
                const std::string p = resolve_out(path);
                if (p.empty())
                    out << content;
                else
                {
                    if (auto parent = std::filesystem::path(p).parent_path(); !parent.empty())
                        std::filesystem::create_directories(parent);
                    write_file_atomic(p, content);
                }
            }

            std::string map_path() const
            {
                const std::string p = o.map.empty() ? cfg.map : o.map;
                if (p.empty())
                    throw UsageError("--map is required");
                return p;
            }

            std::uint64_t seed_for(CLI::App *sub, const DcmMap &map) const
            {
                if (given(sub, "--seed"))
                    return o.seed;
                if (cfg.seed)
                    return *cfg.seed;
                return map.gbsm.seed;
            }

            GbsmOverrides overrides(CLI::App *sub) const
            {
                GbsmOverrides ov = cfg.overrides;
                if (given(sub, "--clusters"))
                    ov.n_clusters = o.clusters;
                if (given(sub, "--rays"))
                    ov.rays_per_cluster = o.rays;
                if (given(sub, "--speed"))
                    ov.cluster_speed = o.speed;
                if (given(sub, "--ks-db"))
                    ov.k_s = db_to_linear(parse_double(o.ks_db));
                if (given(sub, "--kd-db"))
                    ov.k_d = db_to_linear(parse_double(o.kd_db));
                if (given(sub, "--support"))
                    ov.support = angle_support_from_string(o.support);
                return ov;
            }

            AntennaArray array(int n, double spacing_wl, double fc) const
            {
                if (n == 1)
                {
                    AntennaArray a = omni_antenna();
                    a.pattern = element_pattern_from_string(o.pattern);
                    return a;
                }
                return uniform_linear_array(n, spacing_wl * wavelength(fc), {}, element_pattern_from_string(o.pattern));
            }

            const DcmRecord &pick_record(const DcmMap &map) const
            {
                if (map.records.empty())
                    throw std::invalid_argument("map has no records");
                if (o.tx.empty() && o.rx.empty())
                    return map.records.front();
                const Location loc{o.tx.empty() ? map.records.front().tx : parse_vec3(o.tx),
                                   o.rx.empty() ? map.records.front().rx : parse_vec3(o.rx)};
                return query(map, loc, tolerance(map));
            }

            double tolerance(const DcmMap &map) const
            {
                return o.tolerance >= 0.0 ? o.tolerance : 0.5 * map.grid.spacing;
            }

            StatsSettings stats() const
            {
                StatsSettings s = cfg.stats;
                if (o.ensemble)
                    s.ensemble = o.ensemble;
                if (o.n_lags)
                    s.n_lags = o.n_lags;
                if (o.n_df)
                    s.n_df = o.n_df;
                if (o.samples)
                    s.samples = o.samples;
                if (o.realizations)
                    s.realizations = o.realizations;
                if (o.n_theta)
                    s.n_theta = o.n_theta;
                if (o.df_max > 0.0)
                    s.df_max = o.df_max;
                if (o.lag_dt > 0.0)
                    s.dt = o.lag_dt;
                if (o.lag_spacing > 0.0)
                    s.spacing_wavelengths = o.lag_spacing;
                return s;
            }

            // ---- subcommands ----

            void cmd_build(CLI::App *sub)
            {
                const std::string scene_path = o.scene.empty() ? cfg.scene : o.scene;
                if (scene_path.empty())
                    throw UsageError("--scene is required");
                if (o.out.empty())
                    throw UsageError("--out is required");
                const Scene scene = load_scene_file(scene_path);
                GridSpec grid;
                grid.origin = parse_vec3(o.origin);
                grid.spacing = o.grid;
                const Vec3 e = parse_vec3(o.extents);
                for (int i = 0; i < 3; ++i)
                {
                    const double v = i == 0 ? e.x : (i == 1 ? e.y : e.z);
                    if (v != std::floor(v) || v < 1.0)
                        throw std::invalid_argument("--extents must be positive integers");
                    grid.extents[std::size_t(i)] = int(v);
                }
                std::vector<Vec3> txs;
                for (const auto &t : o.tx_list)
                    txs.push_back(parse_vec3(t));
                if (txs.empty())
                    txs.push_back({0.0, 0.0, 10.0});
                GbsmConfig g = cfg.gbsm;
                if (given(sub, "--seed"))
                    g.seed = o.seed;
                else if (cfg.seed)
                    g.seed = *cfg.seed;
                if (given(sub, "--frequency"))
                    g.carrier_frequency = o.frequency;
                KDefaults k{db_to_linear(o.build_ks_db), db_to_linear(o.build_kd_db)};
                const DcmMap map = build_map(scene, txs, grid, o.max_order, g.carrier_frequency, k, g);
                save_map_file(map, resolve_out(o.out));
            }

            void cmd_query(CLI::App *)
            {
                const DcmMap map = load_map_file(map_path());
                if (o.rx.empty())
                    throw UsageError("--rx is required");
                emit(o.out, format_record(pick_record(map)));
            }

            void cmd_update(CLI::App *sub)
            {
                const DcmMap map = load_map_file(map_path());
                const DcmRecord &rec = pick_record(map);
                const double fc = map.gbsm.carrier_frequency;
                const auto snap = update_snapshot(map, rec.location(), o.t, overrides(sub), seed_for(sub, map),
                                                  array(o.tx_elements, o.tx_spacing, fc),
                                                  array(o.rx_elements, o.rx_spacing, fc), tolerance(map));
                std::string csv = snapshot_header;
                snapshot_rows(csv, snap);
                emit(o.out, csv);
            }

            void cmd_simulate(CLI::App *sub)
            {
                if (o.steps < 1 || !(o.dt > 0.0))
                    throw std::invalid_argument("--steps must be >= 1 and --dt > 0");
                if (o.n_freq < 1 || !(o.bandwidth > 0.0))
                    throw std::invalid_argument("--n-freq must be >= 1 and --bandwidth > 0");
                const DcmMap map = load_map_file(map_path());
                const DcmRecord &rec = pick_record(map);
                const double fc = map.gbsm.carrier_frequency;
                const auto ov = overrides(sub);
                const auto seed = seed_for(sub, map);
                const AntennaArray ta = array(o.tx_elements, o.tx_spacing, fc);
                const AntennaArray ra = array(o.rx_elements, o.rx_spacing, fc);
                std::vector<double> freqs(std::size_t(o.n_freq));
                for (int i = 0; i < o.n_freq; ++i)
                    freqs[std::size_t(i)] = fc + (double(i) - 0.5 * double(o.n_freq - 1)) * o.bandwidth / double(o.n_freq);

                std::vector<ChannelSnapshot> snaps(std::size_t(o.steps));
                parallel_for(snaps.size(), [&](std::size_t i)
                             { snaps[i] = update_snapshot(map, rec.location(), o.t0 + double(i) * o.dt, ov, seed, ta, ra,
                                                          tolerance(map)); });
                std::string cir = snapshot_header;
                std::string ctf_csv = "t_s,v,u,f_hz,re,im\n";
                for (const auto &s : snaps)
                {
                    snapshot_rows(cir, s);
                    if (o.ctf_out.empty())
                        continue;
                    const auto h = ctf(s, freqs, fc);
                    for (int v = 0; v < s.taps.n_tx; ++v)
                        for (int u = 0; u < s.taps.n_rx; ++u)
                        {
                            const auto &row = h[std::size_t(v) * std::size_t(s.taps.n_rx) + std::size_t(u)];
                            for (std::size_t k = 0; k < freqs.size(); ++k)
                                ctf_csv += num(s.t) + "," + std::to_string(v) + "," + std::to_string(u) + "," +
                                           num(freqs[k]) + "," + num(row[k].real()) + "," + num(row[k].imag()) + "\n";
                        }
                }
                emit(o.out, cir);
                if (!o.ctf_out.empty())
                    emit(o.ctf_out, ctf_csv);
            }

            ModelState stats_model(CLI::App *sub, const DcmMap &map, const DcmRecord &rec, int rx_default) const
            {
                const double fc = map.gbsm.carrier_frequency;
                const int n_rx = given(sub, "--rx-elements") ? o.rx_elements : rx_default;
                return model_for(map, rec, overrides(sub), seed_for(sub, map), array(o.tx_elements, o.tx_spacing, fc),
                                 array(n_rx, o.rx_spacing, fc));
            }

            std::vector<double> df_grid(const StatsSettings &s) const
            {
                if (s.n_df < 2 || !(s.df_max > 0.0))
                    throw std::invalid_argument("frequency-lag grid needs n_df >= 2 and df_max > 0");
                std::vector<double> g(s.n_df);
                for (std::size_t i = 0; i < s.n_df; ++i)
                    g[i] = s.df_max * double(i) / double(s.n_df - 1);
                return g;
            }

            void cmd_fcf(CLI::App *sub)
            {
                const DcmMap map = load_map_file(map_path());
                const ModelState model = stats_model(sub, map, pick_record(map), 1);
                const StatsSettings s = stats();
                const auto grid = df_grid(s);
                const auto r = fcf_closed_form(model, grid, s.ensemble, model.gbsm.seed, o.t);
                std::string csv = "df_hz,fcf_re,fcf_im,fcf_abs\n";
                for (std::size_t i = 0; i < grid.size(); ++i)
                    csv += num(grid[i]) + "," + num(r[i].value.real()) + "," + num(r[i].value.imag()) + "," +
                           num(std::abs(r[i].value)) + "\n";
                emit(o.out, csv);
            }

            void cmd_delay_psd(CLI::App *sub)
            {
                const DcmMap map = load_map_file(map_path());
                const ModelState model = stats_model(sub, map, pick_record(map), 1);
                const StatsSettings s = stats();
                const auto grid = df_grid(s);
                const auto r = fcf_closed_form(model, grid, s.ensemble, model.gbsm.seed, o.t);
                std::vector<complex> fcf;
                for (const auto &c : r)
                    fcf.push_back(c.value);
                const Psd psd = delay_psd(grid, fcf);
                std::string csv = "delay_ns,density\n";
                for (std::size_t i = 0; i < psd.support.size(); ++i)
                    csv += num(psd.support[i] * 1e9) + "," + num(psd.density[i]) + "\n";
                emit(o.out, csv);
            }

            /// Records sharing the selected record's tx, in map order.
            std::vector<const DcmRecord *> route(const DcmMap &map) const
            {
                const DcmRecord &first = pick_record(map);
                std::vector<const DcmRecord *> out;
                if (!o.rx.empty())
                    out.push_back(&first);
                else
                    for (const auto &r : map.records)
                        if (r.tx == first.tx)
                            out.push_back(&r);
                return out;
            }

            void cmd_angular_cdf(CLI::App *sub)
            {
                const DcmMap map = load_map_file(map_path());
                const StatsSettings s = stats();
                const auto recs = route(map);
                std::vector<double> spreads(recs.size());
                for (std::size_t i = 0; i < recs.size(); ++i)
                {
                    const ModelState model = stats_model(sub, map, *recs[i], 8);
                    AngularOptions ao;
                    ao.n_lags = s.n_lags;
                    ao.spacing_wavelengths = s.spacing_wavelengths;
                    ao.n_theta = s.n_theta;
                    ao.ensemble = s.ensemble;
                    ao.seed = model.gbsm.seed;
                    ao.t = o.t;
                    spreads[i] = rad_to_deg(rms_spread(angular_psd(model, ao)));
                }
                emit(o.out, cdf_csv("spread_deg", spreads));
            }

            void cmd_doppler_cdf(CLI::App *sub)
            {
                const DcmMap map = load_map_file(map_path());
                const StatsSettings s = stats();
                const auto recs = route(map);
                std::vector<double> spreads(recs.size());
                for (std::size_t i = 0; i < recs.size(); ++i)
                {
                    const ModelState model = stats_model(sub, map, *recs[i], 1);
                    DopplerOptions d;
                    d.n_lags = s.n_lags;
                    d.dt = s.dt;
                    d.ensemble = s.ensemble;
                    d.seed = model.gbsm.seed;
                    d.t = o.t;
                    spreads[i] = rms_spread(doppler_psd(model, d));
                }
                emit(o.out, cdf_csv("spread_hz", spreads));
            }

            void cmd_lcr(CLI::App *sub)
            {
                const DcmMap map = load_map_file(map_path());
                const ModelState model = stats_model(sub, map, pick_record(map), 1);
                const StatsSettings s = stats();
                LcrVariable var;
                if (o.variable == "temporal")
                    var = LcrVariable::temporal;
                else if (o.variable == "spatial")
                    var = LcrVariable::spatial;
                else
                    throw std::invalid_argument("--variable must be temporal or spatial");

                const auto levels_db = parse_levels(o.levels);
                LcrInputs in = lcr_moments(model, var, 0.0, s.ensemble, model.gbsm.seed, o.t);
                for (double l : levels_db)
                    in.levels.push_back(std::pow(10.0, l / 20.0));
                const auto analytic = lcr_analytic(in);

                std::vector<double> empirical(levels_db.size(), std::numeric_limits<double>::quiet_NaN());
                const double fm = (model.gbsm.speed_a + model.gbsm.speed_z) * model.carrier() / speed_of_light;
                const bool temporal = var == LcrVariable::temporal;
                if ((!temporal || fm > 0.0) && s.realizations > 0 && s.samples >= 2 * s.realizations)
                {
                    const std::size_t per = s.samples / s.realizations;
                    const double step = temporal ? 1.0 / (50.0 * fm) : wavelength(model.carrier()) / 50.0;
                    std::vector<std::vector<double>> env(s.realizations);
                    parallel_for(s.realizations, [&](std::size_t r)
                                 {
                        const std::uint64_t rs = derive_seed(model.gbsm.seed, {hash_string("lcr-empirical"), r});
                        const auto h = temporal ? narrowband_series(model, o.t, step, per, rs)
                                                : narrowband_route(model, o.t, step, per, rs);
                        env[r].resize(h.size());
                        for (std::size_t i = 0; i < h.size(); ++i)
                            env[r][i] = std::abs(h[i]); });
                    double power = 0.0;
                    for (const auto &e : env)
                        for (double x : e)
                            power += x * x;
                    const double rms = std::sqrt(power / double(per * s.realizations));
                    const double duration = double(per - 1) * step;
                    for (auto &e : env)
                        for (double &x : e)
                            x /= rms;
                    for (std::size_t k = 0; k < levels_db.size(); ++k)
                    {
                        double acc = 0.0;
                        for (const auto &e : env)
                            acc += lcr_empirical(e, in.levels[k], duration);
                        empirical[k] = acc / double(s.realizations);
                    }
                }
                std::string csv = "level_db,lcr_analytic,lcr_empirical\n";
                for (std::size_t k = 0; k < levels_db.size(); ++k)
                    csv += num(levels_db[k]) + "," + num(analytic[k]) + "," + num(empirical[k]) + "\n";
                emit(o.out, csv);
            }

            void cmd_bench(CLI::App *sub)
            {
                const std::string scene_path = o.scene.empty() ? cfg.scene : o.scene;
                if (scene_path.empty())
                    throw UsageError("--scene is required");
                const Scene scene = load_scene_file(scene_path);
                GridSpec grid;
                grid.origin = parse_vec3(o.origin);
                grid.spacing = o.grid;
                const Vec3 e = parse_vec3(o.extents);
                grid.extents = {int(e.x), int(e.y), int(e.z)};
                GbsmConfig g = cfg.gbsm;
                const std::uint64_t seed = given(sub, "--seed") ? o.seed : cfg.seed.value_or(g.seed);
                const Vec3 tx = o.tx_list.empty() ? Vec3{0.0, 0.0, 10.0} : parse_vec3(o.tx_list.front());
                const BenchReport r = benchmark_update(scene, tx, grid, o.max_order, g, seed, o.repeats);
                std::string rep = "metric,value\n";
                rep += "facets," + std::to_string(scene.facets.size()) + "\n";
                rep += "max_order," + std::to_string(o.max_order) + "\n";
                rep += "locations," + std::to_string(r.locations) + "\n";
                rep += "build_total_s," + num(r.build_total_s) + "\n";
                rep += "rebuild_median_s," + num(r.rebuild_median_s) + "\n";
                rep += "update_median_s," + num(r.update_median_s) + "\n";
                rep += "update_to_rebuild_ratio," + num(r.ratio()) + "\n";
                emit(o.out, rep);
            }
        };

        void add_config(CLI::App *s, Options &o)
        {
            s->add_option("--config", o.config, "JSON run configuration")->check(CLI::ExistingFile);
        }

        void add_seed(CLI::App *s, Options &o)
        {
            s->add_option("--seed", o.seed, "Random seed (default: config, then the map's gbsm seed)");
        }

        void add_location(CLI::App *s, Options &o)
        {
            s->add_option("--tx", o.tx, "Tx position x,y,z (m, default: the map's first tx)");
            s->add_option("--rx", o.rx, "Rx position x,y,z (m)");
            s->add_option("--tolerance", o.tolerance, "Query tolerance in m (default: half the grid spacing)");
        }

        void add_overrides(CLI::App *s, Options &o)
        {
            s->add_option("--clusters", o.clusters, "Dynamic cluster count override");
            s->add_option("--rays", o.rays, "Rays per cluster override");
            s->add_option("--speed", o.speed, "Cluster speed override (m/s)");
            s->add_option("--ks-db", o.ks_db, "K_S override (dB, 'inf' allowed)");
            s->add_option("--kd-db", o.kd_db, "K_D override (dB, 'inf' removes the dynamic part)");
            s->add_option("--support", o.support, "Dynamic angle support: cone | follow_static");
        }

        void add_arrays(CLI::App *s, Options &o)
        {
            s->add_option("--tx-elements", o.tx_elements, "Tx ULA element count");
            s->add_option("--rx-elements", o.rx_elements, "Rx ULA element count");
            s->add_option("--tx-spacing", o.tx_spacing, "Tx element spacing (wavelengths)");
            s->add_option("--rx-spacing", o.rx_spacing, "Rx element spacing (wavelengths)");
            s->add_option("--pattern", o.pattern, "Element pattern: isotropic_v | isotropic_h | slant_45 | dipole_v");
        }

        void add_grid(CLI::App *s, Options &o)
        {
            s->add_option("--scene", o.scene, "Scene file");
            s->add_option("--grid", o.grid, "Rx grid spacing (m)");
            s->add_option("--origin", o.origin, "Rx grid origin x,y,z (m)");
            s->add_option("--extents", o.extents, "Rx grid points per axis nx,ny,nz");
            s->add_option("--tx", o.tx_list, "Tx position x,y,z (repeatable)");
            s->add_option("--max-order", o.max_order, "Maximum reflection order");
        }

        void add_stats_common(CLI::App *s, Options &o)
        {
            add_config(s, o);
            s->add_option("--map", o.map, "Map file");
            s->add_option("--out", o.out, "Output CSV (default: standard output)");
            add_seed(s, o);
            add_location(s, o);
            add_overrides(s, o);
            add_arrays(s, o);
            s->add_option("--t", o.t, "Evaluation time (s)");
            s->add_option("--ensemble", o.ensemble, "Cluster realizations per correlation");
        }
    }

    int run_command(const std::vector<std::string> &args, std::ostream &out, std::ostream &err)
    {
        Runner run(out, err);
        Options &o = run.o;
        CLI::App app{"Dynamic channel map: build, query, update and analyse hybrid channel maps", "dcm"};
        app.require_subcommand(1);
        app.fallthrough(false);

        std::function<void()> action;

        auto *build = app.add_subcommand("build", "Trace static MPCs over an rx grid and write a map");
        add_config(build, o);
        add_grid(build, o);
        add_seed(build, o);
        build->add_option("--out", o.out, "Output map file");
        build->add_option("--frequency", o.frequency, "Carrier frequency (Hz)");
        build->add_option("--ks-db", o.build_ks_db, "Default K_S stored in every record (dB)");
        build->add_option("--kd-db", o.build_kd_db, "Default K_D stored in every record (dB)");
        build->callback([&]
                        { action = [&]
                          { run.cmd_build(build); }; });

        auto *q = app.add_subcommand("query", "Print the record stored for a location");
        add_config(q, o);
        q->add_option("--map", o.map, "Map file");
        q->add_option("--out", o.out, "Output file (default: standard output)");
        add_location(q, o);
        q->callback([&]
                    { action = [&]
                      { run.cmd_query(q); }; });

        auto *upd = app.add_subcommand("update", "Write one hybrid channel snapshot as CSV");
        add_stats_common(upd, o);
        upd->callback([&]
                      { action = [&]
                        { run.cmd_update(upd); }; });

        auto *sim = app.add_subcommand("simulate", "Write CIR (and optionally CTF) CSV over a time window");
        add_config(sim, o);
        sim->add_option("--map", o.map, "Map file");
        sim->add_option("--out", o.out, "CIR output CSV (default: standard output)");
        sim->add_option("--ctf-out", o.ctf_out, "CTF output CSV");
        add_seed(sim, o);
        add_location(sim, o);
        add_overrides(sim, o);
        add_arrays(sim, o);
        sim->add_option("--t0", o.t0, "Start time (s)");
        sim->add_option("--dt", o.dt, "Time step (s)");
        sim->add_option("--steps", o.steps, "Number of snapshots");
        sim->add_option("--bandwidth", o.bandwidth, "CTF bandwidth (Hz)");
        sim->add_option("--n-freq", o.n_freq, "CTF frequency points");
        sim->callback([&]
                      { action = [&]
                        { run.cmd_simulate(sim); }; });

        auto *st = app.add_subcommand("stats", "Channel statistics as CSV");
        st->require_subcommand(1);
        auto *fcf = st->add_subcommand("fcf", "Frequency correlation function");
        add_stats_common(fcf, o);
        fcf->add_option("--df-max", o.df_max, "Largest frequency lag (Hz)");
        fcf->add_option("--n-df", o.n_df, "Frequency lag count");
        fcf->callback([&]
                      { action = [&]
                        { run.cmd_fcf(fcf); }; });

        auto *dpsd = st->add_subcommand("delay-psd", "Delay PSD from the frequency correlation");
        add_stats_common(dpsd, o);
        dpsd->add_option("--df-max", o.df_max, "Largest frequency lag (Hz)");
        dpsd->add_option("--n-df", o.n_df, "Frequency lag count");
        dpsd->callback([&]
                       { action = [&]
                         { run.cmd_delay_psd(dpsd); }; });

        auto *acdf = st->add_subcommand("angular-spread-cdf", "CDF of the RMS angular spread over the route");
        add_stats_common(acdf, o);
        acdf->add_option("--n-lags", o.n_lags, "Spatial lag count");
        acdf->add_option("--lag-spacing", o.lag_spacing, "Spatial lag spacing (wavelengths)");
        acdf->add_option("--n-theta", o.n_theta, "Angle grid size over [0, 180] deg");
        acdf->callback([&]
                       { action = [&]
                         { run.cmd_angular_cdf(acdf); }; });

        auto *dcdf = st->add_subcommand("doppler-spread-cdf", "CDF of the RMS Doppler spread over the route");
        add_stats_common(dcdf, o);
        dcdf->add_option("--n-lags", o.n_lags, "Time lag count");
        dcdf->add_option("--lag-dt", o.lag_dt, "Time lag spacing (s)");
        dcdf->callback([&]
                       { action = [&]
                         { run.cmd_doppler_cdf(dcdf); }; });

        auto *lcr = st->add_subcommand("lcr", "Analytic and Monte-Carlo level crossing rate");
        add_stats_common(lcr, o);
        lcr->add_option("--levels", o.levels, "Levels in dB re RMS: start:step:stop or a comma list");
        lcr->add_option("--variable", o.variable, "spatial (per m of rx travel) | temporal (per s)");
        lcr->add_option("--samples", o.samples, "Total Monte-Carlo envelope samples");
        lcr->add_option("--realizations", o.realizations, "Cluster realizations for the Monte-Carlo LCR");
        lcr->callback([&]
                      { action = [&]
                        { run.cmd_lcr(lcr); }; });

        auto *bench = app.add_subcommand("bench", "Time a full static rebuild against update_snapshot");
        add_config(bench, o);
        add_grid(bench, o);
        add_seed(bench, o);
        bench->add_option("--out", o.out, "Report CSV (default: standard output)");
        bench->add_option("--repeats", o.repeats, "Timing repeats per location (best of)");
        bench->callback([&]
                        { action = [&]
                          { run.cmd_bench(bench); }; });

        std::vector<std::string> argv_store{"dcm"};
        argv_store.insert(argv_store.end(), args.begin(), args.end());
        std::vector<const char *> argv;
        for (const auto &a : argv_store)
            argv.push_back(a.c_str());

        // bench defaults to a deeper trace than build
        if (!args.empty() && args.front() == "bench")
            o.max_order = 3;

        try
        {
            app.parse(int(argv.size()), argv.data());
        }
        catch (const CLI::CallForHelp &)
        {
            CLI::App *target = &app;
            for (auto *sub = app.get_subcommands().empty() ? nullptr : app.get_subcommands().front(); sub;
                 sub = sub->get_subcommands().empty() ? nullptr : sub->get_subcommands().front())
                target = sub;
            out << target->help();
            return 0;
        }
        catch (const CLI::ParseError &e)
        {
            err << "dcm: " << e.what() << "\n";
            CLI::App *target = &app;
            for (auto *sub = app.get_subcommands().empty() ? nullptr : app.get_subcommands().front(); sub;
                 sub = sub->get_subcommands().empty() ? nullptr : sub->get_subcommands().front())
                target = sub;
            err << target->help();
            return 2;
        }

        try
        {
            run.load_config();
            if (action)
                action();
        }
        catch (const UsageError &e)
        {
            err << "dcm: " << e.what() << "\n";
            return 2;
        }
        catch (const std::exception &e)
        {
            err << "dcm: " << e.what() << "\n";
            return 1;
        }
        return 0;
    }
}
