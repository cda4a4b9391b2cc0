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

// Acceptance harness: `acceptance --criterion N` checks one criterion and prints a PASS / FAIL line.

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <numeric>
#include <random>
#include <sstream>
#include <unistd.h>

#include <CLI11.hpp>

#include "dcm/channel_map.hpp"
#include "dcm/cli.hpp"
#include "dcm/parallel.hpp"
#include "dcm/rng.hpp"
#include "dcm/text.hpp"
#include "oracles/image_oracle.hpp"
#include "oracles/random_scene.hpp"
#include "oracles/stat_oracles.hpp"

using namespace dcm;
namespace fs = std::filesystem;

namespace
{
    constexpr double fc = 5.5e9;
    const double inf = std::numeric_limits<double>::infinity();

    struct Outcome
    {
        bool pass = true;
        std::vector<std::string> notes;

        void check(bool ok, const std::string &what)
        {
            pass = pass && ok;
            notes.push_back((ok ? "" : "FAILED ") + what);
        }
    };

    std::string fmt(double v, int digits = 6) { return format_g(v, digits); }

    double median(std::vector<double> v)
    {
        std::sort(v.begin(), v.end());
        const std::size_t n = v.size();
        return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
    }

    double mean(const std::vector<double> &v) { return std::accumulate(v.begin(), v.end(), 0.0) / double(v.size()); }

    std::string data_path(const std::string &name) { return std::string(DCM_DATA_DIR) + "/" + name; }

    const Scene &canyon()
    {
        static const Scene s = load_scene_file(data_path("street_canyon.scn"));
        return s;
    }

    GridSpec canyon_grid()
    {
        GridSpec g;
        g.origin = {10, -5, 1.5};
        g.spacing = 1.0;
        g.extents = {10, 10, 1};
        return g;
    }

    const DcmMap &canyon_map()
    {
        static const DcmMap m = [] {
            const Vec3 tx[1] = {{0, 0, 10}};
            return build_map(canyon(), tx, canyon_grid(), 2, fc);
        }();
        return m;
    }

    // Cluster-count sweeps keep the power per dynamic cluster fixed relative to the 15-cluster baseline.
    double swept_k_d(int n_clusters)
    {
        return db_to_linear(10.0) * 15.0 / double(n_clusters);
    }

    ModelState canyon_model(const DcmRecord &rec, int n_clusters, std::uint64_t seed)
    {
        ModelState m;
        m.static_mpcs = rec.static_mpcs();
        m.gbsm.n_clusters = n_clusters;
        m.gbsm.seed = seed;
        m.location = rec.location();
        m.k_s = rec.k_s;
        m.k_d = swept_k_d(n_clusters);
        return m;
    }

    Scene ground_scene()
    {
        Scene s;
        s.add_material(concrete());
        s.add_facet({{-500, -500, 0}, {500, -500, 0}, {500, 500, 0}, {-500, 500, 0}}, 0);
        return s;
    }

    // ------------------------------------------------------------------------

    Outcome k_algebra()
    {
        Outcome o;
        double worst_k = 0.0, worst_w = 0.0;
        for (int i = 0; i < 100; ++i)
            for (int j = 0; j < 100; ++j)
            {
                const double ks = std::pow(10.0, -4.0 + 8.0 * i / 99.0);
                const double kd = std::pow(10.0, -4.0 + 8.0 * j / 99.0);
                const double k = compose_k(ks, kd);
                const double want = 1.0 / ks + 1.0 / kd;
                worst_k = std::max(worst_k, std::abs(1.0 / k - want) / want);
                const auto w = mixing_weights(ks, kd);
                worst_w = std::max(worst_w, std::abs(w.w_static * w.w_static + w.w_dynamic * w.w_dynamic - 1.0));
            }
        o.check(worst_k <= 1e-12, "harmonic composition rel err " + fmt(worst_k, 3));
        o.check(worst_w <= 1e-12, "mixing weight squares err " + fmt(worst_w, 3));
        o.check(compose_k(10, inf) == 10.0 && compose_k(inf, 4) == 4.0, "absent components");
        return o;
    }

    Outcome tracer_oracle()
    {
        Outcome o;
        std::mt19937_64 gen(20260101);
        std::size_t compared = 0, reflections = 0;
        bool sets = true;
        double worst_delay = 0.0, worst_power = 0.0;
        for (int trial = 0; trial < 20; ++trial)
        {
            const int facets = 1 + trial % 4;
            const int order = 1 + trial % 2;
            const auto r = oracle::random_scene(gen, facets);
            const auto got = trace_static_paths(r.scene, r.tx, r.rx, order, fc);
            const auto want = oracle::enumerate(r.walls, {r.tx.x, r.tx.y, r.tx.z}, {r.rx.x, r.rx.y, r.rx.z}, order, fc);
            std::map<std::vector<std::size_t>, const oracle::Path *> by_seq;
            for (const auto &p : want)
                by_seq[p.walls] = &p;
            if (got.size() != want.size())
                sets = false;
            for (const auto &p : got)
            {
                auto it = by_seq.find(p.facets);
                if (it == by_seq.end())
                {
                    sets = false;
                    continue;
                }
                ++compared;
                reflections += !p.facets.empty();
                worst_delay = std::max(worst_delay, std::abs(p.mpc.delay - it->second->delay));
                worst_power = std::max(worst_power, std::abs(p.mpc.power / it->second->power - 1.0));
            }
        }
        o.check(sets, "identical path sets (" + std::to_string(compared) + " paths, " + std::to_string(reflections) +
                          " reflections)");
        o.check(worst_delay <= 1e-12, "delay err " + fmt(worst_delay, 3) + " s");
        o.check(worst_power <= 1e-9, "power rel err " + fmt(worst_power, 3));

        const auto two = trace_static_mpcs(ground_scene(), {0, 0, 10}, {100, 0, 1.5}, 1, fc);
        o.check(two.size() == 2, "two-ray path count " + std::to_string(two.size()));
        if (two.size() == 2)
        {
            o.check(std::abs(two[0].delay * 1e9 - 334.77) <= 0.01, "LoS " + fmt(two[0].delay * 1e9) + " ns");
            o.check(std::abs(two[1].delay * 1e9 - 335.77) <= 0.01, "ground " + fmt(two[1].delay * 1e9) + " ns");
        }
        const double g = friis_path_gain(100.0, fc);
        o.check(std::abs(g + 87.26) <= 0.01, "Friis " + fmt(g) + " dB");
        return o;
    }

    // dynamic responses of independent cluster draws, shared by the composition checks
    const std::vector<MimoTaps> &cluster_draws(std::size_t n)
    {
        static std::vector<MimoTaps> draws;
        if (draws.size() != n)
        {
            draws.assign(n, MimoTaps{});
            const Location loc{{0, 0, 10}, {100, 0, 1.5}};
            parallel_for(n, [&](std::size_t s)
                         {
                GbsmConfig cfg;
                cfg.seed = derive_seed(777, {s});
                draws[s] = dynamic_cir(spawn_clusters(cfg, loc), omni_antenna(), omni_antenna(), 0.0, cfg); });
        }
        return draws;
    }

    std::vector<double> envelopes(const MimoTaps &hs, const KFactors &k, std::size_t n, RicianParams &params)
    {
        const auto &draws = cluster_draws(n);
        std::vector<double> env(n);
        for (std::size_t s = 0; s < n; ++s)
        {
            const auto snap = combine_cir(hs, draws[s], k);
            env[s] = std::abs(narrowband_sum(snap.taps.at(0, 0)));
            if (s == 0)
                params = rician_params(snap);
        }
        return env;
    }

    Outcome rician()
    {
        Outcome o;
        const std::size_t n = 100000;
        const double crit = oracle::ks_critical_5pct(n);
        const AntennaArray omni = omni_antenna();

        // LoS plus dynamic part, K = 3
        Mpc los;
        los.delay = 334.77e-9;
        los.power = 1.0;
        const Mpc only_los[1] = {los};
        RicianParams p;
        auto env = envelopes(static_cir(only_los, omni, omni, 1.0, fc), make_kfactors(inf, 3.0), n, p);
        o.check(std::abs(std::norm(p.a) / (2 * p.sigma2) - 3.0) < 1e-9, "K of the fitted density " +
                                                                           fmt(std::norm(p.a) / (2 * p.sigma2)));
        double d = oracle::ks_statistic(env, oracle::rician_cdf(std::abs(p.a), p.sigma2));
        o.check(d < crit, "Rician KS D = " + fmt(d, 4) + " (crit " + fmt(crit, 4) + ")");

        // two-ray static part, k_s = k_d = 6 so K = 3
        const auto two = trace_static_mpcs(ground_scene(), {0, 0, 10}, {100, 0, 1.5}, 1, fc);
        env = envelopes(static_cir(two, omni, omni, 6.0, fc), make_kfactors(6.0, 6.0), n, p);
        d = oracle::ks_statistic(env, oracle::rician_cdf(std::abs(p.a), p.sigma2));
        o.check(d < crit, "two-ray Rician KS D = " + fmt(d, 4));

        env = envelopes(MimoTaps{}, make_kfactors(6.0, 6.0), n, p);
        o.check(p.a == complex(0.0), "A = 0 without static taps");
        d = oracle::ks_statistic(env, oracle::rayleigh_cdf(p.sigma2));
        o.check(d < crit, "Rayleigh KS D = " + fmt(d, 4));
        return o;
    }

    Outcome fcf_identities()
    {
        Outcome o;
        ModelState hybrid = canyon_model(canyon_map().records[45], 15, 5);
        hybrid.k_d = canyon_map().records[45].k_d;
        const double zero[1] = {0.0};
        const double r0 = std::abs(fcf_closed_form(hybrid, zero, 50)[0].value - 1.0);
        o.check(r0 <= 1e-9, "|FCF(0) - 1| = " + fmt(r0, 3));

        std::vector<double> grid;
        for (int i = 0; i < 256; ++i)
            grid.push_back(i * 0.25e6);
        std::vector<complex> r;
        for (const auto &c : fcf_closed_form(hybrid, grid, 50))
            r.push_back(c.value);
        const Psd psd = delay_psd(grid, r);
        const double mass_err = std::abs(psd.mass() - psd.negative_mass - r[0].real());
        o.check(mass_err <= 1e-6, "delay PSD mass - R(0) = " + fmt(mass_err, 3));

        // two equal taps 100 ns apart
        ModelState two;
        two.gbsm.n_clusters = 0;
        two.k_s = 1.0;
        Mpc a, b;
        a.delay = 200e-9;
        a.power = 1.0;
        b = a;
        b.kind = MpcKind::reflection;
        b.order = 1;
        b.delay = 300e-9;
        two.static_mpcs = {a, b};
        std::vector<double> fine;
        for (int i = 0; i < 400; ++i)
            fine.push_back(i * 0.05e6);
        const auto f2 = fcf_closed_form(two, fine);
        std::size_t at = 0;
        for (std::size_t i = 1; i < 200; ++i)
            if (std::abs(f2[i].value) < std::abs(f2[at].value))
                at = i;
        o.check(std::abs(fine[at] - 5e6) <= 0.05e6, "two-tap null at " + fmt(fine[at] / 1e6) + " MHz");

        // equal taps at 0 and 100 ns, both on delay bins
        const std::size_t n = 201;
        const double step = 1.0 / ((2 * n - 1) * 1e-9) / 2.5;
        std::vector<double> g2(n);
        for (std::size_t i = 0; i < n; ++i)
            g2[i] = double(i) * step;
        two.static_mpcs[0].delay = 0.0;
        two.static_mpcs[1].delay = 100e-9;
        std::vector<complex> r2;
        for (const auto &c : fcf_closed_form(two, g2))
            r2.push_back(c.value);
        const double spread = rms_spread(delay_psd(g2, r2));
        o.check(std::abs(spread - 50e-9) <= 1e-9 * 50e-9, "two-tap rms spread " + fmt(spread * 1e9, 12) + " ns");
        const double direct = rms_spread(Psd{{0.0, 100e-9}, {0.5, 0.5}, 0.0});
        o.check(direct == 50e-9, "two-point rms spread " + fmt(direct * 1e9, 17) + " ns");
        return o;
    }

    Outcome lcr()
    {
        Outcome o;
        const double fm = 30.0;
        LcrInputs ray;
        ray.b0 = 0.5;
        ray.b2 = 2.0 * pi * pi * fm * fm * ray.b0;
        for (int i = 0; i < 50; ++i)
            ray.levels.push_back(std::pow(10.0, (-30.0 + 40.0 * i / 49.0) / 20.0));
        const auto v = lcr_analytic(ray);
        double worst = 0.0;
        for (std::size_t i = 0; i < v.size(); ++i)
            worst = std::max(worst, std::abs(v[i] - oracle::rayleigh_lcr(fm, ray.levels[i])));
        o.check(worst <= 1e-6, "Rayleigh limit err " + fmt(worst, 3) + " at 50 levels");

        // LoS plus dynamic clusters, K = 3, crossings per second at a fixed rx
        ModelState m;
        Mpc los;
        los.delay = 334.77e-9;
        los.power = 1.0;
        los.aoa = {0.0, pi};
        m.static_mpcs = {los};
        m.location = {{0, 0, 10}, {100, 0, 1.5}};
        m.k_s = inf;
        m.k_d = 3.0;
        m.gbsm.seed = 17;
        LcrInputs in = lcr_moments(m, LcrVariable::temporal, 0.0, 400, 17);
        std::vector<double> levels_db;
        for (int i = -12; i <= 6; ++i)
            levels_db.push_back(i);
        for (double l : levels_db)
            in.levels.push_back(std::pow(10.0, l / 20.0));
        const auto ana = lcr_analytic(in);

        const std::size_t realizations = 200, per = 5000;
        const double fmax = (m.gbsm.speed_a + m.gbsm.speed_z) * fc / speed_of_light;
        const double step = 1.0 / (50.0 * fmax);
        std::vector<std::vector<double>> env(realizations);
        double power = 0.0;
        for (std::size_t r = 0; r < realizations; ++r)
        {
            const auto h = narrowband_series(m, 0.0, step, per, derive_seed(17, {hash_string("acceptance-lcr"), r}));
            for (const auto &x : h)
            {
                env[r].push_back(std::abs(x));
                power += std::norm(x);
            }
        }
        const double rms = std::sqrt(power / double(realizations * per));
        for (auto &e : env)
            for (double &x : e)
                x /= rms;
        const double peak = *std::max_element(ana.begin(), ana.end());
        double worst_rel = 0.0;
        std::string detail;
        for (std::size_t k = 0; k < levels_db.size(); ++k)
        {
            if (ana[k] < 0.7 * peak)
                continue;
            double acc = 0.0;
            for (const auto &e : env)
                acc += lcr_empirical(e, in.levels[k], double(per - 1) * step);
            const double emp = acc / double(realizations);
            const double rel = (emp - ana[k]) / ana[k];
            if (std::abs(rel) > std::abs(worst_rel))
                worst_rel = rel;
            detail += " " + fmt(levels_db[k], 3) + "dB:" + fmt(emp, 4) + "/" + fmt(ana[k], 4);
        }
        o.check(std::abs(worst_rel) <= 0.15, "empirical vs analytic near the peak, worst " + fmt(100 * worst_rel, 3) +
                                                 "% over " + std::to_string(realizations * per) + " samples;" + detail);
        return o;
    }

    Outcome trends()
    {
        Outcome o;
        const std::uint64_t seeds = 100;
        const int counts[3] = {5, 15, 25};
        const DcmMap &map = canyon_map();

        // (a) Doppler spread against cluster speed, pure dynamic channel
        {
            std::vector<double> slow, fast;
            DopplerOptions d;
            d.n_lags = 256;
            d.dt = 2e-3;
            d.ensemble = 4;
            for (std::uint64_t s = 1; s <= seeds; ++s)
            {
                ModelState m;
                m.location = map.records[45].location();
                d.seed = s;
                slow.push_back(rms_spread(doppler_psd(m, d)));
                m.gbsm.speed_a = m.gbsm.speed_z = 1.0;
                fast.push_back(rms_spread(doppler_psd(m, d)));
            }
            const double ratio = median(fast) / median(slow);
            o.check(std::abs(ratio - 2.0) <= 0.2, "(a) median Doppler spread " + fmt(median(slow), 4) + " -> " +
                                                      fmt(median(fast), 4) + " Hz, ratio " + fmt(ratio, 4));
        }

        // (b) mean |FCF| at 5 MHz against cluster count
        {
            std::vector<double> means;
            const double df[1] = {5e6};
            for (int n : counts)
            {
                std::vector<double> v;
                for (std::uint64_t s = 1; s <= seeds; ++s)
                {
                    const ModelState m = canyon_model(map.records[45], n, s);
                    v.push_back(std::abs(fcf_closed_form(m, df, 1, s)[0].value));
                }
                means.push_back(mean(v));
            }
            o.check(means[0] > means[1] && means[1] > means[2],
                    "(b) mean |FCF| " + fmt(means[0], 4) + " > " + fmt(means[1], 4) + " > " + fmt(means[2], 4));
        }

        // (c) route extremes of the angular spread with dynamic angles drawn from the static support
        {
            AngularOptions ao;
            ao.n_lags = 128;
            ao.ensemble = 4;
            const double bin = 180.0 / double(ao.n_theta - 1);
            const AntennaArray ula = uniform_linear_array(8, 0.5 * wavelength(fc));
            std::vector<const DcmRecord *> route;
            for (const auto &r : map.records)
                if (r.index[1] == 5)
                    route.push_back(&r);
            std::vector<double> lo, hi;
            for (int n : counts)
            {
                std::vector<double> mins, maxs;
                for (std::uint64_t s = 1; s <= seeds; ++s)
                {
                    double mn = inf, mx = 0.0;
                    for (const auto *rec : route)
                    {
                        ModelState m = canyon_model(*rec, n, s);
                        m.gbsm.support = AngleSupport::follow_static;
                        m.rx_array = ula;
                        ao.seed = s;
                        const double sp = rad_to_deg(rms_spread(angular_psd(m, ao)));
                        mn = std::min(mn, sp);
                        mx = std::max(mx, sp);
                    }
                    mins.push_back(mn);
                    maxs.push_back(mx);
                }
                lo.push_back(mean(mins));
                hi.push_back(mean(maxs));
            }
            const double dlo = *std::max_element(lo.begin(), lo.end()) - *std::min_element(lo.begin(), lo.end());
            const double dhi = *std::max_element(hi.begin(), hi.end()) - *std::min_element(hi.begin(), hi.end());
            o.check(dlo <= bin && dhi <= bin, "(c) route min " + fmt(lo[0], 4) + "/" + fmt(lo[1], 4) + "/" +
                                                  fmt(lo[2], 4) + " deg, max " + fmt(hi[0], 4) + "/" + fmt(hi[1], 4) +
                                                  "/" + fmt(hi[2], 4) + " deg (bin " + fmt(bin, 3) + ")");
        }

        // (d) LCR above the peak against cluster count
        {
            std::vector<double> levels_db;
            for (int i = -20; i <= 8; ++i)
                levels_db.push_back(i);
            std::vector<std::vector<double>> curves;
            for (int n : counts)
            {
                std::vector<double> acc(levels_db.size(), 0.0);
                for (std::uint64_t s = 1; s <= seeds; ++s)
                {
                    const ModelState m = canyon_model(map.records[45], n, s);
                    LcrInputs in = lcr_moments(m, LcrVariable::temporal, 0.0, 4, s);
                    for (double l : levels_db)
                        in.levels.push_back(std::pow(10.0, l / 20.0));
                    const auto v = lcr_analytic(in);
                    for (std::size_t k = 0; k < v.size(); ++k)
                        acc[k] += v[k] / double(seeds);
                }
                curves.push_back(acc);
            }
            const auto &base = curves[1];
            const std::size_t peak = std::size_t(std::max_element(base.begin(), base.end()) - base.begin());
            bool up = true;
            std::size_t checked = 0;
            for (std::size_t k = peak + 1; k < levels_db.size(); ++k)
            {
                if (base[k] < 1e-3 * base[peak])
                    break;
                ++checked;
                up = up && curves[0][k] < curves[1][k] && curves[1][k] < curves[2][k];
            }
            const std::size_t k = std::min(peak + 3, levels_db.size() - 1);
            o.check(up && checked > 0, "(d) LCR increases at " + std::to_string(checked) + " levels above the " +
                                           fmt(levels_db[peak], 3) + " dB peak; at " + fmt(levels_db[k], 3) +
                                           " dB: " + fmt(curves[0][k], 4) + " < " + fmt(curves[1][k], 4) + " < " +
                                           fmt(curves[2][k], 4) + " /s");
        }
        return o;
    }

    Outcome timing()
    {
        Outcome o;
        const Scene &scene = canyon();
        o.check(scene.facets.size() >= 100, std::to_string(scene.facets.size()) + " facets");
        const BenchReport r = benchmark_update(scene, {0, 0, 10}, canyon_grid(), 3, GbsmConfig{}, 1, 1);
        o.check(r.locations >= 100, std::to_string(r.locations) + " locations");
        o.check(r.ratio() <= 0.05, "update " + fmt(r.update_median_s * 1e3, 4) + " ms vs rebuild " +
                                       fmt(r.rebuild_median_s * 1e3, 4) + " ms, ratio " + fmt(100 * r.ratio(), 3) + "%");
        return o;
    }

    Outcome calibration()
    {
        Outcome o;
        const DcmMap &map = canyon_map();
        const DcmRecord &rec = map.records[45];
        const std::vector<Mpc> traced = trace_static_mpcs(canyon(), rec.tx, rec.rx, map.build.max_order, fc);

        // reference = static paths plus every dynamic ray, with the powers the hybrid model assigns
        auto reference = [&](std::uint64_t seed, bool realized, Rng *jitter)
        {
            GbsmConfig cfg = map.gbsm;
            cfg.seed = seed;
            ModelState m;
            m.static_mpcs = rec.static_mpcs();
            m.gbsm = cfg;
            m.k_s = rec.k_s;
            m.k_d = rec.k_d;
            const BranchWeights w = m.weights();
            std::vector<Mpc> ref;
            double nlos_total = 0.0;
            for (const auto &s : m.static_mpcs)
                if (s.kind != MpcKind::los)
                    nlos_total += s.power;
            for (Mpc s : m.static_mpcs)
            {
                s.power = s.kind == MpcKind::los ? w.los : w.nlos * s.power / nlos_total;
                ref.push_back(s);
            }
            const auto clusters = spawn_clusters(cfg, rec.location(), m.static_mpcs);
            const MimoTaps hd = dynamic_cir(clusters, omni_antenna(), omni_antenna(), 0.0, cfg);
            for (const auto &t : hd.at(0, 0))
            {
                Mpc d;
                d.kind = MpcKind::dynamic;
                d.delay = t.delay;
                d.aoa = t.aoa;
                const auto &c = clusters[std::size_t(t.cluster)];
                d.power = w.dynamic * (realized ? std::norm(t.amplitude) : c.power * c.rays[std::size_t(t.ray)].power_fraction);
                ref.push_back(d);
            }
            if (jitter)
                for (auto &x : ref)
                {
                    x.delay += 0.3e-9 * jitter->normal();
                    x.aoa.azimuth += deg_to_rad(1.0) * jitter->normal();
                    // realized powers carry estimation noise of about 1 dB
                    x.power *= db_to_linear(jitter->normal());
                }
            return ref;
        };

        const auto exact_ref = reference(1, false, nullptr);
        const auto exact = estimate_k_split(match_mpcs(exact_ref, traced), exact_ref);
        o.check(std::abs(exact.k_s / rec.k_s - 1) < 1e-9 && std::abs(exact.k_d / rec.k_d - 1) < 1e-9,
                "expected powers give k_s " + fmt(linear_to_db(exact.k_s), 8) + " dB, k_d " +
                    fmt(linear_to_db(exact.k_d), 8) + " dB");

        std::vector<double> ks, kd;
        for (std::uint64_t s = 1; s <= 500; ++s)
        {
            Rng jitter(derive_seed(s, {hash_string("calibration-noise")}));
            const auto ref = reference(s, true, &jitter);
            const auto k = estimate_k_split(match_mpcs(ref, traced), ref);
            ks.push_back(k.k_s);
            kd.push_back(k.k_d);
        }
        const double eks = mean(ks) / rec.k_s - 1, ekd = mean(kd) / rec.k_d - 1;
        o.check(std::abs(eks) <= 0.10 && std::abs(ekd) <= 0.10,
                "500 realizations: k_s err " + fmt(100 * eks, 3) + "%, k_d err " + fmt(100 * ekd, 3) + "%");

        Mpc ra, sb;
        ra.kind = sb.kind = MpcKind::reflection;
        ra.delay = 100e-9;
        ra.aoa.azimuth = deg_to_rad(30);
        sb.delay = 102e-9;
        sb.aoa.azimuth = deg_to_rad(31);
        const Mpc rs[1] = {ra}, ss[1] = {sb};
        const auto m = match_mpcs(rs, ss, MatchScales{5e-9, deg_to_rad(5.0)}, 1.0);
        o.check(m.pairs.size() == 1 && std::abs(m.pairs[0].distance - 0.447) < 5e-4,
                "match distance " + (m.pairs.empty() ? std::string("none") : fmt(m.pairs[0].distance, 4)));
        return o;
    }

    struct Cli
    {
        int code = 0;
        std::string out, err;
    };

    Cli cli(const std::vector<std::string> &args)
    {
        std::ostringstream out, err;
        Cli c;
        c.code = run_command(args, out, err);
        c.out = out.str();
        c.err = err.str();
        return c;
    }

    std::string slurp(const fs::path &p)
    {
        std::ifstream f(p, std::ios::binary);
        return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
    }

    // every file left in `dir` plus the captured stdout of each run
    std::map<std::string, std::string> cli_session(const fs::path &dir, const std::string &config, bool &ok)
    {
        fs::remove_all(dir);
        fs::create_directories(dir);
        const std::vector<std::vector<std::string>> runs{
            {"build", "--config", config, "--origin", "10,-5,1.5", "--extents", "10,2,1", "--out", "map.dcm"},
            {"query", "--config", config, "--rx", "13,-4,1.5"},
            {"update", "--config", config, "--rx", "13,-4,1.5", "--t", "0.25", "--out", "update.csv"},
            {"simulate", "--config", config, "--rx", "12,-5,1.5", "--steps", "3", "--dt", "0.01", "--n-freq", "16",
             "--out", "cir.csv", "--ctf-out", "ctf.csv"},
            {"stats", "fcf", "--config", config, "--rx", "13,-4,1.5", "--out", "fcf.csv"},
            {"stats", "delay-psd", "--config", config, "--rx", "13,-4,1.5", "--out", "psd.csv"},
            {"stats", "doppler-spread-cdf", "--config", config, "--out", "doppler.csv"},
            {"stats", "angular-spread-cdf", "--config", config, "--rx", "14,-4,1.5", "--out", "angular.csv"},
            {"stats", "lcr", "--config", config, "--rx", "13,-4,1.5", "--levels", "-20:2:8", "--out", "lcr.csv"},
        };
        std::map<std::string, std::string> out;
        for (std::size_t i = 0; i < runs.size(); ++i)
        {
            const Cli c = cli(runs[i]);
            ok = ok && c.code == 0;
            if (c.code != 0)
                std::cerr << runs[i][0] << ": " << c.err;
            out["stdout:" + std::to_string(i)] = c.out;
        }
        for (const auto &e : fs::directory_iterator(dir))
            out[e.path().filename().string()] = slurp(e.path());
        return out;
    }

    Outcome persistence()
    {
        Outcome o;
        const std::string text = save_map(canyon_map());
        const std::string again = save_map(load_map(text));
        o.check(again == text, "save -> load -> save identical (" + std::to_string(text.size()) + " bytes)");

        const fs::path root = fs::temp_directory_path() / ("dcm_acceptance_" + std::to_string(::getpid()));
        fs::create_directories(root);
        const fs::path config = root / "run.json";
        auto write_config = [&](const fs::path &out_dir)
        {
            std::ofstream(config) << "{\n  \"scene\": \"" << data_path("street_canyon.scn") << "\",\n"
                                  << "  \"map\": \"" << (out_dir / "map.dcm").string() << "\",\n"
                                  << "  \"out_dir\": \"" << out_dir.string() << "\",\n"
                                  << "  \"seed\": 2024,\n"
                                  << "  \"gbsm\": {\"n_clusters\": 8, \"rays_per_cluster\": 6},\n"
                                  << "  \"stats\": {\"ensemble\": 6, \"n_lags\": 48, \"n_df\": 41, \"samples\": 20000,"
                                     " \"realizations\": 8}\n}\n";
        };

        std::vector<std::map<std::string, std::string>> sessions;
        bool ok = true;
        for (const char *threads : {"1", "1", "2", "4"})
        {
            ::setenv("DCM_THREADS", threads, 1);
            // the same directory every time, so paths written into outputs agree
            write_config(root / "out");
            sessions.push_back(cli_session(root / "out", config.string(), ok));
        }
        ::unsetenv("DCM_THREADS");
        o.check(ok, "all CLI runs exit 0");
        bool same = true;
        for (std::size_t i = 1; i < sessions.size(); ++i)
            same = same && sessions[i] == sessions[0];
        o.check(same && sessions[0].size() > 9,
                std::to_string(sessions[0].size()) + " outputs byte-identical over 2 repeats and 1/2/4 workers");
        fs::remove_all(root);
        return o;
    }
}

int main(int argc, char **argv)
{
    CLI::App app{"dcm acceptance checks"};
    int criterion = 0;
    app.add_option("--criterion", criterion, "Criterion number (1-9)")->required()->check(CLI::Range(1, 9));
    CLI11_PARSE(app, argc, argv);

    static const char *names[] = {"",
                                  "K-factor algebra",
                                  "tracer vs image oracle",
                                  "Rician composition",
                                  "FCF and PSD identities",
                                  "level crossing rate",
                                  "cluster sweep trends",
                                  "update vs rebuild timing",
                                  "K split calibration",
                                  "persistence and determinism"};
    Outcome (*const checks[])() = {nullptr,  k_algebra, tracer_oracle, rician, fcf_identities, lcr, trends, timing,
                                   calibration, persistence};
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try
    {
        o = checks[criterion]();
    }
    catch (const std::exception &e)
    {
        o.check(false, std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    // wall-time budgets in s, 0 = none
    static const double budget[] = {0, 1, 30, 120, 0, 300, 600, 300, 0, 0};
    if (budget[criterion] > 0)
        o.check(secs < budget[criterion], "runtime " + format_g(secs, 3) + " s of " + format_g(budget[criterion], 3) + " s");
    for (const auto &n : o.notes)
        std::cout << "  " << n << "\n";
    std::cout << "criterion " << criterion << " (" << names[criterion] << "): " << (o.pass ? "PASS" : "FAIL") << " ["
              << format_g(secs, 3) << " s]\n";
    return o.pass ? 0 : 1;
}
