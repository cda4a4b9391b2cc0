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

#include "dcm/stats.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "dcm/parallel.hpp"
#include "dcm/rng.hpp"

namespace dcm
{
    namespace
    {
        struct StaticSplit
        {
            const Mpc *los = nullptr;
            double nlos_total = 0.0;
        };

        StaticSplit split_static(const std::vector<Mpc> &mpcs)
        {
            StaticSplit s;
            for (const auto &m : mpcs)
            {
                if (m.kind == MpcKind::los)
                {
                    if (s.los)
                        throw std::invalid_argument("more than one LoS component");
                    s.los = &m;
                }
                else
                    s.nlos_total += m.power;
            }
            return s;
        }

        GbsmConfig realization_config(const GbsmConfig &base, std::uint64_t seed, std::uint64_t label, std::size_t r)
        {
            GbsmConfig cfg = base;
            cfg.seed = derive_seed(seed, {label, std::uint64_t(r)});
            return cfg;
        }

        // phase of H(t, f) H*(t + dt, f + df) for a component seen with delays tau1 and tau2
        inline complex lag_phasor(double fc, double fo, double df, double tau1, double tau2)
        {
            return std::polar(1.0, two_pi * ((fc - fo) * (tau1 - tau2) + tau2 * df));
        }

        struct QueryGeometry
        {
            Vec3 tx2, rx2; // displaced tx / rx offsets of the second factor
        };

        QueryGeometry geometry(const ModelState &model, const CorrelationQuery &q)
        {
            return {model.tx_array.axis() * q.dr_t + q.dl.tx, model.rx_array.axis() * q.dr_r + q.dl.rx};
        }
    }

    BranchWeights ModelState::weights() const
    {
        const auto s = split_static(static_mpcs);
        return branch_weights(k_s, k_d, s.los != nullptr, s.nlos_total > 0.0, gbsm.n_clusters > 0);
    }

    std::vector<BranchCorrelation> stfcf_branches(const ModelState &model, std::span<const CorrelationQuery> queries)
    {
        std::vector<BranchCorrelation> out(queries.size());
        if (queries.empty())
            return out;
        const std::size_t ensemble = queries.front().ensemble;
        const std::uint64_t seed = queries.front().seed;
        if (ensemble < 1)
            throw std::invalid_argument("ensemble size must be >= 1");
        for (const auto &q : queries)
            if (q.ensemble != ensemble || q.seed != seed)
                throw std::invalid_argument("batched queries must share ensemble size and seed");
            else if (!(q.t >= 0.0) || !(q.t + q.dt >= 0.0))
                throw std::invalid_argument("correlation times must be >= 0");

        const double fc = model.carrier();
        const auto split = split_static(model.static_mpcs);
        std::vector<QueryGeometry> geo;
        for (const auto &q : queries)
            geo.push_back(geometry(model, q));

        for (std::size_t i = 0; i < queries.size(); ++i)
        {
            const auto &q = queries[i];
            if (split.los)
            {
                const double t2 = plane_wave_delay(*split.los, geo[i].tx2, geo[i].rx2);
                out[i].los = lag_phasor(fc, q.f_offset, q.df, split.los->delay, t2);
            }
            if (split.nlos_total > 0.0)
            {
                complex acc = 0.0;
                for (const auto &m : model.static_mpcs)
                {
                    if (m.kind == MpcKind::los)
                        continue;
                    const double t2 = plane_wave_delay(m, geo[i].tx2, geo[i].rx2);
                    acc += (m.power / split.nlos_total) * lag_phasor(fc, q.f_offset, q.df, m.delay, t2);
                }
                out[i].nlos = acc;
            }
        }

        if (model.gbsm.n_clusters == 0)
            return out;

        const std::uint64_t label = hash_string("stfcf");
        std::vector<std::vector<complex>> per(ensemble, std::vector<complex>(queries.size()));
        parallel_for(ensemble, [&](std::size_t r)
                     {
                         const auto cfg = realization_config(model.gbsm, seed, label, r);
                         const auto clusters = spawn_clusters(cfg, model.location, model.static_mpcs);
                         auto &row = per[r];
                         for (std::size_t i = 0; i < queries.size(); ++i)
                         {
                             const auto &q = queries[i];
                             complex acc = 0.0;
                             for (const auto &c : clusters)
                                 for (std::size_t m = 0; m < c.rays.size(); ++m)
                                 {
                                     const double t1 = ray_delay(c, m, Vec3{}, Vec3{}, q.t);
                                     const double t2 = ray_delay(c, m, geo[i].tx2, geo[i].rx2, q.t + q.dt);
                                     acc += (c.power * c.rays[m].power_fraction) *
                                            lag_phasor(fc, q.f_offset, q.df, t1, t2);
                                 }
                             row[i] = acc;
                         } });

        for (std::size_t i = 0; i < queries.size(); ++i)
        {
            complex mean = 0.0;
            for (std::size_t r = 0; r < ensemble; ++r)
                mean += per[r][i];
            mean /= double(ensemble);
            double var = 0.0;
            for (std::size_t r = 0; r < ensemble; ++r)
                var += std::norm(per[r][i] - mean);
            out[i].dynamic = mean;
            out[i].dynamic_std_error = ensemble > 1 ? std::sqrt(var / double(ensemble - 1) / double(ensemble)) : 0.0;
        }
        return out;
    }

    std::vector<Correlation> stfcf(const ModelState &model, std::span<const CorrelationQuery> queries)
    {
        const BranchWeights w = model.weights();
        const auto br = stfcf_branches(model, queries);
        std::vector<Correlation> out(br.size());
        for (std::size_t i = 0; i < br.size(); ++i)
        {
            out[i].value = w.los * br[i].los + w.nlos * br[i].nlos + w.dynamic * br[i].dynamic;
            out[i].std_error = w.dynamic * br[i].dynamic_std_error;
        }
        return out;
    }

    Correlation stfcf(const ModelState &model, const CorrelationQuery &query)
    {
        return stfcf(model, std::span<const CorrelationQuery>(&query, 1)).front();
    }

    std::vector<Correlation> fcf_closed_form(const ModelState &model, std::span<const double> df_grid,
                                             std::size_t ensemble, std::uint64_t seed, double t)
    {
        if (ensemble < 1)
            throw std::invalid_argument("ensemble size must be >= 1");
        const BranchWeights w = model.weights();
        const auto split = split_static(model.static_mpcs);
        std::vector<Correlation> out(df_grid.size());

        for (std::size_t i = 0; i < df_grid.size(); ++i)
        {
            const double df = df_grid[i];
            complex s = 0.0;
            for (const auto &m : model.static_mpcs)
                if (m.kind != MpcKind::los && split.nlos_total > 0.0)
                    s += (m.power / split.nlos_total) * std::polar(1.0, two_pi * df * m.delay);
            complex l = split.los ? std::polar(1.0, two_pi * df * split.los->delay) : complex(0.0);
            out[i].value = w.nlos * s + w.los * l;
        }
        if (w.dynamic == 0.0)
            return out;

        const std::uint64_t label = hash_string("fcf");
        std::vector<std::vector<complex>> per(ensemble, std::vector<complex>(df_grid.size()));
        parallel_for(ensemble, [&](std::size_t r)
                     {
                         const auto cfg = realization_config(model.gbsm, seed, label, r);
                         const auto clusters = spawn_clusters(cfg, model.location, model.static_mpcs);
                         std::vector<std::pair<double, double>> pd; // (power, delay)
                         for (const auto &c : clusters)
                             for (std::size_t m = 0; m < c.rays.size(); ++m)
                                 pd.emplace_back(c.power * c.rays[m].power_fraction, ray_delay(c, m, Vec3{}, Vec3{}, t));
                         for (std::size_t i = 0; i < df_grid.size(); ++i)
                         {
                             complex acc = 0.0;
                             for (const auto &[p, tau] : pd)
                                 acc += p * std::polar(1.0, two_pi * df_grid[i] * tau);
                             per[r][i] = acc;
                         } });

        for (std::size_t i = 0; i < df_grid.size(); ++i)
        {
            complex mean = 0.0;
            for (std::size_t r = 0; r < ensemble; ++r)
                mean += per[r][i];
            mean /= double(ensemble);
            double var = 0.0;
            for (std::size_t r = 0; r < ensemble; ++r)
                var += std::norm(per[r][i] - mean);
            out[i].value += w.dynamic * mean;
            out[i].std_error = ensemble > 1 ? w.dynamic * std::sqrt(var / double(ensemble - 1) / double(ensemble)) : 0.0;
        }
        return out;
    }

    double Psd::mass() const
    {
        return std::accumulate(density.begin(), density.end(), 0.0);
    }

    double lag_window(Window w, long n, std::size_t n_lags)
    {
        if (w == Window::rectangular)
            return 1.0;
        return 0.5 * (1.0 + std::cos(pi * double(n) / double(n_lags)));
    }

    namespace
    {
        // Real DFT of a Hermitian-extended lag sequence, evaluated at bins k - offset of an M = 2N - 1 grid:
        // D_k = (1/M) sum_{|n|<N} w_n R_n exp(-j 2 pi (k - offset) n / M)
        std::vector<double> hermitian_dft(std::span<const complex> r, Window window, long offset)
        {
            const std::size_t n = r.size();
            const std::size_t m = 2 * n - 1;
            std::vector<complex> twiddle(m);
            for (std::size_t j = 0; j < m; ++j)
                twiddle[j] = std::polar(1.0, -two_pi * double(j) / double(m));
            std::vector<double> wr(n);
            for (std::size_t l = 0; l < n; ++l)
                wr[l] = lag_window(window, long(l), n);

            std::vector<double> d(m);
            for (std::size_t k = 0; k < m; ++k)
            {
                const long kk = long(k) - offset;
                const std::size_t step = std::size_t(((kk % long(m)) + long(m)) % long(m));
                double acc = wr[0] * r[0].real();
                std::size_t idx = 0;
                for (std::size_t l = 1; l < n; ++l)
                {
                    idx += step;
                    if (idx >= m)
                        idx -= m;
                    acc += 2.0 * wr[l] * (r[l] * twiddle[idx]).real();
                }
                d[k] = acc / double(m);
            }
            return d;
        }

        Psd clamp(std::vector<double> support, std::vector<double> density)
        {
            Psd p;
            p.support = std::move(support);
            for (auto &x : density)
                if (x < 0.0)
                {
                    p.negative_mass -= x;
                    x = 0.0;
                }
            p.density = std::move(density);
            return p;
        }

        void check_uniform(std::span<const double> grid)
        {
            if (grid.size() < 2)
                throw std::invalid_argument("grid needs at least 2 points");
            if (grid[0] != 0.0)
                throw std::invalid_argument("lag grid must start at 0");
            const double step = grid[1] - grid[0];
            if (!(step > 0.0))
                throw std::invalid_argument("grid must be strictly increasing");
            for (std::size_t i = 2; i < grid.size(); ++i)
                if (std::abs(grid[i] - double(i) * step) > 1e-9 * step * double(i))
                    throw std::invalid_argument("non-uniform grid");
        }
    }

    Psd delay_psd(std::span<const double> df_grid, std::span<const complex> fcf)
    {
        if (df_grid.size() != fcf.size())
            throw std::invalid_argument("grid and FCF sizes differ");
        check_uniform(df_grid);
        const double step = df_grid[1];
        const std::size_t m = 2 * fcf.size() - 1;
        auto d = hermitian_dft(fcf, Window::rectangular, 0);
        std::vector<double> support(m);
        for (std::size_t k = 0; k < m; ++k)
            support[k] = double(k) / (double(m) * step);
        return clamp(std::move(support), std::move(d));
    }

    double psd_mean(const Psd &psd, double period)
    {
        const double mass = psd.mass();
        if (!(mass > 0.0))
            throw std::invalid_argument("PSD has zero mass");
        if (period > 0.0)
        {
            double c = 0.0, s = 0.0;
            for (std::size_t i = 0; i < psd.support.size(); ++i)
            {
                const double a = two_pi * psd.support[i] / period;
                c += psd.density[i] * std::cos(a);
                s += psd.density[i] * std::sin(a);
            }
            return std::atan2(s, c) * period / two_pi;
        }
        double acc = 0.0;
        for (std::size_t i = 0; i < psd.support.size(); ++i)
            acc += psd.density[i] * psd.support[i];
        return acc / mass;
    }

    double rms_spread(const Psd &psd, double period)
    {
        if (psd.support.size() != psd.density.size())
            throw std::invalid_argument("PSD support and density sizes differ");
        const double mass = psd.mass();
        const double mean = psd_mean(psd, period);
        double acc = 0.0;
        for (std::size_t i = 0; i < psd.support.size(); ++i)
        {
            double d = psd.support[i] - mean;
            if (period > 0.0)
                d = std::remainder(d, period);
            acc += psd.density[i] * d * d;
        }
        return std::sqrt(acc / mass);
    }

    Psd doppler_psd_from_tacf(std::span<const complex> tacf, double dt, Window window)
    {
        if (tacf.size() < 2)
            throw std::invalid_argument("Doppler PSD needs at least 2 lags");
        if (!(dt > 0.0))
            throw std::invalid_argument("dt must be > 0");
        const std::size_t n = tacf.size(), m = 2 * n - 1;
        auto d = hermitian_dft(tacf, window, long(n) - 1);
        std::vector<double> support(m);
        for (std::size_t k = 0; k < m; ++k)
            support[k] = (double(k) - double(n - 1)) / (double(m) * dt);
        return clamp(std::move(support), std::move(d));
    }

    Psd doppler_psd(const ModelState &model, const DopplerOptions &o)
    {
        if (o.n_lags < 2)
            throw std::invalid_argument("Doppler window needs at least 2 samples");
        std::vector<CorrelationQuery> qs(o.n_lags);
        for (std::size_t i = 0; i < o.n_lags; ++i)
        {
            qs[i].dt = double(i) * o.dt;
            qs[i].t = o.t;
            qs[i].f_offset = o.f_offset;
            qs[i].ensemble = o.ensemble;
            qs[i].seed = o.seed;
        }
        const auto r = stfcf(model, qs);
        std::vector<complex> tacf;
        for (const auto &c : r)
            tacf.push_back(c.value);
        return doppler_psd_from_tacf(tacf, o.dt, o.window);
    }

    Psd spatial_doppler_psd(std::span<const complex> ccf, double spacing_wavelengths, Window window)
    {
        if (ccf.size() < 2)
            throw std::invalid_argument("spatial PSD needs at least 2 lags");
        const std::size_t n = ccf.size(), m = 2 * n - 1;
        auto d = hermitian_dft(ccf, window, long(n) - 1);
        std::vector<double> support(m);
        for (std::size_t k = 0; k < m; ++k)
            support[k] = (double(k) - double(n - 1)) / (double(m) * spacing_wavelengths);
        return clamp(std::move(support), std::move(d));
    }

    Psd angular_psd_from_ccf(std::span<const complex> ccf, double spacing_wavelengths, std::size_t n_theta,
                             Window window)
    {
        if (ccf.size() < 2)
            throw std::invalid_argument("angular PSD needs at least 2 lags");
        if (n_theta < 2)
            throw std::invalid_argument("angle grid needs at least 2 points");
        const std::size_t n = ccf.size();
        std::vector<double> wr(n);
        for (std::size_t l = 0; l < n; ++l)
            wr[l] = lag_window(window, long(l), n);

        const double dtheta = pi / double(n_theta - 1);
        std::vector<double> support(n_theta), density(n_theta);
        for (std::size_t i = 0; i < n_theta; ++i)
        {
            const double theta = double(i) * dtheta;
            const double w = std::cos(theta);
            double acc = wr[0] * ccf[0].real();
            for (std::size_t l = 1; l < n; ++l)
                acc += 2.0 * wr[l] * (ccf[l] * std::polar(1.0, -two_pi * w * double(l) * spacing_wavelengths)).real();
            // per-bin mass in w is acc / m over a bin of width 1 / (m d); density in theta picks up |sin|
            support[i] = theta;
            density[i] = acc * spacing_wavelengths * std::abs(std::sin(theta)) * dtheta;
        }
        return clamp(std::move(support), std::move(density));
    }

    Psd angular_psd(const ModelState &model, const AngularOptions &o)
    {
        if (model.rx_array.n_elements < 2)
            throw std::invalid_argument("angular PSD needs an rx array with at least 2 elements");
        if (o.n_lags < 2)
            throw std::invalid_argument("angular PSD needs at least 2 lags");
        const double lambda = wavelength(model.carrier());
        std::vector<CorrelationQuery> qs(o.n_lags);
        for (std::size_t i = 0; i < o.n_lags; ++i)
        {
            qs[i].dr_r = double(i) * o.spacing_wavelengths * lambda;
            qs[i].t = o.t;
            qs[i].ensemble = o.ensemble;
            qs[i].seed = o.seed;
        }
        const auto r = stfcf(model, qs);
        std::vector<complex> ccf;
        for (const auto &c : r)
            ccf.push_back(c.value);
        return angular_psd_from_ccf(ccf, o.spacing_wavelengths, o.n_theta, o.window);
    }

    namespace
    {
        void check_lcr(const LcrInputs &in)
        {
            if (!(in.b0 > 0.0))
                throw std::invalid_argument("LCR: b0 must be > 0");
            if (!(in.k >= 0.0) || std::isinf(in.k))
                throw std::invalid_argument("LCR: K must be finite and >= 0");
            const double det = in.b0 * in.b2 - in.b1 * in.b1;
            if (det < 0.0)
                throw std::invalid_argument("LCR: b0 b2 - b1^2 < 0");
            if (in.k > 0.0 && in.b1 != 0.0 && det == 0.0)
                throw std::invalid_argument("LCR: degenerate moments, chi is singular");
        }

        double lcr_integrand(double k, double level, double chi, double theta)
        {
            const double x = 2.0 * std::sqrt(k * (k + 1.0)) * level * std::cos(theta);
            const double base = -k - (k + 1.0) * level * level;
            const double ch = 0.5 * (std::exp(x + base) + std::exp(-x + base)); // cosh(x) e^{base}
            const double cs = chi * std::sin(theta);
            return ch * (std::exp(-cs * cs) + std::sqrt(pi) * cs * std::erf(cs));
        }
    }

    LcrQuadrature lcr_quadrature(const LcrInputs &in, double level, int intervals)
    {
        check_lcr(in);
        if (!(level >= 0.0))
            throw std::invalid_argument("LCR level must be >= 0");
        if (intervals < 2 || intervals % 2)
            throw std::invalid_argument("Simpson needs an even interval count");
        const double det = in.b0 * in.b2 - in.b1 * in.b1;
        const double chi = (in.k == 0.0 || in.b1 == 0.0) ? 0.0 : std::sqrt(in.k * in.b1 * in.b1 / det);
        const double h = 0.5 * pi / intervals;
        double acc = lcr_integrand(in.k, level, chi, 0.0) + lcr_integrand(in.k, level, chi, 0.5 * pi);
        for (int i = 1; i < intervals; ++i)
            acc += (i % 2 ? 4.0 : 2.0) * lcr_integrand(in.k, level, chi, i * h);
        const double integral = acc * h / 3.0;
        const double pref = 2.0 * level * std::sqrt(in.k + 1.0) / std::pow(pi, 1.5) *
                            std::sqrt(std::max(0.0, in.b2 / in.b0 - (in.b1 / in.b0) * (in.b1 / in.b0)));
        return {pref * integral, intervals};
    }

    LcrQuadrature lcr_adaptive(const LcrInputs &in, double level)
    {
        int n = 16;
        auto prev = lcr_quadrature(in, level, n);
        while (n < (1 << 22))
        {
            n *= 2;
            auto cur = lcr_quadrature(in, level, n);
            if (std::abs(cur.value - prev.value) <= 1e-10 * std::abs(cur.value) || cur.value == 0.0)
                return cur;
            prev = cur;
        }
        return prev;
    }

    std::vector<double> lcr_analytic(const LcrInputs &in)
    {
        std::vector<double> out;
        out.reserve(in.levels.size());
        for (double r : in.levels)
            out.push_back(lcr_adaptive(in, r).value);
        return out;
    }

    LcrInputs lcr_moments(const ModelState &model, LcrVariable variable, double step, std::size_t ensemble,
                          std::uint64_t seed, double t)
    {
        const BranchWeights w = model.weights();
        const double diffuse = w.nlos + w.dynamic;
        if (!(diffuse > 0.0))
            throw std::invalid_argument("LCR: channel has no diffuse component");

        if (step == 0.0)
        {
            if (variable == LcrVariable::spatial)
                step = wavelength(model.carrier()) / 100.0;
            else
            {
                GbsmConfig cfg = model.gbsm;
                const double fm = (cfg.speed_a + cfg.speed_z) * cfg.carrier_frequency / speed_of_light;
                step = fm > 0.0 ? 1.0 / (100.0 * fm) : 1e-3;
            }
        }
        if (!(step > 0.0))
            throw std::invalid_argument("LCR: derivative step must be > 0");

        CorrelationQuery q0, q1;
        q0.t = q1.t = t;
        q0.ensemble = q1.ensemble = ensemble;
        q0.seed = q1.seed = seed;
        if (variable == LcrVariable::spatial)
            q1.dr_r = step;
        else
            q1.dt = step;
        const CorrelationQuery qs[2] = {q0, q1};
        const auto br = stfcf_branches(model, qs);
        auto diffuse_r = [&](const BranchCorrelation &b)
        { return (w.nlos * b.nlos + w.dynamic * b.dynamic) / diffuse; };
        const complex r0 = diffuse_r(br[0]), rh = diffuse_r(br[1]);

        LcrInputs in;
        in.k_s = model.k_s;
        in.k_d = model.k_d;
        in.k = w.los / diffuse;
        in.b0 = r0.real();
        in.b1 = rh.imag() / step;
        in.b2 = 2.0 * (r0.real() - rh.real()) / (step * step);
        return in;
    }

    double lcr_empirical(std::span<const double> envelope, double level, double duration)
    {
        if (envelope.size() < 2)
            throw std::invalid_argument("LCR needs at least 2 samples");
        if (!(duration > 0.0))
            throw std::invalid_argument("duration must be > 0");
        std::size_t count = 0;
        for (std::size_t i = 1; i < envelope.size(); ++i)
            if (envelope[i - 1] < level && envelope[i] >= level)
                ++count;
        return double(count) / duration;
    }

    std::vector<std::pair<double, double>> empirical_cdf(std::span<const double> samples)
    {
        if (samples.empty())
            throw std::invalid_argument("empirical CDF of an empty sample");
        std::vector<double> s(samples.begin(), samples.end());
        std::sort(s.begin(), s.end());
        std::vector<std::pair<double, double>> out;
        const double n = double(s.size());
        for (std::size_t i = 0; i < s.size(); ++i)
            if (i + 1 == s.size() || s[i + 1] != s[i])
                out.emplace_back(s[i], double(i + 1) / n);
        return out;
    }

    double cdf_at(const std::vector<std::pair<double, double>> &cdf, double x)
    {
        auto it = std::upper_bound(cdf.begin(), cdf.end(), x, [](double v, const auto &p)
                                   { return v < p.first; });
        if (it == cdf.begin())
            return 0.0;
        return std::prev(it)->second;
    }

    namespace
    {
        /// Sample i is taken at time t0 + i dt with the rx displaced by i dx along its array axis.
        std::vector<complex> narrowband_path(const ModelState &model, double t0, double dt, double dx, std::size_t n,
                                             std::uint64_t realization_seed)
        {
            const BranchWeights w = model.weights();
            const double fc = model.carrier();
            const auto split = split_static(model.static_mpcs);
            const Vec3 axis = model.rx_array.axis();

            std::vector<complex> out(n, complex(0.0));
            for (const auto &m : model.static_mpcs)
            {
                const bool los = m.kind == MpcKind::los;
                const double p = los ? w.los : (split.nlos_total > 0.0 ? w.nlos * m.power / split.nlos_total : 0.0);
                if (!(p > 0.0))
                    continue;
                const complex pol = polarization_transfer(model.rx_array.field(m.aoa), model.tx_array.field(m.aod),
                                                          m.phases, m.xpr, los ? 1.0 : model.gbsm.mu, !los);
                const complex amp = std::sqrt(p) * pol;
                for (std::size_t i = 0; i < n; ++i)
                {
                    const double tau = plane_wave_delay(m, Vec3{}, axis * (double(i) * dx));
                    out[i] += amp * std::polar(1.0, two_pi * fc * tau);
                }
            }
            if (w.dynamic == 0.0)
                return out;

            GbsmConfig cfg = model.gbsm;
            cfg.seed = realization_seed;
            const auto clusters = spawn_clusters(cfg, model.location, model.static_mpcs);
            for (const auto &c : clusters)
                for (std::size_t m = 0; m < c.rays.size(); ++m)
                {
                    const DynamicRay &r = c.rays[m];
                    const ClusterState s0 = ray_state_at(c, m, t0);
                    const complex pol = polarization_transfer(model.rx_array.field(direction_angles(s0.anchor_z)),
                                                              model.tx_array.field(direction_angles(s0.anchor_a)),
                                                              r.phases, r.xpr, model.gbsm.mu, true);
                    const complex amp = std::sqrt(w.dynamic * c.power * r.power_fraction) * pol;
                    for (std::size_t i = 0; i < n; ++i)
                    {
                        const double tau = ray_delay(c, m, Vec3{}, axis * (double(i) * dx), t0 + double(i) * dt);
                        out[i] += amp * std::polar(1.0, two_pi * fc * tau);
                    }
                }
            return out;
        }
    }

    std::vector<complex> narrowband_series(const ModelState &model, double t0, double dt, std::size_t n,
                                           std::uint64_t realization_seed)
    {
        if (!(t0 >= 0.0) || !(dt >= 0.0))
            throw std::invalid_argument("narrowband series needs t0 >= 0 and dt >= 0");
        return narrowband_path(model, t0, dt, 0.0, n, realization_seed);
    }

    std::vector<complex> narrowband_route(const ModelState &model, double t, double dx, std::size_t n,
                                          std::uint64_t realization_seed)
    {
        if (!(t >= 0.0))
            throw std::invalid_argument("narrowband route needs t >= 0");
        return narrowband_path(model, t, 0.0, dx, n, realization_seed);
    }
}
