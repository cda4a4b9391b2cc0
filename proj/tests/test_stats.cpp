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

#include <doctest.h>

#include <algorithm>

#include "dcm/stats.hpp"
#include "oracles/stat_oracles.hpp"

using namespace dcm;

namespace
{
    constexpr double fc = 5.5e9;
    const Location here{{0, 0, 10}, {60, 5, 1.5}};

    Mpc path(MpcKind kind, double delay, double power, double aoa_az_deg = 0.0)
    {
        Mpc m;
        m.kind = kind;
        m.order = kind == MpcKind::los ? 0 : 1;
        m.delay = delay;
        m.power = power;
        m.aoa = {0.0, deg_to_rad(aoa_az_deg)};
        return m;
    }

    ModelState static_model(std::vector<Mpc> mpcs, double k_s = 1.0)
    {
        ModelState m;
        m.static_mpcs = std::move(mpcs);
        m.gbsm.n_clusters = 0;
        m.location = here;
        m.k_s = k_s;
        return m;
    }

    ModelState dynamic_model(double speed = 0.5)
    {
        ModelState m;
        m.gbsm.speed_a = m.gbsm.speed_z = speed;
        m.location = here;
        return m;
    }

    Psd two_point(double a, double b)
    {
        return Psd{{a, b}, {1.0, 1.0}, 0.0};
    }

    std::size_t peak(const Psd &p)
    {
        return std::size_t(std::max_element(p.density.begin(), p.density.end()) - p.density.begin());
    }
}

TEST_CASE("space-time-frequency correlation")
{
    SUBCASE("origin of a hybrid channel")
    {
        ModelState m = dynamic_model();
        m.static_mpcs = {path(MpcKind::los, 200e-9, 1e-8), path(MpcKind::reflection, 230e-9, 1e-9, 40)};
        CorrelationQuery q;
        q.ensemble = 20;
        CHECK(std::abs(stfcf(m, q).value - 1.0) < 1e-9);
    }
    SUBCASE("LoS only")
    {
        const ModelState m = static_model({path(MpcKind::los, 200e-9, 1.0)});
        for (double df : {1e5, 3e6, 40e6})
        {
            CorrelationQuery q;
            q.df = df;
            CHECK(std::abs(stfcf(m, q).value) == doctest::Approx(1.0));
        }
    }
    SUBCASE("two equal taps have a null")
    {
        const ModelState m = static_model({path(MpcKind::los, 200e-9, 1.0), path(MpcKind::reflection, 300e-9, 0.3)});
        CorrelationQuery q;
        q.df = 5e6;
        CHECK(std::abs(stfcf(m, q).value) < 1e-9);
        q.df = 2.5e6;
        CHECK(std::abs(stfcf(m, q).value) == doctest::Approx(std::abs(std::cos(pi * 2.5e6 * 100e-9))));
    }
    SUBCASE("closed form agrees on static channels")
    {
        const ModelState m = static_model({path(MpcKind::los, 200e-9, 1.0), path(MpcKind::reflection, 260e-9, 0.3),
                                           path(MpcKind::reflection, 410e-9, 0.1)},
                                          2.0);
        std::vector<double> grid;
        std::vector<CorrelationQuery> qs;
        for (int i = 0; i < 30; ++i)
        {
            grid.push_back(i * 1e6);
            CorrelationQuery q;
            q.df = grid.back();
            qs.push_back(q);
        }
        const auto a = fcf_closed_form(m, grid);
        const auto b = stfcf(m, qs);
        CHECK(std::abs(a[0].value - 1.0) < 1e-12);
        for (std::size_t i = 0; i < grid.size(); ++i)
            CHECK(std::abs(a[i].value - b[i].value) < 1e-12);
    }
    SUBCASE("closed form at zero lag with clusters")
    {
        const double zero[1] = {0.0};
        CHECK(std::abs(fcf_closed_form(dynamic_model(), zero, 10)[0].value - 1.0) < 1e-9);
    }
    SUBCASE("input checks")
    {
        CorrelationQuery q;
        q.ensemble = 0;
        CHECK_THROWS_AS(stfcf(dynamic_model(), q), std::invalid_argument);
        q.ensemble = 2;
        q.dt = -1;
        CHECK_THROWS_AS(stfcf(dynamic_model(), q), std::invalid_argument);
    }
}

TEST_CASE("delay PSD")
{
    const std::size_t n = 201;
    const double step = 1e6;
    const double bin = 1.0 / ((2 * n - 1) * step);
    std::vector<double> grid(n);
    for (std::size_t i = 0; i < n; ++i)
        grid[i] = double(i) * step;

    SUBCASE("single tap")
    {
        const ModelState m = static_model({path(MpcKind::los, 80 * bin, 1.0)});
        std::vector<complex> r;
        for (const auto &c : fcf_closed_form(m, grid))
            r.push_back(c.value);
        const Psd p = delay_psd(grid, r);
        CHECK(peak(p) == 80);
        CHECK(p.mass() == doctest::Approx(1.0).epsilon(1e-9));
        CHECK(rms_spread(p) < 1e-12);
    }
    SUBCASE("two equal taps")
    {
        const ModelState m =
            static_model({path(MpcKind::los, 40 * bin, 1.0), path(MpcKind::reflection, 120 * bin, 1.0)});
        std::vector<complex> r;
        for (const auto &c : fcf_closed_form(m, grid))
            r.push_back(c.value);
        const Psd p = delay_psd(grid, r);
        CHECK(p.density[40] == doctest::Approx(0.5));
        CHECK(p.density[120] == doctest::Approx(0.5));
        CHECK(rms_spread(p) == doctest::Approx(40 * bin));
    }
    SUBCASE("mass matches zero lag")
    {
        std::vector<complex> r(n);
        for (std::size_t i = 0; i < n; ++i)
            r[i] = 0.7 * std::exp(-double(i) / 30.0) * std::polar(1.0, 0.01 * double(i));
        const Psd p = delay_psd(grid, r);
        CHECK(std::abs(p.mass() - p.negative_mass - 0.7) < 1e-9);
    }
    CHECK_THROWS_AS(delay_psd(std::vector<double>{0.0}, std::vector<complex>{1.0}), std::invalid_argument);
    CHECK_THROWS_AS(delay_psd(std::vector<double>{0.0, 1.0, 3.0}, std::vector<complex>(3)), std::invalid_argument);
    CHECK_THROWS_AS(delay_psd(std::vector<double>{1.0, 2.0}, std::vector<complex>(2)), std::invalid_argument);
}

TEST_CASE("spreads")
{
    CHECK(rms_spread(Psd{{3.0, 4.0, 5.0}, {0.0, 2.0, 0.0}, 0.0}) == 0.0);
    CHECK(rms_spread(two_point(0.0, 100.0)) == doctest::Approx(50.0));
    CHECK(rms_spread(two_point(80.0, 100.0)) == doctest::Approx(10.0));
    // circular statistics handle wrap-around
    CHECK(rms_spread(two_point(350.0, 10.0), 360.0) == doctest::Approx(10.0));
    CHECK(psd_mean(two_point(350.0, 10.0), 360.0) == doctest::Approx(0.0).epsilon(1e-9));
    CHECK_THROWS_AS(rms_spread(Psd{{1.0}, {0.0}, 0.0}), std::invalid_argument);
    CHECK_THROWS_AS(rms_spread(Psd{{1.0, 2.0}, {1.0}, 0.0}), std::invalid_argument);
}

TEST_CASE("angular PSD")
{
    AngularOptions o;
    const auto ula = uniform_linear_array(8, 0.5 * wavelength(fc), {0.0, 0.0});
    SUBCASE("single plane wave")
    {
        ModelState m = static_model({path(MpcKind::los, 200e-9, 1.0, 90.0)});
        m.rx_array = ula;
        const Psd p = angular_psd(m, o);
        CHECK(rad_to_deg(p.support[peak(p)]) == doctest::Approx(90.0));
        CHECK(p.mass() == doctest::Approx(1.0).epsilon(0.02));
    }
    SUBCASE("two plane waves")
    {
        ModelState m = static_model({path(MpcKind::los, 200e-9, 1.0, 80.0), path(MpcKind::reflection, 210e-9, 1.0, 100.0)});
        m.rx_array = ula;
        const Psd p = angular_psd(m, o);
        const double res = 180.0 / double(o.n_theta - 1);
        CHECK(std::abs(rad_to_deg(rms_spread(p)) - 10.0) <= res);
    }
    SUBCASE("needs an array")
    {
        CHECK_THROWS_AS(angular_psd(static_model({path(MpcKind::los, 1e-7, 1.0)}), o), std::invalid_argument);
    }
}

TEST_CASE("Doppler PSD")
{
    SUBCASE("static channel")
    {
        const ModelState m = static_model({path(MpcKind::los, 200e-9, 1.0), path(MpcKind::reflection, 260e-9, 1.0, 70)});
        DopplerOptions o;
        o.n_lags = 200;
        o.window = Window::rectangular;
        const Psd p = doppler_psd(m, o);
        CHECK(p.support[peak(p)] == 0.0);
        CHECK(rms_spread(p) < 1e-4);
    }
    SUBCASE("receding cluster")
    {
        DynamicCluster c;
        c.d_t0 = 60.0;
        c.d_r0 = 40.0;
        c.arrival = {0.0, pi / 2};
        c.speed_a = c.speed_z = 0.5;
        c.direction_a = c.departure;
        c.direction_z = c.arrival;
        c.rays.resize(1);
        c.rays[0].power_fraction = 1.0;
        const std::size_t n = 1000;
        const double dt = 1e-3;
        std::vector<complex> r(n);
        for (std::size_t i = 0; i < n; ++i)
            r[i] = std::polar(1.0, two_pi * fc * (ray_delay(c, 0, Vec3{}, Vec3{}, 0.0) -
                                                ray_delay(c, 0, Vec3{}, Vec3{}, double(i) * dt)));
        const Psd p = doppler_psd_from_tacf(r, dt);
        const double bin = 1.0 / ((2 * n - 1) * dt);
        CHECK(std::abs(psd_mean(p) + 18.35) < bin);
        CHECK(rms_spread(p) < 2 * bin);
    }
    SUBCASE("spread scales with cluster speed")
    {
        DopplerOptions o;
        o.ensemble = 30;
        o.n_lags = 400;
        o.dt = 2e-3;
        const double slow = rms_spread(doppler_psd(dynamic_model(0.5), o));
        const double fast = rms_spread(doppler_psd(dynamic_model(1.0), o));
        CHECK(slow > 1.0);
        CHECK(fast / slow == doctest::Approx(2.0).epsilon(0.05));
    }
    CHECK_THROWS_AS(doppler_psd_from_tacf(std::vector<complex>{1.0}, 1e-3), std::invalid_argument);
    CHECK_THROWS_AS(doppler_psd_from_tacf(std::vector<complex>(4, 1.0), 0.0), std::invalid_argument);
}

TEST_CASE("level crossing rate")
{
    const double fm = 20.0;
    LcrInputs rayleigh;
    rayleigh.b0 = 0.5;
    rayleigh.b2 = 2.0 * pi * pi * fm * fm * rayleigh.b0;

    SUBCASE("Rayleigh limit")
    {
        for (int i = 0; i < 50; ++i)
            rayleigh.levels.push_back(0.05 * (i + 1));
        const auto v = lcr_analytic(rayleigh);
        for (std::size_t i = 0; i < v.size(); ++i)
            CHECK(std::abs(v[i] - oracle::rayleigh_lcr(fm, rayleigh.levels[i])) < 1e-6);
        CHECK(lcr_adaptive(rayleigh, std::sqrt(0.5)).value / fm == doctest::Approx(1.075).epsilon(1e-3));
    }
    SUBCASE("limits")
    {
        LcrInputs in = rayleigh;
        in.k = 3.0;
        in.b1 = 0.3 * std::sqrt(in.b0 * in.b2);
        CHECK(lcr_adaptive(in, 0.0).value == 0.0);
        CHECK(lcr_adaptive(in, 6.0).value < 1e-10);
        CHECK(lcr_adaptive(in, 1.0).value > 0.0);
    }
    SUBCASE("Rician LoS shifts the peak right")
    {
        LcrInputs in = rayleigh;
        in.k = 5.0;
        std::vector<double> levels;
        for (int i = 1; i < 300; ++i)
            levels.push_back(0.01 * i);
        in.levels = levels;
        const auto v = lcr_analytic(in);
        const double at = levels[std::size_t(std::max_element(v.begin(), v.end()) - v.begin())];
        CHECK(at > 0.8);
    }
    SUBCASE("degenerate inputs")
    {
        LcrInputs in;
        in.k = 1.0;
        in.b0 = 1.0;
        in.b1 = 2.0;
        in.b2 = 4.0;
        CHECK_THROWS_AS(lcr_adaptive(in, 1.0), std::invalid_argument);
        in.b2 = 3.0;
        CHECK_THROWS_AS(lcr_adaptive(in, 1.0), std::invalid_argument);
        in.b0 = 0.0;
        CHECK_THROWS_AS(lcr_adaptive(in, 1.0), std::invalid_argument);
        CHECK_THROWS_AS(lcr_adaptive(rayleigh, -1.0), std::invalid_argument);
        CHECK_THROWS_AS(lcr_quadrature(rayleigh, 1.0, 7), std::invalid_argument);
    }
    SUBCASE("moments of a diffuse channel")
    {
        const ModelState m = dynamic_model();
        const auto in = lcr_moments(m, LcrVariable::temporal, 0.0, 50);
        CHECK(in.k == 0.0);
        CHECK(in.b0 == doctest::Approx(1.0));
        const double fmax = 2 * 0.5 * fc / speed_of_light;
        CHECK(std::sqrt(in.b2 / in.b0) > 0.0);
        CHECK(std::sqrt(in.b2 / in.b0) < two_pi * fmax);
        CHECK_THROWS_AS(lcr_moments(static_model({path(MpcKind::los, 1e-7, 1.0)}), LcrVariable::spatial),
                        std::invalid_argument);
    }
    SUBCASE("moments of a single plane wave")
    {
        // b2 / b0 = (2 pi cos(theta) / lambda)^2 for a wave at angle theta to the array axis
        ModelState m = static_model({path(MpcKind::los, 1e-7, 1.0), path(MpcKind::reflection, 2e-7, 1.0, 60.0)});
        m.rx_array = uniform_linear_array(2, 0.5 * wavelength(fc), {0.0, 0.0});
        const auto in = lcr_moments(m, LcrVariable::spatial);
        const double beta = two_pi * std::cos(deg_to_rad(60.0)) / wavelength(fc);
        CHECK(in.k == doctest::Approx(1.0));
        CHECK(in.b2 / in.b0 == doctest::Approx(beta * beta).epsilon(1e-3));
        CHECK(std::abs(in.b1 / in.b0) == doctest::Approx(beta).epsilon(1e-3));
    }
}

TEST_CASE("empirical crossings and CDF")
{
    const double series[] = {1, 3, 1, 3, 1};
    CHECK(lcr_empirical(series, 2.0, 1.0) == 2.0);
    const std::vector<double> flat(10, 1.0);
    CHECK(lcr_empirical(flat, 0.5, 1.0) == 0.0);
    CHECK(lcr_empirical(flat, 2.0, 1.0) == 0.0);
    CHECK_THROWS_AS(lcr_empirical(std::vector<double>{1.0}, 1.0, 1.0), std::invalid_argument);

    const double one[] = {5};
    const auto c1 = empirical_cdf(one);
    REQUIRE(c1.size() == 1);
    CHECK(c1[0] == std::pair<double, double>{5.0, 1.0});
    const double four[] = {4, 2, 3, 1};
    const auto c4 = empirical_cdf(four);
    CHECK(cdf_at(c4, 2.5) == 0.5);
    CHECK(cdf_at(c4, 0.0) == 0.0);
    CHECK(cdf_at(c4, 4.0) == 1.0);
    const double ties[] = {1, 1, 2};
    CHECK(empirical_cdf(ties).size() == 2);
    CHECK_THROWS_AS(empirical_cdf({}), std::invalid_argument);
}

TEST_CASE("narrowband series")
{
    ModelState m = dynamic_model();
    m.static_mpcs = {path(MpcKind::los, 200e-9, 1e-8), path(MpcKind::reflection, 230e-9, 1e-9, 40)};
    m.rx_array = uniform_linear_array(2, 0.5 * wavelength(fc));
    const auto a = narrowband_series(m, 0.5, 1e-3, 64, 7);
    CHECK(a == narrowband_series(m, 0.5, 1e-3, 64, 7));
    CHECK(a != narrowband_series(m, 0.5, 1e-3, 64, 8));
    CHECK(narrowband_route(m, 0.5, 0.0, 3, 7) == narrowband_series(m, 0.5, 0.0, 3, 7));
    CHECK_THROWS_AS(narrowband_series(m, -1, 1e-3, 4, 1), std::invalid_argument);

    SUBCASE("mean power over realizations")
    {
        m.static_mpcs = {path(MpcKind::los, 200e-9, 1e-8)};
        double p = 0.0;
        const int n = 400;
        for (int s = 0; s < n; ++s)
            p += std::norm(narrowband_series(m, 0.0, 0.0, 1, std::uint64_t(s))[0]);
        // LoS power is fixed, the dynamic part averages to its weight
        const auto w = m.weights();
        CHECK(std::abs(p / n - 1.0) < 4.0 * w.dynamic / std::sqrt(double(n)) + 4.0 * std::sqrt(w.los * w.dynamic / n));
    }
}
