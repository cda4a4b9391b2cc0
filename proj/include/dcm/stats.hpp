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

#ifndef DCM_STATS_HPP
#define DCM_STATS_HPP

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "dcm/gbsm.hpp"
#include "dcm/hybrid.hpp"
#include "dcm/mpc.hpp"

namespace dcm
{
    /// Everything needed to evaluate correlations of the hybrid channel at one location.
    struct ModelState
    {
        std::vector<Mpc> static_mpcs;
        GbsmConfig gbsm;
        Location location;
        double k_s = db_to_linear(3.0);
        double k_d = db_to_linear(10.0);
        AntennaArray tx_array;
        AntennaArray rx_array;

        double carrier() const { return gbsm.carrier_frequency; }
        BranchWeights weights() const;
    };

    /// Lags of the space-time-frequency correlation E[H(t, f, l) H*(t + dt, f + df, l + dl)].
    struct CorrelationQuery
    {
        double dr_t = 0.0;   // tx element displacement along the tx array axis (m)
        double dr_r = 0.0;   // rx element displacement along the rx array axis (m)
        Location dl;         // tx / rx location shift (m)
        double dt = 0.0;     // s
        double df = 0.0;     // Hz
        double t = 0.0;      // evaluation time (s)
        double f_offset = 0.0; // evaluation frequency relative to the carrier (Hz)
        std::size_t ensemble = 200;
        std::uint64_t seed = 1;
    };

    struct Correlation
    {
        complex value;
        double std_error = 0.0; // Monte-Carlo standard error of the dynamic term
    };

    /// Per-branch correlations, each of a unit-power branch.
    struct BranchCorrelation
    {
        complex los, nlos, dynamic;
        double dynamic_std_error = 0.0;
    };

    Correlation stfcf(const ModelState &model, const CorrelationQuery &query);

    /// Batch form; all queries share the ensemble of the first query.
    std::vector<Correlation> stfcf(const ModelState &model, std::span<const CorrelationQuery> queries);
    std::vector<BranchCorrelation> stfcf_branches(const ModelState &model, std::span<const CorrelationQuery> queries);

    /// Frequency correlation as a direct three-term sum over powers and delays.
    std::vector<Correlation> fcf_closed_form(const ModelState &model, std::span<const double> df_grid,
                                             std::size_t ensemble = 200, std::uint64_t seed = 1, double t = 0.0);

    struct Psd
    {
        std::vector<double> support;
        std::vector<double> density; // mass per bin
        double negative_mass = 0.0;  // ripple removed by clamping

        double mass() const;
    };

    enum class Window
    {
        rectangular,
        hann
    };

    /// Lag window value for |n| < n_lags.
    double lag_window(Window w, long n, std::size_t n_lags);

    /// Delay PSD from FCF samples on a uniform grid starting at df = 0.
    Psd delay_psd(std::span<const double> df_grid, std::span<const complex> fcf);

    /// Square root of the centered second moment. A positive `period` selects circular statistics.
    double rms_spread(const Psd &psd, double period = 0.0);
    double psd_mean(const Psd &psd, double period = 0.0);

    /// Doppler PSD from TACF samples at lags 0, dt, 2 dt, ... Support is centered on 0.
    Psd doppler_psd_from_tacf(std::span<const complex> tacf, double dt, Window window = Window::hann);

    struct DopplerOptions
    {
        std::size_t n_lags = 1000;
        double dt = 1e-3;
        Window window = Window::hann;
        std::size_t ensemble = 200;
        std::uint64_t seed = 1;
        double t = 0.0;
        double f_offset = 0.0;
    };

    Psd doppler_psd(const ModelState &model, const DopplerOptions &options);

    /// Spatial-Doppler PSD over the normalized variable w = cos(theta) from CCF samples at lags
    /// 0, d, 2d, ... (d in wavelengths). Support covers one period.
    Psd spatial_doppler_psd(std::span<const complex> ccf, double spacing_wavelengths, Window window = Window::hann);

    /// Angular PSD over theta in [0, pi] (angle between the arrival direction and the rx array axis).
    Psd angular_psd_from_ccf(std::span<const complex> ccf, double spacing_wavelengths, std::size_t n_theta,
                             Window window = Window::hann);

    struct AngularOptions
    {
        std::size_t n_lags = 256;
        double spacing_wavelengths = 0.25;
        std::size_t n_theta = 361;
        Window window = Window::hann;
        std::size_t ensemble = 200;
        std::uint64_t seed = 1;
        double t = 0.0;
    };

    Psd angular_psd(const ModelState &model, const AngularOptions &options);

    struct LcrInputs
    {
        double k = 0.0;
        double k_s = 0.0;
        double k_d = 0.0;
        double b0 = 1.0;
        double b1 = 0.0;
        double b2 = 0.0;
        std::vector<double> levels; // normalized envelope levels R
    };

    struct LcrQuadrature
    {
        double value = 0.0;
        int intervals = 0;
    };

    /// One level with a fixed number of Simpson intervals (even).
    LcrQuadrature lcr_quadrature(const LcrInputs &inputs, double level, int intervals);

    /// One level, Simpson intervals doubled until the relative change drops below 1e-10.
    LcrQuadrature lcr_adaptive(const LcrInputs &inputs, double level);

    std::vector<double> lcr_analytic(const LcrInputs &inputs);

    enum class LcrVariable
    {
        spatial,  // b_i per metre of rx displacement
        temporal  // b_i per second
    };

    /// b_0, b_1, b_2 from central differences of the diffuse (static NLoS + dynamic) correlation.
    /// `step` = 0 selects lambda / 100 (spatial) or 1 / (100 max Doppler) (temporal).
    LcrInputs lcr_moments(const ModelState &model, LcrVariable variable, double step = 0.0,
                          std::size_t ensemble = 200, std::uint64_t seed = 1, double t = 0.0);

    /// Upward crossings of `level` per unit of `duration`.
    double lcr_empirical(std::span<const double> envelope, double level, double duration);

    std::vector<std::pair<double, double>> empirical_cdf(std::span<const double> samples);
    /// Right-continuous evaluation of a CDF from empirical_cdf.
    double cdf_at(const std::vector<std::pair<double, double>> &cdf, double x);

    /// Narrowband response H(t, f_c) of element pair (0, 0) for one cluster realization.
    /// Element patterns are evaluated towards the ray directions at t0.
    std::vector<complex> narrowband_series(const ModelState &model, double t0, double dt, std::size_t n,
                                           std::uint64_t realization_seed);

    /// Same, frozen at time t, sampled while the rx moves in steps of dx (m) along its array axis.
    std::vector<complex> narrowband_route(const ModelState &model, double t, double dx, std::size_t n,
                                          std::uint64_t realization_seed);
}

#endif
