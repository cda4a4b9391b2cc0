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

#ifndef DCM_CLI_HPP
#define DCM_CLI_HPP

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "dcm/channel_map.hpp"
#include "dcm/gbsm.hpp"

namespace dcm
{
    struct StatsSettings
    {
        std::size_t ensemble = 50;
        std::size_t n_lags = 256;
        double dt = 5e-3;             // s, TACF lag spacing
        double spacing_wavelengths = 0.25;
        std::size_t n_theta = 361;
        double df_max = 100e6;        // Hz
        std::size_t n_df = 201;
        std::size_t samples = 200000; // envelope samples for the empirical LCR
        std::size_t realizations = 100;
        bool operator==(const StatsSettings &) const = default;
    };

    /// Settings read from a JSON file given with --config. Command-line flags take precedence.
    struct RunConfig
    {
        std::string scene;
        std::string map;
        std::string out_dir;
        std::optional<std::uint64_t> seed;
        GbsmConfig gbsm;          // used by build
        GbsmOverrides overrides;  // used when reading a map
        StatsSettings stats;
    };

    RunConfig parse_run_config(const std::string &json_text);
    RunConfig load_run_config(const std::string &path);

    /// Median wall times of a per-location static rebuild (trace + static CIR) against update_snapshot.
    struct BenchReport
    {
        std::size_t locations = 0;
        double build_total_s = 0.0;
        double rebuild_median_s = 0.0;
        double update_median_s = 0.0;
        double ratio() const { return update_median_s / rebuild_median_s; }
    };

    BenchReport benchmark_update(const Scene &scene, const Vec3 &tx, const GridSpec &grid, int max_order,
                                 const GbsmConfig &gbsm, std::uint64_t seed, int repeats = 3);

    /// `args` excludes the program name. Returns the process exit status:
    /// 0 success, 1 domain error, 2 usage error.
    int run_command(const std::vector<std::string> &args, std::ostream &out, std::ostream &err);
}

#endif
