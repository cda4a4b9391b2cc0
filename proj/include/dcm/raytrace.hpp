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

#ifndef DCM_RAYTRACE_HPP
#define DCM_RAYTRACE_HPP

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "dcm/core.hpp"
#include "dcm/mpc.hpp"

namespace dcm
{
    /// Error raised while reading a scene or map document. Carries the 1-based line number.
    class ParseError : public std::runtime_error
    {
    public:
        ParseError(std::size_t line, const std::string &what)
            : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
        std::size_t line() const { return line_; }

    private:
        std::size_t line_;
    };

    struct Material
    {
        std::string name;
        double eps_r = 1.0;
        double sigma = 0.0; // S/m, may be +inf for a perfect conductor
    };

    /// Concrete at 5.5 GHz.
    inline Material concrete() { return {"concrete", 5.31, 0.13}; }

    /// Opaque convex planar polygon.
    struct Facet
    {
        std::vector<Vec3> vertices;
        std::size_t material = 0; // index into Scene::materials
        Vec3 normal;              // unit, right-handed w.r.t. vertex order
        double offset = 0.0;      // plane: dot(normal, x) == offset
    };

    struct Scene
    {
        std::vector<Material> materials;
        std::vector<Facet> facets;

        /// Index of the named material, throws std::out_of_range if absent.
        std::size_t material_index(std::string_view name) const;

        /// Adds a facet, validating coplanarity, convexity and area. Throws std::invalid_argument.
        void add_facet(std::vector<Vec3> vertices, std::size_t material);

        /// Adds or replaces a material.
        std::size_t add_material(const Material &m);
    };

    inline constexpr double coplanar_tolerance = 1e-6;     // m
    inline constexpr double intersection_tolerance = 1e-9; // m

    Scene load_scene(std::string_view text);
    Scene load_scene_file(const std::string &path);

    /// Content hash of the geometry and materials.
    std::uint64_t scene_hash(const Scene &scene);

    struct FresnelCoefficients
    {
        complex perp;
        complex par;
    };

    /// Reflection coefficients of a half-space with complex permittivity eps_r - j sigma / (omega eps0).
    /// `incidence` is measured from the surface normal.
    FresnelCoefficients fresnel_coefficients(const Material &material, double incidence, double frequency);

    /// Free-space gain in dB, -20 log10(4 pi d f / c).
    double friis_path_gain(double distance, double frequency);

    /// Reflects `p` across the plane of `facet`.
    Vec3 mirror_point(const Facet &facet, const Vec3 &p);

    /// Point-in-convex-polygon test for a point on (or within tolerance of) the facet plane.
    bool point_in_facet(const Facet &facet, const Vec3 &p, double tol = intersection_tolerance);

    /// True if the open segment a->b crosses any facet strictly between its end points.
    bool segment_occluded(const Scene &scene, const Vec3 &a, const Vec3 &b);

    struct TracedPath
    {
        Mpc mpc;
        std::vector<std::size_t> facets; // reflection sequence, empty for LoS
        std::vector<Vec3> points;        // reflection points
        double length = 0.0;             // unfolded path length (m)
    };

    /// All unoccluded LoS and specular reflection paths up to `max_order` bounces.
    /// Sorted by delay, ties by facet sequence.
    std::vector<TracedPath> trace_static_paths(const Scene &scene, const Vec3 &tx, const Vec3 &rx,
                                               int max_order, double frequency);

    std::vector<Mpc> trace_static_mpcs(const Scene &scene, const Vec3 &tx, const Vec3 &rx,
                                       int max_order, double frequency);

    /// Deterministic per-path phases and cross polarization ratio, keyed by the facet sequence.
    void assign_path_randomness(Mpc &mpc, const std::vector<std::size_t> &facets);
}

#endif
