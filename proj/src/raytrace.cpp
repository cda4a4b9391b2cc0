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

#include "dcm/raytrace.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <sstream>

#include "dcm/rng.hpp"
#include "dcm/text.hpp"

namespace dcm
{
    std::size_t Scene::material_index(std::string_view name) const
    {
        for (std::size_t i = 0; i < materials.size(); ++i)
            if (materials[i].name == name)
                return i;
        throw std::out_of_range("unresolved material '" + std::string(name) + "'");
    }

    std::size_t Scene::add_material(const Material &m)
    {
        if (!(m.eps_r >= 1.0))
            throw std::invalid_argument("material '" + m.name + "': eps_r must be >= 1");
        if (!(m.sigma >= 0.0))
            throw std::invalid_argument("material '" + m.name + "': sigma must be >= 0");
        for (std::size_t i = 0; i < materials.size(); ++i)
            if (materials[i].name == m.name)
            {
                materials[i] = m;
                return i;
            }
        materials.push_back(m);
        return materials.size() - 1;
    }

    void Scene::add_facet(std::vector<Vec3> vertices, std::size_t material)
    {
        const std::size_t n = vertices.size();
        if (n < 3)
            throw std::invalid_argument("degenerate facet: " + std::to_string(n) + " vertices, need at least 3");
        if (material >= materials.size())
            throw std::invalid_argument("facet material index out of range");

        // Newell normal
        Vec3 nn;
        for (std::size_t i = 0; i < n; ++i)
        {
            const Vec3 &a = vertices[i], &b = vertices[(i + 1) % n];
            nn.x += (a.y - b.y) * (a.z + b.z);
            nn.y += (a.z - b.z) * (a.x + b.x);
            nn.z += (a.x - b.x) * (a.y + b.y);
        }
        const double twice_area = norm(nn);
        if (!(twice_area > 1e-12))
            throw std::invalid_argument("degenerate facet: zero area");
        Facet f;
        f.normal = nn / twice_area;
        f.material = material;

        Vec3 centroid;
        for (const auto &v : vertices)
            centroid += v;
        centroid = centroid / double(n);
        f.offset = dot(f.normal, centroid);

        for (const auto &v : vertices)
            if (std::abs(dot(f.normal, v) - f.offset) > coplanar_tolerance)
                throw std::invalid_argument("non-coplanar facet");

        for (std::size_t i = 0; i < n; ++i)
        {
            const Vec3 e1 = vertices[(i + 1) % n] - vertices[i];
            const Vec3 e2 = vertices[(i + 2) % n] - vertices[(i + 1) % n];
            if (dot(cross(e1, e2), f.normal) < -1e-12 * norm(e1) * norm(e2))
                throw std::invalid_argument("non-convex facet");
        }
        f.vertices = std::move(vertices);
        facets.push_back(std::move(f));
    }

    Scene load_scene(std::string_view text)
    {
        struct PendingFacet
        {
            std::size_t line;
            std::string material;
            std::vector<Vec3> vertices;
        };

        Scene scene;
        std::vector<PendingFacet> pending;
        std::size_t line_no = 0;

        for (const auto &raw : split_lines(text))
        {
            ++line_no;
            auto line = strip_comment(raw);
            if (line.empty())
                continue;
            auto tokens = split_ws(line);
            const std::string_view tag = tokens[0];
            KeyValues kv;
            try
            {
                kv = parse_key_values(tokens, 1);
            }
            catch (const std::invalid_argument &e)
            {
                throw ParseError(line_no, e.what());
            }

            if (tag == "[material]")
            {
                Material m;
                try
                {
                    m.name = kv.take("name");
                    m.eps_r = parse_double(kv.take("eps_r"));
                    m.sigma = parse_double(kv.take("sigma"));
                    kv.expect_empty();
                    for (const auto &o : scene.materials)
                        if (o.name == m.name)
                            throw std::invalid_argument("duplicate material '" + m.name + "'");
                    scene.add_material(m);
                }
                catch (const std::invalid_argument &e)
                {
                    throw ParseError(line_no, e.what());
                }
            }
            else if (tag == "[facet]")
            {
                PendingFacet pf;
                pf.line = line_no;
                try
                {
                    pf.material = kv.take("material");
                    const std::string verts = kv.take("v");
                    for (auto v : split(verts, ';'))
                        if (!v.empty())
                            pf.vertices.push_back(parse_vec3(v));
                    kv.expect_empty();
                }
                catch (const std::invalid_argument &e)
                {
                    throw ParseError(line_no, e.what());
                }
                pending.push_back(std::move(pf));
            }
            else
                throw ParseError(line_no, "unknown section '" + std::string(tag) + "'");
        }

        for (auto &pf : pending)
        {
            std::size_t mi;
            try
            {
                mi = scene.material_index(pf.material);
            }
            catch (const std::out_of_range &e)
            {
                throw ParseError(pf.line, e.what());
            }
            try
            {
                scene.add_facet(std::move(pf.vertices), mi);
            }
            catch (const std::invalid_argument &e)
            {
                throw ParseError(pf.line, e.what());
            }
        }
        return scene;
    }

    Scene load_scene_file(const std::string &path)
    {
        return load_scene(read_file(path));
    }

    std::uint64_t scene_hash(const Scene &scene)
    {
        std::uint64_t h = hash_string("scene");
        for (const auto &m : scene.materials)
        {
            h = hash_combine(h, hash_string(m.name));
            h = hash_combine(h, hash_double(m.eps_r));
            h = hash_combine(h, hash_double(m.sigma));
        }
        for (const auto &f : scene.facets)
        {
            h = hash_combine(h, f.material);
            for (const auto &v : f.vertices)
                h = hash_vec(h, v);
        }
        return h;
    }

    FresnelCoefficients fresnel_coefficients(const Material &material, double incidence, double frequency)
    {
        if (std::isinf(material.sigma))
            return {complex(-1.0, 0.0), complex(1.0, 0.0)};

        constexpr double eps0 = 8.8541878128e-12;
        const double omega = two_pi * frequency;
        const complex eps_c(material.eps_r, -material.sigma / (omega * eps0));
        const double c = std::cos(incidence);
        const double s = std::sin(incidence);
        const complex root = std::sqrt(eps_c - s * s);
        return {(c - root) / (c + root), (eps_c * c - root) / (eps_c * c + root)};
    }

    double friis_path_gain(double distance, double frequency)
    {
        return -20.0 * std::log10(4.0 * pi * distance * frequency / speed_of_light);
    }

    Vec3 mirror_point(const Facet &facet, const Vec3 &p)
    {
        const double d = dot(facet.normal, p) - facet.offset;
        return p - facet.normal * (2.0 * d);
    }

    bool point_in_facet(const Facet &facet, const Vec3 &p, double tol)
    {
        const std::size_t n = facet.vertices.size();
        for (std::size_t i = 0; i < n; ++i)
        {
            const Vec3 &a = facet.vertices[i];
            const Vec3 e = facet.vertices[(i + 1) % n] - a;
            // signed distance of p from edge line, positive inside
            const double side = dot(cross(e, p - a), facet.normal) / norm(e);
            if (side < -tol)
                return false;
        }
        return true;
    }

    bool segment_occluded(const Scene &scene, const Vec3 &a, const Vec3 &b)
    {
        const double tol = intersection_tolerance;
        for (const auto &f : scene.facets)
        {
            const double da = dot(f.normal, a) - f.offset;
            const double db = dot(f.normal, b) - f.offset;
            if (!((da > tol && db < -tol) || (da < -tol && db > tol)))
                continue;
            const double s = da / (da - db);
            if (point_in_facet(f, a + (b - a) * s))
                return true;
        }
        return false;
    }

    void assign_path_randomness(Mpc &mpc, const std::vector<std::size_t> &facets)
    {
        std::uint64_t h = hash_string("static-path");
        h = hash_combine(h, facets.size());
        for (auto f : facets)
            h = hash_combine(h, f);
        Rng rng(h);
        for (auto &p : mpc.phases)
            p = rng.phase();
        mpc.xpr = std::pow(10.0, rng.normal(8.0, 3.0) / 10.0);
    }

    namespace
    {
        struct Tracer
        {
            const Scene &scene;
            Vec3 tx, rx;
            int max_order;
            double frequency;
            std::vector<std::size_t> seq;
            std::vector<Vec3> images; // images[k] = tx mirrored through seq[0..k]
            std::vector<TracedPath> out;

            // Reconstructs reflection points for the current sequence; empty if invalid.
            bool backtrack(std::vector<Vec3> &points) const
            {
                const double tol = intersection_tolerance;
                const std::size_t n = seq.size();
                points.assign(n, Vec3{});
                Vec3 target = rx;
                for (std::size_t k = n; k-- > 0;)
                {
                    const Facet &f = scene.facets[seq[k]];
                    const Vec3 &img = images[k];
                    const double di = dot(f.normal, img) - f.offset;
                    const double dt = dot(f.normal, target) - f.offset;
                    if (!((di > tol && dt < -tol) || (di < -tol && dt > tol)))
                        return false;
                    const double s = di / (di - dt);
                    const Vec3 p = img + (target - img) * s;
                    if (!point_in_facet(f, p))
                        return false;
                    points[k] = p;
                    target = p;
                }
                return true;
            }

            void record(const std::vector<Vec3> &points)
            {
                Vec3 prev = tx;
                for (const auto &p : points)
                {
                    if (segment_occluded(scene, prev, p))
                        return;
                    prev = p;
                }
                if (segment_occluded(scene, prev, rx))
                    return;

                TracedPath tp;
                tp.facets = seq;
                tp.points = points;
                double power_factor = 1.0;
                double length = 0.0;
                prev = tx;
                for (std::size_t k = 0; k < points.size(); ++k)
                {
                    const Vec3 seg = points[k] - prev;
                    const double len = norm(seg);
                    length += len;
                    const Facet &f = scene.facets[seq[k]];
                    const double cosi = std::clamp(std::abs(dot(seg, f.normal)) / len, 0.0, 1.0);
                    const auto g = fresnel_coefficients(scene.materials[f.material], std::acos(cosi), frequency);
                    power_factor *= 0.5 * (std::norm(g.perp) + std::norm(g.par));
                    prev = points[k];
                }
                length += norm(rx - prev);
                tp.length = length;

                Mpc &m = tp.mpc;
                m.kind = points.empty() ? MpcKind::los : MpcKind::reflection;
                m.order = int(points.size());
                m.delay = length / speed_of_light;
                m.power = std::pow(10.0, friis_path_gain(length, frequency) / 10.0) * power_factor;
                m.aod = direction_angles((points.empty() ? rx : points.front()) - tx);
                m.aoa = direction_angles((points.empty() ? tx : points.back()) - rx);
                assign_path_randomness(m, seq);
                out.push_back(std::move(tp));
            }

            void descend()
            {
                if (!seq.empty())
                {
                    std::vector<Vec3> points;
                    if (backtrack(points))
                        record(points);
                }
                if (int(seq.size()) == max_order)
                    return;
                const Vec3 src = images.empty() ? tx : images.back();
                for (std::size_t i = 0; i < scene.facets.size(); ++i)
                {
                    if (!seq.empty() && seq.back() == i)
                        continue;
                    const Facet &f = scene.facets[i];
                    if (std::abs(dot(f.normal, src) - f.offset) <= intersection_tolerance)
                        continue;
                    seq.push_back(i);
                    images.push_back(mirror_point(f, src));
                    descend();
                    seq.pop_back();
                    images.pop_back();
                }
            }
        };
    }

    std::vector<TracedPath> trace_static_paths(const Scene &scene, const Vec3 &tx, const Vec3 &rx,
                                               int max_order, double frequency)
    {
        if (tx == rx)
            throw std::invalid_argument("tx and rx must differ");
        if (max_order < 0)
            throw std::invalid_argument("max_order must be >= 0");
        if (!(frequency > 0.0))
            throw std::invalid_argument("frequency must be > 0");

        Tracer tr{scene, tx, rx, max_order, frequency, {}, {}, {}};
        if (!segment_occluded(scene, tx, rx))
            tr.record({});
        tr.descend();

        std::sort(tr.out.begin(), tr.out.end(), [](const TracedPath &a, const TracedPath &b)
                  {
                      if (a.mpc.delay != b.mpc.delay)
                          return a.mpc.delay < b.mpc.delay;
                      return a.facets < b.facets; });
        return std::move(tr.out);
    }

    std::vector<Mpc> trace_static_mpcs(const Scene &scene, const Vec3 &tx, const Vec3 &rx,
                                       int max_order, double frequency)
    {
        auto paths = trace_static_paths(scene, tx, rx, max_order, frequency);
        std::vector<Mpc> out;
        out.reserve(paths.size());
        for (auto &p : paths)
            out.push_back(p.mpc);
        return out;
    }
}
