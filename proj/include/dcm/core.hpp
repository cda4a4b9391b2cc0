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

#ifndef DCM_CORE_HPP
#define DCM_CORE_HPP

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>

namespace dcm
{
    using complex = std::complex<double>;

    inline constexpr double speed_of_light = 299792458.0; // m/s
    inline constexpr double pi = std::numbers::pi;
    inline constexpr double two_pi = 2.0 * std::numbers::pi;

    inline constexpr double deg_to_rad(double deg) { return deg * (pi / 180.0); }
    inline constexpr double rad_to_deg(double rad) { return rad * (180.0 / pi); }

    struct Vec3
    {
        double x = 0.0, y = 0.0, z = 0.0;

        constexpr Vec3 operator+(const Vec3 &o) const { return {x + o.x, y + o.y, z + o.z}; }
        constexpr Vec3 operator-(const Vec3 &o) const { return {x - o.x, y - o.y, z - o.z}; }
        constexpr Vec3 operator-() const { return {-x, -y, -z}; }
        constexpr Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
        constexpr Vec3 operator/(double s) const { return {x / s, y / s, z / s}; }
        constexpr Vec3 &operator+=(const Vec3 &o)
        {
            x += o.x, y += o.y, z += o.z;
            return *this;
        }
        constexpr bool operator==(const Vec3 &) const = default;
    };

    constexpr Vec3 operator*(double s, const Vec3 &v) { return v * s; }
    constexpr double dot(const Vec3 &a, const Vec3 &b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
    constexpr Vec3 cross(const Vec3 &a, const Vec3 &b)
    {
        return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
    }
    inline double norm(const Vec3 &v) { return std::sqrt(dot(v, v)); }
    inline Vec3 unit(const Vec3 &v) { return v / norm(v); }

    /// Elevation / azimuth pair in radians. Elevation in [-pi/2, pi/2], azimuth in [-pi, pi).
    struct Angles
    {
        double elevation = 0.0;
        double azimuth = 0.0;
        constexpr bool operator==(const Angles &) const = default;
    };

    /// Wraps an angle to [-pi, pi).
    inline double wrap_angle(double a)
    {
        double w = std::remainder(a, two_pi); // [-pi, pi]
        if (w >= pi)
            w -= two_pi;
        return w;
    }

    /// Unit vector [cos(e)cos(a), cos(e)sin(a), sin(e)].
    inline Vec3 direction_vector(const Angles &a)
    {
        const double ce = std::cos(a.elevation);
        return {ce * std::cos(a.azimuth), ce * std::sin(a.azimuth), std::sin(a.elevation)};
    }

    /// Angles of a (non-zero) direction vector.
    inline Angles direction_angles(const Vec3 &d)
    {
        const double r = norm(d);
        const double el = std::asin(std::clamp(d.z / r, -1.0, 1.0));
        return {el, wrap_angle(std::atan2(d.y, d.x))};
    }

    inline double wavelength(double frequency) { return speed_of_light / frequency; }

    /// Transmitter / receiver placement in global coordinates.
    struct Location
    {
        Vec3 tx;
        Vec3 rx;
        constexpr bool operator==(const Location &) const = default;
    };
}

#endif
