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

// Small helpers for the line-oriented scene and map formats.

#ifndef DCM_TEXT_HPP
#define DCM_TEXT_HPP

#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "dcm/core.hpp"

namespace dcm
{
    std::vector<std::string_view> split_lines(std::string_view text);
    std::vector<std::string_view> split(std::string_view s, char sep);
    std::vector<std::string_view> split_ws(std::string_view s);
    std::string_view trim(std::string_view s);

    /// Drops everything from the first '#' and trims.
    std::string_view strip_comment(std::string_view line);

    /// Strict parsers; throw std::invalid_argument naming the offending text.
    double parse_double(std::string_view s);
    long long parse_int(std::string_view s);
    unsigned long long parse_uint(std::string_view s);
    Vec3 parse_vec3(std::string_view s);
    std::vector<double> parse_doubles(std::string_view s, char sep = ',');

    /// `key=value` tokens of one line, in order of appearance.
    class KeyValues
    {
    public:
        void add(std::string key, std::string value);
        bool has(std::string_view key) const;
        /// Removes and returns the value; throws std::invalid_argument if missing.
        std::string take(std::string_view key);
        /// Throws std::invalid_argument if any key was not consumed.
        void expect_empty() const;

    private:
        std::vector<std::pair<std::string, std::string>> items_;
    };

    KeyValues parse_key_values(const std::vector<std::string_view> &tokens, std::size_t first);

    /// Shortest round-trip representation (17 significant digits, `inf` for infinity).
    std::string format_exact(double v);
    /// printf-style %.<digits>g.
    std::string format_g(double v, int digits);

    std::string read_file(const std::string &path);
    /// Writes to a sibling temporary file and renames it over `path`.
    void write_file_atomic(const std::string &path, std::string_view content);
}

#endif
