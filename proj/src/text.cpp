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

#include "dcm/text.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace dcm
{
    std::vector<std::string_view> split_lines(std::string_view text)
    {
        std::vector<std::string_view> out;
        std::size_t start = 0;
        while (start <= text.size())
        {
            auto end = text.find('\n', start);
            if (end == std::string_view::npos)
            {
                if (start < text.size())
                    out.push_back(text.substr(start));
                break;
            }
            auto line = text.substr(start, end - start);
            if (!line.empty() && line.back() == '\r')
                line.remove_suffix(1);
            out.push_back(line);
            start = end + 1;
        }
        return out;
    }

    std::vector<std::string_view> split(std::string_view s, char sep)
    {
        std::vector<std::string_view> out;
        std::size_t start = 0;
        for (;;)
        {
            auto end = s.find(sep, start);
            out.push_back(trim(s.substr(start, end == std::string_view::npos ? std::string_view::npos : end - start)));
            if (end == std::string_view::npos)
                break;
            start = end + 1;
        }
        return out;
    }

    std::string_view trim(std::string_view s)
    {
        const char *ws = " \t\r\n";
        auto b = s.find_first_not_of(ws);
        if (b == std::string_view::npos)
            return {};
        auto e = s.find_last_not_of(ws);
        return s.substr(b, e - b + 1);
    }

    std::vector<std::string_view> split_ws(std::string_view s)
    {
        std::vector<std::string_view> out;
        std::size_t i = 0;
        while (i < s.size())
        {
            while (i < s.size() && (s[i] == ' ' || s[i] == '\t'))
                ++i;
            std::size_t j = i;
            while (j < s.size() && s[j] != ' ' && s[j] != '\t')
                ++j;
            if (j > i)
                out.push_back(s.substr(i, j - i));
            i = j;
        }
        return out;
    }

    std::string_view strip_comment(std::string_view line)
    {
        auto h = line.find('#');
        if (h != std::string_view::npos)
            line = line.substr(0, h);
        return trim(line);
    }

    double parse_double(std::string_view s)
    {
        s = trim(s);
        double v = 0.0;
        const char *b = s.data(), *e = s.data() + s.size();
        if (!s.empty() && *b == '+')
            ++b;
        auto [p, ec] = std::from_chars(b, e, v);
        if (s.empty() || ec != std::errc() || p != e)
            throw std::invalid_argument("invalid number '" + std::string(s) + "'");
        return v;
    }

    long long parse_int(std::string_view s)
    {
        s = trim(s);
        long long v = 0;
        auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (s.empty() || ec != std::errc() || p != s.data() + s.size())
            throw std::invalid_argument("invalid integer '" + std::string(s) + "'");
        return v;
    }

    unsigned long long parse_uint(std::string_view s)
    {
        s = trim(s);
        unsigned long long v = 0;
        auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (s.empty() || ec != std::errc() || p != s.data() + s.size())
            throw std::invalid_argument("invalid unsigned integer '" + std::string(s) + "'");
        return v;
    }

    std::vector<double> parse_doubles(std::string_view s, char sep)
    {
        std::vector<double> out;
        for (auto part : split(s, sep))
            out.push_back(parse_double(part));
        return out;
    }

    Vec3 parse_vec3(std::string_view s)
    {
        auto v = parse_doubles(s);
        if (v.size() != 3)
            throw std::invalid_argument("expected x,y,z but got '" + std::string(s) + "'");
        return {v[0], v[1], v[2]};
    }

    void KeyValues::add(std::string key, std::string value)
    {
        if (has(key))
            throw std::invalid_argument("duplicate key '" + key + "'");
        items_.emplace_back(std::move(key), std::move(value));
    }

    bool KeyValues::has(std::string_view key) const
    {
        for (const auto &kv : items_)
            if (kv.first == key)
                return true;
        return false;
    }

    std::string KeyValues::take(std::string_view key)
    {
        for (auto it = items_.begin(); it != items_.end(); ++it)
            if (it->first == key)
            {
                std::string v = std::move(it->second);
                items_.erase(it);
                return v;
            }
        throw std::invalid_argument("missing key '" + std::string(key) + "'");
    }

    void KeyValues::expect_empty() const
    {
        if (!items_.empty())
            throw std::invalid_argument("unknown key '" + items_.front().first + "'");
    }

    KeyValues parse_key_values(const std::vector<std::string_view> &tokens, std::size_t first)
    {
        KeyValues kv;
        for (std::size_t i = first; i < tokens.size(); ++i)
        {
            auto eq = tokens[i].find('=');
            if (eq == std::string_view::npos || eq == 0)
                throw std::invalid_argument("expected key=value but got '" + std::string(tokens[i]) + "'");
            kv.add(std::string(tokens[i].substr(0, eq)), std::string(tokens[i].substr(eq + 1)));
        }
        return kv;
    }

    std::string format_exact(double v)
    {
        if (std::isinf(v))
            return v > 0 ? "inf" : "-inf";
        if (std::isnan(v))
            return "nan";
        char buf[40];
        std::snprintf(buf, sizeof buf, "%.17g", v);
        return buf;
    }

    std::string format_g(double v, int digits)
    {
        if (std::isinf(v))
            return v > 0 ? "inf" : "-inf";
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.*g", digits, v);
        return buf;
    }

    std::string read_file(const std::string &path)
    {
        std::ifstream in(path, std::ios::binary);
        if (!in)
            throw std::runtime_error("cannot open '" + path + "'");
        std::ostringstream ss;
        ss << in.rdbuf();
        return ss.str();
    }

    void write_file_atomic(const std::string &path, std::string_view content)
    {
        const std::string tmp = path + ".tmp";
        {
            std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
            if (!out)
                throw std::runtime_error("cannot write '" + tmp + "'");
            out.write(content.data(), std::streamsize(content.size()));
            if (!out)
                throw std::runtime_error("write failed for '" + tmp + "'");
        }
        std::error_code ec;
        std::filesystem::rename(tmp, path, ec);
        if (ec)
            throw std::runtime_error("cannot rename '" + tmp + "' to '" + path + "': " + ec.message());
    }
}
