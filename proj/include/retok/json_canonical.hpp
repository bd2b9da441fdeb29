#pragma once

#include <cmath>
#include <cstdio>
#include <string>

#include <json.hpp>

#include "retok/error.hpp"

namespace retok {

using json = nlohmann::json;

namespace detail {

inline void put_string(std::string& out, const std::string& s) { out += json(s).dump(); }

inline void put_double(std::string& out, double x) {
    if (!std::isfinite(x)) throw DataError("non-finite", "cannot serialize a non-finite number");
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    std::string t(buf);
    // Keep floats recognizable as floats after a round trip.
    if (t.find_first_of(".eEn") == std::string::npos) t += ".0";
    out += t;
}

inline void put(std::string& out, const json& j, int indent, int depth) {
    auto nl = [&](int d) {
        if (indent < 0) return;
        out += '\n';
        out.append(static_cast<std::size_t>(indent * d), ' ');
    };
    switch (j.type()) {
        case json::value_t::object: {
            if (j.empty()) {
                out += "{}";
                return;
            }
            out += '{';
            bool first = true;
            for (auto it = j.begin(); it != j.end(); ++it) {  // std::map order: sorted keys
                if (!first) out += ',';
                first = false;
                nl(depth + 1);
                put_string(out, it.key());
                out += indent < 0 ? ":" : ": ";
                put(out, it.value(), indent, depth + 1);
            }
            nl(depth);
            out += '}';
            return;
        }
        case json::value_t::array: {
            if (j.empty()) {
                out += "[]";
                return;
            }
            // Arrays of scalars stay on one line.
            bool flat = true;
            for (auto& e : j) flat = flat && !e.is_structured();
            out += '[';
            bool first = true;
            for (auto& e : j) {
                if (!first) out += flat && indent >= 0 ? ", " : ",";
                first = false;
                if (!flat) nl(depth + 1);
                put(out, e, indent, depth + 1);
            }
            if (!flat) nl(depth);
            out += ']';
            return;
        }
        case json::value_t::number_float:
            put_double(out, j.get<double>());
            return;
        default:
            out += j.dump();
            return;
    }
}

}  // namespace detail

/// Deterministic JSON: sorted keys, doubles with 17 significant digits.
inline std::string canonical_dump(const json& j, int indent = 1) {
    std::string out;
    detail::put(out, j, indent, 0);
    out += '\n';
    return out;
}

inline json parse_json(const std::string& text) {
    try {
        return json::parse(text);
    } catch (const json::exception& e) {
        throw DataError("bad-json", e.what());
    }
}

}  // namespace retok
