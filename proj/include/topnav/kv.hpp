// kv.hpp - sectioned key-value text format used by config and world files.
//
//   [section]
//   key = value        # comment
//
// Keys may repeat within a section (world obstacle lists rely on this).
// Doubles are printed with the shortest representation that parses back to
// the identical bit pattern, which keeps rewrites byte-stable.
#pragma once

#include <cstdio>
#include <cstdlib>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace topnav {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct KvSection {
    std::string name;
    std::vector<std::pair<std::string, std::string>> entries;
};

struct KvDoc {
    std::vector<KvSection> sections;

    KvSection* find(const std::string& name) {
        for (auto& s : sections)
            if (s.name == name) return &s;
        return nullptr;
    }
};

namespace detail {
inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}
}  // namespace detail

inline KvDoc parse_kv(const std::string& text, const std::string& origin = "config") {
    KvDoc doc;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    KvSection* current = nullptr;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find_first_of("#;");
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError(origin + ":" + std::to_string(line_no) + ": malformed section header");
            doc.sections.push_back(KvSection{detail::trim(line.substr(1, line.size() - 2)), {}});
            current = &doc.sections.back();
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(origin + ":" + std::to_string(line_no) + ": expected key = value");
        if (!current)
            throw ConfigError(origin + ":" + std::to_string(line_no) + ": entry before any [section]");
        current->entries.emplace_back(detail::trim(line.substr(0, eq)),
                                      detail::trim(line.substr(eq + 1)));
    }
    return doc;
}

inline double parse_double(const std::string& v, const std::string& context) {
    char* end = nullptr;
    const double d = std::strtod(v.c_str(), &end);
    if (end == v.c_str() || *end != '\0')
        throw ConfigError(context + ": not a number: '" + v + "'");
    return d;
}

inline long long parse_int(const std::string& v, const std::string& context) {
    char* end = nullptr;
    const long long i = std::strtoll(v.c_str(), &end, 10);
    if (end == v.c_str() || *end != '\0')
        throw ConfigError(context + ": not an integer: '" + v + "'");
    return i;
}

inline bool parse_bool(const std::string& v, const std::string& context) {
    if (v == "1" || v == "true" || v == "yes") return true;
    if (v == "0" || v == "false" || v == "no") return false;
    throw ConfigError(context + ": not a boolean: '" + v + "'");
}

inline std::vector<double> parse_double_list(const std::string& v, const std::string& context) {
    std::vector<double> out;
    std::string token;
    std::istringstream in(v);
    while (in >> token) {
        if (!token.empty() && token.back() == ',') token.pop_back();
        if (token.empty()) continue;
        out.push_back(parse_double(token, context));
    }
    if (out.empty()) throw ConfigError(context + ": empty list");
    return out;
}

// Shortest decimal form that round-trips to the exact same double.
inline std::string fmt_double(double v) {
    char buf[40];
    if (v == static_cast<double>(static_cast<long long>(v)) && std::abs(v) < 1e15) {
        std::snprintf(buf, sizeof(buf), "%lld", static_cast<long long>(v));
        return buf;
    }
    for (int prec = 1; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof(buf), "%.*g", prec, v);
        if (std::strtod(buf, nullptr) == v) return buf;
    }
    return buf;
}

}  // namespace topnav
