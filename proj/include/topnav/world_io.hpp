// world_io.hpp - navigation-cell text serialization.
//
// Stable section and field order so that identical seeds produce identical
// files. Layout:
//
//   [world]    seed / extent_m / section_m
//   [tiles]    difficulty_<iy> and class_<iy> rows, ix across
//   [obstacles] wall = cx cy hx hy yaw visible ; column = cx cy r visible
//   [start]    pose = x y yaw
//   [goal]     point = x y
#pragma once

#include <fstream>
#include <sstream>
#include <string>

#include "topnav/kv.hpp"
#include "topnav/sim.hpp"

namespace topnav {

inline std::string serialize_world(const WorldModel& w) {
    std::ostringstream out;
    const int n = w.sections_per_side();
    out << "[world]\n";
    out << "seed = " << w.seed << "\n";
    out << "extent_m = " << fmt_double(w.extent_m) << "\n";
    out << "section_m = " << fmt_double(w.section_m) << "\n";
    out << "[tiles]\n";
    for (int iy = 0; iy < n; ++iy) {
        out << "difficulty_" << iy << " =";
        for (int ix = 0; ix < n; ++ix)
            out << " " << fmt_double(w.section_difficulty[static_cast<size_t>(ix * n + iy)]);
        out << "\n";
    }
    for (int iy = 0; iy < n; ++iy) {
        out << "class_" << iy << " =";
        for (int ix = 0; ix < n; ++ix)
            out << " " << w.section_class[static_cast<size_t>(ix * n + iy)];
        out << "\n";
    }
    out << "[obstacles]\n";
    for (const Wall& wall : w.walls) {
        out << "wall = " << fmt_double(wall.center.x) << " " << fmt_double(wall.center.y) << " "
            << fmt_double(wall.half_extents.x) << " " << fmt_double(wall.half_extents.y) << " "
            << fmt_double(wall.yaw) << " " << (wall.visible ? 1 : 0) << "\n";
    }
    for (const Column& col : w.columns) {
        out << "column = " << fmt_double(col.center.x) << " " << fmt_double(col.center.y) << " "
            << fmt_double(col.radius) << " " << (col.visible ? 1 : 0) << "\n";
    }
    out << "[start]\n";
    out << "pose = " << fmt_double(w.start_pose.position.x) << " "
        << fmt_double(w.start_pose.position.y) << " " << fmt_double(w.start_pose.yaw) << "\n";
    out << "[goal]\n";
    out << "point = " << fmt_double(w.goal.x) << " " << fmt_double(w.goal.y) << "\n";
    return out.str();
}

inline WorldModel parse_world(const std::string& text, const std::string& origin = "world") {
    KvDoc doc = parse_kv(text, origin);
    WorldModel w;
    bool have_start = false, have_goal = false;

    for (const KvSection& sec : doc.sections) {
        if (sec.name == "world") {
            for (const auto& [k, v] : sec.entries) {
                const std::string ctx = origin + ": [world] " + k;
                if (k == "seed") w.seed = static_cast<uint64_t>(parse_int(v, ctx));
                else if (k == "extent_m") w.extent_m = parse_double(v, ctx);
                else if (k == "section_m") w.section_m = parse_double(v, ctx);
                else throw ConfigError(ctx + ": unknown key");
            }
        } else if (sec.name == "tiles") {
            const int n = w.sections_per_side();
            w.section_difficulty.assign(static_cast<size_t>(n * n), 0.0);
            w.section_class.assign(static_cast<size_t>(n * n), 0);
            for (const auto& [k, v] : sec.entries) {
                const std::string ctx = origin + ": [tiles] " + k;
                const bool is_diff = k.rfind("difficulty_", 0) == 0;
                const bool is_class = k.rfind("class_", 0) == 0;
                if (!is_diff && !is_class) throw ConfigError(ctx + ": unknown key");
                const int iy =
                    static_cast<int>(parse_int(k.substr(k.find('_') + 1), ctx + " (row index)"));
                if (iy < 0 || iy >= n) throw ConfigError(ctx + ": row index out of range");
                const auto vals = parse_double_list(v, ctx);
                if (static_cast<int>(vals.size()) != n)
                    throw ConfigError(ctx + ": expected " + std::to_string(n) + " values");
                for (int ix = 0; ix < n; ++ix) {
                    const size_t idx = static_cast<size_t>(ix * n + iy);
                    if (is_diff) w.section_difficulty[idx] = vals[static_cast<size_t>(ix)];
                    else w.section_class[idx] = static_cast<int>(vals[static_cast<size_t>(ix)]);
                }
            }
        } else if (sec.name == "obstacles") {
            for (const auto& [k, v] : sec.entries) {
                const std::string ctx = origin + ": [obstacles] " + k;
                const auto f = parse_double_list(v, ctx);
                if (k == "wall") {
                    if (f.size() != 6) throw ConfigError(ctx + ": expected 6 fields");
                    w.walls.push_back(Wall{{f[0], f[1]}, {f[2], f[3]}, f[4], f[5] != 0.0});
                } else if (k == "column") {
                    if (f.size() != 4) throw ConfigError(ctx + ": expected 4 fields");
                    w.columns.push_back(Column{{f[0], f[1]}, f[2], f[3] != 0.0});
                } else {
                    throw ConfigError(ctx + ": unknown key");
                }
            }
        } else if (sec.name == "start") {
            for (const auto& [k, v] : sec.entries) {
                const std::string ctx = origin + ": [start] " + k;
                if (k != "pose") throw ConfigError(ctx + ": unknown key");
                const auto f = parse_double_list(v, ctx);
                if (f.size() != 3) throw ConfigError(ctx + ": expected 3 fields");
                w.start_pose = Pose{{f[0], f[1]}, f[2]};
                have_start = true;
            }
        } else if (sec.name == "goal") {
            for (const auto& [k, v] : sec.entries) {
                const std::string ctx = origin + ": [goal] " + k;
                if (k != "point") throw ConfigError(ctx + ": unknown key");
                const auto f = parse_double_list(v, ctx);
                if (f.size() != 2) throw ConfigError(ctx + ": expected 2 fields");
                w.goal = {f[0], f[1]};
                have_goal = true;
            }
        } else {
            throw ConfigError(origin + ": unknown section [" + sec.name + "]");
        }
    }
    if (w.section_difficulty.empty()) throw ConfigError(origin + ": missing [tiles]");
    if (!have_start || !have_goal) throw ConfigError(origin + ": missing start or goal");
    return w;
}

inline WorldModel load_world_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open world file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_world(ss.str(), path);
}

inline void save_world_file(const WorldModel& w, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write world file: " + path);
    out << serialize_world(w);
    if (!out) throw ConfigError("write failed: " + path);
}

}  // namespace topnav
