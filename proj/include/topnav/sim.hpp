// sim.hpp - deterministic 2D navigation-cell simulator.
//
// A navigation cell is a 5 m x 5 m world of 1 m x 1 m terrain sections with
// difficulty levels {0, 0.25, 0.5, 0.75, 1}, wall/column obstacles (possibly
// invisible to the obstacle sensor), a start pose and a point goal. The robot
// is a unicycle stepped at 50 Hz; terrain difficulty slows it down and
// obstacle contact stops it. Motion evaluations come from a synthetic model
// calibrated on the per-difficulty averages reported for the value-function
// advisor, replacing the learned critic.
#pragma once

#include <cmath>
#include <cstdint>
#include <iostream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "topnav/geometry.hpp"
#include "topnav/gridmap.hpp"
#include "topnav/planner.hpp"
#include "topnav/proprio.hpp"
#include "topnav/rng.hpp"
#include "topnav/terrain.hpp"

namespace topnav {

// Fixed master seed for the global terrain-feature prototype table, shared by
// worlds (feature synthesis) and estimators (known-class subset).
inline constexpr uint64_t kPrototypeTableSeed = 0x70F0A11CE5ULL;
inline constexpr int kFeatureDim = 16;
inline constexpr int kTotalTerrainClasses = 8;  // 5 known difficulty levels + 3 novel
inline constexpr int kKnownTerrainClasses = 5;

inline const std::vector<Feature>& prototype_table() {
    static const std::vector<Feature> table =
        make_prototypes(kTotalTerrainClasses, kFeatureDim, kPrototypeTableSeed);
    return table;
}

struct Wall {
    Vec2 center;
    Vec2 half_extents;  // hx along the wall's own x-axis, hy thickness
    double yaw = 0.0;
    bool visible = true;
};

struct Column {
    Vec2 center;
    double radius = 0.2;
    bool visible = true;
};

struct RobotState {
    Vec2 position;
    double yaw = 0.0;
    double v_actual = 0.0;
    bool collided = false;
    double time_s = 0.0;

    Pose pose() const { return Pose{position, yaw}; }
};

struct WorldModel {
    double extent_m = 5.0;
    double section_m = 1.0;
    std::vector<double> section_difficulty;  // n x n, index ix * n + iy
    std::vector<int> section_class;
    std::vector<Wall> walls;
    std::vector<Column> columns;
    Pose start_pose;
    Vec2 goal;
    uint64_t seed = 0;

    int sections_per_side() const {
        return static_cast<int>(std::lround(extent_m / section_m));
    }
    int section_index(const Vec2& p) const {
        const int n = sections_per_side();
        const auto clamp_axis = [&](double v) {
            int i = static_cast<int>(std::floor(v / section_m));
            return std::min(std::max(i, 0), n - 1);
        };
        return clamp_axis(p.x) * n + clamp_axis(p.y);
    }
    double difficulty_at(const Vec2& p) const {
        return section_difficulty[static_cast<size_t>(section_index(p))];
    }
    int class_at(const Vec2& p) const {
        return section_class[static_cast<size_t>(section_index(p))];
    }
};

struct GenerationFailed : std::runtime_error {
    uint64_t seed;
    explicit GenerationFailed(uint64_t s, const std::string& what)
        : std::runtime_error("world generation failed (seed " + std::to_string(s) + "): " + what),
          seed(s) {}
};

struct WorldGenConfig {
    int n_walls = 1;
    int n_columns = 2;
    double margin_m = 0.3;           // start/goal margin from the cell edge
    double min_start_goal_m = 5.0;
    double clearance_m = 0.45;       // obstacle keep-out around start/goal
    double wall_half_len_min = 0.3, wall_half_len_max = 0.8;
    double wall_half_thick_min = 0.04, wall_half_thick_max = 0.08;
    double column_radius_min = 0.15, column_radius_max = 0.3;
    int max_tries = 20000;
};

struct SensorConfig {
    double fov_rad = M_PI / 2.0;    // total cone around the heading
    double range_m = 3.0;
    double boundary_step_m = 0.05;  // obstacle boundary sampling pitch
};

struct MotionModelConfig {
    // Normalized-evaluation anchors at difficulties {0, .25, .5, .75, 1}:
    // flat-ground value and per-difficulty row means of the advisor table.
    std::vector<double> eval_anchors = {0.86, 0.7508, 0.3179, 0.1522, 0.0586};
    double eval_noise_sigma = 0.03;
    double collision_eval = 0.02;
    double slowdown_gain = 0.85;  // difficulty-1.0 ground nearly immobilizes
    double max_yaw_rate = 1.5;    // [rad/s]
    double dt_s = 0.02;
};

// ---------------------------------------------------------------------------
// Shape queries.

namespace shape {

// Distance from a point to the wall boundary (0 when inside).
inline double distance(const Vec2& p, const Wall& w) {
    const double c = std::cos(w.yaw), s = std::sin(w.yaw);
    const Vec2 d = p - w.center;
    const double lx = c * d.x + s * d.y;
    const double ly = -s * d.x + c * d.y;
    const double ox = std::max(std::abs(lx) - w.half_extents.x, 0.0);
    const double oy = std::max(std::abs(ly) - w.half_extents.y, 0.0);
    return std::hypot(ox, oy);
}

inline double distance(const Vec2& p, const Column& col) {
    return std::max(0.0, (p - col.center).norm() - col.radius);
}

inline bool strictly_inside(const Vec2& p, const Wall& w) {
    const double c = std::cos(w.yaw), s = std::sin(w.yaw);
    const Vec2 d = p - w.center;
    const double lx = c * d.x + s * d.y;
    const double ly = -s * d.x + c * d.y;
    return std::abs(lx) < w.half_extents.x && std::abs(ly) < w.half_extents.y;
}

inline bool strictly_inside(const Vec2& p, const Column& col) {
    return (p - col.center).norm() < col.radius;
}

// First parameter t in [0, 1] where segment a + t (b - a) enters the column.
inline std::optional<double> segment_hit(const Vec2& a, const Vec2& b, const Column& col) {
    const Vec2 d = b - a;
    const Vec2 f = a - col.center;
    const double qa = d.norm_sq();
    const double qb = 2.0 * f.dot(d);
    const double qc = f.norm_sq() - col.radius * col.radius;
    if (qc < 0.0) return 0.0;  // starting inside: immediate contact
    if (qa < 1e-18) return std::nullopt;
    const double disc = qb * qb - 4.0 * qa * qc;
    if (disc < 0.0) return std::nullopt;
    const double t = (-qb - std::sqrt(disc)) / (2.0 * qa);
    if (t >= 0.0 && t <= 1.0) return t;
    return std::nullopt;
}

inline std::optional<double> segment_hit(const Vec2& a, const Vec2& b, const Wall& w) {
    const double c = std::cos(w.yaw), s = std::sin(w.yaw);
    const auto to_local = [&](const Vec2& p) {
        const Vec2 d = p - w.center;
        return Vec2{c * d.x + s * d.y, -s * d.x + c * d.y};
    };
    const Vec2 la = to_local(a), lb = to_local(b);
    const Vec2 d = lb - la;
    double t0 = 0.0, t1 = 1.0;
    const double lo[2] = {-w.half_extents.x, -w.half_extents.y};
    const double hi[2] = {w.half_extents.x, w.half_extents.y};
    const double p0[2] = {la.x, la.y};
    const double dv[2] = {d.x, d.y};
    for (int axis = 0; axis < 2; ++axis) {
        if (std::abs(dv[axis]) < 1e-15) {
            if (p0[axis] < lo[axis] || p0[axis] > hi[axis]) return std::nullopt;
            continue;
        }
        double ta = (lo[axis] - p0[axis]) / dv[axis];
        double tb = (hi[axis] - p0[axis]) / dv[axis];
        if (ta > tb) std::swap(ta, tb);
        t0 = std::max(t0, ta);
        t1 = std::min(t1, tb);
        if (t0 > t1) return std::nullopt;
    }
    return t0;  // 0 when starting inside the slab intersection
}

}  // namespace shape

// Earliest obstacle contact parameter on the segment, visible or not.
inline std::optional<double> first_obstacle_hit(const WorldModel& world, const Vec2& a,
                                                const Vec2& b, bool visible_only = false) {
    std::optional<double> best;
    const auto consider = [&](const std::optional<double>& t) {
        if (t && (!best || *t < *best)) best = t;
    };
    for (const Wall& w : world.walls)
        if (!visible_only || w.visible) consider(shape::segment_hit(a, b, w));
    for (const Column& col : world.columns)
        if (!visible_only || col.visible) consider(shape::segment_hit(a, b, col));
    return best;
}

// ---------------------------------------------------------------------------
// World generation.

inline bool world_invariants_ok(const WorldModel& w, std::string* why = nullptr) {
    const auto fail = [&](const std::string& msg) {
        if (why) *why = msg;
        return false;
    };
    const int n = w.sections_per_side();
    if (static_cast<int>(w.section_difficulty.size()) != n * n ||
        static_cast<int>(w.section_class.size()) != n * n)
        return fail("section table size mismatch");
    for (double d : w.section_difficulty) {
        bool ok = false;
        for (double lvl : {0.0, 0.25, 0.5, 0.75, 1.0}) ok = ok || d == lvl;
        if (!ok) return fail("difficulty not a level");
    }
    if (w.walls.empty()) return fail("needs at least one wall");
    if (w.columns.size() < 2) return fail("needs at least two columns");
    if ((w.start_pose.position - w.goal).norm() < 5.0 - 1e-9)
        return fail("start-goal distance below 5 m");
    for (const Vec2& p : {w.start_pose.position, w.goal}) {
        if (w.difficulty_at(p) != 0.0) return fail("start/goal not on difficulty-0 section");
        for (const Wall& wall : w.walls)
            if (shape::distance(p, wall) <= 0.0) return fail("start/goal touches a wall");
        for (const Column& col : w.columns)
            if (shape::distance(p, col) <= 0.0) return fail("start/goal touches a column");
    }
    return true;
}

inline WorldModel generate_world(uint64_t seed, const WorldGenConfig& cfg_in = {}) {
    WorldGenConfig cfg = cfg_in;
    if (cfg.n_walls < 1) {
        std::cerr << "generate_world: clamping wall count to 1\n";
        cfg.n_walls = 1;
    }
    if (cfg.n_columns < 2) {
        std::cerr << "generate_world: clamping column count to 2\n";
        cfg.n_columns = 2;
    }

    Rng rng = Rng::stream(seed, "worldgen");
    WorldModel w;
    w.seed = seed;
    const int n = w.sections_per_side();

    // Start and goal, at least min_start_goal_m apart.
    const double lo = cfg.margin_m, hi = w.extent_m - cfg.margin_m;
    Vec2 start, goal;
    bool placed = false;
    for (int i = 0; i < cfg.max_tries; ++i) {
        start = {rng.uniform(lo, hi), rng.uniform(lo, hi)};
        goal = {rng.uniform(lo, hi), rng.uniform(lo, hi)};
        if ((goal - start).norm() >= cfg.min_start_goal_m) {
            placed = true;
            break;
        }
    }
    if (!placed) throw GenerationFailed(seed, "no start/goal pair at the required distance");
    w.start_pose = Pose{start, std::atan2(goal.y - start.y, goal.x - start.x)};
    w.goal = goal;

    const auto clear_of_endpoints = [&](auto&& shape_obj) {
        return shape::distance(start, shape_obj) >= cfg.clearance_m &&
               shape::distance(goal, shape_obj) >= cfg.clearance_m;
    };
    for (int k = 0; k < cfg.n_walls; ++k) {
        bool ok = false;
        for (int i = 0; i < cfg.max_tries; ++i) {
            Wall wall;
            wall.center = {rng.uniform(0.5, w.extent_m - 0.5), rng.uniform(0.5, w.extent_m - 0.5)};
            wall.half_extents = {rng.uniform(cfg.wall_half_len_min, cfg.wall_half_len_max),
                                 rng.uniform(cfg.wall_half_thick_min, cfg.wall_half_thick_max)};
            wall.yaw = rng.uniform(-M_PI, M_PI);
            if (!clear_of_endpoints(wall)) continue;
            w.walls.push_back(wall);
            ok = true;
            break;
        }
        if (!ok) throw GenerationFailed(seed, "could not place a wall");
    }
    for (int k = 0; k < cfg.n_columns; ++k) {
        bool ok = false;
        for (int i = 0; i < cfg.max_tries; ++i) {
            Column col;
            col.center = {rng.uniform(0.4, w.extent_m - 0.4), rng.uniform(0.4, w.extent_m - 0.4)};
            col.radius = rng.uniform(cfg.column_radius_min, cfg.column_radius_max);
            if (!clear_of_endpoints(col)) continue;
            w.columns.push_back(col);
            ok = true;
            break;
        }
        if (!ok) throw GenerationFailed(seed, "could not place a column");
    }

    // Terrain sections: difficulty level drawn uniformly; class id == level.
    w.section_difficulty.resize(static_cast<size_t>(n * n));
    w.section_class.resize(static_cast<size_t>(n * n));
    for (int i = 0; i < n * n; ++i) {
        const int level = static_cast<int>(rng.uniform_index(5));
        w.section_difficulty[static_cast<size_t>(i)] = 0.25 * level;
        w.section_class[static_cast<size_t>(i)] = level;
    }
    for (const Vec2& p : {start, goal}) {
        const int idx = w.section_index(p);
        w.section_difficulty[static_cast<size_t>(idx)] = 0.0;
        w.section_class[static_cast<size_t>(idx)] = 0;
    }

    std::string why;
    if (!world_invariants_ok(w, &why)) throw GenerationFailed(seed, why);
    return w;
}

// ---------------------------------------------------------------------------
// Robot kinematics.

// One 50 Hz unicycle step: rate-limited turn toward yaw + delta_yaw, terrain
// slowdown on the commanded speed, and a stop at the first obstacle contact
// (visible or invisible alike).
inline RobotState step(const WorldModel& world, const RobotState& state,
                       const VelocityCommand& cmd, const MotionModelConfig& cfg) {
    if (cfg.dt_s <= 0.0) throw std::invalid_argument("step: dt_s must be > 0");
    RobotState out = state;
    const double max_dyaw = cfg.max_yaw_rate * cfg.dt_s;
    const double dyaw = std::min(std::max(cmd.delta_yaw, -max_dyaw), max_dyaw);
    out.yaw = wrap_angle(state.yaw + dyaw);
    out.time_s = state.time_s + cfg.dt_s;

    const double difficulty = world.difficulty_at(state.position);
    const double v_act = cmd.v_lin * std::max(0.0, 1.0 - cfg.slowdown_gain * difficulty);
    const Vec2 dir{std::cos(out.yaw), std::sin(out.yaw)};
    const Vec2 target = state.position + dir * (v_act * cfg.dt_s);

    const auto hit = first_obstacle_hit(world, state.position, target);
    if (hit) {
        const double len = (target - state.position).norm();
        const double backoff = len > 1e-12 ? 1e-4 / len : 0.0;
        const double t_stop = std::max(0.0, *hit - backoff);
        out.position = state.position + (target - state.position) * t_stop;
        out.v_actual = 0.0;
        out.collided = true;
    } else {
        out.position = target;
        out.v_actual = v_act;
        out.collided = false;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Sensing.

// Boundary point cloud of visible obstacles inside the field of view and
// range, occlusion-tested by ray casting against the visible set. Invisible
// obstacles never contribute points.
inline std::vector<Vec2> sense_obstacles(const WorldModel& world, const RobotState& state,
                                         const SensorConfig& cfg) {
    std::vector<Vec2> samples;
    const auto add_sample = [&](const Vec2& p) { samples.push_back(p); };

    for (const Wall& w : world.walls) {
        if (!w.visible) continue;
        const double c = std::cos(w.yaw), s = std::sin(w.yaw);
        const auto to_world = [&](double lx, double ly) {
            return Vec2{w.center.x + c * lx - s * ly, w.center.y + s * lx + c * ly};
        };
        const double hx = w.half_extents.x, hy = w.half_extents.y;
        const auto sample_edge = [&](Vec2 a, Vec2 b) {
            const double len = (b - a).norm();
            const int steps = std::max(1, static_cast<int>(std::ceil(len / cfg.boundary_step_m)));
            for (int i = 0; i <= steps; ++i)
                add_sample(a + (b - a) * (static_cast<double>(i) / steps));
        };
        sample_edge(to_world(-hx, -hy), to_world(hx, -hy));
        sample_edge(to_world(hx, -hy), to_world(hx, hy));
        sample_edge(to_world(hx, hy), to_world(-hx, hy));
        sample_edge(to_world(-hx, hy), to_world(-hx, -hy));
    }
    for (const Column& col : world.columns) {
        if (!col.visible) continue;
        const int steps =
            std::max(8, static_cast<int>(std::ceil(2.0 * M_PI * col.radius / cfg.boundary_step_m)));
        for (int i = 0; i < steps; ++i) {
            const double a = 2.0 * M_PI * i / steps;
            add_sample(col.center + Vec2{col.radius * std::cos(a), col.radius * std::sin(a)});
        }
    }

    std::vector<Vec2> visible;
    for (const Vec2& p : samples) {
        const Vec2 d = p - state.position;
        const double dist = d.norm();
        if (dist < 1e-9 || dist > cfg.range_m) continue;
        if (std::abs(wrap_angle(std::atan2(d.y, d.x) - state.yaw)) > cfg.fov_rad / 2.0) continue;
        const auto hit = first_obstacle_hit(world, state.position, p, /*visible_only=*/true);
        if (hit && *hit < 1.0 - 1e-4) continue;  // occluded by a nearer surface
        visible.push_back(p);
    }
    return visible;
}

// Observed feature for a terrain patch center: the class prototype plus fresh
// Gaussian noise, unit-normalized; nullopt when the patch is outside the
// sensing coverage (grid window intersected with the field of view).
inline std::optional<Feature> sense_terrain_features(const WorldModel& world,
                                                     const RobotState& state,
                                                     const Vec2& patch_center_world,
                                                     double noise_sigma,
                                                     const SensorConfig& sensor,
                                                     const GridSpec& spec, Rng& rng) {
    if (!world_to_cell(patch_center_world, state.pose(), spec)) return std::nullopt;
    const Vec2 d = patch_center_world - state.position;
    const double dist = d.norm();
    if (dist < 1e-9 || dist > sensor.range_m) return std::nullopt;
    if (std::abs(wrap_angle(std::atan2(d.y, d.x) - state.yaw)) > sensor.fov_rad / 2.0)
        return std::nullopt;

    const int cls = world.class_at(patch_center_world);
    Feature f = prototype_table().at(static_cast<size_t>(cls));
    if (noise_sigma <= 0.0) return f;  // prototypes are already unit norm
    for (double& v : f) v += rng.normal(0.0, noise_sigma);
    return unit_normalized(std::move(f));
}

// ---------------------------------------------------------------------------
// Synthetic motion evaluation.

// Piecewise-linear interpolation of the per-difficulty evaluation anchors.
inline double eval_anchor_interp(double difficulty, const MotionModelConfig& cfg) {
    const auto& a = cfg.eval_anchors;
    if (a.size() < 2) throw std::invalid_argument("eval_anchor_interp: need >= 2 anchors");
    const double spacing = 1.0 / static_cast<double>(a.size() - 1);
    const double d = std::min(std::max(difficulty, 0.0), 1.0);
    const int i = std::min(static_cast<int>(d / spacing), static_cast<int>(a.size()) - 2);
    const double frac = (d - i * spacing) / spacing;
    return a[static_cast<size_t>(i)] * (1.0 - frac) + a[static_cast<size_t>(i) + 1] * frac;
}

// Normalized evaluation of the robot's current situation; collisions return
// the calibrated contact reading regardless of terrain. c_raw is the sigmoid
// inverse of the (pre-threshold) normalized value.
inline MotionEvaluation motion_evaluation(const WorldModel& world, const RobotState& state,
                                          const MotionModelConfig& cfg, Rng& rng) {
    double v = eval_anchor_interp(world.difficulty_at(state.position), cfg);
    if (cfg.eval_noise_sigma > 0.0) v += rng.normal(0.0, cfg.eval_noise_sigma);
    v = clamp01(v);
    if (state.collided) v = cfg.collision_eval;
    return MotionEvaluation{normalize_inverse(v), v, state.time_s};
}

}  // namespace topnav
