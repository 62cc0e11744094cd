// config.hpp - harness configuration file.
//
// One sectioned key-value file covers every tunable: planner, proprioception
// advisor, terrain estimator and corrections, motion model, sensor, grid
// window presets and harness bookkeeping. Unknown sections or keys are hard
// errors so typos cannot silently fall back to defaults.
#pragma once

#include <fstream>
#include <sstream>
#include <string>

#include "topnav/gridmap.hpp"
#include "topnav/kv.hpp"
#include "topnav/planner.hpp"
#include "topnav/proprio.hpp"
#include "topnav/sim.hpp"
#include "topnav/terrain.hpp"

namespace topnav {

struct HarnessConfig {
    double success_radius_m = 0.5;
    double reached_radius_m = 0.25;     // waypoint-reached radius; releases the
                                        // commitment before its bearing blows up
    double record_period_s = 1.0;       // T_P / experience recording cadence
    double waypoint_hysteresis = 0.2;   // path-cost margin a fresh waypoint must
                                        // win by before the commitment switches
};

struct TerrainModelConfig {
    int K = 8;
    double noise_sigma = 0.05;
    double softmax_temperature = 0.05;
};

struct AppConfig {
    std::string grid_profile = "sim";  // "sim" or "real"
    GridSpec grid_sim = GridSpec::sim_profile();
    GridSpec grid_real = GridSpec::real_profile();
    PlannerConfig planner;
    ProprioConfig proprio;
    TerrainCorrectionConfig terrain;
    TerrainModelConfig terrain_model;
    MotionModelConfig motion;
    SensorConfig sensor;
    HarnessConfig harness;

    AppConfig() {
        // The simulation profile classifies difficulty levels directly; merge
        // their costs alongside the named field-terrain table.
        for (int i = 0; i < kKnownTerrainClasses; ++i)
            terrain.prior_costs["level" + std::to_string(i)] = 0.25 * i;
        // Real-world profile uses c_th = 0.5 instead of 0.8.
    }

    const GridSpec& grid() const { return grid_profile == "real" ? grid_real : grid_sim; }
};

namespace detail {

inline void apply_grid(GridSpec& g, const std::string& key, const std::string& value,
                       const std::string& ctx) {
    if (key == "width_cells") g.width_cells = static_cast<int>(parse_int(value, ctx));
    else if (key == "height_cells") g.height_cells = static_cast<int>(parse_int(value, ctx));
    else if (key == "resolution_m") g.resolution_m = parse_double(value, ctx);
    else if (key == "base_x") g.base_cell.x = static_cast<int>(parse_int(value, ctx));
    else if (key == "base_y") g.base_cell.y = static_cast<int>(parse_int(value, ctx));
    else throw ConfigError(ctx + ": unknown key");
}

}  // namespace detail

inline void apply_config(AppConfig& cfg, const KvDoc& doc, const std::string& origin) {
    for (const KvSection& sec : doc.sections) {
        for (const auto& [key, value] : sec.entries) {
            const std::string ctx = origin + ": [" + sec.name + "] " + key;
            if (sec.name == "grid") {
                if (key == "profile") {
                    if (value != "sim" && value != "real")
                        throw ConfigError(ctx + ": profile must be sim or real");
                    cfg.grid_profile = value;
                } else {
                    throw ConfigError(ctx + ": unknown key");
                }
            } else if (sec.name == "grid.sim") {
                detail::apply_grid(cfg.grid_sim, key, value, ctx);
            } else if (sec.name == "grid.real") {
                detail::apply_grid(cfg.grid_real, key, value, ctx);
            } else if (sec.name == "planner") {
                auto& p = cfg.planner;
                if (key == "d_0") p.d_0 = parse_double(value, ctx);
                else if (key == "t_0") p.t_0 = parse_double(value, ctx);
                else if (key == "k_T1") p.k_T1 = parse_double(value, ctx);
                else if (key == "k_T2") p.k_T2 = parse_double(value, ctx);
                else if (key == "k_G0") p.k_G0 = parse_double(value, ctx);
                else if (key == "k_G1") p.k_G1 = parse_double(value, ctx);
                else if (key == "k_G2") p.k_G2 = parse_double(value, ctx);
                else if (key == "v_0") p.v_0 = parse_double(value, ctx);
                else if (key == "k_yaw") p.k_yaw = parse_double(value, ctx);
                else if (key == "d_max") p.d_max = parse_double(value, ctx);
                else if (key == "plan_period_s") p.plan_period_s = parse_double(value, ctx);
                else if (key == "time_budget_s") p.time_budget_s = parse_double(value, ctx);
                else if (key == "path_cost_mode") {
                    if (value == "mean") p.path_cost_mode = PathCostMode::PerCellMean;
                    else if (value == "meters") p.path_cost_mode = PathCostMode::MetersDenominator;
                    else throw ConfigError(ctx + ": mode must be mean or meters");
                } else if (key == "goal_map_normalize") {
                    p.normalize_goal_map = parse_bool(value, ctx);
                } else throw ConfigError(ctx + ": unknown key");
            } else if (sec.name == "proprio") {
                auto& p = cfg.proprio;
                if (key == "k_P") p.k_P = parse_double(value, ctx);
                else if (key == "c_th") p.c_th = parse_double(value, ctx);
                else if (key == "window_s") p.window_s = parse_double(value, ctx);
                else if (key == "recovery_threshold") p.recovery_threshold = parse_double(value, ctx);
                else if (key == "backoff_speed") p.backoff_speed = parse_double(value, ctx);
                else if (key == "backoff_duration_s") p.backoff_duration_s = parse_double(value, ctx);
                else if (key == "slow_replan_hz") p.slow_replan_hz = parse_double(value, ctx);
                else if (key == "heading_release_rad") p.heading_release_rad = parse_double(value, ctx);
                else if (key == "trigger_persistence_s") p.trigger_persistence_s = parse_double(value, ctx);
                else throw ConfigError(ctx + ": unknown key");
            } else if (sec.name == "terrain") {
                auto& t = cfg.terrain;
                if (key == "k_T3") t.k_T3 = parse_double(value, ctx);
                else if (key == "S_0") t.S_0 = parse_double(value, ctx);
                else if (key == "k_T4") t.k_T4 = parse_double(value, ctx);
                else if (key == "C_0") t.C_0 = parse_double(value, ctx);
                else if (key == "patch_size_m") t.patch_size_m = parse_double(value, ctx);
                else if (key == "buffer_capacity") t.buffer_capacity = static_cast<int>(parse_int(value, ctx));
                else if (key == "K") cfg.terrain_model.K = static_cast<int>(parse_int(value, ctx));
                else if (key == "noise_sigma") cfg.terrain_model.noise_sigma = parse_double(value, ctx);
                else if (key == "softmax_temperature")
                    cfg.terrain_model.softmax_temperature = parse_double(value, ctx);
                else throw ConfigError(ctx + ": unknown key");
            } else if (sec.name == "terrain.prior_costs") {
                cfg.terrain.prior_costs[key] = parse_double(value, ctx);
            } else if (sec.name == "motion") {
                auto& m = cfg.motion;
                if (key == "eval_anchors") m.eval_anchors = parse_double_list(value, ctx);
                else if (key == "eval_noise_sigma") m.eval_noise_sigma = parse_double(value, ctx);
                else if (key == "collision_eval") m.collision_eval = parse_double(value, ctx);
                else if (key == "slowdown_gain") m.slowdown_gain = parse_double(value, ctx);
                else if (key == "max_yaw_rate") m.max_yaw_rate = parse_double(value, ctx);
                else if (key == "dt_s") m.dt_s = parse_double(value, ctx);
                else throw ConfigError(ctx + ": unknown key");
            } else if (sec.name == "sensor") {
                auto& s = cfg.sensor;
                if (key == "fov_deg") s.fov_rad = parse_double(value, ctx) * M_PI / 180.0;
                else if (key == "range_m") s.range_m = parse_double(value, ctx);
                else if (key == "boundary_step_m") s.boundary_step_m = parse_double(value, ctx);
                else throw ConfigError(ctx + ": unknown key");
            } else if (sec.name == "harness") {
                auto& h = cfg.harness;
                if (key == "success_radius_m") h.success_radius_m = parse_double(value, ctx);
                else if (key == "reached_radius_m") h.reached_radius_m = parse_double(value, ctx);
                else if (key == "record_period_s") h.record_period_s = parse_double(value, ctx);
                else if (key == "waypoint_hysteresis") h.waypoint_hysteresis = parse_double(value, ctx);
                else throw ConfigError(ctx + ": unknown key");
            } else {
                throw ConfigError(origin + ": unknown section [" + sec.name + "]");
            }
        }
    }
    if (!cfg.grid_sim.valid() || !cfg.grid_real.valid())
        throw ConfigError(origin + ": invalid grid preset");
    if (cfg.motion.dt_s <= 0.0) throw ConfigError(origin + ": [motion] dt_s must be > 0");
    if (cfg.planner.plan_period_s <= 0.0)
        throw ConfigError(origin + ": [planner] plan_period_s must be > 0");
}

inline AppConfig parse_config(const std::string& text, const std::string& origin = "config") {
    AppConfig cfg;
    apply_config(cfg, parse_kv(text, origin), origin);
    return cfg;
}

inline AppConfig load_config_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), path);
}

}  // namespace topnav
