// harness.hpp - episode orchestration, ablations, scenes, metrics and I/O.
#pragma once

#include <atomic>
#include <algorithm>
#include <cctype>
#include <cmath>
#include <deque>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include "topnav/config.hpp"
#include "topnav/geometry.hpp"
#include "topnav/gridmap.hpp"
#include "topnav/planner.hpp"
#include "topnav/proprio.hpp"
#include "topnav/sim.hpp"
#include "topnav/terrain.hpp"

namespace topnav {

// Paper-defined metric thresholds.
inline constexpr double kVftGapThreshold = 0.2;   // |v_lin - v_act| above this fails tracking
inline constexpr double kUtProxyThreshold = 0.5;  // c_norm below this counts as unstable

struct VariantFlags {
    std::string name = "TOP";
    bool use_terrain = true;
    bool use_proprio = true;
    bool use_obstacles = true;
    bool use_online_correction = true;
};

// Named ablation presets. wo-Proprioception also drops online corrections
// (they consume T_P); wo-Terrain keeps M_P and the recovery strategy.
inline VariantFlags variant_preset(const std::string& name) {
    std::string k;
    for (char c : name)
        k += (c == '/' || c == '_')
                 ? '-'
                 : static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (k == "top") return {"TOP", true, true, true, true};
    if (k == "wo-terrain") return {"wo-Terrain", false, true, true, false};
    if (k == "wo-proprioception") return {"wo-Proprioception", true, false, true, false};
    if (k == "obstacle-only") return {"Obstacle-Only", false, false, true, false};
    if (k == "wo-correction") return {"wo-Correction", true, true, true, false};
    throw ConfigError("unknown variant: " + name);
}

struct EpisodeAborted : std::runtime_error {
    uint64_t seed;
    EpisodeAborted(uint64_t s, const std::string& what)
        : std::runtime_error("episode aborted (seed " + std::to_string(s) + "): " + what),
          seed(s) {}
};

struct TimedPose {
    double t = 0.0;
    Vec2 position;
    double yaw = 0.0;
};

// One 50 Hz motion step in the episode log.
struct StepRecord {
    int step = 0;
    double t = 0.0;          // time after the step
    Vec2 position;           // pose after the step
    double yaw = 0.0;
    double v_cmd = 0.0;      // effective commanded speed for this step
    double delta_cmd = 0.0;  // remaining heading change commanded this step
    double v_act = 0.0;
    double c_norm = 0.0;     // pre-step evaluation (threshold not applied)
    double c_raw = 0.0;
    double difficulty = 0.0; // ground-truth difficulty under the robot pre-step
    bool collided = false;
    char phase = 'N';        // recovery phase: N / B / S
    bool planned = false;    // a planning step ran before this motion step
};

struct PlanSnapshot {
    int step = 0;
    Cell waypoint;
    CostGrid m_g, m_o, m_p, m_t, m_c;
};

struct EpisodeTrace {
    bool want_layers = false;
    std::vector<StepRecord> records;
    std::vector<PlanSnapshot> plans;
};

struct EpisodeResult {
    bool success = false;
    double time_s = 0.0;
    double td_percent = 0.0;
    double vft_percent = 0.0;
    double ut_proxy_percent = 0.0;
    int collisions = 0;
    std::vector<TimedPose> trajectory;
    uint64_t seed = 0;
    std::string variant;
};

struct Metrics {
    double td_percent = 0.0;
    double vft_percent = 0.0;
    double ut_proxy_percent = 0.0;
    int collisions = 0;
};

// TD / VFT / UT-proxy from a step log. UT uses the low-evaluation proxy
// (attitude is not simulated).
inline Metrics compute_metrics(const std::vector<StepRecord>& log) {
    if (log.empty()) throw std::invalid_argument("compute_metrics: empty step log");
    Metrics m;
    double td = 0.0;
    int vft = 0, ut = 0;
    bool prev_collided = false;
    for (const StepRecord& r : log) {
        td += r.difficulty;
        if (std::abs(r.v_cmd - r.v_act) > kVftGapThreshold) ++vft;
        if (r.c_norm < kUtProxyThreshold) ++ut;
        if (r.collided && !prev_collided) ++m.collisions;
        prev_collided = r.collided;
    }
    const double n = static_cast<double>(log.size());
    m.td_percent = 100.0 * td / n;
    m.vft_percent = 100.0 * vft / n;
    m.ut_proxy_percent = 100.0 * ut / n;
    return m;
}

// Known-class estimator for the simulation profile: difficulty levels are the
// classes, prototypes come from the shared table.
inline TerrainEstimator make_sim_estimator(const AppConfig& cfg, bool use_online_correction) {
    TerrainClassModel model;
    for (int i = 0; i < kKnownTerrainClasses; ++i) {
        model.class_names.push_back("level" + std::to_string(i));
        model.class_prototypes.push_back(prototype_table()[static_cast<size_t>(i)]);
    }
    model.noise_sigma = cfg.terrain_model.noise_sigma;
    model.softmax_temperature = cfg.terrain_model.softmax_temperature;
    model.K = cfg.terrain_model.K;
    return TerrainEstimator(std::move(model), cfg.terrain, use_online_correction);
}

// ---------------------------------------------------------------------------
// Episode loop: 50 Hz motion / 3 Hz planning (recovery may slow planning).

inline EpisodeResult run_episode(const WorldModel& world, const VariantFlags& variant,
                                 const AppConfig& cfg, uint64_t seed,
                                 EpisodeTrace* trace = nullptr) {
    const GridSpec& spec = cfg.grid();
    const double dt = cfg.motion.dt_s;
    Rng eval_rng = Rng::stream(seed, "eval");
    Rng sense_rng = Rng::stream(seed, "terrain-sense");
    Rng classify_rng = Rng::stream(seed, "classify");

    TerrainEstimator estimator;
    if (variant.use_terrain) estimator = make_sim_estimator(cfg, variant.use_online_correction);
    const bool record_experience =
        variant.use_terrain && variant.use_proprio && variant.use_online_correction;

    RobotState state{world.start_pose.position, world.start_pose.yaw, 0.0, false, 0.0};
    ProprioAdvisor advisor;
    RecoveryState recovery;
    VelocityCommand cmd{0.0, 0.0};
    double target_heading = state.yaw;
    Vec2 waypoint_world = state.position;
    bool have_waypoint = false;

    const int default_period = std::max(1, static_cast<int>(std::lround(cfg.planner.plan_period_s / dt)));
    const int n_steps = std::max(1, static_cast<int>(std::lround(cfg.planner.time_budget_s / dt)));
    int steps_since_plan = default_period;  // plan immediately at step 0
    double last_record_s = 0.0;
    double last_v_cmd = 0.0, last_v_act = 0.0;  // previous step, for the obstruction test

    std::vector<StepRecord> log;
    log.reserve(static_cast<size_t>(n_steps));
    EpisodeResult result;
    result.seed = seed;
    result.variant = variant.name;
    result.trajectory.reserve(static_cast<size_t>(n_steps) + 1);
    result.trajectory.push_back({state.time_s, state.position, state.yaw});

    for (int i = 0; i < n_steps; ++i) {
        const double now = state.time_s;
        const MotionEvaluation ev = motion_evaluation(world, state, cfg.motion, eval_rng);
        const bool obstructed =
            std::abs(last_v_act) < cfg.proprio.stall_speed_ratio * std::max(0.05, std::abs(last_v_cmd));
        advisor.observe(ev, state.yaw, obstructed, cfg.proprio);

        std::optional<VelocityCommand> override_cmd;
        std::optional<double> period_override;
        if (variant.use_proprio) {
            const bool reached = have_waypoint && (state.position - waypoint_world).norm() <=
                                                      cfg.harness.reached_radius_m;
            const RecoveryState::Phase before = recovery.phase;
            const RecoveryDecision dec =
                recovery_step(recovery, advisor.recovery_input(), now, state.yaw, reached,
                              cfg.proprio);
            recovery = dec.state;
            override_cmd = dec.override_cmd;
            period_override = dec.plan_period_override_s;
            // Backing off invalidates the current waypoint commitment, and
            // the slow-replan phase starts with an immediate plan so the
            // stale pre-backoff command is never resumed.
            if (recovery.phase == RecoveryState::Phase::Backoff) have_waypoint = false;
            if (before == RecoveryState::Phase::Backoff &&
                recovery.phase == RecoveryState::Phase::SlowReplan)
                steps_since_plan = 1 << 20;
        }

        const int period = period_override
                               ? std::max(1, static_cast<int>(std::lround(*period_override / dt)))
                               : default_period;
        bool planned = false;
        if (!override_cmd && steps_since_plan >= period) {
            CostGrid m_p(spec);
            if (variant.use_proprio) {
                for (const AdvisorSignal& sig : advisor.cost_signals(now, cfg.proprio)) {
                    const CostGrid band = proprio_cost_map(
                        sig.c_norm, spec, cfg.proprio,
                        wrap_angle(sig.bearing_world - state.yaw));
                    for (size_t k = 0; k < m_p.values.size(); ++k)
                        m_p.values[k] = std::max(m_p.values[k], band.values[k]);
                }
            }
            CostGrid m_o(spec);
            if (variant.use_obstacles) {
                const auto points = sense_obstacles(world, state, cfg.sensor);
                m_o = obstacle_cost_map(points, state.pose(), spec, cfg.planner.d_max);
            }
            const CostGrid m_t =
                variant.use_terrain
                    ? estimator.terrain_cost_map(
                          state.pose(), spec,
                          [&](const Vec2& pc) {
                              return sense_terrain_features(world, state, pc,
                                                            cfg.terrain_model.noise_sigma,
                                                            cfg.sensor, spec, sense_rng);
                          },
                          classify_rng)
                    : CostGrid(spec);
            const CostGrid m_g = goal_cost_map(Goal::point(world.goal), state.pose(), spec,
                                               cfg.planner.normalize_goal_map);
            const double a_t = alpha_terrain((world.goal - state.position).norm(), cfg.planner);
            const double a_g = alpha_goal(now / cfg.planner.time_budget_s, cfg.planner);
            const CostGrid m_c = combine(m_p, m_o, m_t, m_g, a_t, a_g);
            for (double v : m_c.values)
                if (!std::isfinite(v))
                    throw EpisodeAborted(seed, "non-finite combined cost at t=" +
                                                   std::to_string(now));
            const Cell fresh = select_waypoint(m_c, cfg.planner.path_cost_mode);
            Cell waypoint = fresh;
            // Commitment hysteresis: keep the previous waypoint unless the
            // fresh candidate wins by a clear cost margin. Without it the
            // argmin alternates between symmetric detours as the window
            // rotates and the robot drives down the blocked average.
            if (have_waypoint &&
                (state.position - waypoint_world).norm() > cfg.harness.reached_radius_m) {
                const auto prev = world_to_cell(waypoint_world, state.pose(), spec);
                if (prev && !(*prev == spec.base_cell)) {
                    const double prev_score = path_score(m_c, *prev, cfg.planner.path_cost_mode);
                    const double fresh_score = path_score(m_c, fresh, cfg.planner.path_cost_mode);
                    if (fresh_score >= prev_score - cfg.harness.waypoint_hysteresis)
                        waypoint = *prev;
                }
            }
            cmd = velocity_command(waypoint, state.pose(), spec, cfg.planner);
            target_heading = wrap_angle(state.yaw + cmd.delta_yaw);
            waypoint_world = cell_to_world(waypoint, state.pose(), spec);
            have_waypoint = true;
            steps_since_plan = 0;
            planned = true;
            if (trace && trace->want_layers)
                trace->plans.push_back(PlanSnapshot{i, waypoint, m_g, m_o, m_p, m_t, m_c});
        }
        ++steps_since_plan;

        // Track the plan command: re-shape the speed from the remaining
        // heading error so the robot accelerates once its turn completes
        // instead of crawling at the plan-time value for a whole period.
        VelocityCommand eff;
        if (override_cmd) {
            eff = *override_cmd;
        } else {
            const double remaining = wrap_angle(target_heading - state.yaw);
            eff = VelocityCommand{
                cfg.planner.v_0 * std::exp(-cfg.planner.k_yaw * std::abs(remaining)), remaining};
        }
        const double difficulty_here = world.difficulty_at(state.position);
        state = step(world, state, eff, cfg.motion);
        last_v_cmd = eff.v_lin;
        last_v_act = state.v_actual;

        StepRecord rec;
        rec.step = i;
        rec.t = state.time_s;
        rec.position = state.position;
        rec.yaw = state.yaw;
        rec.v_cmd = eff.v_lin;
        rec.delta_cmd = eff.delta_yaw;
        rec.v_act = state.v_actual;
        rec.c_norm = ev.c_norm;
        rec.c_raw = ev.c_raw;
        rec.difficulty = difficulty_here;
        rec.collided = state.collided;
        rec.phase = recovery.phase == RecoveryState::Phase::Normal     ? 'N'
                    : recovery.phase == RecoveryState::Phase::Backoff ? 'B'
                                                                      : 'S';
        rec.planned = planned;
        log.push_back(rec);
        result.trajectory.push_back({state.time_s, state.position, state.yaw});

        if (record_experience && state.time_s - last_record_s >= cfg.harness.record_period_s) {
            if (const auto t_p = advisor.record_traversability(state.time_s, cfg.proprio))
                estimator.record_experience(state.position, *t_p);
            last_record_s = state.time_s;
        }

        if ((state.position - world.goal).norm() <= cfg.harness.success_radius_m) {
            result.success = true;
            break;
        }
    }

    result.time_s = state.time_s;
    const Metrics m = compute_metrics(log);
    result.td_percent = m.td_percent;
    result.vft_percent = m.vft_percent;
    result.ut_proxy_percent = m.ut_proxy_percent;
    result.collisions = m.collisions;
    if (trace) trace->records = std::move(log);
    return result;
}

// Mean ground-truth difficulty over the steps whose position lies in an
// x-range; used to quantify strip encounters in the scripted scenes.
inline std::optional<double> mean_difficulty_in_x_range(const std::vector<StepRecord>& log,
                                                        double x_lo, double x_hi) {
    double sum = 0.0;
    int n = 0;
    for (const StepRecord& r : log) {
        if (r.position.x >= x_lo && r.position.x < x_hi) {
            sum += r.difficulty;
            ++n;
        }
    }
    if (n == 0) return std::nullopt;
    return sum / n;
}

// ---------------------------------------------------------------------------
// Batch runs.

struct VariantStats {
    std::string name;
    int episodes = 0;
    double sr_mean = 0.0, sr_stderr = 0.0;
    double td_mean = 0.0, td_stderr = 0.0;
    double vft_mean = 0.0, vft_stderr = 0.0;
    double ut_mean = 0.0, ut_stderr = 0.0;
    double time_mean_s = 0.0, time_stderr_s = 0.0;
    double time_budget_frac_mean = 0.0;
};

struct BatchSummary {
    int n_worlds = 0;
    int episodes_per_world = 0;
    uint64_t base_seed = 0;
    std::vector<VariantStats> variants;
};

inline uint64_t batch_world_seed(uint64_t base_seed, int world_idx) {
    return mix_seed(base_seed ^ hash_label("world"), static_cast<uint64_t>(world_idx));
}

inline uint64_t batch_episode_seed(uint64_t base_seed, int world_idx, int episode_idx) {
    // Shared across variants so ablations face identical noise streams.
    return mix_seed(mix_seed(base_seed ^ hash_label("episode"), static_cast<uint64_t>(world_idx)),
                    static_cast<uint64_t>(episode_idx));
}

// Runs every (world, episode, variant) combination; deterministic for a fixed
// base seed regardless of the worker count (results land in preassigned slots
// and are folded in a fixed order).
inline BatchSummary run_batch(int n_worlds, int episodes_per_world,
                              const std::vector<VariantFlags>& variants, uint64_t base_seed,
                              int workers, const AppConfig& cfg,
                              const WorldGenConfig& gen_cfg = {}) {
    if (n_worlds < 1) throw ConfigError("run_batch: need at least one world");
    if (episodes_per_world < 1) throw ConfigError("run_batch: need at least one episode per world");
    if (variants.empty()) throw ConfigError("run_batch: no variants requested");

    struct Row {
        double sr = 0.0, td = 0.0, vft = 0.0, ut = 0.0, time_s = 0.0;
    };
    const int n_variants = static_cast<int>(variants.size());
    const int n_tasks = n_worlds * episodes_per_world * n_variants;
    std::vector<Row> rows(static_cast<size_t>(n_tasks));
    std::vector<std::string> errors(static_cast<size_t>(n_tasks));

    std::atomic<int> next{0};
    const auto worker = [&]() {
        while (true) {
            const int task = next.fetch_add(1);
            if (task >= n_tasks) return;
            const int w = task / (episodes_per_world * n_variants);
            const int rest = task % (episodes_per_world * n_variants);
            const int e = rest / n_variants;
            const int v = rest % n_variants;
            try {
                const WorldModel world = generate_world(batch_world_seed(base_seed, w), gen_cfg);
                const EpisodeResult r = run_episode(world, variants[static_cast<size_t>(v)], cfg,
                                                    batch_episode_seed(base_seed, w, e));
                rows[static_cast<size_t>(task)] =
                    Row{r.success ? 100.0 : 0.0, r.td_percent, r.vft_percent,
                        r.ut_proxy_percent, r.time_s};
            } catch (const std::exception& ex) {
                errors[static_cast<size_t>(task)] =
                    std::string(ex.what()) + " [world seed " +
                    std::to_string(batch_world_seed(base_seed, w)) + "]";
            }
        }
    };

    const int n_threads = std::max(1, workers);
    if (n_threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<size_t>(n_threads));
        for (int i = 0; i < n_threads; ++i) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    for (const std::string& err : errors)
        if (!err.empty()) throw EpisodeAborted(base_seed, err);

    BatchSummary summary;
    summary.n_worlds = n_worlds;
    summary.episodes_per_world = episodes_per_world;
    summary.base_seed = base_seed;
    const auto mean_stderr = [](const std::vector<double>& xs) {
        const double n = static_cast<double>(xs.size());
        double mean = 0.0;
        for (double x : xs) mean += x;
        mean /= n;
        if (xs.size() < 2) return std::pair<double, double>{mean, 0.0};
        double var = 0.0;
        for (double x : xs) var += (x - mean) * (x - mean);
        var /= (n - 1.0);
        return std::pair<double, double>{mean, std::sqrt(var / n)};
    };
    for (int v = 0; v < n_variants; ++v) {
        std::vector<double> sr, td, vft, ut, time_s;
        for (int w = 0; w < n_worlds; ++w)
            for (int e = 0; e < episodes_per_world; ++e) {
                const Row& r = rows[static_cast<size_t>((w * episodes_per_world + e) * n_variants + v)];
                sr.push_back(r.sr);
                td.push_back(r.td);
                vft.push_back(r.vft);
                ut.push_back(r.ut);
                time_s.push_back(r.time_s);
            }
        VariantStats s;
        s.name = variants[static_cast<size_t>(v)].name;
        s.episodes = static_cast<int>(sr.size());
        std::tie(s.sr_mean, s.sr_stderr) = mean_stderr(sr);
        std::tie(s.td_mean, s.td_stderr) = mean_stderr(td);
        std::tie(s.vft_mean, s.vft_stderr) = mean_stderr(vft);
        std::tie(s.ut_mean, s.ut_stderr) = mean_stderr(ut);
        std::tie(s.time_mean_s, s.time_stderr_s) = mean_stderr(time_s);
        s.time_budget_frac_mean = s.time_mean_s / cfg.planner.time_budget_s;
        summary.variants.push_back(std::move(s));
    }
    return summary;
}

// ---------------------------------------------------------------------------
// Scripted scenes.

struct SceneStrips {
    int novel_class = 5;
    double first_x_lo = 0.0, first_x_hi = 0.0;    // strip the robot must cross
    double second_x_lo = 0.0, second_x_hi = 0.0;  // strip with a learnable detour
};

inline SceneStrips novel_terrain_strips() { return SceneStrips{5, 1.0, 2.0, 3.0, 4.0}; }

namespace detail {
// Shared scaffold: diagonal corridor with decor obstacles tucked into the
// corners, out of range of the start view.
inline WorldModel scene_base(uint64_t seed) {
    WorldModel w;
    w.seed = seed;
    const int n = w.sections_per_side();
    w.section_difficulty.assign(static_cast<size_t>(n * n), 0.0);
    w.section_class.assign(static_cast<size_t>(n * n), 0);

    Rng rng = Rng::stream(seed, "scene");
    const double j = rng.uniform(-0.05, 0.05);  // perpendicular corridor shift
    const Vec2 perp{-M_SQRT1_2, M_SQRT1_2};
    const Vec2 start = Vec2{0.7, 0.7} + perp * j;
    const Vec2 goal = Vec2{4.4, 4.4} + perp * j;
    w.start_pose = Pose{start, std::atan2(goal.y - start.y, goal.x - start.x)};
    w.goal = goal;

    w.walls.push_back(Wall{{4.25, 0.7}, {0.35, 0.05}, 0.0, true});
    w.columns.push_back(Column{{4.5, 0.45}, 0.16, true});
    w.columns.push_back(Column{{0.45, 4.5}, 0.16, true});
    return w;
}

inline void set_section(WorldModel& w, int ix, int iy, double difficulty, int cls) {
    const int n = w.sections_per_side();
    w.section_difficulty[static_cast<size_t>(ix * n + iy)] = difficulty;
    w.section_class[static_cast<size_t>(ix * n + iy)] = cls;
}
}  // namespace detail

// glass-wall: an invisible wall crosses the start-goal line at mid-corridor.
// novel-terrain: two strips of a class unknown to the classifier; the first
//   spans the corridor, the second has a zero-difficulty gap at the top.
// slippery-strip: one unknown-class strip spanning the corridor with only a
//   far opening, so it must be traversed once before corrections reroute.
inline WorldModel scripted_scene(const std::string& name, uint64_t seed) {
    Rng rng = Rng::stream(seed, "scene-extra");
    WorldModel w = detail::scene_base(seed);
    if (name == "glass-wall") {
        const double side = rng.uniform(0.0, 1.0) < 0.5 ? 1.0 : -1.0;
        const double offset = side * rng.uniform(0.18, 0.26);
        const Vec2 perp{-M_SQRT1_2, M_SQRT1_2};
        // Crossing point at 45% of the corridor leaves budget for the
        // collide-and-slide recovery dance plus the remaining leg.
        const Vec2 on_line =
            w.start_pose.position + (w.goal - w.start_pose.position) * 0.45;
        w.walls.push_back(Wall{on_line + perp * offset, {0.45, 0.04},
                               w.start_pose.yaw + M_PI / 2.0, /*visible=*/false});
    } else if (name == "novel-terrain") {
        const SceneStrips s = novel_terrain_strips();
        for (int iy = 0; iy < 5; ++iy) detail::set_section(w, 1, iy, 0.75, s.novel_class);
        for (int iy = 0; iy < 4; ++iy) detail::set_section(w, 3, iy, 0.75, s.novel_class);
        // gap at (3, 4) stays difficulty 0 / class 0
    } else if (name == "slippery-strip") {
        for (int iy = 0; iy < 4; ++iy) detail::set_section(w, 2, iy, 1.0, 6);
    } else {
        throw ConfigError("unknown scene: " + name);
    }
    std::string why;
    if (!world_invariants_ok(w, &why)) throw GenerationFailed(seed, "scene " + name + ": " + why);
    return w;
}

// ---------------------------------------------------------------------------
// Export.

namespace detail {
inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write file: " + path);
    out << content;
    if (!out) throw ConfigError("write failed: " + path);
}
}  // namespace detail

inline std::string step_log_jsonl(const std::vector<StepRecord>& records) {
    std::ostringstream out;
    for (const StepRecord& r : records) {
        out << "{\"step\":" << r.step << ",\"t\":" << fmt_double(r.t)
            << ",\"x\":" << fmt_double(r.position.x) << ",\"y\":" << fmt_double(r.position.y)
            << ",\"yaw\":" << fmt_double(r.yaw) << ",\"v_cmd\":" << fmt_double(r.v_cmd)
            << ",\"delta_cmd\":" << fmt_double(r.delta_cmd) << ",\"v_act\":" << fmt_double(r.v_act)
            << ",\"c_norm\":" << fmt_double(r.c_norm) << ",\"c_raw\":" << fmt_double(r.c_raw)
            << ",\"difficulty\":" << fmt_double(r.difficulty)
            << ",\"collided\":" << (r.collided ? 1 : 0) << ",\"phase\":\"" << r.phase
            << "\",\"planned\":" << (r.planned ? 1 : 0) << "}\n";
    }
    return out.str();
}

// Plain-text grid dump: one line per lateral index (top line = leftmost
// column), width_cells fields per line.
inline std::string grid_to_text(const CostGrid& g) {
    std::ostringstream out;
    for (int y = g.spec.height_cells - 1; y >= 0; --y) {
        for (int x = 0; x < g.spec.width_cells; ++x) {
            if (x) out << " ";
            out << fmt_double(g.at(x, y));
        }
        out << "\n";
    }
    return out.str();
}

inline std::string batch_csv(const BatchSummary& s) {
    std::ostringstream out;
    out << "variant,episodes,sr_mean,sr_stderr,td_mean,td_stderr,vft_mean,vft_stderr,"
           "ut_proxy_mean,ut_proxy_stderr,time_mean_s,time_stderr_s,time_budget_frac_mean\n";
    for (const VariantStats& v : s.variants) {
        out << v.name << "," << v.episodes << "," << fmt_double(v.sr_mean) << ","
            << fmt_double(v.sr_stderr) << "," << fmt_double(v.td_mean) << ","
            << fmt_double(v.td_stderr) << "," << fmt_double(v.vft_mean) << ","
            << fmt_double(v.vft_stderr) << "," << fmt_double(v.ut_mean) << ","
            << fmt_double(v.ut_stderr) << "," << fmt_double(v.time_mean_s) << ","
            << fmt_double(v.time_stderr_s) << "," << fmt_double(v.time_budget_frac_mean) << "\n";
    }
    return out.str();
}

inline void export_step_log(const std::vector<StepRecord>& records, const std::string& path) {
    detail::write_file(path, step_log_jsonl(records));
}

inline void export_batch_csv(const BatchSummary& summary, const std::string& path) {
    detail::write_file(path, batch_csv(summary));
}

inline void export_layer_dumps(const std::vector<PlanSnapshot>& plans, const std::string& dir) {
    std::filesystem::create_directories(dir);
    char name[64];
    for (const PlanSnapshot& p : plans) {
        const std::pair<const char*, const CostGrid*> layers[] = {
            {"MG", &p.m_g}, {"MO", &p.m_o}, {"MP", &p.m_p}, {"MT", &p.m_t}, {"MC", &p.m_c}};
        for (const auto& [tag, grid] : layers) {
            std::snprintf(name, sizeof(name), "plan_%06d_%s.txt", p.step, tag);
            detail::write_file((std::filesystem::path(dir) / name).string(), grid_to_text(*grid));
        }
    }
}

}  // namespace topnav
