#include <catch_amalgamated.hpp>

#include <cmath>

#include "topnav/config.hpp"
#include "topnav/harness.hpp"
#include "topnav/world_io.hpp"

using namespace topnav;

namespace {

WorldModel open_world() {
    WorldModel w;
    const int n = w.sections_per_side();
    w.section_difficulty.assign(static_cast<size_t>(n * n), 0.0);
    w.section_class.assign(static_cast<size_t>(n * n), 0);
    w.start_pose = Pose{{0.0, 2.5}, 0.0};
    w.goal = {5.0, 2.5};
    w.seed = 1;
    return w;
}

StepRecord make_step(double difficulty, double v_cmd, double v_act, double c_norm) {
    StepRecord r;
    r.difficulty = difficulty;
    r.v_cmd = v_cmd;
    r.v_act = v_act;
    r.c_norm = c_norm;
    return r;
}

}  // namespace

TEST_CASE("variant presets") {
    const VariantFlags top = variant_preset("TOP");
    CHECK((top.use_terrain && top.use_proprio && top.use_obstacles && top.use_online_correction));
    const VariantFlags wt = variant_preset("wo/Terrain");
    CHECK_FALSE(wt.use_terrain);
    CHECK(wt.use_proprio);
    const VariantFlags wp = variant_preset("wo-proprioception");
    CHECK_FALSE(wp.use_proprio);
    CHECK_FALSE(wp.use_online_correction);  // corrections consume T_P
    CHECK(wp.use_terrain);
    const VariantFlags oo = variant_preset("Obstacle-Only");
    CHECK((!oo.use_terrain && !oo.use_proprio && oo.use_obstacles));
    CHECK_FALSE(variant_preset("wo-Correction").use_online_correction);
    CHECK_THROWS_AS(variant_preset("vp-nav"), ConfigError);
}

TEST_CASE("compute_metrics definitions") {
    SECTION("empty log is rejected") {
        CHECK_THROWS_AS(compute_metrics({}), std::invalid_argument);
    }
    SECTION("flat easy trajectory") {
        std::vector<StepRecord> log(100, make_step(0.0, 0.5, 0.5, 0.86));
        const Metrics m = compute_metrics(log);
        CHECK(m.td_percent == 0.0);
        CHECK(m.vft_percent == 0.0);
        CHECK(m.ut_proxy_percent == 0.0);
        CHECK(m.collisions == 0);
    }
    SECTION("half difficulty-0, half difficulty-0.5 averages to 25") {
        std::vector<StepRecord> log;
        for (int i = 0; i < 50; ++i) log.push_back(make_step(0.0, 0.5, 0.5, 0.86));
        for (int i = 0; i < 50; ++i) log.push_back(make_step(0.5, 0.5, 0.35, 0.32));
        const Metrics m = compute_metrics(log);
        CHECK(m.td_percent == Catch::Approx(25.0));
        CHECK(m.vft_percent == 0.0);       // gap 0.15 below threshold
        CHECK(m.ut_proxy_percent == 50.0); // low-evaluation half
    }
    SECTION("constant 0.3 tracking gap fails every step") {
        std::vector<StepRecord> log(40, make_step(1.0, 0.5, 0.2, 0.06));
        CHECK(compute_metrics(log).vft_percent == 100.0);
    }
    SECTION("collision events are counted on rising edges") {
        std::vector<StepRecord> log(10, make_step(0.0, 0.5, 0.5, 0.86));
        log[2].collided = log[3].collided = log[4].collided = true;
        log[7].collided = true;
        CHECK(compute_metrics(log).collisions == 2);
    }
}

TEST_CASE("open flat world reaches a 5 m goal in roughly ten seconds") {
    const AppConfig cfg;
    const WorldModel w = open_world();
    const EpisodeResult r = run_episode(w, variant_preset("TOP"), cfg, 99);
    CHECK(r.success);
    CHECK(r.time_s > 8.5);
    CHECK(r.time_s < 12.0);
    CHECK(r.td_percent == 0.0);
    CHECK(r.collisions == 0);
    // Success is recomputable from the trajectory.
    REQUIRE_FALSE(r.trajectory.empty());
    CHECK((r.trajectory.back().position - w.goal).norm() <= cfg.harness.success_radius_m);
    CHECK(r.trajectory.back().t <= cfg.planner.time_budget_s + 1e-9);
}

TEST_CASE("episode logs are deterministic for a fixed seed and config") {
    const AppConfig cfg;
    const WorldModel w = generate_world(2405);
    EpisodeTrace ta, tb;
    const EpisodeResult ra = run_episode(w, variant_preset("TOP"), cfg, 7, &ta);
    const EpisodeResult rb = run_episode(w, variant_preset("TOP"), cfg, 7, &tb);
    CHECK(ra.success == rb.success);
    CHECK(ra.time_s == rb.time_s);
    CHECK(step_log_jsonl(ta.records) == step_log_jsonl(tb.records));
}

TEST_CASE("a disabled terrain layer equals a zero terrain grid") {
    // On an all-known zero-cost world the terrain layer is exactly zero, so
    // TOP and wo-Terrain must produce identical motion (independent rng
    // streams per concern keep the evaluation noise identical).
    const AppConfig cfg;
    const WorldModel w = open_world();
    EpisodeTrace ta, tb;
    (void)run_episode(w, variant_preset("TOP"), cfg, 31, &ta);
    (void)run_episode(w, variant_preset("wo-Terrain"), cfg, 31, &tb);
    CHECK(step_log_jsonl(ta.records) == step_log_jsonl(tb.records));
}

TEST_CASE("scripted scenes") {
    SECTION("scenes are deterministic and satisfy the world invariants") {
        for (const std::string name : {"glass-wall", "novel-terrain", "slippery-strip"}) {
            const WorldModel a = scripted_scene(name, 5);
            const WorldModel b = scripted_scene(name, 5);
            CHECK(serialize_world(a) == serialize_world(b));
            std::string why;
            REQUIRE(world_invariants_ok(a, &why));
        }
        CHECK_THROWS_AS(scripted_scene("lava-pit", 1), ConfigError);
    }
    SECTION("the glass wall is invisible from the start pose") {
        const WorldModel w = scripted_scene("glass-wall", 3);
        const Wall& glass = w.walls.back();
        REQUIRE_FALSE(glass.visible);
        RobotState s{w.start_pose.position, w.start_pose.yaw, 0.0, false, 0.0};
        const SensorConfig sensor;
        for (const Vec2& p : sense_obstacles(w, s, sensor))
            REQUIRE(shape::distance(p, glass) > 1e-6);
        // The wall crosses the start-goal segment.
        REQUIRE(first_obstacle_hit(w, w.start_pose.position, w.goal).has_value());
        CHECK_FALSE(first_obstacle_hit(w, w.start_pose.position, w.goal, true).has_value());
    }
    SECTION("novel-terrain strips carry an unknown class and high difficulty") {
        const WorldModel w = scripted_scene("novel-terrain", 11);
        const SceneStrips strips = novel_terrain_strips();
        CHECK(w.class_at({1.5, 2.5}) == strips.novel_class);
        CHECK(w.difficulty_at({1.5, 2.5}) == 0.75);
        CHECK(w.class_at({3.5, 2.5}) == strips.novel_class);
        CHECK(w.difficulty_at({3.5, 4.5}) == 0.0);  // detour gap
        CHECK(w.class_at({3.5, 4.5}) == 0);
    }
    SECTION("slippery strip spans the corridor") {
        const WorldModel w = scripted_scene("slippery-strip", 2);
        for (double y : {0.5, 1.5, 2.5, 3.5}) REQUIRE(w.difficulty_at({2.5, y}) == 1.0);
        CHECK(w.difficulty_at({2.5, 4.5}) == 0.0);
        CHECK(w.class_at({2.5, 0.5}) == 6);
    }
}

TEST_CASE("mean difficulty per x-range helper") {
    std::vector<StepRecord> log;
    StepRecord a = make_step(0.75, 0.5, 0.3, 0.2);
    a.position = {1.5, 1.0};
    StepRecord b = make_step(0.0, 0.5, 0.5, 0.86);
    b.position = {3.5, 4.2};
    log.push_back(a);
    log.push_back(b);
    CHECK(*mean_difficulty_in_x_range(log, 1.0, 2.0) == 0.75);
    CHECK(*mean_difficulty_in_x_range(log, 3.0, 4.0) == 0.0);
    CHECK_FALSE(mean_difficulty_in_x_range(log, 4.5, 5.0).has_value());
}

TEST_CASE("batch summaries are invariant to the worker count") {
    const AppConfig cfg;
    const std::vector<VariantFlags> variants{variant_preset("TOP"),
                                             variant_preset("Obstacle-Only")};
    const BatchSummary one = run_batch(2, 1, variants, 77, 1, cfg);
    const BatchSummary four = run_batch(2, 1, variants, 77, 4, cfg);
    CHECK(batch_csv(one) == batch_csv(four));
    REQUIRE(one.variants.size() == 2);
    CHECK(one.variants[0].episodes == 2);
}

TEST_CASE("batch argument validation") {
    const AppConfig cfg;
    CHECK_THROWS_AS(run_batch(0, 1, {variant_preset("TOP")}, 1, 1, cfg), ConfigError);
    CHECK_THROWS_AS(run_batch(1, 0, {variant_preset("TOP")}, 1, 1, cfg), ConfigError);
    CHECK_THROWS_AS(run_batch(1, 1, {}, 1, 1, cfg), ConfigError);
}
