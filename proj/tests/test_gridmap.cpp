#include <catch_amalgamated.hpp>

#include <algorithm>
#include <set>

#include "oracles.hpp"
#include "topnav/gridmap.hpp"
#include "topnav/rng.hpp"

using namespace topnav;

namespace {
std::set<std::pair<int, int>> cell_set(const std::vector<Cell>& cells) {
    std::set<std::pair<int, int>> s;
    for (const Cell& c : cells) s.insert({c.x, c.y});
    return s;
}
}  // namespace

TEST_CASE("grid spec presets are valid") {
    CHECK(GridSpec::sim_profile().valid());
    CHECK(GridSpec::real_profile().valid());
    CHECK(GridSpec::sim_profile().width_cells == 8);
    CHECK(GridSpec::sim_profile().height_cells == 10);
    GridSpec bad = GridSpec::sim_profile();
    bad.resolution_m = 0.0;
    CHECK_FALSE(bad.valid());
    bad = GridSpec::sim_profile();
    bad.base_cell = {8, 5};
    CHECK_FALSE(bad.valid());
}

TEST_CASE("world_to_cell anchors the robot at the base cell") {
    const GridSpec spec = GridSpec::sim_profile();
    const Pose robot{{0.0, 0.0}, 0.0};
    CHECK(world_to_cell({0.0, 0.0}, robot, spec) == Cell{3, 5});
    CHECK(world_to_cell({0.15, 0.0}, robot, spec) == Cell{4, 5});

    // Rotated case checked with hand-rotated coordinates: robot at (2,3)
    // heading +y, point 0.3 m ahead in world y.
    const Pose rotated{{2.0, 3.0}, M_PI / 2.0};
    CHECK(world_to_cell({2.0, 3.3}, rotated, spec) == Cell{5, 5});

    CHECK_FALSE(world_to_cell({3.0, 0.0}, robot, spec).has_value());
}

TEST_CASE("cell_to_world inverts world_to_cell") {
    const GridSpec spec = GridSpec::sim_profile();
    const Pose robot{{1.2, -0.4}, 0.7};
    CHECK((cell_to_world(spec.base_cell, robot, spec) - robot.position).norm() < 1e-12);

    // Adjacent cells are exactly one resolution apart.
    const Vec2 a = cell_to_world({4, 5}, robot, spec);
    const Vec2 b = cell_to_world({3, 5}, robot, spec);
    CHECK((a - b).norm() == Catch::Approx(spec.resolution_m).margin(1e-12));

    CHECK_THROWS_AS(cell_to_world({8, 0}, robot, spec), std::invalid_argument);
}

TEST_CASE("world->cell->world round trip stays within half a cell per axis") {
    const GridSpec spec = GridSpec::sim_profile();
    Rng rng(42);
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
        const Pose robot{{rng.uniform(-3.0, 3.0), rng.uniform(-3.0, 3.0)},
                         rng.uniform(-M_PI, M_PI)};
        // Sample inside the covered rectangle in robot frame.
        const Vec2 local{rng.uniform(-0.5, 0.65), rng.uniform(-0.8, 0.65)};
        const Vec2 p = robot_to_world(local, robot);
        const auto cell = world_to_cell(p, robot, spec);
        if (!cell) continue;
        const Vec2 err = world_to_robot(cell_to_world(*cell, robot, spec), robot) -
                         world_to_robot(p, robot);
        worst = std::max({worst, std::abs(err.x), std::abs(err.y)});
    }
    CHECK(worst <= 0.075 + 1e-9);
}

TEST_CASE("cell round trip is exact on every in-bounds cell") {
    const GridSpec spec = GridSpec::sim_profile();
    Rng rng(7);
    for (int trial = 0; trial < 20; ++trial) {
        const Pose robot{{rng.uniform(-5.0, 5.0), rng.uniform(-5.0, 5.0)},
                         rng.uniform(-M_PI, M_PI)};
        for (int x = 0; x < spec.width_cells; ++x)
            for (int y = 0; y < spec.height_cells; ++y) {
                const Cell c{x, y};
                const auto back = world_to_cell(cell_to_world(c, robot, spec), robot, spec);
                REQUIRE(back.has_value());
                REQUIRE(*back == c);
            }
    }
}

TEST_CASE("raster_line endpoints and short lines") {
    const GridSpec spec = GridSpec::sim_profile();
    CHECK(raster_line({2, 2}, {2, 2}, spec) == std::vector<Cell>{{2, 2}});

    const auto horizontal = raster_line({0, 0}, {0, 3}, spec);
    CHECK(horizontal == std::vector<Cell>{{0, 0}, {0, 1}, {0, 2}, {0, 3}});

    CHECK_THROWS_AS(raster_line({0, 0}, {9, 0}, spec), std::invalid_argument);
}

TEST_CASE("raster_line matches the float line-walk oracle") {
    const GridSpec spec{20, 20, 0.15, {0, 0}};
    const auto diag = raster_line({0, 0}, {5, 7}, spec);
    CHECK(diag == oracle::raster_line({0, 0}, {5, 7}));

    Rng rng(99);
    for (int i = 0; i < 500; ++i) {
        const Cell a{static_cast<int>(rng.uniform_index(20)), static_cast<int>(rng.uniform_index(20))};
        const Cell b{static_cast<int>(rng.uniform_index(20)), static_cast<int>(rng.uniform_index(20))};
        REQUIRE(raster_line(a, b, spec) == oracle::raster_line(a, b));
    }
}

TEST_CASE("raster_line reversal and connectivity properties") {
    const GridSpec spec{16, 12, 0.15, {0, 0}};
    Rng rng(1234);
    for (int i = 0; i < 500; ++i) {
        const Cell a{static_cast<int>(rng.uniform_index(16)), static_cast<int>(rng.uniform_index(12))};
        const Cell b{static_cast<int>(rng.uniform_index(16)), static_cast<int>(rng.uniform_index(12))};
        const auto fwd = raster_line(a, b, spec);
        const auto rev = raster_line(b, a, spec);
        REQUIRE(cell_set(fwd) == cell_set(rev));
        REQUIRE(fwd.front() == a);
        REQUIRE(fwd.back() == b);
        for (size_t k = 1; k < fwd.size(); ++k) {
            REQUIRE(std::abs(fwd[k].x - fwd[k - 1].x) <= 1);
            REQUIRE(std::abs(fwd[k].y - fwd[k - 1].y) <= 1);
        }
    }
}
