// gridmap.hpp - robot-centric grid window geometry.
//
// Every costmap layer lives on the same window: a fixed-size grid that is
// re-anchored and axis-aligned to the robot heading at each planning step.
// Cell (x, y) has its center at robot-frame ((x - base_x) * res,
// (y - base_y) * res); the robot sits at the center of the base cell.
#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <optional>
#include <stdexcept>
#include <vector>

#include "topnav/geometry.hpp"

namespace topnav {

struct Cell {
    int x = 0;  // forward index
    int y = 0;  // lateral index (left positive)
    bool operator==(const Cell& o) const { return x == o.x && y == o.y; }
    bool operator!=(const Cell& o) const { return !(*this == o); }
};

struct GridSpec {
    int width_cells = 8;       // cells along the forward axis
    int height_cells = 10;     // cells along the lateral axis
    double resolution_m = 0.15;
    Cell base_cell{3, 5};      // robot anchor

    bool valid() const {
        return resolution_m > 0.0 && width_cells >= 2 && height_cells >= 2 &&
               base_cell.x >= 0 && base_cell.x < width_cells &&
               base_cell.y >= 0 && base_cell.y < height_cells;
    }
    bool in_bounds(const Cell& c) const {
        return c.x >= 0 && c.x < width_cells && c.y >= 0 && c.y < height_cells;
    }
    bool on_boundary(const Cell& c) const {
        return c.x == 0 || c.x == width_cells - 1 || c.y == 0 || c.y == height_cells - 1;
    }
    int row_major_index(const Cell& c) const { return c.x * height_cells + c.y; }
    int cell_count() const { return width_cells * height_cells; }

    bool operator==(const GridSpec& o) const {
        return width_cells == o.width_cells && height_cells == o.height_cells &&
               resolution_m == o.resolution_m && base_cell == o.base_cell;
    }

    // Simulation profile: (1.2 m forward-extent axis, 1.5 m lateral) window,
    // base anchored 0.45 m / 0.75 m from the low corner, 0.15 m resolution.
    static GridSpec sim_profile() { return GridSpec{8, 10, 0.15, {3, 5}}; }
    // Real-world profile: 3 m x 3 m window with the robot on the rear edge.
    static GridSpec real_profile() { return GridSpec{20, 20, 0.15, {0, 10}}; }
};

// One scalar layer (M_G, M_O, M_P, M_T or the combined M_C), row-major.
struct CostGrid {
    GridSpec spec;
    std::vector<double> values;

    CostGrid() : values(static_cast<size_t>(spec.cell_count()), 0.0) {}
    explicit CostGrid(const GridSpec& s, double fill = 0.0)
        : spec(s), values(static_cast<size_t>(s.cell_count()), fill) {
        if (!s.valid()) throw std::invalid_argument("CostGrid: invalid GridSpec");
    }

    double& at(const Cell& c) { return values[static_cast<size_t>(spec.row_major_index(c))]; }
    double at(const Cell& c) const { return values[static_cast<size_t>(spec.row_major_index(c))]; }
    double& at(int x, int y) { return at(Cell{x, y}); }
    double at(int x, int y) const { return at(Cell{x, y}); }
};

// World point -> cell index, or nullopt when the point falls outside the window.
inline std::optional<Cell> world_to_cell(const Vec2& p_world, const Pose& robot,
                                         const GridSpec& spec) {
    const Vec2 r = world_to_robot(p_world, robot);
    const Cell c{spec.base_cell.x + static_cast<int>(std::lround(r.x / spec.resolution_m)),
                 spec.base_cell.y + static_cast<int>(std::lround(r.y / spec.resolution_m))};
    if (!spec.in_bounds(c)) return std::nullopt;
    return c;
}

// Cell index -> world coordinates of the cell center.
inline Vec2 cell_to_world(const Cell& cell, const Pose& robot, const GridSpec& spec) {
    if (!spec.in_bounds(cell))
        throw std::invalid_argument("cell_to_world: cell out of bounds");
    const Vec2 r{(cell.x - spec.base_cell.x) * spec.resolution_m,
                 (cell.y - spec.base_cell.y) * spec.resolution_m};
    return robot_to_world(r, robot);
}

namespace detail {
// round(num / den) with ties away from zero; den > 0.
inline long long round_div_half_away(long long num, long long den) {
    long long q = num / den;
    const long long r = num % den;
    if (2 * std::llabs(r) >= den) q += (num >= 0 ? 1 : -1);
    return q;
}
}  // namespace detail

// 8-connected integer line walk between two in-bounds cells, endpoints
// included. Endpoints are canonicalized so that raster_line(a, b) and
// raster_line(b, a) visit the same cell set.
inline std::vector<Cell> raster_line(const Cell& c0, const Cell& c1, const GridSpec& spec) {
    if (!spec.in_bounds(c0) || !spec.in_bounds(c1))
        throw std::invalid_argument("raster_line: endpoint out of bounds");

    Cell a = c0, b = c1;
    const bool swapped = (b.x < a.x) || (b.x == a.x && b.y < a.y);
    if (swapped) std::swap(a, b);

    const long long dx = b.x - a.x, dy = b.y - a.y;
    const long long adx = std::llabs(dx), ady = std::llabs(dy);
    const long long n = std::max(adx, ady);

    std::vector<Cell> cells;
    cells.reserve(static_cast<size_t>(n) + 1);
    if (n == 0) {
        cells.push_back(a);
    } else if (adx >= ady) {
        const int sx = dx >= 0 ? 1 : -1;
        for (long long k = 0; k <= n; ++k) {
            const long long y = a.y + detail::round_div_half_away(k * dy, adx);
            cells.push_back(Cell{static_cast<int>(a.x + sx * k), static_cast<int>(y)});
        }
    } else {
        const int sy = dy >= 0 ? 1 : -1;
        for (long long k = 0; k <= n; ++k) {
            const long long x = a.x + detail::round_div_half_away(k * dx, ady);
            cells.push_back(Cell{static_cast<int>(x), static_cast<int>(a.y + sy * k)});
        }
    }
    if (swapped) std::reverse(cells.begin(), cells.end());
    return cells;
}

}  // namespace topnav
