// geometry.hpp - small 2D vector/pose helpers shared by all modules.
#pragma once

#include <cmath>

namespace topnav {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
    double dot(const Vec2& o) const { return x * o.x + y * o.y; }
    double norm() const { return std::hypot(x, y); }
    double norm_sq() const { return x * x + y * y; }
};

// Robot base pose: position in world meters, yaw in radians (x-axis = yaw 0).
struct Pose {
    Vec2 position;
    double yaw = 0.0;
};

// Wrap an angle into (-pi, pi].
inline double wrap_angle(double a) {
    const double two_pi = 2.0 * M_PI;
    a = std::fmod(a, two_pi);
    if (a <= -M_PI) a += two_pi;
    if (a > M_PI) a -= two_pi;
    return a;
}

// World point -> robot-frame coordinates (x forward, y left).
inline Vec2 world_to_robot(const Vec2& p, const Pose& robot) {
    const double c = std::cos(robot.yaw);
    const double s = std::sin(robot.yaw);
    const Vec2 d = p - robot.position;
    return {c * d.x + s * d.y, -s * d.x + c * d.y};
}

// Robot-frame coordinates -> world point.
inline Vec2 robot_to_world(const Vec2& r, const Pose& robot) {
    const double c = std::cos(robot.yaw);
    const double s = std::sin(robot.yaw);
    return {robot.position.x + c * r.x - s * r.y,
            robot.position.y + s * r.x + c * r.y};
}

inline double clamp01(double v) { return v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v); }

}  // namespace topnav
