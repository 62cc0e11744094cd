// proprio.hpp - proprioception advisor.
//
// Normalizes motion evaluations coming from the locomotion value function,
// turns them into the M_P cost layer, records 1 s traversability summaries
// for the experience buffer and drives the back-off / slow-replan recovery
// state machine.
#pragma once

#include <cmath>
#include <deque>
#include <optional>
#include <stdexcept>

#include "topnav/geometry.hpp"
#include "topnav/gridmap.hpp"
#include "topnav/planner.hpp"

namespace topnav {

// Sigmoid normalization constants for the raw value-function estimate:
// Norm(c) = 1 / (1 + e^{2 (2.2 - c)}).
inline constexpr double kNormSlope = 2.0;
inline constexpr double kNormMidpoint = 2.2;

struct MotionEvaluation {
    double c_raw = 0.0;       // value-function scale
    double c_norm = 0.0;      // sigmoid-normalized evaluation in [0, 1]
    double timestamp_s = 0.0;
};

struct ProprioConfig {
    double k_P = 0.3;           // per-cell lateral decay of M_P
    double c_th = 0.8;          // normalized values above this count as 1
    double window_s = 1.0;      // averaging window for T_P and M_P input
    double recovery_threshold = 0.5;
    double backoff_speed = 0.5;       // [m/s]
    double backoff_duration_s = 0.5;
    double slow_replan_hz = 0.5;
    double heading_release_rad = 0.3;
    double trigger_persistence_s = 0.25;  // evaluations must stay low this long
                                          // before trouble registers (the
                                          // learned critic smooths history)
    double stall_speed_ratio = 0.1;       // actual/commanded speed below this
                                          // counts as obstructed; terrain alone
                                          // never collapses speed this far, so
                                          // in effect this keys on contact
};

// Norm(c_raw) with the planner-side threshold rule: results above c_th are
// treated as fully nominal and snapped to 1.
inline double normalize_evaluation(double c_raw, const ProprioConfig& cfg) {
    const double s = 1.0 / (1.0 + std::exp(kNormSlope * (kNormMidpoint - c_raw)));
    return s > cfg.c_th ? 1.0 : s;
}

// Inverse of the sigmoid (without the threshold rule), used by the synthetic
// motion model to emit a raw-scale value for logging.
inline double normalize_inverse(double c_norm) {
    const double v = std::min(std::max(c_norm, 1e-9), 1.0 - 1e-9);
    return kNormMidpoint - std::log(1.0 / v - 1.0) / kNormSlope;
}

// M_P: peak (1 - c_norm) on the band through the base cell along the trouble
// direction, decaying by e^{-k_P} per lateral cell of offset. Only the half
// plane ahead of the base (along the band) is filled. band_bearing_rel is
// the trouble direction relative to the current heading; it defaults to
// straight ahead and is kept anchored to where the low evaluation actually
// happened, so a robot that has already turned away is not re-blocked.
inline CostGrid proprio_cost_map(double c_norm, const GridSpec& spec, const ProprioConfig& cfg,
                                 double band_bearing_rel = 0.0) {
    if (c_norm < 0.0 || c_norm > 1.0)
        throw std::invalid_argument("proprio_cost_map: c_norm outside [0,1]");
    CostGrid g(spec);
    const double ux = std::cos(band_bearing_rel), uy = std::sin(band_bearing_rel);
    for (int x = 0; x < spec.width_cells; ++x) {
        for (int y = 0; y < spec.height_cells; ++y) {
            const double px = x - spec.base_cell.x, py = y - spec.base_cell.y;
            if (px * ux + py * uy < -1e-9) continue;
            const double lateral = std::abs(-px * uy + py * ux);
            g.at(x, y) = (1.0 - c_norm) * std::exp(-cfg.k_P * lateral);
        }
    }
    return g;
}

// Advisor signal feeding M_P: the severity of the registered trouble and the
// heading at which it was felt. c_norm is 1 when nothing alarming is being
// held.
struct AdvisorSignal {
    double c_norm = 1.0;
    double bearing_world = 0.0;
};


// Recovery trigger input: the best normalized sample over the persistence
// window, so a single grazing dip does not fire a full back-off cycle.
inline double recovery_trigger_input(const std::deque<MotionEvaluation>& history, double now_s,
                                     const ProprioConfig& cfg) {
    double best = 0.0;
    bool any = false;
    for (auto it = history.rbegin(); it != history.rend(); ++it) {
        if (any && now_s - it->timestamp_s > cfg.trigger_persistence_s) break;
        best = std::max(best, normalize_evaluation(it->c_raw, cfg));
        any = true;
    }
    return any ? best : 1.0;
}

// T_P = 1 - Norm(mean c_raw over the last window_s). Empty window -> nullopt
// (the caller skips the recording).
inline std::optional<double> record_traversability(const std::deque<MotionEvaluation>& history,
                                                   double now_s, const ProprioConfig& cfg) {
    double sum = 0.0;
    int n = 0;
    for (auto it = history.rbegin(); it != history.rend(); ++it) {
        if (now_s - it->timestamp_s > cfg.window_s) break;
        sum += it->c_raw;
        ++n;
    }
    if (n == 0) return std::nullopt;
    return 1.0 - normalize_evaluation(sum / n, cfg);
}

struct RecoveryState {
    enum class Phase { Normal, Backoff, SlowReplan };
    Phase phase = Phase::Normal;
    double phase_entry_time_s = 0.0;
    double entry_heading = 0.0;  // heading when recovery was triggered
};

struct RecoveryDecision {
    RecoveryState state;
    std::optional<VelocityCommand> override_cmd;  // backward command during Backoff
    std::optional<double> plan_period_override_s; // slow replanning period
};

// Recovery strategy: a low evaluation triggers a fixed-duration backward
// command, followed by slow replanning until the waypoint is reached or the
// heading has changed by heading_release_rad. Transitions never skip a phase.
inline RecoveryDecision recovery_step(const RecoveryState& state, double c_norm, double now_s,
                                      double robot_heading, bool waypoint_reached,
                                      const ProprioConfig& cfg) {
    RecoveryDecision d{state, std::nullopt, std::nullopt};
    switch (state.phase) {
        case RecoveryState::Phase::Normal:
            if (c_norm < cfg.recovery_threshold) {
                d.state = {RecoveryState::Phase::Backoff, now_s, robot_heading};
                d.override_cmd = VelocityCommand{-cfg.backoff_speed, 0.0};
            }
            break;
        case RecoveryState::Phase::Backoff:
            if (now_s - state.phase_entry_time_s >= cfg.backoff_duration_s) {
                d.state = {RecoveryState::Phase::SlowReplan, now_s, state.entry_heading};
                d.plan_period_override_s = 1.0 / cfg.slow_replan_hz;
            } else {
                d.override_cmd = VelocityCommand{-cfg.backoff_speed, 0.0};
            }
            break;
        case RecoveryState::Phase::SlowReplan:
            if (waypoint_reached ||
                std::abs(wrap_angle(robot_heading - state.entry_heading)) >=
                    cfg.heading_release_rad) {
                d.state = {RecoveryState::Phase::Normal, now_s, robot_heading};
            } else {
                d.plan_period_override_s = 1.0 / cfg.slow_replan_hz;
            }
            break;
    }
    return d;
}

// Per-episode advisor state: evaluation history for T_P, plus the recently
// registered trouble events. Trouble registers when evaluations have stayed
// below the recovery threshold for the persistence window while the robot is
// actually obstructed (actual speed collapsed against the command): contact
// or quagmire ground. Slow-but-moving terrain is left to the terrain layer.
// Several bearings can be alarmed at once; repeated contact while probing
// around an unseen obstacle accumulates into a wide blocked sector instead
// of a band that rotates with the robot.
class ProprioAdvisor {
public:
    struct Trouble {
        double time_s = 0.0;
        double c_norm = 1.0;
        double bearing_world = 0.0;
    };

    void observe(const MotionEvaluation& ev, double yaw, bool obstructed,
                 const ProprioConfig& cfg) {
        history_.push_back(ev);
        while (!history_.empty() &&
               ev.timestamp_s - history_.front().timestamp_s > cfg.window_s + 1.0)
            history_.pop_front();
        trigger_now_ = 1.0;
        if (obstructed) {
            trigger_now_ = recovery_trigger_input(history_, ev.timestamp_s, cfg);
            if (trigger_now_ < cfg.recovery_threshold) {
                const Trouble fresh{ev.timestamp_s, trigger_now_, yaw};
                for (Trouble& t : troubles_) {
                    if (std::abs(wrap_angle(t.bearing_world - yaw)) < kSameBearingRad) {
                        t = fresh;  // refresh the event for this direction
                        return;
                    }
                }
                troubles_.push_back(fresh);
                if (troubles_.size() > kMaxTroubles) troubles_.pop_front();
            }
        }
    }

    // Input for the recovery state machine at the current step.
    double recovery_input() const { return trigger_now_; }

    // Inputs for M_P: all unexpired trouble events, each fading over the
    // advisor window. The layer takes the elementwise maximum of the bands.
    std::vector<AdvisorSignal> cost_signals(double now_s, const ProprioConfig& cfg) const {
        std::vector<AdvisorSignal> out;
        for (const Trouble& t : troubles_) {
            const double age = now_s - t.time_s;
            if (age < 0.0 || age > cfg.window_s) continue;
            const double strength = (1.0 - t.c_norm) * (1.0 - age / cfg.window_s);
            out.push_back(AdvisorSignal{1.0 - strength, t.bearing_world});
        }
        return out;
    }

    std::optional<double> record_traversability(double now_s, const ProprioConfig& cfg) const {
        return topnav::record_traversability(history_, now_s, cfg);
    }

    const std::deque<MotionEvaluation>& history() const { return history_; }

private:
    static constexpr double kSameBearingRad = 0.2;
    static constexpr size_t kMaxTroubles = 5;

    std::deque<MotionEvaluation> history_;
    std::deque<Trouble> troubles_;
    double trigger_now_ = 1.0;
};

}  // namespace topnav
