#pragma once

#include "pathinv/curve.hpp"
#include "pathinv/motion_plan.hpp"

namespace pathinv {

struct PurePursuitConfig {
    double lookahead = 0.5;     // base look-ahead distance [m]
    double speed_gain = 0.0;    // look-ahead grows with speed [s]
    double nominal_speed = 0.5; // commanded tracking speed [m/s]
    double steer_gain = 10.0;   // steering servo rate [1/s]

    void validate() const;
};

/// First plan position at or beyond the plan index nearest the robot whose
/// distance is at least the effective look-ahead; falls back to the final
/// plan point.
Vec2 lookahead_point(const MotionPlan& plan, const CarState& x,
                     const PurePursuitConfig& cfg);

/// Pure pursuit: constant commanded speed plus a proportional steering servo
/// toward the geometric steering angle of the look-ahead point.
CarInput kappa1(const CarState& x, const MotionPlan& plan,
                const PurePursuitConfig& cfg, const CarParams& params);

}  // namespace pathinv
