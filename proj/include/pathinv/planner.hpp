#pragma once

#include <cstdint>

#include "pathinv/curve.hpp"
#include "pathinv/motion_plan.hpp"

namespace pathinv {

struct BoxObstacle {
    Vec2 center = Vec2::Zero();
    Vec2 half_size = Vec2::Zero();
};

struct CircleObstacle {
    Vec2 center = Vec2::Zero();
    double radius = 0.0;
};

/// Static obstacles plus the disc radius the robot is inflated to.
struct ObstacleSet {
    std::vector<BoxObstacle> boxes;
    std::vector<CircleObstacle> circles;
    double inflation = 0.25;

    /// True when a robot disc centered at p intersects any obstacle.
    bool collides(const Vec2& p) const;
    /// Distance from p to the nearest obstacle boundary (not inflated).
    double clearance(const Vec2& p) const;
};

/// Terminal set of the planning problem: a positional band around the path
/// together with the two switch-readiness conditions of the local
/// controller (forward heading alignment and nonvanishing speed). The
/// alignment margin keeps plans from ending nearly perpendicular to the
/// path, where the handover would start right at the edge of the local
/// controller's heading condition.
struct GoalSet {
    double band = 0.08;          // positional distance bound
    double min_speed = 0.02;     // |terminal commanded speed| must exceed this
    double min_alignment = 0.5;  // cos of the largest admissible heading error

    bool position_ok(const CarState& x, const Curve& curve) const;
    bool heading_ok(const CarState& x, const Curve& curve, double delta_y) const;
    bool contains(const CarState& x, double end_speed, const Curve& curve,
                  double delta_y) const;
};

struct PlannerConfig {
    double primitive_duration = 0.2;  // seconds each motion primitive runs
    double substep = 0.02;            // integrator step inside primitives
    int max_iterations = 20000;
    double goal_bias = 0.1;
    double heading_weight = 0.3;  // metric weight [m/rad] on heading
    double omega_max = 1.0;       // steering-rate primitive magnitude
    bool allow_reverse = true;
    double delta_y = 0.2;  // tube radius used by goal checks
    // Optional cap on |x4| along plans, below the car's hard bound. Edges
    // that would exceed it are rejected outright (never clamped), so the
    // dynamics recheck stays exact. Zero means the car's bound applies.
    double steer_limit = 0.0;
    // The switching supervisor hands over on any close pass of the path, so
    // plan states nearer than guard_radius are admissible only when their
    // heading aligns with the path direction (cos above guard_alignment).
    // Zero disables the guard.
    double guard_radius = 0.0;
    double guard_alignment = 0.5;
    // sampling window; grown from the scene when left at zero size
    Vec2 sample_min = Vec2::Zero();
    Vec2 sample_max = Vec2::Zero();
};

/// Kinodynamic RRT over constant (v, omega) primitives. Deterministic for a
/// fixed (scenario, seed). Throws StartInCollision and BudgetExhausted.
MotionPlan plan(const CarState& start, const GoalSet& goal,
                const ObstacleSet& obstacles, const Curve& curve,
                const CarParams& params, const PlannerConfig& cfg,
                std::uint64_t seed);

struct PlanCheckReport {
    bool start_ok = false;      // plan begins at the requested state
    bool goal_ok = false;       // final state lies in the goal set
    bool dynamics_ok = false;   // segments re-integrate to the stored states
    bool collision_ok = false;  // no sampled point touches an obstacle
    double start_error = 0.0;
    double goal_distance = 0.0;
    double dynamics_error = 0.0;   // worst segment mismatch
    double min_clearance = 0.0;    // worst inflated clearance along the plan
    bool ok() const { return start_ok && goal_ok && dynamics_ok && collision_ok; }
};

/// Independently re-checks the four plan requirements (initial state, goal
/// membership, dynamic consistency, collision freedom at <= 1 cm spacing).
PlanCheckReport validate_plan(const MotionPlan& plan, const CarState& start,
                              const GoalSet& goal, const ObstacleSet& obstacles,
                              const Curve& curve, const CarParams& params,
                              const PlannerConfig& cfg);

}  // namespace pathinv
