#include "pathinv/global_ctrl.hpp"

#include <cmath>

#include "pathinv/util.hpp"

namespace pathinv {

void PurePursuitConfig::validate() const {
    if (!(lookahead > 0.0)) throw ScenarioError("look-ahead distance must be positive");
    if (!(speed_gain >= 0.0)) throw ScenarioError("look-ahead speed gain must be >= 0");
    if (!(nominal_speed > 0.0)) throw ScenarioError("tracking speed must be positive");
    if (!(steer_gain > 0.0)) throw ScenarioError("steering servo gain must be positive");
}

Vec2 lookahead_point(const MotionPlan& plan, const CarState& x,
                     const PurePursuitConfig& cfg) {
    if (plan.empty()) throw EmptyPlan("look-ahead query on an empty plan");
    const Vec2 pos(x.x1, x.x2);

    std::size_t nearest = 0;
    double best = (Vec2(plan.states[0].x1, plan.states[0].x2) - pos).squaredNorm();
    for (std::size_t i = 1; i < plan.size(); ++i) {
        const double d = (Vec2(plan.states[i].x1, plan.states[i].x2) - pos).squaredNorm();
        if (d < best) { best = d; nearest = i; }
    }

    const double reach = cfg.lookahead + cfg.speed_gain * std::abs(cfg.nominal_speed);
    for (std::size_t i = nearest; i < plan.size(); ++i) {
        const Vec2 p(plan.states[i].x1, plan.states[i].x2);
        if ((p - pos).norm() >= reach) return p;
    }
    const CarState& last = plan.states.back();
    return Vec2(last.x1, last.x2);
}

CarInput kappa1(const CarState& x, const MotionPlan& plan,
                const PurePursuitConfig& cfg, const CarParams& params) {
    const Vec2 target = lookahead_point(plan, x, cfg);
    const double bearing = std::atan2(target.y() - x.x2, target.x() - x.x1);
    const double alpha = wrap_angle(x.x3 - bearing);
    const double reach = cfg.lookahead + cfg.speed_gain * std::abs(cfg.nominal_speed);
    double steer_cmd = -std::atan(2.0 * params.length * std::sin(alpha) / reach);
    steer_cmd = std::clamp(steer_cmd, -params.max_steering, params.max_steering);

    CarInput u;
    u.v = cfg.nominal_speed;
    u.omega = cfg.steer_gain * wrap_angle(steer_cmd - x.x4);
    return u;
}

}  // namespace pathinv
