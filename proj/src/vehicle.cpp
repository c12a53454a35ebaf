#include "pathinv/vehicle.hpp"

#include <cmath>
#include <string>

#include "pathinv/util.hpp"

namespace pathinv {

namespace {

constexpr double kSteerSlack = 1e-6;

bool finite(const CarState& x) {
    return std::isfinite(x.x1) && std::isfinite(x.x2) && std::isfinite(x.x3) &&
           std::isfinite(x.x4);
}

bool finite(const ExtendedState& x) {
    return std::isfinite(x.x1) && std::isfinite(x.x2) && std::isfinite(x.x3) &&
           std::isfinite(x.x4) && std::isfinite(x.x5) && std::isfinite(x.x6);
}

void check_steering(double x4, const CarParams& p) {
    if (std::abs(x4) > p.max_steering + kSteerSlack)
        throw SteeringLimit("steering angle " + std::to_string(x4) +
                            " exceeds bound " + std::to_string(p.max_steering));
}

CarState axpy(const CarState& a, double s, const CarState& b) {
    return {a.x1 + s * b.x1, a.x2 + s * b.x2, a.x3 + s * b.x3, a.x4 + s * b.x4};
}

ExtendedState axpy(const ExtendedState& a, double s, const ExtendedState& b) {
    return {a.x1 + s * b.x1, a.x2 + s * b.x2, a.x3 + s * b.x3,
            a.x4 + s * b.x4, a.x5 + s * b.x5, a.x6 + s * b.x6};
}

// Intermediate RK4 stages may nudge x4 a hair past the bound even though
// endpoints are clamped; evaluate the dynamics with the stage state clamped.
CarState stage_dyn(const CarState& x, const CarInput& u, const CarParams& p) {
    CarState xs = x;
    if (std::abs(xs.x4) > p.max_steering) xs.x4 = std::copysign(p.max_steering, xs.x4);
    return car_dynamics(xs, u, p);
}

ExtendedState stage_dyn(const ExtendedState& x, const AuxInput& u, const CarParams& p) {
    ExtendedState xs = x;
    if (std::abs(xs.x4) > p.max_steering) xs.x4 = std::copysign(p.max_steering, xs.x4);
    return extended_dynamics(xs, u, p);
}

template <typename State, typename Input>
State rk4_generic(const State& x, const Input& u, const CarParams& p, double dt,
                  bool* clamped) {
    const State k1 = stage_dyn(x, u, p);
    const State k2 = stage_dyn(axpy(x, 0.5 * dt, k1), u, p);
    const State k3 = stage_dyn(axpy(x, 0.5 * dt, k2), u, p);
    const State k4 = stage_dyn(axpy(x, dt, k3), u, p);
    State next = axpy(x, dt / 6.0, k1);
    next = axpy(next, dt / 3.0, k2);
    next = axpy(next, dt / 3.0, k3);
    next = axpy(next, dt / 6.0, k4);
    if (clamped) *clamped = false;
    if (std::abs(next.x4) > p.max_steering) {
        next.x4 = std::copysign(p.max_steering, next.x4);
        if (clamped) *clamped = true;
    }
    if (!finite(next)) throw NonFiniteState("state became non-finite during integration");
    return next;
}

}  // namespace

void CarParams::validate() const {
    if (!(length > 0.0)) throw ScenarioError("car length must be positive");
    if (!(max_steering > 0.0 && max_steering < kPi / 2))
        throw ScenarioError("max steering must lie in (0, pi/2)");
    if (nominal_speed == 0.0) throw ScenarioError("nominal speed must be nonzero");
}

CarState car_dynamics(const CarState& x, const CarInput& u, const CarParams& p) {
    check_steering(x.x4, p);
    CarState d;
    d.x1 = u.v * std::cos(x.x3);
    d.x2 = u.v * std::sin(x.x3);
    d.x3 = u.v / p.length * std::tan(x.x4);
    d.x4 = u.omega;
    return d;
}

ExtendedState extended_dynamics(const ExtendedState& x, const AuxInput& u,
                                const CarParams& p) {
    check_steering(x.x4, p);
    const double speed = p.nominal_speed + x.x5;
    ExtendedState d;
    d.x1 = speed * std::cos(x.x3);
    d.x2 = speed * std::sin(x.x3);
    d.x3 = speed / p.length * std::tan(x.x4);
    d.x4 = u.u2;
    d.x5 = x.x6;
    d.x6 = u.u1;
    return d;
}

CarState rk4_step(const CarState& x, const CarInput& u, const CarParams& p,
                  double dt, bool* clamped) {
    return rk4_generic(x, u, p, dt, clamped);
}

ExtendedState rk4_step(const ExtendedState& x, const AuxInput& u, const CarParams& p,
                       double dt, bool* clamped) {
    return rk4_generic(x, u, p, dt, clamped);
}

namespace {

template <typename State, typename Input>
Trajectory<State> integrate_generic(
    const State& x0, const std::function<Input(double, const State&)>& input,
    const CarParams& p, double dt, int steps) {
    if (!(dt > 0.0)) throw Error("integration step must be positive");
    Trajectory<State> traj;
    traj.states.reserve(steps + 1);
    traj.states.push_back(x0);
    State x = x0;
    for (int k = 0; k < steps; ++k) {
        const Input u = input(k * dt, x);
        bool clamped = false;
        x = rk4_step(x, u, p, dt, &clamped);
        if (clamped) traj.clamp_steps.push_back(k);
        traj.states.push_back(x);
    }
    return traj;
}

}  // namespace

Trajectory<CarState> integrate(const CarState& x0,
                               const std::function<CarInput(double, const CarState&)>& input,
                               const CarParams& p, double dt, int steps) {
    return integrate_generic(x0, input, p, dt, steps);
}

Trajectory<ExtendedState> integrate(
    const ExtendedState& x0,
    const std::function<AuxInput(double, const ExtendedState&)>& input,
    const CarParams& p, double dt, int steps) {
    return integrate_generic(x0, input, p, dt, steps);
}

}  // namespace pathinv
