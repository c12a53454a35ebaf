#pragma once

#include <functional>
#include <vector>

#include "pathinv/errors.hpp"

namespace pathinv {

struct CarParams {
    double length = 0.25;         // wheelbase [m]
    double max_steering = 0.785;  // steering angle bound [rad], in (0, pi/2)
    double nominal_speed = 0.5;   // constant speed offset reference [m/s], nonzero

    void validate() const;
};

// Kinematic car: planar position, heading, steering angle.
struct CarState {
    double x1 = 0.0, x2 = 0.0;  // position [m]
    double x3 = 0.0;            // heading [rad]
    double x4 = 0.0;            // steering angle [rad]
};

// Car state extended with the speed offset and its rate, so the speed input
// enters through a double integrator.
struct ExtendedState {
    double x1 = 0.0, x2 = 0.0, x3 = 0.0, x4 = 0.0;
    double x5 = 0.0;  // speed offset: forward speed = nominal_speed + x5
    double x6 = 0.0;  // speed offset rate

    CarState car() const { return {x1, x2, x3, x4}; }
    static ExtendedState from_car(const CarState& c, double x5 = 0.0, double x6 = 0.0) {
        return {c.x1, c.x2, c.x3, c.x4, x5, x6};
    }
};

struct CarInput {
    double v = 0.0;      // translational speed [m/s]
    double omega = 0.0;  // steering rate [rad/s]
};

struct AuxInput {
    double u1 = 0.0;  // speed-offset jerk [m/s^3]
    double u2 = 0.0;  // steering rate [rad/s]
};

/// Time derivative of the car state. Throws SteeringLimit when the steering
/// angle exceeds its bound.
CarState car_dynamics(const CarState& x, const CarInput& u, const CarParams& p);

/// Time derivative of the extended state.
ExtendedState extended_dynamics(const ExtendedState& x, const AuxInput& u,
                                const CarParams& p);

/// One classical RK4 step with the input held constant; steering is clamped
/// to the bound afterwards and `clamped` reports whether that fired.
CarState rk4_step(const CarState& x, const CarInput& u, const CarParams& p,
                  double dt, bool* clamped = nullptr);
ExtendedState rk4_step(const ExtendedState& x, const AuxInput& u, const CarParams& p,
                       double dt, bool* clamped = nullptr);

template <typename State>
struct Trajectory {
    std::vector<State> states;      // steps + 1 samples
    std::vector<int> clamp_steps;   // indices of steps where steering was clamped
};

/// Fixed-step RK4 with zero-order-hold inputs sampled at each step start.
Trajectory<CarState> integrate(const CarState& x0,
                               const std::function<CarInput(double, const CarState&)>& input,
                               const CarParams& p, double dt, int steps);
Trajectory<ExtendedState> integrate(const ExtendedState& x0,
                                    const std::function<AuxInput(double, const ExtendedState&)>& input,
                                    const CarParams& p, double dt, int steps);

}  // namespace pathinv
