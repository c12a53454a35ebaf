#pragma once

#include <cstdint>
#include <optional>
#include <random>

#include "pathinv/global_ctrl.hpp"
#include "pathinv/local_ctrl.hpp"
#include "pathinv/planner.hpp"

namespace pathinv {

/// Radii of the hysteresis switching sets, all scaled from one base radius:
/// the local controller flows while the distance stays below c0*n_c, hands
/// over to the tracker beyond it, and takes over again once the distance
/// drops to c10*n_c; c1*n_c is the planner's terminal band.
struct SupervisorSets {
    double delta_y = 0.2;
    double n_c = 0.2;
    double c1 = 0.4;
    double c10 = 0.6;
    double c0 = 0.9;

    double goal_band() const { return c1 * n_c; }
    double switch_in() const { return c10 * n_c; }
    double switch_out() const { return c0 * n_c; }
    void validate() const;
};

struct HybridState {
    ExtendedState x;
    int q = 1;      // 0: local path-invariant controller, 1: plan tracker
    double t = 0.0; // flow time
    int j = 0;      // jump count
};

/// Toggles the active controller.
inline int jump_map(int q) { return 1 - q; }

/// Positional distance of the state's output to the path.
double distance_to_gamma(const ExtendedState& x, const Curve& curve);

struct JumpRecord {
    double t = 0.0;
    int j_before = 0;
    int from_q = 0, to_q = 0;
    double dist = 0.0;
};

struct TraceSample {
    double t = 0.0;
    int j = 0;
    int q = 1;
    ExtendedState x;
    AuxInput u;
    double dist = 0.0;
    bool tfl_valid = false;  // eta/xi/eta2_ref populated (local controller active)
    Vec3 eta = Vec3::Zero();
    Vec3 xi = Vec3::Zero();
    double eta2_ref = 0.0;
    bool cbf_active = false;
    bool clf_relaxed = false;
};

struct HybridTrace {
    std::vector<TraceSample> samples;
    std::vector<JumpRecord> jumps;
    int steering_clamps = 0;
    int qp_relaxed = 0;
    int qp_infeasible = 0;  // must stay zero; the speed filter is always solvable
    bool completed = false;
};

struct RunSummary {
    int jump_count = 0;
    std::optional<double> t_star;  // first time |xi| < 1e-4 and stays < 2e-4
    double min_eta2 = 0.0;
    double max_barrier_violation = 0.0;  // max(0, floor - min_eta2)
    double max_xi_after_t_star = 0.0;
    double min_speed = 0.0;
    int qp_infeasible = 0;
    int qp_relaxed = 0;
    int steering_clamps = 0;
    int final_q = 1;
    bool completed = false;
    std::size_t samples = 0;
};

RunSummary summarize(const HybridTrace& trace, double nominal_speed,
                     double barrier_floor = 0.0);

/// Closed-loop hybrid simulator: flows the extended car under the controller
/// selected by q, applies jumps with priority when the state enters the
/// active jump set, and localizes set crossings by bisection. One instance
/// owns one run; independent instances may run concurrently.
class Simulator {
public:
    struct Config {
        double dt = 1e-3;
        double horizon = 20.0;
        int control_decimation = 1;
        double noise_amplitude = 0.0;  // uniform noise on membership distance tests
        // crossing localization; far inside the 1e-6 s contract so the
        // boundary overshoot in distance stays below 1e-9 at any speed
        double bisection_tol = 1e-12;
        double speed_servo_freq = 10.0;
        bool record_trace = true;
    };

    Simulator(Curve curve, CarParams params, FiniteTimeGains gains,
              BarrierConfig barrier, SpeedReference ref, PurePursuitConfig pp,
              SupervisorSets sets, ObstacleSet obstacles, PlannerConfig pcfg,
              Config cfg, std::uint64_t seed);

    /// Runs the outer loop from x0 to the horizon: pick q by membership,
    /// plan when the tracker starts or resumes, and step the hybrid system.
    HybridTrace run(const ExtendedState& x0);

    // step-level access, used by the tests
    HybridState init_state(const ExtendedState& x0);
    bool in_jump_set(const HybridState& h) const;
    void step(HybridState& h, HybridTrace& trace);
    AuxInput output(int q, const ExtendedState& x, double t);
    const MotionPlan& current_plan() const { return plan_; }
    double measured_distance(const ExtendedState& x) const;

private:
    void make_plan(const CarState& start);
    AuxInput tracker_input(const ExtendedState& x) const;
    void resample_noise();

    Curve curve_;
    CarParams params_;
    FiniteTimeGains gains_;
    BarrierConfig barrier_;
    SpeedReference ref_;
    PurePursuitConfig pp_;
    SupervisorSets sets_;
    ObstacleSet obstacles_;
    PlannerConfig pcfg_;
    Config cfg_;
    std::uint64_t seed_ = 0;

    MotionPlan plan_;
    std::optional<double> lambda_hint_;
    std::mt19937_64 noise_rng_;
    Vec2 noise_ = Vec2::Zero();
    int plan_counter_ = 0;
    int steps_since_control_ = 0;
    AuxInput held_input_;
    // diagnostics of the most recent local-controller evaluation
    bool last_tfl_valid_ = false;
    Vec3 last_eta_ = Vec3::Zero(), last_xi_ = Vec3::Zero();
    double last_eta2_ref_ = 0.0;
    bool last_cbf_active_ = false;
    bool last_clf_relaxed_ = false;
};

}  // namespace pathinv
