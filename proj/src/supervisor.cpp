#include "pathinv/supervisor.hpp"

#include <cmath>

#include "pathinv/util.hpp"

namespace pathinv {

void SupervisorSets::validate() const {
    if (!(delta_y > 0.0 && n_c > 0.0))
        throw ScenarioError("tube and switching radii must be positive");
    if (!(0.0 < c1 && c1 < c10 && c10 < c0 && c0 < 1.0))
        throw ScenarioError("switching constants must satisfy 0 < c1 < c10 < c0 < 1");
    if (!(c0 * n_c < delta_y))
        throw ScenarioError("outer switching radius must stay inside the tube");
}

double distance_to_gamma(const ExtendedState& x, const Curve& curve) {
    return curve.distance(Vec2(x.x1, x.x2));
}

RunSummary summarize(const HybridTrace& trace, double nominal_speed,
                     double barrier_floor) {
    RunSummary s;
    s.jump_count = static_cast<int>(trace.jumps.size());
    s.qp_infeasible = trace.qp_infeasible;
    s.qp_relaxed = trace.qp_relaxed;
    s.steering_clamps = trace.steering_clamps;
    s.completed = trace.completed;
    s.samples = trace.samples.size();
    if (trace.samples.empty()) return s;
    s.final_q = trace.samples.back().q;

    s.min_eta2 = std::numeric_limits<double>::infinity();
    s.min_speed = std::numeric_limits<double>::infinity();
    bool any_eta = false;
    const std::size_t n = trace.samples.size();
    std::vector<double> xi_norm(n, std::numeric_limits<double>::infinity());
    for (std::size_t i = 0; i < n; ++i) {
        const TraceSample& ts = trace.samples[i];
        s.min_speed = std::min(s.min_speed, std::abs(nominal_speed + ts.x.x5));
        if (ts.tfl_valid) {
            any_eta = true;
            s.min_eta2 = std::min(s.min_eta2, ts.eta(1));
            xi_norm[i] = ts.xi.norm();
        }
    }
    if (!any_eta) s.min_eta2 = 0.0;
    if (any_eta) s.max_barrier_violation = std::max(0.0, barrier_floor - s.min_eta2);

    // suffix maxima of |xi| (invalid samples poison the suffix)
    std::vector<double> suffix(n);
    double run_max = 0.0;
    for (std::size_t i = n; i-- > 0;) {
        run_max = std::max(run_max, xi_norm[i]);
        suffix[i] = run_max;
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (xi_norm[i] < 1e-4 && suffix[i] < 2e-4) {
            s.t_star = trace.samples[i].t;
            s.max_xi_after_t_star = suffix[i];
            break;
        }
    }
    return s;
}

Simulator::Simulator(Curve curve, CarParams params, FiniteTimeGains gains,
                     BarrierConfig barrier, SpeedReference ref, PurePursuitConfig pp,
                     SupervisorSets sets, ObstacleSet obstacles, PlannerConfig pcfg,
                     Config cfg, std::uint64_t seed)
    : curve_(std::move(curve)),
      params_(params),
      gains_(gains),
      barrier_(barrier),
      ref_(ref),
      pp_(pp),
      sets_(sets),
      obstacles_(obstacles),
      pcfg_(pcfg),
      cfg_(cfg),
      seed_(seed),
      noise_rng_(derive_seed(seed, 17)) {
    pcfg_.delta_y = sets_.delta_y;
}

void Simulator::resample_noise() {
    if (cfg_.noise_amplitude > 0.0) {
        noise_.x() = uniform(noise_rng_, -cfg_.noise_amplitude, cfg_.noise_amplitude);
        noise_.y() = uniform(noise_rng_, -cfg_.noise_amplitude, cfg_.noise_amplitude);
    } else {
        noise_.setZero();
    }
}

double Simulator::measured_distance(const ExtendedState& x) const {
    return curve_.distance(Vec2(x.x1 + noise_.x(), x.x2 + noise_.y()));
}

bool Simulator::in_jump_set(const HybridState& h) const {
    const double d = measured_distance(h.x);
    return h.q == 0 ? d >= sets_.switch_out() : d <= sets_.switch_in();
}

void Simulator::make_plan(const CarState& start) {
    GoalSet goal;
    goal.band = sets_.goal_band();
    goal.min_speed = barrier_.delta;
    PlannerConfig pcfg = pcfg_;
    // reserve the switch-in region for aligned passage: the tracker hands
    // over on any entry, so plans may come near the path only path-forward
    pcfg.guard_radius = sets_.switch_in() + 0.5 * sets_.goal_band();
    pcfg.guard_alignment = goal.min_alignment;
    // first-found sampling plans meander; keep the shortest of a few tries
    MotionPlan best;
    for (int attempt = 0; attempt < 3; ++attempt) {
        const std::uint64_t sub =
            derive_seed(seed_, 100 + 8 * plan_counter_ + attempt);
        try {
            MotionPlan candidate = plan(start, goal, obstacles_, curve_, params_,
                                        pcfg, sub);
            if (best.empty() || candidate.duration() < best.duration())
                best = std::move(candidate);
        } catch (const BudgetExhausted&) {
            if (attempt == 2 && best.empty()) throw;
        }
    }
    plan_ = std::move(best);
    ++plan_counter_;
}

AuxInput Simulator::tracker_input(const ExtendedState& x) const {
    const CarInput cmd = kappa1(x.car(), plan_, pp_, params_);
    // The tracker commands (speed, steering rate) for the unextended car;
    // on the extended plant the steering rate passes through and the speed
    // command is reached by a critically damped servo on the offset states.
    const double wn = cfg_.speed_servo_freq;
    AuxInput u;
    u.u2 = cmd.omega;
    u.u1 = -wn * wn * (x.x5 - (cmd.v - params_.nominal_speed)) - 2.0 * wn * x.x6;
    return u;
}

AuxInput Simulator::output(int q, const ExtendedState& x, double t) {
    if (q == 1) {
        last_tfl_valid_ = false;
        return tracker_input(x);
    }
    LocalControlResult r = kappa0(x, curve_, params_, gains_, barrier_, ref_, t,
                                  sets_.delta_y, lambda_hint_);
    lambda_hint_ = r.tfl.out.foot.frame.lambda;
    last_tfl_valid_ = true;
    last_eta_ = r.tfl.coords.eta;
    last_xi_ = r.tfl.coords.xi;
    last_eta2_ref_ = ref_.eta2(t);
    last_cbf_active_ = r.cbf_active;
    last_clf_relaxed_ = r.relax > 1e-12;
    return r.u;
}

HybridState Simulator::init_state(const ExtendedState& x0) {
    resample_noise();
    HybridState h;
    h.x = x0;
    h.t = 0.0;
    h.j = 0;
    h.q = measured_distance(x0) <= sets_.switch_in() ? 0 : 1;
    if (h.q == 1) make_plan(x0.car());
    lambda_hint_.reset();
    steps_since_control_ = 0;
    return h;
}

void Simulator::step(HybridState& h, HybridTrace& trace) {
    resample_noise();

    // jumps have priority over flowing
    if (in_jump_set(h)) {
        JumpRecord rec;
        rec.t = h.t;
        rec.j_before = h.j;
        rec.from_q = h.q;
        rec.to_q = jump_map(h.q);
        rec.dist = distance_to_gamma(h.x, curve_);
        trace.jumps.push_back(rec);
        h.q = rec.to_q;
        h.j += 1;
        lambda_hint_.reset();
        steps_since_control_ = 0;
        if (h.q == 1) make_plan(h.x.car());
        if (cfg_.record_trace) {
            TraceSample ts;
            ts.t = h.t;
            ts.j = h.j;
            ts.q = h.q;
            ts.x = h.x;
            ts.u = held_input_;
            ts.dist = rec.dist;
            trace.samples.push_back(ts);
        }
        return;
    }

    if (steps_since_control_ == 0) {
        held_input_ = output(h.q, h.x, h.t);
        if (last_clf_relaxed_) ++trace.qp_relaxed;
    }
    steps_since_control_ = (steps_since_control_ + 1) % cfg_.control_decimation;

    const ExtendedState before = h.x;
    const double t_before = h.t;
    bool clamped = false;
    h.x = rk4_step(before, held_input_, params_, cfg_.dt, &clamped);
    h.t = t_before + cfg_.dt;
    if (clamped) ++trace.steering_clamps;

    // localize a jump-set crossing inside the step by bisection
    if (in_jump_set(h)) {
        double lo = 0.0, hi = cfg_.dt;
        while (hi - lo > cfg_.bisection_tol) {
            const double mid = 0.5 * (lo + hi);
            HybridState probe = h;
            probe.x = rk4_step(before, held_input_, params_, mid);
            if (in_jump_set(probe)) hi = mid; else lo = mid;
        }
        h.x = rk4_step(before, held_input_, params_, hi);
        h.t = t_before + hi;
        steps_since_control_ = 0;  // recompute control after the jump
    }

    if (cfg_.record_trace) {
        TraceSample ts;
        ts.t = h.t;
        ts.j = h.j;
        ts.q = h.q;
        ts.x = h.x;
        ts.u = held_input_;
        ts.dist = distance_to_gamma(h.x, curve_);
        ts.tfl_valid = h.q == 0 && last_tfl_valid_;
        if (ts.tfl_valid) {
            ts.eta = last_eta_;
            ts.xi = last_xi_;
            ts.eta2_ref = last_eta2_ref_;
            ts.cbf_active = last_cbf_active_;
            ts.clf_relaxed = last_clf_relaxed_;
        }
        trace.samples.push_back(ts);
    }
}

HybridTrace Simulator::run(const ExtendedState& x0) {
    HybridTrace trace;
    HybridState h = init_state(x0);

    if (cfg_.record_trace) {
        TraceSample ts;
        ts.t = 0.0;
        ts.j = 0;
        ts.q = h.q;
        ts.x = x0;
        ts.dist = distance_to_gamma(x0, curve_);
        trace.samples.push_back(ts);
    }

    const long max_steps =
        static_cast<long>(std::ceil(cfg_.horizon / cfg_.dt)) + 64;
    long guard = 0;
    while (h.t < cfg_.horizon - 0.5 * cfg_.dt) {
        step(h, trace);
        if (++guard > 4 * max_steps)
            throw NotInFlowOrJumpSet(
                "stepping stalled: flow time stopped advancing before the horizon");
    }
    trace.completed = true;
    return trace;
}

}  // namespace pathinv
