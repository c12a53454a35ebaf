#include "pathinv/planner.hpp"

#include <cmath>
#include <random>

#include "pathinv/util.hpp"

namespace pathinv {

bool ObstacleSet::collides(const Vec2& p) const {
    for (const auto& b : boxes) {
        const Vec2 d = (p - b.center).cwiseAbs() - b.half_size;
        const double outside = Vec2(std::max(d.x(), 0.0), std::max(d.y(), 0.0)).norm();
        const double inside = std::min(std::max(d.x(), d.y()), 0.0);
        if (outside + inside <= inflation) return true;
    }
    for (const auto& c : circles) {
        if ((p - c.center).norm() <= c.radius + inflation) return true;
    }
    return false;
}

double ObstacleSet::clearance(const Vec2& p) const {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& b : boxes) {
        const Vec2 d = (p - b.center).cwiseAbs() - b.half_size;
        const double outside = Vec2(std::max(d.x(), 0.0), std::max(d.y(), 0.0)).norm();
        const double inside = std::min(std::max(d.x(), d.y()), 0.0);
        best = std::min(best, outside + inside);
    }
    for (const auto& c : circles) best = std::min(best, (p - c.center).norm() - c.radius);
    return best;
}

bool GoalSet::position_ok(const CarState& x, const Curve& curve) const {
    return curve.distance(Vec2(x.x1, x.x2)) <= band;
}

bool GoalSet::heading_ok(const CarState& x, const Curve& curve, double delta_y) const {
    try {
        const ProjectionResult pr = curve.project_full(Vec2(x.x1, x.x2), delta_y);
        // inside the tube 1 - offset*k > 0, so the sign of the alignment is
        // the sign of <tangent, heading>
        return pr.frame.tangent.dot(Vec2(std::cos(x.x3), std::sin(x.x3))) >
               min_alignment;
    } catch (const Error&) {
        return false;
    }
}

bool GoalSet::contains(const CarState& x, double end_speed, const Curve& curve,
                       double delta_y) const {
    return std::abs(end_speed) > min_speed && position_ok(x, curve) &&
           heading_ok(x, curve, delta_y);
}

namespace {

struct Node {
    CarState state;
    int parent = -1;
    CarInput input;                   // primitive that produced this node
    std::vector<CarState> substates;  // intermediate samples along the edge
};

double metric2(const CarState& a, const CarState& b, double hw) {
    const double dx = a.x1 - b.x1, dy = a.x2 - b.x2;
    const double dth = hw * angle_diff(a.x3, b.x3);
    return dx * dx + dy * dy + dth * dth;
}

CarState sample_goal_state(std::mt19937_64& rng, const GoalSet& goal,
                           const Curve& curve, const CarParams& params) {
    const double lambda = uniform(rng, 0.0, curve.length());
    const FrenetFrame f = curve.frame(lambda);
    const double off = uniform(rng, -0.8, 0.8) * goal.band;
    const Vec2 pos = f.point + off * f.normal;
    CarState s;
    s.x1 = pos.x();
    s.x2 = pos.y();
    s.x3 = wrap_angle(std::atan2(f.tangent.y(), f.tangent.x()) +
                      uniform(rng, -0.3, 0.3));
    s.x4 = std::clamp(std::atan(params.length * f.k), -params.max_steering,
                      params.max_steering);
    return s;
}

}  // namespace

MotionPlan plan(const CarState& start, const GoalSet& goal,
                const ObstacleSet& obstacles, const Curve& curve,
                const CarParams& params, const PlannerConfig& cfg,
                std::uint64_t seed) {
    if (obstacles.collides(Vec2(start.x1, start.x2)))
        throw StartInCollision("planning start lies inside an inflated obstacle");

    const double v_nom = std::abs(params.nominal_speed);

    // degenerate query: already switch-ready
    if (goal.contains(start, v_nom, curve, cfg.delta_y)) {
        MotionPlan p;
        p.t = {0.0};
        p.states = {start};
        p.inputs = {{v_nom, 0.0}};
        return p;
    }

    Vec2 lo = cfg.sample_min, hi = cfg.sample_max;
    if ((hi - lo).norm() == 0.0) {
        auto [clo, chi] = curve.bounding_box();
        lo = clo.cwiseMin(Vec2(start.x1, start.x2));
        hi = chi.cwiseMax(Vec2(start.x1, start.x2));
        for (const auto& b : obstacles.boxes) {
            lo = lo.cwiseMin(b.center - b.half_size);
            hi = hi.cwiseMax(b.center + b.half_size);
        }
        for (const auto& c : obstacles.circles) {
            lo = lo.cwiseMin(c.center - Vec2(c.radius, c.radius));
            hi = hi.cwiseMax(c.center + Vec2(c.radius, c.radius));
        }
        lo -= Vec2(1.0, 1.0);
        hi += Vec2(1.0, 1.0);
    }

    std::vector<CarInput> primitives;
    for (double v : cfg.allow_reverse ? std::vector<double>{v_nom, -v_nom}
                                      : std::vector<double>{v_nom})
        for (double w : {-cfg.omega_max, 0.0, cfg.omega_max})
            primitives.push_back({v, w});

    const int substeps =
        std::max(1, static_cast<int>(std::round(cfg.primitive_duration / cfg.substep)));
    const double dt = cfg.primitive_duration / substeps;

    const double steer_cap = cfg.steer_limit > 0.0
                                 ? std::min(cfg.steer_limit, params.max_steering)
                                 : params.max_steering;

    auto admissible = [&](const CarState& s) {
        if (std::abs(s.x4) > steer_cap + 1e-12) return false;
        const Vec2 pos(s.x1, s.x2);
        if (obstacles.collides(pos)) return false;
        if (cfg.guard_radius <= 0.0) return true;
        if (curve.distance(pos) >= cfg.guard_radius) return true;
        try {
            const ProjectionResult pr = curve.project_full(pos, cfg.delta_y);
            return pr.frame.tangent.dot(Vec2(std::cos(s.x3), std::sin(s.x3))) >=
                   cfg.guard_alignment;
        } catch (const Error&) {
            return false;
        }
    };

    std::mt19937_64 rng(seed);
    std::vector<Node> tree;
    tree.push_back({start, -1, {0.0, 0.0}, {}});

    int goal_node = -1;
    int goal_substep = -1;

    for (int it = 0; it < cfg.max_iterations && goal_node < 0; ++it) {
        CarState target;
        if (uniform01(rng) < cfg.goal_bias) {
            target = sample_goal_state(rng, goal, curve, params);
        } else {
            target.x1 = uniform(rng, lo.x(), hi.x());
            target.x2 = uniform(rng, lo.y(), hi.y());
            target.x3 = uniform(rng, -kPi, kPi);
            target.x4 = uniform(rng, -params.max_steering, params.max_steering);
        }

        int nearest = 0;
        double best = metric2(tree[0].state, target, cfg.heading_weight);
        for (std::size_t i = 1; i < tree.size(); ++i) {
            const double d = metric2(tree[i].state, target, cfg.heading_weight);
            if (d < best) { best = d; nearest = static_cast<int>(i); }
        }

        // try the primitive that ends closest to the sample
        int best_prim = -1;
        double best_prim_d = std::numeric_limits<double>::infinity();
        std::vector<CarState> best_sub;
        for (std::size_t pi = 0; pi < primitives.size(); ++pi) {
            CarState s = tree[nearest].state;
            std::vector<CarState> sub;
            sub.reserve(substeps);
            bool blocked = false;
            for (int k = 0; k < substeps; ++k) {
                s = rk4_step(s, primitives[pi], params, dt);
                if (!admissible(s)) { blocked = true; break; }
                sub.push_back(s);
            }
            if (blocked) continue;
            const double d = metric2(s, target, cfg.heading_weight);
            if (d < best_prim_d) {
                best_prim_d = d;
                best_prim = static_cast<int>(pi);
                best_sub = std::move(sub);
            }
        }
        if (best_prim < 0) continue;

        Node node;
        node.state = best_sub.back();
        node.parent = nearest;
        node.input = primitives[best_prim];
        node.substates = std::move(best_sub);
        tree.push_back(std::move(node));
        const int node_id = static_cast<int>(tree.size()) - 1;

        for (std::size_t k = 0; k < tree[node_id].substates.size(); ++k) {
            if (goal.contains(tree[node_id].substates[k], tree[node_id].input.v,
                              curve, cfg.delta_y)) {
                goal_node = node_id;
                goal_substep = static_cast<int>(k);
                break;
            }
        }
    }

    if (goal_node < 0)
        throw BudgetExhausted("no plan found within " +
                              std::to_string(cfg.max_iterations) + " iterations");

    // walk back to the root, then emit substep-resolution samples
    std::vector<int> chain;
    for (int n = goal_node; n >= 0; n = tree[n].parent) chain.push_back(n);
    std::reverse(chain.begin(), chain.end());

    MotionPlan p;
    p.t.push_back(0.0);
    p.states.push_back(start);
    p.inputs.push_back(tree[chain.size() > 1 ? chain[1] : chain[0]].input);
    long tick = 0;
    for (std::size_t ci = 1; ci < chain.size(); ++ci) {
        const Node& n = tree[chain[ci]];
        const int last_sub = (chain[ci] == goal_node)
                                 ? goal_substep
                                 : static_cast<int>(n.substates.size()) - 1;
        for (int k = 0; k <= last_sub; ++k) {
            ++tick;
            p.t.push_back(tick * dt);
            p.states.push_back(n.substates[k]);
            p.inputs.push_back(n.input);
        }
        // record the upcoming primitive on the sample that starts it
        if (chain[ci] != goal_node && ci + 1 < chain.size())
            p.inputs.back() = tree[chain[ci + 1]].input;
    }
    return p;
}

PlanCheckReport validate_plan(const MotionPlan& plan, const CarState& start,
                              const GoalSet& goal, const ObstacleSet& obstacles,
                              const Curve& curve, const CarParams& params,
                              const PlannerConfig& cfg) {
    PlanCheckReport rep;
    if (plan.empty()) return rep;

    const CarState& s0 = plan.states.front();
    rep.start_error = std::hypot(s0.x1 - start.x1, s0.x2 - start.x2) +
                      std::abs(angle_diff(s0.x3, start.x3)) + std::abs(s0.x4 - start.x4);
    rep.start_ok = rep.start_error < 1e-9;

    const std::size_t n = plan.size();
    const double end_speed = plan.inputs[n >= 2 ? n - 2 : 0].v;
    rep.goal_distance = curve.distance(Vec2(plan.states.back().x1, plan.states.back().x2));
    rep.goal_ok = goal.contains(plan.states.back(), end_speed, curve, cfg.delta_y);

    rep.dynamics_ok = true;
    rep.collision_ok = true;
    rep.min_clearance = std::numeric_limits<double>::infinity();
    rep.min_clearance = obstacles.clearance(Vec2(s0.x1, s0.x2)) - obstacles.inflation;
    if (obstacles.collides(Vec2(s0.x1, s0.x2))) rep.collision_ok = false;

    for (std::size_t k = 0; k + 1 < n; ++k) {
        const double seg_dt = plan.t[k + 1] - plan.t[k];
        if (!(seg_dt > 0.0)) { rep.dynamics_ok = false; continue; }
        const CarInput& u = plan.inputs[k];
        // spatial resolution <= 1 cm along the segment; the small slack in
        // the ceils keeps float noise in the timestamps from changing the
        // substep count
        const int m = std::max(
            {1, static_cast<int>(std::ceil(seg_dt / cfg.substep - 1e-9)),
             static_cast<int>(std::ceil(seg_dt * std::abs(u.v) / 0.01 - 1e-9))});
        CarState s = plan.states[k];
        for (int i = 0; i < m; ++i) {
            s = rk4_step(s, u, params, seg_dt / m);
            const Vec2 pos(s.x1, s.x2);
            rep.min_clearance =
                std::min(rep.min_clearance, obstacles.clearance(pos) - obstacles.inflation);
            if (obstacles.collides(pos)) rep.collision_ok = false;
        }
        const CarState& want = plan.states[k + 1];
        const double err = std::abs(s.x1 - want.x1) + std::abs(s.x2 - want.x2) +
                           std::abs(angle_diff(s.x3, want.x3)) + std::abs(s.x4 - want.x4);
        rep.dynamics_error = std::max(rep.dynamics_error, err);
        if (err > 1e-6) rep.dynamics_ok = false;
    }
    return rep;
}

}  // namespace pathinv
