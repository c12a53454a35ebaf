#include "pathinv/scenario.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace pathinv {

using nlohmann::json;

namespace {

// Fail-closed field access: every object must declare all keys it touches,
// and any stray key is an error.
class StrictObject {
public:
    StrictObject(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object())
            throw ScenarioError(path_ + ": expected an object");
    }
    ~StrictObject() = default;

    void finish() const {
        for (auto it = j_.begin(); it != j_.end(); ++it) {
            if (!seen_.count(it.key()))
                throw ScenarioError(path_ + ": unknown key '" + it.key() + "'");
        }
    }

    bool has(const std::string& key) const { return j_.contains(key); }

    const json& require(const std::string& key) {
        seen_.insert(key);
        if (!j_.contains(key))
            throw ScenarioError(path_ + ": missing required key '" + key + "'");
        return j_.at(key);
    }

    const json* optional(const std::string& key) {
        seen_.insert(key);
        return j_.contains(key) ? &j_.at(key) : nullptr;
    }

    double number(const std::string& key) {
        const json& v = require(key);
        if (!v.is_number()) throw ScenarioError(path_ + "." + key + ": expected a number");
        return v.get<double>();
    }

    double number_or(const std::string& key, double fallback) {
        const json* v = optional(key);
        if (!v) return fallback;
        if (!v->is_number()) throw ScenarioError(path_ + "." + key + ": expected a number");
        return v->get<double>();
    }

    std::string text(const std::string& key) {
        const json& v = require(key);
        if (!v.is_string()) throw ScenarioError(path_ + "." + key + ": expected a string");
        return v.get<std::string>();
    }

    const std::string& path() const { return path_; }

private:
    const json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

std::vector<double> number_array(const json& j, const std::string& path) {
    if (!j.is_array()) throw ScenarioError(path + ": expected an array of numbers");
    std::vector<double> out;
    for (const auto& v : j) {
        if (!v.is_number()) throw ScenarioError(path + ": expected numbers");
        out.push_back(v.get<double>());
    }
    return out;
}

CurveSpec parse_curve(const json& j) {
    StrictObject o(j, "curve");
    CurveSpec spec;
    const std::string type = o.text("type");
    if (type == "circle") {
        spec.kind = CurveKind::Circle;
        spec.radius = o.number("radius");
    } else if (type == "poly") {
        spec.kind = CurveKind::Polynomial;
        spec.coeffs = number_array(o.require("coeffs"), "curve.coeffs");
        const auto w = number_array(o.require("window"), "curve.window");
        if (w.size() != 2) throw ScenarioError("curve.window: expected [min, max]");
        spec.window_min = w[0];
        spec.window_max = w[1];
    } else if (type == "sinusoid") {
        spec.kind = CurveKind::Sinusoid;
        spec.amplitude = o.number("amplitude");
        spec.frequency = o.number("frequency");
        const auto w = number_array(o.require("window"), "curve.window");
        if (w.size() != 2) throw ScenarioError("curve.window: expected [min, max]");
        spec.window_min = w[0];
        spec.window_max = w[1];
    } else {
        throw ScenarioError("curve.type: unknown curve type '" + type + "'");
    }
    o.finish();
    return spec;
}

ObstacleSet parse_obstacles(const json* arr, double inflation) {
    ObstacleSet set;
    set.inflation = inflation;
    if (!arr) return set;
    if (!arr->is_array()) throw ScenarioError("obstacles: expected an array");
    int idx = 0;
    for (const auto& item : *arr) {
        StrictObject o(item, "obstacles[" + std::to_string(idx) + "]");
        const std::string type = o.text("type");
        if (type == "box") {
            const auto c = number_array(o.require("center"), o.path() + ".center");
            const auto h = number_array(o.require("half_size"), o.path() + ".half_size");
            if (c.size() != 2 || h.size() != 2)
                throw ScenarioError(o.path() + ": center/half_size must be [x, y]");
            set.boxes.push_back({Vec2(c[0], c[1]), Vec2(h[0], h[1])});
        } else if (type == "circle") {
            const auto c = number_array(o.require("center"), o.path() + ".center");
            if (c.size() != 2) throw ScenarioError(o.path() + ".center must be [x, y]");
            set.circles.push_back({Vec2(c[0], c[1]), o.number("radius")});
        } else {
            throw ScenarioError(o.path() + ": unknown obstacle type '" + type + "'");
        }
        o.finish();
        ++idx;
    }
    return set;
}

SpeedReference parse_reference(const json* j) {
    SpeedReference ref;
    if (!j) return ref;
    StrictObject o(*j, "speed_reference");
    const std::string type = o.text("type");
    if (type == "constant") {
        ref.kind = SpeedReference::Kind::Constant;
        ref.value = o.number("value");
    } else if (type == "sinusoid") {
        ref.kind = SpeedReference::Kind::Sinusoid;
        ref.amplitude = o.number("amplitude");
        ref.frequency = o.number("frequency");
        ref.offset = o.number_or("offset", 0.0);
    } else {
        throw ScenarioError("speed_reference.type: unknown type '" + type + "'");
    }
    o.finish();
    return ref;
}

}  // namespace

Curve CurveSpec::make() const {
    switch (kind) {
        case CurveKind::Circle:
            return Curve::circle(radius);
        case CurveKind::Polynomial:
            return Curve::polynomial(coeffs, window_min, window_max);
        case CurveKind::Sinusoid:
            return Curve::sinusoid(amplitude, frequency, window_min, window_max);
    }
    throw ScenarioError("unreachable curve kind");
}

Scenario scenario_from_json_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ScenarioError(std::string("scenario is not valid JSON: ") + e.what());
    }

    StrictObject root(j, "scenario");
    Scenario s;

    s.curve = parse_curve(root.require("curve"));

    {
        StrictObject o(root.require("car"), "car");
        s.car.length = o.number("length");
        s.car.max_steering = o.number("max_steering");
        s.car.nominal_speed = o.number("nominal_speed");
        o.finish();
    }

    {
        const auto v = number_array(root.require("initial_state"), "initial_state");
        if (v.size() != 6)
            throw ScenarioError("initial_state: expected [x1, x2, x3, x4, x5, x6]");
        s.initial_state = {v[0], v[1], v[2], v[3], v[4], v[5]};
    }

    const double inflation = root.number_or("obstacle_inflation", s.car.length);
    s.obstacles = parse_obstacles(root.optional("obstacles"), inflation);

    if (const json* g = root.optional("gains")) {
        StrictObject o(*g, "gains");
        const auto k = number_array(o.require("k"), "gains.k");
        if (k.size() != 3) throw ScenarioError("gains.k: expected [k1, k2, k3]");
        s.gains.k1 = k[0];
        s.gains.k2 = k[1];
        s.gains.k3 = k[2];
        s.gains.beta = o.number_or("beta", s.gains.beta);
        o.finish();
    }

    if (const json* b = root.optional("barrier")) {
        StrictObject o(*b, "barrier");
        s.barrier.delta = o.number_or("delta", s.barrier.delta);
        s.barrier.lambda0 = o.number_or("lambda0", s.barrier.lambda0);
        s.barrier.lambda_k = o.number_or("lambda_k", s.barrier.lambda_k);
        s.barrier.clf_gain = o.number_or("clf_gain", s.barrier.clf_gain);
        s.barrier.clf_cross = o.number_or("clf_cross", s.barrier.clf_cross);
        s.barrier.relax_penalty = o.number_or("relax_penalty", s.barrier.relax_penalty);
        o.finish();
    }

    s.speed_reference = parse_reference(root.optional("speed_reference"));
    if (!root.has("speed_reference")) s.speed_reference.value = s.car.nominal_speed;

    s.pure_pursuit.nominal_speed = s.car.nominal_speed;
    if (const json* p = root.optional("pure_pursuit")) {
        StrictObject o(*p, "pure_pursuit");
        s.pure_pursuit.lookahead = o.number_or("lookahead", s.pure_pursuit.lookahead);
        s.pure_pursuit.speed_gain = o.number_or("speed_gain", s.pure_pursuit.speed_gain);
        s.pure_pursuit.nominal_speed =
            o.number_or("nominal_speed", s.pure_pursuit.nominal_speed);
        s.pure_pursuit.steer_gain = o.number_or("steer_gain", s.pure_pursuit.steer_gain);
        o.finish();
    }

    {
        StrictObject o(root.require("supervisor"), "supervisor");
        s.sets.delta_y = o.number("delta_y");
        s.sets.n_c = o.number_or("n_c", s.sets.delta_y);
        s.sets.c1 = o.number_or("c1", s.sets.c1);
        s.sets.c10 = o.number_or("c10", s.sets.c10);
        s.sets.c0 = o.number_or("c0", s.sets.c0);
        o.finish();
    }

    if (const json* p = root.optional("planner")) {
        StrictObject o(*p, "planner");
        s.planner.primitive_duration =
            o.number_or("primitive_duration", s.planner.primitive_duration);
        s.planner.substep = o.number_or("substep", s.planner.substep);
        s.planner.max_iterations = static_cast<int>(
            o.number_or("max_iterations", s.planner.max_iterations));
        s.planner.goal_bias = o.number_or("goal_bias", s.planner.goal_bias);
        s.planner.heading_weight = o.number_or("heading_weight", s.planner.heading_weight);
        s.planner.omega_max = o.number_or("omega_max", s.planner.omega_max);
        s.planner.steer_limit = o.number_or("steer_limit", s.planner.steer_limit);
        if (const json* ar = o.optional("allow_reverse")) {
            if (!ar->is_boolean())
                throw ScenarioError("planner.allow_reverse: expected a boolean");
            s.planner.allow_reverse = ar->get<bool>();
        }
        o.finish();
    }
    s.planner.delta_y = s.sets.delta_y;

    {
        StrictObject o(root.require("sim"), "sim");
        s.sim.horizon = o.number("horizon");
        s.sim.dt = o.number_or("dt", s.sim.dt);
        s.sim.control_decimation = static_cast<int>(
            o.number_or("control_decimation", s.sim.control_decimation));
        s.sim.noise_amplitude = o.number_or("noise_amplitude", 0.0);
        s.sim.speed_servo_freq = o.number_or("speed_servo_freq", s.sim.speed_servo_freq);
        o.finish();
    }

    if (const json* seed = root.optional("seed")) {
        if (!seed->is_number_integer() || seed->get<long long>() < 0)
            throw ScenarioError("seed: expected a non-negative integer");
        s.seed = seed->get<std::uint64_t>();
    }

    root.finish();
    return s;
}

Scenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ScenarioError("cannot open scenario file: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return scenario_from_json_text(buf.str());
}

Simulator Scenario::make_simulator() const { return make_simulator(seed); }

Simulator Scenario::make_simulator(std::uint64_t seed_override) const {
    return Simulator(curve.make(), car, gains, barrier, speed_reference, pure_pursuit,
                     sets, obstacles, planner, sim, seed_override);
}

bool ScenarioCheckReport::ok() const {
    for (const auto& it : items)
        if (!it.ok) return false;
    return true;
}

ScenarioCheckReport check_scenario(const Scenario& s) {
    ScenarioCheckReport rep;
    auto add = [&rep](const std::string& name, bool ok, const std::string& detail) {
        rep.items.push_back({name, ok, detail});
    };

    try {
        s.car.validate();
        add("car_params", true, "");
    } catch (const Error& e) {
        add("car_params", false, e.what());
    }
    try {
        s.gains.validate();
        add("finite_time_gains", true, "");
    } catch (const Error& e) {
        add("finite_time_gains", false, e.what());
    }
    try {
        s.barrier.validate();
        add("barrier_config", true, "");
    } catch (const Error& e) {
        add("barrier_config", false, e.what());
    }
    try {
        s.speed_reference.validate();
        add("speed_reference", true, "");
    } catch (const Error& e) {
        add("speed_reference", false, e.what());
    }
    try {
        s.pure_pursuit.validate();
        add("pure_pursuit", true, "");
    } catch (const Error& e) {
        add("pure_pursuit", false, e.what());
    }
    try {
        s.sets.validate();
        add("switching_sets", true, "");
    } catch (const Error& e) {
        add("switching_sets", false, e.what());
    }

    // tube radius must respect the minimum turning radius
    {
        const double bound = s.car.length / std::tan(s.car.max_steering);
        const bool ok = s.sets.delta_y < bound;
        std::ostringstream os;
        os << "delta_y = " << s.sets.delta_y << ", minimum turning radius = " << bound;
        add("tube_radius", ok, os.str());
    }

    Curve curve = s.curve.make();
    {
        const FeasibilityReport fr = curve.check_feasibility(s.car);
        std::ostringstream os;
        os << "sup curvature = " << fr.sup_curvature << ", limit = "
           << fr.curvature_limit << " (worst at lambda = " << fr.worst_lambda << ")";
        add("curvature_feasible", fr.ok, os.str());
    }

    // obstacles must stay clear of the inflated tube around the path
    {
        bool ok = true;
        std::string detail;
        const int n = 512;
        for (int i = 0; i <= n && ok; ++i) {
            const Vec2 p = curve.point(curve.length() * i / n);
            const double c = s.obstacles.clearance(p);
            if (c <= s.sets.delta_y + s.obstacles.inflation) {
                ok = false;
                std::ostringstream os;
                os << "obstacle within " << c << " of the path at lambda = "
                   << curve.length() * i / n;
                detail = os.str();
            }
        }
        add("obstacles_clear_of_tube", ok, detail);
    }

    {
        const bool ok = !s.obstacles.collides(Vec2(s.initial_state.x1, s.initial_state.x2));
        add("start_collision_free", ok, ok ? "" : "initial position is inside an inflated obstacle");
    }

    {
        const bool ok = std::abs(s.initial_state.x4) <= s.car.max_steering;
        add("start_steering", ok, ok ? "" : "initial steering exceeds the bound");
    }

    {
        const bool ok = s.sim.dt > 0.0 && s.sim.horizon > 0.0 &&
                        s.sim.control_decimation >= 1;
        add("sim_config", ok, ok ? "" : "dt, horizon and decimation must be positive");
    }

    return rep;
}

void require_valid(const Scenario& s) {
    const ScenarioCheckReport rep = check_scenario(s);
    for (const auto& item : rep.items) {
        if (!item.ok)
            throw ScenarioError("scenario check '" + item.name + "' failed: " + item.detail);
    }
}

}  // namespace pathinv
