#pragma once

#include <cstdint>
#include <string>

#include "pathinv/supervisor.hpp"

namespace pathinv {

struct CurveSpec {
    CurveKind kind = CurveKind::Circle;
    double radius = 1.0;
    std::vector<double> coeffs;
    double amplitude = 1.0;
    double frequency = 1.0;
    double window_min = -10.0, window_max = 10.0;

    Curve make() const;
};

/// One self-contained simulation setup. Loaded from JSON; unknown keys are
/// rejected so typos fail loudly instead of silently falling back to
/// defaults.
struct Scenario {
    CurveSpec curve;
    CarParams car;
    ExtendedState initial_state;
    ObstacleSet obstacles;
    FiniteTimeGains gains;
    BarrierConfig barrier;
    SpeedReference speed_reference;
    PurePursuitConfig pure_pursuit;
    SupervisorSets sets;
    PlannerConfig planner;
    Simulator::Config sim;
    std::uint64_t seed = 1;

    Simulator make_simulator() const;
    Simulator make_simulator(std::uint64_t seed_override) const;
};

struct ScenarioCheckItem {
    std::string name;
    bool ok = false;
    std::string detail;
};

struct ScenarioCheckReport {
    std::vector<ScenarioCheckItem> items;
    bool ok() const;
};

Scenario load_scenario(const std::string& path);
Scenario scenario_from_json_text(const std::string& text);

/// Validates every scenario invariant: curvature feasibility, switching-set
/// ordering, tube bound, obstacle/tube disjointness, collision-free start,
/// gain and reference consistency. Returns per-item results.
ScenarioCheckReport check_scenario(const Scenario& s);

/// Throws ScenarioError when any check fails.
void require_valid(const Scenario& s);

}  // namespace pathinv
