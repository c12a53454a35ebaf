#include <doctest.h>

#include <cmath>
#include <sstream>

#include "pathinv/planner.hpp"
#include "pathinv/trace_io.hpp"
#include "pathinv/util.hpp"

using namespace pathinv;

namespace {

CarParams test_car() {
    CarParams p;
    p.length = 0.25;
    p.max_steering = kPi / 4.0;
    p.nominal_speed = 0.5;
    return p;
}

PlannerConfig test_cfg() {
    PlannerConfig cfg;
    cfg.max_iterations = 30000;
    cfg.delta_y = 0.2;
    return cfg;
}

GoalSet test_goal() {
    GoalSet g;
    g.band = 0.08;
    g.min_speed = 0.02;
    return g;
}

std::string plan_fingerprint(const MotionPlan& p) {
    std::ostringstream os;
    for (std::size_t i = 0; i < p.size(); ++i)
        os << format_double(p.t[i]) << ' ' << format_double(p.states[i].x1) << ' '
           << format_double(p.states[i].x2) << ' ' << format_double(p.states[i].x3)
           << ' ' << format_double(p.states[i].x4) << ' '
           << format_double(p.inputs[i].v) << ' ' << format_double(p.inputs[i].omega)
           << '\n';
    return os.str();
}

}  // namespace

TEST_SUITE_BEGIN("planner");

TEST_CASE("obstacle membership and clearance") {
    ObstacleSet obs;
    obs.inflation = 0.25;
    obs.boxes.push_back({Vec2(2.0, 0.0), Vec2(0.5, 0.5)});
    obs.circles.push_back({Vec2(-2.0, 0.0), 0.3});

    CHECK(obs.collides(Vec2(2.0, 0.0)));
    CHECK(obs.collides(Vec2(2.7, 0.0)));       // within inflation of the box face
    CHECK_FALSE(obs.collides(Vec2(3.0, 0.0))); // 0.5 beyond the face
    CHECK(obs.collides(Vec2(-2.0, 0.5)));
    CHECK_FALSE(obs.collides(Vec2(-2.0, 0.6)));
    CHECK(obs.clearance(Vec2(3.0, 0.0)) == doctest::Approx(0.5));
    CHECK(obs.clearance(Vec2(2.0, 0.0)) == doctest::Approx(-0.5));
}

TEST_CASE("start already switch-ready gives a single-state plan") {
    const Curve c = Curve::circle(1.0);
    const CarParams p = test_car();
    CarState start{1.0, 0.0, kPi / 2, 0.0};
    const MotionPlan mp = plan(start, test_goal(), ObstacleSet{}, c, p, test_cfg(), 5);
    CHECK(mp.size() == 1);
    CHECK(mp.duration() == 0.0);
    const PlanCheckReport rep =
        validate_plan(mp, start, test_goal(), ObstacleSet{}, c, p, test_cfg());
    CHECK(rep.ok());
}

TEST_CASE("collision at the start is rejected") {
    const Curve c = Curve::circle(1.0);
    ObstacleSet obs;
    obs.inflation = 0.25;
    obs.boxes.push_back({Vec2(3.0, 3.0), Vec2(0.5, 0.5)});
    CHECK_THROWS_AS(plan({3.0, 3.0, 0.0, 0.0}, test_goal(), obs, Curve::circle(1.0),
                         test_car(), test_cfg(), 5),
                    StartInCollision);
}

TEST_CASE("free-space plan reaches the band and validates") {
    const Curve c = Curve::circle(1.0);
    const CarParams p = test_car();
    const CarState start{0.0, 0.0, 0.0, 0.0};  // path center
    const MotionPlan mp = plan(start, test_goal(), ObstacleSet{}, c, p, test_cfg(), 7);
    CHECK(mp.size() > 1);
    const PlanCheckReport rep =
        validate_plan(mp, start, test_goal(), ObstacleSet{}, c, p, test_cfg());
    CHECK(rep.start_ok);
    CHECK(rep.goal_ok);
    CHECK(rep.dynamics_ok);
    CHECK(rep.collision_ok);
    for (const auto& s : mp.states) CHECK(std::abs(s.x4) <= p.max_steering + 1e-9);
}

TEST_CASE("plan around obstacles validates") {
    const Curve c = Curve::sinusoid(1.0, 1.0, -2.0, 12.0);
    const CarParams p = test_car();
    ObstacleSet obs;
    obs.inflation = 0.25;
    obs.boxes.push_back({Vec2(0.0, 2.2), Vec2(0.6, 0.35)});
    obs.boxes.push_back({Vec2(2.4, 2.2), Vec2(0.6, 0.35)});
    const CarState start{1.2, 3.5, -kPi / 2, 0.0};
    const MotionPlan mp = plan(start, test_goal(), obs, c, p, test_cfg(), 3);
    const PlanCheckReport rep = validate_plan(mp, start, test_goal(), obs, c, p, test_cfg());
    CHECK(rep.ok());
    CHECK(rep.min_clearance > 0.0);
}

TEST_CASE("walled-off goal exhausts the budget") {
    const Curve c = Curve::circle(1.0);
    const CarParams p = test_car();
    ObstacleSet obs;
    obs.inflation = 0.1;
    // square ring that encloses the whole unit circle and its tube
    obs.boxes.push_back({Vec2(0.0, 2.0), Vec2(2.4, 0.2)});
    obs.boxes.push_back({Vec2(0.0, -2.0), Vec2(2.4, 0.2)});
    obs.boxes.push_back({Vec2(2.0, 0.0), Vec2(0.2, 2.4)});
    obs.boxes.push_back({Vec2(-2.0, 0.0), Vec2(0.2, 2.4)});
    PlannerConfig cfg = test_cfg();
    cfg.max_iterations = 1500;
    CHECK_THROWS_AS(plan({3.2, 3.2, 0.0, 0.0}, test_goal(), obs, c, p, cfg, 11),
                    BudgetExhausted);
}

TEST_CASE("plans are deterministic in the seed") {
    const Curve c = Curve::sinusoid(1.0, 1.0, -2.0, 12.0);
    const CarParams p = test_car();
    const CarState start{1.2, 3.5, -kPi / 2, 0.0};
    const MotionPlan a = plan(start, test_goal(), ObstacleSet{}, c, p, test_cfg(), 42);
    const MotionPlan b = plan(start, test_goal(), ObstacleSet{}, c, p, test_cfg(), 42);
    const MotionPlan d = plan(start, test_goal(), ObstacleSet{}, c, p, test_cfg(), 43);
    CHECK(plan_fingerprint(a) == plan_fingerprint(b));
    CHECK(plan_fingerprint(a) != plan_fingerprint(d));
}

TEST_CASE("plan survives a serialization round trip") {
    const Curve c = Curve::circle(1.0);
    const CarParams p = test_car();
    const CarState start{0.0, 0.0, 0.0, 0.0};
    const MotionPlan mp = plan(start, test_goal(), ObstacleSet{}, c, p, test_cfg(), 9);
    const std::string path = "/tmp/pathinv_test_plan.csv";
    write_plan_csv(mp, path);
    const MotionPlan back = read_plan_csv(path);
    CHECK(plan_fingerprint(mp) == plan_fingerprint(back));
    // a reloaded plan still validates bit-for-bit
    const PlanCheckReport rep =
        validate_plan(back, start, test_goal(), ObstacleSet{}, c, p, test_cfg());
    CHECK(rep.ok());
}

TEST_CASE("validator flags a teleported state") {
    const Curve c = Curve::circle(1.0);
    const CarParams p = test_car();
    const CarState start{0.0, 0.0, 0.0, 0.0};
    MotionPlan mp = plan(start, test_goal(), ObstacleSet{}, c, p, test_cfg(), 13);
    REQUIRE(mp.size() > 4);
    mp.states[mp.size() / 2].x1 += 1.0;
    const PlanCheckReport rep =
        validate_plan(mp, start, test_goal(), ObstacleSet{}, c, p, test_cfg());
    CHECK_FALSE(rep.dynamics_ok);
    CHECK(rep.dynamics_error > 0.5);
}

TEST_CASE("validator flags a plan clipping an obstacle") {
    const Curve c = Curve::circle(1.0);
    const CarParams p = test_car();
    const CarState start{0.0, 0.0, 0.0, 0.0};
    MotionPlan mp = plan(start, test_goal(), ObstacleSet{}, c, p, test_cfg(), 13);
    ObstacleSet obs;
    obs.inflation = 0.25;
    // drop a box right on the middle of the planned trace
    const CarState mid = mp.states[mp.size() / 2];
    obs.boxes.push_back({Vec2(mid.x1, mid.x2), Vec2(0.05, 0.05)});
    const PlanCheckReport rep = validate_plan(mp, start, test_goal(), obs, c, p, test_cfg());
    CHECK_FALSE(rep.collision_ok);
    CHECK(rep.min_clearance < 0.0);
}

TEST_SUITE_END();
