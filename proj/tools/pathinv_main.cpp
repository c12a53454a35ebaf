// Command-line front end: scenario validation, standalone planning, hybrid
// closed-loop simulation, and seed sweeps. Exit codes: 0 ok, 2 scenario
// validation failure, 3 simulation error, 4 planning budget exhausted.

#include <cstdlib>
#include <filesystem>
#include <future>
#include <iostream>
#include <thread>

#include <CLI11.hpp>

#include "pathinv/scenario.hpp"
#include "pathinv/trace_io.hpp"

namespace fs = std::filesystem;
using namespace pathinv;

namespace {

int log_level() {
    const char* env = std::getenv("PATHINV_LOG");
    return env ? std::atoi(env) : 1;
}

Scenario load_and_override(const std::string& path, double dt, double horizon,
                           long seed) {
    Scenario s = load_scenario(path);
    if (dt > 0.0) s.sim.dt = dt;
    if (horizon > 0.0) s.sim.horizon = horizon;
    if (seed >= 0) s.seed = static_cast<std::uint64_t>(seed);
    return s;
}

int run_check(const std::string& scenario_path) {
    Scenario s = load_scenario(scenario_path);
    const ScenarioCheckReport rep = check_scenario(s);
    for (const auto& item : rep.items) {
        std::cout << (item.ok ? "[ ok ] " : "[FAIL] ") << item.name;
        if (!item.detail.empty()) std::cout << "  (" << item.detail << ")";
        std::cout << '\n';
    }
    return rep.ok() ? 0 : 2;
}

int run_plan(const std::string& scenario_path, const std::string& out_path,
             long seed) {
    Scenario s = load_and_override(scenario_path, 0.0, 0.0, seed);
    require_valid(s);
    Curve curve = s.curve.make();
    GoalSet goal;
    goal.band = s.sets.goal_band();
    goal.min_speed = s.barrier.delta;
    MotionPlan mp = plan(s.initial_state.car(), goal, s.obstacles, curve, s.car,
                         s.planner, s.seed);
    const PlanCheckReport rep = validate_plan(mp, s.initial_state.car(), goal,
                                              s.obstacles, curve, s.car, s.planner);
    if (!rep.ok()) {
        std::cerr << "planner produced a plan that fails validation\n";
        return 3;
    }
    write_plan_csv(mp, out_path);
    if (log_level() > 0)
        std::cout << "plan: " << mp.size() << " samples over " << mp.duration()
                  << " s -> " << out_path << '\n';
    return 0;
}

int run_simulate(const std::string& scenario_path, const std::string& out_dir,
                 double dt, double horizon, long seed) {
    Scenario s = load_and_override(scenario_path, dt, horizon, seed);
    require_valid(s);
    fs::create_directories(out_dir);
    Simulator sim = s.make_simulator();
    const HybridTrace trace = sim.run(s.initial_state);
    const RunSummary summary =
        summarize(trace, s.car.nominal_speed, s.barrier.delta);
    write_trace_csv(trace, out_dir + "/trace.csv");
    write_summary_json(summary, trace, out_dir + "/summary.json");
    write_signal_csvs(trace, out_dir);
    if (log_level() > 0) {
        std::cout << "simulated " << trace.samples.back().t << " s, jumps = "
                  << summary.jump_count << ", final q = " << summary.final_q;
        if (summary.t_star) std::cout << ", converged at t = " << *summary.t_star;
        std::cout << " -> " << out_dir << '\n';
    }
    return 0;
}

int run_sweep(const std::string& scenario_path, const std::string& out_dir,
              long seed_lo, long seed_hi, double dt, double horizon) {
    Scenario base = load_and_override(scenario_path, dt, horizon, -1);
    require_valid(base);
    fs::create_directories(out_dir);

    const unsigned workers =
        std::max(1u, std::thread::hardware_concurrency());
    std::vector<long> seeds;
    for (long sd = seed_lo; sd <= seed_hi; ++sd) seeds.push_back(sd);

    std::atomic<std::size_t> next{0};
    std::atomic<int> failures{0};
    auto worker = [&]() {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= seeds.size()) return;
            const long sd = seeds[i];
            try {
                Simulator sim = base.make_simulator(static_cast<std::uint64_t>(sd));
                const HybridTrace trace = sim.run(base.initial_state);
                const RunSummary summary =
                    summarize(trace, base.car.nominal_speed, base.barrier.delta);
                const std::string dir = out_dir + "/seed_" + std::to_string(sd);
                fs::create_directories(dir);
                write_trace_csv(trace, dir + "/trace.csv");
                write_summary_json(summary, trace, dir + "/summary.json");
            } catch (const std::exception& e) {
                std::cerr << "seed " << sd << " failed: " << e.what() << '\n';
                ++failures;
            }
        }
    };
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    if (log_level() > 0)
        std::cout << "sweep: " << seeds.size() - failures << '/' << seeds.size()
                  << " runs ok -> " << out_dir << '\n';
    return failures == 0 ? 0 : 3;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Hybrid path-invariant control simulator for a kinematic car"};
    app.require_subcommand(1);

    std::string scenario_path, out_path = "out";
    double dt = 0.0, horizon = 0.0;
    long seed = -1, seed_lo = 0, seed_hi = 0;
    std::string seeds_range;

    auto add_common = [&](CLI::App* cmd, bool with_out) {
        cmd->add_option("--scenario", scenario_path, "scenario JSON file")->required();
        if (with_out) cmd->add_option("--out", out_path, "output path");
        cmd->add_option("--dt", dt, "override integration step [s]");
        cmd->add_option("--horizon", horizon, "override simulation horizon [s]");
        cmd->add_option("--seed", seed, "override RNG seed");
    };

    CLI::App* sim_cmd = app.add_subcommand("simulate", "run the hybrid closed loop");
    add_common(sim_cmd, true);

    CLI::App* plan_cmd = app.add_subcommand("plan", "run the motion planner only");
    add_common(plan_cmd, true);

    CLI::App* check_cmd = app.add_subcommand("check", "validate a scenario file");
    check_cmd->add_option("--scenario", scenario_path, "scenario JSON file")->required();

    CLI::App* sweep_cmd = app.add_subcommand("sweep", "run many seeds in parallel");
    add_common(sweep_cmd, true);
    sweep_cmd->add_option("--seeds", seeds_range, "seed range a..b")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (app.got_subcommand(check_cmd)) return run_check(scenario_path);
        if (app.got_subcommand(plan_cmd)) {
            if (out_path == "out") out_path = "plan.csv";
            return run_plan(scenario_path, out_path, seed);
        }
        if (app.got_subcommand(sim_cmd))
            return run_simulate(scenario_path, out_path, dt, horizon, seed);
        if (app.got_subcommand(sweep_cmd)) {
            const auto pos = seeds_range.find("..");
            if (pos == std::string::npos) {
                std::cerr << "--seeds expects a range like 0..99\n";
                return 2;
            }
            seed_lo = std::stol(seeds_range.substr(0, pos));
            seed_hi = std::stol(seeds_range.substr(pos + 2));
            return run_sweep(scenario_path, out_path, seed_lo, seed_hi, dt, horizon);
        }
    } catch (const BudgetExhausted& e) {
        std::cerr << "planning failed: " << e.what() << '\n';
        return 4;
    } catch (const ScenarioError& e) {
        std::cerr << "scenario error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    }
    return 0;
}
