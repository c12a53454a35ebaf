#include "pathinv/trace_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace pathinv {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

namespace {

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open output file: " + path);
    return out;
}

std::vector<double> split_csv_line(const std::string& line, const std::string& path) {
    std::vector<double> vals;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
        if (cell == "nan" || cell == "-nan")
            vals.push_back(std::numeric_limits<double>::quiet_NaN());
        else {
            try {
                vals.push_back(std::stod(cell));
            } catch (...) {
                throw Error("bad number '" + cell + "' in " + path);
            }
        }
    }
    return vals;
}

}  // namespace

void write_plan_csv(const MotionPlan& plan, const std::string& path) {
    auto out = open_out(path);
    out << "t,x1,x2,x3,x4,v,omega\n";
    for (std::size_t i = 0; i < plan.size(); ++i) {
        const CarState& s = plan.states[i];
        const CarInput& u = plan.inputs[i];
        out << format_double(plan.t[i]) << ',' << format_double(s.x1) << ','
            << format_double(s.x2) << ',' << format_double(s.x3) << ','
            << format_double(s.x4) << ',' << format_double(u.v) << ','
            << format_double(u.omega) << '\n';
    }
}

MotionPlan read_plan_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open plan file: " + path);
    std::string line;
    if (!std::getline(in, line)) throw Error("empty plan file: " + path);
    MotionPlan plan;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto v = split_csv_line(line, path);
        if (v.size() != 7) throw Error("bad plan row in " + path);
        plan.t.push_back(v[0]);
        plan.states.push_back({v[1], v[2], v[3], v[4]});
        plan.inputs.push_back({v[5], v[6]});
    }
    return plan;
}

void write_trace_csv(const HybridTrace& trace, const std::string& path) {
    auto out = open_out(path);
    out << "t,j,q,x1,x2,x3,x4,x5,x6,u1,u2,dist_gamma,"
           "eta1,eta2,eta3,xi1,xi2,xi3,eta2_ref,cbf_active,clf_relaxed\n";
    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (const TraceSample& s : trace.samples) {
        out << format_double(s.t) << ',' << s.j << ',' << s.q << ','
            << format_double(s.x.x1) << ',' << format_double(s.x.x2) << ','
            << format_double(s.x.x3) << ',' << format_double(s.x.x4) << ','
            << format_double(s.x.x5) << ',' << format_double(s.x.x6) << ','
            << format_double(s.u.u1) << ',' << format_double(s.u.u2) << ','
            << format_double(s.dist) << ',';
        if (s.tfl_valid) {
            out << format_double(s.eta(0)) << ',' << format_double(s.eta(1)) << ','
                << format_double(s.eta(2)) << ',' << format_double(s.xi(0)) << ','
                << format_double(s.xi(1)) << ',' << format_double(s.xi(2)) << ','
                << format_double(s.eta2_ref) << ',';
        } else {
            for (int i = 0; i < 7; ++i) out << format_double(nan) << ',';
        }
        out << (s.cbf_active ? 1 : 0) << ',' << (s.clf_relaxed ? 1 : 0) << '\n';
    }
}

HybridTrace read_trace_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open trace file: " + path);
    std::string line;
    if (!std::getline(in, line)) throw Error("empty trace file: " + path);
    HybridTrace trace;
    int prev_j = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto v = split_csv_line(line, path);
        if (v.size() != 21) throw Error("bad trace row in " + path);
        TraceSample s;
        s.t = v[0];
        s.j = static_cast<int>(v[1]);
        s.q = static_cast<int>(v[2]);
        s.x = {v[3], v[4], v[5], v[6], v[7], v[8]};
        s.u = {v[9], v[10]};
        s.dist = v[11];
        s.tfl_valid = !std::isnan(v[12]);
        if (s.tfl_valid) {
            s.eta = Vec3(v[12], v[13], v[14]);
            s.xi = Vec3(v[15], v[16], v[17]);
            s.eta2_ref = v[18];
        }
        s.cbf_active = v[19] != 0.0;
        s.clf_relaxed = v[20] != 0.0;
        if (s.j > prev_j) {
            trace.jumps.push_back({s.t, prev_j, 1 - s.q, s.q, s.dist});
            prev_j = s.j;
        }
        trace.samples.push_back(s);
    }
    trace.completed = true;
    return trace;
}

void write_summary_json(const RunSummary& summary, const HybridTrace& trace,
                        const std::string& path) {
    nlohmann::json j;
    j["jump_count"] = summary.jump_count;
    j["jumps"] = nlohmann::json::array();
    for (const JumpRecord& r : trace.jumps) {
        j["jumps"].push_back({{"t", r.t},
                              {"j_before", r.j_before},
                              {"from_q", r.from_q},
                              {"to_q", r.to_q},
                              {"dist", r.dist}});
    }
    if (summary.t_star)
        j["T_star"] = *summary.t_star;
    else
        j["T_star"] = nullptr;
    j["min_eta2"] = summary.min_eta2;
    j["max_barrier_violation"] = summary.max_barrier_violation;
    j["max_xi_after_T_star"] = summary.max_xi_after_t_star;
    j["min_speed"] = summary.min_speed;
    j["qp_infeasible_count"] = summary.qp_infeasible;
    j["qp_relaxed_count"] = summary.qp_relaxed;
    j["steering_clamp_count"] = summary.steering_clamps;
    j["final_q"] = summary.final_q;
    j["completed"] = summary.completed;
    j["samples"] = summary.samples;
    auto out = open_out(path);
    out << j.dump(2) << '\n';
}

void write_signal_csvs(const HybridTrace& trace, const std::string& out_dir) {
    auto xi = open_out(out_dir + "/xi.csv");
    auto speed = open_out(out_dir + "/speed.csv");
    auto dist = open_out(out_dir + "/distance.csv");
    auto mode = open_out(out_dir + "/mode.csv");
    xi << "t,xi1,xi2,xi3,xi_norm\n";
    speed << "t,eta2,eta2_ref\n";
    dist << "t,dist_gamma\n";
    mode << "t,q\n";
    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (const TraceSample& s : trace.samples) {
        if (s.tfl_valid) {
            xi << format_double(s.t) << ',' << format_double(s.xi(0)) << ','
               << format_double(s.xi(1)) << ',' << format_double(s.xi(2)) << ','
               << format_double(s.xi.norm()) << '\n';
            speed << format_double(s.t) << ',' << format_double(s.eta(1)) << ','
                  << format_double(s.eta2_ref) << '\n';
        } else {
            xi << format_double(s.t) << ",nan,nan,nan,nan\n";
            speed << format_double(s.t) << ',' << format_double(nan) << ','
                  << format_double(nan) << '\n';
        }
        dist << format_double(s.t) << ',' << format_double(s.dist) << '\n';
        mode << format_double(s.t) << ',' << s.q << '\n';
    }
}

}  // namespace pathinv
