#pragma once

#include <string>

#include "pathinv/motion_plan.hpp"
#include "pathinv/supervisor.hpp"

namespace pathinv {

/// Floats are written with 17 significant digits so files reload bit-stable.
std::string format_double(double v);

void write_plan_csv(const MotionPlan& plan, const std::string& path);
MotionPlan read_plan_csv(const std::string& path);

/// Column order: t, j, q, x1..x6, u1, u2, dist_gamma, eta1..eta3,
/// xi1..xi3, eta2_ref, cbf_active, clf_relaxed. Transverse columns hold
/// nan on samples where the local coordinates were not evaluated.
void write_trace_csv(const HybridTrace& trace, const std::string& path);
HybridTrace read_trace_csv(const std::string& path);

void write_summary_json(const RunSummary& summary, const HybridTrace& trace,
                        const std::string& path);

/// Plot-ready per-signal files: xi.csv, speed.csv, distance.csv, mode.csv.
void write_signal_csvs(const HybridTrace& trace, const std::string& out_dir);

}  // namespace pathinv
