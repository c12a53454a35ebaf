#pragma once

#include <vector>

#include "pathinv/vehicle.hpp"

namespace pathinv {

/// Time-stamped state and input trajectory. Between consecutive samples the
/// recorded input is held constant; sample k's input drives the segment from
/// t[k] to t[k+1] (the final input is a terminal placeholder).
struct MotionPlan {
    std::vector<double> t;
    std::vector<CarState> states;
    std::vector<CarInput> inputs;

    bool empty() const { return states.empty(); }
    std::size_t size() const { return states.size(); }
    double duration() const { return t.empty() ? 0.0 : t.back(); }
};

}  // namespace pathinv
