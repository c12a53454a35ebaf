#pragma once

#include <stdexcept>
#include <string>

namespace pathinv {

// Base for all library errors so callers can catch the whole family.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NotInNeighborhood : Error {
    explicit NotInNeighborhood(const std::string& what) : Error(what) {}
};

struct NonUniqueProjection : Error {
    explicit NonUniqueProjection(const std::string& what) : Error(what) {}
};

struct CurvatureInfeasible : Error {
    explicit CurvatureInfeasible(const std::string& what) : Error(what) {}
};

struct SteeringLimit : Error {
    explicit SteeringLimit(const std::string& what) : Error(what) {}
};

struct NonFiniteState : Error {
    explicit NonFiniteState(const std::string& what) : Error(what) {}
};

struct Singularity : Error {
    explicit Singularity(const std::string& what) : Error(what) {}
};

struct HeadingViolation : Error {
    explicit HeadingViolation(const std::string& what) : Error(what) {}
};

struct EmptyPlan : Error {
    explicit EmptyPlan(const std::string& what) : Error(what) {}
};

struct StartInCollision : Error {
    explicit StartInCollision(const std::string& what) : Error(what) {}
};

struct BudgetExhausted : Error {
    explicit BudgetExhausted(const std::string& what) : Error(what) {}
};

struct NotInFlowOrJumpSet : Error {
    explicit NotInFlowOrJumpSet(const std::string& what) : Error(what) {}
};

struct ScenarioError : Error {
    explicit ScenarioError(const std::string& what) : Error(what) {}
};

}  // namespace pathinv
