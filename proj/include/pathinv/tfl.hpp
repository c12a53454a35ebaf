#pragma once

#include <Eigen/Core>
#include <array>
#include <optional>

#include "pathinv/curve.hpp"
#include "pathinv/vehicle.hpp"

namespace pathinv {

using Vec3 = Eigen::Vector3d;

/// Spatial derivatives of one scalar output of position (the projection
/// parameter or the implicit level value), up to third order.
struct OutputDerivs {
    double value = 0.0;
    Vec2 grad = Vec2::Zero();
    Mat2 hess = Mat2::Zero();
    std::array<double, 8> third{};  // row-major [i][j][k], i,j,k in {0,1}

    double third_at(int i, int j, int k) const { return third[4 * i + 2 * j + k]; }
};

/// Both virtual outputs with their derivatives at one position, plus the
/// projection data they were built from.
struct VirtualOutputData {
    ProjectionResult foot;
    OutputDerivs pi;     // path-parameter output
    OutputDerivs alpha;  // level-value output
};

/// Lie derivatives of the virtual outputs along the extended dynamics.
/// Index k of pi/alpha holds the k-th derivative along the drift; g1/g2
/// arrays hold the input derivatives of the k-th drift derivative.
struct LieDerivs {
    std::array<double, 4> pi{};
    std::array<double, 4> alpha{};
    std::array<double, 3> g1_pi{};
    std::array<double, 3> g2_pi{};
    std::array<double, 3> g1_alpha{};
    std::array<double, 3> g2_alpha{};
    bool speed_singular = false;  // |nominal_speed + x5| below threshold
};

struct DecouplingMatrix {
    Mat2 m = Mat2::Zero();
    double det = 0.0;
};

struct TransverseCoords {
    Vec3 eta = Vec3::Zero();  // motion along the path: parameter and rates
    Vec3 xi = Vec3::Zero();   // deviation from the path: level value and rates
};

/// Everything the local controller needs at one state, computed in one pass.
struct TflEval {
    VirtualOutputData out;
    LieDerivs lie;
    DecouplingMatrix dec;
    TransverseCoords coords;
    double heading_alignment = 0.0;  // <grad pi, (cos x3, sin x3)>
};

inline constexpr double kSpeedSingularTol = 1e-9;
inline constexpr double kDetSingularTol = 1e-9;

/// Derivatives of the projection parameter with respect to the queried
/// point, from the Frenet data of the foot via implicit differentiation of
/// the orthogonality condition.
OutputDerivs projection_derivs(const ProjectionResult& proj);

VirtualOutputData virtual_output_derivs(const Vec2& y, const Curve& curve,
                                        double delta_y,
                                        std::optional<double> hint = std::nullopt);

/// (path parameter, level value) at the output position.
std::pair<double, double> virtual_output(const ExtendedState& x, const Curve& curve,
                                         double delta_y);

LieDerivs lie_derivatives(const ExtendedState& x, const VirtualOutputData& out,
                          const CarParams& p);
LieDerivs lie_derivatives(const ExtendedState& x, const Curve& curve,
                          const CarParams& p, double delta_y,
                          std::optional<double> hint = std::nullopt);

/// Assembles the 2x2 input-coupling matrix of the third output derivatives.
/// Throws Singularity when |det| < 1e-9.
DecouplingMatrix decoupling_matrix(const LieDerivs& lie);
DecouplingMatrix decoupling_matrix(const ExtendedState& x, const Curve& curve,
                                   const CarParams& p, double delta_y);

TflEval eval_tfl(const ExtendedState& x, const Curve& curve, const CarParams& p,
                 double delta_y, std::optional<double> hint = std::nullopt);

/// Coordinate change to (eta, xi). Throws Singularity when the forward speed
/// vanishes (the change of coordinates degenerates there).
TransverseCoords to_transverse(const ExtendedState& x, const Curve& curve,
                               const CarParams& p, double delta_y,
                               std::optional<double> hint = std::nullopt);

/// Inverse of the coordinate change restricted to the path (xi = 0).
ExtendedState from_transverse_on_path(const Vec3& eta, const Curve& curve,
                                      const CarParams& p);

/// Linearizing feedback: solves the decoupling system so that the third
/// derivatives of the outputs track (v_par, v_perp).
AuxInput kappa_fb(const TflEval& eval, double v_par, double v_perp);
AuxInput kappa_fb(const ExtendedState& x, const Curve& curve, const CarParams& p,
                  double delta_y, double v_par, double v_perp,
                  std::optional<double> hint = std::nullopt);

}  // namespace pathinv
