#pragma once

#include <Eigen/Core>
#include <optional>
#include <vector>

#include "pathinv/errors.hpp"

namespace pathinv {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;

enum class CurveKind { Circle, Polynomial, Sinusoid };

/// Frenet data of the curve at one parameter value. The parameter is arc
/// length, so `tangent` is unit and `k` is the signed curvature (positive
/// when the curve bends toward `normal` = tangent rotated +90 degrees).
struct FrenetFrame {
    double lambda = 0.0;
    Vec2 point = Vec2::Zero();
    Vec2 tangent = Vec2::Zero();
    Vec2 normal = Vec2::Zero();
    double k = 0.0;    // signed curvature
    double dk = 0.0;   // d(k)/d(arc length)
    double ddk = 0.0;  // d2(k)/d(arc length)2
};

/// Closest-point query result: the frame at the foot point plus the signed
/// normal offset of the query point.
struct ProjectionResult {
    FrenetFrame frame;
    double normal_offset = 0.0;  // <y - foot, normal>
    double distance = 0.0;       // |y - foot|
};

struct FeasibilityReport {
    bool ok = false;
    double sup_curvature = 0.0;
    double curvature_limit = 0.0;  // tan(max steering)/length
    double worst_lambda = 0.0;
    double margin = 0.0;  // limit - sup
};

struct CarParams;  // vehicle.hpp

/// A planar reference path held in both representations: a unit-speed
/// parametric map sigma(lambda) and an implicit level function s(y) whose
/// zero set is the path. Circles carry both analytically; graph curves
/// (polynomial, sinusoid) are reparameterized to arc length through a
/// cumulative arc-length table. Immutable after construction.
class Curve {
public:
    static Curve circle(double radius);
    static Curve polynomial(std::vector<double> coeffs, double x_min, double x_max);
    static Curve sinusoid(double amplitude, double frequency, double x_min, double x_max);

    CurveKind kind() const { return kind_; }
    bool closed() const { return closed_; }
    /// Total arc length of the domain (period for closed curves).
    double length() const { return length_; }
    /// Wraps (closed) or clamps (open) a parameter into the domain.
    double wrap_param(double lambda) const;

    Vec2 point(double lambda) const;              // sigma
    Vec2 tangent(double lambda) const;            // sigma', unit
    Vec2 second_derivative(double lambda) const;  // sigma''
    double curvature(double lambda) const;        // |sigma''| >= 0
    double signed_curvature(double lambda) const;
    double tangent_angle(double lambda) const;  // atan2 of sigma', in (-pi, pi]
    FrenetFrame frame(double lambda) const;

    double implicit(const Vec2& y) const;  // s(y)
    Vec2 implicit_gradient(const Vec2& y) const;
    Mat2 implicit_hessian(const Vec2& y) const;
    /// Third partials of s: {s_111, s_112, s_122, s_222}.
    std::array<double, 4> implicit_third(const Vec2& y) const;

    /// Closest-point projection for y inside the tube of radius delta_y.
    /// A lambda hint skips the global candidate scan and refines locally
    /// (used by the simulator, which tracks the foot point continuously).
    /// Throws NotInNeighborhood when the distance is >= delta_y and
    /// NonUniqueProjection when two minima tie within 1e-6.
    ProjectionResult project_full(const Vec2& y, double delta_y,
                                  std::optional<double> hint = std::nullopt) const;
    double project(const Vec2& y, double delta_y,
                   std::optional<double> hint = std::nullopt) const;

    /// Distance from an arbitrary point to the path (no tube requirement).
    double distance(const Vec2& y) const;

    /// Axis-aligned bounds of the path (sampled).
    std::pair<Vec2, Vec2> bounding_box() const;

    FeasibilityReport check_feasibility(const CarParams& car) const;

private:
    Curve() = default;
    void build_graph_tables();

    // graph profile p(x) and its first four derivatives
    void profile(double x, double d[5]) const;
    FrenetFrame frame_at_x(double x) const;
    double lambda_of_x(double x) const;
    double x_of_lambda(double lambda) const;
    double arc_speed(double x) const;  // sqrt(1 + p'(x)^2)
    ProjectionResult project_graph_newton(const Vec2& y, double x0) const;

    CurveKind kind_ = CurveKind::Circle;
    bool closed_ = true;
    double length_ = 0.0;

    // circle
    double radius_ = 1.0;

    // graph curves
    std::vector<double> coeffs_;  // polynomial
    double amplitude_ = 0.0, frequency_ = 0.0;
    double x_min_ = 0.0, x_max_ = 0.0;
    std::vector<double> x_nodes_;    // uniform in x
    std::vector<double> lam_nodes_;  // cumulative arc length at x_nodes_
    std::vector<Vec2> grid_points_;  // cached positions for cold scans
};

}  // namespace pathinv
