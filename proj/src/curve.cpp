#include "pathinv/curve.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "pathinv/util.hpp"
#include "pathinv/vehicle.hpp"

namespace pathinv {

namespace {

// 10-point Gauss-Legendre nodes/weights on [-1, 1]
constexpr double kGlNode[10] = {
    -0.9739065285171717, -0.8650633666889845, -0.6794095682990244,
    -0.4333953941292472, -0.1488743389816312, 0.1488743389816312,
    0.4333953941292472,  0.6794095682990244,  0.8650633666889845,
    0.9739065285171717};
constexpr double kGlWeight[10] = {
    0.0666713443086881, 0.1494513491505806, 0.2190863625159820,
    0.2692667193099963, 0.2955242247147529, 0.2955242247147529,
    0.2692667193099963, 0.2190863625159820, 0.1494513491505806,
    0.0666713443086881};

constexpr int kTableSegments = 4096;
constexpr int kColdScanPoints = 2049;
constexpr double kTieTolerance = 1e-6;  // equal-minima detection (value)

}  // namespace

Curve Curve::circle(double radius) {
    if (!(radius > 0.0)) throw ScenarioError("circle radius must be positive");
    Curve c;
    c.kind_ = CurveKind::Circle;
    c.closed_ = true;
    c.radius_ = radius;
    c.length_ = 2.0 * kPi * radius;
    return c;
}

Curve Curve::polynomial(std::vector<double> coeffs, double x_min, double x_max) {
    if (coeffs.empty()) throw ScenarioError("polynomial curve needs coefficients");
    if (!(x_max > x_min)) throw ScenarioError("curve window must have x_max > x_min");
    Curve c;
    c.kind_ = CurveKind::Polynomial;
    c.closed_ = false;
    c.coeffs_ = std::move(coeffs);
    c.x_min_ = x_min;
    c.x_max_ = x_max;
    c.build_graph_tables();
    return c;
}

Curve Curve::sinusoid(double amplitude, double frequency, double x_min, double x_max) {
    if (!(frequency > 0.0)) throw ScenarioError("sinusoid frequency must be positive");
    if (!(x_max > x_min)) throw ScenarioError("curve window must have x_max > x_min");
    Curve c;
    c.kind_ = CurveKind::Sinusoid;
    c.closed_ = false;
    c.amplitude_ = amplitude;
    c.frequency_ = frequency;
    c.x_min_ = x_min;
    c.x_max_ = x_max;
    c.build_graph_tables();
    return c;
}

void Curve::profile(double x, double d[5]) const {
    if (kind_ == CurveKind::Polynomial) {
        // Horner for p and first four derivatives
        double p = 0, p1 = 0, p2 = 0, p3 = 0, p4 = 0;
        for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) {
            p4 = p4 * x + 4.0 * p3;
            p3 = p3 * x + 3.0 * p2;
            p2 = p2 * x + 2.0 * p1;
            p1 = p1 * x + p;
            p = p * x + *it;
        }
        d[0] = p; d[1] = p1; d[2] = p2; d[3] = p3; d[4] = p4;
    } else {
        const double w = frequency_;
        const double s = std::sin(w * x), c = std::cos(w * x);
        d[0] = amplitude_ * s;
        d[1] = amplitude_ * w * c;
        d[2] = -amplitude_ * w * w * s;
        d[3] = -amplitude_ * w * w * w * c;
        d[4] = amplitude_ * w * w * w * w * s;
    }
}

double Curve::arc_speed(double x) const {
    double d[5];
    profile(x, d);
    return std::sqrt(1.0 + d[1] * d[1]);
}

void Curve::build_graph_tables() {
    const int n = kTableSegments;
    x_nodes_.resize(n + 1);
    lam_nodes_.resize(n + 1);
    const double h = (x_max_ - x_min_) / n;
    double acc = 0.0;
    x_nodes_[0] = x_min_;
    lam_nodes_[0] = 0.0;
    for (int i = 0; i < n; ++i) {
        const double a = x_min_ + i * h;
        const double b = a + h;
        double seg = 0.0;
        for (int g = 0; g < 10; ++g) {
            const double x = 0.5 * (a + b) + 0.5 * h * kGlNode[g];
            seg += kGlWeight[g] * arc_speed(x);
        }
        acc += 0.5 * h * seg;
        x_nodes_[i + 1] = b;
        lam_nodes_[i + 1] = acc;
    }
    length_ = acc;

    grid_points_.resize(kColdScanPoints);
    const double hg = (x_max_ - x_min_) / (kColdScanPoints - 1);
    for (int i = 0; i < kColdScanPoints; ++i) {
        const double x = x_min_ + i * hg;
        double d[5];
        profile(x, d);
        grid_points_[i] = Vec2(x, d[0]);
    }
}

double Curve::lambda_of_x(double x) const {
    x = std::clamp(x, x_min_, x_max_);
    const double h = (x_max_ - x_min_) / kTableSegments;
    int i = std::clamp(static_cast<int>((x - x_min_) / h), 0, kTableSegments - 1);
    const double a = x_nodes_[i];
    double seg = 0.0;
    for (int g = 0; g < 10; ++g) {
        const double xx = 0.5 * (a + x) + 0.5 * (x - a) * kGlNode[g];
        seg += kGlWeight[g] * arc_speed(xx);
    }
    return lam_nodes_[i] + 0.5 * (x - a) * seg;
}

double Curve::x_of_lambda(double lambda) const {
    lambda = std::clamp(lambda, 0.0, length_);
    auto it = std::upper_bound(lam_nodes_.begin(), lam_nodes_.end(), lambda);
    int i = std::clamp(static_cast<int>(it - lam_nodes_.begin()) - 1, 0,
                       kTableSegments - 1);
    // cubic Hermite guess for x(lambda) on the segment; slopes are 1/q
    const double l0 = lam_nodes_[i], l1 = lam_nodes_[i + 1];
    const double x0 = x_nodes_[i], x1 = x_nodes_[i + 1];
    const double dl = l1 - l0;
    const double t = (lambda - l0) / dl;
    const double m0 = dl / arc_speed(x0), m1 = dl / arc_speed(x1);
    const double t2 = t * t, t3 = t2 * t;
    double x = (2 * t3 - 3 * t2 + 1) * x0 + (t3 - 2 * t2 + t) * m0 +
               (-2 * t3 + 3 * t2) * x1 + (t3 - t2) * m1;
    x = std::clamp(x, x0, x1);
    // Newton on lambda(x) - lambda = 0; derivative is the arc speed
    for (int it2 = 0; it2 < 8; ++it2) {
        const double f = lambda_of_x(x) - lambda;
        const double step = f / arc_speed(x);
        x -= step;
        x = std::clamp(x, x_min_, x_max_);
        if (std::abs(step) < 1e-13 * std::max(1.0, std::abs(x))) break;
    }
    return x;
}

FrenetFrame Curve::frame_at_x(double x) const {
    double d[5];
    profile(x, d);
    const double p1 = d[1], p2 = d[2], p3 = d[3], p4 = d[4];
    const double q2 = 1.0 + p1 * p1;
    const double q = std::sqrt(q2);
    FrenetFrame f;
    f.point = Vec2(x, d[0]);
    f.tangent = Vec2(1.0, p1) / q;
    f.normal = Vec2(-f.tangent.y(), f.tangent.x());
    const double q3 = q * q2, q4 = q2 * q2, q5 = q4 * q, q6 = q3 * q3,
                 q7 = q6 * q, q9 = q7 * q2;
    f.k = p2 / q3;
    f.dk = p3 / q4 - 3.0 * p1 * p2 * p2 / q6;
    f.ddk = p4 / q5 - 10.0 * p1 * p2 * p3 / q7 - 3.0 * p2 * p2 * p2 / q7 +
            18.0 * p1 * p1 * p2 * p2 * p2 / q9;
    f.lambda = lambda_of_x(x);
    return f;
}

double Curve::wrap_param(double lambda) const {
    if (closed_) {
        double l = std::fmod(lambda, length_);
        if (l < 0.0) l += length_;
        return l;
    }
    return std::clamp(lambda, 0.0, length_);
}

FrenetFrame Curve::frame(double lambda) const {
    lambda = wrap_param(lambda);
    if (kind_ == CurveKind::Circle) {
        const double th = lambda / radius_;
        FrenetFrame f;
        f.lambda = lambda;
        f.point = radius_ * Vec2(std::cos(th), std::sin(th));
        f.tangent = Vec2(-std::sin(th), std::cos(th));
        f.normal = Vec2(-f.tangent.y(), f.tangent.x());  // points inward
        f.k = 1.0 / radius_;
        f.dk = 0.0;
        f.ddk = 0.0;
        return f;
    }
    return frame_at_x(x_of_lambda(lambda));
}

Vec2 Curve::point(double lambda) const { return frame(lambda).point; }
Vec2 Curve::tangent(double lambda) const { return frame(lambda).tangent; }

Vec2 Curve::second_derivative(double lambda) const {
    const FrenetFrame f = frame(lambda);
    return f.k * f.normal;
}

double Curve::curvature(double lambda) const { return std::abs(signed_curvature(lambda)); }
double Curve::signed_curvature(double lambda) const { return frame(lambda).k; }

double Curve::tangent_angle(double lambda) const {
    const Vec2 t = tangent(lambda);
    return std::atan2(t.y(), t.x());
}

double Curve::implicit(const Vec2& y) const {
    if (kind_ == CurveKind::Circle) return y.squaredNorm() - radius_ * radius_;
    double d[5];
    profile(y.x(), d);
    return y.y() - d[0];
}

Vec2 Curve::implicit_gradient(const Vec2& y) const {
    if (kind_ == CurveKind::Circle) return 2.0 * y;
    double d[5];
    profile(y.x(), d);
    return Vec2(-d[1], 1.0);
}

Mat2 Curve::implicit_hessian(const Vec2& y) const {
    Mat2 h = Mat2::Zero();
    if (kind_ == CurveKind::Circle) {
        h(0, 0) = 2.0;
        h(1, 1) = 2.0;
        return h;
    }
    double d[5];
    profile(y.x(), d);
    h(0, 0) = -d[2];
    return h;
}

std::array<double, 4> Curve::implicit_third(const Vec2& y) const {
    if (kind_ == CurveKind::Circle) return {0.0, 0.0, 0.0, 0.0};
    double d[5];
    profile(y.x(), d);
    return {-d[3], 0.0, 0.0, 0.0};
}

ProjectionResult Curve::project_graph_newton(const Vec2& y, double x0) const {
    // stationarity of |y - (x, p(x))|^2: G(x) = (y1 - x) + (y2 - p)(p') = 0
    double x = std::clamp(x0, x_min_, x_max_);
    double d[5];
    bool converged = false;
    for (int it = 0; it < 50; ++it) {
        profile(x, d);
        const double ey = y.y() - d[0];
        const double g = (y.x() - x) + ey * d[1];
        const double gp = -1.0 + ey * d[2] - d[1] * d[1];
        if (std::abs(gp) < 1e-14) break;
        double step = -g / gp;
        // a Newton step longer than the window means the guess is bad
        if (std::abs(step) > (x_max_ - x_min_)) break;
        x += step;
        if (x <= x_min_) { x = x_min_; converged = true; break; }
        if (x >= x_max_) { x = x_max_; converged = true; break; }
        if (std::abs(step) * arc_speed(x) < 1e-12) { converged = true; break; }
    }
    if (!converged) {
        // bisection on G over a bracket around x0
        const double h = (x_max_ - x_min_) / (kColdScanPoints - 1);
        double a = std::max(x_min_, x0 - h), b = std::min(x_max_, x0 + h);
        auto G = [&](double xx) {
            double dd[5];
            profile(xx, dd);
            return (y.x() - xx) + (y.y() - dd[0]) * dd[1];
        };
        double ga = G(a), gb = G(b);
        if (ga * gb <= 0.0) {
            for (int it = 0; it < 200; ++it) {
                const double mid = 0.5 * (a + b);
                const double gm = G(mid);
                if (ga * gm <= 0.0) { b = mid; gb = gm; } else { a = mid; ga = gm; }
                if (b - a < 1e-13) break;
            }
            x = 0.5 * (a + b);
        } else {
            x = std::clamp(x0, x_min_, x_max_);
        }
    }
    ProjectionResult r;
    r.frame = frame_at_x(x);
    const Vec2 e = y - r.frame.point;
    r.normal_offset = e.dot(r.frame.normal);
    r.distance = e.norm();
    return r;
}

ProjectionResult Curve::project_full(const Vec2& y, double delta_y,
                                     std::optional<double> hint) const {
    if (kind_ == CurveKind::Circle) {
        const double rho = y.norm();
        const double dist = std::abs(rho - radius_);
        if (dist >= delta_y)
            throw NotInNeighborhood("point at distance " + std::to_string(dist) +
                                    " is outside the tube of radius " +
                                    std::to_string(delta_y));
        if (rho < 1e-12)
            throw NonUniqueProjection("circle center is equidistant from the whole path");
        ProjectionResult r;
        r.frame = frame(wrap_param(radius_ * std::atan2(y.y(), y.x())));
        r.normal_offset = (y - r.frame.point).dot(r.frame.normal);
        r.distance = dist;
        return r;
    }

    if (hint) {
        const double xh = x_of_lambda(wrap_param(*hint));
        ProjectionResult r = project_graph_newton(y, xh);
        if (r.distance >= delta_y)
            throw NotInNeighborhood("point at distance " + std::to_string(r.distance) +
                                    " is outside the tube of radius " +
                                    std::to_string(delta_y));
        return r;
    }

    // cold query: scan the cached grid, refine every local minimum
    const int n = kColdScanPoints;
    std::vector<double> d2(n);
    for (int i = 0; i < n; ++i) d2[i] = (grid_points_[i] - y).squaredNorm();

    std::vector<int> candidates;
    for (int i = 0; i < n; ++i) {
        const bool left_ok = (i == 0) || d2[i] <= d2[i - 1];
        const bool right_ok = (i == n - 1) || d2[i] <= d2[i + 1];
        if (left_ok && right_ok) candidates.push_back(i);
    }

    const double hg = (x_max_ - x_min_) / (n - 1);
    std::vector<ProjectionResult> refined;
    for (int idx : candidates) {
        refined.push_back(project_graph_newton(y, x_min_ + idx * hg));
    }
    std::sort(refined.begin(), refined.end(),
              [](const ProjectionResult& a, const ProjectionResult& b) {
                  return a.distance < b.distance;
              });
    // drop duplicates that converged to the same foot point
    std::vector<ProjectionResult> distinct;
    for (const auto& r : refined) {
        bool dup = false;
        for (const auto& kept : distinct) {
            if (std::abs(kept.frame.point.x() - r.frame.point.x()) < 4.0 * hg) {
                dup = true;
                break;
            }
        }
        if (!dup) distinct.push_back(r);
    }

    if (distinct.empty()) throw Error("projection: no candidates (empty grid)");
    if (distinct[0].distance >= delta_y)
        throw NotInNeighborhood("point at distance " +
                                std::to_string(distinct[0].distance) +
                                " is outside the tube of radius " +
                                std::to_string(delta_y));
    if (distinct.size() > 1 &&
        distinct[1].distance - distinct[0].distance < kTieTolerance)
        throw NonUniqueProjection("two projection minima tie within 1e-6: " +
                                  std::to_string(distinct[0].distance) + " vs " +
                                  std::to_string(distinct[1].distance));
    return distinct[0];
}

double Curve::project(const Vec2& y, double delta_y, std::optional<double> hint) const {
    return project_full(y, delta_y, hint).frame.lambda;
}

double Curve::distance(const Vec2& y) const {
    if (kind_ == CurveKind::Circle) return std::abs(y.norm() - radius_);
    const int n = kColdScanPoints;
    int best = 0;
    double best_d2 = (grid_points_[0] - y).squaredNorm();
    for (int i = 1; i < n; ++i) {
        const double d2 = (grid_points_[i] - y).squaredNorm();
        if (d2 < best_d2) { best_d2 = d2; best = i; }
    }
    const double hg = (x_max_ - x_min_) / (n - 1);
    return project_graph_newton(y, x_min_ + best * hg).distance;
}

std::pair<Vec2, Vec2> Curve::bounding_box() const {
    if (kind_ == CurveKind::Circle)
        return {Vec2(-radius_, -radius_), Vec2(radius_, radius_)};
    Vec2 lo = grid_points_[0], hi = grid_points_[0];
    for (const Vec2& p : grid_points_) {
        lo = lo.cwiseMin(p);
        hi = hi.cwiseMax(p);
    }
    return {lo, hi};
}

FeasibilityReport Curve::check_feasibility(const CarParams& car) const {
    FeasibilityReport rep;
    rep.curvature_limit = std::tan(car.max_steering) / car.length;
    if (kind_ == CurveKind::Circle) {
        rep.sup_curvature = 1.0 / radius_;
        rep.worst_lambda = 0.0;
    } else {
        const int n = 8192;
        const double h = (x_max_ - x_min_) / n;
        for (int i = 0; i <= n; ++i) {
            const double x = x_min_ + i * h;
            double d[5];
            profile(x, d);
            const double q2 = 1.0 + d[1] * d[1];
            const double k = std::abs(d[2]) / (q2 * std::sqrt(q2));
            if (k > rep.sup_curvature) {
                rep.sup_curvature = k;
                rep.worst_lambda = lambda_of_x(x);
            }
        }
    }
    rep.margin = rep.curvature_limit - rep.sup_curvature;
    rep.ok = rep.sup_curvature < rep.curvature_limit;
    return rep;
}

}  // namespace pathinv
